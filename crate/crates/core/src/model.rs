//! Charge-qubit Hamiltonians.
//!
//! Energies are dimensionless with ħ = 1, so times carry units of inverse
//! energy. Two parametrizations are supported: physical circuit parameters
//! ([`QubitCircuitParams`]) and the reduced symmetric two-qubit form
//! `H = B(σx⊗I + I⊗σx) + J σy⊗σy` ([`TwoQubitParams`]).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Matrix, Tensor, C64, DEFAULT_MAX_QUBITS, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        let rows = match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        Matrix::from_rows(&rows).expect("2x2 literal")
    }

    /// Action on a single basis bit: `P|b> = phase |b ^ flip>`.
    fn act(self, bit: usize) -> (usize, C64) {
        match self {
            Pauli::I => (bit, ONE),
            Pauli::X => (bit ^ 1, ONE),
            Pauli::Y => (bit ^ 1, if bit == 0 { I } else { -I }),
            Pauli::Z => (bit, if bit == 0 { ONE } else { -ONE }),
        }
    }
}

/// Adds `coeff * P_1 ⊗ ... ⊗ P_n` (identity on unlisted qubits) to `m`.
///
/// `factors` are `(qubit, pauli)` pairs with 1-based qubit indices; qubit 1
/// is the most significant bit. Each column of a Pauli string has exactly one
/// nonzero entry, so this costs `O(2^n)` instead of a chain of Kronecker
/// products.
pub fn add_pauli_string(m: &mut Matrix, n_qubits: usize, coeff: f64, factors: &[(usize, Pauli)]) -> Result<()> {
    if m.dim() != 1 << n_qubits {
        return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: m.dim() });
    }
    for &(q, _) in factors {
        if q == 0 || q > n_qubits {
            return Err(Error::InvalidQubit { index: q, n_qubits });
        }
    }
    for col in 0..m.dim() {
        let mut row = col;
        let mut amp = C64::new(coeff, 0.0);
        for &(q, p) in factors {
            let shift = n_qubits - q;
            let (bit, phase) = p.act((col >> shift) & 1);
            row = (row & !(1 << shift)) | (bit << shift);
            amp *= phase;
        }
        m.add_at(row, col, amp);
    }
    Ok(())
}

/// Embeds a single-qubit operator on `qubit` (1-based) of an `n`-qubit register
/// via Kronecker products.
pub fn embed(op: &Matrix, qubit: usize, n_qubits: usize) -> Result<Matrix> {
    if qubit == 0 || qubit > n_qubits {
        return Err(Error::InvalidQubit { index: qubit, n_qubits });
    }
    let mut out = Matrix::identity(1);
    for q in 1..=n_qubits {
        let factor = if q == qubit { op.clone() } else { Matrix::identity(2) };
        out = out.tensor_with_limit(&factor, n_qubits.max(DEFAULT_MAX_QUBITS))?;
    }
    Ok(out)
}

/// Physical parameters of one SQUID-box charge qubit.
///
/// `phi_x` is measured in units of the flux quantum, so the effective
/// Josephson energy `E_J = 2 E_J0 cos(π phi_x)` is periodic with period 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitCircuitParams {
    pub e_j0: f64,
    pub phi_x: f64,
    pub n_x: f64,
    pub e_ch: f64,
    pub e_l: f64,
}

impl QubitCircuitParams {
    pub fn new(e_j0: f64, phi_x: f64, n_x: f64, e_ch: f64, e_l: f64) -> Result<Self> {
        let p = Self { e_j0, phi_x, n_x, e_ch, e_l };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.e_j0, self.phi_x, self.n_x, self.e_ch, self.e_l];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("circuit parameters must be finite".into()));
        }
        if self.e_ch <= 0.0 {
            return Err(Error::InvalidArgument(format!("E_ch must be positive, got {}", self.e_ch)));
        }
        if self.e_l <= 0.0 {
            return Err(Error::InvalidArgument(format!("E_L must be positive, got {}", self.e_l)));
        }
        Ok(())
    }

    /// Flux-tuned effective Josephson energy.
    pub fn e_j(&self) -> f64 {
        2.0 * self.e_j0 * (PI * self.phi_x).cos()
    }

    /// Transverse field `B_x = -E_J`.
    pub fn b_x(&self) -> f64 {
        -self.e_j()
    }

    /// Longitudinal field `B_z = -2 E_ch (1 - 2 n_x)`.
    pub fn b_z(&self) -> f64 {
        -2.0 * self.e_ch * (1.0 - 2.0 * self.n_x)
    }
}

/// `H = -(E_J/2) σx - E_ch (1 - 2 n_x) σz`.
pub fn single_qubit_hamiltonian(p: &QubitCircuitParams) -> HermitianOperator {
    let mut m = Matrix::zeros(2);
    add_pauli_string(&mut m, 1, -0.5 * p.e_j(), &[(1, Pauli::X)]).expect("1 qubit");
    add_pauli_string(&mut m, 1, -p.e_ch * (1.0 - 2.0 * p.n_x), &[(1, Pauli::Z)]).expect("1 qubit");
    HermitianOperator::from_raw(m)
}

/// Register of qubits with per-qubit fields and pairwise σy σy couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct NQubitParams {
    n_qubits: usize,
    b_x: Vec<f64>,
    b_z: Vec<f64>,
    coupling: Vec<f64>,
    max_qubits: usize,
}

impl NQubitParams {
    /// `coupling` is the full row-major `n × n` matrix `J^{(ij)}`; it must be
    /// symmetric with a zero diagonal.
    pub fn new(b_x: Vec<f64>, b_z: Vec<f64>, coupling: Vec<f64>) -> Result<Self> {
        let n = b_x.len();
        if n == 0 {
            return Err(Error::InvalidArgument("register needs at least one qubit".into()));
        }
        if b_z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b_z.len() });
        }
        if coupling.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: coupling.len() });
        }
        if b_x.iter().chain(&b_z).chain(&coupling).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("register parameters must be finite".into()));
        }
        for i in 0..n {
            if coupling[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("coupling J[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if coupling[i * n + j] != coupling[j * n + i] {
                    return Err(Error::InvalidArgument(format!("coupling matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n_qubits: n, b_x, b_z, coupling, max_qubits: DEFAULT_MAX_QUBITS })
    }

    /// Same field on every qubit and the same coupling between every pair.
    pub fn uniform(n_qubits: usize, b_x: f64, b_z: f64, j: f64) -> Result<Self> {
        let coupling = (0..n_qubits * n_qubits)
            .map(|k| if k / n_qubits == k % n_qubits { 0.0 } else { j })
            .collect();
        Self::new(vec![b_x; n_qubits], vec![b_z; n_qubits], coupling)
    }

    /// Register built from circuit parameters, `J^{(ij)} = -E_J^{(i)} E_J^{(j)} / E_L`.
    /// All qubits share one coupling inductor, so their `e_l` must agree.
    pub fn from_circuits(circuits: &[QubitCircuitParams]) -> Result<Self> {
        let first = circuits.first().ok_or_else(|| Error::InvalidArgument("no circuits".into()))?;
        for c in circuits {
            c.validate()?;
            if c.e_l != first.e_l {
                return Err(Error::InvalidArgument("all qubits must share the same E_L".into()));
            }
        }
        let n = circuits.len();
        let mut coupling = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    coupling[i * n + j] = -circuits[i].e_j() * circuits[j].e_j() / first.e_l;
                }
            }
        }
        Self::new(
            circuits.iter().map(QubitCircuitParams::b_x).collect(),
            circuits.iter().map(QubitCircuitParams::b_z).collect(),
            coupling,
        )
    }

    /// The two-qubit register equivalent to `B(σx⊗I + I⊗σx) + J σy⊗σy`.
    pub fn from_two_qubit(p: &TwoQubitParams) -> Self {
        Self::new(vec![2.0 * p.b(), 2.0 * p.b()], vec![0.0, 0.0], vec![0.0, p.j(), p.j(), 0.0])
            .expect("finite two-qubit parameters")
    }

    pub fn with_max_qubits(mut self, max_qubits: usize) -> Self {
        self.max_qubits = max_qubits;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn b_x(&self) -> &[f64] {
        &self.b_x
    }

    pub fn b_z(&self) -> &[f64] {
        &self.b_z
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n_qubits + j]
    }
}

/// `H = ½ Σ_i (B_x^i σx^i + B_z^i σz^i) + Σ_{i<j} J^{ij} σy^i σy^j`.
pub fn n_qubit_hamiltonian(p: &NQubitParams) -> Result<HermitianOperator> {
    let n = p.n_qubits;
    if n > p.max_qubits {
        return Err(Error::Capacity { requested: n, max: p.max_qubits });
    }
    let mut m = Matrix::zeros(1 << n);
    for q in 1..=n {
        if p.b_x[q - 1] != 0.0 {
            add_pauli_string(&mut m, n, 0.5 * p.b_x[q - 1], &[(q, Pauli::X)])?;
        }
        if p.b_z[q - 1] != 0.0 {
            add_pauli_string(&mut m, n, 0.5 * p.b_z[q - 1], &[(q, Pauli::Z)])?;
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            let jij = p.coupling(i - 1, j - 1);
            if jij != 0.0 {
                add_pauli_string(&mut m, n, jij, &[(i, Pauli::Y), (j, Pauli::Y)])?;
            }
        }
    }
    Ok(HermitianOperator::from_raw(m))
}

/// Reduced symmetric two-qubit parameters; `alpha = sqrt(4B² + J²)` is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitParams {
    b: f64,
    j: f64,
    alpha: f64,
}

impl TwoQubitParams {
    pub fn new(b: f64, j: f64) -> Result<Self> {
        if !(b.is_finite() && j.is_finite()) {
            return Err(Error::InvalidArgument("B and J must be finite".into()));
        }
        Ok(Self { b, j, alpha: (4.0 * b * b + j * j).sqrt() })
    }

    /// Symmetric pair at the charge degeneracy point (`n_x = 1/2`, so
    /// `B_z = 0`): `B = -E_J/2`, `J = -E_J²/E_L`.
    pub fn from_circuit(c: &QubitCircuitParams) -> Result<Self> {
        c.validate()?;
        if c.b_z().abs() > 1e-12 * c.e_ch {
            return Err(Error::InvalidArgument(format!(
                "two-qubit form needs B_z = 0 (n_x = 1/2), got n_x = {}",
                c.n_x
            )));
        }
        let e_j = c.e_j();
        Self::new(-0.5 * e_j, -e_j * e_j / c.e_l)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// `H = B(σx⊗I + I⊗σx) + J σy⊗σy`, assembled from explicit Kronecker products.
pub fn two_qubit_hamiltonian(p: &TwoQubitParams) -> HermitianOperator {
    let x = Pauli::X.matrix();
    let y = Pauli::Y.matrix();
    let id = Matrix::identity(2);
    let b = C64::new(p.b, 0.0);
    let field = x.kron(&id).add(&id.kron(&x)).expect("4x4").scale(b);
    let coupling = y.kron(&y).scale(C64::new(p.j, 0.0));
    HermitianOperator::from_raw(field.add(&coupling).expect("4x4"))
}
