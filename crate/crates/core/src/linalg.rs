//! Dense complex linear algebra for small qubit registers.
//!
//! Basis ordering: qubit 1 is the most significant bit of the basis index, so
//! for two qubits the computational basis is `|00>, |01>, |10>, |11>` and
//! `|01>` has index 1.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default upper bound on register size for dense operators.
pub const DEFAULT_MAX_QUBITS: usize = 14;

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Number of qubits spanned by a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Square dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row slices; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m.data[k * diag.len() + k] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.dim + j] = value;
    }

    pub(crate) fn add_at(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.dim + j] += value;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rhs = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(rhs) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |i, j| self.get(i / n, j / n) * other.get(i % n, j % n))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest elementwise deviation of `M^dagger M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        match self.adjoint().matmul(self) {
            Ok(p) => p.max_abs_diff(&Matrix::identity(self.dim)),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

/// Normalized pure state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps an amplitude vector, rejecting it unless `sum |a_k|^2 = 1` within 1e-10.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(format!("cannot normalize vector of norm {norm}")));
        }
        Ok(Self { n_qubits, amps: amps.into_iter().map(|z| z / norm).collect() })
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        debug_assert!(amps.len().is_power_of_two());
        Self { n_qubits: amps.len().trailing_zeros() as usize, amps }
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .ok_or(Error::Capacity { requested: n_qubits, max: DEFAULT_MAX_QUBITS })?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        inner(self, other)
    }

    pub fn with_global_phase(&self, gamma: f64) -> Self {
        let phase = C64::from_polar(1.0, gamma);
        Self { n_qubits: self.n_qubits, amps: self.amps.iter().map(|z| z * phase).collect() }
    }

    pub fn apply(&self, u: &UnitaryOperator) -> Result<PureState> {
        Ok(Self { n_qubits: self.n_qubits, amps: u.matrix().apply(&self.amps)? })
    }

    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Fidelity-based distance that ignores a global phase: `1 - |<a|b>|`.
    pub fn phase_insensitive_distance(&self, other: &PureState) -> f64 {
        match inner(self, other) {
            Ok(z) => (1.0 - z.norm()).abs(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// `<a|b>` with conjugation on the first argument.
pub fn inner(a: &PureState, b: &PureState) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Objects that form Kronecker products (operators and state vectors).
pub trait Tensor: Sized {
    fn tensor_with_limit(&self, other: &Self, max_qubits: usize) -> Result<Self>;

    fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_with_limit(other, DEFAULT_MAX_QUBITS)
    }
}

/// `a ⊗ b` with qubit(s) of `a` as the most significant index.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

fn combined_qubits(dim_a: usize, dim_b: usize, max_qubits: usize) -> Result<usize> {
    let n = qubits_for_dim(dim_a)? + qubits_for_dim(dim_b)?;
    if n > max_qubits {
        return Err(Error::Capacity { requested: n, max: max_qubits });
    }
    Ok(n)
}

impl Tensor for Matrix {
    fn tensor_with_limit(&self, other: &Self, max_qubits: usize) -> Result<Self> {
        combined_qubits(self.dim, other.dim, max_qubits)?;
        Ok(self.kron(other))
    }
}

impl Tensor for PureState {
    fn tensor_with_limit(&self, other: &Self, max_qubits: usize) -> Result<Self> {
        let n_qubits = combined_qubits(self.dim(), other.dim(), max_qubits)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { n_qubits, amps })
    }
}

impl Tensor for HermitianOperator {
    fn tensor_with_limit(&self, other: &Self, max_qubits: usize) -> Result<Self> {
        Ok(Self(self.0.tensor_with_limit(&other.0, max_qubits)?))
    }
}

impl Tensor for UnitaryOperator {
    fn tensor_with_limit(&self, other: &Self, max_qubits: usize) -> Result<Self> {
        Ok(Self(self.0.tensor_with_limit(&other.0, max_qubits)?))
    }
}

/// Dense Hermitian operator on a register of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(Matrix);

impl HermitianOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        qubits_for_dim(m.dim())?;
        if !m.is_finite() {
            return Err(Error::InvalidArgument("non-finite operator entry".into()));
        }
        let max_deviation = m.hermiticity_defect();
        if max_deviation > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { max_deviation });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_raw(m: Matrix) -> Self {
        Self(m)
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self(Matrix::zeros(1 << n_qubits))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.0.dim().trailing_zeros() as usize
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(C64::new(factor, 0.0)))
    }

    pub fn is_real(&self) -> bool {
        self.0.data.iter().all(|z| z.im == 0.0)
    }

    /// Spectral decomposition `H = V diag(λ) V^dagger`.
    ///
    /// Real symmetric input goes through the real solver, which is several
    /// times faster than the complex one at large dimension.
    pub fn eigh(&self) -> Result<SpectralDecomposition> {
        let n = self.dim();
        let fail = |_| Error::EigenSolver { dim: n, report: self.condition_report() };
        if self.is_real() {
            let a = Mat::<f64>::from_fn(n, n, |i, j| self.0.get(i, j).re);
            let evd = a.self_adjoint_eigen(Side::Lower).map_err(fail)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let eigenvalues = (0..n).map(|k| s[k]).collect();
            let vectors = Matrix::from_fn(n, |i, j| C64::new(u[(i, j)], 0.0));
            Ok(SpectralDecomposition { eigenvalues, vectors })
        } else {
            let a = Mat::<C64>::from_fn(n, n, |i, j| self.0.get(i, j));
            let evd = a.self_adjoint_eigen(Side::Lower).map_err(fail)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let eigenvalues = (0..n).map(|k| s[k].re).collect();
            let vectors = Matrix::from_fn(n, |i, j| u[(i, j)]);
            Ok(SpectralDecomposition { eigenvalues, vectors })
        }
    }

    fn condition_report(&self) -> String {
        let frob = self.0.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diag_min = (0..self.dim()).map(|k| self.0.get(k, k).re).fold(f64::INFINITY, f64::min);
        let diag_max = (0..self.dim()).map(|k| self.0.get(k, k).re).fold(f64::NEG_INFINITY, f64::max);
        format!(
            "frobenius norm {frob:e}, max |entry| {:e}, diagonal range [{diag_min:e}, {diag_max:e}], hermiticity defect {:e}",
            self.0.max_abs(),
            self.0.hermiticity_defect()
        )
    }
}

/// Dense unitary operator. Unitarity is a tested property, not checked per call.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(Matrix);

impl UnitaryOperator {
    pub fn from_matrix(m: Matrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, other: &UnitaryOperator) -> Result<Self> {
        Ok(Self(self.0.matmul(&other.0)?))
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.0.unitarity_defect()
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_insensitive_diff(&self, other: &UnitaryOperator) -> f64 {
        let overlap: C64 = self.0.data.iter().zip(&other.0.data).map(|(a, b)| a.conj() * b).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.0.scale(phase).max_abs_diff(&other.0)
    }
}

/// Eigenvalues and orthonormal eigenvectors (stored as matrix columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Matrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `e^{-iHt} = V diag(e^{-iλt}) V^dagger`.
    pub fn propagator(&self, t: f64) -> UnitaryOperator {
        let n = self.dim();
        let phases: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let v = &self.vectors;
        UnitaryOperator(Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| v.get(i, k) * phases[k] * v.get(j, k).conj()).sum()
        }))
    }

    /// Components of `v` in the eigenbasis, `V^dagger v`.
    pub fn to_eigenbasis(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let mut c = vec![ZERO; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == ZERO {
                continue;
            }
            for (ck, &u) in c.iter_mut().zip(self.vectors.row(i)) {
                *ck += u.conj() * vi;
            }
        }
        Ok(c)
    }

    /// `V diag(e^{-iλt}) c` for eigenbasis coefficients `c`.
    pub fn evolve_coefficients(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let phased: Vec<C64> = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(&c, &l)| c * C64::from_polar(1.0, -l * t))
            .collect();
        (0..self.dim())
            .map(|i| self.vectors.row(i).iter().zip(&phased).map(|(u, c)| u * c).sum())
            .collect()
    }
}

/// `e^{-iHt}` by spectral decomposition.
pub fn hermitian_expm(h: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    Ok(h.eigh()?.propagator(t))
}
