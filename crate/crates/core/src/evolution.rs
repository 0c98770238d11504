//! Two-qubit dynamics from `|00>`, single-qubit gates and Bloch rotations.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Matrix, PureState, SpectralDecomposition, UnitaryOperator, C64, DEFAULT_MAX_QUBITS, ZERO};
use crate::model::TwoQubitParams;

/// Below this `alpha`, `sin(alpha t)/alpha` switches to its Taylor series.
pub const SMALL_ALPHA: f64 = 1e-8;

/// `sin(alpha t) / alpha`, continuous through `alpha = 0`.
pub(crate) fn sin_over(alpha: f64, t: f64) -> f64 {
    if alpha.abs() < SMALL_ALPHA {
        let x = alpha * t;
        t * (1.0 - x * x / 6.0)
    } else {
        (alpha * t).sin() / alpha
    }
}

/// State at time `t` under `B(σx⊗I + I⊗σx) + J σy⊗σy`, starting from `|00>`.
///
/// The four amplitudes are
///
/// ```text
/// a0 =  ½ e^{-iJt} + (α-J)/(4α) e^{-iαt} + (α+J)/(4α) e^{iαt}
/// a1 = a2 = -i (B/α) sin(αt)
/// a3 = -½ e^{-iJt} + (α-J)/(4α) e^{-iαt} + (α+J)/(4α) e^{iαt}
/// ```
///
/// with `α = sqrt(4B² + J²)`. For `α < SMALL_ALPHA` the `1/α` pieces are
/// regrouped into `cos(αt)/2 + i J sin(αt)/(2α)` and evaluated by series.
pub fn evolve_closed_form(p: &TwoQubitParams, t: f64) -> PureState {
    let (b, j, alpha) = (p.b(), p.j(), p.alpha());
    let half_ej = C64::from_polar(0.5, -j * t);
    let common = if alpha < SMALL_ALPHA {
        C64::new(0.5 * (alpha * t).cos(), 0.5 * j * sin_over(alpha, t))
    } else {
        C64::from_polar((alpha - j) / (4.0 * alpha), -alpha * t)
            + C64::from_polar((alpha + j) / (4.0 * alpha), alpha * t)
    };
    let a1 = C64::new(0.0, -b * sin_over(alpha, t));
    PureState::from_raw(vec![half_ej + common, a1, a1, -half_ej + common])
}

/// `U_z(θ) = exp(-i θ σz / 2)`.
pub fn gate_uz(theta_z: f64) -> UnitaryOperator {
    UnitaryOperator::from_matrix(Matrix::from_diagonal(&[
        C64::from_polar(1.0, -theta_z / 2.0),
        C64::from_polar(1.0, theta_z / 2.0),
    ]))
}

/// `U_x(θ) = exp(-i θ σx / 2)`.
pub fn gate_ux(theta_x: f64) -> UnitaryOperator {
    let c = C64::new((theta_x / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta_x / 2.0).sin());
    UnitaryOperator::from_matrix(Matrix::from_rows(&[[c, s], [s, c]]).expect("2x2"))
}

/// Measurement direction on the Bloch sphere, stored as unwrapped angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochDirection {
    pub theta: f64,
    pub phi: f64,
}

impl BlochDirection {
    /// The reference direction `0`, i.e. no rotation.
    pub const ZERO: BlochDirection = BlochDirection { theta: 0.0, phi: 0.0 };

    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// `n_a = (0, 0, -1)`: the flip direction `(θ, φ) = (π, 0)`.
    pub const fn n_a() -> Self {
        Self::new(PI, 0.0)
    }

    /// `n_b = (0, 1, 0)`: `(θ, φ) = (π/2, π/2)`.
    pub const fn n_b() -> Self {
        Self::new(FRAC_PI_2, FRAC_PI_2)
    }

    /// `n_c = (0, -1, 0)`: `(θ, φ) = (π/2, -π/2)`.
    pub const fn n_c() -> Self {
        Self::new(FRAC_PI_2, -FRAC_PI_2)
    }

    /// `(sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `|n> = g(n)|0> = cos(θ/2) e^{-iφ/2} |0> - i sin(θ/2) e^{iφ/2} |1>`.
    pub fn ket(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::from_polar(c, -self.phi / 2.0), C64::new(0.0, -1.0) * C64::from_polar(s, self.phi / 2.0)]
    }

    /// `g(n) = U_z(φ) U_x(θ)` as a raw 2x2 array.
    pub(crate) fn rotation_entries(&self) -> [[C64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let em = C64::from_polar(1.0, -self.phi / 2.0);
        let ep = C64::from_polar(1.0, self.phi / 2.0);
        let mis = C64::new(0.0, -s);
        [[em * c, em * mis], [ep * mis, ep * c]]
    }
}

/// `g(n) = U_z(φ) U_x(θ)`; its adjoint rotates `|n>` onto `|0>`.
pub fn bloch_rotation(n: &BlochDirection) -> UnitaryOperator {
    gate_uz(n.phi).compose(&gate_ux(n.theta)).expect("2x2")
}

fn adjoint2(m: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

fn check_two_qubit(psi: &PureState) -> Result<()> {
    if psi.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: psi.dim() });
    }
    Ok(())
}

/// `|ψ(n1, n2)> = g⁺(n1) ⊗ g⁺(n2) |ψ>`.
pub fn rotate_state(psi: &PureState, n1: &BlochDirection, n2: &BlochDirection) -> Result<PureState> {
    check_two_qubit(psi)?;
    let u1 = adjoint2(n1.rotation_entries());
    let u2 = adjoint2(n2.rotation_entries());
    let a = psi.amplitudes();
    let mut out = vec![ZERO; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let (i1, i2) = (i >> 1, i & 1);
        for j in 0..4 {
            *o += u1[i1][j >> 1] * u2[i2][j & 1] * a[j];
        }
    }
    Ok(PureState::from_raw(out))
}

/// Resonance condition `t = nπ/α`, `J = (m + ½) α / n` under which the
/// evolved state is maximally entangled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BellCondition {
    m: i64,
    n: i64,
}

impl BellCondition {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Bell condition needs n != 0".into()));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Solves `J = (m + ½) sqrt(4B² + J²) / n` for `J` at fixed `B` and returns
    /// the parameters with the resonant time `t = nπ/α`.
    ///
    /// Squaring gives `J² (n² - (m+½)²) = 4B² (m+½)²`, which has a real root
    /// only when `|m + ½| < |n|`; the sign of `J` must match `(m+½)/n`.
    pub fn solve_for_b(&self, b: f64) -> Result<(TwoQubitParams, f64)> {
        let k = self.m as f64 + 0.5;
        let n = self.n as f64;
        let denom = n * n - k * k;
        if denom <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "no real coupling satisfies the Bell condition for m = {}, n = {}",
                self.m, self.n
            )));
        }
        if b == 0.0 {
            return Err(Error::InvalidArgument("Bell condition needs B != 0".into()));
        }
        let j = (k / n).signum() * 2.0 * b.abs() * k.abs() / denom.sqrt();
        let p = TwoQubitParams::new(b, j)?;
        Ok((p, n * PI / p.alpha()))
    }

    /// `((-1)^n - i(-1)^m)/2 |00> + ((-1)^n + i(-1)^m)/2 |11>`.
    pub fn expected_state(&self) -> PureState {
        let sn = if self.n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let sm = if self.m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        PureState::from_raw(vec![C64::new(sn / 2.0, -sm / 2.0), ZERO, ZERO, C64::new(sn / 2.0, sm / 2.0)])
    }
}

/// Reusable `e^{-iHt}` for one Hamiltonian.
///
/// The eigendecomposition is computed once and shared behind an `Arc`, so
/// clones handed to sweep workers all read the same immutable snapshot.
#[derive(Clone, Debug)]
pub struct DensePropagator {
    spectrum: Arc<SpectralDecomposition>,
    n_qubits: usize,
}

impl DensePropagator {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        Self::with_max_qubits(h, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(h: &HermitianOperator, max_qubits: usize) -> Result<Self> {
        let n_qubits = h.n_qubits();
        if n_qubits > max_qubits {
            return Err(Error::Capacity { requested: n_qubits, max: max_qubits });
        }
        Ok(Self { spectrum: Arc::new(h.eigh()?), n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn evolve(&self, psi0: &PureState, t: f64) -> Result<PureState> {
        let c = self.spectrum.to_eigenbasis(psi0.amplitudes())?;
        Ok(PureState::from_raw(self.spectrum.evolve_coefficients(&c, t)))
    }

    /// States at every time in `times`, in input order.
    pub fn evolve_many(&self, psi0: &PureState, times: &[f64]) -> Result<Vec<PureState>> {
        let c = self.spectrum.to_eigenbasis(psi0.amplitudes())?;
        Ok(times
            .par_iter()
            .map(|&t| PureState::from_raw(self.spectrum.evolve_coefficients(&c, t)))
            .collect())
    }
}

/// One-shot `e^{-iHt}|ψ0>` by spectral decomposition.
pub fn propagate_dense(h: &HermitianOperator, psi0: &PureState, t: f64) -> Result<PureState> {
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.dim() });
    }
    DensePropagator::new(h)?.evolve(psi0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_expm, tensor, ONE};
    use crate::model::{n_qubit_hamiltonian, two_qubit_hamiltonian, NQubitParams, Pauli};
    use std::f64::consts::FRAC_PI_4;

    fn sigma_exp(p: Pauli, angle: f64) -> UnitaryOperator {
        // exp(-i angle σ/2) through the generic Hermitian exponential.
        hermitian_expm(&HermitianOperator::new(p.matrix()).unwrap(), angle / 2.0).unwrap()
    }

    #[test]
    fn closed_form_at_zero_time() {
        for &(b, j) in &[(1.0, 1.0), (-2.0, 0.3), (0.0, 0.0)] {
            let s = evolve_closed_form(&TwoQubitParams::new(b, j).unwrap(), 0.0);
            assert!(s.max_abs_diff(&PureState::zero(2).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn closed_form_bell_instance() {
        let p = TwoQubitParams::new(3f64.sqrt() / 2.0, 1.0).unwrap();
        assert!((p.alpha() - 2.0).abs() < 1e-15);
        let s = evolve_closed_form(&p, FRAC_PI_2);
        let expected = PureState::new(vec![
            C64::new(-0.5, -0.5),
            ZERO,
            ZERO,
            C64::new(-0.5, 0.5),
        ])
        .unwrap();
        assert!(s.max_abs_diff(&expected) < 1e-15, "{s:?}");
    }

    #[test]
    fn closed_form_matches_generic_propagator() {
        let p = TwoQubitParams::new(1.0, 1.0).unwrap();
        let u = hermitian_expm(&two_qubit_hamiltonian(&p), 0.7).unwrap();
        let oracle = PureState::zero(2).unwrap().apply(&u).unwrap();
        assert!(evolve_closed_form(&p, 0.7).max_abs_diff(&oracle) < 1e-9);
    }

    #[test]
    fn closed_form_small_alpha_limit() {
        let s = evolve_closed_form(&TwoQubitParams::new(0.0, 0.0).unwrap(), 5.0);
        assert_eq!(s.amplitudes(), PureState::zero(2).unwrap().amplitudes());
        // continuity across the series threshold
        let t = 3.0;
        for &b in &[1e-7, 4e-9, 1e-12] {
            let p = TwoQubitParams::new(b, 0.5 * b).unwrap();
            let oracle = propagate_dense(&two_qubit_hamiltonian(&p), &PureState::zero(2).unwrap(), t).unwrap();
            assert!(evolve_closed_form(&p, t).max_abs_diff(&oracle) < 1e-12, "b = {b}");
        }
    }

    #[test]
    fn uz_examples() {
        assert!(gate_uz(0.0).matrix().max_abs_diff(&Matrix::identity(2)) < 1e-15);
        assert!(gate_uz(2.0 * PI).matrix().max_abs_diff(&Matrix::identity(2).scale(-ONE)) < 1e-15);
        let expected = Matrix::from_diagonal(&[C64::from_polar(1.0, -FRAC_PI_4), C64::from_polar(1.0, FRAC_PI_4)]);
        assert!(gate_uz(FRAC_PI_2).matrix().max_abs_diff(&expected) < 1e-15);
        assert!(gate_uz(FRAC_PI_2).matrix().max_abs_diff(sigma_exp(Pauli::Z, FRAC_PI_2).matrix()) < 1e-12);
    }

    #[test]
    fn ux_examples() {
        assert!(gate_ux(0.0).matrix().max_abs_diff(&Matrix::identity(2)) < 1e-15);
        let minus_i_x = Pauli::X.matrix().scale(C64::new(0.0, -1.0));
        assert!(gate_ux(PI).matrix().max_abs_diff(&minus_i_x) < 1e-15);
        for &th in &[0.3, -1.7, 2.9, 11.0] {
            assert!(gate_ux(th).matrix().max_abs_diff(sigma_exp(Pauli::X, th).matrix()) < 1e-12);
        }
    }

    #[test]
    fn gate_composition_law() {
        for &(a, b) in &[(0.3, 1.1), (-2.0, 5.5), (PI, PI)] {
            let z = gate_uz(a).compose(&gate_uz(b)).unwrap();
            assert!(z.matrix().max_abs_diff(gate_uz(a + b).matrix()) < 1e-12);
            let x = gate_ux(a).compose(&gate_ux(b)).unwrap();
            assert!(x.matrix().max_abs_diff(gate_ux(a + b).matrix()) < 1e-12);
        }
    }

    #[test]
    fn bloch_rotation_examples() {
        assert!(bloch_rotation(&BlochDirection::ZERO).matrix().max_abs_diff(&Matrix::identity(2)) < 1e-15);
        for &(th, ph) in &[(0.4, 1.3), (2.0, -0.7), (PI, 0.0)] {
            let n = BlochDirection::new(th, ph);
            let g = bloch_rotation(&n);
            let col = g.matrix().apply(&[ONE, ZERO]).unwrap();
            let ket = n.ket();
            assert!((col[0] - ket[0]).norm() < 1e-15 && (col[1] - ket[1]).norm() < 1e-15);
            let raw = Matrix::from_rows(&n.rotation_entries()).unwrap();
            assert!(raw.max_abs_diff(g.matrix()) < 1e-15);
        }
    }

    #[test]
    fn expected_adjoint_rotations() {
        // g⁺(n_a) = e^{iπσx/2}
        let ga = bloch_rotation(&BlochDirection::n_a()).adjoint();
        assert!(ga.phase_insensitive_diff(&sigma_exp(Pauli::X, -PI)) < 1e-12);
        // g⁺(n_b) = e^{iπσx/4} e^{iπσz/4}
        let gb = bloch_rotation(&BlochDirection::n_b()).adjoint();
        let expected_b = sigma_exp(Pauli::X, -FRAC_PI_2).compose(&sigma_exp(Pauli::Z, -FRAC_PI_2)).unwrap();
        assert!(gb.phase_insensitive_diff(&expected_b) < 1e-12);
        // g⁺(n_c) = e^{iπσx/4} e^{-iπσz/4}
        let gc = bloch_rotation(&BlochDirection::n_c()).adjoint();
        let expected_c = sigma_exp(Pauli::X, -FRAC_PI_2).compose(&sigma_exp(Pauli::Z, FRAC_PI_2)).unwrap();
        assert!(gc.phase_insensitive_diff(&expected_c) < 1e-12);
    }

    #[test]
    fn rotate_state_matches_kronecker_oracle() {
        let psi = PureState::normalized(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.7, 0.0), C64::new(0.1, -0.4)]).unwrap();
        let n1 = BlochDirection::new(1.2, -0.4);
        let n2 = BlochDirection::new(2.5, 0.9);
        let u = tensor(&bloch_rotation(&n1).adjoint(), &bloch_rotation(&n2).adjoint()).unwrap();
        let oracle = psi.apply(&u).unwrap();
        let fast = rotate_state(&psi, &n1, &n2).unwrap();
        assert!(fast.max_abs_diff(&oracle) < 1e-15);
        assert!((fast.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotate_state_examples() {
        let psi = evolve_closed_form(&TwoQubitParams::new(0.8, -0.3).unwrap(), 1.9);
        let same = rotate_state(&psi, &BlochDirection::ZERO, &BlochDirection::ZERO).unwrap();
        assert!(same.max_abs_diff(&psi) < 1e-15);
        let flipped = rotate_state(&PureState::zero(2).unwrap(), &BlochDirection::n_a(), &BlochDirection::ZERO).unwrap();
        assert!((flipped.amplitudes()[2].norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            rotate_state(&PureState::zero(3).unwrap(), &BlochDirection::ZERO, &BlochDirection::ZERO),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bell_condition_solution() {
        let cond = BellCondition::new(0, 1).unwrap();
        let (p, t) = cond.solve_for_b(3f64.sqrt() / 2.0).unwrap();
        assert!((p.j() - 1.0).abs() < 1e-14);
        assert!((p.alpha() - 2.0).abs() < 1e-14);
        assert!((t - FRAC_PI_2).abs() < 1e-14);
        assert!(evolve_closed_form(&p, t).max_abs_diff(&cond.expected_state()) < 1e-12);
        assert!(BellCondition::new(0, 0).is_err());
        assert!(BellCondition::new(1, 1).unwrap().solve_for_b(1.0).is_err());
    }

    #[test]
    fn bell_condition_family() {
        for &(m, n) in &[(0, 1), (0, 2), (1, 2), (-1, 1), (2, 3), (0, -1), (-3, -5)] {
            let cond = BellCondition::new(m, n).unwrap();
            for &b in &[0.4, 1.0, -1.3] {
                let (p, t) = cond.solve_for_b(b).unwrap();
                let s = evolve_closed_form(&p, t);
                let a = s.amplitudes();
                assert!(a[1].norm() <= 1e-12 && a[2].norm() <= 1e-12, "m={m} n={n} b={b}");
                assert!((a[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
                assert!((a[3].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
                assert!(s.max_abs_diff(&cond.expected_state()) < 1e-11, "m={m} n={n} b={b}");
            }
        }
    }

    #[test]
    fn dense_propagation_examples() {
        let p = TwoQubitParams::new(1.3, -0.6).unwrap();
        let h = two_qubit_hamiltonian(&p);
        let psi0 = PureState::zero(2).unwrap();
        assert!(propagate_dense(&h, &psi0, 0.0).unwrap().max_abs_diff(&psi0) < 1e-14);
        let prop = DensePropagator::new(&h).unwrap();
        let times = [0.1, 1.0, 4.2, 17.0];
        for (t, s) in times.iter().zip(prop.evolve_many(&psi0, &times).unwrap()) {
            assert!(s.max_abs_diff(&evolve_closed_form(&p, *t)) < 1e-9);
        }

        let h3 = n_qubit_hamiltonian(&NQubitParams::uniform(3, 0.7, 0.0, -0.4).unwrap()).unwrap();
        let prop3 = DensePropagator::new(&h3).unwrap();
        for t in [0.5, 3.0, 25.0] {
            let s = prop3.evolve(&PureState::zero(3).unwrap(), t).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(propagate_dense(&h3, &psi0, 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(DensePropagator::with_max_qubits(&h3, 2), Err(Error::Capacity { .. })));
    }
}
