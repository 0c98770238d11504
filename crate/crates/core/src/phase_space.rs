//! Q functions of a two-qubit pure state on the Bloch sphere.
//!
//! `Q_j(n)` is the probability of finding qubit `j` in `|n>` and `Q12(n1, n2)`
//! the probability of finding the pair in `|n1>|n2>`. Each is available in two
//! forms (reduced density matrix / overlap, and rotate-then-project) so that
//! their equality can be checked rather than assumed.

use crate::error::{Error, Result};
use crate::evolution::{rotate_state, BlochDirection};
use crate::linalg::{PureState, C64, ZERO};

/// 2x2 reduced density matrix of one qubit.
pub type DensityMatrix2 = [[C64; 2]; 2];

/// One evaluated Q function value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QSample {
    pub n1: BlochDirection,
    /// `None` for a single-qubit Q function.
    pub n2: Option<BlochDirection>,
    pub value: f64,
}

fn check_two_qubit(psi: &PureState) -> Result<()> {
    if psi.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: psi.dim() });
    }
    Ok(())
}

fn check_qubit(which: usize) -> Result<()> {
    if which != 1 && which != 2 {
        return Err(Error::InvalidQubit { index: which, n_qubits: 2 });
    }
    Ok(())
}

/// `ρ_j = Tr_{other} |ψ><ψ|`, computed by explicit partial trace.
pub fn reduced_density_matrix(psi: &PureState, which: usize) -> Result<DensityMatrix2> {
    check_two_qubit(psi)?;
    check_qubit(which)?;
    let a = psi.amplitudes();
    // index of basis state with qubit `which` = k and the traced qubit = e
    let idx = |k: usize, e: usize| if which == 1 { (k << 1) | e } else { (e << 1) | k };
    let mut rho = [[ZERO; 2]; 2];
    for (k, row) in rho.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            *entry = (0..2).map(|e| a[idx(k, e)] * a[idx(l, e)].conj()).sum();
        }
    }
    Ok(rho)
}

/// `Q_j(n) = <n| ρ_j |n>`.
pub fn q_single(psi: &PureState, which: usize, n: &BlochDirection) -> Result<f64> {
    let rho = reduced_density_matrix(psi, which)?;
    let ket = n.ket();
    let mut acc = ZERO;
    for k in 0..2 {
        for l in 0..2 {
            acc += ket[k].conj() * rho[k][l] * ket[l];
        }
    }
    Ok(acc.re)
}

/// `Q_j(n)` as the probability of projecting qubit `j` onto `|0>` after
/// rotating it by `g⁺(n)`.
pub fn q_single_projective(psi: &PureState, which: usize, n: &BlochDirection) -> Result<f64> {
    check_qubit(which)?;
    let (n1, n2) = if which == 1 { (*n, BlochDirection::ZERO) } else { (BlochDirection::ZERO, *n) };
    let p = outcome_probabilities(psi, &n1, &n2)?;
    Ok(if which == 1 { p[0] + p[1] } else { p[0] + p[2] })
}

/// `Q12(n1, n2) = |<00| g⁺(n1) g⁺(n2) |ψ>|²`.
pub fn q_joint(psi: &PureState, n1: &BlochDirection, n2: &BlochDirection) -> Result<f64> {
    Ok(rotate_state(psi, n1, n2)?.amplitudes()[0].norm_sqr())
}

/// `Q12(n1, n2) = |<n1|<n2|ψ>|²`.
pub fn q_joint_overlap(psi: &PureState, n1: &BlochDirection, n2: &BlochDirection) -> Result<f64> {
    check_two_qubit(psi)?;
    let (k1, k2) = (n1.ket(), n2.ket());
    let a = psi.amplitudes();
    let overlap: C64 = (0..4).map(|i| (k1[i >> 1] * k2[i & 1]).conj() * a[i]).sum();
    Ok(overlap.norm_sqr())
}

/// Probabilities of the four readout outcomes `00, 01, 10, 11` after rotating
/// by `g⁺(n1) ⊗ g⁺(n2)`. Outcome `0` on a qubit means "found in `|n>`".
pub fn outcome_probabilities(psi: &PureState, n1: &BlochDirection, n2: &BlochDirection) -> Result<[f64; 4]> {
    let r = rotate_state(psi, n1, n2)?;
    let a = r.amplitudes();
    Ok([a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr(), a[3].norm_sqr()])
}
