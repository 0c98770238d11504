//! Concurrence and entanglement of formation of two-qubit pure states.
//!
//! Three routes compute `C²`:
//! - **direct**: `4|a0 a3 - a1 a2|²` from the amplitudes;
//! - **analytic**: the closed-form time dependence for states evolved from `|00>`;
//! - **protocol**: reconstruction from eight readout probabilities.
//!
//! The protocol writes the cross term with two angles `χ_A`, `χ_B`, where
//! `cos χ_A = (2P++ - P0 - P1) / (2√(P0 P1))` and
//! `cos χ_B = (2P-+ + P0 + P1 - 1) / (2√(P2 P3))`. The probabilities fix only
//! their cosines, so the sign of `sin χ_A sin χ_B` has to be chosen: see
//! [`SignBranch`], [`family_branch`] and [`calibrate_branch`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::{sin_over, BlochDirection};
use crate::linalg::PureState;
use crate::model::TwoQubitParams;
use crate::phase_space::q_joint;

/// Round-off slack for probabilities, cosines and `C²`.
pub const SLACK: f64 = 1e-9;
/// Below this `P0 P1 P2 P3` the cross term, bounded by `8√(P0 P1 P2 P3)`, is dropped.
pub const CROSS_TERM_CUTOFF: f64 = 1e-60;
/// Absolute round-off in a probability difference; divided by `√(P P')` it
/// widens the range check on the cosines for nearly vanishing denominators.
const PROBABILITY_ROUNDOFF: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Direct,
    Analytic,
    Protocol,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Analytic => "analytic",
            Route::Protocol => "protocol",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceResult {
    pub c_squared: f64,
    pub entanglement: f64,
    pub route: Route,
    /// Set when `c_squared` was pulled back into `[0, 1]` from within [`SLACK`].
    pub clamped: bool,
}

impl ConcurrenceResult {
    fn from_raw(raw: f64, route: Route) -> Result<Self> {
        if !raw.is_finite() || !(-SLACK..=1.0 + SLACK).contains(&raw) {
            return Err(Error::ConcurrenceOutOfRange(raw));
        }
        let c_squared = raw.clamp(0.0, 1.0);
        Ok(Self {
            c_squared,
            entanglement: binary_entropy_of(c_squared),
            route,
            clamped: c_squared != raw,
        })
    }
}

fn binary_entropy_of(c_squared: f64) -> f64 {
    let x = 0.5 * (1.0 + (1.0 - c_squared).max(0.0).sqrt());
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    (h(x) + h(1.0 - x)).min(1.0)
}

/// Entanglement of formation `h((1 + √(1 - C²)) / 2)` with `h` the binary entropy.
pub fn entanglement_of_formation(c_squared: f64) -> Result<f64> {
    if !c_squared.is_finite() || !(-SLACK..=1.0 + SLACK).contains(&c_squared) {
        return Err(Error::InvalidArgument(format!("C² = {c_squared} is outside [0, 1]")));
    }
    Ok(binary_entropy_of(c_squared.clamp(0.0, 1.0)))
}

fn two_qubit(psi: &PureState) -> Result<&[crate::linalg::C64]> {
    if psi.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, found: psi.dim() });
    }
    Ok(psi.amplitudes())
}

/// `C² = 4|a0 a3 - a1 a2|²`.
pub fn concurrence_direct(psi: &PureState) -> Result<ConcurrenceResult> {
    let a = two_qubit(psi)?;
    let raw = 4.0 * (a[0] * a[3] - a[1] * a[2]).norm_sqr();
    let c_squared = raw.clamp(0.0, 1.0);
    Ok(ConcurrenceResult {
        c_squared,
        entanglement: binary_entropy_of(c_squared),
        route: Route::Direct,
        clamped: c_squared != raw,
    })
}

/// Closed-form `C²(t)` for the state evolved from `|00>`:
///
/// ```text
/// (J⁴/α⁴) sin⁴αt + (J²/4α²)[sin²2αt - 8 sin²αt sin²Jt] + (J/2α) sin 2αt sin 2Jt + sin²Jt
/// ```
pub fn concurrence_analytic(p: &TwoQubitParams, t: f64) -> Result<ConcurrenceResult> {
    let j = p.j();
    let (sj, _) = (j * t).sin_cos();
    let ca = (p.alpha() * t).cos();
    // (J/α) sin αt
    let x = j * sin_over(p.alpha(), t);
    let raw = x.powi(4) + x * x * (ca * ca - 2.0 * sj * sj) + x * ca * (2.0 * j * t).sin() + sj * sj;
    ConcurrenceResult::from_raw(raw, Route::Analytic)
}

/// The eight readout probabilities of the protocol.
///
/// `p0..p3` are the outcomes `00, 01, 10, 11` in the computational basis.
/// `ppp, ppm, pmp, pmm` come from the same readout on qubit 1 and an x-basis
/// readout on qubit 2: the first sign is `+` for qubit 1 in `|0>`, the second
/// `+` for qubit 2 along `n_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilitySet {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub ppp: f64,
    pub ppm: f64,
    pub pmp: f64,
    pub pmm: f64,
}

impl ProbabilitySet {
    pub fn new(z: [f64; 4], x: [f64; 4]) -> Result<Self> {
        for (quantity, set) in [("z-basis probabilities", &z), ("x-basis probabilities", &x)] {
            for &v in set {
                if !v.is_finite() || !(-SLACK..=1.0 + SLACK).contains(&v) {
                    return Err(Error::InconsistentProbabilities { quantity, value: v });
                }
            }
            let sum: f64 = set.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(Error::InconsistentProbabilities { quantity, value: sum });
            }
        }
        let c = |v: f64| v.clamp(0.0, 1.0);
        Ok(Self {
            p0: c(z[0]),
            p1: c(z[1]),
            p2: c(z[2]),
            p3: c(z[3]),
            ppp: c(x[0]),
            ppm: c(x[1]),
            pmp: c(x[2]),
            pmm: c(x[3]),
        })
    }

    pub fn z(&self) -> [f64; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    pub fn x(&self) -> [f64; 4] {
        [self.ppp, self.ppm, self.pmp, self.pmm]
    }

    /// `(cos χ_A, cos χ_B)`, or `None` when the cross term vanishes.
    pub fn cosines(&self) -> Result<Option<(f64, f64)>> {
        let prod = self.p0 * self.p1 * self.p2 * self.p3;
        if prod < CROSS_TERM_CUTOFF {
            return Ok(None);
        }
        let cos_a = (2.0 * self.ppp - self.p0 - self.p1) / (2.0 * (self.p0 * self.p1).sqrt());
        let cos_b = (2.0 * self.pmp + self.p0 + self.p1 - 1.0) / (2.0 * (self.p2 * self.p3).sqrt());
        let slack_a = SLACK.max(PROBABILITY_ROUNDOFF / (self.p0 * self.p1).sqrt());
        let slack_b = SLACK.max(PROBABILITY_ROUNDOFF / (self.p2 * self.p3).sqrt());
        for (quantity, value, slack) in [("cos chi_A", cos_a, slack_a), ("cos chi_B", cos_b, slack_b)] {
            if !value.is_finite() || value.abs() > 1.0 + slack {
                return Err(Error::InconsistentProbabilities { quantity, value });
            }
        }
        Ok(Some((cos_a.clamp(-1.0, 1.0), cos_b.clamp(-1.0, 1.0))))
    }
}

/// Evaluates the eight probabilities as Q functions at the directions
/// `0`, `n_a`, `n_b`, `n_c`.
pub fn probabilities_from_state(psi: &PureState) -> Result<ProbabilitySet> {
    two_qubit(psi)?;
    let (o, a, b, c) = (BlochDirection::ZERO, BlochDirection::n_a(), BlochDirection::n_b(), BlochDirection::n_c());
    let q = |n1: &BlochDirection, n2: &BlochDirection| q_joint(psi, n1, n2);
    ProbabilitySet::new(
        [q(&o, &o)?, q(&o, &a)?, q(&a, &o)?, q(&a, &a)?],
        [q(&o, &b)?, q(&o, &c)?, q(&a, &b)?, q(&a, &c)?],
    )
}

/// Signs `(s_A, s_B)` attached to `sin χ_A`, `sin χ_B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SignBranch {
    #[default]
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl SignBranch {
    pub const ALL: [SignBranch; 4] =
        [SignBranch::PlusPlus, SignBranch::PlusMinus, SignBranch::MinusPlus, SignBranch::MinusMinus];

    pub fn signs(self) -> (f64, f64) {
        match self {
            SignBranch::PlusPlus => (1.0, 1.0),
            SignBranch::PlusMinus => (1.0, -1.0),
            SignBranch::MinusPlus => (-1.0, 1.0),
            SignBranch::MinusMinus => (-1.0, -1.0),
        }
    }

    pub fn sign_product(self) -> f64 {
        let (a, b) = self.signs();
        a * b
    }

    pub fn label(self) -> &'static str {
        match self {
            SignBranch::PlusPlus => "++",
            SignBranch::PlusMinus => "+-",
            SignBranch::MinusPlus => "-+",
            SignBranch::MinusMinus => "--",
        }
    }
}

impl fmt::Display for SignBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SignBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "++" | "pp" => Ok(SignBranch::PlusPlus),
            "+-" | "pm" => Ok(SignBranch::PlusMinus),
            "-+" | "mp" => Ok(SignBranch::MinusPlus),
            "--" | "mm" => Ok(SignBranch::MinusMinus),
            _ => Err(Error::InvalidArgument(format!("unknown sign branch {s:?}"))),
        }
    }
}

/// `C² = 4[P1 P2 + P0 P3 - 2√(P0 P1 P2 P3) cos(χ_A + χ_B)]` with
/// `cos(χ_A + χ_B) = cos χ_A cos χ_B - s_A s_B sin χ_A sin χ_B`.
pub fn concurrence_protocol(ps: &ProbabilitySet, branch: SignBranch) -> Result<ConcurrenceResult> {
    let base = ps.p1 * ps.p2 + ps.p0 * ps.p3;
    let raw = match ps.cosines()? {
        None => 4.0 * base,
        Some((ca, cb)) => {
            let (sa, sb) = ((1.0 - ca * ca).sqrt(), (1.0 - cb * cb).sqrt());
            let cos_sum = ca * cb - branch.sign_product() * sa * sb;
            let prod = ps.p0 * ps.p1 * ps.p2 * ps.p3;
            4.0 * (base - 2.0 * prod.sqrt() * cos_sum)
        }
    };
    ConcurrenceResult::from_raw(raw, Route::Protocol)
}

/// Branch reproducing the direct concurrence for the state evolved from
/// `|00>` for time `t`: `++` when `cos²αt > cos²Jt`, otherwise `+-`.
pub fn family_branch(p: &TwoQubitParams, t: f64) -> SignBranch {
    let ca = (p.alpha() * t).cos();
    let cj = (p.j() * t).cos();
    if ca * ca > cj * cj {
        SignBranch::PlusPlus
    } else {
        SignBranch::PlusMinus
    }
}

/// Per-branch protocol error against the direct route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchCalibration {
    /// Largest `|C²_protocol - C²_direct|` per branch, in [`SignBranch::ALL`] order;
    /// infinite where the protocol failed.
    pub max_error: [f64; 4],
    pub best: SignBranch,
}

impl BranchCalibration {
    pub fn best_error(&self) -> f64 {
        self.max_error[SignBranch::ALL.iter().position(|&b| b == self.best).unwrap_or(0)]
    }
}

/// Scores every branch over `states` by brute force against [`concurrence_direct`].
pub fn calibrate_branch_over(states: &[PureState]) -> Result<BranchCalibration> {
    let mut max_error = [0.0f64; 4];
    for psi in states {
        let direct = concurrence_direct(psi)?.c_squared;
        let ps = probabilities_from_state(psi)?;
        for (k, &b) in SignBranch::ALL.iter().enumerate() {
            let err = match concurrence_protocol(&ps, b) {
                Ok(r) => (r.c_squared - direct).abs(),
                Err(_) => f64::INFINITY,
            };
            max_error[k] = max_error[k].max(err);
        }
    }
    let k = (0..4).fold(0, |best, k| if max_error[k] < max_error[best] { k } else { best });
    Ok(BranchCalibration { max_error, best: SignBranch::ALL[k] })
}

/// Best branch for a single state.
pub fn calibrate_branch(psi: &PureState) -> Result<SignBranch> {
    Ok(calibrate_branch_over(std::slice::from_ref(psi))?.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve_closed_form, rotate_state, BellCondition};
    use crate::linalg::C64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn state(amps: [C64; 4]) -> PureState {
        PureState::normalized(amps.to_vec()).unwrap()
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn direct_examples() {
        let s00 = PureState::zero(2).unwrap();
        let r = concurrence_direct(&s00).unwrap();
        assert_eq!((r.c_squared, r.entanglement, r.route), (0.0, 0.0, Route::Direct));

        let r = concurrence_direct(&BellCondition::new(0, 1).unwrap().expected_state()).unwrap();
        assert!((r.c_squared - 1.0).abs() < 1e-15 && (r.entanglement - 1.0).abs() < 1e-15);

        let r = concurrence_direct(&state([re(1.0), re(1.0), re(0.0), re(0.0)])).unwrap();
        assert_eq!(r.c_squared, 0.0);
        assert!(concurrence_direct(&PureState::zero(3).unwrap()).is_err());
    }

    #[test]
    fn formation_examples() {
        assert_eq!(entanglement_of_formation(0.0).unwrap(), 0.0);
        assert_eq!(entanglement_of_formation(1.0).unwrap(), 1.0);
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((entanglement_of_formation(0.75).unwrap() - h).abs() < 1e-15);
        assert!((h - 0.811278).abs() < 1e-6);
        assert!(entanglement_of_formation(1.0 + 1e-10).is_ok());
        assert!(entanglement_of_formation(1.1).is_err());
        assert!(entanglement_of_formation(-0.01).is_err());
    }

    #[test]
    fn formation_is_monotone() {
        let mut last = -1.0;
        for k in 0..=1000 {
            let e = entanglement_of_formation(k as f64 / 1000.0).unwrap();
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn analytic_examples() {
        let p = TwoQubitParams::new(1.0, 1.0).unwrap();
        assert_eq!(concurrence_analytic(&p, 0.0).unwrap().c_squared, 0.0);

        let bell = TwoQubitParams::new(3f64.sqrt() / 2.0, 1.0).unwrap();
        let r = concurrence_analytic(&bell, PI / 2.0).unwrap();
        assert!((r.c_squared - 1.0).abs() < 1e-12);

        for &t in &[0.3, 1.7, 4.4, 11.0] {
            let direct = concurrence_direct(&evolve_closed_form(&p, t)).unwrap().c_squared;
            assert!((concurrence_analytic(&p, t).unwrap().c_squared - direct).abs() < 1e-12);
        }
        let zero = TwoQubitParams::new(0.0, 0.0).unwrap();
        assert_eq!(concurrence_analytic(&zero, 3.0).unwrap().c_squared, 0.0);
    }

    #[test]
    fn probabilities_examples() {
        let ps = probabilities_from_state(&PureState::zero(2).unwrap()).unwrap();
        assert!((ps.p0 - 1.0).abs() < 1e-15 && ps.p1 < 1e-15 && ps.p2 < 1e-15 && ps.p3 < 1e-15);
        assert!((ps.ppp - 0.5).abs() < 1e-15 && (ps.ppm - 0.5).abs() < 1e-15);

        let bell = state([re(FRAC_1_SQRT_2), re(0.0), re(0.0), re(FRAC_1_SQRT_2)]);
        let ps = probabilities_from_state(&bell).unwrap();
        assert!((ps.p0 - 0.5).abs() < 1e-15 && (ps.p3 - 0.5).abs() < 1e-15);
        assert!(ps.p1 < 1e-15 && ps.p2 < 1e-15);

        let p = TwoQubitParams::new(0.8, -1.3).unwrap();
        let t = 2.1;
        let ps = probabilities_from_state(&evolve_closed_form(&p, t)).unwrap();
        let expected = (p.b() / p.alpha() * (p.alpha() * t).sin()).powi(2);
        assert!((ps.p1 - expected).abs() < 1e-14 && (ps.p2 - expected).abs() < 1e-14);
    }

    #[test]
    fn protocol_examples() {
        let bell = ProbabilitySet::new([0.5, 0.0, 0.0, 0.5], [0.25, 0.25, 0.25, 0.25]).unwrap();
        for b in SignBranch::ALL {
            assert_eq!(concurrence_protocol(&bell, b).unwrap().c_squared, 1.0);
        }
        let s00 = ProbabilitySet::new([1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(concurrence_protocol(&s00, SignBranch::PlusPlus).unwrap().c_squared, 0.0);

        let p = TwoQubitParams::new(1.0, 1.0).unwrap();
        let psi = evolve_closed_form(&p, 0.9);
        let direct = concurrence_direct(&psi).unwrap().c_squared;
        let ps = probabilities_from_state(&psi).unwrap();
        let branch = calibrate_branch(&psi).unwrap();
        assert_eq!(branch.sign_product(), family_branch(&p, 0.9).sign_product());
        assert!((concurrence_protocol(&ps, branch).unwrap().c_squared - direct).abs() < 1e-9);
    }

    #[test]
    fn protocol_rejects_inconsistent_input() {
        assert!(ProbabilitySet::new([0.5, 0.5, 0.1, 0.0], [0.25; 4]).is_err());
        assert!(ProbabilitySet::new([0.25; 4], [1.2, -0.2, 0.0, 0.0]).is_err());
        // cos χ_A = (2·1 - 0.5)/(2·0.25) = 3
        let ps = ProbabilitySet::new([0.25; 4], [1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            concurrence_protocol(&ps, SignBranch::PlusPlus),
            Err(Error::InconsistentProbabilities { .. })
        ));
    }

    #[test]
    fn only_the_sign_product_matters() {
        let psi = evolve_closed_form(&TwoQubitParams::new(0.6, 1.9).unwrap(), 1.3);
        let ps = probabilities_from_state(&psi).unwrap();
        let c = |b| concurrence_protocol(&ps, b).unwrap().c_squared;
        assert_eq!(c(SignBranch::PlusPlus), c(SignBranch::MinusMinus));
        assert_eq!(c(SignBranch::PlusMinus), c(SignBranch::MinusPlus));
    }

    #[test]
    fn family_rule_matches_brute_force() {
        let mut worst: f64 = 0.0;
        for i in 0..40 {
            for k in 0..25 {
                let b = -2.0 + 4.0 * i as f64 / 39.0;
                let t = 0.05 + 0.4 * k as f64;
                let p = TwoQubitParams::new(b, 1.3).unwrap();
                let psi = evolve_closed_form(&p, t);
                let direct = concurrence_direct(&psi).unwrap().c_squared;
                let ps = probabilities_from_state(&psi).unwrap();
                let got = concurrence_protocol(&ps, family_branch(&p, t)).unwrap().c_squared;
                worst = worst.max((got - direct).abs());
            }
        }
        assert!(worst < 1e-9, "worst {worst}");
    }

    #[test]
    fn no_single_branch_covers_the_family() {
        let states: Vec<PureState> = (0..200)
            .map(|k| evolve_closed_form(&TwoQubitParams::new(1.0, 1.0).unwrap(), 0.05 * k as f64))
            .collect();
        let cal = calibrate_branch_over(&states).unwrap();
        assert!(cal.best_error() > 1e-3, "{cal:?}");
    }

    #[test]
    fn per_state_calibration_is_exact_for_rotated_states() {
        let psi = evolve_closed_form(&TwoQubitParams::new(0.7, 1.1).unwrap(), 1.9);
        let direct = concurrence_direct(&psi).unwrap().c_squared;
        for &th in &[0.3, 1.2, 2.5] {
            let n = BlochDirection::new(th, 0.0);
            let rotated = rotate_state(&psi, &n, &n).unwrap();
            let b = calibrate_branch(&rotated).unwrap();
            let ps = probabilities_from_state(&rotated).unwrap();
            assert!((concurrence_protocol(&ps, b).unwrap().c_squared - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn branch_parsing() {
        for b in SignBranch::ALL {
            assert_eq!(b.label().parse::<SignBranch>().unwrap(), b);
        }
        assert!("+".parse::<SignBranch>().is_err());
    }
}
