//! The CHSH combination
//!
//! ```text
//! Γ = Q12(0,0) + Q12(n,0) + Q12(0,n') - Q12(n,n') - Q1(0) - Q2(0)
//! ```
//!
//! which local realistic theories confine to `-1 <= Γ <= 0`.
//!
//! [`chsh_gamma`] builds Γ from Q functions and is the reference route.
//! [`chsh_gamma_analytic`] evaluates the literal closed form for states
//! evolved from `|00>` term for term. That closed form carries one
//! spurious term (`cos αt cos Jt - (J/α) sin αt sin Jt`); [`diagnose_analytic`]
//! locates it by comparing harmonic coefficients in `(φ1, φ2)`, and
//! [`chsh_gamma_analytic_corrected`] drops it.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{evolve_closed_form, sin_over, BlochDirection};
use crate::linalg::PureState;
use crate::model::TwoQubitParams;
use crate::phase_space::{q_joint, q_single};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSetting {
    pub n: BlochDirection,
    pub n_prime: BlochDirection,
}

impl ChshSetting {
    pub fn new(n: BlochDirection, n_prime: BlochDirection) -> Self {
        Self { n, n_prime }
    }

    /// `n = (θ, φ1)` on qubit 1 and `n' = (θ, φ2)` on qubit 2.
    pub fn symmetric(theta: f64, phi1: f64, phi2: f64) -> Self {
        Self::new(BlochDirection::new(theta, phi1), BlochDirection::new(theta, phi2))
    }
}

/// The six Q values entering Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshComponents {
    pub q00: f64,
    pub qn0: f64,
    pub q0n: f64,
    pub qnn: f64,
    pub q1: f64,
    pub q2: f64,
}

impl ChshComponents {
    pub fn gamma(&self) -> f64 {
        self.q00 + self.qn0 + self.q0n - self.qnn - self.q1 - self.q2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshResult {
    pub gamma: f64,
    pub components: ChshComponents,
    /// Γ < -1.
    pub violated_low: bool,
    /// Γ > 0.
    pub violated_high: bool,
}

impl ChshResult {
    pub fn from_components(components: ChshComponents) -> Self {
        let gamma = components.gamma();
        Self { gamma, components, violated_low: gamma < -1.0, violated_high: gamma > 0.0 }
    }

    pub fn violated(&self) -> bool {
        self.violated_low || self.violated_high
    }
}

/// Γ from the Q functions of `psi`.
pub fn chsh_gamma(psi: &PureState, s: &ChshSetting) -> Result<ChshResult> {
    let zero = BlochDirection::ZERO;
    let components = ChshComponents {
        q00: q_joint(psi, &zero, &zero)?,
        qn0: q_joint(psi, &s.n, &zero)?,
        q0n: q_joint(psi, &zero, &s.n_prime)?,
        qnn: q_joint(psi, &s.n, &s.n_prime)?,
        q1: q_single(psi, 1, &zero)?,
        q2: q_single(psi, 2, &zero)?,
    };
    Ok(ChshResult::from_components(components))
}

/// The five terms of the literal closed-form Γ for the state evolved from `|00>`
/// with `θ1 = θ2 = θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticGammaTerms {
    /// `-sin⁴(θ/2)`
    pub product: f64,
    /// `cos αt cos Jt - (J/α) sin αt sin Jt`; absent from the pipeline result.
    pub oscillation: f64,
    /// `¼ (cos αt sin Jt + (J/α) sin αt cos Jt) sin²θ sin(φ1 + φ2)`
    pub phase_sum: f64,
    /// `-(B²/α²) sin²αt (2 - 4 sin⁴(θ/2) + sin²θ cos φ1 cos φ2)`
    pub field_squared: f64,
    /// `(B/α) sin αt sinθ sin²(θ/2) [sin Jt (sin φ1 + sin φ2) + cos αt (cos φ1 + cos φ2)]`
    pub field_linear: f64,
}

impl AnalyticGammaTerms {
    pub fn new(p: &TwoQubitParams, t: f64, theta: f64, phi1: f64, phi2: f64) -> Self {
        let (j, alpha) = (p.j(), p.alpha());
        let (sa, ca) = (alpha * t).sin_cos();
        let (sj, cj) = (j * t).sin_cos();
        // (J/α) sin αt and (B/α) sin αt, continuous at α = 0
        let j_sa = j * sin_over(alpha, t);
        let b_sa = p.b() * sin_over(alpha, t);
        let _ = sa;
        let s_half = (theta / 2.0).sin();
        let s_half2 = s_half * s_half;
        let s_half4 = s_half2 * s_half2;
        let st = theta.sin();
        let st2 = st * st;
        Self {
            product: -s_half4,
            oscillation: ca * cj - j_sa * sj,
            phase_sum: 0.25 * (ca * sj + j_sa * cj) * st2 * (phi1 + phi2).sin(),
            field_squared: -b_sa * b_sa * (2.0 - 4.0 * s_half4 + st2 * phi1.cos() * phi2.cos()),
            field_linear: b_sa * st * s_half2 * (sj * (phi1.sin() + phi2.sin()) + ca * (phi1.cos() + phi2.cos())),
        }
    }

    pub fn literal(&self) -> f64 {
        self.product + self.oscillation + self.phase_sum + self.field_squared + self.field_linear
    }

    pub fn corrected(&self) -> f64 {
        self.literal() - self.oscillation
    }
}

/// Closed-form Γ exactly as stated, including the spurious oscillation term.
pub fn chsh_gamma_analytic(p: &TwoQubitParams, t: f64, theta: f64, phi1: f64, phi2: f64) -> f64 {
    AnalyticGammaTerms::new(p, t, theta, phi1, phi2).literal()
}

/// Closed-form Γ with the oscillation term removed; agrees with [`chsh_gamma`]
/// on [`evolve_closed_form`] states to round-off.
pub fn chsh_gamma_analytic_corrected(p: &TwoQubitParams, t: f64, theta: f64, phi1: f64, phi2: f64) -> f64 {
    AnalyticGammaTerms::new(p, t, theta, phi1, phi2).corrected()
}

/// One harmonic of Γ in `(φ1, φ2)`, from the pipeline and from the literal formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicCoefficient {
    pub label: &'static str,
    pub pipeline: f64,
    pub literal: f64,
}

impl HarmonicCoefficient {
    pub fn mismatch(&self) -> f64 {
        (self.pipeline - self.literal).abs()
    }
}

const HARMONIC_LABELS: [&str; 9] = [
    "1",
    "cos(phi2)",
    "sin(phi2)",
    "cos(phi1)",
    "cos(phi1)cos(phi2)",
    "cos(phi1)sin(phi2)",
    "sin(phi1)",
    "sin(phi1)cos(phi2)",
    "sin(phi1)sin(phi2)",
];

/// Γ is a trigonometric polynomial of degree one in each of `φ1`, `φ2`, so
/// its nine coefficients are recovered exactly from a 4x4 grid of phases.
fn harmonics(f: impl Fn(f64, f64) -> Result<f64>) -> Result<[f64; 9]> {
    let phases = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
    let basis: [[f64; 4]; 3] = [[1.0, 1.0, 1.0, 1.0], [1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]];
    let norms = [4.0, 2.0, 2.0];
    let mut values = [[0.0; 4]; 4];
    for (i, &p1) in phases.iter().enumerate() {
        for (k, &p2) in phases.iter().enumerate() {
            values[i][k] = f(p1, p2)?;
        }
    }
    let mut out = [0.0; 9];
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for i in 0..4 {
                for k in 0..4 {
                    acc += values[i][k] * basis[a][i] * basis[b][k];
                }
            }
            out[3 * a + b] = acc / (norms[a] * norms[b]);
        }
    }
    Ok(out)
}

/// Compares the literal closed form with the Q-function route harmonic by
/// harmonic at fixed `(B, J, t, θ)`.
pub fn diagnose_analytic(p: &TwoQubitParams, t: f64, theta: f64) -> Result<Vec<HarmonicCoefficient>> {
    let psi = evolve_closed_form(p, t);
    let pipeline = harmonics(|p1, p2| Ok(chsh_gamma(&psi, &ChshSetting::symmetric(theta, p1, p2))?.gamma))?;
    let literal = harmonics(|p1, p2| Ok(chsh_gamma_analytic(p, t, theta, p1, p2)))?;
    Ok(HARMONIC_LABELS
        .iter()
        .zip(pipeline.iter().zip(literal.iter()))
        .map(|(&label, (&pipeline, &literal))| HarmonicCoefficient { label, pipeline, literal })
        .collect())
}

/// Unit of sweep time values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeUnit {
    /// Plain time in inverse energy units.
    Raw,
    /// Dimensionless `t·α`.
    #[default]
    InverseAlpha,
}

impl TimeUnit {
    pub fn to_raw(self, value: f64, alpha: f64) -> Result<f64> {
        match self {
            TimeUnit::Raw => Ok(value),
            TimeUnit::InverseAlpha if alpha > 0.0 => Ok(value / alpha),
            TimeUnit::InverseAlpha => {
                Err(Error::InvalidArgument("time in units of 1/alpha needs alpha > 0".into()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPoint {
    /// Time as supplied (in the sweep's unit).
    pub t: f64,
    /// Time in inverse energy units.
    pub t_raw: f64,
    pub theta: f64,
    pub result: ChshResult,
}

/// Γ over a `(t, θ)` grid with `n = (θ, φ1)`, `n' = (θ, φ2)`. Points are
/// returned t-major regardless of how many workers evaluate them.
pub fn sweep_gamma(
    p: &TwoQubitParams,
    times: &[f64],
    unit: TimeUnit,
    thetas: &[f64],
    phi1: f64,
    phi2: f64,
) -> Result<Vec<GammaPoint>> {
    if times.is_empty() || thetas.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be non-empty".into()));
    }
    let raw: Vec<f64> = times.iter().map(|&t| unit.to_raw(t, p.alpha())).collect::<Result<_>>()?;
    let states: Vec<PureState> = raw.par_iter().map(|&t| evolve_closed_form(p, t)).collect();
    (0..times.len() * thetas.len())
        .into_par_iter()
        .map(|idx| {
            let (it, ith) = (idx / thetas.len(), idx % thetas.len());
            let setting = ChshSetting::symmetric(thetas[ith], phi1, phi2);
            Ok(GammaPoint {
                t: times[it],
                t_raw: raw[it],
                theta: thetas[ith],
                result: chsh_gamma(&states[it], &setting)?,
            })
        })
        .collect()
}
