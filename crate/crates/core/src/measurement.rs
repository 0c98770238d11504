//! Finite-shot readout simulation.
//!
//! Each trial rotates both qubits by `g⁺(n1) ⊗ g⁺(n2)` and reads them out
//! projectively. Every trial is kept in the log; there is no way to discard
//! one. Readout errors are modelled as an independent bit flip with
//! probability `ε` on each qubit.
//!
//! Randomness is counter based: trials are grouped in blocks of
//! [`BLOCK_SIZE`], and each block draws from a ChaCha8 stream seeded with
//! `SHA-256(master seed, setting id, block index)`. Results therefore do not
//! depend on how blocks are spread over threads.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::chsh::ChshSetting;
use crate::entanglement::{concurrence_protocol, ProbabilitySet, SignBranch};
use crate::error::{Error, Result};
use crate::evolution::BlochDirection;
use crate::linalg::PureState;
use crate::phase_space::outcome_probabilities;

pub const BLOCK_SIZE: usize = 1 << 16;
pub const DEFAULT_RESAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Outcome {
    O00 = 0,
    O01 = 1,
    O10 = 2,
    O11 = 3,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::O00, Outcome::O01, Outcome::O10, Outcome::O11];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }

    /// Bit for qubit 1 (`0` means found along `n1`).
    pub fn first(self) -> u8 {
        (self as u8) >> 1
    }

    pub fn second(self) -> u8 {
        (self as u8) & 1
    }

    pub fn label(self) -> &'static str {
        ["00", "01", "10", "11"][self.index()]
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetting {
    pub label: String,
    pub n1: BlochDirection,
    pub n2: BlochDirection,
}

impl MeasurementSetting {
    pub fn new(label: impl Into<String>, n1: BlochDirection, n2: BlochDirection) -> Self {
        Self { label: label.into(), n1, n2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord<'a> {
    pub trial_index: u64,
    pub setting_id: &'a str,
    pub outcome: Outcome,
    pub seed_path: String,
}

/// All trials of one setting, in trial order.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingLog {
    pub setting: MeasurementSetting,
    pub master_seed: u64,
    pub epsilon: f64,
    outcomes: Vec<Outcome>,
}

impl SettingLog {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn counts(&self) -> [u64; 4] {
        let mut c = [0u64; 4];
        for o in &self.outcomes {
            c[o.index()] += 1;
        }
        c
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.len() as f64;
        self.counts().map(|c| c as f64 / n)
    }

    pub fn seed_path(&self, trial_index: u64) -> String {
        format!("{}/{}/{}", self.master_seed, self.setting.label, trial_index / BLOCK_SIZE as u64)
    }

    pub fn records(&self) -> impl Iterator<Item = TrialRecord<'_>> + '_ {
        self.outcomes.iter().enumerate().map(move |(i, &outcome)| TrialRecord {
            trial_index: i as u64,
            setting_id: &self.setting.label,
            outcome,
            seed_path: self.seed_path(i as u64),
        })
    }
}

/// Writes `trial_index,setting_id,outcome,seed_path` rows, setting by setting.
pub fn write_trial_log_csv<W: Write>(logs: &[SettingLog], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing trial log: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial_index", "setting_id", "outcome", "seed_path"]).map_err(io)?;
    for log in logs {
        for r in log.records() {
            w.write_record([r.trial_index.to_string().as_str(), r.setting_id, r.outcome.label(), &r.seed_path])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("writing trial log: {e}")))?;
    Ok(())
}

fn child_seed(master: u64, setting_id: &str, block: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((setting_id.len() as u64).to_le_bytes());
    h.update(setting_id.as_bytes());
    h.update(block.to_le_bytes());
    h.finalize().into()
}

fn child_rng(master: u64, setting_id: &str, block: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(child_seed(master, setting_id, block))
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub shots: u64,
}

impl EstimateWithError {
    /// Bernoulli estimate `p̂ ± √(p̂(1 - p̂)/shots)`.
    pub fn bernoulli(successes: u64, shots: u64) -> Self {
        let p = successes as f64 / shots as f64;
        Self { mean: p, std_error: (p * (1.0 - p) / shots as f64).sqrt(), shots }
    }
}

/// Sampling configuration shared by every setting of an experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    /// Per-qubit readout flip probability.
    pub epsilon: f64,
    pub resamples: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, epsilon: 0.0, resamples: DEFAULT_RESAMPLES }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("readout flip probability {epsilon} is outside [0, 1]")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_resamples(mut self, resamples: usize) -> Result<Self> {
        if resamples < 2 {
            return Err(Error::InvalidArgument("at least two resamples are needed".into()));
        }
        self.resamples = resamples;
        Ok(self)
    }

    pub fn sample_setting(&self, psi: &PureState, setting: &MeasurementSetting, shots: u64) -> Result<SettingLog> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let p = outcome_probabilities(psi, &setting.n1, &setting.n2)?;
        let total: f64 = p.iter().sum();
        let mut cumulative = [0.0; 4];
        let mut acc = 0.0;
        for k in 0..4 {
            acc += p[k].max(0.0) / total;
            cumulative[k] = acc;
        }
        let eps = self.epsilon;
        let n_blocks = (shots as usize).div_ceil(BLOCK_SIZE);
        let blocks: Vec<Vec<Outcome>> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let len = BLOCK_SIZE.min(shots as usize - b * BLOCK_SIZE);
                let mut rng = child_rng(self.seed, &setting.label, b as u64);
                (0..len)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let mut k = cumulative.iter().position(|&c| u < c).unwrap_or(3);
                        if eps > 0.0 {
                            if rng.random::<f64>() < eps {
                                k ^= 2;
                            }
                            if rng.random::<f64>() < eps {
                                k ^= 1;
                            }
                        }
                        Outcome::from_index(k)
                    })
                    .collect()
            })
            .collect();
        Ok(SettingLog { setting: setting.clone(), master_seed: self.seed, epsilon: eps, outcomes: blocks.concat() })
    }

    pub fn estimate_gamma(&self, psi: &PureState, s: &ChshSetting, shots_per_setting: u64) -> Result<GammaEstimate> {
        let zero = BlochDirection::ZERO;
        let settings = [
            MeasurementSetting::new("q00", zero, zero),
            MeasurementSetting::new("qn0", s.n, zero),
            MeasurementSetting::new("q0n", zero, s.n_prime),
            MeasurementSetting::new("qnn", s.n, s.n_prime),
            MeasurementSetting::new("q1", zero, zero),
            MeasurementSetting::new("q2", zero, zero),
        ];
        let logs = settings
            .iter()
            .map(|st| self.sample_setting(psi, st, shots_per_setting))
            .collect::<Result<Vec<_>>>()?;
        let component = |k: usize| {
            let c = logs[k].counts();
            let successes = match k {
                4 => c[0] + c[1],
                5 => c[0] + c[2],
                _ => c[0],
            };
            EstimateWithError::bernoulli(successes, shots_per_setting)
        };
        let components: [EstimateWithError; 6] = std::array::from_fn(component);
        let signs = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let mean = components.iter().zip(signs).map(|(c, s)| s * c.mean).sum();
        let std_error = components.iter().map(|c| c.std_error * c.std_error).sum::<f64>().sqrt();
        Ok(GammaEstimate { estimate: EstimateWithError { mean, std_error, shots: shots_per_setting }, components, logs })
    }

    pub fn estimate_concurrence(
        &self,
        psi: &PureState,
        shots_per_setting: u64,
        branch: SignBranch,
    ) -> Result<ConcurrenceEstimate> {
        let zero = BlochDirection::ZERO;
        let settings = [
            MeasurementSetting::new("zz", zero, zero),
            MeasurementSetting::new("zx", zero, BlochDirection::n_b()),
        ];
        let logs = settings
            .iter()
            .map(|st| self.sample_setting(psi, st, shots_per_setting))
            .collect::<Result<Vec<_>>>()?;
        let (z_counts, x_counts) = (logs[0].counts(), logs[1].counts());
        let probabilities = probabilities_from_counts(&z_counts, &x_counts)?;
        let mean = concurrence_protocol(&probabilities, branch)?.c_squared;

        let draws: Vec<Option<f64>> = (0..self.resamples)
            .into_par_iter()
            .map(|k| {
                let mut rng = child_rng(self.seed, "bootstrap", k as u64);
                let z = resample_counts(&z_counts, &mut rng);
                let x = resample_counts(&x_counts, &mut rng);
                let ps = probabilities_from_counts(&z, &x).ok()?;
                concurrence_protocol(&ps, branch).ok().map(|r| r.c_squared)
            })
            .collect();
        let ok: Vec<f64> = draws.iter().flatten().copied().collect();
        if ok.len() < 2 {
            return Err(Error::InconsistentProbabilities {
                quantity: "bootstrap resamples with a valid protocol result",
                value: ok.len() as f64,
            });
        }
        let m = ok.iter().sum::<f64>() / ok.len() as f64;
        let var = ok.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (ok.len() - 1) as f64;
        Ok(ConcurrenceEstimate {
            estimate: EstimateWithError { mean, std_error: var.sqrt(), shots: shots_per_setting },
            branch,
            probabilities,
            failed_resamples: draws.len() - ok.len(),
            logs,
        })
    }
}

fn probabilities_from_counts(z: &[u64; 4], x: &[u64; 4]) -> Result<ProbabilitySet> {
    let f = |c: &[u64; 4]| {
        let n: u64 = c.iter().sum();
        c.map(|v| v as f64 / n as f64)
    };
    ProbabilitySet::new(f(z), f(x))
}

/// Multinomial resample of `counts` via sequential binomial draws.
fn resample_counts(counts: &[u64; 4], rng: &mut ChaCha8Rng) -> [u64; 4] {
    let n: u64 = counts.iter().sum();
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    let mut out = [0u64; 4];
    for k in 0..3 {
        let p = counts[k] as f64 / n as f64;
        let q = if remaining_p > 0.0 { (p / remaining_p).clamp(0.0, 1.0) } else { 0.0 };
        out[k] = Binomial::new(remaining_n, q).map(|b| b.sample(rng)).unwrap_or(0);
        remaining_n -= out[k];
        remaining_p -= p;
    }
    out[3] = remaining_n;
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaEstimate {
    pub estimate: EstimateWithError,
    /// Q̂12(0,0), Q̂12(n,0), Q̂12(0,n'), Q̂12(n,n'), Q̂1(0), Q̂2(0), each from its own setting.
    pub components: [EstimateWithError; 6],
    pub logs: Vec<SettingLog>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceEstimate {
    /// Protocol `Ĉ²` from the observed counts; `std_error` from the bootstrap.
    pub estimate: EstimateWithError,
    pub branch: SignBranch,
    pub probabilities: ProbabilitySet,
    /// Bootstrap resamples for which the protocol reported inconsistent probabilities.
    pub failed_resamples: usize,
    pub logs: Vec<SettingLog>,
}

/// Noise-free [`Sampler::sample_setting`] with the setting label as id.
pub fn sample_setting(
    psi: &PureState,
    n1: &BlochDirection,
    n2: &BlochDirection,
    shots: u64,
    seed: u64,
) -> Result<SettingLog> {
    Sampler::new(seed).sample_setting(psi, &MeasurementSetting::new("setting", *n1, *n2), shots)
}

pub fn estimate_gamma(psi: &PureState, s: &ChshSetting, shots_per_setting: u64, seed: u64) -> Result<EstimateWithError> {
    Ok(Sampler::new(seed).estimate_gamma(psi, s, shots_per_setting)?.estimate)
}

pub fn estimate_concurrence(
    psi: &PureState,
    shots_per_setting: u64,
    seed: u64,
    branch: SignBranch,
) -> Result<EstimateWithError> {
    Ok(Sampler::new(seed).estimate_concurrence(psi, shots_per_setting, branch)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::BellCondition;
    use crate::linalg::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn phi_plus() -> PureState {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        PureState::new(vec![r, C64::new(0.0, 0.0), C64::new(0.0, 0.0), r]).unwrap()
    }

    #[test]
    fn product_state_always_reads_00() {
        let s00 = PureState::zero(2).unwrap();
        let z = BlochDirection::ZERO;
        let log = sample_setting(&s00, &z, &z, 1000, 7).unwrap();
        assert_eq!(log.len(), 1000);
        assert!(log.outcomes().iter().all(|&o| o == Outcome::O00));
    }

    #[test]
    fn zero_shots_is_rejected() {
        let s00 = PureState::zero(2).unwrap();
        let z = BlochDirection::ZERO;
        assert!(matches!(sample_setting(&s00, &z, &z, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bell_state_frequencies() {
        let z = BlochDirection::ZERO;
        let log = sample_setting(&phi_plus(), &z, &z, 1_000_000, 42).unwrap();
        let c = log.counts();
        assert_eq!(c[1] + c[2], 0);
        let est = EstimateWithError::bernoulli(c[0], 1_000_000);
        assert!((est.mean - 0.5).abs() <= 5.0 * est.std_error);
    }

    #[test]
    fn same_seed_same_log() {
        let psi = BellCondition::new(0, 1).unwrap().expected_state();
        let n = BlochDirection::new(1.0, 0.3);
        let a = sample_setting(&psi, &n, &n, 100_000, 3).unwrap();
        let b = sample_setting(&psi, &n, &n, 100_000, 3).unwrap();
        let c = sample_setting(&psi, &n, &n, 100_000, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.outcomes(), c.outcomes());
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        write_trial_log_csv(&[a], &mut wa).unwrap();
        write_trial_log_csv(&[b], &mut wb).unwrap();
        assert_eq!(wa, wb);
    }

    #[test]
    fn setting_id_changes_the_stream() {
        let psi = phi_plus();
        let z = BlochDirection::ZERO;
        let s = Sampler::new(1);
        let a = s.sample_setting(&psi, &MeasurementSetting::new("a", z, z), 1000).unwrap();
        let b = s.sample_setting(&psi, &MeasurementSetting::new("b", z, z), 1000).unwrap();
        assert_ne!(a.outcomes(), b.outcomes());
    }

    #[test]
    fn trial_log_rows() {
        let s00 = PureState::zero(2).unwrap();
        let z = BlochDirection::ZERO;
        let log = Sampler::new(9).sample_setting(&s00, &MeasurementSetting::new("zz", z, z), 3).unwrap();
        let mut buf = Vec::new();
        write_trial_log_csv(&[log], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "trial_index,setting_id,outcome,seed_path\n0,zz,00,9/zz/0\n1,zz,00,9/zz/0\n2,zz,00,9/zz/0\n");
    }

    #[test]
    fn readout_flips() {
        let s00 = PureState::zero(2).unwrap();
        let z = BlochDirection::ZERO;
        let sampler = Sampler::new(5).with_epsilon(0.1).unwrap();
        let log = sampler.sample_setting(&s00, &MeasurementSetting::new("z", z, z), 200_000).unwrap();
        let f = log.frequencies();
        let expected = [0.81, 0.09, 0.09, 0.01];
        for k in 0..4 {
            let se = (expected[k] * (1.0 - expected[k]) / 200_000.0f64).sqrt();
            assert!((f[k] - expected[k]).abs() < 5.0 * se, "{f:?}");
        }
        assert!(Sampler::new(0).with_epsilon(1.5).is_err());
        let all = Sampler::new(5).with_epsilon(1.0).unwrap();
        let log = all.sample_setting(&s00, &MeasurementSetting::new("z", z, z), 100).unwrap();
        assert!(log.outcomes().iter().all(|&o| o == Outcome::O11));
    }

    #[test]
    fn single_shot_gamma() {
        let psi = BellCondition::new(0, 1).unwrap().expected_state();
        let s = ChshSetting::symmetric(1.0, 0.5, 0.5);
        for seed in 0..20 {
            let e = estimate_gamma(&psi, &s, 1, seed).unwrap();
            assert_eq!(e.mean, e.mean.round());
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn concurrence_of_product_state_is_zero() {
        let e = estimate_concurrence(&PureState::zero(2).unwrap(), 1000, 1, SignBranch::PlusPlus).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn concurrence_of_bell_state() {
        let e = estimate_concurrence(&phi_plus(), 1_000_000, 11, SignBranch::PlusPlus).unwrap();
        assert!((e.mean - 1.0).abs() <= 5.0 * e.std_error.max(1e-12), "{e:?}");
    }

    #[test]
    fn resampling_preserves_totals() {
        let mut rng = child_rng(0, "t", 0);
        for _ in 0..50 {
            let r = resample_counts(&[10, 0, 30, 60], &mut rng);
            assert_eq!(r.iter().sum::<u64>(), 100);
            assert_eq!(r[1], 0);
        }
    }
}
