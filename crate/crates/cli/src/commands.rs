use jbell_core::chsh::{chsh_gamma, sweep_gamma, ChshSetting};
use jbell_core::entanglement::{
    calibrate_branch, concurrence_analytic, concurrence_direct, concurrence_protocol, entanglement_of_formation,
    family_branch, probabilities_from_state, SignBranch,
};
use jbell_core::evolution::{evolve_closed_form, rotate_state, BlochDirection, DensePropagator};
use jbell_core::measurement::{Sampler, SettingLog};
use jbell_core::model::{two_qubit_hamiltonian, TwoQubitParams};
use jbell_core::PureState;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{BranchChoice, Command, Method, ModelSpec, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

pub struct Outcome {
    pub table: Table,
    pub trial_logs: Vec<SettingLog>,
    /// One-line summary for the diagnostic stream.
    pub summary: Option<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome { table, trial_logs: Vec::new(), summary: None }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model.params()?;
    let mut out = match cfg.command {
        Command::Evolve => evolve(cfg, &p)?,
        Command::ChshSweep => chsh_sweep(cfg, &p)?,
        Command::EntanglementSweep => entanglement_sweep(cfg, &p)?,
        Command::Protocol => protocol(cfg, &p)?,
        Command::Shots => shots(cfg, &p)?,
    };
    let meta = &mut out.table.metadata;
    meta.insert("command".into(), json!(cfg.command.name()));
    meta.insert("model".into(), model_metadata(&cfg.model, &p));
    meta.insert("time_unit".into(), json!(cfg.time_unit));
    Ok(out)
}

fn model_metadata(spec: &ModelSpec, p: &TwoQubitParams) -> serde_json::Value {
    json!({ "spec": spec, "B": p.b(), "J": p.j(), "alpha": p.alpha() })
}

/// Raw times paired with the values as given.
fn times(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Vec<(f64, f64)>, CliError> {
    let unit = cfg.time_unit();
    cfg.times()?.into_iter().map(|t| Ok((t, unit.to_raw(t, p.alpha())?))).collect()
}

fn states(cfg: &RunConfig, p: &TwoQubitParams, raw: &[f64]) -> Result<Vec<PureState>, CliError> {
    Ok(match cfg.method {
        Method::ClosedForm => raw.par_iter().map(|&t| evolve_closed_form(p, t)).collect(),
        Method::Dense => DensePropagator::new(&two_qubit_hamiltonian(p))?.evolve_many(&PureState::zero(2)?, raw)?,
    })
}

fn auto_branch(p: &TwoQubitParams, t_raw: f64, theta: f64, state: &PureState) -> Result<SignBranch, CliError> {
    if theta == 0.0 {
        Ok(family_branch(p, t_raw))
    } else {
        Ok(calibrate_branch(state)?)
    }
}

fn evolve(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Outcome, CliError> {
    let ts = times(cfg, p)?;
    let raw: Vec<f64> = ts.iter().map(|t| t.1).collect();
    let psis = states(cfg, p, &raw)?;
    let mut table = Table::new(&["t", "re_a0", "im_a0", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3"]);
    for ((t, _), psi) in ts.iter().zip(&psis) {
        let mut row = vec![Cell::Num(*t)];
        for a in psi.amplitudes() {
            row.push(a.re.into());
            row.push(a.im.into());
        }
        table.push(row);
    }
    table.meta("method", json!(cfg.method));
    Ok(table.into())
}

fn chsh_sweep(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Outcome, CliError> {
    let points = sweep_gamma(p, &cfg.times()?, cfg.time_unit(), &cfg.thetas()?, cfg.phi1, cfg.phi2)?;
    let mut table = Table::new(&["t", "theta", "gamma", "q00", "qn0", "q0n", "qnn", "q1", "q2"]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut below, mut above) = (0u64, 0u64);
    for pt in &points {
        let r = &pt.result;
        let c = &r.components;
        lo = lo.min(r.gamma);
        hi = hi.max(r.gamma);
        below += r.violated_low as u64;
        above += r.violated_high as u64;
        table.push(vec![
            pt.t.into(),
            pt.theta.into(),
            r.gamma.into(),
            c.q00.into(),
            c.qn0.into(),
            c.q0n.into(),
            c.qnn.into(),
            c.q1.into(),
            c.q2.into(),
        ]);
    }
    table.meta("phi1", cfg.phi1);
    table.meta("phi2", cfg.phi2);
    table.meta("gamma_min", lo);
    table.meta("gamma_max", hi);
    table.meta("points_below_minus_one", below);
    table.meta("points_above_zero", above);
    let summary = format!("gamma in [{lo:.6}, {hi:.6}]; {below} points below -1, {above} above 0");
    Ok(Outcome { table, trial_logs: Vec::new(), summary: Some(summary) })
}

struct EntanglementRow {
    c2_direct: f64,
    c2_analytic: f64,
    c2_protocol: f64,
    e: f64,
    branch: SignBranch,
    clamped: bool,
}

fn entanglement_sweep(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Outcome, CliError> {
    let ts = times(cfg, p)?;
    let thetas = cfg.thetas()?;
    let raw: Vec<f64> = ts.iter().map(|t| t.1).collect();
    let psis = states(cfg, p, &raw)?;
    let choice = cfg.branch()?;
    let rows: Vec<EntanglementRow> = (0..ts.len() * thetas.len())
        .into_par_iter()
        .map(|idx| {
            let (it, ith) = (idx / thetas.len(), idx % thetas.len());
            let n = BlochDirection::new(thetas[ith], 0.0);
            let rotated = rotate_state(&psis[it], &n, &n)?;
            let branch = match choice {
                BranchChoice::Fixed(b) => b,
                BranchChoice::Auto => auto_branch(p, raw[it], thetas[ith], &rotated)?,
            };
            let protocol = concurrence_protocol(&probabilities_from_state(&rotated)?, branch)?;
            Ok(EntanglementRow {
                c2_direct: concurrence_direct(&rotated)?.c_squared,
                c2_analytic: concurrence_analytic(p, raw[it])?.c_squared,
                c2_protocol: protocol.c_squared,
                e: entanglement_of_formation(protocol.c_squared)?,
                branch,
                clamped: protocol.clamped,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new(&["t", "theta", "c2_direct", "c2_analytic", "c2_protocol", "E"]);
    let mut branch_counts = [0u64; 4];
    let mut clamped = 0u64;
    for (idx, r) in rows.iter().enumerate() {
        let (it, ith) = (idx / thetas.len(), idx % thetas.len());
        table.push(vec![
            ts[it].0.into(),
            thetas[ith].into(),
            r.c2_direct.into(),
            r.c2_analytic.into(),
            r.c2_protocol.into(),
            r.e.into(),
        ]);
        branch_counts[SignBranch::ALL.iter().position(|&b| b == r.branch).unwrap_or(0)] += 1;
        clamped += r.clamped as u64;
    }
    table.meta("branch", cfg.branch.as_str());
    table.meta(
        "branches_used",
        SignBranch::ALL.iter().zip(branch_counts).map(|(b, n)| (b.label().to_owned(), json!(n))).collect::<serde_json::Map<_, _>>(),
    );
    table.meta("clamped", clamped);
    Ok(table.into())
}

fn protocol(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Outcome, CliError> {
    let ts = times(cfg, p)?;
    let thetas = cfg.thetas()?;
    let raw: Vec<f64> = ts.iter().map(|t| t.1).collect();
    let psis = states(cfg, p, &raw)?;
    let choice = cfg.branch()?;
    let mut table = Table::new(&[
        "t", "theta", "p0", "p1", "p2", "p3", "ppp", "ppm", "pmp", "pmm", "c2_pp", "c2_pm", "c2_mp", "c2_mm",
        "c2_direct", "branch", "c2",
    ]);
    for (it, (t, t_raw)) in ts.iter().enumerate() {
        for &theta in &thetas {
            let n = BlochDirection::new(theta, 0.0);
            let rotated = rotate_state(&psis[it], &n, &n)?;
            let ps = probabilities_from_state(&rotated)?;
            let mut row: Vec<Cell> = vec![(*t).into(), theta.into()];
            row.extend(ps.z().into_iter().chain(ps.x()).map(Cell::from));
            let per_branch: Vec<f64> = SignBranch::ALL
                .iter()
                .map(|&b| concurrence_protocol(&ps, b).map(|r| r.c_squared).unwrap_or(f64::NAN))
                .collect();
            row.extend(per_branch.iter().copied().map(Cell::from));
            row.push(concurrence_direct(&rotated)?.c_squared.into());
            let branch = match choice {
                BranchChoice::Fixed(b) => b,
                BranchChoice::Auto => auto_branch(p, *t_raw, theta, &rotated)?,
            };
            row.push(branch.label().into());
            row.push(concurrence_protocol(&ps, branch)?.c_squared.into());
            table.push(row);
        }
    }
    table.meta("branch", cfg.branch.as_str());
    Ok(table.into())
}

fn shots(cfg: &RunConfig, p: &TwoQubitParams) -> Result<Outcome, CliError> {
    let (_, t_raw) = times(cfg, p)?[0];
    let theta = cfg.thetas()?[0];
    let psi = states(cfg, p, &[t_raw])?.remove(0);
    let sampler = Sampler::new(cfg.seed).with_epsilon(cfg.epsilon)?;
    let setting = ChshSetting::symmetric(theta, cfg.phi1, cfg.phi2);

    let exact = chsh_gamma(&psi, &setting)?;
    let gamma = sampler.estimate_gamma(&psi, &setting, cfg.shots)?;
    let branch = match cfg.branch()? {
        BranchChoice::Fixed(b) => b,
        BranchChoice::Auto => family_branch(p, t_raw),
    };
    let concurrence = sampler.estimate_concurrence(&psi, cfg.shots, branch);

    let mut table = Table::new(&["quantity", "mean", "std_error", "shots", "exact"]);
    table.push(vec![
        "gamma".into(),
        gamma.estimate.mean.into(),
        gamma.estimate.std_error.into(),
        gamma.estimate.shots.into(),
        exact.gamma.into(),
    ]);
    let c = &exact.components;
    let names = ["q00", "qn0", "q0n", "qnn", "q1", "q2"];
    let exact_components = [c.q00, c.qn0, c.q0n, c.qnn, c.q1, c.q2];
    for ((name, e), x) in names.iter().zip(&gamma.components).zip(exact_components) {
        table.push(vec![(*name).into(), e.mean.into(), e.std_error.into(), e.shots.into(), x.into()]);
    }
    let c2_exact = concurrence_direct(&psi)?.c_squared;
    let mut logs = gamma.logs;
    let mut summary = format!("gamma = {:.6} +/- {:.6} (exact {:.6})", gamma.estimate.mean, gamma.estimate.std_error, exact.gamma);
    match concurrence {
        Ok(est) => {
            let e = est.estimate;
            table.push(vec!["c2".into(), e.mean.into(), e.std_error.into(), e.shots.into(), c2_exact.into()]);
            table.meta("failed_resamples", est.failed_resamples as u64);
            logs.extend(est.logs);
        }
        Err(err) => {
            table.push(vec!["c2".into(), f64::NAN.into(), f64::NAN.into(), cfg.shots.into(), c2_exact.into()]);
            table.meta("c2_error", err.to_string());
            summary.push_str(&format!("; C² estimate failed: {err}"));
        }
    }
    table.meta("branch", branch.label());
    table.meta("seed", cfg.seed);
    table.meta("epsilon", cfg.epsilon);
    table.meta("theta", theta);
    table.meta("phi1", cfg.phi1);
    table.meta("phi2", cfg.phi2);
    Ok(Outcome { table, trial_logs: logs, summary: Some(summary) })
}
