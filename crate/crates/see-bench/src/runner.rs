//! Experiment execution: one shared channel draw per (sweep value, trial)
//! cell, every selected solver run on it, one CSV row per solver run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

use see_core::baselines::{full_power_solve, no_irs_solve, zfrand, ZfRandConfig};
use see_core::channel::{generate_channels, ChannelSet};
use see_core::model::{PowerModel, RateThreshold};
use see_core::solver::{pddagp, Solution, SolverConfig};

use crate::config::{ExperimentSpec, SolverKind, LN_2};

pub const CSV_HEADER: &str = "sweep_var,sweep_value,trial,solver,see_nats,see_mbit_per_joule,\
secrecy_rate_bps_hz,tx_power_w,feasible,inner_iters,outer_iters,wall_s,per_iter_s";

/// One CSV row in column order.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub solver: String,
    pub see_nats: f64,
    pub see_mbit_per_joule: f64,
    pub secrecy_rate_bps_hz: f64,
    pub tx_power_w: f64,
    pub feasible: bool,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub wall_s: f64,
    pub per_iter_s: f64,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.sweep_var,
            self.sweep_value,
            self.trial,
            self.solver,
            self.see_nats,
            self.see_mbit_per_joule,
            self.secrecy_rate_bps_hz,
            self.tx_power_w,
            self.feasible,
            self.inner_iters,
            self.outer_iters,
            self.wall_s,
            self.per_iter_s,
        )
        .unwrap();
        s
    }
}

pub fn dispatch_solver(
    kind: SolverKind,
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    solver_cfg: &SolverConfig,
    zf_cfg: &ZfRandConfig,
) -> see_core::Result<Solution> {
    match kind {
        SolverKind::Pddagp => pddagp(ch, pm, c_th, solver_cfg),
        SolverKind::Zfrand => zfrand(ch, pm, c_th, zf_cfg),
        SolverKind::NoIrs => no_irs_solve(ch, pm, c_th, solver_cfg),
        SolverKind::FullPower => full_power_solve(ch, pm, c_th, solver_cfg),
    }
}

fn row_from_solution(
    spec: &ExperimentSpec,
    sweep_value: f64,
    trial: usize,
    kind: SolverKind,
    sol: &Solution,
    wall_s: f64,
) -> ResultRow {
    let bandwidth_hz = spec.channel.bandwidth_mhz * 1e6;
    let tx_power_w: f64 = sol.point.x_cov.diagonal().iter().map(|d| d.re).sum();
    ResultRow {
        sweep_var: spec.sweep.variable.name().to_string(),
        sweep_value,
        trial,
        solver: kind.name().to_string(),
        see_nats: sol.see_nats,
        see_mbit_per_joule: bandwidth_hz * sol.see_nats / LN_2 / 1e6,
        secrecy_rate_bps_hz: sol.secrecy_rate_nats / LN_2,
        tx_power_w,
        feasible: sol.feasible,
        inner_iters: sol.inner_iters,
        outer_iters: sol.outer_iters,
        wall_s,
        per_iter_s: wall_s / sol.inner_iters.max(1) as f64,
    }
}

/// Runs the full sweep-by-trial-by-solver grid and returns the rows in
/// deterministic (sweep value, trial, solver) order.
pub fn run_rows(spec: &ExperimentSpec, trace_dir: Option<&Path>) -> anyhow::Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &sweep_value in &spec.sweep.values {
        let cell = spec.cell(sweep_value)?;
        for trial in 0..spec.trials {
            let seed = spec.base_seed + trial as u64;
            let ch = generate_channels(&cell.geometry, &cell.channel, seed)
                .context("channel generation")?;
            for &kind in &spec.solvers {
                let solver_cfg = SolverConfig {
                    seed,
                    ..spec.solver.clone()
                };
                let zf_cfg = ZfRandConfig {
                    seed,
                    ..spec.zfrand.clone()
                };
                let started = Instant::now();
                let sol = dispatch_solver(kind, &ch, &cell.power, &cell.c_th, &solver_cfg, &zf_cfg)
                    .with_context(|| format!("solver {} failed", kind.name()))?;
                let wall_s = started.elapsed().as_secs_f64();
                rows.push(row_from_solution(spec, sweep_value, trial, kind, &sol, wall_s));
                if let Some(dir) = trace_dir {
                    write_trace(dir, sweep_value, trial, kind, &sol)?;
                }
            }
        }
    }
    Ok(rows)
}

fn write_trace(
    dir: &Path,
    sweep_value: f64,
    trial: usize,
    kind: SolverKind,
    sol: &Solution,
) -> anyhow::Result<()> {
    let path = dir.join(format!(
        "trace_{}_{}_{}.jsonl",
        kind.name(),
        sweep_value,
        trial
    ));
    let mut out = String::new();
    for rec in &sol.trace.records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Runs the experiment and writes `results.csv` (plus optional JSONL
/// traces) into `out_dir`. Returns the CSV path.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_dir: &Path,
    traces: bool,
) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let rows = run_rows(spec, traces.then_some(out_dir))?;
    let csv_path = out_dir.join("results.csv");
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&row.to_csv_line());
        text.push('\n');
    }
    std::fs::write(&csv_path, text).with_context(|| format!("writing {}", csv_path.display()))?;
    Ok(csv_path)
}
