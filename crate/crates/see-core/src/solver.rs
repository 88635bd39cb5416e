//! Penalty-dual-decomposition alternating gradient projection.
//!
//! The inner loop alternates a projected gradient ascent step on the
//! transmit covariance, a projected step on the IRS phases, and a slack
//! update, with Armijo backtracking line searches on both blocks. The outer
//! loop runs a dual ascent step on the multiplier and grows the penalty
//! weight geometrically until the gap between the plain and augmented
//! objectives closes.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{CMat, CVec, C64};
use crate::model::{
    augmented_from_rate, grad_theta, grad_x, penalty_from_rate, secrecy_rate_raw, total_power,
    DesignPoint, DualState, PowerModel, RateThreshold,
};
use crate::project::{project_psd_trace_ball, project_psd_trace_sphere, project_unit_modulus};
use crate::{Error, Result};

/// Penalty, dual, tolerance and line-search parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Initial Lagrange multiplier.
    pub nu0: f64,
    /// Initial penalty weight.
    pub omega0: f64,
    /// Penalty growth divisor, in (0, 1); `omega <- omega / eta` per outer
    /// iteration.
    pub eta: f64,
    /// Relative convergence tolerance for both loops.
    pub eps: f64,
    /// Initial covariance step size.
    pub tau0: f64,
    /// Initial phase step size.
    pub mu0: f64,
    /// Armijo sufficient-ascent constant.
    pub armijo_c: f64,
    /// Step multiplier on rejection, in (0, 1).
    pub shrink: f64,
    /// Warm-start multiplier on the previously accepted step, > 1.
    pub grow: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub max_backtracks: usize,
    /// Seed for the solver RNG (random-phase branch of the unit-modulus
    /// projection).
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu0: 0.0,
            omega0: 1.0,
            eta: 0.7,
            eps: 1e-4,
            tau0: 1.0,
            mu0: 1.0,
            armijo_c: 1e-4,
            shrink: 0.5,
            grow: 2.0,
            max_inner_iters: 2000,
            max_outer_iters: 50,
            max_backtracks: 40,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter("eta must be in (0, 1)".into()));
        }
        if self.eps <= 0.0 {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0 && self.grow > 1.0) {
            return Err(Error::InvalidParameter(
                "need 0 < shrink < 1 < grow".into(),
            ));
        }
        if self.max_inner_iters == 0 || self.max_outer_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::InvalidParameter("iteration counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which feasible set the covariance is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XProjection {
    /// `tr(X) <= P_max` (the default problem).
    TraceBall,
    /// `tr(X) = P_max` (full-power variant).
    TraceSphere,
}

/// Structural switches for the baseline variants.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub x_projection: XProjection,
    /// When false the phase block is frozen (no-IRS baseline).
    pub optimize_theta: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            x_projection: XProjection::TraceBall,
            optimize_theta: true,
        }
    }
}

/// One row of the per-iteration history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer: usize,
    pub inner: usize,
    /// Augmented objective.
    pub e_hat: f64,
    /// SEE (clamped rate over total power), nats/s/Hz/Joule.
    pub see: f64,
    /// Raw secrecy rate, nats/s/Hz.
    pub c_raw: f64,
    /// Penalized constraint value.
    pub f: f64,
    pub slack: f64,
    pub nu: f64,
    pub omega: f64,
    /// Accepted covariance step this iteration (0 if rejected).
    pub tau: f64,
    /// Accepted phase step this iteration (0 if rejected).
    pub mu: f64,
    pub tr_x: f64,
    /// Seconds since the solve started.
    pub wall_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Outer gap `|E - E_hat| / |E_hat|` fell below tolerance.
    Converged,
    MaxOuterIters,
}

/// Full iteration history of one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

/// Tolerance for the reported feasibility flag, nats.
pub const FEASIBILITY_TOL: f64 = 1e-3;

/// Final state of a solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub point: DesignPoint,
    /// SEE with the clamped rate, nats/s/Hz/Joule.
    pub see_nats: f64,
    /// Bandwidth-scaled SEE, nats/s/Joule.
    pub see_scaled: f64,
    /// Clamped secrecy rate, nats/s/Hz.
    pub secrecy_rate_nats: f64,
    /// Raw secrecy rate, nats/s/Hz.
    pub c_raw: f64,
    /// Total consumed power at the final point, Watts.
    pub p_total: f64,
    /// `C_raw >= C_th - 1e-3` at the final point.
    pub feasible: bool,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub trace: SolverTrace,
}

/// One Armijo backtracking line search along a projected gradient direction.
///
/// `candidate(step)` must return the projected trial point, its objective
/// value, and the first-order predicted gain of the *projected*
/// displacement (the inner product of the gradient with `candidate -
/// point`). Starting from `step0`, the step shrinks until `f(candidate) >=
/// f0 + armijo_c * gain` with `gain > 0`; using the projected displacement
/// rather than `step * |grad|^2` keeps the test meaningful when the
/// projection absorbs most of the gradient at the feasible-set boundary.
/// `None` means no step was accepted and the caller keeps its point.
pub fn backtrack_step<P>(
    f0: f64,
    step0: f64,
    cfg: &SolverConfig,
    mut candidate: impl FnMut(f64) -> Result<(P, f64, f64)>,
) -> Result<Option<(P, f64, f64)>> {
    let mut step = step0;
    for _ in 0..cfg.max_backtracks {
        let (point, value, gain) = candidate(step)?;
        if gain > 0.0 && value >= f0 + cfg.armijo_c * gain {
            return Ok(Some((point, value, step)));
        }
        step *= cfg.shrink;
    }
    Ok(None)
}

struct InnerState {
    point: DesignPoint,
    e_hat: f64,
    c_raw: f64,
    tau_last: f64,
    mu_last: f64,
    inner_iters: usize,
}

struct Problem<'a> {
    ch: &'a ChannelSet,
    pm: &'a PowerModel,
    c_th: &'a RateThreshold,
    opts: SolverOptions,
}

impl Problem<'_> {
    /// Augmented objective with the slack eliminated in closed form
    /// (`max{0, C - C_th}`). Evaluating candidates this way keeps the
    /// penalty inactive at every feasible point, so a line-search step may
    /// trade rate for power without being charged for a constraint it
    /// still satisfies.
    fn eval(&self, x: &CMat, theta: &CVec, dual: &DualState) -> Result<(f64, f64)> {
        let c_raw = secrecy_rate_raw(self.ch, x, theta)?;
        let slack = (c_raw - self.c_th.c_th_nats).max(0.0);
        let e_hat = augmented_from_rate(c_raw, slack, total_power(x, self.pm), self.c_th, dual);
        Ok((e_hat, c_raw))
    }

    fn project_x(&self, m: &CMat) -> Result<CMat> {
        match self.opts.x_projection {
            XProjection::TraceBall => project_psd_trace_ball(m, self.pm.p_max),
            XProjection::TraceSphere => project_psd_trace_sphere(m, self.pm.p_max),
        }
    }
}

/// Alternating gradient projection for fixed `(nu, omega)`. Mutates the
/// state in place and appends one trace record per inner iteration.
fn inner_gp(
    prob: &Problem,
    state: &mut InnerState,
    dual: &DualState,
    cfg: &SolverConfig,
    outer: usize,
    rng: &mut ChaCha8Rng,
    started: Instant,
    trace: &mut Vec<TraceRecord>,
) -> Result<()> {
    // The relative-change test must hold on several consecutive iterations
    // before the loop exits: a single slow iteration is common mid-run
    // (e.g. while the line searches re-grow their step sizes) and does not
    // mean the ascent has finished.
    const STALL_STREAK: usize = 25;
    let mut streak = 0;
    for inner in 1..=cfg.max_inner_iters {
        let e_hat_prev = state.e_hat;
        let mut tau_used = 0.0;
        let mut mu_used = 0.0;

        // covariance block; the search direction is the normalized gradient
        // so step sizes are Frobenius distances and scale-invariant in P_max
        let gx = grad_x(prob.ch, &state.point, prob.pm, prob.c_th, dual)?;
        let gx_norm = gx.norm();
        let x0 = state.point.x_cov.clone();
        if gx_norm > 0.0 {
            let dir = gx.unscale(gx_norm);
            if let Some((x_new, e_new, step)) = backtrack_step(
                state.e_hat,
                cfg.grow * state.tau_last,
                cfg,
                |s| {
                    let x = prob.project_x(&(&x0 + dir.scale(s)))?;
                    let gain = 2.0
                        * (&x - &x0)
                            .zip_fold(&gx, 0.0, |acc, d, g| acc + (d.conj() * g).re);
                    let (e_hat, _) = prob.eval(&x, &state.point.theta, dual)?;
                    Ok((x, e_hat, gain))
                },
            )? {
                state.point.x_cov = x_new;
                state.e_hat = e_new;
                state.tau_last = step;
                tau_used = step;
            }
        }

        // phase block, using the freshly updated covariance
        if prob.opts.optimize_theta {
            let gt = grad_theta(prob.ch, &state.point, prob.pm, prob.c_th, dual)?;
            let gt_norm = gt.norm();
            let theta0 = state.point.theta.clone();
            if gt_norm > 0.0 {
                let dir = gt.unscale(gt_norm);
                if let Some((theta_new, e_new, step)) = backtrack_step(
                    state.e_hat,
                    cfg.grow * state.mu_last,
                    cfg,
                    |s| {
                        let theta = project_unit_modulus(&(&theta0 + dir.scale(s)), rng);
                        let gain = 2.0
                            * (&theta - &theta0)
                                .zip_fold(&gt, 0.0, |acc, d, g| acc + (d.conj() * g).re);
                        let (e_hat, _) = prob.eval(&state.point.x_cov, &theta, dual)?;
                        Ok((theta, e_hat, gain))
                    },
                )? {
                    state.point.theta = theta_new;
                    state.e_hat = e_new;
                    state.mu_last = step;
                    mu_used = step;
                }
            }
        }

        // slack update
        let c_raw = secrecy_rate_raw(prob.ch, &state.point.x_cov, &state.point.theta)?;
        state.point.slack = (c_raw - prob.c_th.c_th_nats).max(0.0);
        state.c_raw = c_raw;
        let p_total = total_power(&state.point.x_cov, prob.pm);
        state.e_hat = augmented_from_rate(c_raw, state.point.slack, p_total, prob.c_th, dual);
        state.inner_iters += 1;

        if !state.e_hat.is_finite() {
            return Err(Error::NonFiniteObjective { outer, inner });
        }

        let f = penalty_from_rate(c_raw, prob.c_th, state.point.slack);
        trace.push(TraceRecord {
            outer,
            inner,
            e_hat: state.e_hat,
            see: c_raw.max(0.0) / p_total,
            c_raw,
            f,
            slack: state.point.slack,
            nu: dual.nu,
            omega: dual.omega,
            tau: tau_used,
            mu: mu_used,
            tr_x: state.point.x_cov.diagonal().iter().map(|d| d.re).sum(),
            wall_s: started.elapsed().as_secs_f64(),
        });

        let rel = (state.e_hat - e_hat_prev).abs() / e_hat_prev.abs().max(1e-12);
        if tau_used == 0.0 && mu_used == 0.0 && rel <= cfg.eps {
            // neither line search could move the point, so every further
            // iteration would be identical
            break;
        }
        streak = if rel <= cfg.eps { streak + 1 } else { 0 };
        if streak >= STALL_STREAK {
            break;
        }
    }
    Ok(())
}

/// Full PDDAGP solve with the default options (trace ball, phases
/// optimized).
pub fn pddagp(
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    cfg: &SolverConfig,
) -> Result<Solution> {
    pddagp_with_options(ch, pm, c_th, cfg, SolverOptions::default())
}

/// PDDAGP solve with explicit structural options.
pub fn pddagp_with_options(
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    cfg: &SolverConfig,
    opts: SolverOptions,
) -> Result<Solution> {
    cfg.validate()?;
    pm.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let prob = Problem { ch, pm, c_th, opts };

    let n_a = ch.n_alice();
    let theta0 = CVec::from_element(ch.n_irs(), C64::new(1.0, 0.0));
    let mut dual = DualState {
        nu: cfg.nu0,
        omega: cfg.omega0,
    };

    // Isotropic start, with the power level chosen by a coarse log-spaced
    // scan instead of pinned to the budget. A gradient method started at
    // tens of watts has to crawl down an ill-conditioned valley to reach a
    // milliwatt-scale optimum; scanning the isotropic ray first makes the
    // starting point (and hence the solve) independent of how oversized
    // the power budget is.
    let iso = CMat::identity(n_a, n_a).scale(1.0 / (2.0 * n_a as f64));
    let mut x0 = iso.scale(pm.p_max);
    if opts.x_projection == XProjection::TraceSphere {
        x0 = project_psd_trace_sphere(&x0, pm.p_max)?;
    } else {
        // Quarter-decade grid on an absolute watt scale, so two solves
        // that differ only in budget start from the same point whenever
        // the best level fits under both budgets.
        let mut best = f64::NEG_INFINITY;
        let mut levels: Vec<f64> = (-32..)
            .map(|k| 10f64.powf(k as f64 / 4.0))
            .take_while(|&p| p < pm.p_max)
            .collect();
        levels.push(pm.p_max);
        for p in levels {
            let cand = iso.scale(p);
            let (e_hat, _) = prob.eval(&cand, &theta0, &dual)?;
            if e_hat > best {
                best = e_hat;
                x0 = cand;
            }
        }
    }
    let c_raw0 = secrecy_rate_raw(ch, &x0, &theta0)?;
    let slack0 = (c_raw0 - c_th.c_th_nats).max(0.0);
    let (e_hat0, _) = prob.eval(&x0, &theta0, &dual)?;

    let mut state = InnerState {
        point: DesignPoint {
            x_cov: x0,
            theta: theta0,
            slack: slack0,
        },
        e_hat: e_hat0,
        c_raw: c_raw0,
        tau_last: cfg.tau0,
        mu_last: cfg.mu0,
        inner_iters: 0,
    };

    let mut records = Vec::new();
    let mut termination = Termination::MaxOuterIters;
    let mut outer_iters = 0;
    for outer in 1..=cfg.max_outer_iters {
        outer_iters = outer;
        // re-evaluate under the current duals before ascending
        let (e_hat, _) = prob.eval(&state.point.x_cov, &state.point.theta, &dual)?;
        state.e_hat = e_hat;

        inner_gp(
            &prob, &mut state, &dual, cfg, outer, &mut rng, started, &mut records,
        )?;

        let p_total = total_power(&state.point.x_cov, pm);
        let e_plain = state.c_raw / p_total;
        let gap = (e_plain - state.e_hat).abs() / state.e_hat.abs().max(1e-12);
        if gap <= cfg.eps {
            termination = Termination::Converged;
            break;
        }

        let f = penalty_from_rate(state.c_raw, c_th, state.point.slack);
        dual.nu += dual.omega * f;
        dual.omega /= cfg.eta;
    }

    let p_total = total_power(&state.point.x_cov, pm);
    let rate = state.c_raw.max(0.0);
    Ok(Solution {
        feasible: state.c_raw >= c_th.c_th_nats - FEASIBILITY_TOL,
        see_nats: rate / p_total,
        see_scaled: pm.bandwidth_hz * rate / p_total,
        secrecy_rate_nats: rate,
        c_raw: state.c_raw,
        p_total,
        point: state.point,
        inner_iters: state.inner_iters,
        outer_iters,
        trace: SolverTrace {
            records,
            termination,
        },
    })
}
