//! Benchmark schemes: zero-forcing with random phases, no-IRS, and
//! full-power transmission.
//!
//! ZFrand draws random IRS phase vectors, restricts the covariance to the
//! null space of the effective eavesdropper channel (which silences Eve
//! exactly), and optimizes the null-space covariance with Dinkelbach
//! fractional programming over a projected gradient ascent inner solver.
//! The other two baselines are the main solver with one structural switch
//! flipped each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{hermitian_eig, logdet_ipgram, C64, CMat, CVec};
use crate::model::{
    effective_channels, secrecy_rate_raw, total_power, DesignPoint, PowerModel, RateThreshold,
};
use crate::project::project_psd_trace_ball;
use crate::solver::{
    backtrack_step, pddagp_with_options, Solution, SolverConfig, SolverOptions, SolverTrace,
    Termination, XProjection, FEASIBILITY_TOL,
};
use crate::{Error, Result};

/// Relative singular-value threshold below which a direction counts as
/// eavesdropper null space.
const NULL_SPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ZfRandConfig {
    /// Number of random phase candidates.
    pub n_randomizations: usize,
    pub seed: u64,
    pub dinkelbach_tol: f64,
    pub dinkelbach_max_iters: usize,
    /// Relative objective-change tolerance for the inner ascent.
    pub pga_tol: f64,
    pub pga_max_iters: usize,
}

impl Default for ZfRandConfig {
    fn default() -> Self {
        ZfRandConfig {
            n_randomizations: 100,
            seed: 0,
            dinkelbach_tol: 1e-6,
            dinkelbach_max_iters: 50,
            pga_tol: 1e-6,
            pga_max_iters: 500,
        }
    }
}

/// Orthonormal basis of the (numerical) null space of `h`, via the
/// eigenvectors of `h^H h` with relatively negligible eigenvalues. Empty
/// matrix (n x 0) when the null space is trivial.
fn null_space_basis(h: &CMat) -> Result<CMat> {
    let n = h.ncols();
    let gram = crate::linalg::herm_part(&(h.adjoint() * h))?;
    let eig = hermitian_eig(&gram)?;
    let lmax = eig.eigenvalues[0].max(0.0);
    // the Gram matrix squares the singular values, so the nominal cutoff
    // sits far below the eigensolver's noise floor; clamp it there
    let rel = (NULL_SPACE_TOL * NULL_SPACE_TOL).max(1e-13);
    let cutoff = rel * lmax;
    let cols: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= cutoff)
        .collect();
    let mut basis = CMat::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(basis)
}

/// Classic water-filling: split `p_total` over parallel channels with gains
/// `g` to maximize `sum ln(1 + g_i p_i)`. Returns (capacity, powers).
fn waterfill_capacity(gains: &[f64], p_total: f64) -> (f64, Vec<f64>) {
    let positive: Vec<f64> = gains.iter().copied().filter(|&g| g > 0.0).collect();
    if positive.is_empty() || p_total <= 0.0 {
        return (0.0, vec![0.0; gains.len()]);
    }
    let mut lo = 0.0f64;
    let mut hi = p_total + positive.iter().map(|g| 1.0 / g).fold(0.0, f64::max);
    for _ in 0..200 {
        let w = 0.5 * (lo + hi);
        let used: f64 = positive.iter().map(|&g| (w - 1.0 / g).max(0.0)).sum();
        if (used - p_total).abs() <= 1e-12 {
            break;
        }
        if used < p_total {
            lo = w;
        } else {
            hi = w;
        }
    }
    let w = 0.5 * (lo + hi);
    let powers: Vec<f64> = gains
        .iter()
        .map(|&g| if g > 0.0 { (w - 1.0 / g).max(0.0) } else { 0.0 })
        .collect();
    let cap = gains
        .iter()
        .zip(&powers)
        .map(|(&g, &p)| (1.0 + g * p).ln())
        .sum();
    (cap, powers)
}

/// Minimum-power water-filling that achieves `rate` exactly; None when the
/// gains cannot support it at any power.
fn min_power_for_rate(gains: &[f64], rate: f64) -> Option<Vec<f64>> {
    let positive: Vec<f64> = gains.iter().copied().filter(|&g| g > 0.0).collect();
    if rate <= 0.0 {
        return Some(vec![0.0; gains.len()]);
    }
    if positive.is_empty() {
        return None;
    }
    // capacity at water level w is sum_i max(ln(g_i w), 0), unbounded in w
    let cap_at = |w: f64| -> f64 {
        positive.iter().map(|&g| (g * w).ln().max(0.0)).sum()
    };
    let mut lo = 1.0 / positive.iter().fold(0.0f64, |a, &g| a.max(g));
    let mut hi = lo.max(1.0);
    while cap_at(hi) < rate {
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    for _ in 0..200 {
        let w = 0.5 * (lo + hi);
        if cap_at(w) < rate {
            lo = w;
        } else {
            hi = w;
        }
    }
    let w = hi;
    Some(
        gains
            .iter()
            .map(|&g| if g > 0.0 { (w - 1.0 / g).max(0.0) } else { 0.0 })
            .collect(),
    )
}

/// `ln det(I + H Q H^H) - lambda (tr(Q)/alpha + p_circuit)`.
fn dinkelbach_objective(h: &CMat, q: &CMat, lambda: f64, pm: &PowerModel) -> Result<f64> {
    let tr: f64 = q.diagonal().iter().map(|d| d.re).sum();
    Ok(logdet_ipgram(h, q)? - lambda * (tr / pm.alpha + pm.circuit_power()))
}

/// Projected gradient ascent on `Q` over the PSD trace ball for a fixed
/// Dinkelbach parameter. Returns the iterate and the iteration count.
fn pga_fixed_lambda(
    h: &CMat,
    mut q: CMat,
    lambda: f64,
    pm: &PowerModel,
    zf_cfg: &ZfRandConfig,
) -> Result<(CMat, usize)> {
    let ls = SolverConfig::default();
    let mut value = dinkelbach_objective(h, &q, lambda, pm)?;
    let mut tau = 1.0;
    let mut iters = 0;
    for _ in 0..zf_cfg.pga_max_iters {
        iters += 1;
        let s = crate::linalg::ipgram_solve(h, &q, &CMat::identity(h.nrows(), h.nrows()))?;
        let grad = crate::linalg::herm_part(
            &(h.adjoint() * s * h
                - CMat::identity(q.nrows(), q.nrows()).scale(lambda / pm.alpha)),
        )?;
        let grad_norm = grad.norm();
        if grad_norm <= 0.0 {
            break;
        }
        let dir = grad.unscale(grad_norm);
        let q0 = q.clone();
        let accepted = backtrack_step(value, 2.0 * tau, &ls, |step| {
            let cand = project_psd_trace_ball(&(&q0 + dir.scale(step)), pm.p_max)?;
            let gain = (&cand - &q0).zip_fold(&grad, 0.0, |acc, d, g| acc + (d.conj() * g).re);
            let v = dinkelbach_objective(h, &cand, lambda, pm)?;
            Ok((cand, v, gain))
        })?;
        let Some((q_new, v_new, step)) = accepted else {
            break;
        };
        let rel = (v_new - value).abs() / value.abs().max(1.0);
        q = q_new;
        value = v_new;
        tau = step;
        if rel <= zf_cfg.pga_tol {
            break;
        }
    }
    Ok((q, iters))
}

struct Candidate {
    theta: CVec,
    x_cov: CMat,
    c_raw: f64,
    p_total: f64,
    feasible: bool,
    inner_iters: usize,
    outer_iters: usize,
}

/// Zero-forcing baseline: best of `n_randomizations` random phase vectors,
/// each with a null-space covariance optimized by Dinkelbach + projected
/// gradient ascent, then lifted to the rate threshold by water-filling when
/// the unconstrained optimum falls short.
pub fn zfrand(
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    cfg: &ZfRandConfig,
) -> Result<Solution> {
    pm.validate()?;
    if cfg.n_randomizations == 0 {
        return Err(Error::InvalidParameter(
            "n_randomizations must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ns = ch.n_irs();
    let mut best: Option<Candidate> = None;
    let mut any_null_space = false;

    for _ in 0..cfg.n_randomizations {
        let theta = CVec::from_fn(ns, |_, _| {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::new(phi.cos(), phi.sin())
        });
        let (hb_eff, he_eff) = effective_channels(ch, &theta)?;
        let basis = null_space_basis(&he_eff)?;
        if basis.ncols() == 0 {
            continue;
        }
        any_null_space = true;
        let hv = &hb_eff * &basis; // Bob as seen through the null space
        let k = basis.ncols();

        // Dinkelbach iterations on E(Q) = C(Q) / P(Q)
        let mut q = CMat::identity(k, k).scale(pm.p_max / (2.0 * k as f64));
        let mut lambda = 0.0f64;
        let mut inner = 0;
        let mut outer = 0;
        for _ in 0..cfg.dinkelbach_max_iters {
            outer += 1;
            let (q_new, it) = pga_fixed_lambda(&hv, q, lambda, pm, cfg)?;
            q = q_new;
            inner += it;
            let c = logdet_ipgram(&hv, &q)?;
            let tr: f64 = q.diagonal().iter().map(|d| d.re).sum();
            let p = tr / pm.alpha + pm.circuit_power();
            if (c - lambda * p).abs() <= cfg.dinkelbach_tol {
                break;
            }
            lambda = c / p;
        }

        let mut c = logdet_ipgram(&hv, &q)?;
        let gram = crate::linalg::herm_part(&(hv.adjoint() * &hv))?;
        let eig = hermitian_eig(&gram)?;
        let gains: Vec<f64> = eig.eigenvalues.iter().map(|&g| g.max(0.0)).collect();
        let mut feasible = c >= c_th.c_th_nats - FEASIBILITY_TOL;
        if !feasible {
            // threshold repair: the cheapest water-filled covariance whose
            // rate meets the threshold, if one fits in the power budget
            let (cap_max, _) = waterfill_capacity(&gains, pm.p_max);
            if cap_max >= c_th.c_th_nats {
                if let Some(powers) = min_power_for_rate(&gains, c_th.c_th_nats) {
                    let total: f64 = powers.iter().sum();
                    if total <= pm.p_max + 1e-9 {
                        let d = CVec::from_iterator(
                            k,
                            powers.iter().map(|&p| C64::new(p, 0.0)),
                        );
                        q = &eig.eigenvectors
                            * CMat::from_diagonal(&d)
                            * eig.eigenvectors.adjoint();
                        q = crate::linalg::herm_part(&q)?;
                        c = logdet_ipgram(&hv, &q)?;
                        feasible = c >= c_th.c_th_nats - FEASIBILITY_TOL;
                    }
                }
            }
        }

        let x_cov = crate::linalg::herm_part(&(&basis * q * basis.adjoint()))?;
        let p_total = total_power(&x_cov, pm);
        let cand = Candidate {
            theta,
            x_cov,
            c_raw: c,
            p_total,
            feasible,
            inner_iters: inner,
            outer_iters: outer,
        };
        let take = match &best {
            None => true,
            Some(b) => {
                let (se_new, se_old) = (cand.c_raw / cand.p_total, b.c_raw / b.p_total);
                (cand.feasible && !b.feasible)
                    || (cand.feasible == b.feasible && se_new > se_old)
            }
        };
        if take {
            best = Some(cand);
        }
    }

    let Some(b) = best else {
        return Err(Error::ZeroForcingInfeasible);
    };
    if !any_null_space {
        return Err(Error::ZeroForcingInfeasible);
    }
    // report with the exact (non-ZF-idealized) secrecy rate
    let c_raw = secrecy_rate_raw(ch, &b.x_cov, &b.theta)?;
    let rate = c_raw.max(0.0);
    Ok(Solution {
        see_nats: rate / b.p_total,
        see_scaled: pm.bandwidth_hz * rate / b.p_total,
        secrecy_rate_nats: rate,
        c_raw,
        p_total: b.p_total,
        feasible: c_raw >= c_th.c_th_nats - FEASIBILITY_TOL,
        point: DesignPoint {
            x_cov: b.x_cov,
            theta: b.theta,
            slack: (c_raw - c_th.c_th_nats).max(0.0),
        },
        inner_iters: b.inner_iters,
        outer_iters: b.outer_iters,
        trace: SolverTrace {
            records: Vec::new(),
            termination: Termination::Converged,
        },
    })
}

/// No-IRS baseline: the main solver on the direct links only, with the IRS
/// static power removed.
pub fn no_irs_solve(
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let direct = ch.without_irs();
    let pm = PowerModel {
        n_elements: 0,
        ..pm.clone()
    };
    pddagp_with_options(
        &direct,
        &pm,
        c_th,
        cfg,
        SolverOptions {
            x_projection: XProjection::TraceBall,
            optimize_theta: false,
        },
    )
}

/// Full-power baseline: the main solver constrained to `tr(X) = P_max`.
pub fn full_power_solve(
    ch: &ChannelSet,
    pm: &PowerModel,
    c_th: &RateThreshold,
    cfg: &SolverConfig,
) -> Result<Solution> {
    pddagp_with_options(
        ch,
        pm,
        c_th,
        cfg,
        SolverOptions {
            x_projection: XProjection::TraceSphere,
            optimize_theta: true,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;

    fn random_cmat(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_channel_set(
        rng: &mut impl Rng,
        na: usize,
        nb: usize,
        ne: usize,
        ns: usize,
    ) -> ChannelSet {
        ChannelSet {
            h_ab: random_cmat(rng, nb, na),
            h_ae: random_cmat(rng, ne, na),
            h_as: random_cmat(rng, ns, na).scale(0.3),
            h_sb: random_cmat(rng, nb, ns).scale(0.3),
            h_se: random_cmat(rng, ne, ns).scale(0.3),
        }
    }

    fn power_model(ns: usize) -> PowerModel {
        PowerModel {
            p_max: 2.0,
            alpha: 0.833,
            p_alice: 0.01,
            p_bob: 0.01,
            p_element: 1e-3,
            n_elements: ns,
            bandwidth_hz: 20e6,
        }
    }

    #[test]
    fn zero_forcing_silences_eve() {
        let mut rng = StdRng::seed_from_u64(1);
        let ch = random_channel_set(&mut rng, 4, 2, 2, 6);
        let pm = power_model(6);
        let c_th = RateThreshold::from_nats(0.0);
        let cfg = ZfRandConfig {
            n_randomizations: 5,
            ..ZfRandConfig::default()
        };
        let sol = zfrand(&ch, &pm, &c_th, &cfg).unwrap();
        let (_, he_eff) = effective_channels(&ch, &sol.point.theta).unwrap();
        let leak = (&he_eff * &sol.point.x_cov * he_eff.adjoint()).norm();
        assert!(leak <= 1e-9 * sol.point.x_cov.norm().max(1e-12));
    }

    #[test]
    fn zero_eve_channel_uses_full_space() {
        let mut rng = StdRng::seed_from_u64(2);
        let mut ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        ch.h_ae = CMat::zeros(2, 3);
        ch.h_se = CMat::zeros(2, 4);
        let pm = power_model(4);
        let c_th = RateThreshold::from_nats(0.0);
        let cfg = ZfRandConfig {
            n_randomizations: 3,
            ..ZfRandConfig::default()
        };
        let sol = zfrand(&ch, &pm, &c_th, &cfg).unwrap();
        assert!(sol.c_raw > 0.0);
        // beats isotropic transmission at full power
        let iso = CMat::identity(3, 3).scale(pm.p_max / 3.0);
        let c_iso = secrecy_rate_raw(&ch, &iso, &sol.point.theta).unwrap();
        let see_iso = c_iso / total_power(&iso, &pm);
        assert!(sol.see_nats >= see_iso - 1e-9);
    }

    #[test]
    fn scalar_null_space_matches_grid_oracle() {
        // N_A = 2, N_E = 1, no IRS: the null space is a fixed line, so the
        // scheme reduces to a 1-D power allocation.
        let mut rng = StdRng::seed_from_u64(3);
        let ch = ChannelSet {
            h_ab: random_cmat(&mut rng, 2, 2),
            h_ae: random_cmat(&mut rng, 1, 2),
            h_as: CMat::zeros(0, 2),
            h_sb: CMat::zeros(2, 0),
            h_se: CMat::zeros(1, 0),
        };
        let pm = power_model(0);
        let c_th = RateThreshold::from_nats(0.0);
        let cfg = ZfRandConfig {
            n_randomizations: 1,
            ..ZfRandConfig::default()
        };
        let sol = zfrand(&ch, &pm, &c_th, &cfg).unwrap();

        // grid over the ray X = q v v^H with v the unit null vector
        let basis = null_space_basis(&ch.h_ae).unwrap();
        assert_eq!(basis.ncols(), 1);
        let mut best = 0.0f64;
        for i in 0..=20000 {
            let qv = pm.p_max * i as f64 / 20000.0;
            let x = &basis * basis.adjoint() * C64::new(qv, 0.0);
            let c = secrecy_rate_raw(&ch, &x, &sol.point.theta).unwrap();
            best = best.max(c.max(0.0) / total_power(&x, &pm));
        }
        let rel = (best - sol.see_nats).abs() / best.max(1e-12);
        assert!(rel <= 1e-3, "solver {} vs grid {best}", sol.see_nats);
    }

    #[test]
    fn more_randomizations_never_hurt() {
        let mut rng = StdRng::seed_from_u64(4);
        let ch = random_channel_set(&mut rng, 4, 2, 2, 6);
        let pm = power_model(6);
        let c_th = RateThreshold::from_nats(0.0);
        let small = zfrand(
            &ch,
            &pm,
            &c_th,
            &ZfRandConfig {
                n_randomizations: 5,
                ..ZfRandConfig::default()
            },
        )
        .unwrap();
        let large = zfrand(
            &ch,
            &pm,
            &c_th,
            &ZfRandConfig {
                n_randomizations: 20,
                ..ZfRandConfig::default()
            },
        )
        .unwrap();
        assert!(large.see_nats >= small.see_nats - 1e-12);
    }

    #[test]
    fn zfrand_threshold_repair_meets_rate() {
        let mut rng = StdRng::seed_from_u64(5);
        let ch = random_channel_set(&mut rng, 4, 2, 2, 6);
        let pm = power_model(6);
        // high but attainable threshold forces the repair path
        let unconstrained = zfrand(
            &ch,
            &pm,
            &RateThreshold::from_nats(0.0),
            &ZfRandConfig {
                n_randomizations: 5,
                ..ZfRandConfig::default()
            },
        )
        .unwrap();
        let c_th = RateThreshold::from_nats(unconstrained.c_raw * 1.5);
        let sol = zfrand(
            &ch,
            &pm,
            &c_th,
            &ZfRandConfig {
                n_randomizations: 5,
                ..ZfRandConfig::default()
            },
        )
        .unwrap();
        if sol.feasible {
            assert!(sol.c_raw >= c_th.c_th_nats - FEASIBILITY_TOL);
            assert!(sol.p_total >= unconstrained.p_total - 1e-9);
        }
    }

    #[test]
    fn no_irs_ignores_irs_links() {
        let mut rng = StdRng::seed_from_u64(6);
        let a = random_channel_set(&mut rng, 3, 2, 2, 6);
        let mut b = a.clone();
        b.h_as = random_cmat(&mut rng, 6, 3);
        b.h_sb = random_cmat(&mut rng, 2, 6);
        b.h_se = random_cmat(&mut rng, 2, 6);
        let pm = power_model(6);
        let c_th = RateThreshold::from_nats(0.1);
        let cfg = SolverConfig::default();
        let sa = no_irs_solve(&a, &pm, &c_th, &cfg).unwrap();
        let sb = no_irs_solve(&b, &pm, &c_th, &cfg).unwrap();
        assert_eq!(sa.point.x_cov, sb.point.x_cov);
        assert_eq!(sa.see_nats.to_bits(), sb.see_nats.to_bits());
        // the IRS static power is excluded from the baseline's budget
        let expected_circuit = pm.p_alice + pm.p_bob;
        approx::assert_relative_eq!(
            sa.p_total,
            sa.point.x_cov.diagonal().iter().map(|d| d.re).sum::<f64>() / pm.alpha
                + expected_circuit,
            max_relative = 1e-12
        );
    }

    #[test]
    fn full_power_spends_entire_budget() {
        let mut rng = StdRng::seed_from_u64(7);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 6);
        let pm = power_model(6);
        let c_th = RateThreshold::from_nats(0.1);
        let sol = full_power_solve(&ch, &pm, &c_th, &SolverConfig::default()).unwrap();
        let tr: f64 = sol.point.x_cov.diagonal().iter().map(|d| d.re).sum();
        approx::assert_relative_eq!(tr, pm.p_max, max_relative = 1e-9);
    }
}
