//! Effective channels, secrecy rate, power model, SEE, the penalized
//! augmented objective and its closed-form Wirtinger gradients.
//!
//! The `[.]_+` clamp on the secrecy rate is dropped inside the optimizer:
//! the penalty `f` and both gradients use the raw (signed) rate, and the
//! clamp is applied only to reported SEE values. Clamping creates a
//! zero-gradient plateau that stalls the ascent.
//!
//! Gradient convention: `grad_x` is the conjugate Wirtinger gradient
//! normalized so that the directional derivative of the augmented objective
//! along a Hermitian perturbation `D` equals `2 Re tr(D^H grad_x)`;
//! `grad_theta` satisfies `d/dRe(theta_i) = 2 Re g_i` and
//! `d/dIm(theta_i) = 2 Im g_i`. The finite-difference checker in
//! [`crate::gradcheck`] pins both conventions.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::linalg::{herm_part, ipgram_solve, logdet_ipgram, vecd, C64, CMat, CVec};
use crate::{Error, Result};

/// Optimization state: transmit covariance, IRS phase vector and the
/// constraint slack.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    /// Transmit covariance at Alice (Watts), Hermitian PSD.
    pub x_cov: CMat,
    /// IRS phase vector, unit-modulus entries.
    pub theta: CVec,
    /// Slack absorbing secrecy-rate surplus, >= 0.
    pub slack: f64,
}

/// Maps a transmit covariance to total consumed power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerModel {
    /// Transmit power budget, Watts.
    pub p_max: f64,
    /// Power amplifier efficiency, in (0, 1].
    pub alpha: f64,
    /// Circuit power at Alice, Watts.
    pub p_alice: f64,
    /// Circuit power at Bob, Watts.
    pub p_bob: f64,
    /// Circuit power per IRS element, Watts.
    pub p_element: f64,
    /// Number of IRS elements drawing power.
    pub n_elements: usize,
    /// Signal bandwidth, Hz (used only for reporting-scaled SEE).
    pub bandwidth_hz: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter("alpha must be in (0, 1]".into()));
        }
        if self.p_max < 0.0 || self.p_alice < 0.0 || self.p_bob < 0.0 || self.p_element < 0.0 {
            return Err(Error::InvalidParameter("powers must be >= 0".into()));
        }
        Ok(())
    }

    /// Fixed circuit power `P_A + N_S P_e + P_B`, Watts.
    pub fn circuit_power(&self) -> f64 {
        self.p_alice + self.n_elements as f64 * self.p_element + self.p_bob
    }
}

/// Dual state of the penalty method: multiplier and penalty weight.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DualState {
    pub nu: f64,
    pub omega: f64,
}

/// Secrecy-rate threshold, stored in nats/s/Hz.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateThreshold {
    pub c_th_nats: f64,
}

impl RateThreshold {
    pub fn from_nats(c_th_nats: f64) -> Self {
        RateThreshold { c_th_nats }
    }

    /// User-facing configs quote the threshold in bits/s/Hz.
    pub fn from_bits_per_hz(c_th_bits: f64) -> Self {
        RateThreshold {
            c_th_nats: c_th_bits * std::f64::consts::LN_2,
        }
    }
}

/// `H_B = H_AB + H_SB diag(theta) H_AS` and the Eve counterpart.
pub fn effective_channels(ch: &ChannelSet, theta: &CVec) -> Result<(CMat, CMat)> {
    if theta.len() != ch.n_irs() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries, channel set has {} IRS elements",
            theta.len(),
            ch.n_irs()
        )));
    }
    // diag(theta) * H_AS without materializing the diagonal matrix
    let mut scaled = ch.h_as.clone();
    for (i, row) in (0..scaled.nrows()).enumerate() {
        let t = theta[i];
        for v in scaled.row_mut(row).iter_mut() {
            *v *= t;
        }
    }
    let h_b = &ch.h_ab + &ch.h_sb * &scaled;
    let h_e = &ch.h_ae + &ch.h_se * &scaled;
    Ok((h_b, h_e))
}

/// Raw (unclamped) secrecy rate `ln|I + H_B X H_B^H| - ln|I + H_E X H_E^H|`
/// in nats/s/Hz.
pub fn secrecy_rate_raw(ch: &ChannelSet, x: &CMat, theta: &CVec) -> Result<f64> {
    let (h_b, h_e) = effective_channels(ch, theta)?;
    Ok(logdet_ipgram(&h_b, x)? - logdet_ipgram(&h_e, x)?)
}

/// Reported secrecy rate, clamped at zero.
pub fn secrecy_rate(ch: &ChannelSet, x: &CMat, theta: &CVec) -> Result<f64> {
    Ok(secrecy_rate_raw(ch, x, theta)?.max(0.0))
}

/// Total consumed power `tr(X)/alpha + P_A + N_S P_e + P_B`, Watts.
pub fn total_power(x: &CMat, pm: &PowerModel) -> f64 {
    x.diagonal().iter().map(|d| d.re).sum::<f64>() / pm.alpha + pm.circuit_power()
}

/// SEE in nats/s/Hz/Joule, using the clamped rate.
pub fn see(ch: &ChannelSet, x: &CMat, theta: &CVec, pm: &PowerModel) -> Result<f64> {
    Ok(secrecy_rate(ch, x, theta)? / total_power(x, pm))
}

/// Bandwidth-scaled SEE in nats/s/Joule.
pub fn see_scaled(ch: &ChannelSet, x: &CMat, theta: &CVec, pm: &PowerModel) -> Result<f64> {
    Ok(pm.bandwidth_hz * see(ch, x, theta, pm)?)
}

/// Penalized constraint `f = C_th - C_raw + slack`, from a precomputed rate.
pub fn penalty_from_rate(c_raw: f64, c_th: &RateThreshold, slack: f64) -> f64 {
    c_th.c_th_nats - c_raw + slack
}

/// Penalized constraint `f = C_th - C_raw(X, theta) + slack`.
pub fn penalty_f(
    ch: &ChannelSet,
    x: &CMat,
    theta: &CVec,
    c_th: &RateThreshold,
    slack: f64,
) -> Result<f64> {
    Ok(penalty_from_rate(secrecy_rate_raw(ch, x, theta)?, c_th, slack))
}

/// Augmented objective `E_hat = E - nu f - (omega/2) f^2` with `E` computed
/// from the raw rate.
pub fn augmented_objective(
    ch: &ChannelSet,
    pt: &DesignPoint,
    pm: &PowerModel,
    c_th: &RateThreshold,
    dual: &DualState,
) -> Result<f64> {
    let c_raw = secrecy_rate_raw(ch, &pt.x_cov, &pt.theta)?;
    Ok(augmented_from_rate(c_raw, pt.slack, total_power(&pt.x_cov, pm), c_th, dual))
}

pub(crate) fn augmented_from_rate(
    c_raw: f64,
    slack: f64,
    p_total: f64,
    c_th: &RateThreshold,
    dual: &DualState,
) -> f64 {
    let f = penalty_from_rate(c_raw, c_th, slack);
    c_raw / p_total - dual.nu * f - 0.5 * dual.omega * f * f
}

/// Closed-form gradient of the augmented objective w.r.t. the transmit
/// covariance. Hermitian by construction; the `1/alpha` chain-rule factor on
/// the trace term is included so the gradient matches finite differences of
/// the objective actually being ascended.
pub fn grad_x(
    ch: &ChannelSet,
    pt: &DesignPoint,
    pm: &PowerModel,
    c_th: &RateThreshold,
    dual: &DualState,
) -> Result<CMat> {
    let (h_b, h_e) = effective_channels(ch, &pt.theta)?;
    let x = &pt.x_cov;
    let c_raw = logdet_ipgram(&h_b, x)? - logdet_ipgram(&h_e, x)?;
    let p_total = total_power(x, pm);
    let f = penalty_from_rate(c_raw, c_th, pt.slack);
    let bracket = 1.0 / p_total + dual.nu + dual.omega * f;

    // G_J = H_J^H (I + H_J X H_J^H)^{-1} H_J
    let g_b = h_b.adjoint() * ipgram_solve(&h_b, x, &h_b)?;
    let g_e = h_e.adjoint() * ipgram_solve(&h_e, x, &h_e)?;

    let n = x.nrows();
    let trace_term = CMat::identity(n, n)
        .scale(c_raw / (pm.alpha * p_total * p_total));
    let grad = (g_b - g_e).scale(bracket) - trace_term;
    // Half the matrix above: with that normalization the directional
    // derivative along Hermitian D is exactly 2 Re tr(D^H grad).
    herm_part(&grad.scale(0.5))
}

/// Closed-form conjugate gradient of the augmented objective w.r.t. the IRS
/// phase vector; `theta + mu * grad` is an ascent step.
pub fn grad_theta(
    ch: &ChannelSet,
    pt: &DesignPoint,
    pm: &PowerModel,
    c_th: &RateThreshold,
    dual: &DualState,
) -> Result<CVec> {
    let (h_b, h_e) = effective_channels(ch, &pt.theta)?;
    let x = &pt.x_cov;
    let c_raw = logdet_ipgram(&h_b, x)? - logdet_ipgram(&h_e, x)?;
    let p_total = total_power(x, pm);
    let f = penalty_from_rate(c_raw, c_th, pt.slack);
    let bracket = C64::new(1.0 / p_total + dual.nu + dual.omega * f, 0.0);

    let sb = ipgram_solve(&h_b, x, &(&h_b * x * ch.h_as.adjoint()))?;
    let se = ipgram_solve(&h_e, x, &(&h_e * x * ch.h_as.adjoint()))?;
    let inner = ch.h_sb.adjoint() * sb - ch.h_se.adjoint() * se;
    Ok(vecd(&inner)? * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_cmat(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    pub(crate) fn random_channel_set(
        rng: &mut impl Rng,
        na: usize,
        nb: usize,
        ne: usize,
        ns: usize,
    ) -> ChannelSet {
        ChannelSet {
            h_ab: random_cmat(rng, nb, na),
            h_ae: random_cmat(rng, ne, na),
            h_as: random_cmat(rng, ns, na),
            h_sb: random_cmat(rng, nb, ns),
            h_se: random_cmat(rng, ne, ns),
        }
    }

    pub(crate) fn random_psd(rng: &mut impl Rng, n: usize, trace: f64) -> CMat {
        let a = random_cmat(rng, n, n);
        let m = &a * a.adjoint();
        let t: f64 = m.diagonal().iter().map(|d| d.re).sum();
        m.scale(trace / t)
    }

    pub(crate) fn random_unit_theta(rng: &mut impl Rng, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| {
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::new(phi.cos(), phi.sin())
        })
    }

    fn scalar_channels(h_ab: f64, h_ae: f64, h_as: f64, h_sb: f64, h_se: f64) -> ChannelSet {
        ChannelSet {
            h_ab: CMat::from_element(1, 1, C64::new(h_ab, 0.0)),
            h_ae: CMat::from_element(1, 1, C64::new(h_ae, 0.0)),
            h_as: CMat::from_element(1, 1, C64::new(h_as, 0.0)),
            h_sb: CMat::from_element(1, 1, C64::new(h_sb, 0.0)),
            h_se: CMat::from_element(1, 1, C64::new(h_se, 0.0)),
        }
    }

    fn test_power_model() -> PowerModel {
        PowerModel {
            p_max: 10.0,
            alpha: 0.833,
            p_alice: 0.01,
            p_bob: 0.01,
            p_element: 10f64.powf((0.01 - 30.0) / 10.0),
            n_elements: 100,
            bandwidth_hz: 20e6,
        }
    }

    #[test]
    fn effective_channels_direct_only() {
        let mut rng = StdRng::seed_from_u64(1);
        let mut ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        ch.h_sb = CMat::zeros(2, 4);
        ch.h_se = CMat::zeros(2, 4);
        let theta = random_unit_theta(&mut rng, 4);
        let (h_b, h_e) = effective_channels(&ch, &theta).unwrap();
        assert_eq!(h_b, ch.h_ab);
        assert_eq!(h_e, ch.h_ae);
    }

    #[test]
    fn effective_channels_scalar_expansion() {
        let ch = scalar_channels(0.3, 0.1, 0.5, 0.7, 0.2);
        let theta = CVec::from_element(1, C64::new(0.0, 1.0));
        let (h_b, h_e) = effective_channels(&ch, &theta).unwrap();
        assert_relative_eq!(h_b[(0, 0)].re, 0.3, max_relative = 1e-12);
        assert_relative_eq!(h_b[(0, 0)].im, 0.35, max_relative = 1e-12);
        assert_relative_eq!(h_e[(0, 0)].re, 0.1, max_relative = 1e-12);
        assert_relative_eq!(h_e[(0, 0)].im, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn effective_channels_match_naive_triple_loop() {
        let mut rng = StdRng::seed_from_u64(2);
        let (na, nb, ne, ns) = (3, 2, 2, 5);
        let ch = random_channel_set(&mut rng, na, nb, ne, ns);
        let theta = random_unit_theta(&mut rng, ns);
        let (h_b, h_e) = effective_channels(&ch, &theta).unwrap();
        for q in 0..nb {
            for p in 0..na {
                let mut v = ch.h_ab[(q, p)];
                for k in 0..ns {
                    v += ch.h_sb[(q, k)] * theta[k] * ch.h_as[(k, p)];
                }
                assert!((h_b[(q, p)] - v).norm() < 1e-12);
            }
        }
        for q in 0..ne {
            for p in 0..na {
                let mut v = ch.h_ae[(q, p)];
                for k in 0..ns {
                    v += ch.h_se[(q, k)] * theta[k] * ch.h_as[(k, p)];
                }
                assert!((h_e[(q, p)] - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn secrecy_rate_trivial_cases() {
        let mut rng = StdRng::seed_from_u64(3);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        let theta = random_unit_theta(&mut rng, 4);
        let zero = CMat::zeros(3, 3);
        assert_relative_eq!(
            secrecy_rate_raw(&ch, &zero, &theta).unwrap(),
            0.0,
            epsilon = 1e-14
        );

        // identical Bob/Eve links: zero rate for any X
        let mut same = ch.clone();
        same.h_ae = same.h_ab.clone();
        same.h_se = same.h_sb.clone();
        let x = random_psd(&mut rng, 3, 2.0);
        assert!(secrecy_rate_raw(&same, &x, &theta).unwrap().abs() < 1e-12);
    }

    #[test]
    fn secrecy_rate_scalar_formula() {
        // |h_B|^2 = 4, |h_E|^2 = 1, x = 1 -> ln 5 - ln 2
        let mut ch = scalar_channels(2.0, 1.0, 0.0, 0.0, 0.0);
        ch.h_as = CMat::zeros(1, 1);
        let x = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        let theta = CVec::from_element(1, C64::new(1.0, 0.0));
        let c = secrecy_rate_raw(&ch, &x, &theta).unwrap();
        assert_relative_eq!(c, 5f64.ln() - 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(c, 0.91629, max_relative = 1e-4);
    }

    #[test]
    fn secrecy_rate_sign_flips_on_swap() {
        let mut rng = StdRng::seed_from_u64(4);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        let theta = random_unit_theta(&mut rng, 4);
        let x = random_psd(&mut rng, 3, 1.5);
        let c = secrecy_rate_raw(&ch, &x, &theta).unwrap();
        let swapped = ChannelSet {
            h_ab: ch.h_ae.clone(),
            h_ae: ch.h_ab.clone(),
            h_as: ch.h_as.clone(),
            h_sb: ch.h_se.clone(),
            h_se: ch.h_sb.clone(),
        };
        let c_swapped = secrecy_rate_raw(&swapped, &x, &theta).unwrap();
        assert_relative_eq!(c_swapped, -c, max_relative = 1e-10);
    }

    #[test]
    fn total_power_reference_values() {
        let pm = test_power_model();
        // X = 0: circuit floor with P_e = 0.01 dBm over 100 elements.
        let zero = CMat::zeros(2, 2);
        assert_relative_eq!(total_power(&zero, &pm), 0.120231, max_relative = 1e-4);
        // tr(X) = 10 W
        let x = CMat::identity(2, 2).scale(5.0);
        assert_relative_eq!(
            total_power(&x, &pm),
            10.0 / 0.833 + 0.120231,
            max_relative = 1e-4
        );
        // no IRS elements: circuit floor only
        let mut pm0 = pm.clone();
        pm0.n_elements = 0;
        assert_relative_eq!(total_power(&zero, &pm0), 0.02, max_relative = 1e-12);
        // affine in tr(X) with slope exactly 1/alpha
        let x1 = CMat::identity(2, 2).scale(0.5);
        assert_relative_eq!(
            total_power(&x1, &pm) - total_power(&zero, &pm),
            1.0 / pm.alpha,
            max_relative = 1e-12
        );
    }

    #[test]
    fn see_scalar_reference() {
        let mut ch = scalar_channels(2.0, 1.0, 0.0, 0.0, 0.0);
        ch.h_as = CMat::zeros(1, 1);
        let x = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        let theta = CVec::from_element(1, C64::new(1.0, 0.0));
        let mut pm = test_power_model();
        pm.alpha = 1.0;
        pm.p_alice = 0.01;
        pm.p_bob = 0.01;
        // circuit floor 0.120231 W, rate from the scalar example, x = 0 in power
        let zero = CMat::zeros(1, 1);
        let c = secrecy_rate_raw(&ch, &x, &theta).unwrap();
        let e = c / total_power(&zero, &pm);
        assert_relative_eq!(e, 7.6211, max_relative = 1e-3);
        assert_relative_eq!(see(&ch, &zero, &theta, &pm).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn penalty_cases() {
        let th = RateThreshold::from_nats(0.1);
        assert_relative_eq!(penalty_from_rate(0.1, &th, 0.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(penalty_from_rate(0.5, &th, 0.4), 0.0, epsilon = 1e-15);
        assert_relative_eq!(penalty_from_rate(0.05, &th, 0.0), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn augmented_objective_reduces_to_see() {
        let mut rng = StdRng::seed_from_u64(5);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        let pm = test_power_model();
        let th = RateThreshold::from_nats(0.0);
        let x = random_psd(&mut rng, 3, 1.0);
        let theta = random_unit_theta(&mut rng, 4);
        let c_raw = secrecy_rate_raw(&ch, &x, &theta).unwrap();
        let pt = DesignPoint {
            x_cov: x.clone(),
            theta: theta.clone(),
            slack: c_raw.max(0.0),
        };
        // nu = omega = 0
        let e_raw = c_raw / total_power(&x, &pm);
        let zero_dual = DualState { nu: 0.0, omega: 0.0 };
        assert_relative_eq!(
            augmented_objective(&ch, &pt, &pm, &th, &zero_dual).unwrap(),
            e_raw,
            max_relative = 1e-12
        );
        // f = 0 (slack absorbs the surplus): equals E for any nu, omega
        let dual = DualState { nu: 0.7, omega: 3.0 };
        assert_relative_eq!(
            augmented_objective(&ch, &pt, &pm, &th, &dual).unwrap(),
            e_raw,
            max_relative = 1e-12
        );
    }

    #[test]
    fn augmented_objective_matches_independent_formula() {
        let mut rng = StdRng::seed_from_u64(6);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        let pm = test_power_model();
        let th = RateThreshold::from_nats(0.4);
        let pt = DesignPoint {
            x_cov: random_psd(&mut rng, 3, 1.0),
            theta: random_unit_theta(&mut rng, 4),
            slack: 0.2,
        };
        let dual = DualState { nu: 0.3, omega: 2.0 };
        // separately coded evaluation
        let c = secrecy_rate_raw(&ch, &pt.x_cov, &pt.theta).unwrap();
        let p = total_power(&pt.x_cov, &pm);
        let f = th.c_th_nats - c + pt.slack;
        let expect = c / p - 0.3 * f - 1.0 * f * f;
        assert_relative_eq!(
            augmented_objective(&ch, &pt, &pm, &th, &dual).unwrap(),
            expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn grad_x_is_hermitian_and_vanishes_for_identical_links() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        ch.h_ae = ch.h_ab.clone();
        ch.h_se = ch.h_sb.clone();
        let pm = test_power_model();
        let th = RateThreshold::from_nats(0.0);
        let pt = DesignPoint {
            x_cov: random_psd(&mut rng, 3, 1.0),
            theta: random_unit_theta(&mut rng, 4),
            slack: 0.0,
        };
        let dual = DualState { nu: 0.2, omega: 1.0 };
        let g = grad_x(&ch, &pt, &pm, &th, &dual).unwrap();
        assert!((&g - g.adjoint()).norm() < 1e-14);
        assert!(g.norm() < 1e-10, "gradient norm {}", g.norm());
    }

    #[test]
    fn grad_theta_trivial_zeros() {
        let mut rng = StdRng::seed_from_u64(8);
        let ch = random_channel_set(&mut rng, 3, 2, 2, 4);
        let pm = test_power_model();
        let th = RateThreshold::from_nats(0.0);
        let dual = DualState { nu: 0.1, omega: 0.5 };
        // X = 0
        let pt = DesignPoint {
            x_cov: CMat::zeros(3, 3),
            theta: random_unit_theta(&mut rng, 4),
            slack: 0.0,
        };
        assert!(grad_theta(&ch, &pt, &pm, &th, &dual).unwrap().norm() < 1e-14);
        // zero IRS-side channels
        let mut no_irs = ch.clone();
        no_irs.h_sb = CMat::zeros(2, 4);
        no_irs.h_se = CMat::zeros(2, 4);
        let pt = DesignPoint {
            x_cov: random_psd(&mut rng, 3, 1.0),
            theta: random_unit_theta(&mut rng, 4),
            slack: 0.0,
        };
        assert!(grad_theta(&no_irs, &pt, &pm, &th, &dual).unwrap().norm() < 1e-14);
    }
}
