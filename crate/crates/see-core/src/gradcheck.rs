//! Central finite-difference verification of the closed-form gradients.
//!
//! This is the arbiter for the complex-gradient scaling conventions: the
//! objective is differentiated numerically over the real and imaginary parts
//! of every coordinate (with symmetrized, Hermitian-preserving perturbations
//! for the covariance) and compared against the directional derivatives the
//! closed forms predict. It deliberately shares nothing with the closed-form
//! path beyond the objective evaluation itself.

use crate::channel::ChannelSet;
use crate::linalg::{C64, CMat};
use crate::model::{
    augmented_objective, grad_theta, grad_x, DesignPoint, DualState, PowerModel, RateThreshold,
};
use crate::Result;

/// Worst-case relative deviations between finite differences and the closed
/// forms, each normalized by the infinity norm of the respective gradient.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_x: f64,
    pub max_rel_theta: f64,
}

impl GradCheckReport {
    pub fn max_rel(&self) -> f64 {
        self.max_rel_x.max(self.max_rel_theta)
    }
}

/// Compares `grad_x` and `grad_theta` against central finite differences of
/// the augmented objective with step `h`.
pub fn check_gradients(
    ch: &ChannelSet,
    pt: &DesignPoint,
    pm: &PowerModel,
    c_th: &RateThreshold,
    dual: &DualState,
    h: f64,
) -> Result<GradCheckReport> {
    let gx = grad_x(ch, pt, pm, c_th, dual)?;
    let gt = grad_theta(ch, pt, pm, c_th, dual)?;

    let eval_x = |x: &CMat| -> Result<f64> {
        let p = DesignPoint {
            x_cov: x.clone(),
            theta: pt.theta.clone(),
            slack: pt.slack,
        };
        augmented_objective(ch, &p, pm, c_th, dual)
    };

    let n = pt.x_cov.nrows();
    let gx_scale = gx.iter().map(|v| v.norm()).fold(1e-12, f64::max);
    let mut max_rel_x = 0.0f64;
    for i in 0..n {
        for j in i..n {
            // real symmetric perturbation (E_ij + E_ji)/2, or E_ii on the diagonal
            let mut delta = CMat::zeros(n, n);
            if i == j {
                delta[(i, i)] = C64::new(1.0, 0.0);
            } else {
                delta[(i, j)] = C64::new(0.5, 0.0);
                delta[(j, i)] = C64::new(0.5, 0.0);
            }
            max_rel_x = max_rel_x.max(fd_vs_predicted(&eval_x, pt, &delta, &gx, gx_scale, h)?);

            if i != j {
                // imaginary Hermitian perturbation (j E_ij - j E_ji)/2
                let mut delta = CMat::zeros(n, n);
                delta[(i, j)] = C64::new(0.0, 0.5);
                delta[(j, i)] = C64::new(0.0, -0.5);
                max_rel_x =
                    max_rel_x.max(fd_vs_predicted(&eval_x, pt, &delta, &gx, gx_scale, h)?);
            }
        }
    }

    let eval_theta = |theta_i: usize, bump: C64| -> Result<f64> {
        let mut theta = pt.theta.clone();
        theta[theta_i] += bump;
        let p = DesignPoint {
            x_cov: pt.x_cov.clone(),
            theta,
            slack: pt.slack,
        };
        augmented_objective(ch, &p, pm, c_th, dual)
    };

    let gt_scale = gt.iter().map(|v| v.norm()).fold(1e-12, f64::max);
    let mut max_rel_theta = 0.0f64;
    for i in 0..pt.theta.len() {
        let fd_re = (eval_theta(i, C64::new(h, 0.0))? - eval_theta(i, C64::new(-h, 0.0))?)
            / (2.0 * h);
        let fd_im = (eval_theta(i, C64::new(0.0, h))? - eval_theta(i, C64::new(0.0, -h))?)
            / (2.0 * h);
        max_rel_theta = max_rel_theta.max((fd_re - 2.0 * gt[i].re).abs() / gt_scale);
        max_rel_theta = max_rel_theta.max((fd_im - 2.0 * gt[i].im).abs() / gt_scale);
    }

    Ok(GradCheckReport {
        max_rel_x,
        max_rel_theta,
    })
}

fn fd_vs_predicted(
    eval: &impl Fn(&CMat) -> Result<f64>,
    pt: &DesignPoint,
    delta: &CMat,
    gx: &CMat,
    scale: f64,
    h: f64,
) -> Result<f64> {
    let plus = eval(&(&pt.x_cov + delta.scale(h)))?;
    let minus = eval(&(&pt.x_cov - delta.scale(h)))?;
    let fd = (plus - minus) / (2.0 * h);
    // directional derivative predicted by the Wirtinger convention
    let predicted = 2.0 * (delta.adjoint() * gx).diagonal().iter().map(|v| v.re).sum::<f64>();
    Ok((fd - predicted).abs() / scale)
}
