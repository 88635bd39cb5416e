//! Euclidean projections onto the three feasible sets: the PSD trace ball,
//! its trace-sphere variant (full-power mode) and the unit-modulus torus.
//!
//! Both matrix projections are water-filling solutions: eigendecompose,
//! shift the eigenvalues by a common water level found by bisection, clamp
//! at zero and rebuild.

use rand::Rng;

use crate::linalg::{herm_part, hermitian_eig, C64, CMat, CVec};
use crate::{Error, Result};

const BISECT_MAX_ITERS: usize = 200;
const TRACE_TOL: f64 = 1e-12;

/// Magnitudes below this take the random-phase branch of the unit-modulus
/// projection.
const ZERO_MAGNITUDE: f64 = 1e-300;

fn clamped_trace(eigs: &[f64], mu: f64) -> f64 {
    eigs.iter().map(|&l| (l - mu).max(0.0)).sum()
}

/// Bisection for the water level `mu` with `sum_i max(lambda_i - mu, 0)`
/// equal to `target`, over a bracket where the sum is monotone decreasing.
fn water_level(eigs: &[f64], mut lo: f64, mut hi: f64, target: f64) -> f64 {
    for _ in 0..BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let t = clamped_trace(eigs, mid);
        if (t - target).abs() <= TRACE_TOL {
            return mid;
        }
        if t > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn rebuild(eig: &crate::linalg::HermEig, mu: f64) -> Result<CMat> {
    let clamped = eig.eigenvalues.map(|l| C64::new((l - mu).max(0.0), 0.0));
    let m = &eig.eigenvectors * CMat::from_diagonal(&clamped) * eig.eigenvectors.adjoint();
    herm_part(&m)
}

/// Projection onto `{X PSD, tr(X) <= p_max}`.
pub fn project_psd_trace_ball(m: &CMat, p_max: f64) -> Result<CMat> {
    if p_max <= 0.0 {
        return Err(Error::InvalidParameter("p_max must be positive".into()));
    }
    let eig = hermitian_eig(m)?;
    let eigs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if clamped_trace(&eigs, 0.0) <= p_max {
        return rebuild(&eig, 0.0);
    }
    let lambda_max = eigs[0];
    let mu = water_level(&eigs, 0.0, lambda_max, p_max);
    rebuild(&eig, mu)
}

/// Projection onto `{X PSD, tr(X) = p_max}`; the water level may have any
/// sign.
pub fn project_psd_trace_sphere(m: &CMat, p_max: f64) -> Result<CMat> {
    if p_max <= 0.0 {
        return Err(Error::InvalidParameter("p_max must be positive".into()));
    }
    let eig = hermitian_eig(m)?;
    let eigs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let lambda_max = eigs[0];
    let lambda_min = eigs[eigs.len() - 1];
    let mu = water_level(&eigs, lambda_min - p_max, lambda_max, p_max);
    rebuild(&eig, mu)
}

/// Entrywise projection onto the unit-modulus torus; zero entries get a
/// uniformly random phase from the supplied RNG.
pub fn project_unit_modulus(v: &CVec, rng: &mut impl Rng) -> CVec {
    CVec::from_iterator(
        v.len(),
        v.iter().map(|&z| {
            let mag = z.norm();
            if mag > ZERO_MAGNITUDE {
                z / mag
            } else {
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                C64::new(phi.cos(), phi.sin())
            }
        }),
    )
}
