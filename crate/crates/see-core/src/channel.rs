//! Rician-faded, free-space-path-loss-scaled, noise-normalized channel
//! generation from node geometry.
//!
//! Alice, Bob and Eve carry uniform linear arrays along the y-axis with
//! half-wavelength spacing; the IRS is a uniform planar array in the x-z
//! plane, with its element count factored into the near-square `rows x cols`
//! pair (`rows <= cols`). Each link is
//! `sqrt(1/(kappa+1)) * Xi .* (sqrt(kappa) * H_los + H_nlos)` with exact
//! element-pair distances in both the LoS phases and the path-loss matrix
//! `Xi`, and all five matrices are divided by the noise amplitude `sigma`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{C64, CMat};
use crate::{Error, Result};

/// Node placement and antenna/element counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Geometry {
    /// Center of Alice's array, meters.
    pub alice_center: [f64; 3],
    /// Center of Bob's array, meters.
    pub bob_center: [f64; 3],
    /// Center of Eve's array, meters.
    pub eve_center: [f64; 3],
    /// Center of the IRS panel, meters.
    pub irs_center: [f64; 3],
    pub n_alice: usize,
    pub n_bob: usize,
    pub n_eve: usize,
    pub n_irs: usize,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_alice == 0 || self.n_bob == 0 || self.n_eve == 0 || self.n_irs == 0 {
            return Err(Error::InvalidParameter(
                "antenna/element counts must be >= 1".into(),
            ));
        }
        let centers = [
            self.alice_center,
            self.bob_center,
            self.eve_center,
            self.irs_center,
        ];
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                if dist(centers[i], centers[j]) <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "all pairwise node distances must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Fading, carrier, gain and noise parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Rician factor kappa (dimensionless).
    pub kappa: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Antenna gain on the Alice-IRS leg.
    pub gain_alice: f64,
    /// Antenna gain on the IRS-Bob leg.
    pub gain_bob: f64,
    /// Antenna gain on the IRS-Eve leg.
    pub gain_eve: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_per_hz: f64,
    /// Signal bandwidth, Hz.
    pub bandwidth_hz: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa < 0.0
            || self.wavelength <= 0.0
            || self.bandwidth_hz <= 0.0
            || self.gain_alice <= 0.0
            || self.gain_bob <= 0.0
            || self.gain_eve <= 0.0
        {
            return Err(Error::InvalidParameter(
                "channel parameters out of range".into(),
            ));
        }
        Ok(())
    }
}

/// The five noise-normalized channel matrices of the link.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// Alice -> Bob, `n_bob x n_alice`.
    pub h_ab: CMat,
    /// Alice -> Eve, `n_eve x n_alice`.
    pub h_ae: CMat,
    /// Alice -> IRS, `n_irs x n_alice`.
    pub h_as: CMat,
    /// IRS -> Bob, `n_bob x n_irs`.
    pub h_sb: CMat,
    /// IRS -> Eve, `n_eve x n_irs`.
    pub h_se: CMat,
}

impl ChannelSet {
    pub fn n_alice(&self) -> usize {
        self.h_ab.ncols()
    }
    pub fn n_bob(&self) -> usize {
        self.h_ab.nrows()
    }
    pub fn n_eve(&self) -> usize {
        self.h_ae.nrows()
    }
    pub fn n_irs(&self) -> usize {
        self.h_as.nrows()
    }

    /// Replaces the three IRS-side matrices with zeros, leaving the direct
    /// links intact.
    pub fn without_irs(&self) -> ChannelSet {
        ChannelSet {
            h_ab: self.h_ab.clone(),
            h_ae: self.h_ae.clone(),
            h_as: CMat::zeros(self.n_irs(), self.n_alice()),
            h_sb: CMat::zeros(self.n_bob(), self.n_irs()),
            h_se: CMat::zeros(self.n_eve(), self.n_irs()),
        }
    }
}

/// Per-node element coordinates, meters.
#[derive(Debug, Clone)]
pub struct ElementPositions {
    pub alice: Vec<[f64; 3]>,
    pub bob: Vec<[f64; 3]>,
    pub eve: Vec<[f64; 3]>,
    pub irs: Vec<[f64; 3]>,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Noise amplitude `sigma = sqrt(N0 * B)` with `N0` converted from dBm/Hz
/// to Watt/Hz.
pub fn noise_sigma(params: &ChannelParams) -> f64 {
    let n0_watt_per_hz = 10f64.powf((params.noise_psd_dbm_per_hz - 30.0) / 10.0);
    (n0_watt_per_hz * params.bandwidth_hz).sqrt()
}

/// Near-square factor pair of `n` with `rows <= cols`.
pub fn planar_factors(n: usize) -> (usize, usize) {
    let mut rows = (n as f64).sqrt().floor() as usize;
    while rows > 1 && n % rows != 0 {
        rows -= 1;
    }
    (rows.max(1), n / rows.max(1))
}

fn ula_positions(center: [f64; 3], n: usize, wavelength: f64) -> Vec<[f64; 3]> {
    let spacing = wavelength / 2.0;
    (0..n)
        .map(|i| {
            let offset = (i as f64 - (n as f64 - 1.0) / 2.0) * spacing;
            [center[0], center[1] + offset, center[2]]
        })
        .collect()
}

fn upa_positions(center: [f64; 3], n: usize, wavelength: f64) -> Vec<[f64; 3]> {
    let spacing = wavelength / 2.0;
    let (rows, cols) = planar_factors(n);
    let mut out = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            let dx = (c as f64 - (cols as f64 - 1.0) / 2.0) * spacing;
            let dz = (r as f64 - (rows as f64 - 1.0) / 2.0) * spacing;
            out.push([center[0] + dx, center[1], center[2] + dz]);
        }
    }
    out
}

/// Element coordinates for all four nodes.
pub fn element_positions(geom: &Geometry, wavelength: f64) -> ElementPositions {
    ElementPositions {
        alice: ula_positions(geom.alice_center, geom.n_alice, wavelength),
        bob: ula_positions(geom.bob_center, geom.n_bob, wavelength),
        eve: ula_positions(geom.eve_center, geom.n_eve, wavelength),
        irs: upa_positions(geom.irs_center, geom.n_irs, wavelength),
    }
}

/// FSPL amplitude coefficient of a direct link: `((4 pi / lambda)^2 d^3)^(-1/2)`.
pub fn fspl_direct(distance: f64, wavelength: f64) -> Result<f64> {
    if distance <= 0.0 {
        return Err(Error::InvalidParameter("distance must be positive".into()));
    }
    Ok(((4.0 * PI / wavelength).powi(2) * distance.powi(3)).powf(-0.5))
}

/// FSPL amplitude coefficient of one IRS leg:
/// `(gain * leg_scale * (4 pi / lambda)^2 d^3)^(-1/2)`.
pub fn fspl_irs_leg(leg_scale: f64, distance: f64, gain: f64, wavelength: f64) -> Result<f64> {
    if leg_scale <= 0.0 || distance <= 0.0 || gain <= 0.0 {
        return Err(Error::InvalidParameter(
            "leg_scale, distance and gain must be positive".into(),
        ));
    }
    Ok((gain * leg_scale * (4.0 * PI / wavelength).powi(2) * distance.powi(3)).powf(-0.5))
}

/// Draws one Rician link. `fspl(tx_index, rx_index)` supplies the amplitude
/// coefficient for each element pair; the NLoS part is filled column-major,
/// real part before imaginary, to pin the RNG stream order.
fn rician_link(
    rx: &[[f64; 3]],
    tx: &[[f64; 3]],
    kappa: f64,
    wavelength: f64,
    fspl: impl Fn(usize, usize) -> f64,
    rng: &mut ChaCha8Rng,
) -> CMat {
    let rows = rx.len();
    let cols = tx.len();
    let los_scale = (kappa / (kappa + 1.0)).sqrt();
    let nlos_scale = (1.0 / (kappa + 1.0)).sqrt();
    let mut m = CMat::zeros(rows, cols);
    for p in 0..cols {
        for q in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let nlos = C64::new(re, im) / C64::new(2f64.sqrt(), 0.0);
            let d = dist(tx[p], rx[q]);
            let phase = -2.0 * PI * d / wavelength;
            let los = C64::new(phase.cos(), phase.sin());
            m[(q, p)] = (los * los_scale + nlos * nlos_scale) * fspl(p, q);
        }
    }
    m
}

/// Generates the five noise-normalized channel matrices. Deterministic for a
/// given `(geom, params, seed)`; the matrices are drawn in the fixed order
/// `h_ab, h_ae, h_as, h_sb, h_se`.
pub fn generate_channels(geom: &Geometry, params: &ChannelParams, seed: u64) -> Result<ChannelSet> {
    geom.validate()?;
    params.validate()?;
    let l_alice = geom.alice_center[1];
    let l_bob = geom.bob_center[1];
    let l_eve = geom.eve_center[1];
    if l_alice <= 0.0 || l_bob <= 0.0 || l_eve <= 0.0 {
        return Err(Error::InvalidParameter(
            "IRS path-loss leg scales (node y-coordinates) must be positive".into(),
        ));
    }

    let pos = element_positions(geom, params.wavelength);
    let sigma = noise_sigma(params);
    let lam = params.wavelength;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let direct = |tx: &[[f64; 3]], rx: &[[f64; 3]], p: usize, q: usize| {
        fspl_direct(dist(tx[p], rx[q]), lam).expect("positive distance")
    };
    let leg = |tx: &[[f64; 3]], rx: &[[f64; 3]], scale: f64, gain: f64, p: usize, q: usize| {
        fspl_irs_leg(scale, dist(tx[p], rx[q]), gain, lam).expect("positive distance")
    };

    let h_ab = rician_link(&pos.bob, &pos.alice, params.kappa, lam, |p, q| {
        direct(&pos.alice, &pos.bob, p, q)
    }, &mut rng);
    let h_ae = rician_link(&pos.eve, &pos.alice, params.kappa, lam, |p, q| {
        direct(&pos.alice, &pos.eve, p, q)
    }, &mut rng);
    let h_as = rician_link(&pos.irs, &pos.alice, params.kappa, lam, |p, q| {
        leg(&pos.alice, &pos.irs, l_alice, params.gain_alice, p, q)
    }, &mut rng);
    let h_sb = rician_link(&pos.bob, &pos.irs, params.kappa, lam, |p, q| {
        leg(&pos.irs, &pos.bob, l_bob, params.gain_bob, p, q)
    }, &mut rng);
    let h_se = rician_link(&pos.eve, &pos.irs, params.kappa, lam, |p, q| {
        leg(&pos.irs, &pos.eve, l_eve, params.gain_eve, p, q)
    }, &mut rng);

    let inv_sigma = C64::new(1.0 / sigma, 0.0);
    Ok(ChannelSet {
        h_ab: h_ab * inv_sigma,
        h_ae: h_ae * inv_sigma,
        h_as: h_as * inv_sigma,
        h_sb: h_sb * inv_sigma,
        h_se: h_se * inv_sigma,
    })
}
