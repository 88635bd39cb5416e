//! Experiment configuration: one JSON document in presentation units (dBm,
//! bits/s/Hz, MHz), converted to SI/nats at parse time.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use see_core::baselines::ZfRandConfig;
use see_core::channel::{ChannelParams, Geometry};
use see_core::model::{PowerModel, RateThreshold};
use see_core::solver::SolverConfig;

pub const LN_2: f64 = std::f64::consts::LN_2;

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Pddagp,
    Zfrand,
    NoIrs,
    FullPower,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pddagp => "pddagp",
            SolverKind::Zfrand => "zfrand",
            SolverKind::NoIrs => "no_irs",
            SolverKind::FullPower => "full_power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    NS,
    PMaxDbm,
    PEDbm,
    CThBps,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::NS => "n_s",
            SweepVar::PMaxDbm => "p_max_dbm",
            SweepVar::PEDbm => "p_e_dbm",
            SweepVar::CThBps => "c_th_bps",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            variable: SweepVar::NS,
            values: vec![25.0, 50.0, 100.0, 150.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySpec {
    pub alice_center: [f64; 3],
    pub bob_center: [f64; 3],
    pub eve_center: [f64; 3],
    pub irs_center: [f64; 3],
    pub n_alice: usize,
    pub n_bob: usize,
    pub n_eve: usize,
    pub n_irs: usize,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            alice_center: [0.0, 20.0, 10.0],
            bob_center: [350.0, 10.0, 2.0],
            eve_center: [352.0, 15.0, 2.0],
            irs_center: [30.0, 0.0, 5.0],
            n_alice: 4,
            n_bob: 2,
            n_eve: 2,
            n_irs: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSpec {
    pub kappa: f64,
    pub wavelength_m: f64,
    pub gain_alice: f64,
    pub gain_bob: f64,
    pub gain_eve: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub bandwidth_mhz: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            kappa: 1.0,
            wavelength_m: 0.15,
            gain_alice: 2.0,
            gain_bob: 2.0,
            gain_eve: 2.0,
            noise_psd_dbm_per_hz: -174.0,
            bandwidth_mhz: 20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerSpec {
    pub p_max_dbm: f64,
    pub alpha: f64,
    pub p_alice_dbm: f64,
    pub p_bob_dbm: f64,
    pub p_element_dbm: f64,
}

impl Default for PowerSpec {
    fn default() -> Self {
        PowerSpec {
            p_max_dbm: 40.0,
            alpha: 0.833,
            p_alice_dbm: 10.0,
            p_bob_dbm: 10.0,
            p_element_dbm: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub geometry: GeometrySpec,
    pub channel: ChannelSpec,
    pub power: PowerSpec,
    /// Secrecy-rate threshold, bits/s/Hz.
    pub c_th_bps_hz: f64,
    pub solvers: Vec<SolverKind>,
    pub sweep: SweepSpec,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
    pub zfrand: ZfRandConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            geometry: GeometrySpec::default(),
            channel: ChannelSpec::default(),
            power: PowerSpec::default(),
            c_th_bps_hz: 1.4,
            solvers: vec![SolverKind::Pddagp, SolverKind::Zfrand],
            sweep: SweepSpec::default(),
            trials: 50,
            base_seed: 0,
            solver: SolverConfig::default(),
            zfrand: ZfRandConfig::default(),
        }
    }
}

/// Fully converted inputs for one sweep cell.
pub struct Cell {
    pub geometry: Geometry,
    pub channel: ChannelParams,
    pub power: PowerModel,
    pub c_th: RateThreshold,
}

impl ExperimentSpec {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let spec: ExperimentSpec =
            serde_json::from_str(&text).with_context(|| "parsing experiment config")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        if self.sweep.values.is_empty() {
            bail!("sweep.values must be non-empty");
        }
        if self.solvers.is_empty() {
            bail!("solvers must be non-empty");
        }
        let finite = [
            self.c_th_bps_hz,
            self.power.p_max_dbm,
            self.power.alpha,
            self.power.p_alice_dbm,
            self.power.p_bob_dbm,
            self.power.p_element_dbm,
            self.channel.kappa,
            self.channel.wavelength_m,
            self.channel.noise_psd_dbm_per_hz,
            self.channel.bandwidth_mhz,
        ];
        if finite.iter().any(|v| !v.is_finite())
            || self.sweep.values.iter().any(|v| !v.is_finite())
        {
            bail!("all numeric config fields must be finite");
        }
        if self.sweep.variable == SweepVar::NS
            && self
                .sweep
                .values
                .iter()
                .any(|&v| v < 1.0 || v.fract() != 0.0)
        {
            bail!("n_s sweep values must be positive integers");
        }
        Ok(())
    }

    /// Applies one sweep value and converts everything to solver units.
    pub fn cell(&self, sweep_value: f64) -> anyhow::Result<Cell> {
        let mut geom_n_irs = self.geometry.n_irs;
        let mut p_max_dbm = self.power.p_max_dbm;
        let mut p_element_dbm = self.power.p_element_dbm;
        let mut c_th_bps = self.c_th_bps_hz;
        match self.sweep.variable {
            SweepVar::NS => geom_n_irs = sweep_value as usize,
            SweepVar::PMaxDbm => p_max_dbm = sweep_value,
            SweepVar::PEDbm => p_element_dbm = sweep_value,
            SweepVar::CThBps => c_th_bps = sweep_value,
        }

        let geometry = Geometry {
            alice_center: self.geometry.alice_center,
            bob_center: self.geometry.bob_center,
            eve_center: self.geometry.eve_center,
            irs_center: self.geometry.irs_center,
            n_alice: self.geometry.n_alice,
            n_bob: self.geometry.n_bob,
            n_eve: self.geometry.n_eve,
            n_irs: geom_n_irs,
        };
        geometry.validate()?;
        let channel = ChannelParams {
            kappa: self.channel.kappa,
            wavelength: self.channel.wavelength_m,
            gain_alice: self.channel.gain_alice,
            gain_bob: self.channel.gain_bob,
            gain_eve: self.channel.gain_eve,
            noise_psd_dbm_per_hz: self.channel.noise_psd_dbm_per_hz,
            bandwidth_hz: self.channel.bandwidth_mhz * 1e6,
        };
        channel.validate()?;
        let power = PowerModel {
            p_max: dbm_to_watt(p_max_dbm),
            alpha: self.power.alpha,
            p_alice: dbm_to_watt(self.power.p_alice_dbm),
            p_bob: dbm_to_watt(self.power.p_bob_dbm),
            p_element: dbm_to_watt(p_element_dbm),
            n_elements: geom_n_irs,
            bandwidth_hz: self.channel.bandwidth_mhz * 1e6,
        };
        power.validate()?;
        Ok(Cell {
            geometry,
            channel,
            power,
            c_th: RateThreshold::from_bits_per_hz(c_th_bps),
        })
    }
}
