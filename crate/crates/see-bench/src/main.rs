use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use see_bench::config::ExperimentSpec;
use see_bench::{runner, timing};
use see_core::channel::{generate_channels, ChannelParams, Geometry};
use see_core::gradcheck::check_gradients;
use see_core::linalg::{C64, CMat, CVec};
use see_core::model::{DesignPoint, DualState, PowerModel, RateThreshold};

#[derive(Parser)]
#[command(name = "see-bench", about = "Secrecy energy efficiency experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv and traces.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the trial count from the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the base seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write per-run JSONL iteration traces.
        #[arg(long)]
        trace: bool,
    },
    /// Fit per-iteration time against N_S from a results CSV.
    Timing {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        solver: String,
    },
    /// Finite-difference check of the closed-form gradients.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dimensions as NA,NB,NE,NS.
        #[arg(long, default_value = "3,2,2,8")]
        dims: String,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            trials,
            seed,
            trace,
        } => {
            let mut spec = ExperimentSpec::from_path(&config)?;
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(s) = seed {
                spec.base_seed = s;
            }
            spec.validate()?;
            let csv = runner::run_experiment(&spec, &out, trace)?;
            println!("wrote {}", csv.display());
        }
        Command::Timing { csv, solver } => {
            let (slope, intercept, r2) = timing::timing_regression(&csv, &solver)?;
            println!("slope_s_per_element={slope:e}");
            println!("intercept_s={intercept:e}");
            println!("r_squared={r2:.6}");
        }
        Command::Gradcheck { seed, dims } => {
            let parts: Vec<usize> = dims
                .split(',')
                .map(|p| p.trim().parse::<usize>().context("dims must be NA,NB,NE,NS"))
                .collect::<anyhow::Result<_>>()?;
            anyhow::ensure!(parts.len() == 4, "dims must have exactly 4 entries");
            let (na, nb, ne, ns) = (parts[0], parts[1], parts[2], parts[3]);
            let report = run_gradcheck(seed, na, nb, ne, ns)?;
            println!("max_rel_x={:e}", report.max_rel_x);
            println!("max_rel_theta={:e}", report.max_rel_theta);
            println!("max_rel={:e}", report.max_rel());
        }
    }
    Ok(())
}

fn run_gradcheck(
    seed: u64,
    na: usize,
    nb: usize,
    ne: usize,
    ns: usize,
) -> anyhow::Result<see_core::gradcheck::GradCheckReport> {
    let spec = ExperimentSpec::default();
    let geom = Geometry {
        alice_center: spec.geometry.alice_center,
        bob_center: spec.geometry.bob_center,
        eve_center: spec.geometry.eve_center,
        irs_center: spec.geometry.irs_center,
        n_alice: na,
        n_bob: nb,
        n_eve: ne,
        n_irs: ns,
    };
    let params = ChannelParams {
        kappa: spec.channel.kappa,
        wavelength: spec.channel.wavelength_m,
        gain_alice: spec.channel.gain_alice,
        gain_bob: spec.channel.gain_bob,
        gain_eve: spec.channel.gain_eve,
        noise_psd_dbm_per_hz: spec.channel.noise_psd_dbm_per_hz,
        bandwidth_hz: spec.channel.bandwidth_mhz * 1e6,
    };
    let cell = spec.cell(ns as f64)?;
    let pm = PowerModel {
        n_elements: ns,
        ..cell.power
    };
    let ch = generate_channels(&geom, &params, seed)?;
    let pt = DesignPoint {
        x_cov: CMat::identity(na, na).scale(pm.p_max / (2.0 * na as f64)),
        theta: CVec::from_element(ns, C64::new(1.0, 0.0)),
        slack: 0.0,
    };
    let dual = DualState { nu: 0.5, omega: 2.0 };
    let c_th = RateThreshold::from_bits_per_hz(spec.c_th_bps_hz);
    Ok(check_gradients(&ch, &pt, &pm, &c_th, &dual, 1e-6)?)
}
