//! `hystereo` — drives the assessment pipeline from the command line.
//!
//! Thin argument-parsing shell over the library: every subcommand loads the
//! experiment config, resolves the model variant it needs, and calls one
//! stage function.  Exit codes: 0 on success, 2 for invalid input, 3 for
//! numerical failures, 4 when a pipeline stage fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hystereo_cli::stages::{
    assess_run, build_variant, design_gain, gen_motion, observe, run_twin, sense, sensor_map,
    simulate, AssessTarget, ModelVariant,
};
use hystereo_cli::{compare_runs, DamageReport, Result, TwinExperimentConfig};

#[derive(Parser)]
#[command(
    name = "hystereo",
    version,
    about = "Observer-based seismic response and damage assessment workbench"
)]
struct Cli {
    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

/// Model variant selector for forward runs.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    /// As described in the model file.
    Nominal,
    /// With the config's damage overrides (the truth model).
    Truth,
    /// Nominal with the observer's mismatch knobs.
    Observer,
}

impl From<VariantArg> for ModelVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Nominal => ModelVariant::Nominal,
            VariantArg::Truth => ModelVariant::Truth,
            VariantArg::Observer => ModelVariant::Observer,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize (or validate) the ground-motion record.
    GenMotion {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a model variant under a persisted motion record.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Motion CSV produced by gen-motion.
        #[arg(long)]
        motion: PathBuf,
        /// Which model variant to integrate.
        #[arg(long, value_enum, default_value_t = VariantArg::Truth)]
        variant: VariantArg,
        /// Output response directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Manufacture noisy instrument records from a truth response.
    Sense {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        motion: PathBuf,
        /// Truth response directory.
        #[arg(long)]
        response: PathBuf,
        /// Output measurements CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Design the observer gain from persisted measurements.
    OptimizeGain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        /// Output gains JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the observer from measurements and gains.
    Observe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        gains: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        /// Output response directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Assess a persisted response for damage.
    Assess {
        #[arg(long)]
        config: PathBuf,
        /// Response directory to assess.
        #[arg(long)]
        response: PathBuf,
        /// Treat the response as an observer run driven by these gains.
        #[arg(long)]
        gains: Option<PathBuf>,
        /// Variant that produced a forward run (ignored with --gains).
        #[arg(long, value_enum, default_value_t = VariantArg::Truth)]
        variant: VariantArg,
        /// Output directory for report.json and plot data.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole twin pipeline into a run directory.
    Twin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Diff two damage reports.
    Compare {
        /// Baseline report.json.
        a: PathBuf,
        /// Comparison report.json.
        b: PathBuf,
        /// Output delta JSON.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<TwinExperimentConfig> {
    let mut config = TwinExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMotion { config, out } => {
            let config = load_config(&config, cli.seed)?;
            let motion = gen_motion(&config, config.seed, &out)?;
            println!(
                "wrote {} ({} samples at dt = {} s)",
                out.display(),
                motion.len(),
                motion.dt()
            );
        }
        Command::Simulate { config, motion, variant, out } => {
            let config = load_config(&config, cli.seed)?;
            let (_, model, _) = build_variant(&config, variant.into())?;
            simulate(&model, &motion, config.dt, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Sense { config, motion, response, out } => {
            let config = load_config(&config, cli.seed)?;
            let (_, model, _) = build_variant(&config, ModelVariant::Truth)?;
            let sensors = sensor_map(&config, &model)?;
            let measured = sense(
                &model,
                &sensors,
                &response,
                &motion,
                config.noise_rho,
                config.seed.wrapping_add(1),
                &out,
            )?;
            println!("wrote {} ({} channels)", out.display(), measured.channel_count());
        }
        Command::OptimizeGain { config, measurements, out } => {
            let config = load_config(&config, cli.seed)?;
            let (_, model, _) = build_variant(&config, ModelVariant::Observer)?;
            let sensors = sensor_map(&config, &model)?;
            let gains = design_gain(&config, &model, &sensors, &measurements, &out)?;
            println!(
                "wrote {} (objective {:.6e} after {} evaluations)",
                out.display(),
                gains.objective_value,
                gains.evaluations
            );
        }
        Command::Observe { config, gains, measurements, out } => {
            let config = load_config(&config, cli.seed)?;
            let (_, model, _) = build_variant(&config, ModelVariant::Observer)?;
            let sensors = sensor_map(&config, &model)?;
            observe(&config, &model, &sensors, &gains, &measurements, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Assess { config, response, gains, variant, out } => {
            let config = load_config(&config, cli.seed)?;
            let target = match gains {
                Some(gains) => AssessTarget::ObserverRun { gains },
                None => AssessTarget::Variant(variant.into()),
            };
            let (report, files) = assess_run(&config, &target, &response, &out)?;
            println!(
                "wrote {} files to {} (governing class {})",
                files.len(),
                out.display(),
                report.governing_class()
            );
        }
        Command::Twin { config, out } => {
            let config = load_config(&config, cli.seed)?;
            let (_, artifacts) = run_twin(&config, &out)?;
            let worst = artifacts.scoring.disp_rms_error.iter().copied().fold(0.0, f64::max);
            println!(
                "twin complete: truth {} / observer {} (worst displacement RMS error {:.2}%)",
                artifacts.scoring.governing_truth,
                artifacts.scoring.governing_observer,
                100.0 * worst
            );
            if let Some(loc) = &artifacts.scoring.localization {
                println!(
                    "localization: hit rate {:.2}, spearman {:.2}",
                    loc.top_k_hit_rate, loc.spearman
                );
            }
        }
        Command::Compare { a, b, out } => {
            let base = DamageReport::load(&a)?;
            let other = DamageReport::load(&b)?;
            let delta = compare_runs(&base, &other)?;
            std::fs::write(&out, serde_json::to_string_pretty(&delta)?)?;
            println!("wrote {} (governing {})", out.display(), delta.governing_transition);
        }
    }
    Ok(())
}
