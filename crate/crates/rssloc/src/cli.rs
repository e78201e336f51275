//! `rssloc` command-line interface. Every subcommand is a thin wrapper over
//! a library call; [`run`] is the testable entry point.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rssloc_core::inference::CurveSweep;
use rssloc_core::scenarios::{self, ScenarioId, SignalParams};
use rssloc_core::{
    estimate_sigma_from_b, fisher_information, localizability, rcrlb_curve, two_step, Estimate,
    LocalizabilityReport, Scenario, Stage,
};

use crate::bench::{self, EstimatorKind, ScenarioSource, TimingConfig};
use crate::error::CliError;
use crate::io::{self, EstimateConfig, ExperimentFile, MeasurementFile};
use crate::report::{self, Format};

#[derive(Debug, Parser)]
#[command(name = "rssloc", version, about = "RSS source localization toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Registry id: 2d-fixed, 2d-random or 3d-fixed.
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Scenario JSON file (inline scenario object or registry id string).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Sensor count for the random family.
    #[arg(long, default_value_t = 100)]
    pub n_random: usize,
    /// Seed for the random family's sensor draw.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub rounds: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize a source from a measurement file.
    Estimate {
        #[arg(long, value_name = "PATH")]
        measurements: PathBuf,
        /// Defaults for alpha, p0 and sigma_db.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank tests on a scenario's sensor layout.
    CheckGeometry {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// RCRLB at the true source, optionally over a sweep.
    Crlb {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', conflicts_with = "sweep_sigma")]
        sweep_rounds: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        sweep_sigma: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo bias/RMSE sweep.
    Experiment {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated: ls, ls-gn, ls-unknown, ls-unknown-gn, ml.
        #[arg(long, value_delimiter = ',')]
        estimators: Option<Vec<String>>,
        #[arg(long)]
        fixed_geometry: bool,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Wall time of the two-step estimator against sensor count.
    TimeScaling {
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        #[arg(long, default_value_t = 200)]
        runs: u32,
        #[arg(long, default_value_t = 10)]
        batches: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        /// Time the unknown-variance branch.
        #[arg(long)]
        unknown_variance: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// `estimate` output: the estimate plus which branch ran.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateOutput {
    pub p_hat: Vec<f64>,
    pub variance: &'static str,
    pub sigma_hat_db: Option<f64>,
    pub estimate: Estimate,
}

#[derive(Serialize)]
struct EstimateCsv {
    x: f64,
    y: f64,
    z: Option<f64>,
    variance: &'static str,
    b_hat: Option<f64>,
    sigma_hat_db: Option<f64>,
    residual_norm: f64,
    degraded_refinement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrlbRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub rcrlb_m: f64,
}

pub fn cmd_estimate(
    file: MeasurementFile,
    defaults: &EstimateConfig,
) -> Result<EstimateOutput, CliError> {
    let input = file.resolve(defaults)?;
    let estimate = two_step(&input.measurements, input.noise.as_ref())?;
    let known = input.noise.is_some();
    let sigma_hat_db = match (known, estimate.b_hat) {
        (false, Some(b)) => Some(estimate_sigma_from_b(b, input.alpha)),
        _ => None,
    };
    debug_assert_eq!(estimate.stage, Stage::TwoStep);
    Ok(EstimateOutput {
        p_hat: estimate.p_hat.as_slice().to_vec(),
        variance: if known { "known" } else { "unknown" },
        sigma_hat_db,
        estimate,
    })
}

pub fn resolve_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let source = match (&args.scenario, &args.config) {
        (Some(id), _) => ScenarioSource::Registry(id.parse::<ScenarioId>()?),
        (None, Some(path)) => io::parse_scenario(io::parse_json(&io::read_text(path)?)?)?,
        (None, None) => return Err(CliError::InvalidInput("give --scenario or --config".into())),
    };
    let scenario = match source {
        ScenarioSource::Inline(s) => s,
        ScenarioSource::Registry(id) => {
            let random = match (id.is_random(), args.seed) {
                (false, _) => None,
                (true, Some(seed)) => Some((args.n_random, seed)),
                (true, None) => {
                    return Err(CliError::InvalidInput(
                        "the random scenario needs --seed".into(),
                    ))
                }
            };
            scenarios::build(id, &SignalParams::default(), random)?
        }
    };
    let scenario = match args.sigma {
        Some(s) => scenario.with_sigma(s)?,
        None => scenario,
    };
    Ok(match args.rounds {
        Some(t) => scenario.with_rounds(t)?,
        None => scenario,
    })
}

pub fn cmd_check_geometry(scenario: &Scenario) -> Result<LocalizabilityReport, CliError> {
    Ok(localizability(scenario.sensors(), true)?)
}

pub fn cmd_crlb(scenario: &Scenario, sweep: Option<CurveSweep>) -> Result<Vec<CrlbRow>, CliError> {
    let (name, points) = match sweep {
        Some(s @ CurveSweep::Rounds(_)) => ("rounds", rcrlb_curve(scenario, &s)?),
        Some(s @ CurveSweep::Sigma(_)) => ("sigma", rcrlb_curve(scenario, &s)?),
        None => {
            let f = fisher_information(scenario, &scenario.source())?;
            ("rounds", vec![(scenario.rounds() as f64, f.rcrlb)])
        }
    };
    Ok(points
        .into_iter()
        .map(|(v, r)| CrlbRow {
            sweep_param: name.to_string(),
            sweep_value: v,
            rcrlb_m: r,
        })
        .collect())
}

fn write_serialized<T: Serialize>(
    rows: &[T],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => report::write_csv_rows(out, rows)?,
        Format::Json => write_json(&rows, out)?,
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn emit(
    output: &OutputArgs,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| CliError::Write(format!("{}: {e}", path.display())))?;
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Executes a parsed invocation, writing results to `stdout` (or `--out`).
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate {
            measurements,
            config,
            output,
        } => {
            let defaults = match config {
                Some(p) => io::parse_json(&io::read_text(&p)?)?,
                None => EstimateConfig::default(),
            };
            let file: MeasurementFile = io::parse_json(&io::read_text(&measurements)?)?;
            let result = cmd_estimate(file, &defaults)?;
            emit(&output, stdout, |w| match output.format {
                Format::Json => write_json(&result, w),
                Format::Csv => {
                    let p = &result.estimate.p_hat;
                    let row = EstimateCsv {
                        x: p[0],
                        y: p[1],
                        z: (p.dim() == 3).then(|| p[2]),
                        variance: result.variance,
                        b_hat: result.estimate.b_hat,
                        sigma_hat_db: result.sigma_hat_db,
                        residual_norm: result.estimate.residual_norm,
                        degraded_refinement: result.estimate.degraded_refinement,
                    };
                    write_serialized(&[row], Format::Csv, w)
                }
            })
        }
        Command::CheckGeometry { scenario, output } => {
            let report = cmd_check_geometry(&resolve_scenario(&scenario)?)?;
            emit(&output, stdout, |w| match output.format {
                Format::Json => write_json(&report, w),
                Format::Csv => write_serialized(&[report], Format::Csv, w),
            })
        }
        Command::Crlb {
            scenario,
            sweep_rounds,
            sweep_sigma,
            output,
        } => {
            let sc = resolve_scenario(&scenario)?;
            let sweep = match (sweep_rounds, sweep_sigma) {
                (Some(t), _) => Some(CurveSweep::Rounds(t)),
                (None, Some(s)) => Some(CurveSweep::Sigma(s)),
                (None, None) => None,
            };
            let rows = cmd_crlb(&sc, sweep)?;
            emit(&output, stdout, |w| {
                write_serialized(&rows, output.format, w)
            })
        }
        Command::Experiment {
            config,
            seed,
            estimators,
            fixed_geometry,
            threads,
            output,
        } => {
            let file: ExperimentFile = io::parse_json(&io::read_text(&config)?)?;
            let mut cfg = file.into_config(seed)?;
            if let Some(list) = estimators {
                cfg.estimators = list
                    .iter()
                    .map(|s| s.trim().parse::<EstimatorKind>())
                    .collect::<Result<_, _>>()?;
            }
            cfg.fixed_geometry |= fixed_geometry;
            if threads.is_some() {
                cfg.threads = threads;
            }
            let report = bench::run_experiment(&cfg)?;
            emit(&output, stdout, |w| {
                Ok(report::write_report(&report, output.format, w)?)
            })
        }
        Command::TimeScaling {
            ns,
            runs,
            batches,
            seed,
            sigma,
            unknown_variance,
            output,
        } => {
            let defaults = TimingConfig::default();
            let cfg = TimingConfig {
                ns: ns.unwrap_or(defaults.ns),
                runs,
                batches,
                seed,
                sigma_db: sigma,
                known_variance: !unknown_variance,
            };
            let points = bench::time_scaling(&cfg)?;
            emit(&output, stdout, |w| {
                Ok(report::write_timing(&points, output.format, w)?)
            })
        }
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Failures print a JSON error object on `stderr`.
pub fn main_with_args(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{}", e.render());
            } else {
                let _ = writeln!(
                    stderr,
                    "{}",
                    CliError::InvalidInput(e.render().to_string()).to_json()
                );
            }
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}
