//! Command-line front end: `run`, `study`, `check` and `indicators`.
//!
//! Exit codes: 0 when every requested assertion passes, 1 on an assertion
//! failure, 2 on a configuration error. Failures also emit a JSON error
//! record on stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::checks::all_checks;
use crate::harness::{
    indicator_table, run_study, solve_levels, trajectory_csv, HarnessError, IndicatorConfig, StudyConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "gdm", version, about = "Gradient schemes for degenerate parabolic equations")]
pub struct Cli {
    /// Overrides the seed of the configuration or of the property suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving output files.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single solve at one level of a study configuration, exporting the trajectory.
    Run {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Refinement study with monitors, written as CSV and JSON.
    Study { config: PathBuf },
    /// All property suites.
    Check {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Indicator table across refinement levels.
    Indicators { config: PathBuf },
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

enum Failure {
    Config(String),
    Assertion(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

/// Parses `args` (including the program name) and executes the command,
/// writing human output to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return emit(err, Failure::Config(e.to_string()));
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(f) => emit(err, f),
    }
}

fn emit(err: &mut dyn Write, f: Failure) -> i32 {
    let (kind, message, code) = match f {
        Failure::Config(m) => ("config", m, 2),
        Failure::Assertion(m) => ("assertion", m, 1),
        Failure::Runtime(m) => ("runtime", m, 1),
    };
    let rec = ErrorRecord {
        error: kind,
        message,
        exit_code: code,
    };
    let _ = writeln!(err, "{}", serde_json::to_string(&rec).unwrap_or_default());
    code
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Runtime(e.to_string()))
}

fn load_study(path: &Path, seed: Option<u64>) -> Result<StudyConfig, Failure> {
    let mut cfg = StudyConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    match &cli.command {
        Command::Run { config, level } => {
            let cfg = load_study(config, cli.seed)?;
            let problem = cfg.validate_single()?;
            let levels = solve_levels(&cfg, &problem, level + 1)?;
            let lv = levels.last().expect("at least one level");
            let path = match cli.format {
                Format::Csv => {
                    let p = cli.out_dir.join(format!("{}_trajectory.csv", cfg.experiment));
                    write_file(&p, &trajectory_csv(&lv.gd, &lv.traj)?)?;
                    p
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Export<'a> {
                        schema_version: u32,
                        experiment: &'a str,
                        level: usize,
                        times: &'a [f64],
                        dof_points: &'a [crate::Vec2],
                        states: Vec<Vec<f64>>,
                        telemetry: &'a [crate::gd::StepTelemetry],
                    }
                    let p = cli.out_dir.join(format!("{}_trajectory.json", cfg.experiment));
                    let exp = Export {
                        schema_version: crate::harness::SCHEMA_VERSION,
                        experiment: &cfg.experiment,
                        level: *level,
                        times: lv.traj.grid.nodes(),
                        dof_points: lv.gd.dof_points(),
                        states: lv.traj.states.iter().map(|u| u.iter().copied().collect()).collect(),
                        telemetry: &lv.traj.telemetry,
                    };
                    write_file(&p, &to_json(&exp)?)?;
                    p
                }
            };
            writeln!(
                out,
                "solved {} at level {} ({} dofs, {} steps) -> {}",
                cfg.experiment,
                level,
                lv.gd.dof_count(),
                lv.traj.grid.steps(),
                path.display()
            )
            .map_err(io)?;
            Ok(())
        }
        Command::Study { config } => {
            let cfg = load_study(config, cli.seed)?;
            let report = run_study(&cfg)?;
            let (csv_path, json_path) = report.write(&cli.out_dir)?;
            match cli.format {
                Format::Csv => write!(out, "{}", report.to_csv()?).map_err(io)?,
                Format::Json => writeln!(out, "{}", report.to_json()?).map_err(io)?,
            }
            writeln!(out, "# wrote {} and {}", csv_path.display(), json_path.display()).map_err(io)?;
            let failed: Vec<String> = report
                .rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} at level {}", r.monitor, r.level))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("failed monitors: {}", failed.join(", "))))
            }
        }
        Command::Check { samples } => {
            if *samples == 0 {
                return Err(Failure::Config("samples must be positive".into()));
            }
            let recs = all_checks(*samples, cli.seed.unwrap_or(0));
            match cli.format {
                Format::Csv => write!(out, "{}", to_csv(&recs)?).map_err(io)?,
                Format::Json => writeln!(out, "{}", to_json(&recs)?).map_err(io)?,
            }
            let failed: Vec<String> = recs
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{}/{}", r.suite, r.case))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Indicators { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let mut cfg = IndicatorConfig::from_toml(&text)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let rows = indicator_table(&cfg)?;
            let text = match cli.format {
                Format::Csv => to_csv(&rows)?,
                Format::Json => to_json(&rows)?,
            };
            write!(out, "{text}").map_err(io)?;
            let ext = if cli.format == Format::Csv { "csv" } else { "json" };
            write_file(&cli.out_dir.join(format!("indicators.{ext}")), &text)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} at level {}", r.indicator, r.level))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("indicators not decaying: {}", failed.join(", "))))
            }
        }
    }
}
