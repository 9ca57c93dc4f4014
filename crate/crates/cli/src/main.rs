//! `istc` command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use istc::presets::{self, PRESET_NAMES};
use istc::{
    armax_to_edlm, closed_loop_report, compute_metrics, static_error, ControllerCase,
    EstimatorConfig, ExperimentConfigF64, FinalValue, InputClass, MetricWindows, PgModel,
    Trajectory,
};

const EXIT_INVALID: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "istc",
    version,
    about = "Incremental self-tuning control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration and write its trace as CSV.
    Run {
        #[command(flatten)]
        source: Source,
        /// CSV output path; metrics go next to it with a `.metrics.txt` suffix.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Print the closed-loop polynomial, its roots and static errors.
    Analyze {
        #[command(flatten)]
        source: Source,
    },
    /// Inspect the built-in experiment presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as JSON, ready to be edited and passed to `--config`.
    Show {
        name: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

/// Short names accepted in addition to the full preset names.
fn resolve_preset(name: &str) -> Result<ExperimentConfigF64, Failure> {
    let full = match name {
        "ex1_1" => "ex1_1_case2",
        "ex2_1" => "ex2_1_istc",
        other => other,
    };
    presets::preset(full).map_err(|e| invalid(e.to_string()))
}

fn load(source: &Source) -> Result<ExperimentConfigF64, Failure> {
    match (&source.config, &source.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfigF64::from_json(&text)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => resolve_preset(name),
        _ => Err(invalid("exactly one of --config and --preset is required")),
    }
}

fn metrics_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".metrics.txt");
    out.with_file_name(name)
}

fn cmd_run(
    source: &Source,
    out: &Path,
    seed: Option<u64>,
    horizon: Option<usize>,
) -> Result<(), Failure> {
    let mut cfg = load(source)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(h) = horizon {
        cfg.horizon = h;
    }
    let trace = istc::run_experiment(&cfg).map_err(|e| invalid(e.to_string()))?;

    let file = fs::File::create(out)
        .map_err(|e| invalid(format!("cannot create {}: {e}", out.display())))?;
    trace
        .write_csv(io::BufWriter::new(file))
        .map_err(|e| invalid(format!("writing {}: {e}", out.display())))?;

    let windows = MetricWindows {
        relative: matches!(cfg.trajectory, Trajectory::Power { .. }),
        ..MetricWindows::whole(cfg.horizon)
    };
    let metrics = compute_metrics(&trace, &windows);
    let mut summary = format!(
        "config {}\nconfig_hash {}\nseed {}\nrows {}\nrelative_error {}\n{metrics}",
        cfg.name,
        trace.config_hash,
        trace.seed,
        trace.rows.len(),
        windows.relative
    );
    summary.push_str(&format!("hold_events {}\n", trace.events.len()));
    if let Some(abort) = &trace.abort {
        summary.push_str(&format!("abort step {} {}\n", abort.step, abort.reason));
    }
    let mpath = metrics_path(out);
    fs::write(&mpath, &summary)
        .map_err(|e| invalid(format!("cannot write {}: {e}", mpath.display())))?;
    print!("{summary}");

    match &trace.abort {
        Some(abort) => Err(Failure {
            code: EXIT_ABORT,
            message: format!(
                "simulation aborted at step {}: {}",
                abort.step, abort.reason
            ),
        }),
        None => Ok(()),
    }
}

/// PG the analysis is done on: an explicit frozen vector if given, else the
/// plant's own.
fn analysis_pg(cfg: &ExperimentConfigF64) -> Result<PgModel<f64>, Failure> {
    if let EstimatorConfig::Frozen { theta: Some(theta) } = &cfg.estimator {
        return PgModel::from_estimate(cfg.orders, theta).map_err(|e| invalid(e.to_string()));
    }
    armax_to_edlm(&cfg.plant, cfg.orders)
        .map_err(|e| invalid(format!("plant has no model at these orders: {e}")))
}

fn format_value(v: &Result<FinalValue<f64>, istc::Error>) -> String {
    match v {
        Ok(FinalValue::Finite(x)) => format!("{x:.10}"),
        Ok(FinalValue::Diverges) => "diverges".into(),
        Err(e) => format!("undefined ({e})"),
    }
}

fn cmd_analyze(source: &Source) -> Result<(), Failure> {
    let cfg = load(source)?;
    let pg = analysis_pg(&cfg)?;
    let c = cfg
        .controller
        .synthesize(&pg)
        .map_err(|e| invalid(format!("synthesis failed: {e}")))?;
    let report = closed_loop_report(&pg, &c).map_err(|e| invalid(e.to_string()))?;

    let mut out = String::new();
    out.push_str(&format!("config {}\n", cfg.name));
    out.push_str(&format!(
        "controller {}\n",
        describe_controller(&cfg.controller)
    ));
    out.push_str(&format!("pg {:?}\n", pg.stacked()));
    out.push_str(&format!(
        "H {:?}\nE {:?}\nG {:?}\n",
        c.h.coeffs(),
        c.e.coeffs(),
        c.g.coeffs()
    ));
    out.push_str(&format!("char_poly {:?}\n", report.char_poly.coeffs()));
    out.push_str("roots\n");
    for r in &report.verdict.roots {
        out.push_str(&format!(
            "  {:+.5} {:+.5}i  |z| = {:.5}\n",
            r.re,
            r.im,
            r.norm()
        ));
    }
    out.push_str(&format!(
        "max_modulus {:.6}\nverdict {}\n",
        report.verdict.max_modulus,
        if report.verdict.stable {
            "STABLE"
        } else {
            "UNSTABLE"
        }
    ));
    let ts = match cfg.trajectory {
        Trajectory::Ramp { ts } => ts,
        _ => 1.0,
    };
    let n = match cfg.trajectory {
        Trajectory::Power { n } => n,
        _ => 2,
    };
    out.push_str("static_errors\n");
    for class in [
        InputClass::Step,
        InputClass::Ramp { ts },
        InputClass::Power { n },
    ] {
        out.push_str(&format!(
            "  {} {}\n",
            class.label(),
            format_value(&static_error(&pg, &c, class))
        ));
    }
    io::stdout()
        .write_all(out.as_bytes())
        .map_err(|e| invalid(e.to_string()))
}

fn describe_controller(c: &ControllerCase<f64>) -> String {
    match c {
        ControllerCase::PolePlacement { am, .. } => format!("pole_placement am={:?}", am.coeffs()),
        ControllerCase::MinPhase { target_t1, pid } => {
            format!(
                "min_phase t1={:?} kp={} ki={} kd={}",
                target_t1.coeffs(),
                pid.kp,
                pid.ki,
                pid.kd
            )
        }
        ControllerCase::Mfac { lambda, m } => format!("mfac lambda={lambda} m={m}"),
    }
}

fn cmd_preset(action: &PresetAction) -> Result<(), Failure> {
    match action {
        PresetAction::List => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        PresetAction::Show { name } => {
            println!("{}", resolve_preset(name)?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run {
            source,
            out,
            seed,
            horizon,
        } => cmd_run(source, out, *seed, *horizon),
        Command::Analyze { source } => cmd_analyze(source),
        Command::Preset { action } => cmd_preset(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
