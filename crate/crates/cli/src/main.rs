//! Command-line front door for the dependability modeling pipeline:
//! validate a model, compose its CTMC, evaluate measures analytically,
//! export the chain, or cross-check measures by simulation — at any
//! construction iteration.
//!
//! Exit codes: 0 success, 1 model or analysis errors (diagnostics on
//! standard error, JSON with --json), 2 usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use errml_analyze::{measure, MeasureKind, MeasureSpec, SolverConfig};
use errml_compose::{compose, Ctmc, ExploreLimits};
use errml_model::diag::{Diagnostic, Severity};
use errml_model::instance::instantiate;
use errml_model::{Model, ParamEnv};
use errml_sim::{simulate_measure, SimConfig};

#[derive(Parser)]
#[command(
    name = "errml",
    about = "Compile and analyze architecture-based dependability models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (.errml)
    model: PathBuf,
    /// Construction iteration to resolve (default: highest declared)
    #[arg(long)]
    iteration: Option<u32>,
    /// Parameter bindings overriding the file's parameters block: k=v,k=v
    #[arg(long, default_value = "")]
    params: String,
    /// Machine-readable diagnostics on standard error
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MeasureArgs {
    /// steady_state_availability | point_availability | reliability | safety | mttf
    #[arg(long, value_parser = parse_measure_kind)]
    measure: MeasureKind,
    /// Time point in hours (required for time-indexed measures)
    #[arg(long)]
    time: Option<f64>,
    /// Failure class label
    #[arg(long, default_value = "Failed")]
    failed: String,
    /// Catastrophic class label
    #[arg(long, default_value = "Catastrophic")]
    catastrophic: String,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model; silent on success
    Validate(ModelArgs),
    /// Build the chain; report its size with --stats
    Compose {
        #[command(flatten)]
        model: ModelArgs,
        /// Print tangible state, transition and folded-vanishing counts
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        #[arg(long, default_value_t = 32)]
        max_cascade_depth: u32,
    },
    /// Evaluate a dependability measure on the composed chain (or on an
    /// explicit-state .tra file exported earlier)
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Solver tolerance
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Write the chain to disk
    Export {
        #[command(flatten)]
        model: ModelArgs,
        /// explicit (.tra/.lab pair) or dot
        #[arg(long, value_enum, default_value_t = ExportFormat::Explicit)]
        format: ExportFormat,
        /// Output base path
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a measure by Monte Carlo simulation
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Master seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of replications
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ExportFormat {
    Explicit,
    Dot,
}

fn parse_measure_kind(s: &str) -> Result<MeasureKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn run() -> Result<(), ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => {
            let (model, diagnostics) = load(&args.model, args.json)?;
            let mut all = diagnostics;
            all.extend(errml_model::validate_model(&model));
            // instantiation surfaces routing/guard/derived problems too
            if model.root().is_some() && !errml_model::has_errors(&all) {
                let iteration = args.iteration.unwrap_or_else(|| model.max_iteration());
                match instantiate(&model, iteration) {
                    Ok(instance) => all.extend(instance.diagnostics),
                    Err(e) => all.extend(e.to_diagnostics()),
                }
            }
            report(&all, args.json);
            if errml_model::has_errors(&all) {
                return Err(ExitCode::from(1));
            }
            Ok(())
        }
        Command::Compose {
            model: args,
            stats,
            max_states,
            max_cascade_depth,
        } => {
            let limits = ExploreLimits {
                max_states,
                max_cascade_depth,
            };
            let ctmc = build_chain(&args, &limits)?;
            if stats {
                if args.json {
                    println!(
                        "{}",
                        serde_json::json!({
                            "states": ctmc.fold_stats.tangible_states,
                            "transitions": ctmc.fold_stats.timed_transitions,
                            "rate_transitions": ctmc.transitions.len(),
                            "vanishing_folded": ctmc.fold_stats.vanishing_folded,
                        })
                    );
                } else {
                    println!("tangible states: {}", ctmc.fold_stats.tangible_states);
                    println!("timed transitions: {}", ctmc.fold_stats.timed_transitions);
                    println!("rate transitions: {}", ctmc.transitions.len());
                    println!("vanishing folded: {}", ctmc.fold_stats.vanishing_folded);
                }
            }
            Ok(())
        }
        Command::Analyze {
            model: args,
            measure: margs,
            tol,
        } => {
            let spec = MeasureSpec {
                kind: margs.measure,
                time: margs.time,
                failure_class: margs.failed,
                catastrophic_class: margs.catastrophic,
            };
            if spec.kind.needs_time() && spec.time.is_none() {
                return Err(usage(
                    &args,
                    format!("--time is required for {}", spec.kind.name()),
                ));
            }
            if tol <= 0.0 || !tol.is_finite() {
                return Err(usage(
                    &args,
                    format!("--tol must be a positive number, got {tol}"),
                ));
            }
            let ctmc = if args
                .model
                .extension()
                .is_some_and(|e| e == "tra" || e == "lab")
            {
                errml_compose::export::read_explicit_files(&args.model)
                    .map_err(|e| fail_now(&args, e))?
            } else {
                build_chain(&args, &ExploreLimits::default())?
            };
            let cfg = SolverConfig::default().with_tolerance(tol);
            let result = measure(&ctmc, &spec, &cfg).map_err(|e| fail_now(&args, e.to_string()))?;
            println!("{}", serde_json::to_string(&result).expect("serializable"));
            Ok(())
        }
        Command::Export {
            model: args,
            format,
            out,
        } => {
            let ctmc = build_chain(&args, &ExploreLimits::default())?;
            match format {
                ExportFormat::Explicit => {
                    errml_compose::export::write_explicit(&ctmc, &out)
                        .map_err(|e| fail_now(&args, e.to_string()))?;
                }
                ExportFormat::Dot => {
                    errml_compose::export::write_dot(&ctmc, &out)
                        .map_err(|e| fail_now(&args, e.to_string()))?;
                }
            }
            Ok(())
        }
        Command::Simulate {
            model: args,
            measure: margs,
            seed,
            reps,
        } => {
            let spec = MeasureSpec {
                kind: margs.measure,
                time: margs.time,
                failure_class: margs.failed,
                catastrophic_class: margs.catastrophic,
            };
            if spec.time.is_none() {
                return Err(usage(
                    &args,
                    "--time is required for simulation".to_string(),
                ));
            }
            let (model, instance) = load_instance(&args)?;
            let params = bind_params(&args, &model)?;
            let bound = instance
                .bind(&params)
                .map_err(|e| fail_now(&args, e.to_string()))?;
            let cfg = SimConfig::new(reps, spec.time.unwrap(), seed);
            let estimate = simulate_measure(&bound, &spec, &cfg)
                .map_err(|e| fail_now(&args, e.to_string()))?;
            println!(
                "{}",
                serde_json::to_string(&estimate).expect("serializable")
            );
            Ok(())
        }
    }
}

/// Parse the model file; parse errors end the run.
fn load(path: &Path, json: bool) -> Result<(Model, Vec<Diagnostic>), ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        report_one(
            &Diagnostic::error(
                format!("cannot read {}: {e}", path.display()),
                errml_model::SourceSpan::dummy(),
            ),
            json,
        );
        ExitCode::from(1)
    })?;
    let (model, diagnostics) = errml_syntax::parse_model(&text, &path.to_string_lossy());
    if errml_model::has_errors(&diagnostics) {
        report(&diagnostics, json);
        return Err(ExitCode::from(1));
    }
    Ok((model, diagnostics))
}

fn load_instance(args: &ModelArgs) -> Result<(Model, errml_model::InstanceModel), ExitCode> {
    let (model, mut diagnostics) = load(&args.model, args.json)?;
    let iteration = args.iteration.unwrap_or_else(|| model.max_iteration());
    match instantiate(&model, iteration) {
        Ok(instance) => {
            diagnostics.extend(instance.diagnostics.clone());
            report(&diagnostics, args.json);
            Ok((model, instance))
        }
        Err(e) => {
            diagnostics.extend(e.to_diagnostics());
            report(&diagnostics, args.json);
            Err(ExitCode::from(1))
        }
    }
}

fn bind_params(args: &ModelArgs, model: &Model) -> Result<ParamEnv, ExitCode> {
    ParamEnv::from_model_bindings(&model.parameters)
        .with_overrides(&args.params)
        .map_err(|e| usage(args, e.to_string()))
}

fn build_chain(args: &ModelArgs, limits: &ExploreLimits) -> Result<Ctmc, ExitCode> {
    let (model, instance) = load_instance(args)?;
    let params = bind_params(args, &model)?;
    let bound = instance
        .bind(&params)
        .map_err(|e| fail_now(args, e.to_string()))?;
    compose(&bound, limits).map_err(|e| fail_now(args, e.to_string()))
}

fn usage(args: &ModelArgs, message: String) -> ExitCode {
    report_one(
        &Diagnostic::error(message, errml_model::SourceSpan::dummy()),
        args.json,
    );
    ExitCode::from(2)
}

fn fail_now(args: &ModelArgs, message: String) -> ExitCode {
    report_one(
        &Diagnostic::error(message, errml_model::SourceSpan::dummy()),
        args.json,
    );
    ExitCode::from(1)
}

fn report(diagnostics: &[Diagnostic], json: bool) {
    if diagnostics.is_empty() {
        return;
    }
    if json {
        let entries: Vec<serde_json::Value> = diagnostics.iter().map(diag_json).collect();
        eprintln!("{}", serde_json::Value::Array(entries));
    } else {
        for d in diagnostics {
            eprintln!("{d}");
        }
    }
}

fn report_one(diagnostic: &Diagnostic, json: bool) {
    report(std::slice::from_ref(diagnostic), json);
}

fn diag_json(d: &Diagnostic) -> serde_json::Value {
    serde_json::json!({
        "severity": match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        },
        "message": d.message,
        "file": d.span.file.as_ref(),
        "line": d.span.line,
        "column": d.span.column,
        "length": d.span.length,
    })
}
