use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rrslrp::instance::{parse_instance, validate_instance, Instance, PenaltySpec};
use rrslrp::lagrangian::{run, SolverConfig, StepRule};
use rrslrp::lp::export_lp;
use rrslrp::oracle::{brute_force_optimum, OracleLimits};
use rrslrp::report;
use rrslrp::rst::transform_stations;

const EXIT_INSTANCE: u8 = 1;
const EXIT_NO_INCUMBENT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "rrslrp",
    version,
    about = "Charging station location and vehicle routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and list every violation.
    Validate(Common),
    /// Run the Lagrangian solver and write bounds, routes and selection.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long = "max-iters", default_value_t = 50)]
        max_iters: u32,
        #[arg(long = "term-delta", default_value_t = 1e-6)]
        term_delta: f64,
        #[arg(long, value_enum, default_value_t = Step::Harmonic)]
        step: Step,
        #[arg(long)]
        seed: Option<u64>,
        /// Rounds of single and pairwise re-routing per upper bound.
        #[arg(long = "improve-rounds", default_value_t = 2)]
        improve_rounds: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write 0 in the iter_wall_ms column.
        #[arg(long = "no-wall-clock")]
        no_wall_clock: bool,
    },
    /// Write the full binary program in LP format.
    ExportLp {
        #[command(flatten)]
        common: Common,
        /// Directory for model.lp; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "max-columns", default_value_t = 2_000_000)]
        max_columns: usize,
    },
    /// Exact optimum by enumeration (small instances only).
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    instance: PathBuf,
    /// Penalty per unserved demand: a number or `auto`.
    #[arg(long, value_parser = parse_penalty)]
    penalty: Option<PenaltySpec>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Step {
    Harmonic,
    Ratio,
}

fn parse_penalty(s: &str) -> Result<PenaltySpec, String> {
    if s == "auto" {
        return Ok(PenaltySpec::Auto);
    }
    match s.parse::<f64>() {
        Ok(m) if m > 0.0 => Ok(PenaltySpec::Fixed(m)),
        _ => Err(format!("expected a positive number or `auto`, got `{s}`")),
    }
}

enum Failure {
    Usage(String),
    Instance(String),
}

fn load(common: &Common) -> Result<Instance, Failure> {
    let text = fs::read_to_string(&common.instance)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", common.instance.display())))?;
    let mut inst = parse_instance(&text)
        .map_err(|e| Failure::Instance(format!("{}: {e}", common.instance.display())))?;
    if let Some(p) = common.penalty {
        inst.penalty = p;
    }
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Instance(lines.join("\n")));
    }
    Ok(inst)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn execute(cli: Cli) -> Result<u8> {
    let inst = |common: &Common| load(common);
    let failed = |f: Failure| -> u8 {
        match f {
            Failure::Usage(m) => {
                eprintln!("error: {m}");
                EXIT_USAGE
            }
            Failure::Instance(m) => {
                eprintln!("{m}");
                EXIT_INSTANCE
            }
        }
    };
    match cli.command {
        Command::Validate(common) => match inst(&common) {
            Ok(i) => {
                println!(
                    "ok: {} nodes, {} links, {} stations, {} vehicles, {} demands",
                    i.nodes.len(),
                    i.links.len(),
                    i.stations.len(),
                    i.vehicles.len(),
                    i.demands.len()
                );
                Ok(0)
            }
            Err(f) => Ok(failed(f)),
        },
        Command::Solve {
            common,
            max_iters,
            term_delta,
            step,
            seed,
            improve_rounds,
            out,
            no_wall_clock,
        } => {
            let instance = match inst(&common) {
                Ok(i) => i,
                Err(f) => return Ok(failed(f)),
            };
            let config = SolverConfig {
                max_iterations: max_iters.max(1),
                term_delta,
                step: match step {
                    Step::Harmonic => StepRule::Harmonic,
                    Step::Ratio => StepRule::Ratio,
                },
                penalty: match common.penalty {
                    Some(PenaltySpec::Fixed(m)) => Some(m),
                    _ => None,
                },
                ordering_seed: seed,
                improve_rounds,
                ..SolverConfig::default()
            };
            let result = run(&instance, &config)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write(
                &out,
                "bounds.csv",
                &report::bounds_csv(&instance, &result.trace, !no_wall_clock),
            )?;
            let mut meta =
                report::metadata(&common.instance.display().to_string(), &config, &result);
            meta.push_str(&format!("wall_clock={}\n", !no_wall_clock));
            write(&out, "metadata.txt", &meta)?;
            println!(
                "iterations={} best_lb={} best_ub={} gap={}",
                result.trace.len(),
                result.best_lower,
                result.best_upper,
                result.gap()
            );
            let Some(inc) = &result.incumbent else {
                eprintln!("no feasible incumbent found");
                return Ok(EXIT_NO_INCUMBENT);
            };
            let net = transform_stations(&instance);
            write(
                &out,
                "routes.csv",
                &report::routes_report(&net, &inc.routes)?,
            )?;
            write(
                &out,
                "selection.csv",
                &report::selection_report(&instance, &inc.selection, &inc.routes),
            )?;
            Ok(0)
        }
        Command::ExportLp {
            common,
            out,
            max_columns,
        } => {
            let instance = match inst(&common) {
                Ok(i) => i,
                Err(f) => return Ok(failed(f)),
            };
            let text = match export_lp(&instance, max_columns) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_INSTANCE);
                }
            };
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    write(&dir, "model.lp", &text)?;
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Oracle(common) => {
            let instance = match inst(&common) {
                Ok(i) => i,
                Err(f) => return Ok(failed(f)),
            };
            match brute_force_optimum(&instance, &OracleLimits::default()) {
                Ok(sol) => {
                    let names: Vec<&str> = sol
                        .selection
                        .iter()
                        .map(|&k| instance.node_name(instance.stations[k].node))
                        .collect();
                    println!("objective={}", sol.objective);
                    println!("stations={}", names.join(";"));
                    println!(
                        "served={}",
                        sol.served
                            .iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join(";")
                    );
                    Ok(if sol.objective.is_finite() {
                        0
                    } else {
                        EXIT_NO_INCUMBENT
                    })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(EXIT_INSTANCE)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INSTANCE)
        }
    }
}
