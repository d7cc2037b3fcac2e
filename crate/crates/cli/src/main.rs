//! `satscape`: generate, solve and inspect random 3-SAT landscapes.
//!
//! Machine-readable results go to stdout (JSON, or DIMACS for `gen` and
//! `solve`); human-readable summaries and the seed in use go to stderr.
//! Exit status: 0 on success, 1 when the search or solver comes back empty
//! handed, 2 on usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use satscape::dimacs::{emit_dimacs, parse_dimacs};
use satscape::experiment::{run_and_write, ExperimentResult, ExperimentSpec};
use satscape::generate::{GeneratorParams, GeneratorSpec, SubGenerator};
use satscape::plateau::DEFAULT_EXPANSION_CAP;
use satscape::search::trajectory_jsonl;
use satscape::solver::solve;
use satscape::{
    enumerate_plateau, escape_barrier, find_state_at_level, gsat, Assignment, Error, EscapeOptions, Formula,
    GsatConfig, PlateauOptions, SolveStatus,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "satscape", version, about = "Random 3-SAT generation, GSAT and plateau analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance in DIMACS format.
    Gen {
        #[command(subcommand)]
        generator: GenCommand,
    },
    /// Decide satisfiability with the complete solver.
    Solve {
        file: PathBuf,
        /// Give up after this many decisions.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run GSAT.
    Gsat {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Write a JSON-lines record of every flip to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Find a state at a given level with GSAT.
    SampleState {
        file: PathBuf,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Enumerate the plateau containing a state.
    Plateau {
        file: PathBuf,
        #[command(flatten)]
        plateau: PlateauArgs,
        /// Also print the member states.
        #[arg(long)]
        members: bool,
    },
    /// Compute the escape barrier of a state's plateau.
    Escape {
        file: PathBuf,
        #[command(flatten)]
        plateau: PlateauArgs,
        #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
        expansion_cap: usize,
        /// Also report the level-ordered search's answer.
        #[arg(long)]
        level_ordered: bool,
    },
    /// Run experiments described by JSON configs.
    Experiment {
        #[command(subcommand)]
        action: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    Uniform(SizeArgs),
    HardSolvable(SizeArgs),
    Cluster {
        #[command(flatten)]
        size: SizeArgs,
        /// Number of clusters; --vars and --clauses are per cluster.
        #[arg(long)]
        clusters: usize,
        /// Clauses linking three distinct clusters.
        #[arg(long)]
        linking: usize,
        #[arg(long, value_enum, default_value_t = SubKind::Uniform)]
        sub: SubKind,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    Run {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config's.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SubKind {
    Uniform,
    HardSolvable,
}

#[derive(Args)]
struct SizeArgs {
    #[arg(long)]
    vars: usize,
    #[arg(long)]
    clauses: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Defaults to 10 times the number of variables.
    #[arg(long)]
    max_flips: Option<u64>,
    #[arg(long, default_value_t = 100)]
    max_tries: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlateauArgs {
    /// Assignment as a 0/1 string, variable 1 first.
    #[arg(long)]
    state: String,
    #[arg(long, env = "SATSCAPE_STATE_CAP", default_value_t = satscape::plateau::DEFAULT_STATE_CAP)]
    cap: usize,
    /// Treat the instance as satisfiable when classifying minima.
    #[arg(long)]
    satisfiable: bool,
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Gen { generator } => gen(generator),
        Command::Solve { file, budget } => {
            let f = read_formula(&file)?;
            let r = solve(&f, budget);
            eprintln!(
                "{} decisions, {} propagations, {} conflicts",
                r.stats.decisions, r.stats.propagations, r.stats.conflicts
            );
            match r.status {
                SolveStatus::Sat => {
                    let model = r.model.expect("sat has a model");
                    let lits: Vec<String> = (0..model.len())
                        .map(|i| {
                            let v = i as i64 + 1;
                            if model.get(satscape::Var::from_index(i)) { v } else { -v }.to_string()
                        })
                        .collect();
                    println!("s SATISFIABLE\nv {} 0", lits.join(" "));
                    Ok(())
                }
                SolveStatus::Unsat => {
                    println!("s UNSATISFIABLE");
                    Ok(())
                }
                SolveStatus::Unknown => {
                    println!("s UNKNOWN");
                    Err(Failure::Domain("decision budget exhausted".into()))
                }
            }
        }
        Command::Gsat { file, search, trace } => {
            let f = read_formula(&file)?;
            let mut cfg = search_config(&search, &f);
            if trace.is_some() {
                cfg = cfg.traced();
            }
            let out = gsat(&f, &cfg)?;
            if let Some(path) = trace {
                fs::write(path, trajectory_jsonl(&out))?;
            }
            print_json(&json!({
                "found": out.found,
                "tries": out.tries.len(),
                "total_flips": out.total_flips(),
                "config": cfg,
            }));
            match &out.found {
                Some(s) => {
                    eprintln!("solved after {} tries, {} flips: {s}", out.tries.len(), out.total_flips());
                    Ok(())
                }
                None => Err(Failure::Domain(format!("FAIL after {} tries", out.tries.len()))),
            }
        }
        Command::SampleState { file, level, search } => {
            let f = read_formula(&file)?;
            let cfg = search_config(&search, &f);
            let out = find_state_at_level(&f, level, &cfg)?;
            print_json(&json!({ "level": level, "state": out.found, "tries": out.tries.len() }));
            match out.found {
                Some(s) => {
                    eprintln!("level {level}: {s}");
                    Ok(())
                }
                None => Err(Failure::Domain(format!("no state at level {level} found"))),
            }
        }
        Command::Plateau { file, plateau, members } => {
            let f = read_formula(&file)?;
            let (state, options) = plateau_inputs(&plateau, &f)?;
            let p = enumerate_plateau(&f, &state, &options)?;
            eprintln!(
                "level {} {:?}: {} states{}, {} exits",
                p.report.level,
                p.report.classification,
                p.report.size,
                if p.report.truncated { " (truncated)" } else { "" },
                p.report.exit_count
            );
            if members {
                print_json(&json!({ "report": p.report, "members": p.members }));
            } else {
                print_json(&p.report);
            }
            Ok(())
        }
        Command::Escape {
            file,
            plateau,
            expansion_cap,
            level_ordered,
        } => {
            let f = read_formula(&file)?;
            let (state, options) = plateau_inputs(&plateau, &f)?;
            let p = enumerate_plateau(&f, &state, &options)?;
            let e = escape_barrier(
                &f,
                &p,
                &EscapeOptions {
                    expansion_cap,
                    level_ordered,
                },
            )?;
            eprintln!(
                "plateau level {}, barrier {} (+{}){}",
                e.plateau_level,
                e.barrier_level,
                e.barrier_increase,
                if e.capped { ", capped" } else { "" }
            );
            print_json(&json!({ "plateau": p.report, "escape": e }));
            Ok(())
        }
        Command::Experiment {
            action: ExperimentCommand::Run { config, workers, out },
        } => {
            let mut spec = ExperimentSpec::load(&config)?;
            if workers.is_some() {
                spec.workers = workers;
            }
            eprintln!("experiment {} with master seed {}", spec.name, spec.master_seed);
            let (result, files) = run_and_write(&spec, out.as_deref())?;
            let count = match &result {
                ExperimentResult::Survey(r) => r.len(),
                ExperimentResult::Escape(r) => r.len(),
                ExperimentResult::SolutionClusters(r) => r.len(),
            };
            eprintln!("{count} result rows");
            print_json(&json!({ "name": spec.name, "master_seed": spec.master_seed, "files": files.files }));
            Ok(())
        }
    }
}

fn gen(generator: GenCommand) -> CliResult {
    let (params, size) = match generator {
        GenCommand::Uniform(s) => (
            GeneratorParams::Uniform {
                num_clauses: s.clauses,
                num_variables: s.vars,
            },
            s,
        ),
        GenCommand::HardSolvable(s) => (
            GeneratorParams::HardSolvable {
                num_clauses: s.clauses,
                num_variables: s.vars,
            },
            s,
        ),
        GenCommand::Cluster {
            size,
            clusters,
            linking,
            sub,
        } => (
            GeneratorParams::Cluster {
                num_clauses: size.clauses,
                num_variables: size.vars,
                num_clusters: clusters,
                num_linking: linking,
                sub_generator: match sub {
                    SubKind::Uniform => SubGenerator::Uniform,
                    SubKind::HardSolvable => SubGenerator::HardSolvable,
                },
            },
            size,
        ),
    };
    let seed = seed_or_default(size.seed);
    let f = GeneratorSpec::new(params, seed).generate()?;
    let text = emit_dimacs(&f);
    match size.output {
        Some(path) => {
            fs::write(&path, text)?;
            eprintln!("wrote {} ({} vars, {} clauses)", path.display(), f.num_vars(), f.num_clauses());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn seed_or_default(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    });
    eprintln!("seed: {seed}");
    seed
}

fn search_config(args: &SearchArgs, f: &Formula) -> GsatConfig {
    let mut cfg = GsatConfig::sampling_defaults(f.num_vars(), seed_or_default(args.seed));
    if let Some(m) = args.max_flips {
        cfg.max_flips = m;
    }
    cfg.max_tries = args.max_tries;
    cfg
}

fn plateau_inputs(args: &PlateauArgs, f: &Formula) -> Result<(Assignment, PlateauOptions), Failure> {
    let state: Assignment = args
        .state
        .parse()
        .map_err(|e| Failure::Usage(format!("--state: {e}")))?;
    if state.len() != f.num_vars() {
        return Err(Failure::Usage(format!(
            "--state has {} bits but the instance has {} variables",
            state.len(),
            f.num_vars()
        )));
    }
    let mut options = PlateauOptions::with_cap(args.cap);
    if args.satisfiable {
        options = options.satisfiable();
    }
    Ok((state, options))
}

fn read_formula(path: &Path) -> Result<Formula, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    parse_dimacs(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}
