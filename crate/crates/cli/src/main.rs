//! Command-line front end for the stacking toolkit: dataset generation,
//! rendering, planning, evaluation, and reporting.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use stacksolve_core::benchgen::{generate, read_dataset, write_dataset, GenConfig};
use stacksolve_core::grammar::Vocabulary;
use stacksolve_core::harness::{
    aggregate, emit_report, read_results, run_method, write_results, EvalConfig, Method,
};
use stacksolve_core::llm::{Endpoint, ParserTarget, Transcript, Transport};
use stacksolve_core::pddl::{emit_domain, emit_plan, emit_problem, parse_pddl_problem};
use stacksolve_core::planner::{solve, PlannerConfig, SolveResult, Strategy};

#[derive(Parser)]
#[command(name = "stacksolve", about = "Object-stacking planning toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderFormat {
    Nl,
    Pddl,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bfs,
    Astar,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Oracle,
    PsGrammar,
    PsLlm,
    LlmPlanner,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Oracle => Method::Oracle,
            MethodArg::PsGrammar => Method::PsGrammar,
            MethodArg::PsLlm => Method::PsLlm,
            MethodArg::LlmPlanner => Method::LlmPlanner,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Live,
    Replay,
    Record,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Number of families (each yields three items).
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Household objects per problem.
        #[arg(long, default_value_t = 4)]
        objects: usize,
        /// Goal atoms in the heaviest condition.
        #[arg(long, default_value_t = 4)]
        many: usize,
        /// Vocabulary file ([household] / [ood] sections); defaults to the
        /// built-in list.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a dataset to per-item text or PDDL files.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: RenderFormat,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Solve one PDDL problem file. Exit code 0 Solved, 10 Unsolvable,
    /// 11 ResourceExhausted.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "bfs")]
        strategy: StrategyArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one method over a dataset, writing per-item results.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "replay")]
        transport: TransportArg,
        /// Transcript file (required for replay/record transports).
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Have the LLM parser emit the full problem document instead of
        /// only the goal fragment.
        #[arg(long)]
        llm_parses_init: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate results into results.csv and report.md.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_vocab(path: &Option<PathBuf>) -> Result<Vocabulary> {
    match path {
        Some(p) => Vocabulary::load(p).with_context(|| format!("loading vocabulary {p:?}")),
        None => Ok(Vocabulary::default_vocabulary()),
    }
}

fn build_transport(
    method: Method,
    transport: TransportArg,
    transcript: &Option<PathBuf>,
) -> Result<Option<Transport>> {
    if !method.needs_transport() {
        return Ok(None);
    }
    let t = match transport {
        TransportArg::Live => Transport::Live(Endpoint::from_env()?),
        TransportArg::Replay => {
            let path = transcript
                .as_ref()
                .context("--transcript is required for the replay transport")?;
            Transport::Replay(Transcript::load(path)?)
        }
        TransportArg::Record => {
            let path = transcript
                .as_ref()
                .context("--transcript is required for the record transport")?;
            let existing = if path.exists() {
                Transcript::load(path)?
            } else {
                Transcript::default()
            };
            Transport::Record(Endpoint::from_env()?, existing, path.clone())
        }
    };
    Ok(Some(t))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen {
            seed,
            count,
            objects,
            many,
            vocab,
            out,
        } => {
            let config = GenConfig {
                seed,
                count,
                n_objects: objects,
                n_many: many,
                vocabulary: load_vocab(&vocab)?,
            };
            let items = generate(&config)?;
            write_dataset(&items, &out)?;
            eprintln!("wrote {} items to {}", items.len(), out.display());
        }
        Command::Render {
            input,
            format,
            outdir,
        } => {
            let items = read_dataset(&input)?;
            std::fs::create_dir_all(&outdir)?;
            match format {
                RenderFormat::Nl => {
                    for item in &items {
                        let path = outdir.join(format!("{}.txt", item.id));
                        std::fs::write(path, format!("{}\n", item.nl_text))?;
                    }
                }
                RenderFormat::Pddl => {
                    std::fs::write(outdir.join("domain.pddl"), emit_domain())?;
                    for item in &items {
                        let path = outdir.join(format!("{}.pddl", item.id));
                        std::fs::write(path, emit_problem(&item.problem))?;
                    }
                }
            }
            eprintln!("rendered {} items into {}", items.len(), outdir.display());
        }
        Command::Solve {
            problem,
            strategy,
            out,
        } => {
            let text = std::fs::read_to_string(&problem)
                .with_context(|| format!("reading {}", problem.display()))?;
            let parsed = parse_pddl_problem(&text, &Vocabulary::default_vocabulary())?;
            let config = PlannerConfig {
                strategy: match strategy {
                    StrategyArg::Bfs => Strategy::Bfs,
                    StrategyArg::Astar => Strategy::AStarGoalCount,
                },
                ..PlannerConfig::default()
            };
            match solve(&parsed, &config) {
                SolveResult::Solved { plan, expansions } => {
                    std::fs::write(&out, emit_plan(&plan))?;
                    eprintln!(
                        "solved in {} steps ({} expansions)",
                        plan.actions.len(),
                        expansions
                    );
                }
                SolveResult::Unsolvable => {
                    eprintln!("unsolvable");
                    return Ok(10);
                }
                SolveResult::ResourceExhausted { expansions } => {
                    eprintln!("resource exhausted after {expansions} expansions");
                    return Ok(11);
                }
            }
        }
        Command::Eval {
            input,
            method,
            transport,
            transcript,
            llm_parses_init,
            out,
        } => {
            let items = read_dataset(&input)?;
            let method: Method = method.into();
            let cfg = EvalConfig {
                parser_target: if llm_parses_init {
                    ParserTarget::FullProblem
                } else {
                    ParserTarget::GoalFragment
                },
                ..EvalConfig::default()
            };
            let vocab = Vocabulary::default_vocabulary();
            let mut t = build_transport(method, transport, &transcript)?;
            let outcomes = run_method(method, &items, &cfg, &vocab, t.as_mut())?;
            write_results(&outcomes, &out)?;
            let table = aggregate(&outcomes);
            for ((m, condition), row) in &table.rows {
                eprintln!("{m} {condition}: {}/{}", row.successes, row.n);
            }
        }
        Command::Report { input, out } => {
            let outcomes = read_results(&input).map_err(anyhow::Error::msg)?;
            if outcomes.is_empty() {
                bail!("no results in {}", input.display());
            }
            emit_report(&aggregate(&outcomes), &out)?;
            eprintln!("wrote {}", out.join("report.md").display());
        }
    }
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
