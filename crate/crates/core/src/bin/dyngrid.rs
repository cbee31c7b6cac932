use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use dyngrid::eval::{compare, evaluate, format_stats};
use dyngrid::level::{sample_instance, LevelRegistry, Mode};
use dyngrid::oracle::{self, PolicyKind};
use dyngrid::service::{self, Transport};
use dyngrid::text::TextMode;
use dyngrid::{episode, render, Action, Episode, Error};

#[derive(Parser)]
#[command(name = "dyngrid", version, about = "Grid worlds with text-described tile dynamics")]
struct Cli {
    /// Level registry JSON file; the built-in levels are used if omitted.
    #[arg(long, global = true, env = "DYNGRID_REGISTRY")]
    registry: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered levels.
    Levels {
        #[arg(long)]
        json: bool,
    },
    /// Run one episode and print its trace as a JSON line.
    Rollout {
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "train")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "optimal")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 0)]
        policy_seed: u64,
        /// Print the trajectory overlay to stderr.
        #[arg(long)]
        render: bool,
    },
    /// Evaluate one or more scripted policies over seeds base..base+n.
    Eval {
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "test")]
        mode: Mode,
        #[arg(long, short, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long = "policy", default_values = ["optimal"])]
        policies: Vec<PolicyKind>,
        #[arg(long, default_value_t = 0)]
        policy_seed: u64,
        #[arg(long)]
        json: bool,
        /// Write every episode trace to this file as JSON lines.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Step an episode by hand. Reads action ids or names from stdin.
    Play {
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "train")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "descriptive")]
        text: TextMode,
    },
    /// Show a sampled instance, optionally with the optimal route.
    Render {
        #[arg(long)]
        level: String,
        #[arg(long, default_value = "train")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        optimal: bool,
    },
    /// Replay a trace file and check every episode reproduces exactly.
    Replay { file: PathBuf },
    /// Serve episodes over newline-delimited JSON.
    Serve {
        /// stdio, tcp or tcp:HOST:PORT
        #[arg(long, default_value = "stdio")]
        transport: Transport,
    },
}

fn load_registry(path: Option<&PathBuf>) -> Result<LevelRegistry, Error> {
    match path {
        Some(p) => LevelRegistry::load(p),
        None => Ok(LevelRegistry::default()),
    }
}

fn parse_action(word: &str) -> Option<Action> {
    if let Ok(id) = word.parse::<i64>() {
        return Action::try_from(id).ok();
    }
    Action::ALL.into_iter().find(|a| a.name() == word)
}

fn play(registry: &LevelRegistry, level: &str, mode: Mode, seed: u64, text: TextMode) -> Result<(), Error> {
    let (obs, mut ep) = Episode::reset_with_text(registry.get(level)?, mode, seed, text)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", obs.instruction)?;
    for d in &obs.descriptions {
        writeln!(out, "  {d}")?;
    }
    write!(out, "{}", render::render_state(ep.grid(), &ep.instance().dynamics))?;
    for line in io::stdin().lock().lines() {
        let line = line?;
        let word = line.trim();
        if word.is_empty() {
            continue;
        }
        let Some(action) = parse_action(word) else {
            writeln!(out, "unknown action '{word}'")?;
            continue;
        };
        let r = ep.step(action)?;
        write!(out, "{}", render::render_state(ep.grid(), &ep.instance().dynamics))?;
        writeln!(out, "reward {:.4}  time {}  steps {}  {}", r.reward, r.info.time, r.info.steps, r.info.outcome)?;
        if r.done {
            break;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let registry = load_registry(cli.registry.as_ref())?;
    match cli.command {
        Command::Levels { json } => {
            if json {
                println!("{}", registry.to_json());
            } else {
                for l in &registry.levels {
                    let colors: Vec<_> = l.colors.iter().map(|c| c.name()).collect();
                    println!(
                        "{:<16} {}x{}  tiles {}  colors {}  max_steps {}",
                        l.name,
                        l.grid_size,
                        l.grid_size,
                        l.n_tile_types,
                        colors.join(","),
                        l.max_steps
                    );
                }
            }
        }
        Command::Rollout {
            level,
            mode,
            seed,
            policy,
            policy_seed,
            render,
        } => {
            let spec = registry.get(&level)?;
            let (_, mut ep) = Episode::reset(spec, mode, seed)?;
            let mut p = policy.build(policy_seed, seed);
            oracle::run_policy(&mut ep, p.as_mut());
            let trace = ep.record_trace();
            if render {
                eprint!("{}", render::render_trace(ep.instance(), &trace.actions));
            }
            println!("{}", trace.to_json_line());
        }
        Command::Eval {
            level,
            mode,
            n,
            base_seed,
            policies,
            policy_seed,
            json,
            traces,
        } => {
            let spec = registry.get(&level)?;
            let mut all_stats = Vec::new();
            let mut all_traces = String::new();
            for p in &policies {
                let (stats, tr) = evaluate(*p, policy_seed, spec, mode, n, base_seed)?;
                for t in &tr {
                    all_traces.push_str(&t.to_json_line());
                    all_traces.push('\n');
                }
                all_stats.push(stats);
            }
            if let Some(path) = traces {
                std::fs::write(path, all_traces)?;
            }
            let labels: Vec<String> = policies.iter().map(|p| p.name().to_string()).collect();
            if policies.len() > 1 {
                let table = compare(&all_stats, &labels)?;
                print!("{}", if json { table.to_json_lines() } else { table.to_text() });
            } else if json {
                println!("{}", serde_json::to_string(&all_stats[0])?);
            } else {
                println!("{}", format_stats(&labels[0], &all_stats[0]));
            }
        }
        Command::Play {
            level,
            mode,
            seed,
            text,
        } => play(&registry, &level, mode, seed, text)?,
        Command::Render {
            level,
            mode,
            seed,
            optimal,
        } => {
            let inst = sample_instance(registry.get(&level)?, mode, seed)?;
            let text = if optimal {
                render::render_optimal(&inst).ok_or(Error::Unsolvable)?
            } else {
                render::render_instance(&inst)
            };
            print!("{text}");
        }
        Command::Replay { file } => {
            let traces = episode::parse_traces(&std::fs::read_to_string(file)?)?;
            let mut mismatches = 0;
            for t in &traces {
                let again = t.replay(&registry)?;
                if again.to_json_line() != t.to_json_line() {
                    mismatches += 1;
                    eprintln!("mismatch: level {} mode {} seed {}", t.level, t.mode, t.seed);
                }
            }
            println!("{} traces, {} mismatches", traces.len(), mismatches);
            if mismatches > 0 {
                return Err(Error::InvalidState(format!("{mismatches} traces did not replay")));
            }
        }
        Command::Serve { transport } => service::serve(&transport, Arc::new(registry))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::UnknownLevel(_) | Error::InvalidArgument(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
