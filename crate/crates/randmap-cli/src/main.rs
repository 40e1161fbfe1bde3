//! Command-line surface over the analysis library.
//!
//! Every subcommand reads the same system document format; a SOURCE argument
//! is a file path, or a built-in catalog name when no such file exists.
//! Exit codes: 0 success, 1 analysis refusal (an unmet hypothesis, a cap, an
//! internal consistency failure), 2 input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use randmap::accord;
use randmap::catalog::{self, BuiltinSystem};
use randmap::cftp;
use randmap::dot;
use randmap::error::Error;
use randmap::filtering;
use randmap::hypothesis;
use randmap::kernel::{build_kernel, stationary_distribution};
use randmap::ratio::{format_rat, parse_rat, rat_to_f64};
use randmap::report::{self, AnalyzeOptions};
use randmap::semigroup;
use randmap::system::{load_system, serialize_system, RandomMapSystem};

#[derive(Parser)]
#[command(
    name = "randmap",
    about = "Analyze finite random-map systems: determination, semigroup \
             structure, exact filtering, perfect sampling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full structural report for a system
    Analyze {
        source: String,
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
        /// Cap for the semigroup enumeration inside the report
        #[arg(long, default_value_t = 100_000)]
        semigroup_cap: usize,
    },
    /// Accordability relation, M, and optional pair witnesses
    Accord {
        source: String,
        /// Check one pair of state labels
        #[arg(long, num_args = 2, allow_hyphen_values = true)]
        pair: Option<Vec<String>>,
        /// Print shortest merging words
        #[arg(long)]
        witness: bool,
        /// Write the pair automaton as DOT
        #[arg(long)]
        dot_pairs: Option<PathBuf>,
        /// Write the accordability relation as DOT
        #[arg(long)]
        dot_relation: Option<PathBuf>,
    },
    /// Enumerate the generated semigroup and its walk structure
    Semigroup {
        source: String,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        /// Write the walk graph as DOT
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also sample one backward trace with this seed
        #[arg(long)]
        trace_seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        trace_horizon: usize,
    },
    /// Sampled filtering traces: support, exact law, distance to uniform
    Conditional {
        source: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        horizon: usize,
        /// Number of traces (seeds seed..seed+reps)
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Dump per-step rows (CSV) to a file
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Perfect sampling of the stationary law
    Cftp {
        source: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Machine-readable output with per-seed depths
        #[arg(long)]
        json: bool,
    },
    /// Decide the uniform-invariance hypothesis by exact LP
    CheckH {
        source: String,
        #[arg(long)]
        json: bool,
    },
    /// Build the full block partition (requires the hypothesis)
    Partition {
        source: String,
        #[arg(long)]
        json: bool,
    },
    /// Print or emit a built-in system
    Builtin {
        name: String,
        /// Write the system document here instead of stdout
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Generate a system
    Gen {
        #[command(subcommand)]
        generator: Generator,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// Superposed-permutation colored graph (uniform-invariance holds by construction)
    ColoredGraph {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Left-translation action of a finite group on itself
    Group {
        #[command(flatten)]
        kind: GroupKind,
        /// Weighted generators, e.g. "1=1/2,2=1/2" (element index = weight)
        #[arg(long)]
        weights: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Seeded random system (tables and weights)
    Random {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        maps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GroupKind {
    /// Cyclic group of this order
    #[arg(long)]
    cyclic: Option<usize>,
    /// Symmetric group on this many letters (at most 4)
    #[arg(long)]
    symmetric: Option<usize>,
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

/// Resolve SOURCE: an existing file path first, then a catalog name.
fn resolve(source: &str) -> Result<(RandomMapSystem, Option<BuiltinSystem>), Error> {
    if Path::new(source).exists() {
        let text = fs::read_to_string(source)
            .map_err(|e| Error::Document(format!("cannot read `{source}`: {e}")))?;
        Ok((load_system(&text)?, None))
    } else {
        let b = catalog::builtin(source).map_err(|_| {
            Error::Document(format!(
                "`{source}` is neither a readable file nor a builtin name \
                 (builtins: {})",
                catalog::builtin_names().join(", ")
            ))
        })?;
        Ok((b.system.clone(), Some(b)))
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| Error::Document(format!("cannot write `{}`: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze {
            source,
            json,
            semigroup_cap,
        } => {
            let (system, builtin) = resolve(&source)?;
            let options = AnalyzeOptions {
                semigroup_cap,
                include_semigroup: true,
            };
            let r = report::analyze(&system, &options, builtin.as_ref())?;
            if json {
                println!("{}", report::to_json(&r));
            } else {
                print!("{}", report::render_text(&r));
            }
            Ok(())
        }
        Command::Accord {
            source,
            pair,
            witness,
            dot_pairs,
            dot_relation,
        } => {
            let (system, _) = resolve(&source)?;
            if let Some(pair) = pair {
                let x = state_index(&system, &pair[0])?;
                let y = state_index(&system, &pair[1])?;
                let a = accord::accordable(&system, x, y)?;
                println!("accordable: {}", a.verdict);
                if witness {
                    match a.witness {
                        Some(w) => println!("witness: {}", system.word_names(&w).join(" ")),
                        None => println!("witness: none"),
                    }
                }
            } else {
                let r = if witness {
                    accord::accord_report_with_witnesses(&system)?
                } else {
                    accord::max_non_accordable(&system)
                };
                for x in 0..system.d() {
                    for y in (x + 1)..system.d() {
                        if r.relation[x][y] {
                            let line = format!(
                                "accordable {{{},{}}}",
                                system.states().label(x),
                                system.states().label(y)
                            );
                            match r.witnesses.as_ref().and_then(|w| w.get(&(x, y))) {
                                Some(word) => println!(
                                    "{line} witness: {}",
                                    system.word_names(word).join(" ")
                                ),
                                None => println!("{line}"),
                            }
                        }
                    }
                }
                println!(
                    "M = {} witness {{{}}}",
                    r.m,
                    r.witness_set
                        .iter()
                        .map(|&v| system.states().label(v).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                );
            }
            if let Some(p) = &dot_pairs {
                write_or_print(&Some(p.clone()), &dot::pair_graph_dot(&system))?;
            }
            if let Some(p) = &dot_relation {
                let relation = accord::accordability_relation(&system);
                write_or_print(&Some(p.clone()), &dot::relation_dot(&system, &relation))?;
            }
            Ok(())
        }
        Command::Semigroup {
            source,
            cap,
            dot: dot_path,
            trace_seed,
            trace_horizon,
        } => {
            let (system, _) = resolve(&source)?;
            let table = semigroup::enumerate_semigroup(&system, cap)?;
            let walk = semigroup::walk_structure(&table);
            let recurrent = walk.recurrent.iter().filter(|&&r| r).count();
            println!("semigroup size: {}", table.len());
            println!(
                "components: {} (recurrent elements: {recurrent})",
                walk.scc.count
            );
            let p10 = semigroup::check_prop10(&system, cap)?;
            println!(
                "recurrent images: all size {} pairwise non-accordable: {}",
                p10.m, p10.ok
            );
            println!("min |s(E)| over the semigroup: {}", p10.min_image_size);
            if let Some(p) = dot_path {
                write_or_print(&Some(p), &dot::walk_graph_dot(&system, &table, &walk))?;
            }
            if let Some(seed) = trace_seed {
                let t = semigroup::sample_backward_walk(&system, seed, trace_horizon);
                println!(
                    "trace seed {seed}: word [{}]",
                    system.word_names(&t.word).join(" ")
                );
                println!(
                    "image sizes: {}",
                    t.image_sizes()
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                match t.limit_image() {
                    Some(r0) => println!(
                        "R0 = {{{}}} at depth {}",
                        r0.iter()
                            .map(|&x| system.states().label(x).to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                        t.stabilization_index.unwrap()
                    ),
                    None => println!("not stabilized within horizon {trace_horizon}"),
                }
            }
            Ok(())
        }
        Command::Conditional {
            source,
            seed,
            horizon,
            reps,
            dump,
        } => {
            let (system, _) = resolve(&source)?;
            let traces = filtering::convergence_traces(&system, seed, reps, horizon)?;
            let target = accord::min_rank(&system).rank;
            println!("seed  stabilized_at  final_support  final_atoms  final_tv");
            for t in &traces {
                let reached = t
                    .support_reached(target)
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| "-".into());
                let last = t.final_step();
                println!(
                    "{:<5} {:<14} {:<14} {:<12} {:.6}",
                    t.seed,
                    reached,
                    last.support.len(),
                    last.atom_count,
                    last.tv_to_uniform_on_support
                );
            }
            if let Some(path) = dump {
                let mut rows = String::from("seed,n,support,law,tv\n");
                for t in &traces {
                    for s in &t.steps {
                        rows.push_str(&format!(
                            "{},{},{},{},{:.12}\n",
                            t.seed,
                            s.n,
                            s.support
                                .iter()
                                .map(|&x| system.states().label(x).to_string())
                                .collect::<Vec<_>>()
                                .join("|"),
                            s.law
                                .weights()
                                .iter()
                                .map(format_rat)
                                .collect::<Vec<_>>()
                                .join("|"),
                            s.tv_to_uniform_on_support
                        ));
                    }
                }
                write_or_print(&Some(path), &rows)?;
            }
            Ok(())
        }
        Command::Cftp {
            source,
            samples,
            seed,
            json,
        } => {
            let (system, _) = resolve(&source)?;
            let pi = stationary_distribution(&build_kernel(&system))?;
            let determined = accord::innovations_determine(&system)?.determined;
            let d = system.d();
            let mut counts = vec![0usize; d];
            let mut depths: Vec<usize> = Vec::with_capacity(samples);
            if determined {
                for r in cftp::cftp_sample_many(&system, seed, samples)? {
                    counts[r.sample] += 1;
                    depths.push(r.coalescence_depth);
                }
            } else {
                for r in cftp::cftp_residual_many(&system, seed, samples)? {
                    counts[r.sample] += 1;
                    depths.push(r.depth);
                }
            }
            if json {
                let payload = serde_json::json!({
                    "sampler": if determined { "cftp" } else { "residual" },
                    "samples": samples,
                    "counts": system.states().labels().iter().zip(&counts)
                        .map(|(l, c)| (l.clone(), *c)).collect::<Vec<_>>(),
                    "stationary": pi.weights().iter().map(format_rat).collect::<Vec<_>>(),
                    "depths": depths,
                });
                println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            } else {
                println!(
                    "sampler: {}",
                    if determined {
                        "coupling from the past"
                    } else {
                        "residual (stabilized image + uniform pick)"
                    }
                );
                println!("state  empirical  exact");
                for x in 0..d {
                    println!(
                        "{:<6} {:<10.6} {} ({:.6})",
                        system.states().label(x),
                        counts[x] as f64 / samples as f64,
                        format_rat(pi.weight(x)),
                        rat_to_f64(pi.weight(x))
                    );
                }
                let max_depth = depths.iter().max().copied().unwrap_or(0);
                let mean_depth = depths.iter().sum::<usize>() as f64 / depths.len().max(1) as f64;
                println!("depth: mean {mean_depth:.2}, max {max_depth}");
            }
            Ok(())
        }
        Command::CheckH { source, json } => {
            let (system, _) = resolve(&source)?;
            let r = hypothesis::h_report(&system);
            if json {
                let payload = serde_json::json!({
                    "feasible": r.feasible,
                    "t_star": r.t_star.as_ref().map(format_rat),
                    "alpha": r.alpha.as_ref().map(|a| a.iter()
                        .map(|(n, w)| (n.clone(), format_rat(w))).collect::<Vec<_>>()),
                    "m": r.m,
                    "n": r.n,
                    "mn_equals_states": r.product_check,
                    "m_divides_states": r.m_divides_states,
                });
                println!("{}", serde_json::to_string_pretty(&payload).unwrap());
                return Ok(());
            }
            println!(
                "uniform-invariance hypothesis: {}",
                if r.feasible { "holds" } else { "fails" }
            );
            match &r.t_star {
                Some(t) => println!("margin t* = {}", format_rat(t)),
                None => println!("margin t* = (equality system inconsistent)"),
            }
            if let Some(alpha) = &r.alpha {
                for (name, w) in alpha {
                    println!("alpha[{name}] = {}", format_rat(w));
                }
            }
            println!("M = {}, N = {}, M*N = {}", r.m, r.n, r.m * r.n);
            println!(
                "M*N == |E|: {} ; M divides |E|: {}",
                r.product_check, r.m_divides_states
            );
            Ok(())
        }
        Command::Partition { source, json } => {
            let (system, _) = resolve(&source)?;
            let p = hypothesis::build_full_partition(&system)?;
            let label = |x: usize| system.states().label(x).to_string();
            if json {
                let payload = serde_json::json!({
                    "collapsing_word": system.word_names(&p.word),
                    "blocks": p.blocks.iter().map(|b| {
                        b.iter().map(|&x| label(x)).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                    "values": p.values.iter().map(|&v| label(v)).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&payload).unwrap());
                return Ok(());
            }
            println!(
                "collapsing word: [{}]",
                system.word_names(&p.word).join(" ")
            );
            for (block, value) in p.blocks.iter().zip(&p.values) {
                println!(
                    "block {{{}}} -> {}",
                    block
                        .iter()
                        .map(|&x| label(x))
                        .collect::<Vec<_>>()
                        .join(","),
                    label(*value)
                );
            }
            Ok(())
        }
        Command::Builtin { name, emit } => {
            let b = catalog::builtin(&name)?;
            if let Some(note) = &b.note {
                eprintln!("note: {note}");
            }
            write_or_print(&emit, &serialize_system(&b.system))
        }
        Command::Gen { generator } => match generator {
            Generator::ColoredGraph {
                states,
                colors,
                seed,
                emit,
            } => {
                let s = catalog::gen_colored_graph(states, colors, seed)?;
                write_or_print(&emit, &serialize_system(&s))
            }
            Generator::Group {
                kind,
                weights,
                emit,
            } => {
                let (table, labels) = match (kind.cyclic, kind.symmetric) {
                    (Some(n), None) => catalog::cyclic_group(n),
                    (None, Some(n)) => catalog::symmetric_group(n)?,
                    _ => unreachable!("clap enforces exactly one"),
                };
                let weights = parse_weights(&weights)?;
                let s = catalog::gen_group_action(&table, &labels, &weights)?;
                write_or_print(&emit, &serialize_system(&s))
            }
            Generator::Random {
                states,
                maps,
                seed,
                emit,
            } => {
                let s = catalog::gen_random_system(states, maps, seed);
                write_or_print(&emit, &serialize_system(&s))
            }
        },
    }
}

fn state_index(system: &RandomMapSystem, label: &str) -> Result<usize, Error> {
    system
        .states()
        .index_of(label)
        .ok_or_else(|| Error::Document(format!("unknown state label `{label}`")))
}

/// Parse "1=1/2,2=1/2" into (element index, weight) pairs.
fn parse_weights(spec: &str) -> Result<Vec<(usize, randmap::Rat)>, Error> {
    spec.split(',')
        .map(|part| {
            let (idx, w) = part
                .split_once('=')
                .ok_or_else(|| Error::Document(format!("bad weight entry `{part}`")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::Document(format!("bad element index `{idx}`")))?;
            let w = parse_rat(w).map_err(Error::Document)?;
            Ok((idx, w))
        })
        .collect()
}
