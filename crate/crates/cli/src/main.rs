use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use shiftmatch::bench::{self, BenchConfig, GraphType, RunOptions};
use shiftmatch::equivalence::{observational_essential_graph, unmatched_set};
use shiftmatch::graph::{self, chain_components, io::GraphFile, maximal_cliques};
use shiftmatch::par::{self, Execution};
use shiftmatch::scm::{instance_from_json, instance_to_json, observational_mean, sample_instance};
use shiftmatch::strategies::{run_policy, PolicyKind};
use shiftmatch::verify::{run_verification, Suite};
use shiftmatch::EPS;

const SEED_ENV: &str = "SHIFTMATCH_SEED";

#[derive(Parser)]
#[command(name = "shiftmatch", version, about = "Causal mean matching with shift interventions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random DAG and a matching instance on it.
    Gen {
        #[arg(long = "type")]
        graph_type: GraphType,
        #[arg(long)]
        p: usize,
        /// Overrides SHIFTMATCH_SEED; defaults to 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of intervention targets in the instance.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Directory receiving graph.txt and instance.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark config into a results directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides SHIFTMATCH_SEED and the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "resume")]
        force: bool,
        #[arg(long)]
        resume: bool,
        /// Worker threads; defaults to the number of logical cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Run every cell on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Run the built-in verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Summarize a results CSV (or a run directory).
    Report {
        #[arg(long)]
        results: PathBuf,
        /// Directory for summary.txt and aggregate.csv; prints the summary
        /// when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a graph or instance file, optionally running one policy on
    /// an instance and saving its trace.
    Inspect {
        #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
        graph: Option<PathBuf>,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, requires = "instance")]
        policy: Option<PolicyKind>,
        #[arg(long = "S", default_value_t = 1)]
        s: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Where the JSONL trace goes when --policy is set.
        #[arg(long, requires = "policy")]
        trace_out: Option<PathBuf>,
    },
}

enum Failure {
    Verification,
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<shiftmatch::Error> for Failure {
    fn from(e: shiftmatch::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not an integer"))?)),
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn gen(graph_type: GraphType, p: usize, seed: Option<u64>, k: usize, out: &Path) -> Result<(), Failure> {
    let seed = seed.or(env_seed()?).unwrap_or(0);
    let dag = bench::gen_graph(graph_type, p, seed)?;
    let inst = sample_instance(&dag, k, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_file(&out.join("graph.txt"), &graph::io::write_dag(&dag))?;
    write_file(&out.join("instance.json"), &(instance_to_json(&inst) + "\n"))?;
    eprintln!(
        "wrote {} ({} edges) and instance.json ({k} targets) to {}",
        graph_type,
        dag.edge_count(),
        out.display()
    );
    Ok(())
}

struct RunArgs {
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    force: bool,
    resume: bool,
    jobs: Option<usize>,
    sequential: bool,
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut config = BenchConfig::from_json(&read_file(&args.config)?)?;
    if let Some(seed) = args.seed.or(env_seed()?) {
        config.seed = seed;
    }
    let opts = RunOptions {
        force: args.force,
        resume: args.resume,
        exec: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let report = par::with_jobs(args.jobs, || bench::run_to_dir(&config, &args.out, opts))?;
    eprintln!(
        "{} rows ({} instances computed, {} reused) in {}",
        report.rows.len(),
        report.computed,
        report.reused,
        report.results_csv.display()
    );
    Ok(())
}

fn report(results: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let csv = if results.is_dir() {
        results.join("results.csv")
    } else {
        results.to_path_buf()
    };
    let rows = bench::parse_csv(&read_file(&csv)?)?;
    let summary = bench::summary_table(&rows);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_file(&dir.join("summary.txt"), &summary)?;
            write_file(&dir.join("aggregate.csv"), &bench::aggregate_csv(&bench::aggregate(&rows)))?;
            eprintln!("summarized {} rows into {}", rows.len(), dir.display());
        }
        None => print!("{summary}"),
    }
    Ok(())
}

fn inspect_graph(path: &Path) -> anyhow::Result<serde_json::Value> {
    let parsed = graph::io::parse(&read_file(path)?)?;
    Ok(match parsed {
        GraphFile::Directed(d) => {
            let eg = observational_essential_graph(&d);
            let comps: Vec<usize> = chain_components(&eg).iter().map(|c| c.nodes.len()).collect();
            json!({
                "kind": "directed",
                "p": d.p(),
                "edges": d.edge_count(),
                "vstructures": graph::skeleton_and_vstructures(&d).1.len(),
                "essential_undirected_edges": eg.undirected_edges().len(),
                "chain_component_sizes": comps,
            })
        }
        GraphFile::Undirected(g) => {
            let cliques = maximal_cliques(&g).ok();
            json!({
                "kind": "undirected",
                "p": g.p(),
                "edges": g.edge_count(),
                "connected": g.is_connected(),
                "chordal": cliques.is_some(),
                "maximal_cliques": cliques.as_ref().map(|c| c.len()),
                "largest_clique": cliques.as_ref().and_then(|c| c.iter().map(|x| x.len()).max()),
            })
        }
        GraphFile::Pdag(g) => json!({
            "kind": "pdag",
            "p": g.skeleton().p(),
            "directed_edges": g.directed_edges().len(),
            "undirected_edges": g.undirected_edges().len(),
        }),
    })
}

fn inspect(
    graph: Option<&Path>,
    instance: Option<&Path>,
    policy: Option<PolicyKind>,
    s: usize,
    seed: Option<u64>,
    trace_out: Option<&Path>,
) -> Result<(), Failure> {
    let summary = if let Some(path) = graph {
        inspect_graph(path)?
    } else {
        let path = instance.expect("clap requires one of --graph and --instance");
        let inst = instance_from_json(&read_file(path)?)?;
        let base = observational_mean(&inst.scm);
        let eg = observational_essential_graph(inst.scm.dag());
        let mut v = json!({
            "kind": "instance",
            "p": inst.p(),
            "edges": inst.scm.dag().edge_count(),
            "targets": inst.true_matching.len(),
            "unmatched_initially": unmatched_set(&base, &inst.q_mean, EPS).len(),
            "chain_component_sizes": chain_components(&eg).iter().map(|c| c.nodes.len()).collect::<Vec<_>>(),
            "oracle_interventions": run_policy(&inst, PolicyKind::Oracle, s, 0).total_interventions,
        });
        if let Some(policy) = policy {
            if s == 0 {
                return Err(Failure::Usage(anyhow!("--S must be at least 1")));
            }
            let seed = seed.or(env_seed()?).unwrap_or(0);
            let trace = run_policy(&inst, policy, s, seed);
            let exact = trace.final_matching.approx_eq(&inst.true_matching, EPS);
            v["run"] = json!({
                "policy": policy,
                "S": s,
                "seed": seed,
                "total_interventions": trace.total_interventions,
                "explore": trace.explore_count(),
                "commit": trace.commit_count(),
                "matched": exact,
            });
            if let Some(out) = trace_out {
                write_file(out, &trace.to_jsonl())?;
            }
        }
        v
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("json serializes"));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            graph_type,
            p,
            seed,
            k,
            out,
        } => gen(graph_type, p, seed, k, &out),
        Command::Run {
            config,
            out,
            seed,
            force,
            resume,
            jobs,
            sequential,
        } => run(RunArgs {
            config,
            out,
            seed,
            force,
            resume,
            jobs,
            sequential,
        }),
        Command::Verify { suite } => {
            let report = run_verification(suite);
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Report { results, out } => report(&results, out.as_deref()),
        Command::Inspect {
            graph,
            instance,
            policy,
            s,
            seed,
            trace_out,
        } => inspect(
            graph.as_deref(),
            instance.as_deref(),
            policy,
            s,
            seed,
            trace_out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
