use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gbs_dks::graph::{planted_instance_with, PlantedConfig};
use gbs_dks::hafnian::{hafnian_fast, hafnian_pairings};
use gbs_dks::harness::{emit_outputs, fig1_sweep, fig3_compare, ExperimentConfig, Format, Report, FIG1_PROBS};
use gbs_dks::io::{read_graph, read_matrix, write_graph};
use gbs_dks::optimize::{
    charikar_greedy, exhaustive_best, random_search, simulated_annealing, AnnealParams, Cooling, RunTrace,
    DEFAULT_TEMPERATURE_FLOOR,
};
use gbs_dks::rng::seeded;
use gbs_dks::sampler::{
    mis_sample, Explorer, Gbs, MisExplorer, MisParams, TableStore, Uniform, DEFAULT_ENUMERATION_BUDGET,
};
use gbs_dks::{Error, Graph, Result, VertexSubset};

#[derive(Parser)]
#[command(
    name = "gbs-dks",
    version,
    about = "Hafnian-weighted subgraph sampling for densest-k-subgraph search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleMethod {
    Gbs,
    Uniform,
    Mis,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Gbs,
    Uniform,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HafnianAlgorithm {
    Fast,
    Pairings,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoolingArg {
    Linear,
    Constant,
}

#[derive(clap::Args)]
struct SamplerArgs {
    /// Directory for cached weight tables.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Largest number of subsets a weight table may enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = MisParams::default().burn_in)]
    burn_in: u64,
    #[arg(long, default_value_t = MisParams::default().thinning)]
    thinning: u64,
}

impl SamplerArgs {
    fn mis(&self) -> MisParams {
        MisParams {
            burn_in: self.burn_in,
            thinning: self.thinning,
            ..MisParams::default()
        }
    }

    fn store(&self, g: &Graph) -> TableStore {
        TableStore::new(g.clone(), self.budget, self.cache_dir.clone())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the Hafnian of a symmetric integer matrix.
    Hafnian {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        algorithm: HafnianAlgorithm,
    },
    /// Draw k-subsets, one per output line.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        method: SampleMethod,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Random search for a dense k-subgraph.
    Search {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_enum)]
        method: SampleMethod,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Simulated annealing for a dense k-subgraph.
    Anneal {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        t0: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 6)]
        l: usize,
        #[arg(long, value_enum, default_value = "linear")]
        cooling: CoolingArg,
        #[arg(long, default_value_t = DEFAULT_TEMPERATURE_FLOOR)]
        floor: f64,
        #[arg(long, value_enum)]
        explore: Strategy,
        #[arg(long, value_enum)]
        tweak: Strategy,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Greedy minimum-degree peeling.
    Greedy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Exact densest k-subgraph by enumeration.
    Exhaustive {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
    },
    /// Hafnian against edge count for random graphs.
    Fig1 {
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 600)]
        per_p: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimizer comparison described by a TOML config.
    Fig3 {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a planted benchmark instance.
    Generate {
        #[arg(long, required = true)]
        planted: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Randomly relabel the vertices.
        #[arg(long)]
        shuffle: bool,
    },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print(v: &Value) {
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("json values serialize")
    ));
}

fn density(g: &Graph, s: &VertexSubset) -> f64 {
    let k = s.len();
    if k < 2 {
        return 0.0;
    }
    g.induced_edge_count(s.indices()) as f64 / (k * (k - 1) / 2) as f64
}

fn result_record(g: &Graph, s: &VertexSubset, trace: Option<&RunTrace>, started: Instant) -> Value {
    json!({
        "subset": s,
        "edges": g.induced_edge_count(s.indices()),
        "density": density(g, s),
        "trace": trace.map(|t| &t.best_edges),
        "samples_used": trace.map(|t| t.samples_used),
        "fallbacks": trace.map(|t| &t.fallbacks),
        "wall_time_s": started.elapsed().as_secs_f64(),
    })
}

fn write_reports<T: Report>(report: &T, out: &Path) -> Result<Vec<PathBuf>> {
    Format::ALL.iter().map(|&f| emit_outputs(report, f, out)).collect()
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Hafnian { matrix, algorithm } => {
            let m = read_matrix(matrix)?;
            let h = match algorithm {
                HafnianAlgorithm::Fast => hafnian_fast(&m)?,
                HafnianAlgorithm::Pairings => hafnian_pairings(&m)?,
            };
            emit(&format!("{h}\n"));
        }
        Command::Sample {
            graph,
            k,
            method,
            samples,
            seed,
            sampler,
        } => {
            let g = read_graph(graph)?;
            let mut rng = seeded(seed);
            let mut out = String::new();
            let mut push = |s: &VertexSubset| {
                out.push_str(&s.to_string());
                out.push('\n');
            };
            match method {
                SampleMethod::Mis => {
                    for s in mis_sample(&g, k, sampler.mis(), rng)?.take(samples) {
                        push(&s);
                    }
                }
                SampleMethod::Gbs => {
                    let store = sampler.store(&g);
                    let mut e = Gbs::new(&store);
                    for _ in 0..samples {
                        let d = e.explore(k, &mut rng)?;
                        for f in &d.fallbacks {
                            eprintln!("fallback: {}", serde_json::to_string(f)?);
                        }
                        push(&d.subset);
                    }
                }
                SampleMethod::Uniform => {
                    let mut e = Uniform::new(&g);
                    for _ in 0..samples {
                        push(&e.explore(k, &mut rng)?.subset);
                    }
                }
            }
            emit(&out);
        }
        Command::Search {
            graph,
            k,
            samples,
            method,
            seed,
            sampler,
        } => {
            let g = read_graph(graph)?;
            let mut rng = seeded(seed);
            let store = sampler.store(&g);
            let trace = match method {
                SampleMethod::Gbs => random_search(&g, k, samples, &mut Gbs::new(&store), &mut rng)?,
                SampleMethod::Uniform => random_search(&g, k, samples, &mut Uniform::new(&g), &mut rng)?,
                SampleMethod::Mis => random_search(&g, k, samples, &mut MisExplorer::new(&g, sampler.mis()), &mut rng)?,
            };
            print(&result_record(&g, &trace.final_subset, Some(&trace), started));
        }
        Command::Anneal {
            graph,
            k,
            t0,
            steps,
            l,
            cooling,
            floor,
            explore,
            tweak,
            seed,
            sampler,
        } => {
            let g = read_graph(graph)?;
            let params = AnnealParams {
                t0,
                cooling: match cooling {
                    CoolingArg::Linear => Cooling::Linear { floor },
                    CoolingArg::Constant => Cooling::Constant,
                },
                l,
                steps,
            };
            let mut rng = seeded(seed);
            let store = sampler.store(&g);
            let (mut ge, mut ue) = (Gbs::new(&store), Uniform::new(&g));
            let (mut gt, mut ut) = (Gbs::new(&store), Uniform::new(&g));
            let trace = match (explore, tweak) {
                (Strategy::Gbs, Strategy::Gbs) => simulated_annealing(&g, k, &params, &mut ge, &mut gt, &mut rng)?,
                (Strategy::Gbs, Strategy::Uniform) => simulated_annealing(&g, k, &params, &mut ge, &mut ut, &mut rng)?,
                (Strategy::Uniform, Strategy::Gbs) => simulated_annealing(&g, k, &params, &mut ue, &mut gt, &mut rng)?,
                (Strategy::Uniform, Strategy::Uniform) => {
                    simulated_annealing(&g, k, &params, &mut ue, &mut ut, &mut rng)?
                }
            };
            print(&result_record(&g, &trace.final_subset, Some(&trace), started));
        }
        Command::Greedy { graph, k } => {
            let g = read_graph(graph)?;
            let s = charikar_greedy(&g, k)?;
            print(&result_record(&g, &s, None, started));
        }
        Command::Exhaustive { graph, k, budget } => {
            let g = read_graph(graph)?;
            let (s, _) = exhaustive_best(&g, k, budget)?;
            print(&result_record(&g, &s, None, started));
        }
        Command::Fig1 { k, per_p, seed, out } => {
            let table = fig1_sweep(k, &FIG1_PROBS, per_p, seed)?;
            let files = write_reports(&table, &out)?;
            print(&json!({
                "rows": table.rows.len(),
                "zero_rows": table.zero_rows,
                "files": files,
                "wall_time_s": started.elapsed().as_secs_f64(),
            }));
        }
        Command::Fig3 { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set output_dir".into()))?;
            match fig3_compare(&cfg) {
                Ok(res) => {
                    let files = write_reports(&res, &out)?;
                    let summary: Vec<Value> = res
                        .curves
                        .iter()
                        .map(
                            |c| json!({"method": c.method, "final_mean": c.final_mean, "final_stddev": c.final_stddev}),
                        )
                        .collect();
                    print(&json!({
                        "curves": summary,
                        "reference_lines": res.reference_lines,
                        "files": files,
                        "wall_time_s": started.elapsed().as_secs_f64(),
                    }));
                }
                Err(failure) => {
                    if let Some(partial) = &failure.partial {
                        let files = write_reports(partial, &out)?;
                        eprintln!(
                            "partial results written to {}",
                            files[0].parent().unwrap_or(&out).display()
                        );
                    }
                    return Err(failure.error);
                }
            }
        }
        Command::Generate {
            planted: _,
            seed,
            out,
            shuffle,
        } => {
            let cfg = PlantedConfig {
                shuffle,
                ..PlantedConfig::default()
            };
            let inst = planted_instance_with(&cfg, seed)?;
            write_graph(&inst.graph, &out)?;
            print(&json!({
                "graph": out,
                "fingerprint": inst.graph.fingerprint(),
                "vertices": inst.graph.n(),
                "edges": inst.graph.edge_count(),
                "planted": inst.planted,
                "planted_edges": inst.planted_edges,
            }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
