//! Experiment drivers: the Hafnian-vs-edges sweep and the optimizer
//! comparison on a planted instance, plus their CSV/JSON/SVG output.

mod output;
mod svg;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use output::{emit_outputs, Format, Report};

use crate::error::{Error, Result};
use crate::graph::{erdos_renyi_with, planted_instance_with, Graph, PlantedConfig};
use crate::hafnian::{graph_perfect_matchings, min_edges_for_pm, pm_upper_bound, PmBoundInput};
use crate::io::read_graph;
use crate::optimize::{charikar_greedy, exhaustive_best, random_search, simulated_annealing, AnnealParams, RunTrace};
use crate::rng::run_stream;
use crate::sampler::{
    Draw, Explorer, Fallback, Gbs, MisExplorer, MisParams, TableStore, Uniform, DEFAULT_ENUMERATION_BUDGET,
    DEFAULT_RETRY_BUDGET,
};
use crate::subset::binomial;

pub const DEFAULT_CHECKPOINTS: [usize; 9] = [1, 2, 5, 10, 20, 50, 100, 200, 500];
pub const FIG1_PROBS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const FIG1_PER_P: usize = 600;

/// Stream id of the sweep's graph generator, outside the range used by
/// optimizer methods.
const FIG1_STREAM: u32 = u32::MAX;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    UniformRs,
    GbsRs,
    UniformSa,
    GbsSa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::UniformRs, Method::GbsRs, Method::UniformSa, Method::GbsSa];

    /// Fixed stream id, so a method's runs do not depend on which other
    /// methods are configured.
    pub fn stream_id(self) -> u32 {
        self as u32
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::UniformRs => "uniform-rs",
            Method::GbsRs => "gbs-rs",
            Method::UniformSa => "uniform-sa",
            Method::GbsSa => "gbs-sa",
        }
    }

    pub fn is_annealing(self) -> bool {
        matches!(self, Method::UniformSa | Method::GbsSa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Planted {
        seed: u64,
        #[serde(default)]
        params: PlantedConfig,
    },
    File {
        path: PathBuf,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
        seed: u64,
    },
}

/// A loaded experiment graph and, for planted instances, the planted part.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub planted_edges: Option<usize>,
}

impl GraphSource {
    pub fn load(&self) -> Result<LoadedGraph> {
        Ok(match self {
            GraphSource::Planted { seed, params } => {
                let inst = planted_instance_with(params, *seed)?;
                LoadedGraph {
                    graph: inst.graph,
                    planted_edges: Some(inst.planted_edges),
                }
            }
            GraphSource::File { path } => LoadedGraph {
                graph: read_graph(path)?,
                planted_edges: None,
            },
            GraphSource::ErdosRenyi { n, p, seed } => LoadedGraph {
                graph: crate::graph::erdos_renyi(*n, *p, *seed)?,
                planted_edges: None,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Exact weight tables.
    #[default]
    Exact,
    /// MIS chains for exploration; tweaks still use small exact tables.
    Mis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub backend: Backend,
    /// Largest number of subsets any table build or exhaustive search may
    /// enumerate.
    pub enumeration_budget: u64,
    pub cache_dir: Option<PathBuf>,
    pub retry_budget: usize,
    pub mis: MisParams,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            backend: Backend::Exact,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            cache_dir: None,
            retry_budget: DEFAULT_RETRY_BUDGET,
            mis: MisParams::default(),
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_repetitions() -> usize {
    400
}

fn default_checkpoints() -> Vec<usize> {
    DEFAULT_CHECKPOINTS.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub graph: GraphSource,
    pub k: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Draw counts at which best-so-far values are aggregated.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub anneal: AnnealParams,
    pub master_seed: u64,
    /// Where the front end writes results unless told otherwise.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub sampler: SamplerConfig,
}

impl ExperimentConfig {
    /// The paper-scale comparison: default planted instance, k = 10,
    /// 400 repetitions of all four methods.
    pub fn planted_default(graph_seed: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            id: format!("planted-{graph_seed}-k10"),
            graph: GraphSource::Planted {
                seed: graph_seed,
                params: PlantedConfig::default(),
            },
            k: 10,
            methods: default_methods(),
            repetitions: default_repetitions(),
            checkpoints: default_checkpoints(),
            anneal: AnnealParams::default(),
            master_seed,
            output_dir: None,
            sampler: SamplerConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if u32::try_from(self.repetitions).is_err() {
            return bad(format!("{} repetitions is too many", self.repetitions));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("method {m} listed twice"));
            }
        }
        let Some(&last) = self.checkpoints.last() else {
            return bad("at least one checkpoint is required".into());
        };
        if self.checkpoints[0] == 0 || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "checkpoints must be positive and strictly increasing: {:?}",
                self.checkpoints
            ));
        }
        if self.methods.iter().any(|m| m.is_annealing()) {
            self.anneal.validate(self.k).map_err(|e| Error::Config(e.to_string()))?;
            if last > self.anneal.steps + 1 {
                return bad(format!(
                    "checkpoint {last} exceeds the {} draws of an annealing run",
                    self.anneal.steps + 1
                ));
            }
        }
        self.sampler.mis.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub version: String,
    pub graph_fingerprint: String,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub name: String,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub method: Method,
    pub checkpoints: Vec<usize>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across repetitions (0 for one run).
    pub stddev: Vec<f64>,
    /// Best edge count at the end of each run (after `draws` draws).
    pub final_mean: f64,
    pub final_stddev: f64,
    pub draws: usize,
    pub runs: usize,
    pub fallbacks: BTreeMap<Fallback, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Result {
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub reference_lines: Vec<ReferenceLine>,
    pub curves: Vec<AggregateCurve>,
    /// False when a run failed and only earlier methods are present.
    pub complete: bool,
    pub error: Option<String>,
}

impl Fig3Result {
    pub fn curve(&self, method: Method) -> Option<&AggregateCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    pub fn reference(&self, name: &str) -> Option<usize> {
        self.reference_lines.iter().find(|r| r.name == name).map(|r| r.edges)
    }
}

/// A failed comparison. `partial` holds every method finished before the
/// failure, when the graph could be loaded at all.
#[derive(Debug)]
pub struct Fig3Failure {
    pub error: Error,
    pub partial: Option<Fig3Result>,
}

impl fmt::Display for Fig3Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Fig3Failure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for Fig3Failure {
    fn from(error: Error) -> Self {
        Fig3Failure { error, partial: None }
    }
}

/// Hafnian-weighted exploration with either backend.
#[allow(clippy::large_enum_variant)]
enum WeightedExplorer<'a> {
    Exact(Gbs<'a>),
    Mis(MisExplorer<'a>),
}

impl Explorer for WeightedExplorer<'_> {
    fn explore<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Draw> {
        match self {
            WeightedExplorer::Exact(e) => e.explore(k, rng),
            WeightedExplorer::Mis(e) => e.explore(k, rng),
        }
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    graph: &'a Graph,
    store: &'a TableStore,
}

impl Context<'_> {
    fn uniform(&self) -> Uniform<'_> {
        Uniform {
            graph: self.graph,
            retry_budget: self.cfg.sampler.retry_budget,
        }
    }

    fn gbs(&self) -> Gbs<'_> {
        Gbs {
            store: self.store,
            retry_budget: self.cfg.sampler.retry_budget,
        }
    }

    fn weighted_explorer(&self) -> WeightedExplorer<'_> {
        match self.cfg.sampler.backend {
            Backend::Exact => WeightedExplorer::Exact(self.gbs()),
            Backend::Mis => WeightedExplorer::Mis(MisExplorer::new(self.graph, self.cfg.sampler.mis)),
        }
    }

    fn run(&self, method: Method, rep: usize) -> Result<RunTrace> {
        let cfg = self.cfg;
        let (g, k) = (self.graph, cfg.k);
        let mut rng = run_stream(cfg.master_seed, method.stream_id(), rep as u32);
        let draws = *cfg.checkpoints.last().expect("validated");
        match method {
            Method::UniformRs => random_search(g, k, draws, &mut self.uniform(), &mut rng),
            Method::GbsRs => random_search(g, k, draws, &mut self.weighted_explorer(), &mut rng),
            Method::UniformSa => {
                simulated_annealing(g, k, &cfg.anneal, &mut self.uniform(), &mut self.uniform(), &mut rng)
            }
            Method::GbsSa => simulated_annealing(
                g,
                k,
                &cfg.anneal,
                &mut self.weighted_explorer(),
                &mut self.gbs(),
                &mut rng,
            ),
        }
    }
}

#[cfg(feature = "parallel")]
fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Mean and sample standard deviation, summed in index order.
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate(method: Method, checkpoints: &[usize], traces: &[RunTrace]) -> Result<AggregateCurve> {
    let mut mean = Vec::with_capacity(checkpoints.len());
    let mut stddev = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        let values = traces
            .iter()
            .map(|t| {
                t.best_after_draws(c)
                    .map(|e| e as f64)
                    .ok_or_else(|| Error::Config(format!("checkpoint {c} is beyond a {method} run")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (m, s) = mean_stddev(&values);
        mean.push(m);
        stddev.push(s);
    }
    let finals: Vec<f64> = traces.iter().map(|t| t.final_edges() as f64).collect();
    let (final_mean, final_stddev) = mean_stddev(&finals);
    let mut fallbacks = BTreeMap::new();
    for t in traces {
        for (f, n) in &t.fallbacks {
            *fallbacks.entry(*f).or_insert(0) += n;
        }
    }
    Ok(AggregateCurve {
        method,
        checkpoints: checkpoints.to_vec(),
        mean,
        stddev,
        final_mean,
        final_stddev,
        draws: traces.iter().map(RunTrace::draws).max().unwrap_or(0),
        runs: traces.len(),
        fallbacks,
    })
}

/// Runs every configured method `repetitions` times on disjoint streams and
/// aggregates best-so-far edge counts at the checkpoints.
pub fn fig3_compare(cfg: &ExperimentConfig) -> Result<Fig3Result, Box<Fig3Failure>> {
    cfg.validate().map_err(|e| Box::new(e.into()))?;
    let loaded = cfg.graph.load().map_err(|e| Box::new(e.into()))?;
    let g = &loaded.graph;
    if cfg.k > g.n() {
        return Err(Box::new(
            Error::Config(format!("k = {} exceeds the graph's {} vertices", cfg.k, g.n())).into(),
        ));
    }
    let reference_lines = reference_lines(g, cfg.k, cfg.sampler.enumeration_budget, loaded.planted_edges)
        .map_err(|e| Box::new(e.into()))?;
    let mut result = Fig3Result {
        config: cfg.clone(),
        provenance: Provenance {
            master_seed: cfg.master_seed,
            version: VERSION.to_string(),
            graph_fingerprint: g.fingerprint(),
            vertices: g.n(),
            edges: g.edge_count(),
        },
        reference_lines,
        curves: Vec::new(),
        complete: false,
        error: None,
    };

    let store = TableStore::new(g.clone(), cfg.sampler.enumeration_budget, cfg.sampler.cache_dir.clone());
    let ctx = Context {
        cfg,
        graph: g,
        store: &store,
    };
    for &method in &cfg.methods {
        let outcome = map_indices(cfg.repetitions, |rep| ctx.run(method, rep))
            .into_iter()
            .collect::<Result<Vec<_>>>()
            .and_then(|traces| aggregate(method, &cfg.checkpoints, &traces));
        match outcome {
            Ok(curve) => result.curves.push(curve),
            Err(error) => {
                result.error = Some(format!("{method}: {error}"));
                return Err(Box::new(Fig3Failure {
                    error,
                    partial: Some(result),
                }));
            }
        }
    }
    result.complete = true;
    Ok(result)
}

/// Greedy peeling always; the exhaustive optimum when `C(n, k)` fits the
/// budget; the planted subgraph's edge count when known.
pub fn reference_lines(g: &Graph, k: usize, budget: u64, planted_edges: Option<usize>) -> Result<Vec<ReferenceLine>> {
    let greedy = charikar_greedy(g, k)?;
    let mut lines = vec![ReferenceLine {
        name: "greedy".into(),
        edges: g.induced_edge_count(greedy.indices()),
    }];
    if binomial(g.n(), k) <= u128::from(budget) {
        let (_, edges) = exhaustive_best(g, k, budget)?;
        lines.push(ReferenceLine {
            name: "optimum".into(),
            edges,
        });
    }
    if let Some(edges) = planted_edges {
        lines.push(ReferenceLine {
            name: "planted".into(),
            edges,
        });
    }
    Ok(lines)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub p: f64,
    /// Index of the graph among those drawn at this `p`.
    pub index: usize,
    pub edges: usize,
    /// Perfect-matching count, the Hafnian of the 0/1 adjacency matrix.
    pub hafnian: u64,
    /// Upper bound on the matching count for this many edges.
    pub pm_bound: f64,
    /// Fewest edges that permit `hafnian` matchings; absent when the count is 0.
    pub bound_edges: Option<usize>,
    /// No perfect matching, so the row cannot be drawn on a log axis.
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Table {
    pub k: usize,
    pub probs: Vec<f64>,
    pub per_p: usize,
    pub seed: u64,
    pub version: String,
    pub zero_rows: usize,
    pub rows: Vec<Fig1Row>,
}

/// Draws `per_p` Erdős–Rényi graphs on `k` vertices for each edge
/// probability and records each graph's matching count against the bound.
pub fn fig1_sweep(k: usize, probs: &[f64], per_p: usize, seed: u64) -> Result<Fig1Table> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::input(format!("the sweep needs an even vertex count, got {k}")));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::input("edge probabilities must lie in [0, 1]"));
    }
    let per_prob = map_indices(probs.len(), |pi| -> Result<Vec<Fig1Row>> {
        let p = probs[pi];
        let mut rng = run_stream(seed, FIG1_STREAM, pi as u32);
        (0..per_p)
            .map(|index| {
                let g = erdos_renyi_with(k, p, &mut rng)?;
                let edges = g.edge_count();
                let hafnian = graph_perfect_matchings(&g)?;
                Ok(Fig1Row {
                    p,
                    index,
                    edges,
                    hafnian,
                    pm_bound: pm_upper_bound(PmBoundInput::new(k, edges)?),
                    bound_edges: match hafnian {
                        0 => None,
                        h => Some(min_edges_for_pm(k, u128::from(h))?),
                    },
                    zero: hafnian == 0,
                })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(probs.len() * per_p);
    for chunk in per_prob {
        rows.extend(chunk?);
    }
    Ok(Fig1Table {
        k,
        probs: probs.to_vec(),
        per_p,
        seed,
        version: VERSION.to_string(),
        zero_rows: rows.iter().filter(|r| r.zero).count(),
        rows,
    })
}
