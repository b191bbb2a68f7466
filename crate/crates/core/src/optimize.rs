//! Densest-k-subgraph solvers.
//!
//! The two stochastic solvers are generic over [`Explorer`] and [`Tweaker`],
//! so swapping uniform for Hafnian-weighted randomness changes the draws
//! but not the control flow.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};
use crate::sampler::{Draw, Explorer, Fallback, Tweaker};
use crate::subset::{binomial, VertexSubset};

/// Temperature floor of the linear schedule, so the last step never
/// divides by zero.
pub const DEFAULT_TEMPERATURE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Cooling {
    /// `t_a = max(t0 (1 - a / steps), floor)` after step `a`.
    Linear {
        #[serde(default = "default_floor")]
        floor: f64,
    },
    /// Fixed temperature.
    Constant,
}

fn default_floor() -> f64 {
    DEFAULT_TEMPERATURE_FLOOR
}

impl Default for Cooling {
    fn default() -> Self {
        Cooling::Linear {
            floor: DEFAULT_TEMPERATURE_FLOOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealParams {
    /// Initial temperature.
    pub t0: f64,
    #[serde(default)]
    pub cooling: Cooling,
    /// Minimum number of untweaked vertices (even, `2 <= l < k`).
    pub l: usize,
    /// Number of tweak steps.
    pub steps: usize,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            t0: 0.01,
            cooling: Cooling::default(),
            l: 6,
            steps: 500,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.t0 <= 0.0 || !self.t0.is_finite() {
            return Err(Error::input(format!(
                "initial temperature must be positive, got {}",
                self.t0
            )));
        }
        if let Cooling::Linear { floor } = self.cooling {
            if floor.is_nan() || floor <= 0.0 {
                return Err(Error::input("temperature floor must be positive"));
            }
        }
        if k % 2 == 1 {
            return Err(Error::input(format!("simulated annealing needs an even k, got {k}")));
        }
        if self.l % 2 == 1 || self.l < 2 || self.l >= k {
            return Err(Error::input(format!(
                "untweaked count l must be even with 2 <= l < k = {k}, got {}",
                self.l
            )));
        }
        if self.steps == 0 {
            return Err(Error::input("annealing needs at least one step"));
        }
        Ok(())
    }

    /// Temperature in effect after `step` steps.
    pub fn temperature_after(&self, step: usize) -> f64 {
        match self.cooling {
            Cooling::Constant => self.t0,
            Cooling::Linear { floor } => {
                let t = self.t0 * (1.0 - step as f64 / self.steps as f64);
                t.max(floor)
            }
        }
    }
}

/// Best-so-far history of one solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// `best_edges[i]` is the best induced edge count after
    /// `draw_offset + i + 1` explore/tweak draws.
    pub best_edges: Vec<usize>,
    /// Draws consumed before the first traced step (1 for annealing, whose
    /// trace starts after the initial exploration).
    pub draw_offset: usize,
    /// Best edge count after the first `draw_offset` draws.
    pub initial_edges: usize,
    pub final_subset: VertexSubset,
    pub samples_used: usize,
    pub fallbacks: BTreeMap<Fallback, usize>,
}

impl RunTrace {
    pub fn final_edges(&self) -> usize {
        self.best_edges.last().copied().unwrap_or(self.initial_edges)
    }

    /// Best edge count after exactly `draws` draws, if the run got that far.
    pub fn best_after_draws(&self, draws: usize) -> Option<usize> {
        if draws == 0 || draws < self.draw_offset {
            return None;
        }
        if draws == self.draw_offset {
            return Some(self.initial_edges);
        }
        self.best_edges.get(draws - self.draw_offset - 1).copied()
    }

    /// Total draws covered by the trace.
    pub fn draws(&self) -> usize {
        self.draw_offset + self.best_edges.len()
    }

    fn record(&mut self, draw: &Draw) {
        for f in &draw.fallbacks {
            *self.fallbacks.entry(*f).or_insert(0) += 1;
        }
    }
}

/// Draws `n_samples` subsets and keeps the one with the most edges.
pub fn random_search<E, R>(g: &Graph, k: usize, n_samples: usize, explorer: &mut E, rng: &mut R) -> Result<RunTrace>
where
    E: Explorer,
    R: Rng + ?Sized,
{
    if n_samples == 0 {
        return Err(Error::input("random search needs at least one sample"));
    }
    if k == 0 || k > g.n() {
        return Err(Error::input(format!("subset size {k} outside 1..={}", g.n())));
    }
    let mut trace: Option<RunTrace> = None;
    for _ in 0..n_samples {
        let draw = explorer.explore(k, rng)?;
        let edges = g.induced_edge_count(draw.subset.indices());
        let t = trace.get_or_insert_with(|| RunTrace {
            best_edges: Vec::with_capacity(n_samples),
            draw_offset: 0,
            initial_edges: 0,
            final_subset: draw.subset.clone(),
            samples_used: 0,
            fallbacks: BTreeMap::new(),
        });
        t.record(&draw);
        t.samples_used += 1;
        let best = t.best_edges.last().copied();
        if best.is_none_or(|b| edges > b) {
            t.final_subset = draw.subset;
            t.best_edges.push(edges);
        } else {
            t.best_edges.push(best.unwrap_or(0));
        }
    }
    Ok(trace.expect("at least one sample"))
}

/// What happened at one annealing step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Temperature used for this step's acceptance decision.
    pub temperature: f64,
    /// Induced edges of the proposal minus those of the current state.
    pub delta_edges: i64,
    /// The same gap on the normalised density scale.
    pub delta_density: f64,
    pub accepted: bool,
}

pub fn simulated_annealing<E, T, R>(
    g: &Graph,
    k: usize,
    params: &AnnealParams,
    explorer: &mut E,
    tweaker: &mut T,
    rng: &mut R,
) -> Result<RunTrace>
where
    E: Explorer,
    T: Tweaker,
    R: Rng + ?Sized,
{
    simulated_annealing_observed(g, k, params, explorer, tweaker, rng, |_| {})
}

/// Simulated annealing on normalised density, calling `observe` after
/// every step.
///
/// A proposal `R` from the tweaker replaces the current `S` if it is
/// denser, and otherwise with probability `exp((density(R) - density(S)) / t)`.
/// The best state is tracked separately and the temperature is lowered
/// once per step, after the best-state update.
pub fn simulated_annealing_observed<E, T, R, F>(
    g: &Graph,
    k: usize,
    params: &AnnealParams,
    explorer: &mut E,
    tweaker: &mut T,
    rng: &mut R,
    mut observe: F,
) -> Result<RunTrace>
where
    E: Explorer,
    T: Tweaker,
    R: Rng + ?Sized,
    F: FnMut(&StepRecord),
{
    params.validate(k)?;
    if k > g.n() {
        return Err(Error::input(format!("subset size {k} exceeds {} vertices", g.n())));
    }
    let pairs = pair_count(k) as f64;

    let start = explorer.explore(k, rng)?;
    let mut current = start.subset.clone();
    let mut current_edges = g.induced_edge_count(current.indices());
    let mut best = current.clone();
    let mut best_edges = current_edges;
    let mut trace = RunTrace {
        best_edges: Vec::with_capacity(params.steps),
        draw_offset: 1,
        initial_edges: current_edges,
        final_subset: best.clone(),
        samples_used: 1,
        fallbacks: BTreeMap::new(),
    };
    trace.record(&start);

    let mut t = params.t0;
    for step in 1..=params.steps {
        let proposal = tweaker.tweak(&current, params.l, rng)?;
        trace.record(&proposal);
        trace.samples_used += 1;
        let proposal_edges = g.induced_edge_count(proposal.subset.indices());
        let delta_edges = proposal_edges as i64 - current_edges as i64;
        let delta_density = delta_edges as f64 / pairs;
        let accepted = if delta_edges > 0 {
            true
        } else {
            rng.random::<f64>() < (delta_density / t).exp()
        };
        observe(&StepRecord {
            step,
            temperature: t,
            delta_edges,
            delta_density,
            accepted,
        });
        if accepted {
            current = proposal.subset;
            current_edges = proposal_edges;
        }
        if current_edges > best_edges {
            best = current.clone();
            best_edges = current_edges;
        }
        t = params.temperature_after(step);
        trace.best_edges.push(best_edges);
    }
    trace.final_subset = best;
    Ok(trace)
}

/// Greedy peeling: repeatedly deletes a minimum-degree vertex of the
/// remaining graph (lowest index on ties) until `k` vertices are left.
pub fn charikar_greedy(g: &Graph, k: usize) -> Result<VertexSubset> {
    let n = g.n();
    if k > n {
        return Err(Error::input(format!("cannot keep {k} of {n} vertices")));
    }
    let mut alive = vec![true; n];
    let mut degree = g.degrees();
    for _ in 0..n - k {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("vertices remain");
        alive[v] = false;
        for u in g.neighbors(v) {
            if alive[u] {
                degree[u] -= 1;
            }
        }
    }
    VertexSubset::new((0..n).filter(|&v| alive[v]).collect())
}

/// The k-subset with the most induced edges (lexicographically smallest on
/// ties) and its edge count, by exhaustive enumeration.
pub fn exhaustive_best(g: &Graph, k: usize, budget: u64) -> Result<(VertexSubset, usize)> {
    let n = g.n();
    if k > n {
        return Err(Error::input(format!("cannot choose {k} of {n} vertices")));
    }
    let needed = binomial(n, k);
    if needed > u128::from(budget) {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut search = Exhaustive {
        g,
        k,
        chosen: Vec::with_capacity(k),
        best: None,
    };
    search.descend(0, 0);
    let (subset, edges) = search.best.expect("at least one subset");
    Ok((VertexSubset::new(subset)?, edges))
}

struct Exhaustive<'a> {
    g: &'a Graph,
    k: usize,
    chosen: Vec<usize>,
    best: Option<(Vec<usize>, usize)>,
}

impl Exhaustive<'_> {
    fn descend(&mut self, start: usize, edges: usize) {
        let depth = self.chosen.len();
        if depth == self.k {
            if self.best.as_ref().is_none_or(|(_, b)| edges > *b) {
                self.best = Some((self.chosen.clone(), edges));
            }
            return;
        }
        // Even a complete completion cannot beat the incumbent.
        if let Some((_, b)) = &self.best {
            let rest = self.k - depth;
            let bound = edges + rest * depth + rest * (rest - 1) / 2;
            if bound <= *b {
                return;
            }
        }
        for v in start..=self.g.n() - (self.k - depth) {
            let added = self.chosen.iter().filter(|&&u| self.g.has_edge(u, v)).count();
            self.chosen.push(v);
            self.descend(v + 1, edges + added);
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, planted_instance};
    use crate::rng::seeded;
    use crate::sampler::{Gbs, TableStore, Uniform, DEFAULT_ENUMERATION_BUDGET};
    use crate::subset::for_each_subset;

    #[test]
    fn greedy_examples() {
        let k7 = Graph::complete(7).unwrap();
        assert_eq!(charikar_greedy(&k7, 4).unwrap().indices(), &[3, 4, 5, 6]);
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(charikar_greedy(&g, 3).unwrap().indices(), &[0, 1, 2]);
        assert_eq!(charikar_greedy(&g, 5).unwrap(), VertexSubset::full(5));
        assert!(charikar_greedy(&g, 6).is_err());
    }

    #[test]
    fn exhaustive_examples() {
        let k8 = Graph::complete(8).unwrap();
        assert_eq!(exhaustive_best(&k8, 5, 1000).unwrap(), (VertexSubset::full(5), 10));
        let mut edges: Vec<(usize, usize)> = Graph::complete(5).unwrap().edges().collect();
        edges.extend([(5, 6), (5, 7), (6, 7)]);
        let g = Graph::from_edges(8, edges).unwrap();
        assert_eq!(exhaustive_best(&g, 3, 1000).unwrap(), (VertexSubset::full(3), 3));
        assert!(matches!(exhaustive_best(&k8, 4, 10), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        for seed in 0..30 {
            let g = erdos_renyi(11, 0.45, seed).unwrap();
            let k = 3 + (seed as usize % 5);
            let mut want: Option<(Vec<usize>, usize)> = None;
            for_each_subset(11, k, |s| {
                let e = g.induced_edge_count(s);
                if want.as_ref().is_none_or(|(_, b)| e > *b) {
                    want = Some((s.to_vec(), e));
                }
                true
            });
            let (s, e) = exhaustive_best(&g, k, 1 << 20).unwrap();
            assert_eq!((s.into_vec(), e), want.unwrap());
        }
    }

    #[test]
    fn random_search_on_complete_graph() {
        let g = Graph::complete(9).unwrap();
        let mut u = Uniform::new(&g);
        let t = random_search(&g, 4, 1, &mut u, &mut seeded(0)).unwrap();
        assert_eq!(t.best_edges, vec![6]);
        assert_eq!(t.best_after_draws(1), Some(6));
        assert_eq!(t.best_after_draws(2), None);
        assert!(random_search(&g, 4, 0, &mut u, &mut seeded(0)).is_err());
    }

    #[test]
    fn random_search_finds_the_only_clique() {
        // K4 plus isolated vertices: the only 4-subset with a perfect matching.
        let g = Graph::from_edges(10, Graph::complete(4).unwrap().edges()).unwrap();
        let store = TableStore::new(g.clone(), DEFAULT_ENUMERATION_BUDGET, None);
        let mut gbs = Gbs::new(&store);
        let t = random_search(&g, 4, 1, &mut gbs, &mut seeded(3)).unwrap();
        assert_eq!(t.final_subset.indices(), &[0, 1, 2, 3]);
        assert_eq!(t.best_edges, vec![6]);
    }

    #[test]
    fn traces_are_monotone_and_bounded() {
        let inst = planted_instance(2);
        let g = &inst.graph;
        let store = TableStore::new(g.clone(), DEFAULT_ENUMERATION_BUDGET, None);
        let params = AnnealParams {
            steps: 200,
            ..AnnealParams::default()
        };
        let mut rng = seeded(8);
        // k = 6 keeps the exact tables small.
        let (_, opt) = exhaustive_best(g, 6, DEFAULT_ENUMERATION_BUDGET).unwrap();
        for _ in 0..5 {
            let traces = [
                random_search(g, 6, 100, &mut Gbs::new(&store), &mut rng).unwrap(),
                random_search(g, 6, 100, &mut Uniform::new(g), &mut rng).unwrap(),
                simulated_annealing(
                    g,
                    6,
                    &AnnealParams { l: 2, ..params },
                    &mut Gbs::new(&store),
                    &mut Uniform::new(g),
                    &mut rng,
                )
                .unwrap(),
                simulated_annealing(
                    g,
                    6,
                    &AnnealParams { l: 4, ..params },
                    &mut Uniform::new(g),
                    &mut Gbs::new(&store),
                    &mut rng,
                )
                .unwrap(),
            ];
            for t in traces {
                assert!(t.best_edges.windows(2).all(|w| w[0] <= w[1]));
                assert!(t.final_edges() <= opt);
                assert!(t.initial_edges <= t.best_edges[0] || t.draw_offset == 0);
                assert_eq!(g.induced_edge_count(t.final_subset.indices()), t.final_edges());
            }
        }
    }

    #[test]
    fn annealing_trace_shape() {
        let g = erdos_renyi(14, 0.5, 1).unwrap();
        let params = AnnealParams {
            steps: 37,
            l: 2,
            ..AnnealParams::default()
        };
        let t = simulated_annealing(
            &g,
            6,
            &params,
            &mut Uniform::new(&g),
            &mut Uniform::new(&g),
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(t.best_edges.len(), 37);
        assert_eq!(t.samples_used, 38);
        assert_eq!(t.draws(), 38);
        assert_eq!(t.best_after_draws(1), Some(t.initial_edges));
        assert_eq!(t.best_after_draws(38), Some(t.final_edges()));
    }

    #[test]
    fn annealing_is_reproducible() {
        let inst = planted_instance(4);
        let g = &inst.graph;
        let store = TableStore::new(g.clone(), DEFAULT_ENUMERATION_BUDGET, None);
        let params = AnnealParams {
            steps: 100,
            l: 2,
            ..AnnealParams::default()
        };
        let run = || {
            simulated_annealing(
                g,
                6,
                &params,
                &mut Gbs::new(&store),
                &mut Gbs::new(&store),
                &mut seeded(77),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn parameter_validation() {
        let ok = AnnealParams::default();
        assert!(ok.validate(10).is_ok());
        assert!(ok.validate(9).is_err());
        assert!(ok.validate(6).is_err());
        assert!(AnnealParams { l: 3, ..ok }.validate(10).is_err());
        assert!(AnnealParams { l: 0, ..ok }.validate(10).is_err());
        assert!(AnnealParams { t0: 0.0, ..ok }.validate(10).is_err());
        assert!(AnnealParams { steps: 0, ..ok }.validate(10).is_err());
    }

    #[test]
    fn linear_schedule() {
        let p = AnnealParams {
            t0: 1.0,
            steps: 4,
            ..AnnealParams::default()
        };
        let temps: Vec<f64> = (1..=4).map(|a| p.temperature_after(a)).collect();
        assert_eq!(&temps[..3], &[0.75, 0.5, 0.25]);
        assert_eq!(temps[3], DEFAULT_TEMPERATURE_FLOOR);
        let c = AnnealParams {
            cooling: Cooling::Constant,
            ..p
        };
        assert_eq!(c.temperature_after(4), 1.0);
    }

    #[test]
    fn cold_annealing_never_accepts_worse() {
        let inst = planted_instance(6);
        let g = &inst.graph;
        let params = AnnealParams {
            t0: 1e-12,
            cooling: Cooling::Constant,
            l: 6,
            steps: 100_000,
        };
        let mut worse_accepted = 0;
        simulated_annealing_observed(
            g,
            10,
            &params,
            &mut Uniform::new(g),
            &mut Uniform::new(g),
            &mut seeded(5),
            |r| worse_accepted += (r.accepted && r.delta_edges < 0) as usize,
        )
        .unwrap();
        assert_eq!(worse_accepted, 0);
        // One lost edge at k = 10.
        assert!((-1.0f64 / 45.0 / 1e-12).exp() < 1e-6);
    }

    #[test]
    fn hot_annealing_accepts_everything() {
        let g = erdos_renyi(20, 0.5, 3).unwrap();
        let params = AnnealParams {
            t0: 1e12,
            cooling: Cooling::Constant,
            l: 4,
            steps: 2000,
        };
        let mut rejected = 0;
        let t = simulated_annealing_observed(
            &g,
            8,
            &params,
            &mut Uniform::new(&g),
            &mut Uniform::new(&g),
            &mut seeded(6),
            |r| rejected += (!r.accepted) as usize,
        )
        .unwrap();
        assert_eq!(rejected, 0);
        assert!(t.best_edges.windows(2).all(|w| w[0] <= w[1]));
    }
}
