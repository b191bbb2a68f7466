//! Sampling k-vertex subgraphs with probability proportional to
//! `Haf(A_S)^2`, plus the uniform counterparts used as baselines.
//!
//! Exploration draws a whole k-subset. Tweaking keeps part of a candidate
//! and replaces the rest:
//!
//! 1. draw an `l`-subset `R` of the candidate (Hafnian-weighted over the
//!    candidate's induced subgraph, or uniform), draw `m` uniformly from
//!    `0..k-l` and add `m` more uniformly chosen candidate vertices: the
//!    kept set has `l + m` vertices;
//! 2. draw a `(k-l)`-subset `T` of the whole graph and drop `m` of its
//!    vertices uniformly; if what remains meets the kept set, draw again;
//! 3. return the union.
//!
//! Every routine is total: when a weighted draw is impossible (no subset
//! has a perfect matching) or step 2 keeps colliding, a uniform draw is
//! substituted and a [`Fallback`] is reported alongside the result.

mod mis;
mod spectral;
mod table;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

pub use mis::{mis_sample, squared_hafnian, MisChain, MisParams};
pub use spectral::{spectral_radius, Spectrum};
pub use table::{TableStore, WeightTable, DEFAULT_ENUMERATION_BUDGET};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hafnian::perfect_matchings_unchecked;
use crate::rng::ChaCha8Rng;
use crate::subset::{for_each_subset, uniform_subset, uniform_subset_of, VertexSubset};

/// Resamples of tweak step 2 before falling back to a uniform disjoint
/// replacement.
pub const DEFAULT_RETRY_BUDGET: usize = 1000;

/// A condition under which a weighted draw was replaced by a uniform one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    /// No subset of the requested size has a perfect matching.
    EmptyDistribution,
    /// Tweak step 2 kept intersecting the kept set.
    RetryBudgetExhausted,
    /// The MIS chain found no nonzero-weight start state.
    NoNonzeroState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draw {
    pub subset: VertexSubset,
    pub fallbacks: Vec<Fallback>,
}

impl Draw {
    fn clean(subset: VertexSubset) -> Self {
        Draw {
            subset,
            fallbacks: Vec::new(),
        }
    }
}

/// Global candidate generation.
pub trait Explorer {
    fn explore<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Draw>;
}

/// Local modification of a candidate, leaving at least `l` vertices.
pub trait Tweaker {
    fn tweak<R: Rng + ?Sized>(&mut self, s: &VertexSubset, l: usize, rng: &mut R) -> Result<Draw>;
}

/// Draws from an exact table.
pub fn gbs_explore<R: Rng + ?Sized>(table: &WeightTable, rng: &mut R) -> Result<VertexSubset> {
    table.sample(rng)
}

/// Uniformly random k-subset of the graph's vertices.
pub fn uniform_explore<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<VertexSubset> {
    if k > g.n() {
        return Err(Error::input(format!("cannot choose {k} of {} vertices", g.n())));
    }
    Ok(uniform_subset(rng, g.n(), k))
}

/// Drops the vertex of lowest degree within the induced subgraph (lowest
/// index on ties).
pub fn remove_min_degree(g: &Graph, s: &VertexSubset) -> VertexSubset {
    let idx = s.indices();
    let degree = |v: usize| idx.iter().filter(|&&u| g.has_edge(u, v)).count();
    let (pos, _) = idx
        .iter()
        .enumerate()
        .min_by_key(|&(i, &v)| (degree(v), i))
        .expect("cannot remove a vertex from an empty subset");
    let mut out = idx.to_vec();
    out.remove(pos);
    VertexSubset::new(out).expect("still sorted")
}

/// Odd-k exploration: draws a `(k+1)`-subset from the table of `store` and
/// removes its minimum-degree vertex.
pub fn gbs_explore_odd<R: Rng + ?Sized>(store: &TableStore, k: usize, rng: &mut R) -> Result<VertexSubset> {
    if k.is_multiple_of(2) {
        return Err(Error::input(format!("odd-k exploration called with even k = {k}")));
    }
    if k + 1 > store.graph().n() {
        return Err(Error::input(format!(
            "odd-k exploration needs k + 1 <= n, got k = {k}, n = {}",
            store.graph().n()
        )));
    }
    let larger = store.get(k + 1)?.sample(rng)?;
    Ok(remove_min_degree(store.graph(), &larger))
}

/// Draws a `size`-subset of `pool` with probability proportional to the
/// squared Hafnian of its induced subgraph. `None` if every weight is 0.
fn weighted_subset_of<R: Rng + ?Sized>(
    g: &Graph,
    pool: &VertexSubset,
    size: usize,
    rng: &mut R,
) -> Option<VertexSubset> {
    if size == 0 {
        return Some(VertexSubset::new(Vec::new()).expect("empty"));
    }
    let local = g.local_rows(pool.indices());
    let mut picks: Vec<Vec<usize>> = Vec::new();
    let mut cumulative: Vec<u64> = Vec::new();
    let mut total = 0u64;
    let mut rows = vec![0u64; size];
    for_each_subset(pool.len(), size, |pos| {
        for (i, &p) in pos.iter().enumerate() {
            let mut r = 0u64;
            for (j, &q) in pos.iter().enumerate() {
                r |= (local[p] >> q & 1) << j;
            }
            rows[i] = r;
        }
        let pm = perfect_matchings_unchecked(&rows);
        if pm > 0 {
            total += pm * pm;
            picks.push(pos.to_vec());
            cumulative.push(total);
        }
        true
    });
    if total == 0 {
        return None;
    }
    let u = rng.random_range(0..total);
    let i = cumulative.partition_point(|&c| c <= u);
    Some(pool.select(picks[i].iter().copied()))
}

fn check_tweak_args(g: &Graph, s: &VertexSubset, l: usize) -> Result<()> {
    s.check_bounds(g.n())?;
    if l % 2 == 1 {
        return Err(Error::input(format!("untweaked count l must be even, got {l}")));
    }
    if l >= s.len() {
        return Err(Error::input(format!(
            "untweaked count l = {l} must be below the subset size {}",
            s.len()
        )));
    }
    Ok(())
}

/// Shared three-step tweak. `first` draws `R`, `second` draws `T`; each may
/// return `None` to request the uniform fallback for that step.
fn tweak_with<R, F, S>(
    g: &Graph,
    s: &VertexSubset,
    l: usize,
    rng: &mut R,
    retry_budget: usize,
    mut first: F,
    mut second: S,
) -> Result<Draw>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<Option<VertexSubset>>,
    S: FnMut(&mut R) -> Result<Option<VertexSubset>>,
{
    check_tweak_args(g, s, l)?;
    let k = s.len();
    let mut fallbacks = Vec::new();

    // Step 1: the kept set.
    let r = match first(rng)? {
        Some(r) => r,
        None => {
            fallbacks.push(Fallback::EmptyDistribution);
            uniform_subset_of(rng, s, l)
        }
    };
    let m = rng.random_range(0..k - l);
    let extension = uniform_subset_of(rng, &s.difference(&r), m);
    let keep = r.union(&extension);

    // Step 2: the replacement set, redrawn while it collides with `keep`.
    let mut replace = None;
    let mut empty_reported = false;
    for _ in 0..retry_budget {
        let t = match second(rng)? {
            Some(t) => t,
            None => {
                if !empty_reported {
                    fallbacks.push(Fallback::EmptyDistribution);
                    empty_reported = true;
                }
                uniform_subset(rng, g.n(), k - l)
            }
        };
        let candidate = uniform_subset_of(rng, &t, k - l - m);
        if !candidate.intersects(&keep) {
            replace = Some(candidate);
            break;
        }
    }
    let replace = match replace {
        Some(r) => r,
        None => {
            fallbacks.push(Fallback::RetryBudgetExhausted);
            let outside = VertexSubset::full(g.n()).difference(&keep);
            uniform_subset_of(rng, &outside, k - l - m)
        }
    };

    // Step 3.
    let subset = keep.union(&replace);
    debug_assert_eq!(subset.len(), k);
    Ok(Draw { subset, fallbacks })
}

/// Hafnian-weighted tweak of `s`. Step 1 weights the l-subsets of `s`
/// within its induced subgraph; step 2 draws from the `(k-l)`-table of the
/// whole graph held by `store`.
pub fn gbs_tweak<R: Rng + ?Sized>(
    store: &TableStore,
    s: &VertexSubset,
    l: usize,
    rng: &mut R,
    retry_budget: usize,
) -> Result<Draw> {
    let g = store.graph();
    check_tweak_args(g, s, l)?;
    let replacement_table = store.get(s.len() - l)?;
    tweak_with(
        g,
        s,
        l,
        rng,
        retry_budget,
        |rng| Ok(weighted_subset_of(g, s, l, rng)),
        |rng| match replacement_table.sample(rng) {
            Ok(t) => Ok(Some(t)),
            Err(Error::EmptyDistribution { .. }) => Ok(None),
            Err(e) => Err(e),
        },
    )
}

/// The same three steps with both weighted draws replaced by uniform ones.
pub fn uniform_tweak<R: Rng + ?Sized>(
    g: &Graph,
    s: &VertexSubset,
    l: usize,
    rng: &mut R,
    retry_budget: usize,
) -> Result<Draw> {
    let k = s.len();
    tweak_with(
        g,
        s,
        l,
        rng,
        retry_budget,
        |rng| Ok(Some(uniform_subset_of(rng, s, l))),
        |rng| Ok(Some(uniform_subset(rng, g.n(), k.saturating_sub(l)))),
    )
}

/// Uniform exploration and tweaking.
#[derive(Clone, Copy, Debug)]
pub struct Uniform<'g> {
    pub graph: &'g Graph,
    pub retry_budget: usize,
}

impl<'g> Uniform<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Uniform {
            graph,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }
}

impl Explorer for Uniform<'_> {
    fn explore<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Draw> {
        uniform_explore(self.graph, k, rng).map(Draw::clean)
    }
}

impl Tweaker for Uniform<'_> {
    fn tweak<R: Rng + ?Sized>(&mut self, s: &VertexSubset, l: usize, rng: &mut R) -> Result<Draw> {
        uniform_tweak(self.graph, s, l, rng, self.retry_budget)
    }
}

/// Exact Hafnian-weighted exploration and tweaking backed by a table store.
#[derive(Clone, Copy, Debug)]
pub struct Gbs<'s> {
    pub store: &'s TableStore,
    pub retry_budget: usize,
}

impl<'s> Gbs<'s> {
    pub fn new(store: &'s TableStore) -> Self {
        Gbs {
            store,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }
}

impl Explorer for Gbs<'_> {
    fn explore<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Draw> {
        let g = self.store.graph();
        let drawn = if k.is_multiple_of(2) {
            self.store.get(k)?.sample(rng)
        } else {
            gbs_explore_odd(self.store, k, rng)
        };
        match drawn {
            Ok(s) => Ok(Draw::clean(s)),
            Err(Error::EmptyDistribution { .. }) => Ok(Draw {
                subset: uniform_explore(g, k, rng)?,
                fallbacks: vec![Fallback::EmptyDistribution],
            }),
            Err(e) => Err(e),
        }
    }
}

impl Tweaker for Gbs<'_> {
    fn tweak<R: Rng + ?Sized>(&mut self, s: &VertexSubset, l: usize, rng: &mut R) -> Result<Draw> {
        gbs_tweak(self.store, s, l, rng, self.retry_budget)
    }
}

/// Exploration by a persistent MIS chain, for graphs whose k-table is too
/// large to enumerate. The chain's own stream is seeded from the caller's
/// RNG on first use.
#[derive(Debug)]
pub struct MisExplorer<'g> {
    graph: &'g Graph,
    params: MisParams,
    chain: Option<MisChain<'g, ChaCha8Rng>>,
    exhausted: bool,
}

impl<'g> MisExplorer<'g> {
    pub fn new(graph: &'g Graph, params: MisParams) -> Self {
        MisExplorer {
            graph,
            params,
            chain: None,
            exhausted: false,
        }
    }
}

impl Explorer for MisExplorer<'_> {
    fn explore<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<Draw> {
        if self.chain.as_ref().is_some_and(|c| c.state().len() != k) {
            self.chain = None;
            self.exhausted = false;
        }
        if self.chain.is_none() && !self.exhausted {
            let seed = rng.random::<u64>();
            match mis_sample(self.graph, k, self.params, ChaCha8Rng::seed_from_u64(seed)) {
                Ok(c) => self.chain = Some(c),
                Err(Error::NoNonzeroState { .. }) => self.exhausted = true,
                Err(e) => return Err(e),
            }
        }
        match self.chain.as_mut() {
            Some(chain) => Ok(Draw::clean(chain.next().expect("MIS chain is infinite"))),
            None => Ok(Draw {
                subset: uniform_explore(self.graph, k, rng)?,
                fallbacks: vec![Fallback::NoNonzeroState],
            }),
        }
    }
}
