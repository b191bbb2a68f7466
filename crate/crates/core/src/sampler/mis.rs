//! Metropolized independent sampling of the squared-Hafnian distribution.
//!
//! Proposals are uniform k-subsets; a proposal `S'` replaces the current
//! state `S` with probability `min(1, w(S') / w(S))`, `w = Haf^2`. No table
//! is built, so this works when `C(n, k)` is too large to enumerate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hafnian::{perfect_matchings_unchecked, MAX_MATCHING_VERTICES};
use crate::subset::{uniform_subset, VertexSubset};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MisParams {
    pub burn_in: u64,
    /// Chain steps between retained samples (at least 1).
    pub thinning: u64,
    /// Uniform proposals tried when looking for a nonzero starting state.
    pub init_attempts: u64,
}

impl Default for MisParams {
    fn default() -> Self {
        MisParams {
            burn_in: 10_000,
            thinning: 10,
            init_attempts: 100_000,
        }
    }
}

impl MisParams {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::input("MIS thinning must be at least 1"));
        }
        Ok(())
    }
}

/// `Haf(A_S)^2` for the subgraph of `g` induced by `s`.
pub fn squared_hafnian(g: &Graph, s: &[usize]) -> u64 {
    let pm = perfect_matchings_unchecked(&g.local_rows(s));
    pm.saturating_mul(pm)
}

/// A running independence-sampler chain. Iterating yields one retained
/// state per `thinning` steps, after `burn_in` initial steps.
#[derive(Clone, Debug)]
pub struct MisChain<'g, R> {
    graph: &'g Graph,
    k: usize,
    params: MisParams,
    rng: R,
    state: VertexSubset,
    weight: u64,
    burned_in: bool,
    proposed: u64,
    accepted: u64,
}

/// Starts a chain: finds a nonzero-weight state by uniform proposals, then
/// samples are produced lazily by the returned iterator.
pub fn mis_sample<R: Rng>(g: &Graph, k: usize, params: MisParams, mut rng: R) -> Result<MisChain<'_, R>> {
    params.validate()?;
    if k % 2 == 1 || k == 0 || k > g.n() || k > MAX_MATCHING_VERTICES {
        return Err(Error::input(format!(
            "MIS needs an even subset size in 2..={}, got {k}",
            g.n().min(MAX_MATCHING_VERTICES)
        )));
    }
    for _ in 0..params.init_attempts {
        let s = uniform_subset(&mut rng, g.n(), k);
        let w = squared_hafnian(g, s.indices());
        if w > 0 {
            return Ok(MisChain {
                graph: g,
                k,
                params,
                rng,
                state: s,
                weight: w,
                burned_in: false,
                proposed: 0,
                accepted: 0,
            });
        }
    }
    Err(Error::NoNonzeroState {
        k,
        attempts: params.init_attempts,
    })
}

impl<R: Rng> MisChain<'_, R> {
    pub fn state(&self) -> &VertexSubset {
        &self.state
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Applies the Metropolis rule to a given proposal. Returns whether it
    /// was accepted.
    pub fn offer(&mut self, proposal: VertexSubset) -> bool {
        let w = squared_hafnian(self.graph, proposal.indices());
        self.proposed += 1;
        let accept = if w >= self.weight {
            true
        } else if w == 0 {
            false
        } else {
            self.rng.random::<f64>() < w as f64 / self.weight as f64
        };
        if accept {
            self.state = proposal;
            self.weight = w;
            self.accepted += 1;
        }
        accept
    }

    /// One chain step with a uniform proposal.
    pub fn step(&mut self) -> bool {
        let proposal = uniform_subset(&mut self.rng, self.graph.n(), self.k);
        self.offer(proposal)
    }
}

impl<R: Rng> Iterator for MisChain<'_, R> {
    type Item = VertexSubset;

    fn next(&mut self) -> Option<VertexSubset> {
        if !self.burned_in {
            for _ in 0..self.params.burn_in {
                self.step();
            }
            self.burned_in = true;
        }
        for _ in 0..self.params.thinning {
            self.step();
        }
        Some(self.state.clone())
    }
}
