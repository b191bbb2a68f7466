//! Classical simulation of Hafnian-weighted subgraph sampling and its use
//! in stochastic densest-k-subgraph search.
//!
//! A k-vertex subset `S` of a graph is drawn with probability proportional
//! to `Haf(A_S)^2`, the squared number of perfect matchings of the induced
//! subgraph. Dense subgraphs have many perfect matchings, so this
//! distribution concentrates on them. The crate provides:
//!
//! * [`graph`]: adjacency storage, random and planted instances, file I/O
//! * [`hafnian`]: exact Hafnians and the matching/edge-count bound
//! * [`sampler`]: weight tables, exact and MCMC samplers, explore and tweak
//! * [`optimize`]: random search, simulated annealing, greedy peeling,
//!   exhaustive search
//! * [`harness`]: experiment sweeps, aggregation and CSV/JSON/SVG output

pub mod error;
pub mod graph;
pub mod hafnian;
pub mod harness;
pub mod io;
pub mod optimize;
pub mod rng;
pub mod sampler;
pub mod subset;

pub use error::{Error, Result};
pub use graph::Graph;
pub use subset::VertexSubset;
