//! Simple undirected graphs stored as adjacency bitsets.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::subset::VertexSubset;

/// Symmetric, loop-free adjacency on `n >= 1` vertices.
///
/// Row `v` is a bitset of `words` little-endian `u64`s; bit `u` is set when
/// `u` and `v` are adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("a graph needs at least one vertex"));
        }
        let words = n.div_ceil(64);
        Ok(Graph {
            n,
            words,
            bits: vec![0; n * words],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(u, v);
            }
        }
        Ok(g)
    }

    /// Builds a graph from an edge list. Repeated edges collapse; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (u, v) in edges {
            g.check_edge(u, v)?;
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from a square 0/1 matrix, which must be symmetric with
    /// a zero diagonal.
    pub fn from_adjacency<T: AsRef<[bool]>>(rows: &[T]) -> Result<Self> {
        let n = rows.len();
        let mut g = Self::empty(n)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::validation(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] {
                return Err(Error::validation(format!("self-loop at vertex {i}")));
            }
            for (j, &a) in row.iter().enumerate() {
                if a != rows[j].as_ref()[i] {
                    return Err(Error::validation(format!("adjacency is not symmetric at ({i}, {j})")));
                }
                if a && i < j {
                    g.insert_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    fn check_edge(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!(
                "edge ({u}, {v}) out of range for {} vertices",
                self.n
            )));
        }
        if u == v {
            return Err(Error::validation(format!("self-loop at vertex {u}")));
        }
        Ok(())
    }

    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Neighbour bitset of `v`.
    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        if v >= self.n {
            return Err(Error::input(format!("vertex {v} out of range for {} vertices", self.n)));
        }
        Ok(self.row(v).iter().map(|w| w.count_ones() as usize).sum())
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|v| self.row(v).iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edge count over `n(n-1)/2`.
    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::input("density needs at least two vertices"));
        }
        Ok(self.edge_count() as f64 / pair_count(self.n) as f64)
    }

    /// Number of edges with both endpoints in `vertices` (assumed distinct).
    pub fn induced_edge_count(&self, vertices: &[usize]) -> usize {
        let mut count = 0;
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                count += self.has_edge(u, v) as usize;
            }
        }
        count
    }

    /// Induced subgraph on `s`; vertex `s[i]` becomes vertex `i`.
    pub fn subgraph(&self, s: &VertexSubset) -> Result<Graph> {
        s.check_bounds(self.n)?;
        if s.is_empty() {
            return Err(Error::input("cannot take the subgraph on an empty subset"));
        }
        let mut g = Graph::empty(s.len())?;
        let idx = s.indices();
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                if self.has_edge(idx[i], idx[j]) {
                    g.insert_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    /// Local adjacency rows of the subgraph induced by `vertices`, as one
    /// `u64` per vertex. Requires `vertices.len() <= 64`.
    pub fn local_rows(&self, vertices: &[usize]) -> Vec<u64> {
        assert!(vertices.len() <= 64, "local rows support at most 64 vertices");
        let mut rows = vec![0u64; vertices.len()];
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                if self.has_edge(vertices[i], vertices[j]) {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
            }
        }
        rows
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::input("permutation length differs from vertex count"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::input("not a permutation"));
            }
        }
        let mut g = Graph::empty(self.n)?;
        for (u, v) in self.edges() {
            g.insert_edge(perm[u], perm[v]);
        }
        Ok(g)
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|u| (0..self.n).map(|v| self.has_edge(u, v) as u8).collect())
            .collect()
    }

    /// Content hash of the vertex count and sorted edge list (16 hex digits).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for (u, v) in self.edges() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().fold(String::with_capacity(16), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

pub(crate) fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// G(n, p): each of the `n(n-1)/2` pairs is an edge independently with
/// probability `p`. Deterministic in `seed`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    erdos_renyi_with(n, p, &mut seeded(seed))
}

pub fn erdos_renyi_with<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("edge probability {p} outside [0, 1]")));
    }
    let mut g = Graph::empty(n)?;
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.insert_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Parameters of the planted dense-subgraph benchmark.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantedConfig {
    pub base_vertices: usize,
    pub base_p: f64,
    pub planted_vertices: usize,
    pub planted_q: f64,
    pub cross_edges: usize,
    /// Randomly relabel vertices after construction.
    pub shuffle: bool,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            base_vertices: 20,
            base_p: 0.5,
            planted_vertices: 10,
            planted_q: 0.875,
            cross_edges: 8,
            shuffle: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub planted: VertexSubset,
    /// Edge count of the planted subgraph, recorded at generation time.
    pub planted_edges: usize,
}

/// The default 30-vertex planted instance (planted part at indices 20..30).
pub fn planted_instance(seed: u64) -> PlantedInstance {
    planted_instance_with(&PlantedConfig::default(), seed).expect("default planted config is valid")
}

/// Builds `G(base, p)`, a disjoint `G(planted, q)` on the following indices,
/// then joins them with `cross_edges` distinct uniformly random
/// (base, planted) pairs.
pub fn planted_instance_with(cfg: &PlantedConfig, seed: u64) -> Result<PlantedInstance> {
    let (nb, np) = (cfg.base_vertices, cfg.planted_vertices);
    if nb == 0 || np == 0 {
        return Err(Error::input("both parts of a planted instance need vertices"));
    }
    if cfg.cross_edges > nb * np {
        return Err(Error::input(format!(
            "{} cross edges requested but only {} pairs exist",
            cfg.cross_edges,
            nb * np
        )));
    }
    let mut rng = seeded(seed);
    let base = erdos_renyi_with(nb, cfg.base_p, &mut rng)?;
    let planted = erdos_renyi_with(np, cfg.planted_q, &mut rng)?;

    let mut g = Graph::empty(nb + np)?;
    for (u, v) in base.edges() {
        g.insert_edge(u, v);
    }
    for (u, v) in planted.edges() {
        g.insert_edge(nb + u, nb + v);
    }
    let mut added = 0;
    while added < cfg.cross_edges {
        let b = rng.random_range(0..nb);
        let p = nb + rng.random_range(0..np);
        if !g.has_edge(b, p) {
            g.insert_edge(b, p);
            added += 1;
        }
    }

    let mut members: Vec<usize> = (nb..nb + np).collect();
    if cfg.shuffle {
        let mut perm: Vec<usize> = (0..nb + np).collect();
        perm.shuffle(&mut rng);
        g = g.permuted(&perm)?;
        for m in &mut members {
            *m = perm[*m];
        }
        members.sort_unstable();
    }
    Ok(PlantedInstance {
        graph: g,
        planted: VertexSubset::from_sorted_unchecked(members),
        planted_edges: planted.edge_count(),
    })
}
