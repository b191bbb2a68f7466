//! Exhaustive weight tables: every k-subset with `Haf(A_S) > 0`, weighted
//! by `Haf(A_S)^2`, stored in lexicographic subset order.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hafnian::{perfect_matchings_unchecked, MAX_MATCHING_VERTICES};
use crate::subset::{binomial, rank_lex, unrank_lex, BinomialTable, VertexSubset};

/// Default cap on `C(n, k)` for exhaustive tables.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

const CACHE_MAGIC: &str = "GBSWT1";

/// The exact post-selected distribution over k-subsets.
///
/// Entry `i` is the subset with lexicographic rank `ranks[i]`; its weight is
/// `cumulative[i] - cumulative[i - 1]`. Zero-weight subsets are not stored.
#[derive(Clone, Debug)]
pub struct WeightTable {
    fingerprint: String,
    n: usize,
    k: usize,
    ranks: Vec<u32>,
    cumulative: Vec<u64>,
    binom: BinomialTable,
}

impl WeightTable {
    /// Enumerates all k-subsets of `g` and weights each by its squared
    /// perfect-matching count.
    pub fn build(g: &Graph, k: usize, budget: u64) -> Result<Self> {
        let n = g.n();
        if k % 2 == 1 {
            return Err(Error::input(format!("weight tables need an even subset size, got {k}")));
        }
        if k == 0 || k > n {
            return Err(Error::input(format!("subset size {k} outside 2..={n}")));
        }
        if k > MAX_MATCHING_VERTICES {
            return Err(Error::input(format!("subset size {k} is too large to enumerate")));
        }
        let needed = binomial(n, k);
        let cap = budget.min(u64::from(u32::MAX));
        if needed > u128::from(cap) {
            return Err(Error::BudgetExceeded { needed, budget: cap });
        }

        let binom = BinomialTable::new(n, k);
        let prefixes = prefixes(n, k);
        let chunks: Vec<Result<Chunk>> = map_prefixes(&prefixes, |p| enumerate_prefix(g, k, p, &binom));

        let mut ranks = Vec::new();
        let mut cumulative = Vec::new();
        let mut total: u64 = 0;
        for chunk in chunks {
            let chunk = chunk?;
            ranks.extend_from_slice(&chunk.ranks);
            cumulative.reserve(chunk.weights.len());
            for w in chunk.weights {
                total = total
                    .checked_add(w)
                    .ok_or_else(|| Error::Overflow("total table weight exceeds u64".into()))?;
                cumulative.push(total);
            }
        }
        Ok(WeightTable {
            fingerprint: g.fingerprint(),
            n,
            k,
            ranks,
            cumulative,
            binom,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Number of stored (nonzero-weight) subsets.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    fn weight_at(&self, i: usize) -> u64 {
        self.cumulative[i] - if i == 0 { 0 } else { self.cumulative[i - 1] }
    }

    pub fn entry(&self, i: usize) -> (VertexSubset, u64) {
        (
            unrank_lex(u64::from(self.ranks[i]), self.n, self.k, &self.binom),
            self.weight_at(i),
        )
    }

    /// Entries in lexicographic subset order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexSubset, u64)> + '_ {
        (0..self.len()).map(|i| self.entry(i))
    }

    /// `Haf(A_S)^2` for any k-subset `s` (0 if absent).
    pub fn weight_of(&self, s: &VertexSubset) -> u64 {
        if s.len() != self.k || s.check_bounds(self.n).is_err() {
            return 0;
        }
        let r = rank_lex(s.indices(), self.n, &self.binom);
        match self.ranks.binary_search(&(r as u32)) {
            Ok(i) => self.weight_at(i),
            Err(_) => 0,
        }
    }

    pub fn probability(&self, s: &VertexSubset) -> f64 {
        match self.total_weight() {
            0 => 0.0,
            t => self.weight_of(s) as f64 / t as f64,
        }
    }

    /// Draws a subset with probability `weight / total_weight`, by binary
    /// search over the cumulative weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<VertexSubset> {
        let total = self.total_weight();
        if total == 0 {
            return Err(Error::EmptyDistribution { k: self.k });
        }
        let u = rng.random_range(0..total);
        let i = self.cumulative.partition_point(|&c| c <= u);
        Ok(self.entry(i).0)
    }

    pub fn cache_file_name(fingerprint: &str, k: usize) -> String {
        format!("{fingerprint}_k{k}.gbswt")
    }

    /// Writes the table in the canonical text cache format.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(
            w,
            "{CACHE_MAGIC} {} {} {} {}",
            self.fingerprint,
            self.n,
            self.k,
            self.len()
        )?;
        for (s, weight) in self.iter() {
            writeln!(w, "{s}\t{weight}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache file and checks it against `g` and `k`.
    pub fn read_cache(path: impl AsRef<Path>, g: &Graph, k: usize) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "empty cache file"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != CACHE_MAGIC {
            return Err(Error::parse(1, format!("bad cache header {header:?}")));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(1, format!("bad number {s:?}")))
        };
        let (fp, n, file_k, count) = (fields[1], num(fields[2])?, num(fields[3])?, num(fields[4])?);
        if fp != g.fingerprint() || n != g.n() || file_k != k {
            return Err(Error::validation(format!(
                "cache is for graph {fp} (n={n}, k={file_k}), not {} (n={}, k={k})",
                g.fingerprint(),
                g.n()
            )));
        }
        let binom = BinomialTable::new(n, k);
        let mut ranks = Vec::with_capacity(count);
        let mut cumulative = Vec::with_capacity(count);
        let mut total: u64 = 0;
        let mut idx = Vec::with_capacity(k);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let (subset, weight) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "missing tab separator"))?;
            idx.clear();
            for t in subset.split_whitespace() {
                idx.push(t.parse::<usize>().map_err(|_| Error::parse(lineno, "bad index"))?);
            }
            if idx.len() != k || idx.windows(2).any(|w| w[0] >= w[1]) || idx.last() >= Some(&n) {
                return Err(Error::parse(lineno, "subset is not a sorted k-subset"));
            }
            let weight: u64 = weight.parse().map_err(|_| Error::parse(lineno, "bad weight"))?;
            if weight == 0 {
                return Err(Error::parse(lineno, "zero weight entry"));
            }
            let rank = rank_lex(&idx, n, &binom) as u32;
            if ranks.last().is_some_and(|&r| r >= rank) {
                return Err(Error::parse(lineno, "entries are not in lexicographic order"));
            }
            ranks.push(rank);
            total = total
                .checked_add(weight)
                .ok_or_else(|| Error::Overflow("total table weight exceeds u64".into()))?;
            cumulative.push(total);
        }
        if ranks.len() != count {
            return Err(Error::validation(format!(
                "cache header promises {count} entries, found {}",
                ranks.len()
            )));
        }
        Ok(WeightTable {
            fingerprint: fp.to_string(),
            n,
            k,
            ranks,
            cumulative,
            binom,
        })
    }

    /// Loads the table from `cache_dir` if present, otherwise builds it and
    /// stores it there.
    pub fn load_or_build(g: &Graph, k: usize, budget: u64, cache_dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = cache_dir else {
            return Self::build(g, k, budget);
        };
        let path = dir.join(Self::cache_file_name(&g.fingerprint(), k));
        if path.exists() {
            return Self::read_cache(&path, g, k);
        }
        let table = Self::build(g, k, budget)?;
        fs::create_dir_all(dir)?;
        // Write to a temporary name first so a partial file is never read back.
        let tmp = path.with_extension("partial");
        table.write_cache(&tmp)?;
        fs::rename(&tmp, &path)?;
        Ok(table)
    }
}

struct Chunk {
    ranks: Vec<u32>,
    weights: Vec<u64>,
}

/// Two-element prefixes (one-element when k = 1) that split the subset
/// space into contiguous lexicographic blocks.
fn prefixes(n: usize, k: usize) -> Vec<Vec<usize>> {
    let depth = k.min(2);
    let mut out = Vec::new();
    crate::subset::for_each_subset(n, depth, |p| {
        // Only prefixes that can still be completed to k elements.
        if p.last().is_none_or(|&last| n - 1 - last >= k - depth) {
            out.push(p.to_vec());
        }
        true
    });
    out
}

#[cfg(feature = "parallel")]
fn map_prefixes<T: Send>(prefixes: &[Vec<usize>], f: impl Fn(&[usize]) -> T + Sync) -> Vec<T> {
    use rayon::prelude::*;
    prefixes.par_iter().map(|p| f(p)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_prefixes<T>(prefixes: &[Vec<usize>], f: impl Fn(&[usize]) -> T) -> Vec<T> {
    prefixes.iter().map(|p| f(p)).collect()
}

/// Enumerates, in lexicographic order, the k-subsets starting with `prefix`.
fn enumerate_prefix(g: &Graph, k: usize, prefix: &[usize], binom: &BinomialTable) -> Result<Chunk> {
    let n = g.n();
    let mut state = Enumeration {
        g,
        n,
        k,
        chosen: vec![0; k],
        rows: vec![0; k],
        chunk: Chunk {
            ranks: Vec::new(),
            weights: Vec::new(),
        },
        overflow: false,
    };
    for (d, &v) in prefix.iter().enumerate() {
        state.place(d, v);
    }
    // Rank of the first completion: the prefix followed by its successors.
    let mut first: Vec<usize> = prefix.to_vec();
    while first.len() < k {
        first.push(first.last().map_or(0, |&x| x + 1));
    }
    let start_rank = rank_lex(&first, n, binom);
    let mut rank = start_rank;
    state.descend(prefix.len(), prefix.last().map_or(0, |&x| x + 1), &mut rank);
    if state.overflow {
        return Err(Error::Overflow("squared Hafnian weight exceeds u64".into()));
    }
    Ok(state.chunk)
}

struct Enumeration<'a> {
    g: &'a Graph,
    n: usize,
    k: usize,
    chosen: Vec<usize>,
    /// Local adjacency bitsets of the chosen vertices.
    rows: Vec<u64>,
    chunk: Chunk,
    overflow: bool,
}

impl Enumeration<'_> {
    #[inline]
    fn place(&mut self, depth: usize, v: usize) {
        let bit = 1u64 << depth;
        let mut row = 0u64;
        for j in 0..depth {
            if self.g.has_edge(self.chosen[j], v) {
                row |= 1 << j;
                self.rows[j] |= bit;
            } else {
                self.rows[j] &= !bit;
            }
        }
        self.rows[depth] = row;
        self.chosen[depth] = v;
    }

    fn descend(&mut self, depth: usize, start: usize, rank: &mut u64) {
        if depth == self.k {
            let pm = perfect_matchings_unchecked(&self.rows);
            if pm > 0 {
                match pm.checked_mul(pm) {
                    Some(w) => {
                        self.chunk.ranks.push(*rank as u32);
                        self.chunk.weights.push(w);
                    }
                    None => self.overflow = true,
                }
            }
            *rank += 1;
            return;
        }
        for v in start..=self.n - (self.k - depth) {
            self.place(depth, v);
            self.descend(depth + 1, v + 1, rank);
        }
    }
}

/// Lazily built, shared weight tables for one graph, keyed by subset size.
#[derive(Debug)]
pub struct TableStore {
    graph: Graph,
    budget: u64,
    cache_dir: Option<PathBuf>,
    tables: Mutex<HashMap<usize, Arc<WeightTable>>>,
}

impl TableStore {
    pub fn new(graph: Graph, budget: u64, cache_dir: Option<PathBuf>) -> Self {
        TableStore {
            graph,
            budget,
            cache_dir,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// The table for subset size `k`, building (or loading) it on first use.
    pub fn get(&self, k: usize) -> Result<Arc<WeightTable>> {
        let mut tables = self.tables.lock().expect("table store lock poisoned");
        if let Some(t) = tables.get(&k) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(WeightTable::load_or_build(
            &self.graph,
            k,
            self.budget,
            self.cache_dir.as_deref(),
        )?);
        tables.insert(k, Arc::clone(&t));
        Ok(t)
    }

    /// Inserts an externally built table.
    pub fn insert(&self, table: WeightTable) -> Result<()> {
        if table.fingerprint() != self.graph.fingerprint() {
            return Err(Error::validation("table belongs to a different graph"));
        }
        self.tables
            .lock()
            .expect("table store lock poisoned")
            .insert(table.k(), Arc::new(table));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use crate::hafnian::{hafnian_pairings, SymmetricMatrix};
    use crate::rng::seeded;
    use crate::subset::for_each_subset;

    fn oracle_weights(g: &Graph, k: usize) -> Vec<(Vec<usize>, u64)> {
        let mut out = Vec::new();
        for_each_subset(g.n(), k, |s| {
            let sub = g.subgraph(&VertexSubset::new(s.to_vec()).unwrap()).unwrap();
            let h = hafnian_pairings(&SymmetricMatrix::from_graph(&sub)).unwrap() as u64;
            if h > 0 {
                out.push((s.to_vec(), h * h));
            }
            true
        });
        out
    }

    #[test]
    fn single_edge_plus_isolated() {
        let g = Graph::from_edges(4, [(1, 2)]).unwrap();
        let t = WeightTable::build(&g, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.entry(0), (VertexSubset::new(vec![1, 2]).unwrap(), 1));
        assert_eq!(t.total_weight(), 1);
    }

    #[test]
    fn complete_four() {
        let t = WeightTable::build(&Graph::complete(4).unwrap(), 4, 100).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.total_weight(), 9);
    }

    #[test]
    fn pairs_are_edges() {
        for seed in 0..5 {
            let g = erdos_renyi(11, 0.4, seed).unwrap();
            let t = WeightTable::build(&g, 2, 1000).unwrap();
            let entries: Vec<(usize, usize)> = t
                .iter()
                .map(|(s, w)| {
                    assert_eq!(w, 1);
                    (s.indices()[0], s.indices()[1])
                })
                .collect();
            assert_eq!(entries, g.edges().collect::<Vec<_>>());
            assert_eq!(t.total_weight() as usize, g.edge_count());
        }
    }

    #[test]
    fn matches_pairing_oracle() {
        for (n, k, seed) in [(9, 4, 1), (10, 6, 2), (8, 8, 3), (12, 4, 4)] {
            let g = erdos_renyi(n, 0.5, seed).unwrap();
            let t = WeightTable::build(&g, k, 1_000_000).unwrap();
            let got: Vec<(Vec<usize>, u64)> = t.iter().map(|(s, w)| (s.into_vec(), w)).collect();
            assert_eq!(got, oracle_weights(&g, k), "n={n} k={k}");
            for (s, w) in &got {
                assert_eq!(t.weight_of(&VertexSubset::new(s.clone()).unwrap()), *w);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let g = Graph::complete(6).unwrap();
        assert!(matches!(WeightTable::build(&g, 3, 100), Err(Error::Input(_))));
        assert!(matches!(WeightTable::build(&g, 8, 100), Err(Error::Input(_))));
        assert!(matches!(
            WeightTable::build(&g, 4, 10),
            Err(Error::BudgetExceeded { needed: 15, budget: 10 })
        ));
    }

    #[test]
    fn sampling_empty_table_is_signalled() {
        let g = Graph::from_edges(6, [(0, 1), (2, 3)]).unwrap();
        let t = WeightTable::build(&g, 6, 100).unwrap();
        assert!(t.is_empty());
        assert!(matches!(
            t.sample(&mut seeded(0)),
            Err(Error::EmptyDistribution { k: 6 })
        ));
    }

    #[test]
    fn cache_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let g = erdos_renyi(10, 0.5, 8).unwrap();
        let t = WeightTable::load_or_build(&g, 4, 1000, Some(dir.path())).unwrap();
        let path = dir.path().join(WeightTable::cache_file_name(&g.fingerprint(), 4));
        assert!(path.exists());
        let text = fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, format!("GBSWT1 {} 10 4 {}", g.fingerprint(), t.len()));
        assert!(text.lines().nth(1).unwrap().contains('\t'));

        let back = WeightTable::load_or_build(&g, 4, 1000, Some(dir.path())).unwrap();
        assert_eq!(back.ranks, t.ranks);
        assert_eq!(back.cumulative, t.cumulative);

        let other = erdos_renyi(10, 0.5, 9).unwrap();
        assert!(matches!(
            WeightTable::read_cache(&path, &other, 4),
            Err(Error::Validation(_))
        ));
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(1, 2);
        let bad = dir.path().join("bad.gbswt");
        fs::write(&bad, lines.join("\n")).unwrap();
        assert!(matches!(WeightTable::read_cache(&bad, &g, 4), Err(Error::Parse { .. })));
    }

    #[test]
    fn store_builds_once() {
        let g = erdos_renyi(10, 0.5, 3).unwrap();
        let store = TableStore::new(g, 1000, None);
        let a = store.get(4).unwrap();
        let b = store.get(4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(store
            .insert(WeightTable::build(&Graph::complete(4).unwrap(), 2, 10).unwrap())
            .is_err());
    }
}
