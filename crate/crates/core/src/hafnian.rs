//! Exact Hafnians and the perfect-matching/edge-count bound.
//!
//! Three exact routes are provided:
//!
//! * [`hafnian_pairings`] sums over every perfect pairing. It is the oracle.
//! * [`hafnian_fast`] uses the power-trace inclusion–exclusion formula over
//!   subsets of index pairs, `O(2^(d/2) · d^4)` for a `d × d` matrix, in
//!   exact integer arithmetic.
//! * [`perfect_matchings`] counts perfect matchings of a 0/1 adjacency given
//!   as bitset rows. This is what the samplers call in their inner loops.
//!
//! For 0/1 adjacency matrices all three agree and equal the number of
//! perfect matchings of the graph.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest vertex count for which [`perfect_matchings`] fits in a `u64`
/// (`33!! < 2^64 < 35!!`).
pub const MAX_MATCHING_VERTICES: usize = 34;

/// Square symmetric integer matrix. The diagonal is stored but ignored by
/// every Hafnian routine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl SymmetricMatrix {
    pub fn new<T: AsRef<[i64]>>(rows: &[T]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::validation(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::validation(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymmetricMatrix { dim, entries })
    }

    pub fn from_graph(g: &Graph) -> Self {
        let dim = g.n();
        let entries = (0..dim * dim).map(|x| g.has_edge(x / dim, x % dim) as i64).collect();
        SymmetricMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    /// Block-diagonal matrix with `self` then `other`.
    pub fn direct_sum(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        let dim = self.dim + other.dim;
        let mut entries = vec![0; dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * dim + j] = self.get(i, j);
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                entries[(self.dim + i) * dim + self.dim + j] = other.get(i, j);
            }
        }
        SymmetricMatrix { dim, entries }
    }
}

fn overflow() -> Error {
    Error::Overflow("Hafnian exceeds the 128-bit range".into())
}

/// Hafnian as an explicit sum over all `(d-1)!!` perfect pairings.
///
/// Odd dimensions give 0 and the empty matrix gives 1.
pub fn hafnian_pairings(m: &SymmetricMatrix) -> Result<i128> {
    if m.dim % 2 == 1 {
        return Ok(0);
    }
    let mut used = vec![false; m.dim];
    pairings_rec(m, &mut used, 0).ok_or_else(overflow)
}

fn pairings_rec(m: &SymmetricMatrix, used: &mut [bool], start: usize) -> Option<i128> {
    let Some(i) = (start..m.dim).find(|&i| !used[i]) else {
        return Some(1);
    };
    used[i] = true;
    let mut total: i128 = 0;
    for j in i + 1..m.dim {
        if used[j] {
            continue;
        }
        let a = m.get(i, j);
        if a == 0 {
            continue;
        }
        used[j] = true;
        let rest = pairings_rec(m, used, i + 1);
        used[j] = false;
        total = total.checked_add(rest?.checked_mul(i128::from(a))?)?;
    }
    used[i] = false;
    Some(total)
}

/// Hafnian via the power-trace formula
///
/// ```text
/// haf(A) = Σ_{Z ⊆ [m]} (-1)^(m-|Z|) · [λ^m] exp( Σ_j tr(B_Z^j) λ^j / (2j) )
/// ```
///
/// where `d = 2m`, `B = A·X` with `X` swapping index `i` and `i + m`, and
/// `B_Z` keeps the rows and columns `{i, i + m : i ∈ Z}`.
///
/// The exponential's coefficients are carried as `h_k = 2^k k! g_k`, which
/// satisfy the integer recurrence
/// `h_k = Σ_{j=1..k} tr(B^j) · h_{k-j} · 2^(j-1) · (k-1)!/(k-j)!`,
/// so the whole computation stays in `i128` and the final division by
/// `2^m m!` is exact.
pub fn hafnian_fast(a: &SymmetricMatrix) -> Result<i128> {
    let d = a.dim;
    if d % 2 == 1 {
        return Ok(0);
    }
    let m = d / 2;
    if m == 0 {
        return Ok(1);
    }
    if m >= 31 {
        return Err(Error::input("hafnian_fast supports dimensions below 62"));
    }
    let swap = |j: usize| if j < m { j + m } else { j - m };

    // falling[k][j] = 2^(j-1) (k-1)! / (k-j)!
    let mut falling = vec![vec![0i128; m + 1]; m + 1];
    for (k, row) in falling.iter_mut().enumerate().skip(1) {
        let mut f: i128 = 1;
        for (j, slot) in row.iter_mut().enumerate().take(k + 1).skip(1) {
            if j > 1 {
                f = f.checked_mul(2 * (k - j + 1) as i128).ok_or_else(overflow)?;
            }
            *slot = f;
        }
    }

    let mut total: i128 = 0;
    let mut idx = Vec::with_capacity(d);
    for zmask in 0u64..(1u64 << m) {
        idx.clear();
        for i in 0..m {
            if zmask >> i & 1 == 1 {
                idx.push(i);
                idx.push(i + m);
            }
        }
        let s = idx.len();
        let h_m = if s == 0 {
            0
        } else {
            let b: Vec<i128> = (0..s * s)
                .map(|x| i128::from(a.get(idx[x / s], swap(idx[x % s]))))
                .collect();
            let traces = power_traces(&b, s, m)?;
            let mut h = vec![0i128; m + 1];
            h[0] = 1;
            for k in 1..=m {
                let mut acc: i128 = 0;
                for j in 1..=k {
                    let term = traces[j]
                        .checked_mul(h[k - j])
                        .and_then(|t| t.checked_mul(falling[k][j]))
                        .ok_or_else(overflow)?;
                    acc = acc.checked_add(term).ok_or_else(overflow)?;
                }
                h[k] = acc;
            }
            h[m]
        };
        let sign_negative = (m - zmask.count_ones() as usize) % 2 == 1;
        total = if sign_negative {
            total.checked_sub(h_m)
        } else {
            total.checked_add(h_m)
        }
        .ok_or_else(overflow)?;
    }

    let mut norm: i128 = 1;
    for k in 1..=m as i128 {
        norm = norm.checked_mul(2 * k).ok_or_else(overflow)?;
    }
    debug_assert_eq!(total % norm, 0, "power-trace sum must be divisible by 2^m m!");
    Ok(total / norm)
}

/// `traces[j] = tr(B^j)` for `j = 1..=max_power`; `traces[0]` is unused.
fn power_traces(b: &[i128], s: usize, max_power: usize) -> Result<Vec<i128>> {
    let mut traces = vec![0i128; max_power + 1];
    let mut power = b.to_vec();
    let mut next = vec![0i128; s * s];
    traces[1] = (0..s).map(|i| power[i * s + i]).sum();
    for t in traces.iter_mut().skip(2) {
        for i in 0..s {
            for j in 0..s {
                let mut acc: i128 = 0;
                for l in 0..s {
                    let x = b[l * s + j];
                    if x != 0 {
                        acc = power[i * s + l]
                            .checked_mul(x)
                            .and_then(|p| acc.checked_add(p))
                            .ok_or_else(overflow)?;
                    }
                }
                next[i * s + j] = acc;
            }
        }
        std::mem::swap(&mut power, &mut next);
        *t = (0..s).map(|i| power[i * s + i]).sum();
    }
    Ok(traces)
}

/// Number of perfect matchings of the graph whose row `i` is the neighbour
/// bitset `rows[i]` (bit `j` set when `i ~ j`). Requires at most
/// [`MAX_MATCHING_VERTICES`] vertices and a symmetric, loop-free input.
pub fn perfect_matchings(rows: &[u64]) -> Result<u64> {
    let k = rows.len();
    if k > MAX_MATCHING_VERTICES {
        return Err(Error::input(format!(
            "perfect-matching count supports at most {MAX_MATCHING_VERTICES} vertices, got {k}"
        )));
    }
    Ok(perfect_matchings_unchecked(rows))
}

/// As [`perfect_matchings`] without the size check.
#[inline]
pub(crate) fn perfect_matchings_unchecked(rows: &[u64]) -> u64 {
    let k = rows.len();
    if k % 2 == 1 {
        return 0;
    }
    if k == 0 {
        return 1;
    }
    if (14..=20).contains(&k) {
        return matchings_table(rows);
    }
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    matchings_rec(rows, full)
}

/// Matches the lowest remaining vertex with each available neighbour.
fn matchings_rec(rows: &[u64], mask: u64) -> u64 {
    if mask == 0 {
        return 1;
    }
    let v = mask.trailing_zeros();
    let rest = mask & !(1u64 << v);
    let mut cand = rows[v as usize] & rest;
    let mut total = 0;
    while cand != 0 {
        let u = cand.trailing_zeros();
        cand &= cand - 1;
        let remaining = rest & !(1u64 << u);
        total += if remaining == 0 {
            1
        } else {
            matchings_rec(rows, remaining)
        };
    }
    total
}

/// Bottom-up version of [`matchings_rec`] over all vertex masks, for the
/// dense mid-size graphs where recursion revisits the same states.
fn matchings_table(rows: &[u64]) -> u64 {
    let k = rows.len();
    let mut f = vec![0u64; 1 << k];
    f[0] = 1;
    for mask in 1usize..(1 << k) {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let v = mask.trailing_zeros();
        let rest = mask & !(1 << v);
        let mut cand = rows[v as usize] as usize & rest;
        let mut total = 0;
        while cand != 0 {
            let u = cand.trailing_zeros();
            cand &= cand - 1;
            total += f[rest & !(1 << u)];
        }
        f[mask] = total;
    }
    f[(1 << k) - 1]
}

/// Perfect-matching count of a whole graph (at most 34 vertices).
pub fn graph_perfect_matchings(g: &Graph) -> Result<u64> {
    if g.n() > MAX_MATCHING_VERTICES {
        return Err(Error::input(format!(
            "perfect-matching count supports at most {MAX_MATCHING_VERTICES} vertices"
        )));
    }
    let all: Vec<usize> = (0..g.n()).collect();
    Ok(perfect_matchings_unchecked(&g.local_rows(&all)))
}

/// `(n-1)!!` for even `n`, i.e. the Hafnian of the complete graph `K_n`.
pub fn double_factorial_odd(n: usize) -> u128 {
    (1..n).step_by(2).map(|x| x as u128).product()
}

/// Vertex and edge counts fed to the perfect-matching upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PmBoundInput {
    vertices: usize,
    edges: usize,
}

impl PmBoundInput {
    pub fn new(vertices: usize, edges: usize) -> Result<Self> {
        if vertices == 0 || vertices % 2 == 1 {
            return Err(Error::input(format!(
                "the matching bound needs a positive even vertex count, got {vertices}"
            )));
        }
        let m = vertices / 2;
        if edges > m * (2 * m - 1) {
            return Err(Error::input(format!(
                "{edges} edges exceed the {} possible on {vertices} vertices",
                m * (2 * m - 1)
            )));
        }
        Ok(PmBoundInput { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    /// Half the vertex count.
    pub fn m(&self) -> usize {
        self.vertices / 2
    }

    /// `l - m ⌊l/m⌋`.
    pub fn alpha(&self) -> usize {
        self.edges % self.m()
    }
}

fn ln_factorial(x: usize) -> f64 {
    (2..=x).map(|i| (i as f64).ln()).sum()
}

/// Upper bound on the perfect-matching count of any graph with
/// `b.vertices() = 2m` vertices and `l = b.edges()` edges:
///
/// ```text
/// (⌊l/m⌋!)^((m-α)/⌊l/m⌋) · (⌈l/m⌉!)^(α/⌈l/m⌉),   α = l - m⌊l/m⌋
/// ```
///
/// Returns 0 when `l < m`, where no perfect matching can exist.
pub fn pm_upper_bound(b: PmBoundInput) -> f64 {
    let m = b.m();
    let l = b.edges;
    if l < m {
        return 0.0;
    }
    let q = l / m;
    let alpha = b.alpha();
    let mut ln = (m - alpha) as f64 / q as f64 * ln_factorial(q);
    if alpha > 0 {
        let c = q + 1;
        ln += alpha as f64 / c as f64 * ln_factorial(c);
    }
    ln.exp()
}

/// Relative slack when comparing the floating-point bound with an exact
/// integer count.
const BOUND_RTOL: f64 = 1e-9;

/// Smallest edge count `l` on `vertices` vertices whose bound admits
/// `pm_count` perfect matchings. Any graph with that many perfect matchings
/// has at least this many edges.
pub fn min_edges_for_pm(vertices: usize, pm_count: u128) -> Result<usize> {
    let max_edges = PmBoundInput::new(vertices, 0)?.m() * (vertices - 1);
    if pm_count == 0 {
        return Err(Error::input("matching count must be at least 1"));
    }
    if pm_count > double_factorial_odd(vertices) {
        return Err(Error::input(format!(
            "{pm_count} perfect matchings is impossible on {vertices} vertices"
        )));
    }
    let target = pm_count as f64 * (1.0 - BOUND_RTOL);
    // The bound is non-decreasing in l, so binary search for the first hit.
    let (mut lo, mut hi) = (0usize, max_edges);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pm_upper_bound(PmBoundInput::new(vertices, mid)?) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// True when the bound holds for an observed count, with a small relative
/// slack for floating-point rounding.
pub fn bound_holds(b: PmBoundInput, pm_count: u128) -> bool {
    pm_count as f64 <= pm_upper_bound(b) * (1.0 + BOUND_RTOL)
}
