//! Sorted vertex subsets and the lexicographic combinatorial number system.
//!
//! Weight tables and exhaustive searches walk k-subsets of `0..n` in
//! lexicographic order of their sorted index tuples. `rank_lex` and
//! `unrank_lex` map between a subset and its position in that order.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing list of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexSubset(Vec<usize>);

impl VertexSubset {
    /// Wraps an already sorted index list, rejecting duplicates or disorder.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "subset indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(VertexSubset(indices))
    }

    /// Sorts the indices first; duplicates are still an error.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices)
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        VertexSubset(indices)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        VertexSubset((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Fails unless every index lies in `0..n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&v) if v >= n => Err(Error::input(format!(
                "vertex index {v} out of range for a graph with {n} vertices"
            ))),
            _ => Ok(()),
        }
    }

    pub fn intersects(&self, other: &VertexSubset) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn union(&self, other: &VertexSubset) -> VertexSubset {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        out.sort_unstable();
        out.dedup();
        VertexSubset(out)
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &VertexSubset) -> VertexSubset {
        VertexSubset(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    /// Picks the members at the given positions (positions need not be sorted).
    pub fn select(&self, positions: impl IntoIterator<Item = usize>) -> VertexSubset {
        let mut out: Vec<usize> = positions.into_iter().map(|p| self.0[p]).collect();
        out.sort_unstable();
        VertexSubset(out)
    }
}

impl TryFrom<Vec<usize>> for VertexSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        VertexSubset::new(v)
    }
}

impl From<VertexSubset> for Vec<usize> {
    fn from(s: VertexSubset) -> Self {
        s.0
    }
}

impl fmt::Display for VertexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Table of `C(a, b)` for `a <= n`, `b <= k`, used by ranking in hot loops.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    k: usize,
    values: Vec<u64>,
}

impl BinomialTable {
    pub fn new(n: usize, k: usize) -> Self {
        let mut values = vec![0u64; (n + 1) * (k + 1)];
        for a in 0..=n {
            for b in 0..=k.min(a) {
                values[a * (k + 1) + b] = if b == 0 || b == a {
                    1
                } else {
                    values[(a - 1) * (k + 1) + b - 1].saturating_add(values[(a - 1) * (k + 1) + b])
                };
            }
        }
        BinomialTable { k, values }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u64 {
        if b > self.k || b > a {
            0
        } else {
            self.values[a * (self.k + 1) + b]
        }
    }
}

/// Position of a sorted k-subset of `0..n` in lexicographic order.
pub fn rank_lex(subset: &[usize], n: usize, table: &BinomialTable) -> u64 {
    let k = subset.len();
    let mut rank = 0u64;
    let mut next = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for j in next..c {
            rank += table.get(n - 1 - j, k - 1 - i);
        }
        next = c + 1;
    }
    rank
}

/// Inverse of [`rank_lex`].
pub fn unrank_lex(mut rank: u64, n: usize, k: usize, table: &BinomialTable) -> VertexSubset {
    let mut out = Vec::with_capacity(k);
    let mut v = 0usize;
    for i in 0..k {
        loop {
            let block = table.get(n - 1 - v, k - 1 - i);
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    VertexSubset(out)
}

/// Uniformly random k-subset of `0..n`.
pub fn uniform_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> VertexSubset {
    let mut v = index::sample(rng, n, k).into_vec();
    v.sort_unstable();
    VertexSubset(v)
}

/// Uniformly random k-subset of the members of `pool`.
pub fn uniform_subset_of<R: Rng + ?Sized>(rng: &mut R, pool: &VertexSubset, k: usize) -> VertexSubset {
    pool.select(index::sample(rng, pool.len(), k))
}

/// Calls `visit` on every k-subset of `0..n` in lexicographic order. Stops
/// early if `visit` returns `false`.
pub fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&c) {
            return;
        }
        // Advance to the lexicographic successor.
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_unsorted_and_duplicates() {
        assert!(VertexSubset::new(vec![0, 2, 1]).is_err());
        assert!(VertexSubset::new(vec![1, 1]).is_err());
        assert!(VertexSubset::from_unsorted(vec![3, 1, 1]).is_err());
        assert_eq!(
            VertexSubset::from_unsorted(vec![3, 0, 1]).unwrap().indices(),
            &[0, 1, 3]
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(30, 10), 30_045_015);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(12, 0), 1);
        let t = BinomialTable::new(30, 10);
        assert_eq!(t.get(30, 10), 30_045_015);
        assert_eq!(t.get(3, 5), 0);
    }

    #[test]
    fn enumeration_is_lexicographic_and_ranked() {
        let t = BinomialTable::new(7, 3);
        let mut seen = Vec::new();
        for_each_subset(7, 3, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen.len(), 35);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        for (r, s) in seen.iter().enumerate() {
            assert_eq!(rank_lex(s, 7, &t), r as u64);
            assert_eq!(unrank_lex(r as u64, 7, 3, &t).indices(), &s[..]);
        }
    }

    #[test]
    fn enumeration_edge_sizes() {
        let mut count = 0;
        for_each_subset(5, 0, |s| {
            assert!(s.is_empty());
            count += 1;
            true
        });
        assert_eq!(count, 1);
        count = 0;
        for_each_subset(5, 5, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
        for_each_subset(2, 3, |_| panic!("no subsets"));
    }

    #[test]
    fn set_operations() {
        let a = VertexSubset::new(vec![1, 3, 5]).unwrap();
        let b = VertexSubset::new(vec![2, 3]).unwrap();
        let c = VertexSubset::new(vec![0, 4]).unwrap();
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
        assert_eq!(a.union(&c).indices(), &[0, 1, 3, 4, 5]);
        assert_eq!(a.difference(&b).indices(), &[1, 5]);
        assert!(a.check_bounds(6).is_ok());
        assert!(a.check_bounds(5).is_err());
    }

    proptest! {
        #[test]
        fn unrank_inverts_rank(n in 1usize..20, kf in 0.0f64..1.0, rf in 0.0f64..1.0) {
            let k = ((n as f64) * kf) as usize;
            let t = BinomialTable::new(n, k);
            let total = t.get(n, k);
            let r = ((total as f64 - 1.0) * rf) as u64;
            let s = unrank_lex(r, n, k, &t);
            prop_assert_eq!(s.len(), k);
            prop_assert_eq!(rank_lex(s.indices(), n, &t), r);
        }
    }
}
