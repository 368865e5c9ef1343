//! Common-negative row counts over column subsets of `P^{⊗t}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CensusError;
use crate::lattice::{dimension, LatticeIndex, SignOracle};

/// Largest `t` the counting engine accepts.
pub const STATS_MAX_T: u32 = 4;

/// Subsets enumerated before the size guard trips.
pub const DEFAULT_SUBSET_LIMIT: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionStats {
    pub t: u32,
    pub m: usize,
    pub reduced: bool,
    pub subsets: u64,
    pub min_count: usize,
    pub max_count: usize,
    /// Common-negative row count → number of column subsets.
    pub histogram: BTreeMap<usize, u64>,
}

impl IntersectionStats {
    pub fn is_uniform(&self) -> bool {
        self.min_count == self.max_count
    }
}

pub(crate) fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Sign of `P^{⊗t}[v, w]` as a product of single-factor signs, computed
/// without the XOR parity rule.
fn digitwise_negative(t: u32, v: u32, w: u32) -> bool {
    const BASE_NEGATIVE: [(u32, u32); 4] = [(0, 2), (1, 3), (2, 0), (3, 1)];
    let mut negative = false;
    for d in 0..t {
        let pair = ((v >> (2 * d)) & 3, (w >> (2 * d)) & 3);
        negative ^= BASE_NEGATIVE.contains(&pair);
    }
    negative
}

/// Checks that every column family is the translate of column `0`'s family,
/// `family(c) = family(0) ⊕ c`, and that the sign oracle agrees with the
/// digit-wise product everywhere. Gates the reduced enumeration.
pub fn translation_invariance_holds(t: u32) -> Result<bool, CensusError> {
    check_t(t)?;
    let oracle = SignOracle::new(t)?;
    let n = dimension(t) as u32;
    for c in 0..n {
        for v in 0..n {
            let direct = digitwise_negative(t, v, c);
            if direct != digitwise_negative(t, v ^ c, 0) || direct != oracle.sign_linear(v, c).is_minus() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_t(t: u32) -> Result<(), CensusError> {
    if (1..=STATS_MAX_T).contains(&t) {
        Ok(())
    } else {
        Err(CensusError::UnsupportedT(t))
    }
}

/// Packed column families, one `words`-wide mask per column.
struct Masks {
    words: usize,
    data: Vec<u64>,
    columns: usize,
}

impl Masks {
    fn new(t: u32) -> Result<Self, CensusError> {
        let oracle = SignOracle::new(t)?;
        let columns = dimension(t);
        let words = columns.div_ceil(64);
        let mut data = Vec::with_capacity(columns * words);
        for c in 0..columns as u32 {
            let family = oracle.family(&LatticeIndex::from_linear(t, c)?);
            data.extend_from_slice(family.rows.words());
        }
        Ok(Self { words, data, columns })
    }

    fn column(&self, c: usize) -> &[u64] {
        &self.data[c * self.words..(c + 1) * self.words]
    }
}

fn walk(masks: &Masks, start: usize, remaining: usize, prefix: &[u64], hist: &mut [u64]) {
    if remaining == 0 {
        let count: u32 = prefix.iter().map(|w| w.count_ones()).sum();
        hist[count as usize] += 1;
        return;
    }
    let mut next = vec![0u64; masks.words];
    for c in start..=masks.columns - remaining {
        let mut any = 0u64;
        for ((n, p), m) in next.iter_mut().zip(prefix).zip(masks.column(c)) {
            *n = p & m;
            any |= *n;
        }
        if any == 0 {
            // Every completion of an empty prefix is empty too.
            hist[0] += binomial((masks.columns - c - 1) as u64, remaining as u64 - 1) as u64;
            continue;
        }
        walk(masks, c + 1, remaining - 1, &next, hist);
    }
}

/// Number of column `m`-subsets the enumeration visits.
pub fn subset_count(t: u32, m: usize, reduced: bool) -> u128 {
    let n = dimension(t) as u64;
    if reduced {
        binomial(n - 1, m as u64 - 1)
    } else {
        binomial(n, m as u64)
    }
}

/// Exact distribution of `|family(c_1) ∩ … ∩ family(c_m)|` over all column
/// `m`-subsets, or over those containing column `0` when `reduced`.
pub fn intersection_stats(t: u32, m: usize, reduced: bool, limit: u64) -> Result<IntersectionStats, CensusError> {
    check_t(t)?;
    let n = dimension(t);
    if m == 0 || m > n {
        return Err(CensusError::BadArgument(format!("m = {m} must lie in 1..={n}")));
    }
    if reduced && !translation_invariance_holds(t)? {
        return Err(CensusError::TranslationUnverified(t));
    }
    let subsets = subset_count(t, m, reduced);
    if subsets > limit as u128 {
        return Err(CensusError::SizeGuard { subsets, limit });
    }
    let masks = Masks::new(t)?;
    let full = vec![u64::MAX; masks.words];
    let (first, depth): (Vec<usize>, usize) = if reduced { (vec![0], m - 1) } else { ((0..=n - m).collect(), m - 1) };
    let hist = first
        .into_par_iter()
        .map(|c0| {
            let mut hist = vec![0u64; n + 1];
            let prefix: Vec<u64> = full.iter().zip(masks.column(c0)).map(|(a, b)| a & b).collect();
            if depth == 0 {
                walk(&masks, 0, 0, &prefix, &mut hist);
            } else if reduced {
                // Split the second column across workers.
                hist = (1..=n - depth)
                    .into_par_iter()
                    .map(|c1| {
                        let mut h = vec![0u64; n + 1];
                        let next: Vec<u64> = prefix.iter().zip(masks.column(c1)).map(|(a, b)| a & b).collect();
                        walk(&masks, c1 + 1, depth - 1, &next, &mut h);
                        h
                    })
                    .reduce(|| vec![0u64; n + 1], add_hist);
            } else {
                walk(&masks, c0 + 1, depth, &prefix, &mut hist);
            }
            hist
        })
        .reduce(|| vec![0u64; n + 1], add_hist);
    let histogram: BTreeMap<usize, u64> = hist.iter().enumerate().filter(|(_, f)| **f > 0).map(|(c, f)| (c, *f)).collect();
    Ok(IntersectionStats {
        t,
        m,
        reduced,
        subsets: histogram.values().sum(),
        min_count: *histogram.keys().next().expect("at least one subset"),
        max_count: *histogram.keys().next_back().expect("at least one subset"),
        histogram,
    })
}

fn add_hist(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(t: u32, m: usize) -> BTreeMap<usize, u64> {
        let oracle = SignOracle::new(t).unwrap();
        let n = dimension(t) as u32;
        let mut hist = BTreeMap::new();
        let mut stack = vec![(0u32, Vec::<u32>::new())];
        while let Some((start, cols)) = stack.pop() {
            if cols.len() == m {
                let count = (0..n).filter(|&v| cols.iter().all(|&c| oracle.sign_linear(v, c).is_minus())).count();
                *hist.entry(count).or_insert(0) += 1;
                continue;
            }
            for c in start..n {
                let mut next = cols.clone();
                next.push(c);
                stack.push((c + 1, next));
            }
        }
        hist
    }

    #[test]
    fn matches_brute_force_at_t2() {
        for m in 1..=4 {
            let stats = intersection_stats(2, m, false, DEFAULT_SUBSET_LIMIT).unwrap();
            assert_eq!(stats.histogram, brute(2, m), "m = {m}");
            assert_eq!(stats.subsets as u128, binomial(16, m as u64));
        }
    }

    #[test]
    fn family_size_and_pairs_t2() {
        let s1 = intersection_stats(2, 1, false, DEFAULT_SUBSET_LIMIT).unwrap();
        assert_eq!((s1.min_count, s1.max_count), (6, 6));
        let s2 = intersection_stats(2, 2, false, DEFAULT_SUBSET_LIMIT).unwrap();
        assert_eq!(s2.max_count, 2);
    }

    #[test]
    fn reduced_equals_full_in_shape() {
        for t in 1..=3 {
            assert!(translation_invariance_holds(t).unwrap());
            for m in 1..=3 {
                let full = intersection_stats(t, m, false, DEFAULT_SUBSET_LIMIT).unwrap();
                let reduced = intersection_stats(t, m, true, DEFAULT_SUBSET_LIMIT).unwrap();
                assert_eq!((full.min_count, full.max_count), (reduced.min_count, reduced.max_count));
                // Each subset is counted once per member column in the reduced view.
                for (count, freq) in &full.histogram {
                    assert_eq!(freq * m as u64, reduced.histogram[count] * dimension(t) as u64);
                }
            }
        }
    }

    #[test]
    fn guard_and_arguments() {
        assert!(matches!(intersection_stats(4, 5, false, DEFAULT_SUBSET_LIMIT), Err(CensusError::SizeGuard { .. })));
        assert!(matches!(intersection_stats(2, 0, false, 10), Err(CensusError::BadArgument(_))));
        assert!(matches!(intersection_stats(5, 1, true, 10), Err(CensusError::UnsupportedT(5))));
    }

    #[test]
    fn family_cardinality_formula() {
        for t in 2..=4 {
            let s = intersection_stats(t, 1, true, DEFAULT_SUBSET_LIMIT).unwrap();
            let expected = SignOracle::new(t).unwrap().family_cardinality();
            assert_eq!((s.min_count, s.max_count), (expected, expected));
        }
    }
}
