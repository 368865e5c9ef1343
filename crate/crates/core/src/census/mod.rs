//! Enumeration engines over lattice state sets: the common-negative column
//! criterion, the exhaustive `t = 2` quadruple census, sign-pattern counting,
//! candidate constructions, sampled LP checks and the persistent record store.

mod engine;
mod record;
mod stats;
mod theorem;

use crate::lattice::{dimension, LatticeError, LatticeIndex, SignOracle, StateSet};

pub use engine::{
    construct_candidate, downward_closure_violations, enumerate_quadruples_t2, evaluate_sets, orbit_checks,
    random_sample_census, sample_sets, Candidate, Evaluation, OrbitCheck, QuadrupleCensus, QuadrupleSummary, SampleRun,
};
pub use record::{write_csv, CensusCache, CensusRecord, CorruptLine};
pub use stats::{
    intersection_stats, subset_count, translation_invariance_holds, IntersectionStats, DEFAULT_SUBSET_LIMIT,
    STATS_MAX_T,
};
pub use theorem::{verify_theorem, LONG_K14_SAMPLES, TheoremCheck, TheoremName, TheoremOptions, TheoremReport};

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("expected t = {t}, k = {k}; got t = {got_t}, k = {got_k}")]
    WrongShape { t: u32, k: usize, got_t: u32, got_k: usize },
    #[error("t = {0} is not supported by the counting engine")]
    UnsupportedT(u32),
    #[error("{0}")]
    BadArgument(String),
    #[error("translation invariance not verified for t = {0}")]
    TranslationUnverified(u32),
    #[error("{subsets} subsets exceed the limit of {limit}; raise the limit explicitly")]
    SizeGuard { subsets: u128, limit: u64 },
    #[error("no {s}-column subset at t = {t} has {k} common negative rows")]
    NoCandidate { t: u32, s: usize, k: usize },
    #[error("cache {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed cache key {0:?}")]
    BadKey(String),
}

/// Columns `c` of `P^{⊗t}` at which every member of `set` is negative.
pub fn common_negative_columns(set: &StateSet) -> Vec<LatticeIndex> {
    let oracle = SignOracle::new(set.t()).expect("set has valid t");
    (0..dimension(set.t()) as u32)
        .filter(|&c| set.members().iter().all(|v| oracle.sign_linear(v.linear(), c).is_minus()))
        .map(|c| LatticeIndex::from_linear(set.t(), c).expect("in range"))
        .collect()
}

/// Whether a `t = 2` quadruple lies inside a single column family.
pub fn quad_criterion_t2(set: &StateSet) -> Result<bool, CensusError> {
    if set.t() != 2 || set.k() != 4 {
        return Err(CensusError::WrongShape {
            t: 2,
            k: 4,
            got_t: set.t(),
            got_k: set.k(),
        });
    }
    Ok(!common_negative_columns(set).is_empty())
}

/// `family(c)` for every column `c`, ordered by column.
pub fn maximal_families(t: u32) -> Result<Vec<(LatticeIndex, StateSet)>, CensusError> {
    if !(1..=STATS_MAX_T).contains(&t) {
        return Err(CensusError::UnsupportedT(t));
    }
    let oracle = SignOracle::new(t)?;
    (0..dimension(t) as u32)
        .map(|c| {
            let column = LatticeIndex::from_linear(t, c)?;
            let members = StateSet::new(t, oracle.family(&column).members())?;
            Ok((column, members))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> StateSet {
        StateSet::parse(s).unwrap()
    }

    #[test]
    fn criterion_examples() {
        assert!(quad_criterion_t2(&set("00,11,21,31")).unwrap());
        assert_eq!(common_negative_columns(&set("00,11,21,31")), vec!["23".parse().unwrap()]);
        assert!(!quad_criterion_t2(&set("00,01,02,03")).unwrap());
        assert!(matches!(quad_criterion_t2(&set("00,11,21")), Err(CensusError::WrongShape { .. })));
    }

    #[test]
    fn families_are_distinct_six_sets() {
        let families = maximal_families(2).unwrap();
        assert_eq!(families.len(), 16);
        assert!(families.iter().all(|(_, f)| f.k() == 6));
        let mut sorted: Vec<_> = families.iter().map(|(_, f)| f.clone()).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
        assert_eq!(families[0].1, set("02,12,20,21,23,32"));
        assert_eq!(families[11].1, set("00,02,03,11,21,31"));
    }
}
