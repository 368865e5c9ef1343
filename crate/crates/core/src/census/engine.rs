//! LP-backed census runs over explicit, enumerated and sampled state sets.

use std::collections::BTreeMap;

use exact_lp::Fraction;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{quad_criterion_t2, CensusCache, CensusError, CensusRecord};
use crate::lattice::{dimension, LatticeIndex, RowMask, SignOracle, StateSet};
use crate::ppt::{alpha, AlphaMode};

/// A record plus, when it was solved in this run rather than read from the
/// cache, the verified primal and dual values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub record: CensusRecord,
    pub primal_value: Option<Fraction>,
    pub dual_value: Option<Fraction>,
}

impl Evaluation {
    pub fn solved(&self) -> bool {
        self.primal_value.is_some()
    }
}

/// Looks every set up in the cache, solves the misses in parallel and
/// appends their records in input order.
pub fn evaluate_sets(
    sets: &[StateSet],
    mode: AlphaMode,
    cache: &mut CensusCache,
    stamp: bool,
) -> Result<Vec<Evaluation>, CensusError> {
    let cached: Vec<Option<CensusRecord>> = sets.iter().map(|s| cache.get(s).cloned()).collect();
    let misses: Vec<usize> = (0..sets.len()).filter(|&i| cached[i].is_none()).collect();
    let solved: Vec<Evaluation> = misses
        .par_iter()
        .map(|&i| {
            let result = alpha(&sets[i], mode);
            Evaluation {
                record: CensusRecord::new(&sets[i], &result, stamp),
                primal_value: Some(result.primal_value),
                dual_value: Some(result.dual_value),
            }
        })
        .collect();
    let mut out: Vec<Option<Evaluation>> = cached
        .into_iter()
        .map(|r| {
            r.map(|record| Evaluation {
                record,
                primal_value: None,
                dual_value: None,
            })
        })
        .collect();
    for (i, evaluation) in misses.into_iter().zip(solved) {
        cache.write(evaluation.record.clone())?;
        out[i] = Some(evaluation);
    }
    Ok(out.into_iter().map(|e| e.expect("every slot filled")).collect())
}

fn lp_solves(evaluations: &[Evaluation]) -> usize {
    evaluations.iter().filter(|e| e.solved()).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadrupleSummary {
    pub total: usize,
    pub criterion_true: usize,
    pub lp_indistinguishable: usize,
    /// Quadruples where the criterion and the LP disagree.
    pub disagreements: Vec<String>,
    pub indistinguishable: Vec<String>,
    /// Distribution of alpha over the indistinguishable quadruples.
    pub alpha_values: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct QuadrupleCensus {
    pub summary: QuadrupleSummary,
    pub evaluations: Vec<Evaluation>,
    pub lp_solves: usize,
}

/// Every 4-subset of the 16 labels at `t = 2`, decided by both the column
/// criterion and the LP.
pub fn enumerate_quadruples_t2(mode: AlphaMode, cache: &mut CensusCache, stamp: bool) -> Result<QuadrupleCensus, CensusError> {
    let mut sets = Vec::with_capacity(1820);
    for a in 0..16u32 {
        for b in a + 1..16 {
            for c in b + 1..16 {
                for d in c + 1..16 {
                    sets.push(StateSet::from_linear(2, &[a, b, c, d])?);
                }
            }
        }
    }
    let evaluations = evaluate_sets(&sets, mode, cache, stamp)?;
    let mut summary = QuadrupleSummary {
        total: sets.len(),
        criterion_true: 0,
        lp_indistinguishable: 0,
        disagreements: Vec::new(),
        indistinguishable: Vec::new(),
        alpha_values: BTreeMap::new(),
    };
    for (set, evaluation) in sets.iter().zip(&evaluations) {
        let criterion = quad_criterion_t2(set)?;
        let indistinguishable = !evaluation.record.distinguishable;
        summary.criterion_true += criterion as usize;
        if indistinguishable {
            summary.lp_indistinguishable += 1;
            summary.indistinguishable.push(set.to_string());
            *summary.alpha_values.entry(evaluation.record.alpha.to_string()).or_insert(0) += 1;
        }
        if criterion != indistinguishable {
            summary.disagreements.push(set.to_string());
        }
    }
    Ok(QuadrupleCensus {
        summary,
        lp_solves: lp_solves(&evaluations),
        evaluations,
    })
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub sets: Vec<StateSet>,
    pub evaluations: Vec<Evaluation>,
    pub lp_solves: usize,
}

/// `n` independent uniform `k`-subsets of the `4^t` labels, deterministic in
/// `seed`.
pub fn sample_sets(t: u32, k: usize, n: usize, seed: u64) -> Result<Vec<StateSet>, CensusError> {
    let dim = dimension(t);
    if k == 0 || k > dim {
        return Err(CensusError::BadArgument(format!("k = {k} must lie in 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let picks: Vec<u32> = sample(&mut rng, dim, k).into_iter().map(|i| i as u32).collect();
            StateSet::from_linear(t, &picks).map_err(CensusError::from)
        })
        .collect()
}

pub fn random_sample_census(
    t: u32,
    k: usize,
    n: usize,
    seed: u64,
    mode: AlphaMode,
    cache: &mut CensusCache,
    stamp: bool,
) -> Result<SampleRun, CensusError> {
    if n == 0 {
        return Err(CensusError::BadArgument("n must be at least 1".into()));
    }
    let sets = sample_sets(t, k, n, seed)?;
    let evaluations = evaluate_sets(&sets, mode, cache, stamp)?;
    Ok(SampleRun {
        lp_solves: lp_solves(&evaluations),
        sets,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub set: StateSet,
    /// The shared columns, each negative on every member.
    pub columns: Vec<String>,
    /// Size of the common-negative row set the members were drawn from.
    pub common: usize,
}

fn first_subset(masks: &[RowMask], s: usize, k: usize, chosen: &mut Vec<usize>, prefix: &RowMask) -> Option<RowMask> {
    if chosen.len() == s {
        return Some(prefix.clone());
    }
    let start = chosen.last().map_or(1, |c| c + 1);
    for c in start..masks.len() {
        let next = prefix.intersection(&masks[c]);
        if next.count() < k {
            continue;
        }
        chosen.push(c);
        if let Some(found) = first_subset(masks, s, k, chosen, &next) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}

/// Takes the lexicographically first `s`-subset of columns containing column
/// `0` whose common-negative rows number at least `k`, translates it by a
/// seeded label `z`, and draws `k` of its common-negative rows.
pub fn construct_candidate(t: u32, s: usize, k: usize, seed: u64) -> Result<Candidate, CensusError> {
    let oracle = SignOracle::new(t)?;
    let n = dimension(t);
    if s == 0 || s > n || k == 0 {
        return Err(CensusError::BadArgument(format!("need 1 ≤ s ≤ {n} and k ≥ 1")));
    }
    let masks: Vec<RowMask> = (0..n as u32)
        .map(|c| oracle.family(&LatticeIndex::from_linear(t, c).expect("in range")).rows)
        .collect();
    let mut chosen = vec![0];
    let common = if masks[0].count() < k {
        None
    } else {
        first_subset(&masks, s, k, &mut chosen, &masks[0])
    }
    .ok_or(CensusError::NoCandidate { t, s, k })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = rng.gen_range(0..n) as u32;
    let rows: Vec<usize> = common.iter().collect();
    let mut picks: Vec<u32> = sample(&mut rng, rows.len(), k).into_iter().map(|i| rows[i] as u32 ^ z).collect();
    picks.sort_unstable();
    Ok(Candidate {
        set: StateSet::from_linear(t, &picks)?,
        columns: chosen
            .iter()
            .map(|&c| LatticeIndex::from_linear(t, c as u32 ^ z).expect("in range").to_string())
            .collect(),
        common: rows.len(),
    })
}

/// Pairs `(S, S′)` with `S ⊂ S′`, `S` indistinguishable and `S′`
/// distinguishable; restricting a perfect POVM makes any such pair a defect.
pub fn downward_closure_violations<'a>(
    records: impl IntoIterator<Item = &'a CensusRecord>,
) -> Result<Vec<(String, String)>, CensusError> {
    let parsed: Vec<(StateSet, RowMask, bool)> = records
        .into_iter()
        .map(|r| {
            let set = r.state_set()?;
            let mask = set.as_mask();
            Ok((set, mask, r.distinguishable))
        })
        .collect::<Result<_, CensusError>>()?;
    let mut violations = Vec::new();
    for (small, small_mask, small_dist) in &parsed {
        if *small_dist {
            continue;
        }
        for (big, big_mask, big_dist) in &parsed {
            if *big_dist && big.t() == small.t() && big.k() > small.k() && small_mask.intersection(big_mask) == *small_mask {
                violations.push((small.to_string(), big.to_string()));
            }
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitCheck {
    pub set: String,
    pub image: String,
    pub translation: String,
    pub permutation: Vec<usize>,
    pub alpha: Fraction,
    pub image_alpha: Fraction,
    pub pass: bool,
}

/// Re-solves `count` images `(S ⊕ z)` with permuted factors, for records drawn
/// at random, and compares alpha.
pub fn orbit_checks(records: &[CensusRecord], count: usize, seed: u64, mode: AlphaMode) -> Result<Vec<OrbitCheck>, CensusError> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(count);
    for _ in 0..count {
        let record = &records[rng.gen_range(0..records.len())];
        let set = record.state_set()?;
        let t = set.t();
        let z = LatticeIndex::from_linear(t, rng.gen_range(0..dimension(t)) as u32)?;
        let mut perm: Vec<usize> = (0..t as usize).collect();
        perm.shuffle(&mut rng);
        let image = set.translate(&z).permute_factors(&perm)?;
        jobs.push((record, z, perm, image));
    }
    Ok(jobs
        .into_par_iter()
        .map(|(record, z, perm, image)| {
            let image_alpha = alpha(&image, mode).alpha;
            OrbitCheck {
                set: record.set.clone(),
                image: image.to_string(),
                translation: z.to_string(),
                permutation: perm,
                pass: image_alpha == record.alpha,
                alpha: record.alpha.clone(),
                image_alpha,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::common_negative_columns;

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_sets(2, 4, 20, 7).unwrap();
        assert_eq!(a, sample_sets(2, 4, 20, 7).unwrap());
        assert_ne!(a, sample_sets(2, 4, 20, 8).unwrap());
        assert!(a.iter().all(|s| s.k() == 4));
        assert!(sample_sets(2, 17, 1, 0).is_err());
    }

    #[test]
    fn candidate_t2_is_indistinguishable() {
        for seed in 0..4 {
            let c = construct_candidate(2, 1, 4, seed).unwrap();
            assert_eq!(c.common, 6);
            assert_eq!(c.set.k(), 4);
            let column: LatticeIndex = c.columns[0].parse().unwrap();
            assert!(common_negative_columns(&c.set).contains(&column));
            assert!(alpha(&c.set, AlphaMode::Exact).alpha < Fraction::one());
        }
        assert!(matches!(construct_candidate(2, 2, 3, 0), Err(CensusError::NoCandidate { .. })));
    }

    #[test]
    fn candidate_columns_share_rows_t3() {
        let c = construct_candidate(3, 2, 8, 1).unwrap();
        assert_eq!(c.common, 12);
        let shared = common_negative_columns(&c.set);
        for col in &c.columns {
            assert!(shared.contains(&col.parse().unwrap()));
        }
    }

    #[test]
    fn warm_cache_skips_solves() {
        let mut cache = CensusCache::in_memory();
        let first = random_sample_census(2, 5, 12, 3, AlphaMode::Screen, &mut cache, false).unwrap();
        let second = random_sample_census(2, 5, 12, 3, AlphaMode::Screen, &mut cache, false).unwrap();
        assert!(first.lp_solves > 0);
        assert_eq!(second.lp_solves, 0);
        let records = |r: &SampleRun| r.evaluations.iter().map(|e| e.record.clone()).collect::<Vec<_>>();
        assert_eq!(records(&first), records(&second));
    }

    #[test]
    fn closure_flags_planted_violation() {
        let rec = |set: &str, alpha: Fraction| {
            let s = StateSet::parse(set).unwrap();
            CensusRecord {
                t: s.t(),
                k: s.k(),
                set: s.to_string(),
                distinguishable: alpha.is_one(),
                alpha,
                method: crate::ppt::Method::ExactLp,
                certificate_digest: String::new(),
                timestamp: None,
            }
        };
        let records = vec![rec("00,11,21,31", Fraction::new(7, 8)), rec("00,01,11,21,31", Fraction::one())];
        assert_eq!(downward_closure_violations(&records).unwrap().len(), 1);
        assert!(downward_closure_violations(&records[..1]).unwrap().is_empty());
    }
}
