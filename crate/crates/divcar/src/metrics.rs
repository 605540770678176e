//! Evaluation measures over one experiment instance: inter-list
//! diversity (HMD/MILD), inner-list compatibility (MILC), precision and
//! recall against an app's real API set, and the harmonic
//! diversity-accuracy summary.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ApiId;
use crate::error::{Error, Result};
use crate::ranker::{RecommendationSet, Score};

/// Hamming-style diversity of two recommendation lists:
/// `1 - |a ∩ b| / (|a| + |b|)`. Disjoint lists score 1, identical 0.5.
pub fn hmd(a: &BTreeSet<ApiId>, b: &BTreeSet<ApiId>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("hmd of an empty list".into()));
    }
    let shared = a.intersection(b).count() as f64;
    Ok(1.0 - shared / (a.len() + b.len()) as f64)
}

/// Mean inter-list diversity over all ordered pairs of the K lists.
pub fn mild(lists: &[BTreeSet<ApiId>]) -> Result<f64> {
    let k = lists.len();
    if k < 2 {
        return Err(Error::Domain("mild needs at least two lists".into()));
    }
    let mut sum = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                sum += hmd(&lists[i], &lists[j])?;
            }
        }
    }
    Ok(sum / (k * (k - 1)) as f64)
}

/// Mean inner-list compatibility with the number of zero-cost lists that
/// were excluded from the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilcValue {
    pub mean: f64,
    pub perfect_excluded: usize,
}

/// Mean of per-list reciprocal costs. Zero-cost ("perfect") lists are
/// left out of the mean and counted separately.
pub fn milc(recs: &RecommendationSet) -> MilcValue {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut perfect = 0usize;
    for item in &recs.items {
        match item.compatibility() {
            Score::Perfect => perfect += 1,
            value => {
                sum += value.to_f64();
                n += 1;
            }
        }
    }
    MilcValue {
        mean: if n > 0 { sum / n as f64 } else { 0.0 },
        perfect_excluded: perfect,
    }
}

/// Mean precision: average of `|RL_i ∩ truth| / |RL_i|`.
pub fn mp(lists: &[BTreeSet<ApiId>], truth: &BTreeSet<ApiId>) -> Result<f64> {
    if lists.is_empty() {
        return Err(Error::Domain("mp of an empty list collection".into()));
    }
    if truth.is_empty() {
        return Err(Error::Domain("mp against an empty truth set".into()));
    }
    let mut sum = 0.0;
    for list in lists {
        if list.is_empty() {
            return Err(Error::Domain("mp of an empty list".into()));
        }
        sum += list.intersection(truth).count() as f64 / list.len() as f64;
    }
    Ok(sum / lists.len() as f64)
}

/// Mean recall: average of `|RL_i ∩ truth| / |truth|`.
pub fn mr(lists: &[BTreeSet<ApiId>], truth: &BTreeSet<ApiId>) -> Result<f64> {
    if lists.is_empty() {
        return Err(Error::Domain("mr of an empty list collection".into()));
    }
    if truth.is_empty() {
        return Err(Error::Domain("mr against an empty truth set".into()));
    }
    let mut sum = 0.0;
    for list in lists {
        if list.is_empty() {
            return Err(Error::Domain("mr of an empty list".into()));
        }
        sum += list.intersection(truth).count() as f64 / truth.len() as f64;
    }
    Ok(sum / lists.len() as f64)
}

/// F2-style harmonic mean of precision and diversity:
/// `5 * mp * mild / (4 * mp + mild)`.
pub fn harmonic(mp: f64, mild: f64) -> f64 {
    let den = 4.0 * mp + mild;
    if den == 0.0 {
        0.0
    } else {
        5.0 * mp * mild / den
    }
}

/// All measures for one (query, z, p) cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when fewer than two lists were emitted.
    pub mild: Option<f64>,
    pub milc: f64,
    pub milc_perfect_excluded: usize,
    pub mp: f64,
    pub mr: f64,
    pub harmonic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_seconds: Option<f64>,
    pub k: usize,
    pub r: usize,
    pub z: usize,
    pub p: usize,
}

impl MetricsReport {
    /// Computes every measure for an emitted recommendation set against
    /// the ground-truth API set.
    pub fn compute(
        recs: &RecommendationSet,
        truth: &BTreeSet<ApiId>,
        r: usize,
        z: usize,
        p: usize,
        time_seconds: Option<f64>,
    ) -> Result<MetricsReport> {
        let lists: Vec<BTreeSet<ApiId>> = recs.items.iter().map(|i| i.apis.clone()).collect();
        let mp_v = mp(&lists, truth)?;
        let mr_v = mr(&lists, truth)?;
        let mild_v = if lists.len() >= 2 { Some(mild(&lists)?) } else { None };
        let milc_v = milc(recs);
        Ok(MetricsReport {
            mild: mild_v,
            milc: milc_v.mean,
            milc_perfect_excluded: milc_v.perfect_excluded,
            mp: mp_v,
            mr: mr_v,
            harmonic: mild_v.map(|d| harmonic(mp_v, d)),
            time_seconds,
            k: lists.len(),
            r,
            z,
            p,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;
    use crate::ranker::{Recommendation, ScoringMode};
    use proptest::prelude::*;

    fn set(ids: &[ApiId]) -> BTreeSet<ApiId> {
        ids.iter().copied().collect()
    }

    #[test]
    fn hmd_worked_values() {
        assert_eq!(hmd(&set(&[1, 2]), &set(&[3, 4])).unwrap(), 1.0);
        assert_eq!(hmd(&set(&[1, 2, 3]), &set(&[1, 2, 3])).unwrap(), 0.5);
        assert_eq!(hmd(&set(&[1, 2, 3]), &set(&[1, 4])).unwrap(), 0.8);
    }

    #[test]
    fn mild_worked_values() {
        assert_eq!(mild(&[set(&[1]), set(&[2])]).unwrap(), 1.0);
        let same = vec![set(&[1, 2]), set(&[1, 2]), set(&[1, 2])];
        assert_eq!(mild(&same).unwrap(), 0.5);
        assert!(matches!(mild(&[set(&[1])]), Err(Error::Domain(_))));
    }

    fn recs_with_costs(costs: &[Option<u64>]) -> RecommendationSet {
        let items = costs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let cost = match c {
                    None => Cost::zero(),
                    Some(k) => Cost::from_count(*k),
                };
                Recommendation {
                    apis: set(&[i as ApiId]),
                    score: Score::Perfect,
                    cost,
                    sample_index: None,
                }
            })
            .collect();
        RecommendationSet { items, theta: 0.0, scoring_mode: ScoringMode::Deployment }
    }

    #[test]
    fn milc_means_reciprocal_costs() {
        // one list of cost 1/4 -> 4.0
        let one = recs_with_costs(&[Some(4)]);
        assert_eq!(milc(&one).mean, 4.0);
        // costs 1/2 and 1/4 -> mean of 2 and 4 = 3
        let two = recs_with_costs(&[Some(2), Some(4)]);
        assert_eq!(milc(&two).mean, 3.0);
    }

    #[test]
    fn milc_excludes_perfect_lists() {
        let mixed = recs_with_costs(&[None, Some(4)]);
        let v = milc(&mixed);
        assert_eq!(v.mean, 4.0);
        assert_eq!(v.perfect_excluded, 1);
    }

    #[test]
    fn mp_mr_worked_values() {
        let truth = set(&[1, 2, 4]);
        assert_eq!(mp(&[truth.clone()], &truth).unwrap(), 1.0);
        assert_eq!(mp(&[set(&[1, 2, 3])], &set(&[1, 2, 4])).unwrap(), 2.0 / 3.0);
        assert_eq!(mr(&[set(&[1, 2, 3, 4])], &set(&[1, 2])).unwrap(), 1.0);
        assert_eq!(mr(&[set(&[1])], &set(&[1, 2])).unwrap(), 0.5);
    }

    #[test]
    fn harmonic_formula_consistency() {
        let h = harmonic(0.3, 0.9);
        assert!((h - 5.0 * 0.27 / 2.1).abs() < 1e-12);
        assert!((h - 0.6428571428571429).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn metrics_invariant_under_relabeling(
            lists in prop::collection::vec(prop::collection::btree_set(0u64..20, 1..6), 2..6),
            truth in prop::collection::btree_set(0u64..20, 1..6),
            offset in 1000u64..2000,
        ) {
            let relabel = |s: &BTreeSet<ApiId>| -> BTreeSet<ApiId> {
                s.iter().map(|x| x + offset).collect()
            };
            let lists2: Vec<BTreeSet<ApiId>> = lists.iter().map(|l| relabel(l)).collect();
            let truth2 = relabel(&truth);
            prop_assert_eq!(mild(&lists).unwrap(), mild(&lists2).unwrap());
            prop_assert_eq!(mp(&lists, &truth).unwrap(), mp(&lists2, &truth2).unwrap());
            prop_assert_eq!(mr(&lists, &truth).unwrap(), mr(&lists2, &truth2).unwrap());
        }

        #[test]
        fn mild_is_permutation_invariant(
            mut lists in prop::collection::vec(prop::collection::btree_set(0u64..15, 1..5), 2..6),
        ) {
            let before = mild(&lists).unwrap();
            lists.reverse();
            let after = mild(&lists).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn bounds_hold(
            lists in prop::collection::vec(prop::collection::btree_set(0u64..20, 1..6), 1..6),
            truth in prop::collection::btree_set(0u64..20, 1..6),
        ) {
            let p = mp(&lists, &truth).unwrap();
            let r = mr(&lists, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0).contains(&r));
            if lists.len() >= 2 {
                let d = mild(&lists).unwrap();
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }
    }
}
