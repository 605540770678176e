//! Ranking and diversity-threshold selection of candidate trees.
//!
//! Candidates are scored (precision against ground truth in evaluation
//! mode, reciprocal cost in deployment mode), sorted, and greedily
//! selected so that every pair in the final list has diversity strictly
//! greater than the threshold.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::ApiId;
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::steiner::SteinerResult;

/// What drives the ranking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringMode {
    /// Precision against a known ground-truth API set.
    Evaluation,
    /// Reciprocal tree cost; no ground truth needed.
    Deployment,
}

/// Exact ranking score. Zero-cost trees get the `Perfect` sentinel, which
/// ranks above every finite value and serializes as the string "perfect".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Score {
    Perfect,
    Value(BigRational),
}

impl Score {
    pub fn to_f64(&self) -> f64 {
        match self {
            Score::Perfect => f64::INFINITY,
            Score::Value(v) => v.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn rank_key(&self) -> (bool, Option<&BigRational>) {
        match self {
            Score::Perfect => (true, None),
            Score::Value(v) => (false, Some(v)),
        }
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.rank_key(), other.rank_key()) {
            ((true, _), (true, _)) => std::cmp::Ordering::Equal,
            ((true, _), (false, _)) => std::cmp::Ordering::Greater,
            ((false, _), (true, _)) => std::cmp::Ordering::Less,
            ((false, Some(a)), (false, Some(b))) => a.cmp(b),
            _ => unreachable!(),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Score::Perfect => serializer.serialize_str("perfect"),
            Score::Value(v) => serializer.serialize_f64(v.to_f64().unwrap_or(f64::NAN)),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) if s == "perfect" => Ok(Score::Perfect),
            Raw::Text(s) => Err(D::Error::custom(format!("unknown score {s:?}"))),
            Raw::Number(x) => BigRational::from_float(x)
                .map(Score::Value)
                .ok_or_else(|| D::Error::custom("non-finite score")),
        }
    }
}

/// One ranked API composition.
#[derive(Clone, Debug)]
pub struct Recommendation {
    pub apis: BTreeSet<ApiId>,
    pub cost: Cost,
    pub score: Score,
    /// Index of the sample the tree came from; `None` for baseline trees.
    pub sample_index: Option<usize>,
}

impl Recommendation {
    pub fn from_tree(tree: &SteinerResult, sample_index: Option<usize>) -> Recommendation {
        Recommendation {
            apis: tree.vertices.clone(),
            cost: tree.cost.clone(),
            score: compatibility_score(&tree.cost),
            sample_index,
        }
    }

    /// Reciprocal tree cost, `Perfect` for the zero-cost case.
    pub fn compatibility(&self) -> Score {
        compatibility_score(&self.cost)
    }
}

fn compatibility_score(cost: &Cost) -> Score {
    match cost.reciprocal() {
        None => Score::Perfect,
        Some(r) => Score::Value(r),
    }
}

/// The final top-K list: pairwise diversity strictly above `theta`,
/// scores non-increasing.
#[derive(Clone, Debug)]
pub struct RecommendationSet {
    pub items: Vec<Recommendation>,
    pub theta: f64,
    pub scoring_mode: ScoringMode,
}

/// Overlap-based set diversity: `1 - |a ∩ b| / (|a| + |b|)`.
/// Identical sets score 0.5, disjoint sets 1.0.
pub fn pairwise_diversity(a: &BTreeSet<ApiId>, b: &BTreeSet<ApiId>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("diversity of an empty API set".into()));
    }
    let shared = a.intersection(b).count() as f64;
    Ok(1.0 - shared / (a.len() + b.len()) as f64)
}

/// Scores, sorts and greedily diversifies `candidates` down to at most
/// `k` items whose pairwise diversity all exceeds `theta`.
pub fn rank_and_diversify(
    candidates: Vec<Recommendation>,
    k: usize,
    theta: f64,
    mode: ScoringMode,
    ground_truth: Option<&BTreeSet<ApiId>>,
) -> Result<RecommendationSet> {
    if k < 1 {
        return Err(Error::Parameter("K must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Parameter("theta must lie in [0, 1]".into()));
    }
    let truth = match (mode, ground_truth) {
        (ScoringMode::Evaluation, Some(t)) if !t.is_empty() => Some(t),
        (ScoringMode::Evaluation, _) => {
            return Err(Error::Parameter(
                "evaluation mode requires a non-empty ground-truth set".into(),
            ));
        }
        (ScoringMode::Deployment, _) => None,
    };

    let total = candidates.len();
    let mut scored: BTreeMap<BTreeSet<ApiId>, Recommendation> = BTreeMap::new();
    for mut cand in candidates {
        if cand.apis.is_empty() {
            return Err(Error::Domain("candidate with empty API set".into()));
        }
        cand.score = match truth {
            Some(t) => {
                let hits = cand.apis.intersection(t).count();
                Score::Value(BigRational::new(
                    BigInt::from(hits),
                    BigInt::from(cand.apis.len()),
                ))
            }
            None => cand.compatibility(),
        };
        let replace = match scored.get(&cand.apis) {
            None => true,
            Some(prev) => {
                cand.score > prev.score
                    || (cand.score == prev.score && cand.cost < prev.cost)
                    || (cand.score == prev.score
                        && cand.cost == prev.cost
                        && cand.sample_index < prev.sample_index)
            }
        };
        if replace {
            scored.insert(cand.apis.clone(), cand);
        }
    }
    let distinct = scored.len();

    let mut ranked: Vec<Recommendation> = scored.into_values().collect();
    ranked.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.cost.cmp(&b.cost))
            .then_with(|| a.apis.iter().cmp(b.apis.iter()))
    });

    let mut items: Vec<Recommendation> = Vec::new();
    for cand in ranked {
        if items.len() == k {
            break;
        }
        let mut ok = true;
        for chosen in &items {
            if pairwise_diversity(&cand.apis, &chosen.apis)? <= theta {
                ok = false;
                break;
            }
        }
        if ok {
            items.push(cand);
        }
    }

    if items.is_empty() {
        return Err(Error::EmptyResult { candidates: total, distinct });
    }
    Ok(RecommendationSet { items, theta, scoring_mode: mode })
}
