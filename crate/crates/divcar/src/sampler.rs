//! Seeded random-walk subgraph sampling.
//!
//! Each sample grows a vertex set from a random keyword vertex until it
//! reaches the target size `p` or provably cannot grow. Samples that fail
//! to cover every query keyword are retried on a fresh stream and dropped
//! after `max_retries` attempts.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ApiId, Query};
use crate::error::{Error, Result};
use crate::graph::{keyword_nodes, ApiGraph, GraphView};

/// One induced subgraph drawn by a random walk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgraphSample {
    /// Ordinal in `[0, z)`.
    pub index: usize,
    /// The stream seed the accepted walk ran on.
    pub seed: u64,
    /// Sampled vertex ids, original ids preserved.
    pub nodes: BTreeSet<ApiId>,
}

impl SubgraphSample {
    /// The induced view over the parent graph.
    pub fn view<'g>(&self, g: &'g ApiGraph) -> GraphView<'g> {
        g.view(self.nodes.clone())
    }
}

/// Result of a sampling run: accepted samples plus dropped indices.
#[derive(Clone, Debug, Default)]
pub struct SampleRun {
    pub samples: Vec<SubgraphSample>,
    pub skipped: Vec<usize>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-(sample, attempt) stream seed. Sample `i` never depends on `z`.
pub fn stream_seed(seed: u64, index: usize, attempt: usize) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(index as u64)) ^ (attempt as u64))
}

/// Grows a vertex set from `start` by uniform random neighbor steps.
///
/// At each step a uniformly random neighbor of the current vertex is
/// chosen; it becomes current and is added if new. When every neighbor of
/// the current vertex is already sampled, the walk jumps to a uniformly
/// random already-sampled vertex. It stops at `p` vertices or when no
/// sampled vertex has an unsampled neighbor left.
pub fn random_walk(g: &ApiGraph, start: ApiId, p: usize, rng: &mut impl Rng) -> BTreeSet<ApiId> {
    let mut sampled = BTreeSet::from([start]);
    let mut current = start;
    while sampled.len() < p {
        let neighbors: Vec<ApiId> = g.neighbors(current).map(|(v, _)| v).collect();
        let stuck = neighbors.iter().all(|v| sampled.contains(v));
        if neighbors.is_empty() || stuck {
            let can_grow = sampled
                .iter()
                .any(|&v| g.neighbors(v).any(|(u, _)| !sampled.contains(&u)));
            if !can_grow {
                break;
            }
            let picks: Vec<ApiId> = sampled.iter().copied().collect();
            current = picks[rng.gen_range(0..picks.len())];
            continue;
        }
        let next = neighbors[rng.gen_range(0..neighbors.len())];
        sampled.insert(next);
        current = next;
    }
    sampled
}

/// Draws up to `z` keyword-covering samples of target size `p`.
///
/// Sample `i` is a pure function of `(g, q, p, seed, i)`; samples are
/// computed in parallel and returned in index order.
pub fn sample_subgraphs(
    g: &ApiGraph,
    query: &Query,
    z: usize,
    p: usize,
    seed: u64,
    max_retries: usize,
) -> Result<SampleRun> {
    if z < 1 {
        return Err(Error::Parameter("z must be >= 1".into()));
    }
    if p < query.len() {
        return Err(Error::Parameter(format!(
            "sample size p={p} is smaller than query length r={}",
            query.len()
        )));
    }
    let groups = keyword_nodes(g, query)?;
    let key_union: Vec<ApiId> = groups
        .iter()
        .flat_map(|(_, set)| set.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let covers = |nodes: &BTreeSet<ApiId>| {
        groups.iter().all(|(_, set)| set.iter().any(|v| nodes.contains(v)))
    };

    let drawn: Vec<Option<SubgraphSample>> = (0..z)
        .into_par_iter()
        .map(|index| {
            for attempt in 0..=max_retries {
                let stream = stream_seed(seed, index, attempt);
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                let start = key_union[rng.gen_range(0..key_union.len())];
                let nodes = random_walk(g, start, p, &mut rng);
                if covers(&nodes) {
                    return Some(SubgraphSample { index, seed: stream, nodes });
                }
            }
            None
        })
        .collect();

    let mut run = SampleRun::default();
    for (index, sample) in drawn.into_iter().enumerate() {
        match sample {
            Some(s) => run.samples.push(s),
            None => run.skipped.push(index),
        }
    }
    if run.samples.is_empty() {
        return Err(Error::NoValidSample);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::worked_example;
    use std::collections::BTreeMap;

    fn star6() -> ApiGraph {
        // center 0, leaves 1..=6
        ApiGraph::from_parts(
            (0..=6u64).map(|i| (i, BTreeSet::from([format!("kw{i}")]))),
            (1..=6u64).map(|leaf| (0, leaf, 1)),
        )
        .unwrap()
    }

    #[test]
    fn walk_dead_end_returns_start_alone() {
        let g = ApiGraph::from_parts(
            vec![(0, BTreeSet::from(["a".to_string()])), (1, BTreeSet::from(["b".to_string()]))],
            vec![],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_walk(&g, 0, 5, &mut rng), BTreeSet::from([0]));
    }

    #[test]
    fn walk_on_path_graph_is_forced() {
        let g = ApiGraph::from_parts(
            (0..3u64).map(|i| (i, BTreeSet::from([format!("kw{i}")]))),
            vec![(0, 1, 1), (1, 2, 1)],
        )
        .unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(random_walk(&g, 0, 3, &mut rng), BTreeSet::from([0, 1, 2]));
        }
    }

    #[test]
    fn star_leaf_frequency_is_uniform() {
        // p=4 keeps the center plus 3 of 6 leaves; each leaf should show
        // up in half the walks.
        let g = star6();
        let mut freq: BTreeMap<ApiId, usize> = BTreeMap::new();
        let n = 1000;
        for seed in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes = random_walk(&g, 0, 4, &mut rng);
            assert_eq!(nodes.len(), 4);
            assert!(nodes.contains(&0));
            for leaf in nodes {
                if leaf != 0 {
                    *freq.entry(leaf).or_default() += 1;
                }
            }
        }
        for leaf in 1..=6u64 {
            let f = freq[&leaf] as f64 / n as f64;
            assert!((f - 0.5).abs() < 0.05, "leaf {leaf} frequency {f}");
        }
    }

    #[test]
    fn walk_saturates_whole_component() {
        let g = worked_example::graph();
        let comp = crate::graph::max_component(&g).unwrap();
        let q = Query::new(["q1", "q3", "q7"]).unwrap();
        let run = sample_subgraphs(&comp, &q, 1, comp.vertex_count(), 11, 10).unwrap();
        assert_eq!(run.samples[0].nodes.len(), comp.vertex_count());
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let g = crate::graph::max_component(&worked_example::graph()).unwrap();
        let q = Query::new(["q1", "q3", "q7"]).unwrap();
        let a = sample_subgraphs(&g, &q, 2, 5, 42, 10).unwrap();
        let b = sample_subgraphs(&g, &q, 2, 5, 42, 10).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.nodes, y.nodes);
        }
        // growing z leaves earlier indices untouched
        let c = sample_subgraphs(&g, &q, 5, 5, 42, 10).unwrap();
        for (x, y) in a.samples.iter().zip(&c.samples) {
            assert_eq!(x.nodes, y.nodes);
        }
    }

    #[test]
    fn every_sample_covers_the_query() {
        let g = crate::graph::max_component(&worked_example::graph()).unwrap();
        let q = Query::new(["q1", "q3", "q7"]).unwrap();
        let run = sample_subgraphs(&g, &q, 50, 4, 7, 10).unwrap();
        let groups = keyword_nodes(&g, &q).unwrap();
        for s in &run.samples {
            for (kw, set) in &groups {
                assert!(
                    set.iter().any(|v| s.nodes.contains(v)),
                    "sample {} misses {kw}",
                    s.index
                );
            }
        }
    }

    #[test]
    fn p_smaller_than_r_is_rejected() {
        let g = crate::graph::max_component(&worked_example::graph()).unwrap();
        let q = Query::new(["q1", "q3", "q7"]).unwrap();
        assert!(matches!(
            sample_subgraphs(&g, &q, 1, 2, 42, 10),
            Err(Error::Parameter(_))
        ));
    }
}
