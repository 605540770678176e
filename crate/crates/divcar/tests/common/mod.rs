//! Shared fixture plumbing for the integration tests.
//!
//! The fixture ecosystem is generated deterministically (see
//! `fixture_regen.rs`) and shipped together with a manifest of pinned
//! values derived from it; the pin tests assert the shipped numbers.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use divcar::corpus::{derive_queries, Ecosystem, GenParams, Query};
use divcar::graph::{build_graph, keyword_nodes, max_component, ApiGraph};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn ecosystem_path() -> PathBuf {
    fixture_dir().join("fixture.ecosystem.json")
}

pub fn manifest_path() -> PathBuf {
    fixture_dir().join("manifest.json")
}

/// The generator configuration the fixture is pinned to.
pub fn fixture_gen_params() -> GenParams {
    GenParams { n_apis: 2500, n_apps: 6000, n_keywords: 60, seed: 42, ..Default::default() }
}

pub fn load_fixture() -> Ecosystem {
    let text = std::fs::read_to_string(ecosystem_path()).expect("fixture file present");
    let mut eco: Ecosystem = serde_json::from_str(&text).expect("fixture parses");
    eco.validate().expect("fixture is valid");
    eco
}

pub fn load_manifest() -> Manifest {
    let text = std::fs::read_to_string(manifest_path()).expect("manifest file present");
    serde_json::from_str(&text).expect("manifest parses")
}

/// The fixture's working graph: the largest connected component of its
/// co-usage graph.
pub fn fixture_component(eco: &Ecosystem) -> ApiGraph {
    max_component(&build_graph(eco)).expect("fixture graph is non-empty")
}

/// Derived queries with `r` in `[lo, hi]` whose keywords are all
/// coverable inside the component, in corpus order.
pub fn coverable_queries(
    eco: &Ecosystem,
    g: &ApiGraph,
    lo: usize,
    hi: usize,
) -> Vec<(Query, divcar::corpus::AppRecord)> {
    derive_queries(eco, Some((lo, hi)))
        .into_iter()
        .filter(|(q, _)| keyword_nodes(g, q).is_ok())
        .collect()
}

/// The first coverable derived query with exactly `r` keywords.
pub fn first_query_of_len(eco: &Ecosystem, g: &ApiGraph, r: usize) -> Query {
    coverable_queries(eco, g, r, r)
        .into_iter()
        .map(|(q, _)| q)
        .next()
        .expect("fixture yields a query of the requested length")
}

/// Mean pairwise Jaccard distance between sampled vertex sets.
pub fn mean_jaccard_distance(samples: &[BTreeSet<u64>]) -> f64 {
    let n = samples.len();
    assert!(n >= 2);
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in 0..i {
            let inter = samples[i].intersection(&samples[j]).count() as f64;
            let union = (samples[i].len() + samples[j].len()) as f64 - inter;
            sum += 1.0 - inter / union;
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// The documented worked-example topology: an eight-vertex connected
/// graph plus a separate two-vertex component. Vertex 5 carries q1/q5,
/// vertex 1 carries q3, vertices 0 and 2 both carry q7; the two optimal
/// trees for {q1,q3,q7} are {0,1,5} and {1,2,5}, each of cost 7/12.
pub fn worked_example_graph() -> ApiGraph {
    let kw = |tags: &[&str]| -> BTreeSet<String> { tags.iter().map(|s| s.to_string()).collect() };
    ApiGraph::from_parts(
        vec![
            (0, kw(&["q7"])),
            (1, kw(&["q3"])),
            (2, kw(&["q2", "q7"])),
            (3, kw(&["q1", "q4", "q12"])),
            (4, kw(&["q9"])),
            (5, kw(&["q1", "q5"])),
            (6, kw(&["q6"])),
            (7, kw(&["q10"])),
            (8, kw(&["q8"])),
            (9, kw(&["q11"])),
        ],
        vec![
            (5, 1, 3),
            (1, 2, 4),
            (1, 0, 4),
            (2, 3, 2),
            (3, 4, 1),
            (3, 6, 1),
            (6, 7, 1),
            (4, 7, 1),
            (8, 9, 1),
        ],
    )
    .unwrap()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub gen: GenParams,
    pub api_count: usize,
    pub app_count: usize,
    pub graph: GraphPins,
    pub queries: QueryPins,
    pub sampling: SamplingPins,
    pub recommend: RecommendPins,
    pub baseline: BaselinePins,
    pub evaluate: EvaluatePins,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphPins {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_component_size: usize,
    pub max_component_edges: usize,
    /// Keyword tagging the most vertices in the full graph.
    pub top_keyword: String,
    pub top_keyword_vertices: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryPins {
    pub r_min: usize,
    pub r_max: usize,
    /// Derived queries in that length range.
    pub count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SamplingPins {
    pub query: Vec<String>,
    pub z: usize,
    pub p: usize,
    pub seed: u64,
    pub samples: usize,
    pub mean_pairwise_jaccard_distance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecommendPins {
    pub query: Vec<String>,
    pub z: usize,
    pub p: usize,
    pub k: usize,
    pub theta: f64,
    pub seed: u64,
    pub selected: usize,
    pub mild: f64,
    pub milc: f64,
    pub top_cost_exact: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BaselinePins {
    pub query: Vec<String>,
    pub k: usize,
    pub theta: f64,
    pub selected: usize,
    pub mild: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluatePins {
    pub r_min: usize,
    pub r_max: usize,
    /// The aggregate is computed over the first `max_queries` derived
    /// queries; per-query seeds make it independent of the cap.
    pub max_queries: usize,
    pub z: usize,
    pub p: usize,
    pub instances: usize,
    pub aggregate_mp: f64,
    pub aggregate_mild: f64,
}
