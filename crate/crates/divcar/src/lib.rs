//! Diverse, compatibility-aware API set recommendation.
//!
//! Given a keyword query over an ecosystem of apps and the web APIs they
//! invoke, this crate recommends up to K mutually diverse sets of APIs
//! that each cover every keyword and whose members have strong co-usage
//! evidence. The flow: build a correlation graph whose edge costs are
//! reciprocal co-usage counts, draw seeded random-walk subgraph samples,
//! solve a minimum group Steiner tree in each sample, then rank the trees
//! and greedily enforce a pairwise diversity threshold.

pub mod corpus;
pub mod cost;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod ranker;
pub mod sampler;
pub mod steiner;

pub use corpus::{
    derive_queries, gen_synthetic, load_ecosystem, ApiId, AppId, CorpusFormat, Ecosystem,
    GenParams, Query,
};
pub use cost::Cost;
pub use error::{Error, Result};
pub use graph::{build_graph, keyword_nodes, max_component, ApiGraph, GraphSnapshot, GraphView};
pub use metrics::MetricsReport;
pub use oracle::{brute_force_group_steiner, OracleLimits};
pub use pipeline::{
    baseline, evaluate, recommend, sweep, EvaluateOptions, EvaluationReport, PipelineParams,
    RecommendationOutput,
};
pub use ranker::{
    pairwise_diversity, rank_and_diversify, Recommendation, RecommendationSet, Score, ScoringMode,
};
pub use sampler::{sample_subgraphs, SampleRun, SubgraphSample};
pub use steiner::{min_group_steiner, search_full_trees, SteinerResult, R_MAX};
