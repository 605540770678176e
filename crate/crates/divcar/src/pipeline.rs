//! End-to-end flows: sampled recommendation, the exhaustive full-graph
//! baseline, corpus evaluation with derived queries, and parameter sweeps.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{derive_queries, ApiId, AppId, Ecosystem, Query};
use crate::error::Result;
use crate::graph::{build_graph, keyword_nodes, max_component, ApiGraph};
use crate::metrics::{harmonic, MetricsReport};
use crate::ranker::{rank_and_diversify, Recommendation, RecommendationSet, Score, ScoringMode};
use crate::sampler::{sample_subgraphs, stream_seed};
use crate::steiner::{min_group_steiner, search_full_trees};

/// Knobs shared by every flow.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PipelineParams {
    /// Number of subgraph samples.
    pub z: usize,
    /// Target vertex count per sample.
    pub p: usize,
    /// Maximum recommendations returned.
    pub k: usize,
    /// Pairwise diversity threshold; kept pairs must exceed it.
    pub theta: f64,
    pub seed: u64,
    /// Re-draws allowed per sample before it is dropped.
    pub max_retries: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams { z: 100, p: 100, k: 10, theta: 0.5, seed: 42, max_retries: 10 }
    }
}

/// A finished recommendation run with its bookkeeping.
#[derive(Clone, Debug)]
pub struct RecommendOutcome {
    pub set: RecommendationSet,
    /// Indices of samples dropped after exhausting retries.
    pub skipped_samples: Vec<usize>,
    /// Wall time of sampling, tree search and ranking.
    pub seconds: f64,
}

/// Samples `z` subgraphs, solves the minimum group Steiner tree in each,
/// then ranks and diversifies the candidate trees down to at most `k`.
pub fn recommend(
    g: &ApiGraph,
    query: &Query,
    params: &PipelineParams,
    mode: ScoringMode,
    ground_truth: Option<&BTreeSet<ApiId>>,
) -> Result<RecommendOutcome> {
    let start = Instant::now();
    let run = sample_subgraphs(g, query, params.z, params.p, params.seed, params.max_retries)?;
    let trees: Vec<Option<Recommendation>> = run
        .samples
        .par_iter()
        .map(|s| {
            let view = s.view(g);
            min_group_steiner(&view, query)
                .map(|opt| opt.map(|t| Recommendation::from_tree(&t, Some(s.index))))
        })
        .collect::<Result<_>>()?;
    let candidates: Vec<Recommendation> = trees.into_iter().flatten().collect();
    let set = rank_and_diversify(candidates, params.k, params.theta, mode, ground_truth)?;
    Ok(RecommendOutcome {
        set,
        skipped_samples: run.skipped,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Exhaustive baseline: the `k` cheapest full-coverage trees of the whole
/// graph, ranked and diversified exactly like the sampled flow.
pub fn baseline(
    g: &ApiGraph,
    query: &Query,
    params: &PipelineParams,
    mode: ScoringMode,
    ground_truth: Option<&BTreeSet<ApiId>>,
) -> Result<RecommendOutcome> {
    let start = Instant::now();
    let view = g.full_view();
    let trees = search_full_trees(&view, query, params.k)?;
    let candidates: Vec<Recommendation> =
        trees.iter().map(|t| Recommendation::from_tree(t, None)).collect();
    let set = rank_and_diversify(candidates, params.k, params.theta, mode, ground_truth)?;
    Ok(RecommendOutcome { set, skipped_samples: Vec::new(), seconds: start.elapsed().as_secs_f64() })
}

/// JSON-friendly projection of one recommendation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecommendationOutput {
    pub query: Vec<String>,
    pub scoring_mode: ScoringMode,
    pub k: usize,
    pub theta: f64,
    pub items: Vec<ItemOutput>,
    pub skipped_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_seconds: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemOutput {
    pub apis: Vec<ApiId>,
    /// API names in `apis` order, when a corpus is available to resolve them.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub names: Vec<String>,
    /// Tree cost as a float; exact form in `cost_exact`.
    pub cost: f64,
    pub cost_exact: String,
    /// Reciprocal tree cost ("perfect" for zero-cost trees).
    pub compatibility: Score,
    pub score: Score,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_index: Option<usize>,
}

impl RecommendationOutput {
    pub fn new(
        query: &Query,
        outcome: &RecommendOutcome,
        names: Option<&Ecosystem>,
        with_timings: bool,
    ) -> Self {
        RecommendationOutput {
            query: query.keywords.clone(),
            scoring_mode: outcome.set.scoring_mode,
            k: outcome.set.items.len(),
            theta: outcome.set.theta,
            items: outcome
                .set
                .items
                .iter()
                .map(|r| ItemOutput {
                    apis: r.apis.iter().copied().collect(),
                    names: names
                        .map(|eco| {
                            r.apis
                                .iter()
                                .map(|&id| {
                                    eco.api(id).map(|a| a.name.clone()).unwrap_or_default()
                                })
                                .collect()
                        })
                        .unwrap_or_default(),
                    cost: r.cost.to_f64(),
                    cost_exact: r.cost.to_string(),
                    compatibility: r.compatibility(),
                    score: r.score.clone(),
                    sample_index: r.sample_index,
                })
                .collect(),
            skipped_samples: outcome.skipped_samples.len(),
            time_seconds: if with_timings { Some(outcome.seconds) } else { None },
        }
    }
}

/// Options for the corpus evaluation flow.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvaluateOptions {
    /// Inclusive bounds on derived query length; `None` keeps everything
    /// except exactly-two-keyword queries.
    pub r_filter: Option<(usize, usize)>,
    /// Remove each ground-truth app's co-usage before recommending to it.
    pub leave_one_out: bool,
    /// Cap on the number of evaluated queries.
    pub max_queries: Option<usize>,
    /// Include wall times in reports.
    pub with_timings: bool,
}

/// One evaluated (query, ground-truth app) instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceReport {
    pub app_id: AppId,
    pub query: Vec<String>,
    pub metrics: MetricsReport,
}

/// A query that could not be evaluated, with the reason.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub app_id: AppId,
    pub reason: String,
}

/// Means over all evaluated instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub queries: usize,
    pub mp: f64,
    pub mr: f64,
    /// Mean over instances that produced at least two lists.
    pub mild: Option<f64>,
    pub milc: f64,
    /// Harmonic of the aggregate `mp` and `mild`.
    pub harmonic: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub params: PipelineParams,
    pub leave_one_out: bool,
    pub instances: Vec<InstanceReport>,
    pub skipped: Vec<SkippedQuery>,
    pub aggregate: Aggregate,
}

fn aggregate(instances: &[InstanceReport]) -> Aggregate {
    let n = instances.len();
    let mean = |f: &dyn Fn(&InstanceReport) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else {
            instances.iter().map(|i| f(i)).sum::<f64>() / n as f64
        }
    };
    let milds: Vec<f64> = instances.iter().filter_map(|i| i.metrics.mild).collect();
    let mild = if milds.is_empty() {
        None
    } else {
        Some(milds.iter().sum::<f64>() / milds.len() as f64)
    };
    let mp = mean(&|i| i.metrics.mp);
    Aggregate {
        queries: n,
        mp,
        mr: mean(&|i| i.metrics.mr),
        mild,
        milc: mean(&|i| i.metrics.milc),
        harmonic: mild.map(|d| harmonic(mp, d)),
    }
}

/// Evaluates the sampled flow over queries derived from the corpus: each
/// app's tag union is the query and its API set the ground truth.
///
/// The graph is restricted to its largest connected component. Each
/// instance runs on a seed derived from the base seed and the app id, so
/// results are independent of evaluation order and of `max_queries`.
pub fn evaluate(
    eco: &Ecosystem,
    params: &PipelineParams,
    opts: &EvaluateOptions,
) -> Result<EvaluationReport> {
    let graph = max_component(&build_graph(eco))?;
    let mut queries = derive_queries(eco, opts.r_filter);
    if let Some(cap) = opts.max_queries {
        queries.truncate(cap);
    }

    let results: Vec<std::result::Result<InstanceReport, SkippedQuery>> = queries
        .par_iter()
        .map(|(query, app)| {
            let skip = |reason: String| SkippedQuery { app_id: app.id, reason };
            let loo;
            let g = if opts.leave_one_out {
                loo = graph.without_app(app);
                &loo
            } else {
                &graph
            };
            if let Err(e) = keyword_nodes(g, query) {
                return Err(skip(e.to_string()));
            }
            let mut p = *params;
            p.seed = stream_seed(params.seed, app.id as usize, usize::MAX);
            let outcome =
                match recommend(g, query, &p, ScoringMode::Evaluation, Some(&app.apis)) {
                    Ok(o) => o,
                    Err(e) => return Err(skip(e.to_string())),
                };
            let time = if opts.with_timings { Some(outcome.seconds) } else { None };
            let metrics = MetricsReport::compute(
                &outcome.set,
                &app.apis,
                query.len(),
                params.z,
                params.p,
                time,
            )
            .map_err(|e| skip(e.to_string()))?;
            Ok(InstanceReport {
                app_id: app.id,
                query: query.keywords.clone(),
                metrics,
            })
        })
        .collect();

    let mut instances = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(i) => instances.push(i),
            Err(s) => skipped.push(s),
        }
    }
    let aggregate = aggregate(&instances);
    Ok(EvaluationReport {
        params: *params,
        leave_one_out: opts.leave_one_out,
        instances,
        skipped,
        aggregate,
    })
}

/// One cell of a sample-count sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepCell {
    pub z: usize,
    pub aggregate: Aggregate,
    pub skipped: usize,
}

/// Re-runs the evaluation at each sample count in `z_grid`.
pub fn sweep(
    eco: &Ecosystem,
    params: &PipelineParams,
    opts: &EvaluateOptions,
    z_grid: &[usize],
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let p = PipelineParams { z, ..*params };
        let report = evaluate(eco, &p, opts)?;
        cells.push(SweepCell { z, aggregate: report.aggregate, skipped: report.skipped.len() });
    }
    Ok(cells)
}
