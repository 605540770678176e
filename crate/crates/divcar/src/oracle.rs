//! Exhaustive ground-truth solver for small instances.
//!
//! Enumerates every vertex subset that covers the keywords and induces a
//! connected subgraph; the candidate cost is the induced minimum spanning
//! tree cost. Any tree spans exactly its own vertex set, so the minimum
//! over subsets equals the group Steiner optimum. Test-support only; no
//! pruning on purpose.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{ApiId, Query};
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::graph::GraphView;
use crate::steiner::SteinerResult;

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_keywords: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 15, max_keywords: 5 }
    }
}

pub fn brute_force_group_steiner(
    view: &GraphView<'_>,
    query: &Query,
    limits: OracleLimits,
) -> Result<Option<SteinerResult>> {
    let n = view.len();
    if n > limits.max_vertices {
        return Err(Error::Capacity(format!(
            "oracle limited to {} vertices, got {n}",
            limits.max_vertices
        )));
    }
    if query.len() > limits.max_keywords {
        return Err(Error::Capacity(format!(
            "oracle limited to {} keywords, got {}",
            limits.max_keywords,
            query.len()
        )));
    }

    let nodes: Vec<ApiId> = view.nodes().iter().copied().collect();
    let groups = view.keyword_vertices(query);
    if groups.iter().any(|(_, set)| set.is_empty()) {
        return Ok(None);
    }

    let mut best: Option<(Cost, BTreeSet<ApiId>, BTreeSet<(ApiId, ApiId)>)> = None;
    for bits in 1u32..(1 << n) {
        let subset: BTreeSet<ApiId> = (0..n)
            .filter(|i| bits & (1 << i) != 0)
            .map(|i| nodes[i])
            .collect();
        if !groups.iter().all(|(_, set)| set.iter().any(|v| subset.contains(v))) {
            continue;
        }
        let Some((edges, cost)) = induced_spanning_tree(view, &subset) else {
            continue;
        };
        let replace = match &best {
            None => true,
            Some((bc, bv, _)) => {
                cost < *bc || (cost == *bc && subset.iter().lt(bv.iter()))
            }
        };
        if replace {
            best = Some((cost, subset, edges));
        }
    }

    Ok(best.map(|(cost, vertices, edges)| SteinerResult {
        vertices,
        edges,
        cost,
        covered: query.keywords.clone(),
    }))
}

/// Kruskal on the induced subgraph; `None` when the subset is not
/// connected. Tie-break by (cost, u, v) for determinism.
fn induced_spanning_tree(
    view: &GraphView<'_>,
    subset: &BTreeSet<ApiId>,
) -> Option<(BTreeSet<(ApiId, ApiId)>, Cost)> {
    let order: Vec<ApiId> = subset.iter().copied().collect();
    let index: BTreeMap<ApiId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges: Vec<(Cost, ApiId, ApiId)> = Vec::new();
    for &u in &order {
        for (v, count) in view.neighbors(u) {
            if u < v && subset.contains(&v) {
                edges.push((Cost::from_count(count), u, v));
            }
        }
    }
    edges.sort();

    let mut parent: Vec<usize> = (0..order.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }

    let mut tree = BTreeSet::new();
    let mut total = Cost::zero();
    let mut merged = 0;
    for (cost, u, v) in edges {
        let (ru, rv) = (find(&mut parent, index[&u]), find(&mut parent, index[&v]));
        if ru != rv {
            parent[ru] = rv;
            total += &cost;
            tree.insert((u, v));
            merged += 1;
        }
    }
    if merged + 1 == order.len() {
        Some((tree, total))
    } else {
        None
    }
}
