//! Weighted API correlation graph built from co-usage records.
//!
//! Each undirected edge stores how many apps used both endpoints together;
//! the search cost of the edge is the reciprocal of that count.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::{ApiId, AppRecord, Ecosystem, Query};
use crate::cost::Cost;
use crate::error::{Error, Result};

/// Immutable correlation graph. Vertices are APIs with their tag sets,
/// adjacency is symmetric and carries co-usage counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiGraph {
    vertices: BTreeMap<ApiId, BTreeSet<String>>,
    adjacency: BTreeMap<ApiId, BTreeMap<ApiId, u64>>,
    keyword_index: BTreeMap<String, BTreeSet<ApiId>>,
}

impl ApiGraph {
    /// Builds a graph from explicit vertices and counted edges.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = (ApiId, BTreeSet<String>)>,
        edges: impl IntoIterator<Item = (ApiId, ApiId, u64)>,
    ) -> Result<ApiGraph> {
        let vertices: BTreeMap<ApiId, BTreeSet<String>> = vertices.into_iter().collect();
        let mut adjacency: BTreeMap<ApiId, BTreeMap<ApiId, u64>> =
            vertices.keys().map(|&v| (v, BTreeMap::new())).collect();
        for (u, v, count) in edges {
            if u == v {
                return Err(Error::Integrity(format!("self-loop on vertex {u}")));
            }
            if count < 1 {
                return Err(Error::Integrity(format!("edge ({u},{v}) has zero count")));
            }
            if !vertices.contains_key(&u) || !vertices.contains_key(&v) {
                return Err(Error::Integrity(format!("edge ({u},{v}) has unknown endpoint")));
            }
            adjacency.get_mut(&u).unwrap().insert(v, count);
            adjacency.get_mut(&v).unwrap().insert(u, count);
        }
        let mut keyword_index: BTreeMap<String, BTreeSet<ApiId>> = BTreeMap::new();
        for (&id, kws) in &vertices {
            for kw in kws {
                keyword_index.entry(kw.clone()).or_default().insert(id);
            }
        }
        Ok(ApiGraph { vertices, adjacency, keyword_index })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn contains(&self, id: ApiId) -> bool {
        self.vertices.contains_key(&id)
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = ApiId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn keywords(&self, id: ApiId) -> Option<&BTreeSet<String>> {
        self.vertices.get(&id)
    }

    pub fn neighbors(&self, id: ApiId) -> impl Iterator<Item = (ApiId, u64)> + '_ {
        self.adjacency.get(&id).into_iter().flat_map(|m| m.iter().map(|(&v, &c)| (v, c)))
    }

    pub fn count(&self, u: ApiId, v: ApiId) -> Option<u64> {
        self.adjacency.get(&u).and_then(|m| m.get(&v)).copied()
    }

    /// Edge search cost `1/count`.
    pub fn cost(&self, u: ApiId, v: ApiId) -> Option<Cost> {
        self.count(u, v).map(Cost::from_count)
    }

    pub fn keyword_index(&self) -> &BTreeMap<String, BTreeSet<ApiId>> {
        &self.keyword_index
    }

    /// A view over the whole graph.
    pub fn full_view(&self) -> GraphView<'_> {
        GraphView { graph: self, nodes: self.vertices.keys().copied().collect() }
    }

    /// A view restricted to `nodes`; edge data is shared with the parent.
    pub fn view<'g>(&'g self, nodes: BTreeSet<ApiId>) -> GraphView<'g> {
        debug_assert!(nodes.iter().all(|n| self.contains(*n)));
        GraphView { graph: self, nodes }
    }

    /// The same graph with one app's co-usage contribution subtracted.
    /// Edges whose count drops to zero disappear; vertices stay.
    pub fn without_app(&self, app: &AppRecord) -> ApiGraph {
        let mut g = self.clone();
        let apis: Vec<ApiId> = app.apis.iter().copied().collect();
        for (i, &u) in apis.iter().enumerate() {
            for &v in &apis[i + 1..] {
                let mut gone = false;
                if let Some(c) = g.adjacency.get_mut(&u).and_then(|m| m.get_mut(&v)) {
                    if *c <= 1 {
                        gone = true;
                    } else {
                        *c -= 1;
                    }
                }
                if gone {
                    g.adjacency.get_mut(&u).map(|m| m.remove(&v));
                    g.adjacency.get_mut(&v).map(|m| m.remove(&u));
                } else if let Some(c) = g.adjacency.get_mut(&v).and_then(|m| m.get_mut(&u)) {
                    if *c > 1 {
                        *c -= 1;
                    }
                }
            }
        }
        g
    }

    pub fn snapshot(&self) -> GraphSnapshot {
        GraphSnapshot {
            vertices: self
                .vertices
                .iter()
                .map(|(&id, kws)| SnapshotVertex { id, keywords: kws.iter().cloned().collect() })
                .collect(),
            edges: self
                .adjacency
                .iter()
                .flat_map(|(&u, nbrs)| {
                    nbrs.iter().filter(move |(&v, _)| u < v).map(move |(&v, &count)| {
                        SnapshotEdge { u, v, count }
                    })
                })
                .collect(),
        }
    }
}

/// JSON-serializable graph snapshot. Costs are derived, never stored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub vertices: Vec<SnapshotVertex>,
    pub edges: Vec<SnapshotEdge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotVertex {
    pub id: ApiId,
    pub keywords: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub u: ApiId,
    pub v: ApiId,
    pub count: u64,
}

impl GraphSnapshot {
    pub fn into_graph(self) -> Result<ApiGraph> {
        ApiGraph::from_parts(
            self.vertices.into_iter().map(|v| (v.id, v.keywords.into_iter().collect())),
            self.edges.into_iter().map(|e| (e.u, e.v, e.count)),
        )
    }
}

/// Restriction of an [`ApiGraph`] to a vertex subset; original ids kept.
#[derive(Clone, Debug)]
pub struct GraphView<'g> {
    graph: &'g ApiGraph,
    nodes: BTreeSet<ApiId>,
}

impl<'g> GraphView<'g> {
    pub fn parent(&self) -> &'g ApiGraph {
        self.graph
    }

    pub fn nodes(&self) -> &BTreeSet<ApiId> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: ApiId) -> bool {
        self.nodes.contains(&id)
    }

    pub fn keywords(&self, id: ApiId) -> Option<&BTreeSet<String>> {
        if self.contains(id) {
            self.graph.keywords(id)
        } else {
            None
        }
    }

    pub fn neighbors(&self, id: ApiId) -> impl Iterator<Item = (ApiId, u64)> + '_ {
        self.graph.neighbors(id).filter(move |(v, _)| self.nodes.contains(v))
    }

    pub fn cost(&self, u: ApiId, v: ApiId) -> Option<Cost> {
        if self.contains(u) && self.contains(v) {
            self.graph.cost(u, v)
        } else {
            None
        }
    }

    /// All edges within the view, each once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (ApiId, ApiId, u64)> + '_ {
        self.nodes.iter().flat_map(move |&u| {
            self.neighbors(u).filter(move |&(v, _)| u < v).map(move |(v, c)| (u, v, c))
        })
    }

    /// Per-keyword vertex sets within the view, in query order. Keywords
    /// with no covering vertex in the view yield empty sets.
    pub fn keyword_vertices(&self, query: &Query) -> Vec<(String, BTreeSet<ApiId>)> {
        query
            .keywords
            .iter()
            .map(|kw| {
                let set = self
                    .graph
                    .keyword_index()
                    .get(kw)
                    .map(|s| s.intersection(&self.nodes).copied().collect())
                    .unwrap_or_default();
                (kw.clone(), set)
            })
            .collect()
    }
}

/// Builds the correlation graph: one vertex per API, one edge per pair of
/// APIs co-appearing in at least one app, counted once per app.
pub fn build_graph(eco: &Ecosystem) -> ApiGraph {
    let mut counts: BTreeMap<(ApiId, ApiId), u64> = BTreeMap::new();
    for app in &eco.apps {
        let apis: Vec<ApiId> = app.apis.iter().copied().collect();
        for (i, &u) in apis.iter().enumerate() {
            for &v in &apis[i + 1..] {
                let key = if u < v { (u, v) } else { (v, u) };
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }
    ApiGraph::from_parts(
        eco.apis.iter().map(|a| (a.id, a.keywords.clone())),
        counts.into_iter().map(|((u, v), c)| (u, v, c)),
    )
    .expect("validated ecosystem yields a well-formed graph")
}

/// The connected component with the most vertices; ties broken by the
/// smallest minimum vertex id.
pub fn max_component(g: &ApiGraph) -> Result<ApiGraph> {
    if g.vertex_count() == 0 {
        return Err(Error::EmptyInput("graph has no vertices".into()));
    }
    let mut seen: BTreeSet<ApiId> = BTreeSet::new();
    let mut best: Option<BTreeSet<ApiId>> = None;
    for start in g.vertex_ids() {
        if seen.contains(&start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        component.insert(start);
        while let Some(v) = queue.pop_front() {
            for (u, _) in g.neighbors(v) {
                if component.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        seen.extend(component.iter().copied());
        let better = match &best {
            None => true,
            // vertex_ids iterates in ascending order, so the first
            // component found at a given size has the smallest min id
            Some(b) => component.len() > b.len(),
        };
        if better {
            best = Some(component);
        }
    }
    let keep = best.unwrap();
    ApiGraph::from_parts(
        keep.iter().map(|&id| (id, g.keywords(id).unwrap().clone())),
        keep.iter()
            .flat_map(|&u| g.neighbors(u).filter(move |&(v, _)| u < v).map(move |(v, c)| (u, v, c)))
            .filter(|(u, v, _)| keep.contains(u) && keep.contains(v)),
    )
}

/// For each query keyword, the set of graph vertices covering it.
/// Errors if any keyword is uncoverable, naming the keyword.
pub fn keyword_nodes(g: &ApiGraph, query: &Query) -> Result<Vec<(String, BTreeSet<ApiId>)>> {
    let mut out = Vec::with_capacity(query.len());
    for kw in &query.keywords {
        let set = g.keyword_index().get(kw).cloned().unwrap_or_default();
        if set.is_empty() {
            return Err(Error::UncoverableKeyword(kw.clone()));
        }
        out.push((kw.clone(), set));
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_synthetic, AppRecord, ApiRecord, GenParams};
    use proptest::prelude::*;

    fn eco_with_pairs(pairs: &[&[ApiId]]) -> Ecosystem {
        let mut ids: BTreeSet<ApiId> = BTreeSet::new();
        for app in pairs {
            ids.extend(app.iter().copied());
        }
        Ecosystem {
            apis: ids
                .iter()
                .map(|&id| ApiRecord {
                    id,
                    name: format!("api{id}"),
                    keywords: [format!("kw{id}")].into(),
                })
                .collect(),
            apps: pairs
                .iter()
                .enumerate()
                .map(|(i, apis)| AppRecord { id: i as u64, apis: apis.iter().copied().collect() })
                .collect(),
        }
    }

    #[test]
    fn pair_co_used_four_times_costs_quarter() {
        let eco = eco_with_pairs(&[&[0, 1], &[0, 1], &[0, 1], &[0, 1]]);
        let g = build_graph(&eco);
        assert_eq!(g.count(0, 1), Some(4));
        assert_eq!(g.cost(0, 1).unwrap(), Cost::from_ratio(1, 4));
    }

    #[test]
    fn never_co_used_means_no_edge() {
        let eco = eco_with_pairs(&[&[0, 1], &[2, 3]]);
        let g = build_graph(&eco);
        assert_eq!(g.count(0, 2), None);
        assert_eq!(g.count(1, 3), None);
    }

    #[test]
    fn one_count_per_app_not_per_listing() {
        let eco = eco_with_pairs(&[&[0, 1, 2]]);
        let g = build_graph(&eco);
        assert_eq!(g.count(0, 1), Some(1));
        assert_eq!(g.count(0, 2), Some(1));
        assert_eq!(g.count(1, 2), Some(1));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn max_component_picks_larger() {
        let g = worked_example::graph();
        assert_eq!(g.vertex_count(), 10);
        let c = max_component(&g).unwrap();
        assert_eq!(c.vertex_count(), 8);
        assert!(c.contains(0) && c.contains(7));
        assert!(!c.contains(8) && !c.contains(9));
    }

    #[test]
    fn max_component_identity_on_connected() {
        let g = worked_example::graph();
        let c = max_component(&g).unwrap();
        let again = max_component(&c).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn max_component_tie_breaks_on_min_id() {
        let g = ApiGraph::from_parts(
            vec![
                (0, ["a".to_string()].into()),
                (1, ["b".to_string()].into()),
                (2, ["c".to_string()].into()),
                (3, ["d".to_string()].into()),
            ],
            vec![(0, 1, 1), (2, 3, 1)],
        )
        .unwrap();
        let c = max_component(&g).unwrap();
        assert!(c.contains(0) && c.contains(1));
    }

    #[test]
    fn keyword_nodes_worked_example_q7() {
        let g = worked_example::graph();
        let q = Query::new(["q7"]).unwrap();
        let nodes = keyword_nodes(&g, &q).unwrap();
        assert_eq!(nodes[0].1, BTreeSet::from([0, 2]));
    }

    #[test]
    fn keyword_nodes_missing_keyword_errors() {
        let g = worked_example::graph();
        let q = Query::new(["q99"]).unwrap();
        match keyword_nodes(&g, &q) {
            Err(Error::UncoverableKeyword(kw)) => assert_eq!(kw, "q99"),
            other => panic!("expected uncoverable keyword, got {other:?}"),
        }
    }

    #[test]
    fn leave_one_out_removes_singleton_edges() {
        let eco = eco_with_pairs(&[&[0, 1], &[1, 2], &[1, 2]]);
        let g = build_graph(&eco);
        let loo = g.without_app(&eco.apps[0]);
        assert_eq!(loo.count(0, 1), None);
        assert_eq!(loo.count(1, 2), Some(2));
        let loo2 = g.without_app(&eco.apps[1]);
        assert_eq!(loo2.count(1, 2), Some(1));
    }

    #[test]
    fn snapshot_roundtrip() {
        let g = worked_example::graph();
        let text = serde_json::to_string(&g.snapshot()).unwrap();
        let back: GraphSnapshot = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_graph().unwrap(), g);
    }

    proptest! {
        // each app contributes exactly C(m,2) pair-occurrences
        #[test]
        fn total_counts_match_app_pair_occurrences(seed in 0u64..300) {
            let params = GenParams { n_apis: 15, n_apps: 30, seed, ..Default::default() };
            let eco = gen_synthetic(&params).unwrap();
            let g = build_graph(&eco);
            let total: u64 = g.vertex_ids()
                .flat_map(|u| g.neighbors(u).map(|(_, c)| c))
                .sum::<u64>() / 2;
            let expected: u64 = eco.apps.iter()
                .map(|a| {
                    let m = a.apis.len() as u64;
                    m * (m - 1) / 2
                })
                .sum();
            prop_assert_eq!(total, expected);
        }

        #[test]
        fn build_graph_is_order_independent(seed in 0u64..300) {
            let params = GenParams { n_apis: 15, n_apps: 30, seed, ..Default::default() };
            let mut eco = gen_synthetic(&params).unwrap();
            let g1 = build_graph(&eco);
            eco.apps.reverse();
            eco.apis.reverse();
            let g2 = build_graph(&eco);
            prop_assert_eq!(g1, g2);
        }
    }
}
