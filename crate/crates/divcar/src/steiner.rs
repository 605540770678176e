//! Minimum group Steiner tree search over a graph view.
//!
//! States are (root vertex, covered keyword subset) pairs with exact
//! rational costs, relaxed in ascending cost order. Two transitions exist:
//! growing a tree across one edge, and merging two trees at the same root
//! with disjoint covered sets. At most one state per (root, covered) pair
//! survives, the cheapest.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use crate::corpus::{ApiId, Query};
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::graph::GraphView;

/// Keyword subsets are bit sets over query positions; queries longer than
/// this are rejected.
pub const R_MAX: usize = 10;

type Mask = u16;

/// A fully expanded group Steiner tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteinerResult {
    pub vertices: BTreeSet<ApiId>,
    /// Tree edges, each stored once with `u < v`.
    pub edges: BTreeSet<(ApiId, ApiId)>,
    /// Sum of member edge costs; zero for a single-vertex tree.
    pub cost: Cost,
    /// The covered query keywords (always the full query).
    pub covered: Vec<String>,
}

impl SteinerResult {
    /// Reciprocal tree cost; `None` marks the zero-cost "perfect" case.
    pub fn compatibility(&self) -> Option<f64> {
        self.cost.reciprocal().map(|r| {
            use num_traits::ToPrimitive;
            r.to_f64().unwrap_or(f64::NAN)
        })
    }
}

#[derive(Clone, Debug)]
enum Prov {
    Init,
    Grow { from: usize },
    Merge { left: Mask, right: Mask },
}

#[derive(Clone, Debug)]
struct Entry {
    cost: Cost,
    prov: Prov,
}

#[derive(PartialEq, Eq)]
struct HeapItem {
    cost: Cost,
    vertex: usize,
    mask: Mask,
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .cmp(&other.cost)
            .then(self.vertex.cmp(&other.vertex))
            .then(self.mask.cmp(&other.mask))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct Solver<'v, 'g> {
    view: &'v GraphView<'g>,
    nodes: Vec<ApiId>,
    neighbors: Vec<Vec<(usize, Cost)>>,
    full_mask: Mask,
    best: Vec<HashMap<Mask, Entry>>,
    heap: BinaryHeap<Reverse<HeapItem>>,
}

impl<'v, 'g> Solver<'v, 'g> {
    /// Returns `None` when some keyword is uncoverable within the view.
    fn new(view: &'v GraphView<'g>, query: &Query) -> Result<Option<Self>> {
        let r = query.len();
        if r > R_MAX {
            return Err(Error::Capacity(format!(
                "query has {r} keywords, the solver supports at most {R_MAX}"
            )));
        }
        let groups = view.keyword_vertices(query);
        if groups.iter().any(|(_, set)| set.is_empty()) {
            return Ok(None);
        }

        let nodes: Vec<ApiId> = view.nodes().iter().copied().collect();
        let idx: BTreeMap<ApiId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let neighbors: Vec<Vec<(usize, Cost)>> = nodes
            .iter()
            .map(|&v| {
                view.neighbors(v)
                    .map(|(u, count)| (idx[&u], Cost::from_count(count)))
                    .collect()
            })
            .collect();

        let mut vertex_masks = vec![0 as Mask; nodes.len()];
        for (bit, (_, set)) in groups.iter().enumerate() {
            for v in set {
                vertex_masks[idx[v]] |= 1 << bit;
            }
        }

        // r <= R_MAX < 16, so the shift cannot overflow the mask type
        let full_mask: Mask = (1 << r) - 1;
        let mut solver = Solver {
            view,
            nodes,
            neighbors,
            full_mask,
            best: Vec::new(),
            heap: BinaryHeap::new(),
        };
        solver.best = vec![HashMap::new(); solver.nodes.len()];
        // one singleton seed per (vertex, covered keyword): a vertex whose
        // keywords overlap an arriving subtree's coverage must still be
        // able to merge, so combined masks are built by zero-cost merges
        // of singletons rather than seeded as one inseparable set
        for (v, &mask) in vertex_masks.iter().enumerate() {
            for bit in 0..r {
                let single = 1 << bit;
                if mask & single != 0 {
                    solver.best[v]
                        .insert(single, Entry { cost: Cost::zero(), prov: Prov::Init });
                    solver
                        .heap
                        .push(Reverse(HeapItem { cost: Cost::zero(), vertex: v, mask: single }));
                }
            }
        }
        Ok(Some(solver))
    }

    fn try_update(&mut self, v: usize, mask: Mask, cost: Cost, prov: Prov) {
        let improved = match self.best[v].get(&mask) {
            None => true,
            Some(entry) => cost < entry.cost,
        };
        if improved {
            self.best[v].insert(mask, Entry { cost: cost.clone(), prov });
            self.heap.push(Reverse(HeapItem { cost, vertex: v, mask }));
        }
    }

    fn expand(&mut self, v: usize, mask: Mask, cost: &Cost) {
        for i in 0..self.neighbors[v].len() {
            let (u, edge_cost) = self.neighbors[v][i].clone();
            let nc = cost + &edge_cost;
            self.try_update(u, mask, nc, Prov::Grow { from: v });
        }
        let partners: Vec<(Mask, Cost)> = self.best[v]
            .iter()
            .filter(|(&m2, _)| m2 & mask == 0)
            .map(|(&m2, e)| (m2, e.cost.clone()))
            .collect();
        for (m2, c2) in partners {
            let nc = cost + &c2;
            self.try_update(v, mask | m2, nc, Prov::Merge { left: mask, right: m2 });
        }
    }

    /// Runs the ascending-cost loop. `stop_above` ends the search once the
    /// dequeued cost strictly exceeds it; `on_full` receives each settled
    /// full-coverage state and may install a new stop bound.
    fn run(&mut self, mut on_full: impl FnMut(usize, &Cost) -> Option<Cost>) {
        let mut stop_above: Option<Cost> = None;
        let mut last_cost = Cost::zero();
        while let Some(Reverse(item)) = self.heap.pop() {
            match self.best[item.vertex].get(&item.mask) {
                Some(entry) if entry.cost == item.cost => {}
                _ => continue, // stale
            }
            debug_assert!(item.cost >= last_cost, "dequeue costs must be non-decreasing");
            last_cost = item.cost.clone();
            if let Some(bound) = &stop_above {
                if item.cost > *bound {
                    break;
                }
            }
            if item.mask == self.full_mask {
                if let Some(bound) = on_full(item.vertex, &item.cost) {
                    stop_above = Some(bound);
                }
                // full states are collected, not expanded further
                continue;
            }
            self.expand(item.vertex, item.mask, &item.cost);
        }
    }

    fn state_vertices(&self, v: usize, mask: Mask) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(v, mask)];
        while let Some((v, mask)) = stack.pop() {
            out.insert(v);
            match &self.best[v].get(&mask).expect("provenance chain intact").prov {
                Prov::Init => {}
                Prov::Grow { from } => stack.push((*from, mask)),
                Prov::Merge { left, right } => {
                    stack.push((v, *left));
                    stack.push((v, *right));
                }
            }
        }
        out
    }

    /// Expands a settled full state into a tree: collect its vertices,
    /// then take the minimum spanning tree of the induced subgraph. For
    /// an optimal state the MST cost equals the state cost.
    fn reconstruct(&self, v: usize, mask: Mask, query: &Query) -> SteinerResult {
        let dense = self.state_vertices(v, mask);
        let ids: BTreeSet<ApiId> = dense.iter().map(|&i| self.nodes[i]).collect();
        let (edges, cost) = induced_mst(self.view, &ids);
        debug_assert_eq!(edges.len(), ids.len() - 1, "reconstructed tree must span its vertices");
        SteinerResult { vertices: ids, edges, cost, covered: query.keywords.clone() }
    }
}

/// Kruskal over the induced subgraph on `ids`; deterministic tie-break by
/// (cost, u, v). The subset must induce a connected subgraph.
fn induced_mst(
    view: &GraphView<'_>,
    ids: &BTreeSet<ApiId>,
) -> (BTreeSet<(ApiId, ApiId)>, Cost) {
    let order: Vec<ApiId> = ids.iter().copied().collect();
    let index: BTreeMap<ApiId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges: Vec<(Cost, ApiId, ApiId)> = Vec::new();
    for &u in &order {
        for (v, count) in view.neighbors(u) {
            if u < v && ids.contains(&v) {
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
    for (cost, u, v) in edges {
        let (ru, rv) = (find(&mut parent, index[&u]), find(&mut parent, index[&v]));
        if ru != rv {
            parent[ru] = rv;
            total += &cost;
            tree.insert((u, v));
        }
    }
    (tree, total)
}

/// The cheapest tree in the view covering every query keyword, or `None`
/// when no connected cover exists. Among equal-cost optima the tree with
/// the lexicographically smallest sorted vertex-id sequence is returned.
pub fn min_group_steiner(view: &GraphView<'_>, query: &Query) -> Result<Option<SteinerResult>> {
    let mut solver = match Solver::new(view, query)? {
        Some(s) => s,
        None => return Ok(None),
    };
    let mut optimum: Option<Cost> = None;
    let mut candidates: Vec<usize> = Vec::new();
    solver.run(|v, cost| {
        match &optimum {
            None => {
                optimum = Some(cost.clone());
                candidates.push(v);
            }
            Some(best) if cost == best => candidates.push(v),
            Some(_) => {}
        }
        optimum.clone()
    });
    let full = solver.full_mask;
    Ok(candidates
        .into_iter()
        .map(|v| solver.reconstruct(v, full, query))
        .min_by(|a, b| a.vertices.iter().cmp(b.vertices.iter())))
}

/// Up to `limit` full-coverage trees in ascending cost, deduplicated by
/// vertex set. The first element matches [`min_group_steiner`]'s cost.
pub fn search_full_trees(
    view: &GraphView<'_>,
    query: &Query,
    limit: usize,
) -> Result<Vec<SteinerResult>> {
    if limit == 0 {
        return Ok(Vec::new());
    }
    let mut solver = match Solver::new(view, query)? {
        Some(s) => s,
        None => return Ok(Vec::new()),
    };
    let mut collected: Vec<(usize, Cost)> = Vec::new();
    solver.run(|v, cost| {
        collected.push((v, cost.clone()));
        // once `limit` roots are in hand, anything strictly costlier than
        // the limit-th cheapest cannot enter the result
        if collected.len() >= limit {
            Some(collected[limit - 1].1.clone())
        } else {
            None
        }
    });
    let full = solver.full_mask;
    let mut seen: BTreeSet<BTreeSet<ApiId>> = BTreeSet::new();
    let mut trees: Vec<SteinerResult> = Vec::new();
    for (v, _) in collected {
        let tree = solver.reconstruct(v, full, query);
        if seen.insert(tree.vertices.clone()) {
            trees.push(tree);
        }
    }
    trees.sort_by(|a, b| a.cost.cmp(&b.cost).then(a.vertices.iter().cmp(b.vertices.iter())));
    trees.truncate(limit);
    Ok(trees)
}
