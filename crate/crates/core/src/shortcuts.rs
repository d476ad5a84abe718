use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use num_rational::Ratio;
use serde::Serialize;

use crate::embedding::{embed_planar, PlanarEmbedding};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, ProblemKind, INF};
use crate::metrics::{lc_diameter, length_distances, length_spt};
use crate::separator::lc_separator_with;

/// Source of the per-region weight budget used for shortcut paths.
#[derive(Clone, Debug)]
pub enum BudgetProvider {
    /// Weight of a known optimal tree restricted to the region's uncontracted part.
    ExactOpt(Vec<usize>),
    /// `D^(2h)` of the region's working graph.
    Diameter,
    Value(u64),
}

impl BudgetProvider {
    pub fn name(&self) -> &'static str {
        match self {
            BudgetProvider::ExactOpt(_) => "exact-opt",
            BudgetProvider::Diameter => "diameter",
            BudgetProvider::Value(_) => "value",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetedPath {
    /// Edge ids from the source to the target.
    pub edges: Vec<usize>,
    pub source: usize,
    pub target: usize,
    /// Includes the source offset.
    pub length: u64,
    pub weight: u64,
}

/// Minimum-length path from any source (with an initial length offset) to any target among paths of
/// weight at most `budget`. Labels are settled in (length, weight) order; a label survives only if it
/// is lighter than every label already settled at its vertex.
pub fn budgeted_shortest_path(g: &Graph, sources: &[(usize, u64)], targets: &[usize], budget: u64) -> Option<BudgetedPath> {
    let mut is_target = vec![false; g.n];
    for &t in targets {
        is_target[t] = true;
    }
    // (vertex, weight, predecessor label, edge)
    let mut labels: Vec<(usize, u64, usize, usize)> = Vec::new();
    let mut min_w = vec![INF; g.n];
    let mut heap = BinaryHeap::new();
    for &(s, o) in sources {
        labels.push((s, 0, usize::MAX, usize::MAX));
        heap.push(Reverse((o, 0u64, labels.len() - 1)));
    }
    while let Some(Reverse((len, w, id))) = heap.pop() {
        let v = labels[id].0;
        if w >= min_w[v] {
            continue;
        }
        min_w[v] = w;
        if is_target[v] {
            let mut edges = Vec::new();
            let mut cur = id;
            while labels[cur].2 != usize::MAX {
                edges.push(labels[cur].3);
                cur = labels[cur].2;
            }
            edges.reverse();
            return Some(BudgetedPath { edges, source: labels[cur].0, target: v, length: len, weight: w });
        }
        for &(y, e) in g.adj(v) {
            let ed = g.edges[e];
            let nw = w + ed.weight;
            if nw > budget || nw >= min_w[y] {
                continue;
            }
            labels.push((y, nw, id, e));
            heap.push(Reverse((len + ed.length, nw, labels.len() - 1)));
        }
    }
    None
}

/// Shortcut paths of one hierarchy node, one per piece (None if no path fits the budget).
#[derive(Clone, Debug, Serialize)]
pub struct ShortcutSet {
    pub node: usize,
    pub paths: Vec<Option<Vec<usize>>>,
    pub union: Vec<usize>,
    pub weight: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpNode {
    pub parent: Option<usize>,
    /// Root node is level 1.
    pub level: usize,
    /// Uncontracted vertices.
    pub active: Vec<usize>,
    /// Vertices already contracted into the root.
    pub contracted: Vec<usize>,
    /// Separator edges bought at this node.
    pub separator: Vec<usize>,
    /// Separator weight in the working graph.
    pub separator_weight: u64,
    pub diameter: u64,
    pub budget: u64,
    pub pieces: Vec<Vec<usize>>,
    pub shortcuts: ShortcutSet,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimpleHierarchy {
    pub nodes: Vec<LpNode>,
    /// Level at which each vertex was contracted (0 for the root).
    pub level_of: Vec<usize>,
    pub depth: usize,
    /// Nodes where the balanced separator made no progress and a single root path was used.
    pub fallbacks: usize,
    /// Every child's `D^(2h)` was at most its parent's.
    pub monotone: bool,
}

struct Working {
    graph: Graph,
    emb: PlanarEmbedding,
    global_vertex: Vec<usize>,
    global_edge: Vec<usize>,
    local_of: Vec<usize>,
}

/// Working graph of a node: contracted and active vertices, bought edges flattened to zero, and
/// edges between two contracted vertices dropped unless bought.
fn working_graph(g: &Graph, emb: &PlanarEmbedding, active: &[bool], contracted: &[bool], bought: &[bool]) -> Working {
    let global_vertex: Vec<usize> = (0..g.n).filter(|&v| active[v] || contracted[v]).collect();
    let mut local_of = vec![usize::MAX; g.n];
    for (i, &v) in global_vertex.iter().enumerate() {
        local_of[v] = i;
    }
    let mut global_edge = Vec::new();
    let mut edges = Vec::new();
    for (e, ed) in g.edges.iter().enumerate() {
        if local_of[ed.u] == usize::MAX || local_of[ed.v] == usize::MAX {
            continue;
        }
        if !(bought[e] || active[ed.u] || active[ed.v]) {
            continue;
        }
        global_edge.push(e);
        let (l, w) = if bought[e] { (0, 0) } else { (ed.length, ed.weight) };
        edges.push(Edge::new(local_of[ed.u], local_of[ed.v], l, w));
    }
    let graph = Graph::new(global_vertex.len(), edges);
    let emb = emb.restrict(global_vertex.len(), &local_of, &global_edge);
    Working { graph, emb, global_vertex, global_edge, local_of }
}

/// Cuts the separator's new vertices into subpaths of length at most `h/β`, walking each root path
/// from the root and skipping vertices already assigned.
fn path_pieces(g: &Graph, paths: &[Vec<usize>], root: usize, is_new: &[bool], h: u64, beta: Ratio<u64>) -> Vec<Vec<usize>> {
    let (p, q) = (*beta.numer() as u128, *beta.denom() as u128);
    let mut assigned = vec![false; g.n];
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for path in paths {
        let mut v = root;
        let mut acc = 0u64;
        let mut open = false;
        for &e in path {
            let x = g.edges[e].other(v);
            let l = g.edges[e].length;
            v = x;
            if !is_new[x] || assigned[x] {
                open = false;
                continue;
            }
            assigned[x] = true;
            if open && (acc + l) as u128 * p <= h as u128 * q {
                acc += l;
                pieces.last_mut().unwrap().push(x);
            } else {
                acc = 0;
                open = true;
                pieces.push(vec![x]);
            }
        }
    }
    for piece in &mut pieces {
        piece.sort_unstable();
    }
    pieces
}

fn node_budget(provider: &BudgetProvider, g: &Graph, active: &[bool], diameter: u64) -> u64 {
    match provider {
        BudgetProvider::ExactOpt(t) => t.iter().filter(|&&e| active[g.edges[e].u] || active[g.edges[e].v]).map(|&e| g.edges[e].weight).sum(),
        BudgetProvider::Diameter => diameter,
        BudgetProvider::Value(b) => *b,
    }
}

/// Recursive single-separator hierarchy with separators contracted into the root, plus pieces and
/// shortcut paths for every node.
pub fn simple_hierarchy(g: &Graph, emb: &PlanarEmbedding, root: usize, h: u64, beta: Ratio<u64>, provider: &BudgetProvider) -> Result<SimpleHierarchy> {
    if emb.m() != g.m() {
        return Err(Error::Invalid("embedding does not match the edge list".into()));
    }
    let dist = length_distances(g, &[(root, 0)]);
    if dist.iter().any(|&d| d > h) {
        return Err(Error::Infeasible);
    }
    let mut level_of = vec![usize::MAX; g.n];
    level_of[root] = 0;
    let mut nodes: Vec<LpNode> = Vec::new();
    // (active set, parent, level, ancestor separator edges, ancestor separator and shortcut edges, parent diameter)
    let mut queue: VecDeque<(Vec<usize>, Option<usize>, usize, Vec<usize>, Vec<usize>, u64)> = VecDeque::new();
    let first: Vec<usize> = (0..g.n).filter(|&v| v != root).collect();
    if !first.is_empty() {
        queue.push_back((first, None, 1, Vec::new(), Vec::new(), u64::MAX));
    }
    let mut fallbacks = 0;
    let mut monotone = true;
    let mut depth = 0;
    while let Some((act, parent, level, bought_ids, anc_ids, parent_d)) = queue.pop_front() {
        let id = nodes.len();
        depth = depth.max(level);
        let mut active = vec![false; g.n];
        for &v in &act {
            active[v] = true;
        }
        let mut bought = vec![false; g.m()];
        let mut contracted = vec![false; g.n];
        contracted[root] = true;
        for &e in &bought_ids {
            bought[e] = true;
            contracted[g.edges[e].u] = true;
            contracted[g.edges[e].v] = true;
        }
        let w = working_graph(g, emb, &active, &contracted, &bought);
        let h2 = 2 * h;
        let d = lc_diameter(&w.graph, h2).ok_or(Error::InfiniteDiameter)?;
        monotone &= d <= parent_d;
        let weights: Vec<u64> = w.global_vertex.iter().map(|&v| active[v] as u64).collect();
        let root_local = w.local_of[root];
        let sep = lc_separator_with(&w.graph, &w.emb, &weights, h2, root_local, d)?;
        if sep.stats.weight > 4 * d {
            return Err(Error::Other(format!("separator weight {} exceeds 4·D = {}", sep.stats.weight, 4 * d)));
        }
        let mut paths: Vec<Vec<usize>> = [sep.closing.0, sep.closing.1]
            .iter()
            .map(|&c| {
                let mut p: Vec<usize> = sep.tree.root_path(c).into_iter().map(|e| w.global_edge[e]).collect();
                p.reverse();
                p
            })
            .collect();
        let on_paths = |paths: &[Vec<usize>]| {
            let mut on = vec![false; g.n];
            on[root] = true;
            for &e in paths.iter().flatten() {
                on[g.edges[e].u] = true;
                on[g.edges[e].v] = true;
            }
            on
        };
        let mut on_y = on_paths(&paths);
        let mut sides: Vec<Vec<usize>> = Vec::new();
        for side in [&sep.partition.inside, &sep.partition.outside] {
            let s: Vec<usize> = side.iter().map(|&x| w.global_vertex[x]).filter(|&v| active[v] && !on_y[v]).collect();
            sides.push(s);
        }
        let rest: Vec<usize> = act.iter().copied().filter(|&v| !on_y[v] && !sides.iter().any(|s| s.binary_search(&v).is_ok())).collect();
        sides.push(rest);
        sides.retain(|s| !s.is_empty());
        if sides.iter().any(|s| s.len() == act.len()) {
            fallbacks += 1;
            let target = act.iter().copied().min_by_key(|&v| (sep.tree.depth[w.local_of[v]], v)).unwrap();
            let mut p: Vec<usize> = sep.tree.root_path(w.local_of[target]).into_iter().map(|e| w.global_edge[e]).collect();
            p.reverse();
            paths = vec![p];
            on_y = on_paths(&paths);
            sides = vec![act.iter().copied().filter(|&v| !on_y[v]).collect()];
            sides.retain(|s| !s.is_empty());
        }
        let mut separator: Vec<usize> = paths.iter().flatten().copied().filter(|&e| !bought[e]).collect();
        separator.sort_unstable();
        separator.dedup();
        for &v in &act {
            if on_y[v] {
                level_of[v] = level;
            }
        }
        let pieces = path_pieces(g, &paths, root, &active, h, beta);

        let budget = node_budget(provider, g, &active, d);
        let anc_graph = g.edge_subgraph(&anc_ids);
        let offsets = length_distances(&anc_graph, &[(root, 0)]);
        let sources: Vec<(usize, u64)> = (0..g.n).filter(|&v| contracted[v] && offsets[v] != INF).map(|v| (v, offsets[v])).collect();
        let search_ids: Vec<usize> = w.global_edge.iter().copied().filter(|&e| active[g.edges[e].u] || active[g.edges[e].v]).collect();
        let search = g.edge_subgraph(&search_ids);
        let mut sc_paths = Vec::with_capacity(pieces.len());
        let mut union: Vec<usize> = Vec::new();
        for piece in &pieces {
            let found = budgeted_shortest_path(&search, &sources, piece, budget).map(|bp| bp.edges.iter().map(|&e| search_ids[e]).collect::<Vec<_>>());
            if let Some(p) = &found {
                union.extend_from_slice(p);
            }
            sc_paths.push(found);
        }
        union.sort_unstable();
        union.dedup();
        let shortcuts = ShortcutSet { node: id, weight: g.weight_of(&union), paths: sc_paths, union: union.clone() };

        let mut contracted_list: Vec<usize> = (0..g.n).filter(|&v| contracted[v]).collect();
        contracted_list.sort_unstable();
        let mut child_bought = bought_ids.clone();
        child_bought.extend_from_slice(&separator);
        child_bought.sort_unstable();
        let mut child_anc = anc_ids.clone();
        child_anc.extend_from_slice(&separator);
        child_anc.extend_from_slice(&union);
        child_anc.sort_unstable();
        child_anc.dedup();
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        nodes.push(LpNode {
            parent,
            level,
            active: act,
            contracted: contracted_list,
            separator,
            separator_weight: sep.stats.weight,
            diameter: d,
            budget,
            pieces,
            shortcuts,
            children: Vec::new(),
        });
        for s in sides {
            queue.push_back((s, Some(id), level + 1, child_bought.clone(), child_anc.clone(), d));
        }
    }
    Ok(SimpleHierarchy { nodes, level_of, depth: depth.max(1), fallbacks, monotone })
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    pub edges: Vec<usize>,
    pub weight: u64,
    pub root_distance: Vec<u64>,
    pub max_root_distance: u64,
    pub depth: usize,
    pub level_of: Vec<usize>,
    pub separator_weight: u64,
    pub shortcut_weight: u64,
    pub missing_shortcuts: usize,
    pub fallbacks: usize,
    pub monotone: bool,
    pub beta: (u64, u64),
    pub wall_time_ms: f64,
}

impl LpSolution {
    /// `d_T(r, v) ≤ d_ref(r, v) + level(v)·h/β` for every vertex.
    pub fn within_level_bound(&self, reference: &[u64], h: u64, beta: Ratio<u64>) -> bool {
        let (p, q) = (*beta.numer() as u128, *beta.denom() as u128);
        (0..self.root_distance.len()).all(|v| {
            let d = self.root_distance[v];
            d != INF && d as u128 * p <= reference[v] as u128 * p + self.level_of[v] as u128 * h as u128 * q
        })
    }
}

/// `β = log2(n)/ε`, at least 1, rounded to quarters.
pub fn beta_for(n: usize, epsilon: f64) -> Ratio<u64> {
    let b = ((n.max(2) as f64).log2() / epsilon).max(1.0);
    Ratio::new((b * 4.0).round().max(4.0) as u64, 4)
}

pub fn run_lp_variant(inst: &Instance, epsilon: f64, provider: &BudgetProvider) -> Result<LpSolution> {
    run_lp_variant_with_beta(inst, beta_for(inst.n, epsilon), provider)
}

pub fn run_lp_variant_with_beta(inst: &Instance, beta: Ratio<u64>, provider: &BudgetProvider) -> Result<LpSolution> {
    if inst.kind != ProblemKind::Lcmst {
        return Err(Error::Invalid(format!("the LP variant does not accept {} instances", inst.kind)));
    }
    let start = Instant::now();
    let g = inst.graph();
    let emb = embed_planar(inst)?;
    let hier = simple_hierarchy(&g, &emb, inst.root, inst.h, beta, provider)?;
    let mut sep_ids: Vec<usize> = hier.nodes.iter().flat_map(|n| n.separator.iter().copied()).collect();
    sep_ids.sort_unstable();
    sep_ids.dedup();
    let mut sc_ids: Vec<usize> = hier.nodes.iter().flat_map(|n| n.shortcuts.union.iter().copied()).collect();
    sc_ids.sort_unstable();
    sc_ids.dedup();
    let mut union = sep_ids.clone();
    union.extend_from_slice(&sc_ids);
    union.sort_unstable();
    union.dedup();
    let (dist, tree) = length_spt(&g.edge_subgraph(&union), inst.root);
    let mut edges: Vec<usize> = tree.parent_edge.iter().flatten().map(|&e| union[e]).collect();
    edges.sort_unstable();
    let max_root_distance = dist.iter().copied().max().unwrap_or(0);
    if max_root_distance == INF {
        return Err(Error::Other("separators do not reach every vertex".into()));
    }
    Ok(LpSolution {
        weight: g.weight_of(&edges),
        edges,
        root_distance: dist,
        max_root_distance,
        depth: hier.depth,
        level_of: hier.level_of.clone(),
        separator_weight: g.weight_of(&sep_ids),
        shortcut_weight: g.weight_of(&sc_ids),
        missing_shortcuts: hier.nodes.iter().map(|n| n.shortcuts.paths.iter().filter(|p| p.is_none()).count()).sum(),
        fallbacks: hier.fallbacks,
        monotone: hier.monotone,
        beta: (*beta.numer(), *beta.denom()),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
