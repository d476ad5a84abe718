use serde::Serialize;

use crate::digraph::{Arc, Digraph};
use crate::error::{Error, Result};
use crate::graph::{Graph, Instance, ProblemKind, INF};
use crate::lcst::{layer, lcst_exact, LcstInstance, EXACT_EDGE_LIMIT};
use crate::metrics::length_distances;

pub const LCMST_VERTEX_LIMIT: usize = 16;
pub const SUBSET_ARC_LIMIT: usize = 20;
pub const DW_TERMINAL_LIMIT: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactResult {
    /// `None` when infeasible.
    pub weight: Option<u64>,
    pub edges: Vec<usize>,
    pub examined: u64,
}

impl ExactResult {
    fn infeasible(examined: u64) -> Self {
        ExactResult { weight: None, edges: Vec::new(), examined }
    }
}

struct Bnb<'a> {
    g: &'a Graph,
    h: u64,
    order: Vec<usize>,
    in_tree: Vec<bool>,
    dist: Vec<u64>,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    weight: u64,
    best: Option<(u64, Vec<usize>)>,
    examined: u64,
}

impl Bnb<'_> {
    fn bound_ok(&self) -> bool {
        let mut lb = self.weight;
        for v in 0..self.g.n {
            if self.in_tree[v] {
                continue;
            }
            let m = self.g.adj(v).iter().filter(|&&(_, e)| !self.excluded[e]).map(|&(_, e)| self.g.edges[e].weight).min();
            match m {
                Some(w) => lb += w,
                None => return false,
            }
        }
        if self.best.as_ref().is_some_and(|(b, _)| lb >= *b) {
            return false;
        }
        let sources: Vec<(usize, u64)> = (0..self.g.n).filter(|&v| self.in_tree[v]).map(|v| (v, self.dist[v])).collect();
        let open: Vec<usize> = (0..self.g.m()).filter(|&e| !self.excluded[e]).collect();
        let d = length_distances(&self.g.edge_subgraph(&open), &sources);
        d.iter().all(|&x| x <= self.h)
    }

    fn run(&mut self, size: usize) {
        self.examined += 1;
        if size == self.g.n {
            if self.best.as_ref().is_none_or(|(b, _)| self.weight < *b) {
                let mut t = self.chosen.clone();
                t.sort_unstable();
                self.best = Some((self.weight, t));
            }
            return;
        }
        if !self.bound_ok() {
            return;
        }
        let Some(&e) = self.order.iter().find(|&&e| !self.excluded[e] && self.in_tree[self.g.edges[e].u] != self.in_tree[self.g.edges[e].v]) else {
            return;
        };
        let ed = self.g.edges[e];
        let (a, b) = if self.in_tree[ed.u] { (ed.u, ed.v) } else { (ed.v, ed.u) };
        if self.dist[a] + ed.length <= self.h {
            self.in_tree[b] = true;
            self.dist[b] = self.dist[a] + ed.length;
            self.chosen.push(e);
            self.weight += ed.weight;
            self.run(size + 1);
            self.weight -= ed.weight;
            self.chosen.pop();
            self.dist[b] = INF;
            self.in_tree[b] = false;
        }
        self.excluded[e] = true;
        self.run(size);
        self.excluded[e] = false;
    }
}

/// Minimum-weight spanning tree with every root distance at most `h`.
pub fn exact_lcmst(inst: &Instance) -> Result<ExactResult> {
    exact_lcmst_graph(&inst.graph(), inst.root, inst.h)
}

pub fn exact_lcmst_graph(g: &Graph, root: usize, h: u64) -> Result<ExactResult> {
    if g.n > LCMST_VERTEX_LIMIT {
        return Err(Error::TooLarge(format!("{} vertices for exact LC-MST", g.n)));
    }
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by_key(|&e| (g.edges[e].weight, e));
    let mut b = Bnb {
        g,
        h,
        order,
        in_tree: vec![false; g.n],
        dist: vec![INF; g.n],
        excluded: vec![false; g.m()],
        chosen: Vec::new(),
        weight: 0,
        best: None,
        examined: 0,
    };
    b.in_tree[root] = true;
    b.dist[root] = 0;
    b.run(1);
    Ok(match b.best {
        Some((w, edges)) => ExactResult { weight: Some(w), edges, examined: b.examined },
        None => ExactResult::infeasible(b.examined),
    })
}

/// Every spanning tree of `g` (edge ids, sorted), by include/exclude branching on edges in id order.
pub fn spanning_trees(g: &Graph, cap: usize) -> Result<Vec<Vec<usize>>> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        r
    }
    fn rec(g: &Graph, i: usize, parent: &mut Vec<usize>, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        if chosen.len() + 1 == g.n {
            out.push(chosen.clone());
            return out.len() <= cap;
        }
        if i == g.m() || g.m() - i < g.n - 1 - chosen.len() {
            return true;
        }
        let e = g.edges[i];
        let (a, b) = (find(parent, e.u), find(parent, e.v));
        if a != b {
            let saved = parent.clone();
            parent[a] = b;
            chosen.push(i);
            let ok = rec(g, i + 1, parent, chosen, out, cap);
            chosen.pop();
            *parent = saved;
            if !ok {
                return false;
            }
        }
        rec(g, i + 1, parent, chosen, out, cap)
    }
    let mut out = Vec::new();
    if g.n <= 1 {
        return Ok(vec![Vec::new()]);
    }
    let mut parent: Vec<usize> = (0..g.n).collect();
    if !rec(g, 0, &mut parent, &mut Vec::new(), &mut out, cap) {
        return Err(Error::TooLarge(format!("more than {cap} spanning trees")));
    }
    Ok(out)
}

/// Root distances of every vertex in the tree `edges` (INF if not spanned).
pub fn tree_distances(g: &Graph, edges: &[usize], root: usize) -> Vec<u64> {
    length_distances(&g.edge_subgraph(edges), &[(root, 0)])
}

/// Exact minimum-weight arc set reaching all terminals from `root`.
/// Subset enumeration up to `SUBSET_ARC_LIMIT` arcs, Dreyfus–Wagner otherwise.
pub fn exact_dst_digraph(g: &Digraph, root: usize, terminals: &[usize]) -> Result<ExactResult> {
    let mut terms: Vec<usize> = terminals.iter().copied().filter(|&t| t != root).collect();
    terms.sort_unstable();
    terms.dedup();
    if g.arcs.len() <= SUBSET_ARC_LIMIT {
        Ok(dst_subsets(g, root, &terms))
    } else {
        dreyfus_wagner(g, root, &terms)
    }
}

fn dst_subsets(g: &Digraph, root: usize, terms: &[usize]) -> ExactResult {
    let m = g.arcs.len();
    let mut best: Option<(u64, u32)> = None;
    let mut examined = 0;
    let mut seen = vec![false; g.n];
    let mut stack = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let w: u64 = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| g.arcs[i].weight).sum();
        if best.is_some_and(|(bw, _)| w >= bw) {
            continue;
        }
        examined += 1;
        seen.fill(false);
        seen[root] = true;
        stack.clear();
        stack.push(root);
        while let Some(x) = stack.pop() {
            for &a in g.out_arcs(x) {
                if mask >> a & 1 == 1 && !seen[g.arcs[a].to] {
                    seen[g.arcs[a].to] = true;
                    stack.push(g.arcs[a].to);
                }
            }
        }
        if terms.iter().all(|&t| seen[t]) {
            best = Some((w, mask));
        }
    }
    match best {
        Some((w, mask)) => ExactResult { weight: Some(w), edges: (0..m).filter(|&i| mask >> i & 1 == 1).collect(), examined },
        None => ExactResult::infeasible(examined),
    }
}

#[derive(Clone, Copy)]
enum Choice {
    None,
    Leaf,
    Split(usize),
    Arc(usize),
}

/// Directed Dreyfus–Wagner: `dp[S][v]` is the cheapest arborescence rooted at `v` reaching `S`.
pub fn dreyfus_wagner(g: &Digraph, root: usize, terms: &[usize]) -> Result<ExactResult> {
    let k = terms.len();
    if k > DW_TERMINAL_LIMIT {
        return Err(Error::TooLarge(format!("{k} terminals for Dreyfus-Wagner")));
    }
    if k == 0 {
        return Ok(ExactResult { weight: Some(0), edges: Vec::new(), examined: 0 });
    }
    let n = g.n;
    let full = (1usize << k) - 1;
    let mut dp = vec![vec![INF; n]; full + 1];
    let mut how = vec![vec![Choice::None; n]; full + 1];
    for (i, &t) in terms.iter().enumerate() {
        dp[1 << i][t] = 0;
        how[1 << i][t] = Choice::Leaf;
    }
    let mut examined = 0u64;
    for s in 1..=full {
        if s.count_ones() > 1 {
            for v in 0..n {
                let mut sub = (s - 1) & s;
                while sub > 0 {
                    if sub < s ^ sub {
                        let (a, b) = (dp[sub][v], dp[s ^ sub][v]);
                        if a != INF && b != INF && a + b < dp[s][v] {
                            dp[s][v] = a + b;
                            how[s][v] = Choice::Split(sub);
                        }
                    }
                    examined += 1;
                    sub = (sub - 1) & s;
                }
            }
        }
        // relax backwards along arcs: dp[s][u] <= w(u->v) + dp[s][v]
        let mut heap = std::collections::BinaryHeap::new();
        for v in 0..n {
            if dp[s][v] != INF {
                heap.push(std::cmp::Reverse((dp[s][v], v)));
            }
        }
        while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
            if d != dp[s][v] {
                continue;
            }
            for &a in g.in_arcs(v) {
                let u = g.arcs[a].from;
                let c = d + g.arcs[a].weight;
                if c < dp[s][u] {
                    dp[s][u] = c;
                    how[s][u] = Choice::Arc(a);
                    heap.push(std::cmp::Reverse((c, u)));
                }
            }
        }
    }
    if dp[full][root] == INF {
        return Ok(ExactResult::infeasible(examined));
    }
    let mut arcs = Vec::new();
    let mut stack = vec![(full, root)];
    while let Some((s, v)) = stack.pop() {
        match how[s][v] {
            Choice::Leaf | Choice::None => {}
            Choice::Split(sub) => {
                stack.push((sub, v));
                stack.push((s ^ sub, v));
            }
            Choice::Arc(a) => {
                arcs.push(a);
                stack.push((s, g.arcs[a].to));
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup();
    let weight = arcs.iter().map(|&a| g.arcs[a].weight).sum::<u64>();
    debug_assert!(weight <= dp[full][root]);
    Ok(ExactResult { weight: Some(weight), edges: arcs, examined })
}

/// Exact DST for a `dst` instance (arcs are the instance edges, weights only).
pub fn exact_dst(inst: &Instance) -> Result<ExactResult> {
    if inst.kind != ProblemKind::Dst {
        return Err(Error::Invalid("exact_dst needs a dst instance".into()));
    }
    let g = Digraph::new(inst.n, inst.edges.iter().map(|e| Arc { from: e.u, to: e.v, weight: e.weight }).collect());
    exact_dst_digraph(&g, inst.root, &inst.terminals)
}

/// Exact LCST: edge-subset enumeration on small graphs, otherwise Dreyfus–Wagner on the layered digraph.
pub fn exact_lcst(inst: &Instance) -> Result<ExactResult> {
    if inst.kind != ProblemKind::Lcst {
        return Err(Error::Invalid("exact_lcst needs an lcst instance".into()));
    }
    let li = LcstInstance::new(inst.graph(), inst.root, inst.terminals.clone(), inst.h);
    if inst.edges.len() <= EXACT_EDGE_LIMIT {
        let r = lcst_exact(&li)?;
        let examined = 1u64 << inst.edges.len();
        return Ok(match r {
            Some((w, edges)) => ExactResult { weight: Some(w), edges, examined },
            None => ExactResult { weight: None, edges: Vec::new(), examined },
        });
    }
    let d = layer(&li)?;
    let r = dreyfus_wagner(&d.digraph, d.root, &d.terminals)?;
    let edges = if r.weight.is_some() { d.project(&r.edges) } else { Vec::new() };
    let weight = r.weight.map(|_| edges.iter().map(|&e| inst.edges[e].weight).sum());
    Ok(ExactResult { weight, edges, examined: r.examined })
}

/// Exact group Steiner tree: cheapest edge set connecting the root to one vertex of every group.
pub fn exact_gst(inst: &Instance) -> Result<ExactResult> {
    let n = inst.n;
    let k = inst.groups.len();
    let mut arcs = Vec::new();
    for e in &inst.edges {
        arcs.push(Arc { from: e.u, to: e.v, weight: e.weight });
        arcs.push(Arc { from: e.v, to: e.u, weight: e.weight });
    }
    let real = arcs.len();
    for (i, grp) in inst.groups.iter().enumerate() {
        for &v in grp {
            arcs.push(Arc { from: v, to: n + i, weight: 0 });
        }
    }
    let g = Digraph::new(n + k, arcs);
    let terms: Vec<usize> = (n..n + k).collect();
    let r = if g.arcs.len() <= SUBSET_ARC_LIMIT { dst_subsets(&g, inst.root, &terms) } else { dreyfus_wagner(&g, inst.root, &terms)? };
    let mut edges: Vec<usize> = r.edges.iter().filter(|&&a| a < real).map(|&a| a / 2).collect();
    edges.sort_unstable();
    edges.dedup();
    let weight = r.weight.map(|_| edges.iter().map(|&e| inst.edges[e].weight).sum());
    Ok(ExactResult { weight, edges, examined: r.examined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn graph(n: usize, e: &[(usize, usize, u64, u64)]) -> Graph {
        Graph::new(n, e.iter().map(|&(u, v, l, w)| Edge::new(u, v, l, w)).collect())
    }

    #[test]
    fn single_edge_and_infeasible() {
        let g = graph(2, &[(0, 1, 2, 7)]);
        assert_eq!(exact_lcmst_graph(&g, 0, 2).unwrap().weight, Some(7));
        assert_eq!(exact_lcmst_graph(&g, 0, 1).unwrap().weight, None);
    }

    #[test]
    fn triangle_forces_unit_edges() {
        // r=0; (0,1) l1 w1, (0,2) l1 w1, (1,2) l2 w0
        let g = graph(3, &[(0, 1, 1, 1), (0, 2, 1, 1), (1, 2, 2, 0)]);
        let r = exact_lcmst_graph(&g, 0, 1).unwrap();
        assert_eq!(r.weight, Some(2));
        assert_eq!(r.edges, vec![0, 1]);
        assert_eq!(spanning_trees(&g, 100).unwrap().len(), 3);
    }

    #[test]
    fn k4_has_sixteen_spanning_trees() {
        let g = graph(4, &[(0, 1, 1, 1), (0, 2, 1, 1), (0, 3, 1, 1), (1, 2, 1, 1), (1, 3, 1, 1), (2, 3, 1, 1)]);
        assert_eq!(spanning_trees(&g, 100).unwrap().len(), 16);
    }

    #[test]
    fn dst_single_arc_and_trunk() {
        let g = Digraph::new(2, vec![Arc { from: 0, to: 1, weight: 4 }]);
        assert_eq!(exact_dst_digraph(&g, 0, &[1]).unwrap().weight, Some(4));
        let mut arcs = vec![Arc { from: 0, to: 1, weight: 10 }];
        for t in 2..6 {
            arcs.push(Arc { from: 1, to: t, weight: 1 });
            arcs.push(Arc { from: 0, to: t, weight: 5 });
        }
        let g = Digraph::new(6, arcs);
        let terms = [2, 3, 4, 5];
        assert_eq!(dst_subsets(&g, 0, &terms).weight, Some(14));
        assert_eq!(dreyfus_wagner(&g, 0, &terms).unwrap().weight, Some(14));
    }

    #[test]
    fn gst_picks_cheapest_member() {
        let mut inst = Instance::new(ProblemKind::Gst, 4, vec![Edge::new(0, 1, 1, 5), Edge::new(0, 2, 1, 2), Edge::new(2, 3, 1, 1)], 0, 1);
        inst.groups = vec![vec![1, 3]];
        let r = exact_gst(&inst).unwrap();
        assert_eq!(r.weight, Some(3));
        assert_eq!(r.edges, vec![1, 2]);
    }

    fn arb_graph() -> impl Strategy<Value = (Graph, u64)> {
        (2usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec((any::<prop::sample::Index>(), 0u64..4, 0u64..10), n - 1),
                proptest::collection::vec((0usize..n, 0usize..n, 0u64..4, 0u64..10), 0..8),
                1u64..8,
            )
                .prop_map(move |(tree, extra, h)| {
                    let mut edges = Vec::new();
                    let mut seen = std::collections::HashSet::new();
                    for (i, (p, l, w)) in tree.into_iter().enumerate() {
                        let u = p.index(i + 1);
                        seen.insert((u, i + 1));
                        edges.push(Edge::new(u, i + 1, l, w));
                    }
                    for (a, b, l, w) in extra {
                        let (a, b) = (a.min(b), a.max(b));
                        if a != b && seen.insert((a, b)) {
                            edges.push(Edge::new(a, b, l, w));
                        }
                    }
                    (Graph::new(n, edges), h)
                })
        })
    }

    fn arb_digraph() -> impl Strategy<Value = (Digraph, Vec<usize>)> {
        (3usize..7).prop_flat_map(|n| {
            (proptest::collection::vec((0usize..n, 0usize..n, 0u64..10), 1..18), proptest::collection::vec(1usize..n, 1..4)).prop_map(move |(a, t)| {
                let arcs = a.into_iter().filter(|x| x.0 != x.1).map(|(f, to, w)| Arc { from: f, to, weight: w }).collect();
                (Digraph::new(n, arcs), t)
            })
        })
    }

    proptest! {
        #[test]
        fn bnb_matches_enumeration((g, h) in arb_graph()) {
            let brute = spanning_trees(&g, 100_000).unwrap()
                .into_iter()
                .filter(|t| tree_distances(&g, t, 0).iter().all(|&d| d <= h))
                .map(|t| g.weight_of(&t))
                .min();
            let r = exact_lcmst_graph(&g, 0, h).unwrap();
            prop_assert_eq!(r.weight, brute);
            if let Some(w) = r.weight {
                prop_assert_eq!(g.weight_of(&r.edges), w);
                prop_assert!(tree_distances(&g, &r.edges, 0).iter().all(|&d| d <= h));
            }
            let spt = tree_distances(&g, &(0..g.m()).collect::<Vec<_>>(), 0);
            prop_assert_eq!(r.weight.is_some(), spt.iter().all(|&d| d <= h));
        }

        #[test]
        fn dreyfus_wagner_matches_subsets((g, t) in arb_digraph()) {
            let mut t = t;
            t.sort_unstable();
            t.dedup();
            let a = dst_subsets(&g, 0, &t);
            let b = dreyfus_wagner(&g, 0, &t).unwrap();
            prop_assert_eq!(a.weight, b.weight);
        }
    }
}
