use std::collections::HashMap;
use std::rc::Rc;

use num_rational::Ratio;

use crate::digraph::{Arc, Digraph};
use crate::error::{Error, Result};
use crate::graph::{Graph, INF};
use crate::metrics::length_distances;

pub const DEFAULT_LAYER_CAP: u64 = 10_000;

/// Layer cap, overridable through `LCMST_LAYER_CAP`.
pub fn layer_cap() -> u64 {
    std::env::var("LCMST_LAYER_CAP").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_LAYER_CAP)
}

#[derive(Clone, Debug)]
pub struct LcstInstance {
    pub graph: Graph,
    pub root: usize,
    pub terminals: Vec<usize>,
    pub h: u64,
    /// Vertices paths may end at but not pass through.
    pub sinks: Vec<usize>,
}

impl LcstInstance {
    pub fn new(graph: Graph, root: usize, terminals: Vec<usize>, h: u64) -> Self {
        LcstInstance { graph, root, terminals, h, sinks: Vec::new() }
    }

    pub fn real_terminals(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.terminals.iter().copied().filter(|&t| t != self.root).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Every terminal is within length `h` of the root using only `edges`.
    pub fn is_feasible(&self, edges: &[usize]) -> bool {
        let sink = |v: usize| self.sinks.contains(&v);
        let inner: Vec<usize> = edges.iter().copied().filter(|&e| !sink(self.graph.edges[e].u) && !sink(self.graph.edges[e].v)).collect();
        let mut d = length_distances(&self.graph.edge_subgraph(&inner), &[(self.root, 0)]);
        for &e in edges {
            let ed = self.graph.edges[e];
            for (x, y) in [(ed.u, ed.v), (ed.v, ed.u)] {
                if sink(y) && !sink(x) && d[x] != INF {
                    d[y] = d[y].min(d[x] + ed.length);
                }
            }
        }
        self.terminals.iter().all(|&t| d[t] <= self.h)
    }
}

/// Layered directed instance: node `(v, i)` is the copy of `v` at layer `i`.
#[derive(Clone, Debug)]
pub struct LayeredDst {
    pub digraph: Digraph,
    pub root: usize,
    pub terminals: Vec<usize>,
    pub node: Vec<(usize, u64)>,
    /// Original edge of each arc; `None` for stay arcs.
    pub origin: Vec<Option<usize>>,
    pub layers: u64,
}

impl LayeredDst {
    pub fn weight_of(&self, arcs: &[usize]) -> u64 {
        arcs.iter().map(|&a| self.digraph.arcs[a].weight).sum()
    }

    /// Original edges used by an arc set, sorted and deduplicated.
    pub fn project(&self, arcs: &[usize]) -> Vec<usize> {
        let mut e: Vec<usize> = arcs.iter().filter_map(|&a| self.origin[a]).collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

pub fn layer(inst: &LcstInstance) -> Result<LayeredDst> {
    layer_with_cap(inst, layer_cap())
}

/// Builds layers `0..=h`. Layer 0 holds only the root unless the graph has zero-length edges.
/// Nodes that are neither reachable from the root nor able to reach a terminal are dropped;
/// terminal copies are always kept.
pub fn layer_with_cap(inst: &LcstInstance, cap: u64) -> Result<LayeredDst> {
    let h = inst.h;
    if h.saturating_add(1) > cap {
        return Err(Error::LayerCapExceeded(h));
    }
    let g = &inst.graph;
    let r = inst.root;
    let start = if g.edges.iter().any(|e| e.length == 0) { 0 } else { 1 };
    let mut sink = vec![false; g.n];
    for &v in &inst.sinks {
        sink[v] = true;
    }
    let width = h + 1 - start;
    let rank = |v: usize| if v < r { v } else { v - 1 };
    let id = |v: usize, i: u64| -> Option<usize> {
        if v == r {
            (i == 0).then_some(0)
        } else if i >= start && i <= h {
            Some(1 + rank(v) * width as usize + (i - start) as usize)
        } else {
            None
        }
    };
    let mut node = vec![(r, 0u64)];
    for v in (0..g.n).filter(|&v| v != r) {
        for i in start..=h {
            node.push((v, i));
        }
    }
    let mut arcs = Vec::new();
    let mut origin = Vec::new();
    for (eid, e) in g.edges.iter().enumerate() {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if y == r || sink[x] || e.length > h {
                continue;
            }
            let from_layers: Vec<u64> = if x == r { vec![0] } else { (start..=h - e.length).collect() };
            for i in from_layers {
                if let (Some(a), Some(b)) = (id(x, i), id(y, i + e.length)) {
                    arcs.push(Arc { from: a, to: b, weight: e.weight });
                    origin.push(Some(eid));
                }
            }
        }
    }
    for v in (0..g.n).filter(|&v| v != r) {
        for i in start..h {
            arcs.push(Arc { from: id(v, i).unwrap(), to: id(v, i + 1).unwrap(), weight: 0 });
            origin.push(None);
        }
    }
    let term_nodes: Vec<usize> = inst.real_terminals().iter().map(|&t| id(t, h).unwrap()).collect();
    let full = Digraph::new(node.len(), arcs);
    let fwd = full.reachable(0, |_| true);
    let mut bwd = vec![false; full.n];
    let mut stack = term_nodes.clone();
    for &t in &term_nodes {
        bwd[t] = true;
    }
    while let Some(x) = stack.pop() {
        for &a in full.in_arcs(x) {
            let y = full.arcs[a].from;
            if !bwd[y] {
                bwd[y] = true;
                stack.push(y);
            }
        }
    }
    let keep: Vec<bool> = (0..full.n).map(|x| x == 0 || (fwd[x] && bwd[x]) || term_nodes.contains(&x)).collect();
    let mut new_id = vec![usize::MAX; full.n];
    let mut new_node = Vec::new();
    for x in 0..full.n {
        if keep[x] {
            new_id[x] = new_node.len();
            new_node.push(node[x]);
        }
    }
    let mut new_arcs = Vec::new();
    let mut new_origin = Vec::new();
    for (a, arc) in full.arcs.iter().enumerate() {
        if keep[arc.from] && keep[arc.to] {
            new_arcs.push(Arc { from: new_id[arc.from], to: new_id[arc.to], weight: arc.weight });
            new_origin.push(origin[a]);
        }
    }
    Ok(LayeredDst {
        digraph: Digraph::new(new_node.len(), new_arcs),
        root: 0,
        terminals: term_nodes.iter().map(|&t| new_id[t]).collect(),
        node: new_node,
        origin: new_origin,
        layers: h + 1,
    })
}

#[derive(Clone, Debug, Default)]
struct Sub {
    cost: u128,
    arcs: Vec<usize>,
    covered: Vec<usize>,
}

type Tree = Rc<(Vec<u64>, Vec<usize>)>;

struct Greedy<'a> {
    g: &'a Digraph,
    terms: &'a [usize],
    to_term: Vec<(Vec<u64>, Vec<usize>)>,
    from: HashMap<usize, Tree>,
}

/// `a/b < c/d`, `a/b == c/d` on nonnegative fractions.
fn cmp_density(a: u128, b: u128, c: u128, d: u128) -> std::cmp::Ordering {
    (a * d).cmp(&(c * b))
}

impl<'a> Greedy<'a> {
    fn new(g: &'a Digraph, terms: &'a [usize]) -> Self {
        let to_term = terms.iter().map(|&t| g.to_target(t)).collect();
        Greedy { g, terms, to_term, from: HashMap::new() }
    }

    fn from(&mut self, v: usize) -> Tree {
        let g = self.g;
        self.from.entry(v).or_insert_with(|| Rc::new(g.from_source(v))).clone()
    }

    fn path_to(&self, t: usize, v: usize, out: &mut Vec<usize>) {
        let (_, next) = &self.to_term[t];
        let mut x = v;
        while x != self.terms[t] {
            let a = next[x];
            out.push(a);
            x = self.g.arcs[a].to;
        }
    }

    fn path_from(&self, tree: &Tree, v: usize, u: usize, out: &mut Vec<usize>) {
        let mut x = u;
        while x != v {
            let a = tree.1[x];
            out.push(a);
            x = self.g.arcs[a].from;
        }
    }

    /// Terminals of `x` sorted by distance from `u` (ties by id); unreachable ones omitted.
    fn closest(&self, u: usize, x: &[usize]) -> Vec<(u64, usize)> {
        let mut c: Vec<(u64, usize)> = x.iter().map(|&t| (self.to_term[t].0[u], t)).filter(|p| p.0 != INF).collect();
        c.sort_unstable();
        c
    }

    fn level1(&self, k: usize, v: usize, x: &[usize]) -> Option<Sub> {
        let c = self.closest(v, x);
        if c.len() < k {
            return None;
        }
        let mut s = Sub::default();
        for &(d, t) in &c[..k] {
            s.cost += d as u128;
            self.path_to(t, v, &mut s.arcs);
            s.covered.push(t);
        }
        s.covered.sort_unstable();
        Some(s)
    }

    fn level(&mut self, i: usize, k: usize, v: usize, x: &[usize]) -> Option<Sub> {
        if i == 1 {
            return self.level1(k, v, x);
        }
        let tree = self.from(v);
        let mut rem: Vec<usize> = x.to_vec();
        let mut need = k;
        let mut acc = Sub::default();
        while need > 0 {
            // (cost, count, covered, u, sub)
            let mut best: Option<(u128, usize, Vec<usize>, usize, Option<Sub>)> = None;
            for u in 0..self.g.n {
                let du = tree.0[u];
                if du == INF {
                    continue;
                }
                if i == 2 {
                    let c = self.closest(u, &rem);
                    let mut sum = du as u128;
                    for kk in 1..=need.min(c.len()) {
                        sum += c[kk - 1].0 as u128;
                        let better = match &best {
                            None => true,
                            Some((bc, bk, bcov, _, _)) => match cmp_density(sum, kk as u128, *bc, *bk as u128) {
                                std::cmp::Ordering::Less => true,
                                std::cmp::Ordering::Greater => false,
                                std::cmp::Ordering::Equal => {
                                    sum < *bc || (sum == *bc && {
                                        let mut ids: Vec<usize> = c[..kk].iter().map(|p| p.1).collect();
                                        ids.sort_unstable();
                                        ids < *bcov
                                    })
                                }
                            },
                        };
                        if better {
                            let mut ids: Vec<usize> = c[..kk].iter().map(|p| p.1).collect();
                            ids.sort_unstable();
                            best = Some((sum, kk, ids, u, None));
                        }
                    }
                } else {
                    for kk in 1..=need {
                        let Some(sub) = self.level(i - 1, kk, u, &rem) else { break };
                        let cost = du as u128 + sub.cost;
                        let better = match &best {
                            None => true,
                            Some((bc, bk, bcov, _, _)) => match cmp_density(cost, kk as u128, *bc, *bk as u128) {
                                std::cmp::Ordering::Less => true,
                                std::cmp::Ordering::Greater => false,
                                std::cmp::Ordering::Equal => cost < *bc || (cost == *bc && sub.covered < *bcov),
                            },
                        };
                        if better {
                            best = Some((cost, kk, sub.covered.clone(), u, Some(sub)));
                        }
                    }
                }
            }
            let (cost, kk, covered, u, sub) = best?;
            self.path_from(&tree, v, u, &mut acc.arcs);
            match sub {
                Some(s) => acc.arcs.extend(s.arcs),
                None => {
                    for &t in &covered {
                        self.path_to(t, u, &mut acc.arcs);
                    }
                }
            }
            acc.cost += cost;
            rem.retain(|t| covered.binary_search(t).is_err());
            acc.covered.extend(covered);
            need -= kk;
        }
        acc.covered.sort_unstable();
        Some(acc)
    }
}

/// Recursive greedy with `levels` levels. Returns an arborescence (arc ids, sorted) from the root
/// reaching every terminal.
pub fn recursive_greedy(dst: &LayeredDst, levels: usize) -> Result<Vec<usize>> {
    let g = &dst.digraph;
    let reach = g.reachable(dst.root, |_| true);
    if dst.terminals.iter().any(|&t| !reach[t]) {
        return Err(Error::Infeasible);
    }
    let mut terms = dst.terminals.clone();
    terms.sort_unstable();
    terms.dedup();
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    let mut greedy = Greedy::new(g, &terms);
    let all: Vec<usize> = (0..terms.len()).collect();
    let sub = greedy.level(levels.max(1), terms.len(), dst.root, &all).ok_or(Error::Infeasible)?;
    Ok(arborescence(dst, &sub.arcs))
}

/// Cheapest arborescence inside `arcs` reaching all terminals, non-terminal leaves pruned.
pub fn arborescence(dst: &LayeredDst, arcs: &[usize]) -> Vec<usize> {
    let g = &dst.digraph;
    let mut chosen: Vec<usize> = arcs.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    let sub = Digraph::new(g.n, chosen.iter().map(|&a| g.arcs[a]).collect());
    let (dist, via) = sub.from_source(dst.root);
    let mut out = Vec::new();
    let mut seen = vec![false; g.n];
    seen[dst.root] = true;
    for &t in &dst.terminals {
        if dist[t] == INF {
            continue;
        }
        let mut x = t;
        while !seen[x] {
            seen[x] = true;
            let a = via[x];
            out.push(chosen[a]);
            x = sub.arcs[a].from;
        }
    }
    out.sort_unstable();
    out
}

/// Recursion depth `⌈1/δ⌉`.
pub fn levels_for(delta: Ratio<u64>) -> usize {
    assert!(*delta.numer() > 0, "delta must be positive");
    delta.denom().div_ceil(*delta.numer()) as usize
}

/// Approximate LCST through the layered instance. `Ok(None)` is the fail outcome.
pub fn lcst_approx(inst: &LcstInstance, delta: Ratio<u64>) -> Result<Option<Vec<usize>>> {
    if inst.real_terminals().is_empty() {
        return Ok(Some(Vec::new()));
    }
    let dst = layer(inst)?;
    let arcs = match recursive_greedy(&dst, levels_for(delta)) {
        Ok(a) => a,
        Err(Error::Infeasible) => return Ok(None),
        Err(e) => return Err(e),
    };
    let edges = dst.project(&arcs);
    assert!(inst.is_feasible(&edges), "layered solution violates the length bound");
    Ok(Some(edges))
}

pub const EXACT_EDGE_LIMIT: usize = 20;

/// Exact LCST by edge-subset enumeration. `Ok(None)` means infeasible.
pub fn lcst_exact(inst: &LcstInstance) -> Result<Option<(u64, Vec<usize>)>> {
    let g = &inst.graph;
    let m = g.m();
    if m > EXACT_EDGE_LIMIT {
        return Err(Error::TooLarge(format!("{m} edges for subset enumeration")));
    }
    let terms = inst.real_terminals();
    let mut best: Option<(u64, u32)> = None;
    let mut dist = vec![INF; g.n];
    for mask in 0u32..(1u32 << m) {
        let w: u64 = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| g.edges[i].weight).sum();
        if best.is_some_and(|(bw, _)| w >= bw) {
            continue;
        }
        dist.fill(INF);
        dist[inst.root] = 0;
        let mut changed = true;
        while changed {
            changed = false;
            for i in (0..m).filter(|&i| mask >> i & 1 == 1) {
                let e = g.edges[i];
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if dist[a] != INF && dist[a] + e.length < dist[b] {
                        dist[b] = dist[a] + e.length;
                        changed = true;
                    }
                }
            }
        }
        if terms.iter().all(|&t| dist[t] <= inst.h) {
            best = Some((w, mask));
        }
    }
    Ok(best.map(|(w, mask)| (w, (0..m).filter(|&i| mask >> i & 1 == 1).collect())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn inst(n: usize, edges: &[(usize, usize, u64, u64)], terms: &[usize], h: u64) -> LcstInstance {
        let g = Graph::new(n, edges.iter().map(|&(u, v, l, w)| Edge::new(u, v, l, w)).collect());
        LcstInstance::new(g, 0, terms.to_vec(), h)
    }

    fn half() -> Ratio<u64> {
        Ratio::new(1, 2)
    }

    #[test]
    fn single_edge() {
        let i = inst(2, &[(0, 1, 1, 5)], &[1], 1);
        let d = layer(&i).unwrap();
        assert_eq!(d.digraph.n, 2);
        assert_eq!(d.layers, 2);
        let sol = lcst_approx(&i, half()).unwrap().unwrap();
        assert_eq!(i.graph.weight_of(&sol), 5);
        assert_eq!(lcst_exact(&i).unwrap(), Some((5, vec![0])));
    }

    #[test]
    fn root_only_terminals() {
        let i = inst(2, &[(0, 1, 1, 5)], &[0], 1);
        assert_eq!(lcst_approx(&i, half()).unwrap(), Some(vec![]));
        assert_eq!(lcst_exact(&i).unwrap(), Some((0, vec![])));
    }

    #[test]
    fn infeasible_is_fail() {
        let i = inst(2, &[(0, 1, 3, 5)], &[1], 2);
        assert_eq!(lcst_approx(&i, half()).unwrap(), None);
        assert_eq!(lcst_exact(&i).unwrap(), None);
    }

    #[test]
    fn layer_cap() {
        let i = inst(2, &[(0, 1, 1, 5)], &[1], 50);
        assert!(matches!(layer_with_cap(&i, 10), Err(Error::LayerCapExceeded(50))));
    }

    #[test]
    fn tight_bound_picks_shortcut() {
        // direct r-t (l=2, w=9) vs cheap path r-a-t (l=1+2, w=1+1)
        let i = inst(3, &[(0, 1, 1, 1), (1, 2, 2, 1), (0, 2, 2, 9)], &[2], 2);
        assert_eq!(lcst_exact(&i).unwrap(), Some((9, vec![2])));
        let j = LcstInstance { h: 3, ..i };
        assert_eq!(lcst_exact(&j).unwrap(), Some((2, vec![0, 1])));
    }

    #[test]
    fn shared_trunk_with_two_levels() {
        let k = 4;
        let mut e = vec![(0, 1, 1, 10)];
        for t in 2..2 + k {
            e.push((1, t, 1, 1));
            e.push((0, t, 2, 5));
        }
        let terms: Vec<usize> = (2..2 + k).collect();
        let i = inst(2 + k, &e, &terms, 2);
        let two = lcst_approx(&i, half()).unwrap().unwrap();
        assert_eq!(i.graph.weight_of(&two), 14);
        let one = lcst_approx(&i, Ratio::from_integer(1)).unwrap().unwrap();
        assert_eq!(i.graph.weight_of(&one), 20);
        assert_eq!(lcst_exact(&i).unwrap().unwrap().0, 14);
    }

    #[test]
    fn zero_length_edges_use_layer_zero() {
        let i = inst(3, &[(0, 1, 0, 1), (1, 2, 1, 1), (0, 2, 1, 7)], &[2], 1);
        let sol = lcst_approx(&i, half()).unwrap().unwrap();
        assert_eq!(i.graph.weight_of(&sol), 2);
    }

    pub(crate) fn arb_instance() -> impl Strategy<Value = LcstInstance> {
        (2usize..7).prop_flat_map(|n| {
            (
                proptest::collection::vec((any::<prop::sample::Index>(), 0u64..4, 0u64..10), n - 1),
                proptest::collection::vec((0usize..n, 0usize..n, 0u64..4, 0u64..10), 0..6),
                proptest::collection::vec(0usize..n, 1..5),
                1u64..7,
            )
                .prop_map(move |(tree, extra, terms, h)| {
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
                    LcstInstance::new(Graph::new(n, edges), 0, terms, h)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn greedy_ratio_and_feasibility(i in arb_instance(), lv in 1usize..4) {
            let exact = lcst_exact(&i).unwrap();
            let approx = lcst_approx(&i, Ratio::new(1, lv as u64)).unwrap();
            prop_assert_eq!(exact.is_some(), approx.is_some());
            if let (Some((opt, _)), Some(sol)) = (exact, approx) {
                prop_assert!(i.is_feasible(&sol));
                let w = i.graph.weight_of(&sol) as f64;
                let t = i.real_terminals().len().max(1) as f64;
                prop_assert!(w <= 2.0 * lv as f64 * t.powf(1.0 / lv as f64) * opt as f64 + 1e-9);
                if t == 1.0 {
                    prop_assert_eq!(w as u64, opt);
                }
            }
        }

        #[test]
        fn layering_preserves_optimum(i in arb_instance()) {
            let exact = lcst_exact(&i).unwrap().map(|p| p.0);
            let d = layer(&i).unwrap();
            let r = crate::oracle::dreyfus_wagner(&d.digraph, d.root, &d.terminals).unwrap();
            prop_assert_eq!(exact, r.weight);
            if r.weight.is_some() {
                let proj = d.project(&r.edges);
                prop_assert!(i.is_feasible(&proj));
                prop_assert_eq!(i.graph.weight_of(&proj), exact.unwrap());
            }
        }

        #[test]
        fn exact_monotone_in_h(i in arb_instance()) {
            let a = lcst_exact(&i).unwrap().map(|p| p.0);
            let j = LcstInstance { h: i.h + 1, ..i.clone() };
            let b = lcst_exact(&j).unwrap().map(|p| p.0);
            match (a, b) {
                (Some(x), Some(y)) => prop_assert!(y <= x),
                (Some(_), None) => prop_assert!(false),
                _ => {}
            }
        }
    }
}
