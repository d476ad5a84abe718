use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, ProblemKind, INF};
use crate::lcst::layer_cap;
use crate::metrics::length_spt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexRole {
    Original,
    Copy,
    /// Special terminal copy.
    Special,
    /// Midpoint of a subdivided helper edge.
    Dummy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexOrigin {
    pub source: usize,
    pub layer: Option<u64>,
    pub role: VertexRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRole {
    Original,
    /// Zero-weight root edge that spans a vertex at length h.
    Spanning,
    /// Zero-weight arc between consecutive copies of one vertex.
    Stay,
    /// Edge from a group vertex to its pulled copy.
    Pull,
    /// Zero edge inside a group or special-copy clique.
    Clique,
    /// Edge from a terminal copy to its special copy.
    Link,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeOrigin {
    pub source: Option<usize>,
    pub role: EdgeRole,
}

/// Source and target instances with vertex and edge correspondence tables.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionBundle {
    pub from: ProblemKind,
    pub to: ProblemKind,
    #[serde(skip)]
    pub source: Instance,
    #[serde(skip)]
    pub target: Instance,
    pub vertices: Vec<VertexOrigin>,
    pub edges: Vec<EdgeOrigin>,
}

struct Builder {
    directed: bool,
    vertices: Vec<VertexOrigin>,
    edges: Vec<(Edge, EdgeOrigin)>,
    pairs: HashMap<(usize, usize), usize>,
}

impl Builder {
    fn new(directed: bool) -> Self {
        Builder { directed, vertices: Vec::new(), edges: Vec::new(), pairs: HashMap::new() }
    }

    fn vertex(&mut self, source: usize, layer: Option<u64>, role: VertexRole) -> usize {
        self.vertices.push(VertexOrigin { source, layer, role });
        self.vertices.len() - 1
    }

    fn key(&self, u: usize, v: usize) -> (usize, usize) {
        if self.directed {
            (u, v)
        } else {
            (u.min(v), u.max(v))
        }
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.pairs.contains_key(&self.key(u, v))
    }

    fn edge(&mut self, u: usize, v: usize, length: u64, weight: u64, source: Option<usize>, role: EdgeRole) {
        let k = self.key(u, v);
        debug_assert!(!self.pairs.contains_key(&k));
        self.pairs.insert(k, self.edges.len());
        self.edges.push((Edge::new(u, v, length, weight), EdgeOrigin { source, role }));
    }

    /// Zero-weight edge of length `h` from `r` to `v`, subdivided through a dummy vertex when `r` and
    /// `v` are already adjacent.
    fn spanning(&mut self, r: usize, v: usize, h: u64) {
        if self.has(r, v) {
            let x = self.vertex(v, None, VertexRole::Dummy);
            self.edge(r, x, h, 0, None, EdgeRole::Spanning);
            self.edge(x, v, 0, 0, None, EdgeRole::Spanning);
        } else {
            self.edge(r, v, h, 0, None, EdgeRole::Spanning);
        }
    }

    fn finish(self, from: ProblemKind, source: &Instance, kind: ProblemKind, root: usize, h: u64, terminals: Vec<usize>) -> ReductionBundle {
        let directed = self.directed;
        let mut items: Vec<(Edge, EdgeOrigin)> = self
            .edges
            .into_iter()
            .map(|(mut e, o)| {
                if !directed && e.u > e.v {
                    std::mem::swap(&mut e.u, &mut e.v);
                }
                (e, o)
            })
            .collect();
        items.sort_by_key(|(e, _)| (e.u, e.v));
        let mut target = Instance::new(kind, self.vertices.len(), items.iter().map(|x| x.0).collect(), root, h);
        target.terminals = terminals;
        target.canonicalize();
        ReductionBundle { from, to: kind, source: source.clone(), target, vertices: self.vertices, edges: items.into_iter().map(|x| x.1).collect() }
    }
}

fn expect_kind(inst: &Instance, kind: ProblemKind) -> Result<()> {
    if inst.kind != kind {
        return Err(Error::Invalid(format!("expected a {kind} instance, got {}", inst.kind)));
    }
    Ok(())
}

/// Adds a zero-weight, length-h root edge to every non-terminal.
/// Zero-length edges are rejected: a helper edge followed by zero-length edges would reach terminals
/// at length exactly h without a path in the source graph.
pub fn lcst_to_lcmst(inst: &Instance) -> Result<ReductionBundle> {
    expect_kind(inst, ProblemKind::Lcst)?;
    if inst.edges.iter().any(|e| e.length == 0) {
        return Err(Error::Invalid("lcst_to_lcmst requires positive edge lengths".into()));
    }
    let mut b = Builder::new(false);
    for v in 0..inst.n {
        b.vertex(v, None, VertexRole::Original);
    }
    for (i, e) in inst.edges.iter().enumerate() {
        b.edge(e.u, e.v, e.length, e.weight, Some(i), EdgeRole::Original);
    }
    let mut terminal = vec![false; inst.n];
    for &t in &inst.terminals {
        terminal[t] = true;
    }
    for v in 0..inst.n {
        if v != inst.root && !terminal[v] {
            b.spanning(inst.root, v, inst.h);
        }
    }
    Ok(b.finish(ProblemKind::Lcst, inst, ProblemKind::Lcmst, inst.root, inst.h, Vec::new()))
}

/// Layered digraph with layers `0..=h`; copies in layer h are the terminals.
pub fn lcmst_to_dst(inst: &Instance) -> Result<ReductionBundle> {
    expect_kind(inst, ProblemKind::Lcmst)?;
    let h = inst.h;
    if h.saturating_add(1) > layer_cap() {
        return Err(Error::LayerCapExceeded(h));
    }
    let r = inst.root;
    let start = if inst.edges.iter().any(|e| e.length == 0) { 0 } else { 1 };
    let mut b = Builder::new(true);
    let root = b.vertex(r, Some(0), VertexRole::Original);
    let mut copy = HashMap::new();
    for i in start..=h {
        for v in (0..inst.n).filter(|&v| v != r) {
            copy.insert((v, i), b.vertex(v, Some(i), VertexRole::Copy));
        }
    }
    let node = |v: usize, i: u64| if v == r { (i == 0).then_some(root) } else { copy.get(&(v, i)).copied() };
    for (idx, e) in inst.edges.iter().enumerate() {
        for (x, y) in [(e.u, e.v), (e.v, e.u)] {
            if y == r {
                continue;
            }
            for i in 0..=h.saturating_sub(e.length) {
                if let (Some(a), Some(c)) = (node(x, i), node(y, i + e.length)) {
                    b.edge(a, c, e.length, e.weight, Some(idx), EdgeRole::Original);
                }
            }
        }
    }
    for v in (0..inst.n).filter(|&v| v != r) {
        for i in start..h {
            b.edge(copy[&(v, i)], copy[&(v, i + 1)], 0, 0, None, EdgeRole::Stay);
        }
    }
    let terminals = (0..inst.n).filter(|&v| v != r).map(|v| copy[&(v, h)]).collect();
    Ok(b.finish(ProblemKind::Lcmst, inst, ProblemKind::Dst, root, h, terminals))
}

/// Undirected layered graph with `n` layers, special terminal copies joined by zero cliques, and `h = n`.
pub fn dst_to_lcst(inst: &Instance) -> Result<ReductionBundle> {
    expect_kind(inst, ProblemKind::Dst)?;
    let n = inst.n;
    let nl = n as u64;
    let terms: Vec<usize> = {
        let mut t: Vec<usize> = inst.terminals.iter().copied().filter(|&t| t != inst.root).collect();
        t.sort_unstable();
        t.dedup();
        t
    };
    let mut b = Builder::new(false);
    for i in 0..nl {
        for v in 0..n {
            b.vertex(v, Some(i), if i == 0 { VertexRole::Original } else { VertexRole::Copy });
        }
    }
    let copy = |v: usize, i: u64| i as usize * n + v;
    let mut special = vec![Vec::new(); terms.len()];
    for i in 0..nl {
        for (j, &t) in terms.iter().enumerate() {
            special[j].push(b.vertex(t, Some(i), VertexRole::Special));
        }
    }
    for (idx, e) in inst.edges.iter().enumerate() {
        for i in 0..nl.saturating_sub(1) {
            b.edge(copy(e.u, i), copy(e.v, i + 1), 1, e.weight, Some(idx), EdgeRole::Original);
        }
    }
    for (j, &t) in terms.iter().enumerate() {
        for i in 0..nl {
            b.edge(copy(t, i), special[j][i as usize], nl - i, 0, None, EdgeRole::Link);
        }
        for a in 0..n {
            for c in a + 1..n {
                b.edge(special[j][a], special[j][c], 0, 0, None, EdgeRole::Clique);
            }
        }
    }
    let terminals = special.iter().flatten().copied().collect();
    Ok(b.finish(ProblemKind::Dst, inst, ProblemKind::Lcst, copy(inst.root, 0), nl.max(1), terminals))
}

/// Hardness gadget: group vertices pulled away by length-h edges into zero cliques, every original
/// vertex spanned from the root at length h, original edges at length 0.
pub fn gst_to_lcmst(inst: &Instance) -> Result<ReductionBundle> {
    expect_kind(inst, ProblemKind::Gst)?;
    inst.validate()?;
    let h = inst.h;
    let mut b = Builder::new(false);
    for v in 0..inst.n {
        b.vertex(v, None, VertexRole::Original);
    }
    for (i, e) in inst.edges.iter().enumerate() {
        b.edge(e.u, e.v, 0, e.weight, Some(i), EdgeRole::Original);
    }
    for grp in &inst.groups {
        let copies: Vec<usize> = grp.iter().map(|&v| b.vertex(v, None, VertexRole::Copy)).collect();
        for (&v, &c) in grp.iter().zip(&copies) {
            b.edge(v, c, h, 0, None, EdgeRole::Pull);
        }
        for a in 0..copies.len() {
            for c in a + 1..copies.len() {
                b.edge(copies[a], copies[c], 0, 0, None, EdgeRole::Clique);
            }
        }
    }
    for v in (0..inst.n).filter(|&v| v != inst.root) {
        b.spanning(inst.root, v, h);
    }
    Ok(b.finish(ProblemKind::Gst, inst, ProblemKind::Lcmst, inst.root, h, Vec::new()))
}

/// Makes groups disjoint: a vertex in several groups gets one zero-weight pendant per group, and the
/// pendant replaces it in that group.
pub fn normalize_groups(inst: &Instance) -> Instance {
    let mut count = vec![0usize; inst.n];
    for g in &inst.groups {
        for &v in g {
            count[v] += 1;
        }
    }
    let mut out = inst.clone();
    for g in &mut out.groups {
        for v in g.iter_mut() {
            if count[*v] > 1 {
                let d = out.n;
                out.n += 1;
                out.edges.push(Edge::new(*v, d, 0, 0));
                *v = d;
            }
        }
    }
    out.canonicalize();
    out
}

/// Edges of a length-shortest-path tree from `root` within `ids`, limited to vertices at distance at most `h`.
fn spt_within(g: &Graph, ids: &[usize], root: usize, h: u64) -> (Vec<usize>, Vec<u64>) {
    let (dist, tree) = length_spt(&g.edge_subgraph(ids), root);
    let mut out: Vec<usize> = (0..g.n).filter(|&v| dist[v] <= h).filter_map(|v| tree.parent_edge[v]).map(|e| ids[e]).collect();
    out.sort_unstable();
    (out, dist)
}

/// Breadth-first arborescence over `arcs` from `root`: parent arc and hop depth per vertex.
fn bfs_arborescence(n: usize, edges: &[Edge], arcs: &[usize], root: usize, directed: bool) -> (Vec<Option<usize>>, Vec<u64>) {
    let mut adj = vec![Vec::new(); n];
    for &a in arcs {
        let e = edges[a];
        adj[e.u].push((e.v, a));
        if !directed {
            adj[e.v].push((e.u, a));
        }
    }
    let mut parent = vec![None; n];
    let mut depth = vec![INF; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &(y, a) in &adj[x] {
            if depth[y] == INF {
                depth[y] = depth[x] + 1;
                parent[y] = Some(a);
                queue.push_back(y);
            }
        }
    }
    (parent, depth)
}

impl ReductionBundle {
    fn lookup(&self) -> HashMap<(usize, usize), usize> {
        let directed = self.target.directed();
        self.target
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (if directed { (e.u, e.v) } else { (e.u.min(e.v), e.u.max(e.v)) }, i))
            .collect()
    }

    fn find(&self, map: &HashMap<(usize, usize), usize>, u: usize, v: usize) -> Result<usize> {
        let k = if self.target.directed() { (u, v) } else { (u.min(v), u.max(v)) };
        map.get(&k).copied().ok_or_else(|| Error::Other(format!("target has no edge ({u}, {v})")))
    }

    fn vertex_index(&self) -> HashMap<(usize, Option<u64>, VertexRole), usize> {
        self.vertices.iter().enumerate().map(|(i, o)| ((o.source, o.layer, o.role), i)).collect()
    }

    /// Source edges of the target edges whose role is `Original`, sorted and deduplicated.
    fn originals(&self, target_edges: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = target_edges.iter().filter(|&&e| self.edges[e].role == EdgeRole::Original).filter_map(|&e| self.edges[e].source).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Zero-weight spanning edges for every source vertex not covered, and the root-side half of
    /// every subdivided spanning edge.
    fn spanning_for(&self, covered: &[bool], out: &mut Vec<usize>) {
        let r = self.target.root;
        for (i, e) in self.target.edges.iter().enumerate() {
            if self.edges[i].role != EdgeRole::Spanning {
                continue;
            }
            let other = if e.u == r { e.v } else if e.v == r { e.u } else { usize::MAX };
            if other != usize::MAX {
                let o = self.vertices[other];
                if o.role == VertexRole::Dummy || !covered[o.source] {
                    out.push(i);
                }
            } else {
                let (x, v) = if self.vertices[e.u].role == VertexRole::Dummy { (e.u, e.v) } else { (e.v, e.u) };
                debug_assert_eq!(self.vertices[x].role, VertexRole::Dummy);
                if !covered[v] {
                    out.push(i);
                }
            }
        }
    }

    /// Maps a feasible source solution (edge ids of the source) to a feasible target solution of equal weight.
    pub fn forward(&self, solution: &[usize]) -> Result<Vec<usize>> {
        let src = &self.source;
        let map = self.lookup();
        let mut out = Vec::new();
        match (self.from, self.to) {
            (ProblemKind::Lcst, ProblemKind::Lcmst) => {
                let g = src.graph();
                let (tree, dist) = spt_within(&g, solution, src.root, src.h);
                let covered: Vec<bool> = dist.iter().map(|&d| d <= src.h).collect();
                for &e in &tree {
                    out.push(self.find(&map, src.edges[e].u, src.edges[e].v)?);
                }
                self.spanning_for(&covered, &mut out);
            }
            (ProblemKind::Lcmst, ProblemKind::Dst) => {
                let (dist, tree) = length_spt(&src.graph().edge_subgraph(solution), src.root);
                if dist.iter().any(|&d| d > src.h) {
                    return Err(Error::Infeasible);
                }
                let idx = self.vertex_index();
                let node = |v: usize, i: u64| {
                    if v == src.root {
                        idx[&(v, Some(0), VertexRole::Original)]
                    } else {
                        idx[&(v, Some(i), VertexRole::Copy)]
                    }
                };
                for c in (0..src.n).filter(|&v| tree.parent_edge[v].is_some()) {
                    let p = tree.parent[c];
                    out.push(self.find(&map, node(p, dist[p]), node(c, dist[c]))?);
                }
                for v in (0..src.n).filter(|&v| v != src.root) {
                    for i in dist[v]..src.h {
                        out.push(self.find(&map, node(v, i), node(v, i + 1))?);
                    }
                }
            }
            (ProblemKind::Dst, ProblemKind::Lcst) => {
                let (parent, depth) = bfs_arborescence(src.n, &src.edges, solution, src.root, true);
                let n = src.n;
                let idx = self.vertex_index();
                let copy = |v: usize, i: u64| i as usize * n + v;
                for v in 0..n {
                    if let Some(a) = parent[v] {
                        let p = src.edges[a].u;
                        out.push(self.find(&map, copy(p, depth[p]), copy(v, depth[p] + 1))?);
                    }
                }
                for t in self.vertices.iter().filter(|o| o.role == VertexRole::Special && o.layer == Some(0)).map(|o| o.source) {
                    let d = depth[t];
                    if d == INF {
                        return Err(Error::Infeasible);
                    }
                    let hub = idx[&(t, Some(d), VertexRole::Special)];
                    out.push(self.find(&map, copy(t, d), hub)?);
                    for i in (0..n as u64).filter(|&i| i != d) {
                        out.push(self.find(&map, hub, idx[&(t, Some(i), VertexRole::Special)])?);
                    }
                }
            }
            (ProblemKind::Gst, ProblemKind::Lcmst) => {
                let (parent, depth) = bfs_arborescence(src.n, &src.edges, solution, src.root, false);
                let covered: Vec<bool> = depth.iter().map(|&d| d != INF).collect();
                for a in parent.iter().flatten() {
                    out.push(self.find(&map, src.edges[*a].u, src.edges[*a].v)?);
                }
                let idx = self.vertex_index();
                for grp in &src.groups {
                    let &hub = grp.iter().find(|&&v| covered[v]).ok_or(Error::Infeasible)?;
                    let hub_copy = idx[&(hub, None, VertexRole::Copy)];
                    out.push(self.find(&map, hub, hub_copy)?);
                    for &v in grp.iter().filter(|&&v| v != hub) {
                        out.push(self.find(&map, hub_copy, idx[&(v, None, VertexRole::Copy)])?);
                    }
                }
                self.spanning_for(&covered, &mut out);
            }
            _ => unreachable!(),
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Maps a target solution (edge ids of the target) back to a source solution of no greater weight.
    pub fn backward(&self, solution: &[usize]) -> Vec<usize> {
        let src = &self.source;
        let proj = self.originals(solution);
        match self.from {
            ProblemKind::Lcst | ProblemKind::Lcmst => spt_within(&src.graph(), &proj, src.root, INF - 1).0,
            ProblemKind::Dst => proj,
            ProblemKind::Gst => {
                let (parent, _) = bfs_arborescence(src.n, &src.edges, &proj, src.root, false);
                let mut out: Vec<usize> = parent.into_iter().flatten().collect();
                out.sort_unstable();
                out
            }
        }
    }

    pub fn mapping_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

/// Source-side feasibility of an edge set, by problem kind.
pub fn is_feasible(inst: &Instance, edges: &[usize]) -> bool {
    match inst.kind {
        ProblemKind::Lcmst | ProblemKind::Lcst => {
            let (_, dist) = spt_within(&inst.graph(), edges, inst.root, INF - 1);
            match inst.kind {
                ProblemKind::Lcmst => dist.iter().all(|&d| d <= inst.h),
                _ => inst.terminals.iter().all(|&t| dist[t] <= inst.h),
            }
        }
        ProblemKind::Dst => {
            let (_, depth) = bfs_arborescence(inst.n, &inst.edges, edges, inst.root, true);
            inst.terminals.iter().all(|&t| depth[t] != INF)
        }
        ProblemKind::Gst => {
            let (_, depth) = bfs_arborescence(inst.n, &inst.edges, edges, inst.root, false);
            inst.groups.iter().all(|g| g.iter().any(|&v| depth[v] != INF))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_planar;
    use crate::oracle::{exact_dst, exact_gst, exact_lcmst, exact_lcst};
    use proptest::prelude::*;

    fn weight(inst: &Instance, edges: &[usize]) -> u64 {
        edges.iter().map(|&e| inst.edges[e].weight).sum()
    }

    #[test]
    fn all_terminals_leave_lcst_unchanged() {
        let mut inst = Instance::new(ProblemKind::Lcst, 3, vec![Edge::new(0, 1, 1, 2), Edge::new(1, 2, 1, 3)], 0, 2);
        inst.terminals = vec![0, 1, 2];
        let b = lcst_to_lcmst(&inst).unwrap();
        assert_eq!(b.target.edges, inst.edges);
        assert!(b.edges.iter().all(|o| o.role == EdgeRole::Original));
    }

    #[test]
    fn single_non_terminal_gets_one_helper() {
        let mut inst = Instance::new(ProblemKind::Lcst, 3, vec![Edge::new(0, 1, 1, 2), Edge::new(1, 2, 1, 3)], 0, 4);
        inst.terminals = vec![1];
        let b = lcst_to_lcmst(&inst).unwrap();
        let helpers: Vec<Edge> = b.target.edges.iter().zip(&b.edges).filter(|(_, o)| o.role == EdgeRole::Spanning).map(|(e, _)| *e).collect();
        assert_eq!(helpers, vec![Edge::new(0, 2, 4, 0)]);
    }

    #[test]
    fn k4_plus_root_layers_are_non_planar() {
        let mut edges = vec![Edge::new(0, 1, 1, 1), Edge::new(0, 2, 1, 1)];
        for a in 1..5 {
            for c in a + 1..5 {
                edges.push(Edge::new(a, c, 1, 1));
            }
        }
        let inst = Instance::new(ProblemKind::Lcmst, 5, edges, 0, 2);
        embed_planar(&inst).unwrap();
        let b = lcmst_to_dst(&inst).unwrap();
        let layers: std::collections::BTreeSet<u64> = b.vertices.iter().filter_map(|o| o.layer).collect();
        assert_eq!(layers.len(), 3);
        assert!(matches!(embed_planar(&b.target), Err(Error::NonPlanar { .. })));
    }

    #[test]
    fn single_edge_two_layers() {
        let inst = Instance::new(ProblemKind::Lcmst, 2, vec![Edge::new(0, 1, 1, 5)], 0, 1);
        let b = lcmst_to_dst(&inst).unwrap();
        assert_eq!(b.target.n, 2);
        assert_eq!(b.target.edges.len(), 1);
        assert_eq!(b.edges[0].role, EdgeRole::Original);
        assert_eq!(exact_dst(&b.target).unwrap().weight, Some(5));
    }

    #[test]
    fn dst_single_arc_maps_back() {
        let mut inst = Instance::new(ProblemKind::Dst, 2, vec![Edge::new(0, 1, 1, 4)], 0, 1);
        inst.terminals = vec![1];
        let b = dst_to_lcst(&inst).unwrap();
        let opt = exact_lcst(&b.target).unwrap();
        assert_eq!(opt.weight, Some(4));
        assert_eq!(b.backward(&opt.edges), vec![0]);
        for (e, o) in b.target.edges.iter().zip(&b.edges) {
            if o.role == EdgeRole::Clique {
                assert_eq!((e.length, e.weight), (0, 0));
            }
        }
    }

    #[test]
    fn singleton_group_costs_its_edge() {
        let mut inst = Instance::new(ProblemKind::Gst, 3, vec![Edge::new(0, 1, 1, 6), Edge::new(1, 2, 1, 2)], 0, 1);
        inst.groups = vec![vec![1]];
        let b = gst_to_lcmst(&inst).unwrap();
        assert_eq!(exact_gst(&inst).unwrap().weight, Some(6));
        assert_eq!(exact_lcmst(&b.target).unwrap().weight, Some(6));
    }

    #[test]
    fn gadget_round_trips() {
        let mut inst = Instance::new(ProblemKind::Gst, 4, vec![Edge::new(0, 1, 1, 3), Edge::new(1, 2, 1, 1), Edge::new(2, 3, 1, 2), Edge::new(0, 3, 1, 9)], 0, 2);
        inst.groups = vec![vec![2, 3], vec![1]];
        let b = gst_to_lcmst(&inst).unwrap();
        let text = b.target.serialize();
        assert_eq!(Instance::parse(&text).unwrap().serialize(), text);
    }

    #[test]
    fn normalization_splits_shared_vertices() {
        let mut inst = Instance::new(ProblemKind::Gst, 3, vec![Edge::new(0, 1, 1, 3), Edge::new(1, 2, 1, 1)], 0, 1);
        inst.groups = vec![vec![1, 2], vec![1]];
        assert!(inst.validate().is_err());
        let norm = normalize_groups(&inst);
        norm.validate().unwrap();
        assert_eq!(norm.n, 5);
        assert_eq!(exact_gst(&norm).unwrap().weight, Some(3));
    }

    fn arb_graph(nmax: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, u64, u64)>)> {
        (3usize..=nmax).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec((0..n, 0..n, 0u64..3, 0u64..6), n..2 * n)).prop_map(|(n, raw)| {
                let mut seen = std::collections::HashSet::new();
                let mut edges = Vec::new();
                for v in 1..n {
                    let u = raw[v % raw.len()].0 % v;
                    seen.insert((u, v));
                    edges.push((u, v, raw[v % raw.len()].2 + 1, raw[v % raw.len()].3));
                }
                for &(a, c, l, w) in &raw {
                    let k = (a.min(c), a.max(c));
                    if a != c && seen.insert(k) {
                        edges.push((k.0, k.1, l + 1, w));
                    }
                }
                (n, edges)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn lcst_to_lcmst_preserves_opt((n, e) in arb_graph(6), h in 1u64..5, tmask in 0u32..64) {
            let mut inst = Instance::new(ProblemKind::Lcst, n, e.iter().map(|&(u, v, l, w)| Edge::new(u, v, l, w)).collect(), 0, h);
            inst.terminals = (0..n).filter(|&v| tmask >> v & 1 == 1).collect();
            inst.canonicalize();
            let b = lcst_to_lcmst(&inst).unwrap();
            let src = exact_lcst(&inst).unwrap();
            let tgt = exact_lcmst(&b.target).unwrap();
            prop_assert_eq!(src.weight, tgt.weight);
            if tgt.weight.is_some() {
                let back = b.backward(&tgt.edges);
                prop_assert!(is_feasible(&inst, &back));
                prop_assert_eq!(Some(weight(&inst, &back)), src.weight);
                let fwd = b.forward(&src.edges).unwrap();
                prop_assert!(is_feasible(&b.target, &fwd));
                prop_assert_eq!(weight(&b.target, &fwd), weight(&inst, &src.edges));
            }
        }

        #[test]
        fn lcmst_to_dst_preserves_opt((n, e) in arb_graph(5), h in 1u64..4) {
            let mut inst = Instance::new(ProblemKind::Lcmst, n, e.iter().map(|&(u, v, l, w)| Edge::new(u, v, l - 1, w)).collect(), 0, h);
            inst.canonicalize();
            let b = lcmst_to_dst(&inst).unwrap();
            let src = exact_lcmst(&inst).unwrap();
            let tgt = exact_dst(&b.target).unwrap();
            prop_assert_eq!(src.weight, tgt.weight);
            if tgt.weight.is_some() {
                let back = b.backward(&tgt.edges);
                prop_assert!(is_feasible(&inst, &back));
                prop_assert_eq!(Some(weight(&inst, &back)), src.weight);
                let fwd = b.forward(&src.edges).unwrap();
                prop_assert!(is_feasible(&b.target, &fwd));
                prop_assert_eq!(weight(&b.target, &fwd), weight(&inst, &src.edges));
            }
        }

        #[test]
        fn dst_to_lcst_preserves_opt((n, e) in arb_graph(4), flip in 0u32..256, tmask in 1u32..16) {
            let arcs: Vec<Edge> = e.iter().enumerate().map(|(i, &(u, v, _, w))| if flip >> (i % 8) & 1 == 1 { Edge::new(v, u, 1, w) } else { Edge::new(u, v, 1, w) }).collect();
            let mut inst = Instance::new(ProblemKind::Dst, n, arcs, 0, 1);
            inst.terminals = (1..n).filter(|&v| tmask >> v & 1 == 1).take(2).collect();
            inst.canonicalize();
            let b = dst_to_lcst(&inst).unwrap();
            let src = exact_dst(&inst).unwrap();
            let tgt = exact_lcst(&b.target).unwrap();
            prop_assert_eq!(src.weight, tgt.weight);
            if tgt.weight.is_some() {
                let back = b.backward(&tgt.edges);
                prop_assert!(is_feasible(&inst, &back));
                prop_assert_eq!(Some(weight(&inst, &back)), src.weight);
                let fwd = b.forward(&src.edges).unwrap();
                prop_assert!(is_feasible(&b.target, &fwd));
                prop_assert_eq!(weight(&b.target, &fwd), weight(&inst, &src.edges));
            }
        }

        #[test]
        fn gst_to_lcmst_preserves_opt((n, e) in arb_graph(5), assign in proptest::collection::vec(0usize..3, 5), h in 1u64..4) {
            let mut inst = Instance::new(ProblemKind::Gst, n, e.iter().map(|&(u, v, l, w)| Edge::new(u, v, l, w)).collect(), 0, h);
            let mut groups = vec![Vec::new(); 2];
            for v in 1..n {
                if assign[v] < 2 {
                    groups[assign[v]].push(v);
                }
            }
            inst.groups = groups.into_iter().filter(|g| !g.is_empty()).collect();
            inst.canonicalize();
            let b = gst_to_lcmst(&inst).unwrap();
            let src = exact_gst(&inst).unwrap();
            let tgt = exact_lcmst(&b.target).unwrap();
            prop_assert_eq!(src.weight, tgt.weight);
            let back = b.backward(&tgt.edges);
            prop_assert!(is_feasible(&inst, &back));
            prop_assert_eq!(Some(weight(&inst, &back)), src.weight);
            let fwd = b.forward(&src.edges).unwrap();
            prop_assert!(is_feasible(&b.target, &fwd));
            prop_assert_eq!(weight(&b.target, &fwd), weight(&inst, &src.edges));
        }
    }
}
