use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::embedding::RootedTree;
use crate::error::{Error, Result};
use crate::graph::{Graph, INF};

/// `dist[b][v]`: minimum weight of a path source -> v of length at most b.
#[derive(Clone, Debug)]
pub struct LcDistanceTable {
    pub source: usize,
    pub h: u64,
    n: usize,
    dist: Vec<u64>,
}

impl LcDistanceTable {
    pub fn compute(g: &Graph, source: usize, h: u64) -> Self {
        let mut dist = Vec::new();
        fill_budget_table(g, source, h, &mut dist);
        LcDistanceTable { source, h, n: g.n, dist }
    }

    pub fn get(&self, v: usize, b: u64) -> u64 {
        self.dist[b.min(self.h) as usize * self.n + v]
    }

    pub fn row(&self, b: u64) -> &[u64] {
        let b = b.min(self.h) as usize;
        &self.dist[b * self.n..(b + 1) * self.n]
    }
}

fn fill_budget_table(g: &Graph, source: usize, h: u64, dist: &mut Vec<u64>) {
    let n = g.n;
    let hh = h as usize;
    dist.clear();
    dist.resize((hh + 1) * n, INF);
    let mut zero_adj: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut pos_edges = Vec::new();
    for e in &g.edges {
        if e.length == 0 {
            if zero_adj.is_empty() {
                zero_adj = vec![Vec::new(); n];
            }
            zero_adj[e.u].push((e.v, e.weight));
            zero_adj[e.v].push((e.u, e.weight));
        } else if e.length <= h {
            pos_edges.push((e.u, e.v, e.length as usize, e.weight));
        }
    }
    let mut heap = BinaryHeap::new();
    for b in 0..=hh {
        let row = b * n;
        if b == 0 {
            dist[source] = 0;
        } else {
            dist.copy_within(row - n..row, row);
        }
        for &(u, v, l, w) in &pos_edges {
            if l > b {
                continue;
            }
            let prev = (b - l) * n;
            let du = dist[prev + u];
            if du != INF && du + w < dist[row + v] {
                dist[row + v] = du + w;
            }
            let dv = dist[prev + v];
            if dv != INF && dv + w < dist[row + u] {
                dist[row + u] = dv + w;
            }
        }
        if !zero_adj.is_empty() {
            for v in 0..n {
                if dist[row + v] != INF && !zero_adj[v].is_empty() {
                    heap.push(Reverse((dist[row + v], v)));
                }
            }
            while let Some(Reverse((d, x))) = heap.pop() {
                if d > dist[row + x] {
                    continue;
                }
                for &(y, w) in &zero_adj[x] {
                    if d + w < dist[row + y] {
                        dist[row + y] = d + w;
                        heap.push(Reverse((d + w, y)));
                    }
                }
            }
        }
    }
}

/// `d^(h)(source, v)` for every v.
pub fn lc_distances(g: &Graph, source: usize, h: u64) -> Vec<u64> {
    LcDistanceTable::compute(g, source, h).row(h).to_vec()
}

pub fn lc_distance(g: &Graph, u: usize, v: usize, h: u64) -> u64 {
    LcDistanceTable::compute(g, u, h).get(v, h)
}

/// `D^(h)` over all ordered pairs; None when some pair has no h-length path.
pub fn lc_diameter(g: &Graph, h: u64) -> Option<u64> {
    let mut buf = Vec::new();
    let mut best = 0;
    let last = h as usize * g.n;
    for s in 0..g.n {
        fill_budget_table(g, s, h, &mut buf);
        for &d in &buf[last..last + g.n] {
            if d == INF {
                return None;
            }
            best = best.max(d);
        }
    }
    Some(best)
}

/// Mixture edge weight `D * l + h * w`, scaled by `h * D` relative to the normalized form.
pub fn mixture_weight(length: u64, weight: u64, diameter: u64, h: u64) -> u128 {
    diameter as u128 * length as u128 + h as u128 * weight as u128
}

#[derive(Clone, Debug)]
pub struct MixtureTree {
    pub tree: RootedTree,
    pub diameter: u64,
    pub h: u64,
    pub mix: Vec<u128>,
    pub length: Vec<u64>,
    pub weight: Vec<u64>,
}

pub fn mixture_sp_tree(g: &Graph, h: u64, root: usize) -> Result<MixtureTree> {
    let d = lc_diameter(g, h).ok_or(Error::InfiniteDiameter)?;
    Ok(mixture_sp_tree_with(g, h, root, d))
}

/// Dijkstra under the mixture weight; ties by (length, hops, smaller parent id).
pub fn mixture_sp_tree_with(g: &Graph, h: u64, root: usize, diameter: u64) -> MixtureTree {
    let n = g.n;
    let mut key = vec![(u128::MAX, u64::MAX, u32::MAX); n];
    let mut weight = vec![INF; n];
    let mut parent_edge = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    key[root] = (0, 0, 0);
    weight[root] = 0;
    heap.push(Reverse((key[root], root)));
    while let Some(Reverse((k, x))) = heap.pop() {
        if done[x] || k != key[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in g.adj(x) {
            if done[y] {
                continue;
            }
            let ed = &g.edges[e];
            let cand = (k.0 + mixture_weight(ed.length, ed.weight, diameter, h), k.1 + ed.length, k.2 + 1);
            if cand < key[y] || (cand == key[y] && x < parent[y]) {
                key[y] = cand;
                weight[y] = weight[x] + ed.weight;
                parent_edge[y] = Some(e);
                parent[y] = x;
                heap.push(Reverse((cand, y)));
            }
        }
    }
    let depth = tree_depths(root, &parent, &parent_edge);
    MixtureTree {
        tree: RootedTree { root, parent_edge, parent, depth },
        diameter,
        h,
        mix: key.iter().map(|k| k.0).collect(),
        length: key.iter().map(|k| k.1).collect(),
        weight,
    }
}

fn tree_depths(root: usize, parent: &[usize], parent_edge: &[Option<usize>]) -> Vec<usize> {
    let n = parent.len();
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    for v in 0..n {
        if parent_edge[v].is_none() {
            continue;
        }
        let mut chain = Vec::new();
        let mut x = v;
        while depth[x] == usize::MAX {
            chain.push(x);
            x = parent[x];
        }
        let mut d = depth[x];
        while let Some(y) = chain.pop() {
            d += 1;
            depth[y] = d;
        }
    }
    depth
}

/// Shortest-path tree by length from `root`; ties prefer the smaller parent id.
pub fn length_spt(g: &Graph, root: usize) -> (Vec<u64>, RootedTree) {
    let n = g.n;
    let mut dist = vec![INF; n];
    let mut parent_edge = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0;
    heap.push(Reverse((0u64, root)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if done[x] || d != dist[x] {
            continue;
        }
        done[x] = true;
        for &(y, e) in g.adj(x) {
            if done[y] {
                continue;
            }
            let cand = d + g.edges[e].length;
            if cand < dist[y] || (cand == dist[y] && x < parent[y]) {
                dist[y] = cand;
                parent_edge[y] = Some(e);
                parent[y] = x;
                heap.push(Reverse((cand, y)));
            }
        }
    }
    let depth = tree_depths(root, &parent, &parent_edge);
    (dist, RootedTree { root, parent_edge, parent, depth })
}

/// Multi-source Dijkstra by length with initial offsets.
pub fn length_distances(g: &Graph, sources: &[(usize, u64)]) -> Vec<u64> {
    let mut dist = vec![INF; g.n];
    let mut heap = BinaryHeap::new();
    for &(s, o) in sources {
        if o < dist[s] {
            dist[s] = o;
            heap.push(Reverse((o, s)));
        }
    }
    while let Some(Reverse((d, x))) = heap.pop() {
        if d != dist[x] {
            continue;
        }
        for &(y, e) in g.adj(x) {
            let c = d + g.edges[e].length;
            if c < dist[y] {
                dist[y] = c;
                heap.push(Reverse((c, y)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::new(3, vec![Edge::new(0, 1, 1, 5), Edge::new(1, 2, 1, 5)])
    }

    #[test]
    fn path_budgets() {
        let g = path3();
        let t = LcDistanceTable::compute(&g, 0, 2);
        assert_eq!(t.get(2, 1), INF);
        assert_eq!(t.get(2, 2), 10);
        assert_eq!(t.get(0, 0), 0);
    }

    #[test]
    fn shortcut_triangle() {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1, 5), Edge::new(1, 2, 1, 5), Edge::new(0, 2, 3, 1)]);
        let t = LcDistanceTable::compute(&g, 0, 3);
        assert_eq!(t.get(2, 2), 10);
        assert_eq!(t.get(2, 3), 1);
    }

    #[test]
    fn diameter_cases() {
        let g = path3();
        assert_eq!(lc_diameter(&g, 2), Some(10));
        assert_eq!(lc_diameter(&g, 1), None);
        let zero = Graph::new(3, vec![Edge::new(0, 1, 0, 0), Edge::new(1, 2, 0, 0)]);
        assert_eq!(lc_diameter(&zero, 1), Some(0));
    }

    #[test]
    fn mixture_tree_on_path() {
        let g = path3();
        let t = mixture_sp_tree(&g, 2, 0).unwrap();
        assert_eq!(t.diameter, 10);
        assert_eq!(t.tree.parent_edge, vec![None, Some(0), Some(1)]);
        assert_eq!(t.length[2], 2);
        assert_eq!(t.weight[2], 10);
        assert!(mixture_sp_tree(&g, 1, 0).is_err());
    }

    /// Reference: enumerate all simple paths.
    fn brute_lc(g: &Graph, s: usize, t: usize, h: u64) -> u64 {
        fn go(g: &Graph, x: usize, t: usize, len: u64, w: u64, h: u64, seen: &mut Vec<bool>, best: &mut u64) {
            if x == t {
                *best = (*best).min(w);
                return;
            }
            for &(y, e) in g.adj(x) {
                let ed = &g.edges[e];
                if !seen[y] && len + ed.length <= h {
                    seen[y] = true;
                    go(g, y, t, len + ed.length, w + ed.weight, h, seen, best);
                    seen[y] = false;
                }
            }
        }
        let mut seen = vec![false; g.n];
        seen[s] = true;
        let mut best = INF;
        go(g, s, t, 0, 0, h, &mut seen, &mut best);
        best
    }

    fn arb_graph() -> impl Strategy<Value = (Graph, u64)> {
        (3usize..8).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let k = pairs.len();
            (proptest::collection::vec((any::<bool>(), 0u64..4, 0u64..6), k), 1u64..8).prop_map(move |(sel, h)| {
                let mut edges = Vec::new();
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    if sel[i].0 || b == a + 1 {
                        edges.push(Edge::new(a, b, sel[i].1, sel[i].2));
                    }
                }
                (Graph::new(n, edges), h)
            })
        })
    }

    proptest! {
        #[test]
        fn budget_dp_matches_enumeration((g, h) in arb_graph()) {
            let t = LcDistanceTable::compute(&g, 0, h);
            for v in 0..g.n {
                for b in 0..=h {
                    prop_assert_eq!(t.get(v, b), brute_lc(&g, 0, v, b));
                    if b > 0 {
                        prop_assert!(t.get(v, b) <= t.get(v, b - 1));
                    }
                }
            }
        }

        #[test]
        fn mixture_paths_are_short_and_light((g, h) in arb_graph()) {
            if let Ok(t) = mixture_sp_tree(&g, h, 0) {
                for v in 0..g.n {
                    let path = t.tree.root_path(v);
                    let l: u64 = path.iter().map(|&e| g.edges[e].length).sum();
                    let w: u64 = path.iter().map(|&e| g.edges[e].weight).sum();
                    prop_assert!(l <= 2 * h);
                    prop_assert!(w <= 2 * t.diameter);
                }
            }
        }
    }
}
