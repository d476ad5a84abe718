use num_rational::Ratio;

use crate::division::{edge_components, vertex_set, Region};
use crate::graph::{Edge, Graph};
use crate::metrics::length_spt;

/// `l > H / (4β)` in exact arithmetic.
fn exceeds(l: u64, h_budget: u64, beta: Ratio<u64>) -> bool {
    4 * l as u128 * *beta.numer() as u128 > h_budget as u128 * *beta.denom() as u128
}

/// Splits one connected boundary component into vertex sets of diameter at most `h_budget / β`.
/// Pieces are sorted vertex lists, ordered by smallest vertex.
pub fn partition_boundary(g: &Graph, component: &[usize], h_budget: u64, beta: Ratio<u64>) -> Vec<Vec<usize>> {
    let verts = vertex_set(g, component);
    if verts.is_empty() {
        return Vec::new();
    }
    let idx = |v: usize| verts.binary_search(&v).unwrap();
    let local = Graph::new(
        verts.len(),
        component.iter().map(|&e| { let ed = g.edges[e]; Edge::new(idx(ed.u), idx(ed.v), ed.length, ed.weight) }).collect(),
    );
    let (_, tree) = length_spt(&local, 0);
    let n = verts.len();
    let mut children: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    let mut kept_parent = vec![false; n];
    for v in 0..n {
        if let Some(e) = tree.parent_edge[v] {
            let l = local.edges[e].length;
            if !exceeds(l, h_budget, beta) {
                children[tree.parent[v]].push((v, l));
                kept_parent[v] = true;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    for r in (0..n).filter(|&v| !kept_parent[v]) {
        order.push(r);
        let mut i = order.len() - 1;
        while i < order.len() {
            let x = order[i];
            for &(c, _) in &children[x] {
                order.push(c);
            }
            i += 1;
        }
    }
    let mut far = vec![0u64; n];
    let mut cut = vec![false; n];
    for &x in order.iter().rev() {
        let md = children[x].iter().filter(|&&(c, _)| !cut[c]).map(|&(c, l)| l + far[c]).max().unwrap_or(0);
        far[x] = md;
        if kept_parent[x] && exceeds(md, h_budget, beta) {
            cut[x] = true;
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    for &x in &order {
        if !kept_parent[x] || cut[x] {
            label[x] = pieces.len();
            pieces.push(Vec::new());
        } else {
            label[x] = label[tree.parent[x]];
        }
        pieces[label[x]].push(verts[x]);
    }
    for p in &mut pieces {
        p.sort_unstable();
    }
    pieces.sort();
    pieces
}

/// Pieces of every boundary component of a region, cut so each has diameter at most h/β.
pub fn region_pieces(g: &Graph, region: &Region, h: u64, beta: Ratio<u64>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for comp in edge_components(g, &region.boundary) {
        let budget = g.length_of(&comp).max(h);
        let beta_call = beta * Ratio::new(budget, h);
        out.extend(partition_boundary(g, &comp, budget, beta_call));
    }
    out.sort();
    out
}

/// All-pairs diameter of the subgraph induced by `piece` on the given edges (None if disconnected).
pub fn induced_diameter(g: &Graph, edges: &[usize], piece: &[usize]) -> Option<u64> {
    let idx = |v: usize| piece.binary_search(&v).ok();
    let sub: Vec<Edge> = edges
        .iter()
        .filter_map(|&e| {
            let ed = g.edges[e];
            Some(Edge::new(idx(ed.u)?, idx(ed.v)?, ed.length, ed.weight))
        })
        .collect();
    let local = Graph::new(piece.len(), sub);
    let mut best = 0;
    for s in 0..piece.len() {
        let (d, _) = length_spt(&local, s);
        for &x in &d {
            if x == u64::MAX {
                return None;
            }
            best = best.max(x);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(lengths: &[u64]) -> Graph {
        Graph::new(lengths.len() + 1, lengths.iter().enumerate().map(|(i, &l)| Edge::new(i, i + 1, l, 1)).collect())
    }

    #[test]
    fn single_vertex_and_short_path() {
        let g = path(&[1, 1]);
        assert_eq!(partition_boundary(&g, &[0, 1], 100, Ratio::from_integer(1)), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn long_path_cut_into_pieces() {
        let g = path(&[1; 16]);
        let ids: Vec<usize> = (0..16).collect();
        let beta = Ratio::from_integer(2);
        let pieces = partition_boundary(&g, &ids, 16, beta);
        assert!(pieces.len() <= 16);
        for p in &pieces {
            assert!(induced_diameter(&g, &ids, p).unwrap() * 2 <= 16);
        }
        let total: usize = pieces.iter().map(|p| p.len()).sum();
        assert_eq!(total, 17);
    }

    #[test]
    fn heavy_edges_isolate_vertices() {
        let g = path(&[10, 10, 10]);
        let ids: Vec<usize> = (0..3).collect();
        assert_eq!(partition_boundary(&g, &ids, 30, Ratio::from_integer(1)).len(), 4);
    }

    fn arb_tree() -> impl Strategy<Value = (Graph, Vec<usize>)> {
        (2usize..30).prop_flat_map(|n| {
            (proptest::collection::vec((any::<prop::sample::Index>(), 0u64..6), n - 1), proptest::collection::vec((0usize..n, 0usize..n, 0u64..6), 0..5))
                .prop_map(move |(par, extra)| {
                    let mut edges = Vec::new();
                    let mut seen = std::collections::HashSet::new();
                    for (i, (p, l)) in par.into_iter().enumerate() {
                        let v = i + 1;
                        let u = p.index(v);
                        seen.insert((u, v));
                        edges.push(Edge::new(u, v, l, 1));
                    }
                    for (a, b, l) in extra {
                        let (a, b) = (a.min(b), a.max(b));
                        if a != b && seen.insert((a, b)) {
                            edges.push(Edge::new(a, b, l, 1));
                        }
                    }
                    let ids = (0..edges.len()).collect();
                    (Graph::new(n, edges), ids)
                })
        })
    }

    proptest! {
        #[test]
        fn pieces_have_small_diameter((g, ids) in arb_tree(), b in 1u64..5) {
            let beta = Ratio::from_integer(b);
            let budget = g.length_of(&ids).max(1);
            let pieces = partition_boundary(&g, &ids, budget, beta);
            let mut all: Vec<usize> = pieces.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..g.n).collect::<Vec<_>>());
            prop_assert!((pieces.len() as u64) <= 8 * b);
            for p in &pieces {
                let d = induced_diameter(&g, &ids, p).unwrap();
                prop_assert!(d as u128 * b as u128 <= budget as u128);
            }
        }
    }
}
