use serde::Serialize;

use crate::embedding::{classify_with_faces, fundamental_cycle, CyclePartition, PlanarEmbedding, RootedTree};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{lc_diameter, mixture_sp_tree_with};

/// Balanced fundamental cycle found in a triangulated embedding.
#[derive(Clone, Debug)]
pub struct CycleSeparator {
    pub closing_edge: usize,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
    pub partition: CyclePartition,
}

/// First non-tree edge (by id) whose fundamental cycle leaves at most 2/3 of the weight on each side.
pub fn cycle_separator(tri: &PlanarEmbedding, weights: &[u64], tree: &RootedTree) -> Result<CycleSeparator> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    let mut is_tree = vec![false; tri.m()];
    for e in tree.parent_edge.iter().flatten() {
        is_tree[*e] = true;
    }
    let (faces, face_of) = tri.faces();
    for e in 0..tri.m() {
        if is_tree[e] {
            continue;
        }
        let (p1, p2) = fundamental_cycle(tree, &tri.ends, e)?;
        let mut cycle: Vec<usize> = p1.iter().chain(p2.iter()).copied().collect();
        cycle.push(e);
        let part = classify_with_faces(tri, &faces, face_of.clone(), &cycle)?;
        let side = |vs: &[usize]| vs.iter().map(|&v| weights[v] as u128).sum::<u128>();
        if 3 * side(&part.inside) <= 2 * total && 3 * side(&part.outside) <= 2 * total {
            return Ok(CycleSeparator { closing_edge: e, p1, p2, partition: part });
        }
    }
    Err(Error::NoBalancedCycle)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatorStats {
    pub length: u64,
    pub weight: u64,
    pub diameter: u64,
    pub h: u64,
}

/// Length-constrained separator: `path` holds the real edges of P1 ∪ P2.
#[derive(Clone, Debug)]
pub struct Separator {
    pub path: Vec<usize>,
    /// Endpoints of the closing edge and whether it is synthetic.
    pub closing: (usize, usize),
    pub closing_real: Option<usize>,
    pub partition: CyclePartition,
    pub tree: RootedTree,
    pub stats: SeparatorStats,
}

impl Separator {
    /// Side of a graph edge not on P: true for inside. Chords are classified by their faces.
    pub fn edge_inside(&self, g: &Graph, e: usize) -> bool {
        let part = &self.partition;
        let ed = &g.edges[e];
        for x in [ed.u, ed.v] {
            if part.inside.binary_search(&x).is_ok() {
                return true;
            }
            if part.outside.binary_search(&x).is_ok() {
                return false;
            }
        }
        if Some(e) == self.closing_real {
            return true;
        }
        part.edge_inside(e)
    }
}

/// Separator whose path has length at most 4h and weight at most 4 D^(h).
/// `emb` must embed `g` with matching edge ids.
pub fn lc_separator(g: &Graph, emb: &PlanarEmbedding, weights: &[u64], h: u64, root: usize) -> Result<Separator> {
    let d = lc_diameter(g, h).ok_or(Error::InfiniteDiameter)?;
    lc_separator_with(g, emb, weights, h, root, d)
}

pub fn lc_separator_with(g: &Graph, emb: &PlanarEmbedding, weights: &[u64], h: u64, root: usize, diameter: u64) -> Result<Separator> {
    debug_assert_eq!(emb.real_edges, g.m());
    let mix = mixture_sp_tree_with(g, h, root, diameter);
    if g.n <= 2 {
        let path: Vec<usize> = (0..g.m()).collect();
        let stats = SeparatorStats { length: g.length_of(&path), weight: g.weight_of(&path), diameter, h };
        let partition = CyclePartition {
            cycle_vertices: (0..g.n).collect(),
            inside: vec![],
            outside: vec![],
            face_outside: vec![],
            face_of: vec![],
        };
        let closing = if g.m() > 0 { (g.edges[0].u, g.edges[0].v) } else { (root, root) };
        return Ok(Separator { path, closing, closing_real: None, partition, tree: mix.tree, stats });
    }
    let tri = emb.triangulate();
    let cs = cycle_separator(&tri, weights, &mix.tree)?;
    let mut path: Vec<usize> = cs.p1.iter().chain(cs.p2.iter()).copied().collect();
    path.sort_unstable();
    let closing = tri.ends[cs.closing_edge];
    let closing_real = (!tri.is_synthetic(cs.closing_edge)).then_some(cs.closing_edge);
    let stats = SeparatorStats { length: g.length_of(&path), weight: g.weight_of(&path), diameter, h };
    Ok(Separator { path, closing, closing_real, partition: cs.partition, tree: mix.tree, stats })
}
