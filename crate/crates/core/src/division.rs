use std::collections::{BTreeSet, VecDeque};

use num_rational::Ratio;
use serde::Serialize;

use crate::embedding::PlanarEmbedding;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::metrics::{lc_diameter, length_spt};
use crate::separator::{lc_separator_with, Separator};

/// Edge-induced region with its boundary; both are sorted global edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub edges: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl Region {
    pub fn whole(g: &Graph) -> Region {
        Region { edges: (0..g.m()).collect(), boundary: Vec::new() }
    }

    pub fn vertices(&self, g: &Graph) -> Vec<usize> {
        vertex_set(g, &self.edges)
    }

    pub fn boundary_vertices(&self, g: &Graph) -> Vec<usize> {
        vertex_set(g, &self.boundary)
    }

    pub fn nonboundary_vertices(&self, g: &Graph) -> Vec<usize> {
        let b = self.boundary_vertices(g);
        self.vertices(g).into_iter().filter(|v| b.binary_search(v).is_err()).collect()
    }

    pub fn nonboundary_weight(&self, g: &Graph, weights: &[u64]) -> u64 {
        self.nonboundary_vertices(g).iter().map(|&v| weights[v]).sum()
    }

    pub fn boundary_length(&self, g: &Graph) -> u64 {
        g.length_of(&self.boundary)
    }

    pub fn boundary_weight(&self, g: &Graph) -> u64 {
        g.weight_of(&self.boundary)
    }

    /// Connected components of the boundary as sorted edge lists, ordered by smallest vertex.
    pub fn boundary_components(&self, g: &Graph) -> Vec<Vec<usize>> {
        edge_components(g, &self.boundary)
    }

    /// Vertices of the region incident to an edge outside it.
    pub fn topological_boundary(&self, g: &Graph) -> Vec<usize> {
        let inside: BTreeSet<usize> = self.edges.iter().copied().collect();
        self.vertices(g).into_iter().filter(|&v| g.adj(v).iter().any(|&(_, e)| !inside.contains(&e))).collect()
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

pub fn vertex_set(g: &Graph, ids: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = ids.iter().flat_map(|&e| [g.edges[e].u, g.edges[e].v]).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn edge_components(g: &Graph, ids: &[usize]) -> Vec<Vec<usize>> {
    let verts = vertex_set(g, ids);
    let idx = |v: usize| verts.binary_search(&v).unwrap();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &e in ids {
        let (a, b) = (find(&mut parent, idx(g.edges[e].u)), find(&mut parent, idx(g.edges[e].v)));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; verts.len()];
    for i in 0..verts.len() {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
    }
    for &e in ids {
        let r = find(&mut parent, idx(g.edges[e].u));
        comps[slot[r]].push(e);
    }
    for c in &mut comps {
        c.sort_unstable();
    }
    comps
}

/// Region relabelled to local ids, with boundary edges flattened to length and weight 0.
#[derive(Clone, Debug)]
pub struct LocalGraph {
    pub graph: Graph,
    pub global_vertex: Vec<usize>,
    pub global_edge: Vec<usize>,
    pub local_of: Vec<usize>,
}

impl LocalGraph {
    pub fn local(&self, v: usize) -> Option<usize> {
        let l = self.local_of[v];
        (l != usize::MAX).then_some(l)
    }
}

pub fn flatten(g: &Graph, region: &Region) -> LocalGraph {
    let global_vertex = region.vertices(g);
    let mut local_of = vec![usize::MAX; g.n];
    for (i, &v) in global_vertex.iter().enumerate() {
        local_of[v] = i;
    }
    let edges = region
        .edges
        .iter()
        .map(|&e| {
            let ed = g.edges[e];
            let flat = region.boundary.binary_search(&e).is_ok();
            Edge::new(local_of[ed.u], local_of[ed.v], if flat { 0 } else { ed.length }, if flat { 0 } else { ed.weight })
        })
        .collect();
    LocalGraph { graph: Graph::new(global_vertex.len(), edges), global_vertex, global_edge: region.edges.clone(), local_of }
}

/// Shared inputs for divisions over one instance graph.
pub struct DivisionContext<'a> {
    pub g: &'a Graph,
    pub emb: &'a PlanarEmbedding,
    pub weights: &'a [u64],
    pub root: usize,
}

/// Smallest k with (3/2)^k ≥ α.
pub fn rounds_for(alpha: Ratio<u64>) -> u32 {
    let (num, den) = (*alpha.numer() as u128, *alpha.denom() as u128);
    let mut k = 0u32;
    let (mut p3, mut p2) = (1u128, 1u128);
    while p3 * den < p2 * num {
        k += 1;
        p3 *= 3;
        p2 *= 2;
    }
    k
}

#[derive(Clone, Debug, Serialize)]
pub struct Division {
    pub children: Vec<Region>,
    pub separators: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Regime {
    Weight,
    Components,
    Potential,
}

const REGIMES: [Regime; 3] = [Regime::Weight, Regime::Components, Regime::Potential];

impl<'a> DivisionContext<'a> {
    fn regime_weights(&self, region: &Region, local: &LocalGraph, regime: Regime) -> Vec<u64> {
        let n = local.global_vertex.len();
        let mut w = vec![0u64; n];
        match regime {
            Regime::Weight => {
                let b = region.boundary_vertices(self.g);
                for (i, &v) in local.global_vertex.iter().enumerate() {
                    if b.binary_search(&v).is_err() {
                        w[i] = self.weights[v];
                    }
                }
            }
            Regime::Components => {
                for comp in region.boundary_components(self.g) {
                    let rep = vertex_set(self.g, &comp)[0];
                    w[local.local_of[rep]] = 1;
                }
            }
            Regime::Potential => {
                for &e in &region.boundary {
                    let ed = &self.g.edges[e];
                    w[local.local_of[ed.u]] += ed.length;
                    w[local.local_of[ed.v]] += ed.length;
                }
            }
        }
        w
    }

    /// Separator of the flattened region under the given local vertex weights.
    pub fn separate(&self, region: &Region, local: &LocalGraph, weights: &[u64], h: u64) -> Result<Separator> {
        let emb = self.emb.restrict(local.global_vertex.len(), &local.local_of, &local.global_edge);
        let d = lc_diameter(&local.graph, h).ok_or(Error::InfiniteDiameter)?;
        let root = local.local(self.root).unwrap_or(0);
        let _ = region;
        lc_separator_with(&local.graph, &emb, weights, h, root, d)
    }

    /// Splits a region along a separator into the (inside, outside) children; children made only of P are omitted.
    pub fn split(&self, region: &Region, local: &LocalGraph, sep: &Separator) -> Vec<Region> {
        let p: Vec<usize> = {
            let mut p: Vec<usize> = sep.path.iter().map(|&e| local.global_edge[e]).collect();
            p.sort_unstable();
            p
        };
        let mut sides: [Vec<usize>; 2] = [p.clone(), p.clone()];
        for (le, &e) in local.global_edge.iter().enumerate() {
            if p.binary_search(&e).is_ok() {
                continue;
            }
            let s = if sep.edge_inside(&local.graph, le) { 0 } else { 1 };
            sides[s].push(e);
        }
        let mut out = Vec::new();
        for mut edges in sides {
            if edges.len() == p.len() {
                continue;
            }
            edges.sort_unstable();
            let mut boundary = p.clone();
            boundary.extend(region.boundary.iter().copied().filter(|e| edges.binary_search(e).is_ok()));
            boundary.sort_unstable();
            boundary.dedup();
            out.push(Region { edges, boundary });
        }
        if out.is_empty() {
            out.push(Region { edges: p.clone(), boundary: p });
        }
        out
    }

    pub fn lc_division(&self, region: &Region, alpha: Ratio<u64>, h: u64) -> Result<Division> {
        let levels = 3 * rounds_for(alpha) as usize;
        let mut children = Vec::new();
        let mut separators = 0;
        self.divide(region.clone(), 0, 0, levels, h, &mut children, &mut separators)?;
        Ok(Division { children, separators })
    }

    #[allow(clippy::too_many_arguments)]
    fn divide(&self, region: Region, level: usize, regime: usize, levels: usize, h: u64, out: &mut Vec<Region>, count: &mut usize) -> Result<()> {
        if level == levels || region.nonboundary_weight(self.g, self.weights) == 0 {
            out.push(region);
            return Ok(());
        }
        let local = flatten(self.g, &region);
        let mut chosen = None;
        for k in 0..3 {
            let r = (regime + k) % 3;
            let w = self.regime_weights(&region, &local, REGIMES[r]);
            if w.iter().any(|&x| x > 0) {
                chosen = Some((r, w));
                break;
            }
        }
        let (r, w) = chosen.expect("weight regime is positive");
        let sep = self.separate(&region, &local, &w, h)?;
        *count += 1;
        for child in self.split(&region, &local, &sep) {
            self.divide(child, level + 1, (r + 1) % 3, levels, h, out, count)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyNode {
    pub region: Region,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hierarchy {
    pub nodes: Vec<HierarchyNode>,
    pub h_budget: u64,
    pub height: usize,
    pub separators: usize,
}

impl Hierarchy {
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    /// JSON dump with per-node stats.
    pub fn dump(&self, g: &Graph) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                serde_json::json!({
                    "id": i,
                    "parent": n.parent,
                    "children": n.children,
                    "edges": n.region.edges,
                    "boundary": n.region.boundary,
                    "boundary_length": n.region.boundary_length(g),
                    "boundary_weight": n.region.boundary_weight(g),
                    "boundary_components": n.region.boundary_components(g).len(),
                })
            })
            .collect();
        serde_json::json!({ "h_budget": self.h_budget, "height": self.height, "nodes": nodes })
    }
}

/// Division hierarchy with 2h-length divisions, stopping when no non-boundary vertex has positive weight.
pub fn build_hierarchy(ctx: &DivisionContext, alpha: Ratio<u64>, h: u64) -> Result<Hierarchy> {
    let (dist, _) = length_spt(ctx.g, ctx.root);
    if dist.iter().any(|&d| d > h) {
        return Err(Error::Infeasible);
    }
    let h_budget = 2 * h;
    let mut nodes = vec![HierarchyNode { region: Region::whole(ctx.g), parent: None, children: vec![], depth: 0 }];
    let mut queue = VecDeque::from([0usize]);
    let mut separators = 0;
    while let Some(i) = queue.pop_front() {
        let region = nodes[i].region.clone();
        if region.nonboundary_weight(ctx.g, ctx.weights) == 0 {
            continue;
        }
        let div = ctx.lc_division(&region, alpha, h_budget)?;
        separators += div.separators;
        for child in div.children {
            let id = nodes.len();
            nodes.push(HierarchyNode { region: child, parent: Some(i), children: vec![], depth: nodes[i].depth + 1 });
            nodes[i].children.push(id);
            queue.push_back(id);
        }
    }
    let height = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    Ok(Hierarchy { nodes, h_budget, height, separators })
}

/// E(T) ∩ (E(H) \ E(L_H)) and its weight.
pub fn restriction(g: &Graph, tree_edges: &[usize], region: &Region) -> (Vec<usize>, u64) {
    let ids: Vec<usize> = tree_edges
        .iter()
        .copied()
        .filter(|&e| region.contains_edge(e) && region.boundary.binary_search(&e).is_err())
        .collect();
    let w = g.weight_of(&ids);
    (ids, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_planar;
    use crate::generate::{generate, Family, GenConfig};
    use crate::graph::Instance;

    fn setup(inst: &Instance) -> (Graph, PlanarEmbedding) {
        (inst.graph(), embed_planar(inst).unwrap())
    }

    #[test]
    fn rounds() {
        assert_eq!(rounds_for(Ratio::new(3, 2)), 1);
        assert_eq!(rounds_for(Ratio::new(2, 1)), 2);
        assert_eq!(rounds_for(Ratio::new(1, 1)), 0);
        assert_eq!(rounds_for(Ratio::new(9, 4)), 2);
        assert_eq!(rounds_for(Ratio::new(10, 4)), 3);
    }

    #[test]
    fn flatten_cases() {
        let inst = generate(&GenConfig::new(Family::Grid { rows: 3, cols: 3 }, 1));
        let g = inst.graph();
        let whole = flatten(&g, &Region::whole(&g));
        assert_eq!(whole.graph.edges, g.edges);
        let all = Region { edges: (0..g.m()).collect(), boundary: (0..g.m()).collect() };
        assert!(flatten(&g, &all).graph.edges.iter().all(|e| e.length == 0 && e.weight == 0));
    }

    #[test]
    fn single_edge_hierarchy() {
        let inst = Instance::parse("p lcmst 2 1 5 0\ne 0 1 3 7\n").unwrap();
        let (g, emb) = setup(&inst);
        let w = vec![1; 2];
        let ctx = DivisionContext { g: &g, emb: &emb, weights: &w, root: 0 };
        let hier = build_hierarchy(&ctx, Ratio::from_integer(2), inst.h).unwrap();
        assert_eq!(hier.height, 1);
        assert_eq!(hier.nodes[1].region.boundary, vec![0]);
    }

    #[test]
    fn grid_division_one_round() {
        let inst = generate(&GenConfig::new(Family::Grid { rows: 5, cols: 5 }, 2));
        let (g, emb) = setup(&inst);
        let w = vec![1; g.n];
        let ctx = DivisionContext { g: &g, emb: &emb, weights: &w, root: 0 };
        let root = Region::whole(&g);
        let div = ctx.lc_division(&root, Ratio::new(3, 2), 2 * inst.h).unwrap();
        for c in &div.children {
            assert!(3 * c.nonboundary_weight(&g, &w) <= 2 * 25);
        }
    }

    #[test]
    fn hierarchy_invariants_on_small_corpus() {
        for seed in 0..12 {
            let fam = if seed % 2 == 0 { Family::TriangulatedRandom { n: 30 } } else { Family::Grid { rows: 5, cols: 6 } };
            let mut cfg = GenConfig::new(fam, seed);
            cfg.density = 0.7;
            let inst = generate(&cfg);
            let (g, emb) = setup(&inst);
            let w = vec![1; g.n];
            let ctx = DivisionContext { g: &g, emb: &emb, weights: &w, root: 0 };
            let alpha = Ratio::from_integer(2);
            let hier = build_hierarchy(&ctx, alpha, inst.h).unwrap();
            let dg = lc_diameter(&g, hier.h_budget).unwrap();
            let mut covered = vec![false; g.m()];
            for (i, node) in hier.nodes.iter().enumerate() {
                let r = &node.region;
                let tb = r.topological_boundary(&g);
                let bv = r.boundary_vertices(&g);
                assert!(tb.iter().all(|v| bv.binary_search(v).is_ok()), "boundary covers topological boundary");
                let local = flatten(&g, r);
                assert!(lc_diameter(&local.graph, hier.h_budget).unwrap() <= dg);
                if node.children.is_empty() {
                    assert_eq!(r.nonboundary_weight(&g, &w), 0);
                    for &e in &r.edges {
                        covered[e] = true;
                    }
                    continue;
                }
                let parent_w = r.nonboundary_weight(&g, &w);
                let mut seen = std::collections::HashMap::new();
                for &c in &node.children {
                    let cr = &hier.nodes[c].region;
                    assert!(2 * cr.nonboundary_weight(&g, &w) <= parent_w, "seed {seed} node {i}: {} of {parent_w}", cr.nonboundary_weight(&g, &w));
                    for &e in &cr.edges {
                        assert!(r.contains_edge(e));
                        if cr.boundary.binary_search(&e).is_err() {
                            *seen.entry(e).or_insert(0) += 1;
                        }
                    }
                }
                assert!(seen.values().all(|&k| k == 1));
                let union: BTreeSet<usize> = node.children.iter().flat_map(|&c| hier.nodes[c].region.edges.clone()).collect();
                assert_eq!(union.into_iter().collect::<Vec<_>>(), r.edges);
            }
            assert!(covered.iter().all(|&c| c));
        }
    }
}
