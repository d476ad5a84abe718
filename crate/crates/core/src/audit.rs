use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::division::{build_hierarchy, flatten, restriction, DivisionContext, Hierarchy};
use crate::embedding::PlanarEmbedding;
use crate::error::Result;
use crate::graph::Graph;
use crate::metrics::{lc_diameter, mixture_sp_tree};
use crate::pieces::{induced_diameter, region_pieces};
use crate::separator::lc_separator;

/// Number of checks performed and a description of every failed one.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Audit {
    pub checks: u64,
    pub violations: Vec<String>,
}

impl Audit {
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(msg());
        }
    }

    pub fn merge(&mut self, other: Audit) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Balance, length, weight and separation of one `lc_separator` call.
pub fn audit_separator(g: &Graph, emb: &PlanarEmbedding, weights: &[u64], h: u64, root: usize) -> Result<Audit> {
    let s = lc_separator(g, emb, weights, h, root)?;
    let mut a = Audit::default();
    let total: u64 = weights.iter().sum();
    for (name, side) in [("inside", &s.partition.inside), ("outside", &s.partition.outside)] {
        let w: u64 = side.iter().map(|&v| weights[v]).sum();
        a.check(3 * w <= 2 * total, || format!("{name} side weight {w} of {total}"));
    }
    a.check(s.stats.length <= 4 * h, || format!("separator length {} > 4h = {}", s.stats.length, 4 * h));
    a.check(s.stats.weight <= 4 * s.stats.diameter, || format!("separator weight {} > 4D = {}", s.stats.weight, 4 * s.stats.diameter));
    let mut side = vec![0u8; g.n];
    for &v in &s.partition.inside {
        side[v] = 1;
    }
    for &v in &s.partition.outside {
        side[v] = 2;
    }
    let crossing = g.edges.iter().filter(|e| side[e.u] | side[e.v] == 3).count();
    a.check(crossing == 0, || format!("{crossing} edges join inside and outside"));
    Ok(a)
}

/// Every root-leaf path of the mixture tree has length ≤ 2h and weight ≤ 2·D^(h).
pub fn audit_mixture(g: &Graph, h: u64, root: usize) -> Result<Audit> {
    let m = mixture_sp_tree(g, h, root)?;
    let mut a = Audit::default();
    let mut is_parent = vec![false; g.n];
    for v in 0..g.n {
        if m.tree.parent_edge[v].is_some() {
            is_parent[m.tree.parent[v]] = true;
        }
    }
    for v in (0..g.n).filter(|&v| !is_parent[v]) {
        a.check(m.length[v] <= 2 * h, || format!("leaf {v}: length {} > 2h", m.length[v]));
        a.check(m.weight[v] <= 2 * m.diameter, || format!("leaf {v}: weight {} > 2D = {}", m.weight[v], 2 * m.diameter));
    }
    Ok(a)
}

/// `⌈log_α n⌉` for α > 1.
pub fn log_ceil(alpha: Ratio<u64>, n: usize) -> usize {
    let (p, q) = (*alpha.numer() as u128, *alpha.denom() as u128);
    let mut k = 0;
    let (mut num, mut den) = (1u128, 1u128);
    while num < n as u128 * den {
        num *= p;
        den *= q;
        k += 1;
        if num > 1 << 100 {
            num >>= 50;
            den >>= 50;
        }
    }
    k
}

/// Hierarchy checks: completeness, child weight, boundary length and components, depth, and flattening
/// monotonicity of `D^(2h)`.
pub fn audit_hierarchy(g: &Graph, emb: &PlanarEmbedding, alpha: Ratio<u64>, h: u64, root: usize) -> Result<(Hierarchy, Audit)> {
    let weights = vec![1u64; g.n];
    let ctx = DivisionContext { g, emb, weights: &weights, root };
    let hier = build_hierarchy(&ctx, alpha, h)?;
    let mut a = Audit::default();
    let hb = hier.h_budget;
    let dg = lc_diameter(g, hb);
    for (i, node) in hier.nodes.iter().enumerate() {
        let r = &node.region;
        let bl = r.boundary_length(g);
        a.check(bl <= 36 * hb, || format!("node {i}: boundary length {bl} > 36·{hb}"));
        let comps = r.boundary_components(g).len();
        a.check(comps <= 6, || format!("node {i}: {comps} boundary components"));
        let local = flatten(g, r);
        let d0 = lc_diameter(&local.graph, hb);
        a.check(d0 <= dg && d0.is_some(), || format!("node {i}: D(H0) = {d0:?} exceeds D(G) = {dg:?}"));
        if node.children.is_empty() {
            continue;
        }
        let pw = r.nonboundary_weight(g, &weights);
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for &c in &node.children {
            let cr = &hier.nodes[c].region;
            let cw = cr.nonboundary_weight(g, &weights);
            a.check(Ratio::from_integer(cw) * alpha <= Ratio::from_integer(pw), || format!("node {c}: weight {cw} > {pw}/α"));
            for &e in &cr.edges {
                if cr.boundary.binary_search(&e).is_err() {
                    *seen.entry(e).or_insert(0) += 1;
                }
            }
        }
        let nonboundary: Vec<usize> = r.edges.iter().copied().filter(|e| r.boundary.binary_search(e).is_err()).collect();
        let all_once = nonboundary.iter().all(|e| seen.get(e).copied().unwrap_or(0) <= 1) && seen.keys().all(|e| r.contains_edge(*e));
        a.check(all_once, || format!("node {i}: a non-boundary edge lies in two children"));
    }
    let cap = log_ceil(alpha, g.n);
    a.check(hier.height <= cap, || format!("height {} > ⌈log_α n⌉ = {cap}", hier.height));
    Ok((hier, a))
}

/// `D^(2h)(H^0) ≤ w(T* restricted to H)` for every region of the hierarchy.
pub fn audit_restriction(g: &Graph, hier: &Hierarchy, opt_edges: &[usize]) -> Audit {
    let mut a = Audit::default();
    for (i, node) in hier.nodes.iter().enumerate() {
        let (_, w) = restriction(g, opt_edges, &node.region);
        if node.region.edges.len() == node.region.boundary.len() {
            continue;
        }
        let d0 = lc_diameter(&flatten(g, &node.region).graph, hier.h_budget).unwrap_or(u64::MAX);
        a.check(d0 <= w, || format!("node {i}: D(H0) = {d0} > OPT restricted = {w}"));
    }
    a
}

/// Piece diameter ≤ h/β and piece count ≤ 8β per boundary component.
pub fn audit_pieces(g: &Graph, hier: &Hierarchy, h: u64, beta: Ratio<u64>) -> Audit {
    let mut a = Audit::default();
    let (p, q) = (*beta.numer() as u128, *beta.denom() as u128);
    for (i, node) in hier.nodes.iter().enumerate() {
        let r = &node.region;
        let comps = r.boundary_components(g);
        let pieces = region_pieces(g, r, h, beta);
        for piece in &pieces {
            let d = induced_diameter(g, &r.boundary, piece);
            a.check(d.is_some_and(|d| d as u128 * p <= h as u128 * q), || format!("node {i}: piece {piece:?} diameter {d:?} > h/β"));
        }
        for comp in &comps {
            let budget = g.length_of(comp).max(h);
            let verts = crate::division::vertex_set(g, comp);
            let count = pieces.iter().filter(|pc| verts.binary_search(&pc[0]).is_ok()).count();
            let beta_call = beta * Ratio::new(budget, h);
            a.check(Ratio::from_integer(count as u64) <= beta_call * 8, || format!("node {i}: {count} pieces > 8β for one component"));
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_planar;
    use crate::generate::{generate, Family, GenConfig};

    #[test]
    fn log_ceil_values() {
        assert_eq!(log_ceil(Ratio::from_integer(2), 1), 0);
        assert_eq!(log_ceil(Ratio::from_integer(2), 8), 3);
        assert_eq!(log_ceil(Ratio::from_integer(2), 9), 4);
        assert_eq!(log_ceil(Ratio::new(3, 2), 3), 3);
    }

    #[test]
    fn grid_passes_all_audits() {
        let inst = generate(&GenConfig::new(Family::Grid { rows: 4, cols: 4 }, 3));
        let g = inst.graph();
        let emb = embed_planar(&inst).unwrap();
        assert!(audit_separator(&g, &emb, &vec![1; g.n], 2 * inst.h, 0).unwrap().ok());
        let (hier, a) = audit_hierarchy(&g, &emb, Ratio::from_integer(2), inst.h, 0).unwrap();
        assert!(a.ok(), "{:?}", a.violations);
        assert!(audit_pieces(&g, &hier, inst.h, Ratio::from_integer(2)).ok());
    }
}
