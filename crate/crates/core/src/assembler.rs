use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use num_rational::Ratio;
use serde::Serialize;

use crate::division::{build_hierarchy, vertex_set, DivisionContext, Hierarchy};
use crate::embedding::embed_planar;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, ProblemKind, INF};
use crate::lcst::{lcst_approx, LcstInstance};
use crate::metrics::{length_distances, length_spt};
use crate::pieces::region_pieces;

pub const DEFAULT_GUESS_CAP: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub alpha: Ratio<u64>,
    pub beta: Ratio<u64>,
    pub delta: Ratio<u64>,
    /// Maximum number of guesses per hierarchy node.
    pub guess_cap: u64,
}

fn to_ratio(x: f64, den: u64) -> Ratio<u64> {
    Ratio::new((x * den as f64).round().max(1.0) as u64, den)
}

impl Params {
    pub fn new(alpha: Ratio<u64>, beta: Ratio<u64>, delta: Ratio<u64>) -> Self {
        Params { alpha, beta, delta, guess_cap: DEFAULT_GUESS_CAP }
    }

    /// `ξ = ε/2`, `α = log^ξ n`, `β = log n / (ξ² log log n)`, `δ = ξ`, with α clamped to
    /// `[3/2, n]` and β to `[1, 8]`. Logarithms are base 2; values are rounded to quarters.
    pub fn from_epsilon(n: usize, epsilon: f64) -> Self {
        let xi = epsilon / 2.0;
        let lg = (n.max(2) as f64).log2();
        let lglg = lg.log2().max(1.0);
        let alpha = lg.powf(xi).clamp(1.5, (n.max(2)) as f64);
        let beta = (lg / (xi * xi * lglg)).clamp(1.0, 8.0);
        Params::new(to_ratio(alpha, 4).max(Ratio::new(3, 2)), to_ratio(beta, 4), to_ratio(xi.min(1.0), 100))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer length scale making `h/β` integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    /// Multiplier applied to every edge length.
    pub s: u64,
    /// Scaled `h`.
    pub h: u64,
    /// Scaled `h/β`.
    pub unit: u64,
    /// `⌈β⌉`, the number of guess values.
    pub steps: u32,
}

impl Scale {
    pub fn new(h: u64, beta: Ratio<u64>) -> Self {
        let (p, q) = (*beta.numer(), *beta.denom());
        let s = p / gcd(p, h * q);
        Scale { s, h: s * h, unit: s * h * q / p, steps: p.div_ceil(q) as u32 }
    }

    /// Scaled value of guess step `i` (1-based), capped at `h`.
    pub fn value(&self, step: u32) -> u64 {
        (step as u64 * self.unit).min(self.h)
    }

    pub fn budget(&self) -> u64 {
        self.h + self.unit
    }
}

/// The guess values `{i·h/β : i ∈ [⌈β⌉]}` capped at h.
pub fn guess_values(h: u64, beta: Ratio<u64>) -> Vec<Ratio<u64>> {
    let steps = beta.numer().div_ceil(*beta.denom());
    (1..=steps).map(|i| (Ratio::from_integer(i * h) / beta).min(Ratio::from_integer(h))).collect()
}

/// Per piece: a guess step in `1..=⌈β⌉` and, for the Steiner variant, a usage bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guess {
    pub steps: Vec<u32>,
    pub used: Vec<bool>,
}

impl Guess {
    pub fn is_used(&self, i: usize) -> bool {
        self.used.get(i).copied().unwrap_or(true)
    }
}

/// All guesses over `pieces` pieces in lexicographic order.
pub fn enumerate_guesses(pieces: usize, steps: u32, steiner: bool, cap: u64) -> Result<Vec<Guess>> {
    let per = steps as u128 * if steiner { 2 } else { 1 };
    let count = per.checked_pow(pieces as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::GuessBudgetExceeded(count));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0u32; pieces];
    loop {
        out.push(Guess {
            steps: digits.iter().map(|&d| if steiner { d / 2 + 1 } else { d + 1 }).collect(),
            used: if steiner { digits.iter().map(|&d| d % 2 == 0).collect() } else { Vec::new() },
        });
        let mut i = pieces;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if (digits[i] as u128) < per {
                break;
            }
            digits[i] = 0;
        }
    }
}

struct NodeData {
    verts: Vec<usize>,
    pieces: Vec<Vec<usize>>,
    /// Scaled lower bound on the root distance of each piece.
    lower: Vec<u64>,
    has_root: bool,
}

/// Base of F(H, H', ·, ·): the edges of H with scaled lengths and F weights.
struct Pair {
    edges: Vec<Edge>,
    origin: Vec<usize>,
    /// Edge lies outside E(L) ∪ E(L') and so belongs to LCST*.
    counted: Vec<bool>,
    /// Scaled H-distance from each parent piece (the root piece last) to each child piece.
    dist: Vec<Vec<u64>>,
}

/// An F instance together with the global edge behind each counted F edge.
pub struct FGraph {
    pub instance: LcstInstance,
    pub origin: Vec<Option<usize>>,
    pub x_edges: Vec<usize>,
    pub x_prime_edges: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct Cell {
    /// `None` is ∞.
    pub weight: Option<u64>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DpStats {
    pub cells: u64,
    pub lcst_calls: u64,
    pub pruned_guesses: u64,
    pub failed_guesses: u64,
}

pub struct Dp<'a> {
    g: &'a Graph,
    hier: &'a Hierarchy,
    root: usize,
    scale: Scale,
    delta: Ratio<u64>,
    steiner: bool,
    cap: u64,
    nodes: Vec<NodeData>,
    pairs: HashMap<(usize, usize), Rc<Pair>>,
    guesses: HashMap<usize, Rc<Vec<Guess>>>,
    memo: HashMap<(usize, Guess), Rc<Cell>>,
    pub stats: DpStats,
}

impl<'a> Dp<'a> {
    pub fn new(g: &'a Graph, hier: &'a Hierarchy, root: usize, h: u64, params: &Params, steiner: bool) -> Self {
        let scale = Scale::new(h, params.beta);
        let dist = length_distances(g, &[(root, 0)]);
        let nodes = hier
            .nodes
            .iter()
            .map(|nd| {
                let verts = nd.region.vertices(g);
                let pieces = region_pieces(g, &nd.region, h, params.beta);
                let lower = pieces.iter().map(|p| p.iter().map(|&v| dist[v]).min().unwrap_or(0).saturating_mul(scale.s)).collect();
                let has_root = verts.binary_search(&root).is_ok();
                NodeData { verts, pieces, lower, has_root }
            })
            .collect();
        Dp {
            g,
            hier,
            root,
            scale,
            delta: params.delta,
            steiner,
            cap: params.guess_cap,
            nodes,
            pairs: HashMap::new(),
            guesses: HashMap::new(),
            memo: HashMap::new(),
            stats: DpStats::default(),
        }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn pieces(&self, node: usize) -> &[Vec<usize>] {
        &self.nodes[node].pieces
    }

    fn is_top(&self, node: usize) -> bool {
        self.hier.nodes[node].parent.is_none()
    }

    fn guesses(&mut self, node: usize) -> Result<Rc<Vec<Guess>>> {
        if let Some(g) = self.guesses.get(&node) {
            return Ok(g.clone());
        }
        let k = if self.is_top(node) { 0 } else { self.nodes[node].pieces.len() };
        let gs = Rc::new(enumerate_guesses(k, self.scale.steps, self.steiner, self.cap)?);
        self.guesses.insert(node, gs.clone());
        Ok(gs)
    }

    fn pair(&mut self, node: usize, child: usize) -> Rc<Pair> {
        if let Some(p) = self.pairs.get(&(node, child)) {
            return p.clone();
        }
        let g = self.g;
        let pd = &self.nodes[node];
        let region = &self.hier.nodes[node].region;
        let child_region = &self.hier.nodes[child].region;
        let local = |v: usize| pd.verts.binary_search(&v).unwrap();
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        let mut counted = Vec::new();
        for &e in &region.edges {
            let ed = g.edges[e];
            let boundary = region.boundary.binary_search(&e).is_ok() || child_region.boundary.binary_search(&e).is_ok();
            edges.push(Edge::new(local(ed.u), local(ed.v), ed.length * self.scale.s, if boundary { 0 } else { ed.weight }));
            origin.push(e);
            counted.push(!boundary);
        }
        let hg = Graph::new(pd.verts.len(), edges.clone());
        let mut parents: Vec<Vec<usize>> = if self.is_top(node) { Vec::new() } else { pd.pieces.clone() };
        parents.push(vec![self.root]);
        let child_pieces = &self.nodes[child].pieces;
        let dist = parents
            .iter()
            .map(|p| {
                if !pd.has_root && p == &vec![self.root] {
                    return vec![INF; child_pieces.len()];
                }
                let d = length_distances(&hg, &p.iter().map(|&v| (local(v), 0)).collect::<Vec<_>>());
                child_pieces.iter().map(|cp| cp.iter().map(|&v| d[local(v)]).min().unwrap_or(INF)).collect()
            })
            .collect();
        let pair = Rc::new(Pair { edges, origin, counted, dist });
        self.pairs.insert((node, child), pair.clone());
        pair
    }

    /// Whether some terminal of F(node, child, g, gp) is out of reach within the budget.
    fn precheck(&self, node: usize, pair: &Pair, g: &Guess, gp: &Guess) -> bool {
        let parent_count = pair.dist.len();
        for j in 0..gp.steps.len() {
            let target = self.scale.value(gp.steps[j]) + self.scale.unit;
            let ok = (0..parent_count).any(|i| {
                let gi = if i + 1 == parent_count {
                    0
                } else if g.is_used(i) {
                    self.scale.value(g.steps[i])
                } else {
                    return false;
                };
                pair.dist[i][j] != INF && gi + pair.dist[i][j] <= target
            });
            if !ok {
                return false;
            }
        }
        let _ = node;
        true
    }

    /// F(node, child, g, gp).
    pub fn build_f(&mut self, node: usize, child: usize, g: &Guess, gp: &Guess) -> FGraph {
        let pair = self.pair(node, child);
        self.build_f_with(node, child, &pair, g, gp)
    }

    fn build_f_with(&self, node: usize, child: usize, pair: &Pair, g: &Guess, gp: &Guess) -> FGraph {
        let pd = &self.nodes[node];
        let k = pd.verts.len();
        let local = |v: usize| pd.verts.binary_search(&v).unwrap();
        let top = self.is_top(node);
        let child_pieces = &self.nodes[child].pieces;
        let mut edges = pair.edges.clone();
        let mut origin: Vec<Option<usize>> = pair.origin.iter().zip(&pair.counted).map(|(&e, &c)| c.then_some(e)).collect();
        let (root, first_t) = if top { (local(self.root), k) } else { (k, k + 1) };
        let mut x_edges = Vec::new();
        if !top {
            for (i, piece) in pd.pieces.iter().enumerate() {
                if !g.is_used(i) {
                    continue;
                }
                for &v in piece {
                    x_edges.push(edges.len());
                    edges.push(Edge::new(root, local(v), self.scale.value(g.steps[i]), 0));
                }
            }
            if pd.has_root {
                x_edges.push(edges.len());
                edges.push(Edge::new(root, local(self.root), 0, 0));
            }
        }
        origin.resize(edges.len(), None);
        let mut x_prime_edges = Vec::new();
        for (j, piece) in child_pieces.iter().enumerate() {
            for &v in piece {
                x_prime_edges.push(edges.len());
                edges.push(Edge::new(first_t + j, local(v), self.scale.h - self.scale.value(gp.steps[j]), 0));
            }
        }
        origin.resize(edges.len(), None);
        let n = first_t + child_pieces.len();
        let terminals: Vec<usize> = (first_t..n).collect();
        let mut instance = LcstInstance::new(Graph::new(n, edges), root, terminals.clone(), self.scale.budget());
        instance.sinks = terminals;
        FGraph { instance, origin, x_edges, x_prime_edges }
    }

    /// LCST* of one F instance: weight and global edges, or `None` on fail.
    fn lcst_star(&mut self, node: usize, child: usize, pair: &Pair, g: &Guess, gp: &Guess) -> Result<Option<(u64, Vec<usize>)>> {
        if !self.precheck(node, pair, g, gp) {
            return Ok(None);
        }
        let f = self.build_f_with(node, child, pair, g, gp);
        self.stats.lcst_calls += 1;
        let Some(sol) = lcst_approx(&f.instance, self.delta)? else { return Ok(None) };
        let mut edges: Vec<usize> = sol.iter().filter_map(|&e| f.origin[e]).collect();
        edges.sort_unstable();
        edges.dedup();
        let w = self.g.weight_of(&edges);
        Ok(Some((w, edges)))
    }

    fn child_best(&mut self, node: usize, g: &Guess, child: usize) -> Result<Option<(u64, Vec<usize>)>> {
        let pair = self.pair(node, child);
        let guesses = self.guesses(child)?;
        let mut cache: HashMap<Vec<u32>, Option<(u64, Vec<usize>)>> = HashMap::new();
        let mut cands: Vec<(u64, usize)> = Vec::new();
        for (idx, gp) in guesses.iter().enumerate() {
            let lower = &self.nodes[child].lower;
            if gp.steps.iter().zip(lower).any(|(&s, &lb)| self.scale.value(s) < lb) {
                self.stats.pruned_guesses += 1;
                continue;
            }
            if !cache.contains_key(&gp.steps) {
                let r = self.lcst_star(node, child, &pair, g, gp)?;
                cache.insert(gp.steps.clone(), r);
            }
            match &cache[&gp.steps] {
                Some((w, _)) => cands.push((*w, idx)),
                None => self.stats.failed_guesses += 1,
            }
        }
        cands.sort_unstable();
        let mut best: Option<(u64, Vec<usize>)> = None;
        for (wl, idx) in cands {
            if best.as_ref().is_some_and(|b| wl >= b.0) {
                break;
            }
            let gp = &guesses[idx];
            let sub = self.cell(child, gp)?;
            let Some(cw) = sub.weight else { continue };
            let total = cw + wl;
            if best.as_ref().is_none_or(|b| total < b.0) {
                let mut e = sub.edges.clone();
                e.extend_from_slice(&cache[&gp.steps].as_ref().unwrap().1);
                e.sort_unstable();
                e.dedup();
                best = Some((total, e));
            }
        }
        Ok(best)
    }

    /// DP[node, g], evaluated lazily and memoized.
    pub fn cell(&mut self, node: usize, g: &Guess) -> Result<Rc<Cell>> {
        if let Some(c) = self.memo.get(&(node, g.clone())) {
            return Ok(c.clone());
        }
        self.stats.cells += 1;
        let children = self.hier.nodes[node].children.clone();
        let mut cell = Cell { weight: Some(0), edges: Vec::new() };
        for c in children {
            match self.child_best(node, g, c)? {
                Some((w, e)) => {
                    cell.weight = cell.weight.map(|x| x + w);
                    cell.edges.extend(e);
                }
                None => {
                    cell = Cell { weight: None, edges: Vec::new() };
                    break;
                }
            }
        }
        cell.edges.sort_unstable();
        cell.edges.dedup();
        if let Some(w) = cell.weight {
            assert!(self.g.weight_of(&cell.edges) <= w, "stored edge set heavier than its DP value");
        }
        let cell = Rc::new(cell);
        self.memo.insert((node, g.clone()), cell.clone());
        Ok(cell)
    }

    /// DP[G, ·] at the top region, whose only piece is the root.
    pub fn solve(&mut self) -> Result<Rc<Cell>> {
        self.cell(0, &Guess { steps: Vec::new(), used: Vec::new() })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub edges: Vec<usize>,
    pub weight: u64,
    pub max_root_distance: u64,
    /// Number of hierarchy levels (leaf level counts as 1).
    pub depth: usize,
    pub dp_weight: u64,
    pub boundary_weight: u64,
    pub stats: DpStats,
    pub wall_time_ms: f64,
}

impl Solution {
    /// `max d_T(r, v) ≤ h·(1 + 2·depth/β)`.
    pub fn within_length_bound(&self, h: u64, beta: Ratio<u64>) -> bool {
        let (p, q) = (*beta.numer() as u128, *beta.denom() as u128);
        self.max_root_distance as u128 * p <= h as u128 * p + 2 * h as u128 * self.depth as u128 * q
    }
}

fn spt_edges(g: &Graph, ids: &[usize], root: usize) -> (Vec<usize>, Vec<u64>) {
    let sub = g.edge_subgraph(ids);
    let (dist, tree) = length_spt(&sub, root);
    let mut t: Vec<usize> = tree.parent_edge.iter().flatten().map(|&e| ids[e]).collect();
    t.sort_unstable();
    (t, dist)
}

fn solve_on(g: &Graph, inst_like: (&Instance, usize, u64), params: &Params, steiner: bool, weights: &[u64]) -> Result<Solution> {
    let (inst, root, h) = inst_like;
    let start = Instant::now();
    let emb = embed_planar(inst)?;
    let ctx = DivisionContext { g, emb: &emb, weights, root };
    let hier = if steiner { build_steiner_hierarchy(&ctx, params.alpha, h)? } else { build_hierarchy(&ctx, params.alpha, h)? };
    let mut dp = Dp::new(g, &hier, root, h, params, steiner);
    let top = dp.solve()?;
    let Some(dp_weight) = top.weight else { return Err(Error::Infeasible) };
    let mut boundary: Vec<usize> = hier.nodes.iter().flat_map(|n| n.region.boundary.iter().copied()).collect();
    boundary.sort_unstable();
    boundary.dedup();
    let mut union = boundary.clone();
    union.extend_from_slice(&top.edges);
    union.sort_unstable();
    union.dedup();
    let (mut edges, dist) = spt_edges(g, &union, root);
    let mut keep: Vec<bool> = vec![true; g.n];
    if steiner {
        let mut term = vec![false; g.n];
        term[root] = true;
        for (v, &w) in weights.iter().enumerate() {
            term[v] |= w > 0;
        }
        loop {
            let mut deg = vec![0usize; g.n];
            for &e in &edges {
                deg[g.edges[e].u] += 1;
                deg[g.edges[e].v] += 1;
            }
            let before = edges.len();
            edges.retain(|&e| {
                let ed = g.edges[e];
                !((deg[ed.u] == 1 && !term[ed.u]) || (deg[ed.v] == 1 && !term[ed.v]))
            });
            if edges.len() == before {
                break;
            }
        }
        keep = term;
    }
    let max_root_distance = (0..g.n).filter(|&v| keep[v]).map(|v| dist[v]).max().unwrap_or(0);
    if max_root_distance == INF {
        return Err(Error::Other("assembled edge set does not reach every vertex".into()));
    }
    Ok(Solution {
        weight: g.weight_of(&edges),
        edges,
        max_root_distance,
        depth: hier.height + 1,
        dp_weight,
        boundary_weight: g.weight_of(&boundary),
        stats: dp.stats.clone(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Hierarchy for the Steiner variant: terminal vertex weights, no spanning feasibility requirement.
fn build_steiner_hierarchy(ctx: &DivisionContext, alpha: Ratio<u64>, h: u64) -> Result<Hierarchy> {
    build_hierarchy(ctx, alpha, h)
}

/// The main algorithm for LC-MST (or LCST with terminal weights).
pub fn run_main(inst: &Instance, params: &Params) -> Result<Solution> {
    match inst.kind {
        ProblemKind::Lcmst => {}
        ProblemKind::Lcst => return run_steiner(inst, params),
        k => return Err(Error::Invalid(format!("run_main does not accept {k} instances"))),
    }
    let g = inst.graph();
    if inst.n == 1 {
        return Ok(trivial());
    }
    solve_on(&g, (inst, inst.root, inst.h), params, false, &vec![1; inst.n])
}

fn trivial() -> Solution {
    Solution { edges: Vec::new(), weight: 0, max_root_distance: 0, depth: 1, dp_weight: 0, boundary_weight: 0, stats: DpStats::default(), wall_time_ms: 0.0 }
}

/// Steiner variant: restricts to vertices within h of the root, builds a terminal-weighted
/// hierarchy, guesses usage bits per parent piece and prunes non-terminal leaves.
pub fn run_steiner(inst: &Instance, params: &Params) -> Result<Solution> {
    let g = inst.graph();
    let dist = length_distances(&g, &[(inst.root, 0)]);
    if inst.terminals.iter().any(|&t| dist[t] > inst.h) {
        return Err(Error::Infeasible);
    }
    let near: Vec<usize> = (0..inst.n).filter(|&v| dist[v] <= inst.h).collect();
    if near.len() == 1 || inst.terminals.iter().all(|&t| t == inst.root) {
        return Ok(trivial());
    }
    let idx = |v: usize| near.binary_search(&v).ok();
    let mut edge_map = Vec::new();
    let mut edges = Vec::new();
    for (e, ed) in inst.edges.iter().enumerate() {
        if let (Some(a), Some(b)) = (idx(ed.u), idx(ed.v)) {
            edge_map.push(e);
            edges.push(Edge::new(a, b, ed.length, ed.weight));
        }
    }
    let mut sub = Instance::new(ProblemKind::Lcmst, near.len(), edges, idx(inst.root).unwrap(), inst.h);
    sub.terminals = inst.terminals.iter().map(|&t| idx(t).unwrap()).collect();
    let sg = sub.graph();
    let mut weights = vec![0u64; near.len()];
    for &t in &sub.terminals {
        if t != sub.root {
            weights[t] = 1;
        }
    }
    let mut sol = solve_on(&sg, (&sub, sub.root, sub.h), params, true, &weights)?;
    sol.edges = sol.edges.iter().map(|&e| edge_map[e]).collect();
    sol.edges.sort_unstable();
    Ok(sol)
}

pub fn hierarchy_vertices(g: &Graph, hier: &Hierarchy, node: usize) -> Vec<usize> {
    vertex_set(g, &hier.nodes[node].region.edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family, GenConfig};
    use crate::oracle::exact_lcmst;

    fn params(beta: u64) -> Params {
        Params::new(Ratio::from_integer(2), Ratio::from_integer(beta), Ratio::new(1, 2))
    }

    #[test]
    fn guess_grid() {
        assert_eq!(guess_values(6, Ratio::from_integer(3)), vec![Ratio::from_integer(2), Ratio::from_integer(4), Ratio::from_integer(6)]);
        assert_eq!(enumerate_guesses(1, 3, false, 100).unwrap().len(), 3);
        assert_eq!(enumerate_guesses(2, 2, false, 100).unwrap().len(), 4);
        let s = enumerate_guesses(2, 2, true, 100).unwrap();
        assert_eq!(s.len(), 16);
        let mut d = s.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 16);
        assert!(matches!(enumerate_guesses(3, 4, false, 10), Err(Error::GuessBudgetExceeded(64))));
    }

    #[test]
    fn scale_makes_unit_integral() {
        let s = Scale::new(10, Ratio::from_integer(4));
        assert_eq!((s.s, s.h, s.unit, s.steps), (2, 20, 5, 4));
        let s = Scale::new(7, Ratio::new(5, 2));
        assert_eq!(s.unit * 5, s.h * 2);
        assert_eq!(s.value(3), s.h);
    }

    #[test]
    fn star_is_returned() {
        let text = "p lcmst 4 3 3 0\ne 0 1 3 2\ne 0 2 1 5\ne 0 3 2 1\n";
        let inst = Instance::parse(text).unwrap();
        let sol = run_main(&inst, &params(2)).unwrap();
        assert_eq!(sol.edges, vec![0, 1, 2]);
        assert_eq!(sol.weight, 8);
        assert!(sol.max_root_distance <= inst.h);
    }

    #[test]
    fn single_vertex_and_edge() {
        let inst = Instance::parse("p lcmst 1 0 1 0\n").unwrap();
        assert_eq!(run_main(&inst, &params(2)).unwrap().weight, 0);
        let inst = Instance::parse("p lcmst 2 1 5 0\ne 0 1 3 7\n").unwrap();
        assert_eq!(run_main(&inst, &params(2)).unwrap().weight, 7);
    }

    #[test]
    fn infeasible_instance() {
        let inst = Instance::parse("p lcmst 2 1 2 0\ne 0 1 3 7\n").unwrap();
        assert!(matches!(run_main(&inst, &params(2)), Err(Error::Infeasible)));
    }

    #[test]
    fn f_construction_top_region() {
        let inst = generate(&GenConfig::new(Family::Grid { rows: 3, cols: 3 }, 2));
        let g = inst.graph();
        let emb = embed_planar(&inst).unwrap();
        let w = vec![1; g.n];
        let ctx = DivisionContext { g: &g, emb: &emb, weights: &w, root: 0 };
        let hier = build_hierarchy(&ctx, Ratio::from_integer(2), inst.h).unwrap();
        let p = params(2);
        let mut dp = Dp::new(&g, &hier, 0, inst.h, &p, false);
        let child = hier.nodes[0].children[0];
        let k = dp.pieces(child).len();
        let top = Guess { steps: vec![], used: vec![] };
        let full = Guess { steps: vec![2; k], used: vec![] };
        let f = dp.build_f(0, child, &top, &full);
        assert!(f.x_edges.is_empty());
        assert_eq!(f.instance.terminals.len(), k);
        assert!(f.x_prime_edges.iter().all(|&e| f.instance.graph.edges[e].length == 0 && f.instance.graph.edges[e].weight == 0));
        for (e, ed) in f.instance.graph.edges.iter().enumerate() {
            if ed.weight > 0 {
                assert!(f.origin[e].is_some());
            }
        }
    }

    #[test]
    fn small_corpus_bounds() {
        for seed in 0..12 {
            let mut cfg = GenConfig::new(Family::TriangulatedRandom { n: 8 }, seed);
            cfg.lengths = (1, 3);
            cfg.density = 0.7;
            let inst = generate(&cfg);
            let opt = exact_lcmst(&inst).unwrap().weight.unwrap();
            for beta in [2, 3] {
                let p = params(beta);
                let sol = run_main(&inst, &p).unwrap();
                assert_eq!(sol.edges.len(), inst.n - 1);
                assert!(sol.within_length_bound(inst.h, p.beta));
                let ceiling = 8.0 * 2.0 * (beta as f64).sqrt() * sol.depth as f64;
                assert!(sol.weight as f64 <= ceiling * opt.max(1) as f64);
            }
        }
    }
}
