use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, Instance, ProblemKind};
use crate::metrics::length_spt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Grid { rows: usize, cols: usize },
    TriangulatedRandom { n: usize },
    StackedTriangulation { n: usize },
    GadgetFig1Analog,
    GstGadget { n: usize, groups: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HPolicy {
    /// `ceil(num/den * ecc)` where ecc is the root's length eccentricity.
    Slack { num: u64, den: u64 },
    /// `ecc - 1`, making the instance infeasible when ecc >= 2.
    Infeasible,
    Fixed(u64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenConfig {
    pub family: Family,
    pub seed: u64,
    pub lengths: (u64, u64),
    pub weights: (u64, u64),
    /// Anti-correlate weight with length.
    pub adversarial: bool,
    /// Fraction of edges kept (connectivity is always preserved).
    pub density: f64,
    pub h_policy: HPolicy,
}

impl GenConfig {
    pub fn new(family: Family, seed: u64) -> Self {
        GenConfig {
            family,
            seed,
            lengths: (1, 5),
            weights: (1, 10),
            adversarial: false,
            density: 1.0,
            h_policy: HPolicy::Slack { num: 6, den: 5 },
        }
    }
}

pub fn generate(cfg: &GenConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (n, pairs) = match cfg.family {
        Family::Grid { rows, cols } => (rows * cols, grid_pairs(rows, cols)),
        Family::StackedTriangulation { n } => (n, stacked_pairs(n, &mut rng)),
        Family::TriangulatedRandom { n } => (n, flipped_pairs(n, &mut rng)),
        Family::GadgetFig1Analog => return fig1_gadget(),
        Family::GstGadget { n, groups } => return gst_instance(n, groups, cfg, &mut rng),
    };
    let pairs = sparsify(n, pairs, cfg.density, &mut rng);
    let edges = label_edges(&pairs, cfg, &mut rng);
    let mut inst = Instance::new(ProblemKind::Lcmst, n, edges, 0, 1);
    inst.h = pick_h(&inst, cfg.h_policy);
    inst.canonicalize();
    inst
}

pub fn pick_h(inst: &Instance, policy: HPolicy) -> u64 {
    let (dist, _) = length_spt(&Graph::new(inst.n, inst.edges.clone()), inst.root);
    let ecc = dist.iter().copied().filter(|&d| d != u64::MAX).max().unwrap_or(0);
    match policy {
        HPolicy::Slack { num, den } => ((ecc * num).div_ceil(den)).max(1),
        HPolicy::Infeasible => ecc.saturating_sub(1).max(1),
        HPolicy::Fixed(h) => h.max(1),
    }
}

fn grid_pairs(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                e.push((v, v + 1));
            }
            if i + 1 < rows {
                e.push((v, v + cols));
            }
        }
    }
    e
}

fn stacked_faces(n: usize, rng: &mut ChaCha8Rng) -> Vec<[usize; 3]> {
    let mut faces = vec![[0, 1, 2], [0, 2, 1]];
    for v in 3..n {
        let i = rng.gen_range(0..faces.len());
        let [a, b, c] = faces[i];
        faces[i] = [a, b, v];
        faces.push([b, c, v]);
        faces.push([c, a, v]);
    }
    faces
}

fn face_pairs(faces: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut s = HashSet::new();
    for f in faces {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            s.insert((a.min(b), a.max(b)));
        }
    }
    let mut v: Vec<_> = s.into_iter().collect();
    v.sort_unstable();
    v
}

fn stacked_pairs(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => vec![],
        2 => vec![(0, 1)],
        _ => face_pairs(&stacked_faces(n, rng)),
    }
}

/// Stacked triangulation followed by random edge flips.
fn flipped_pairs(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if n < 4 {
        return stacked_pairs(n, rng);
    }
    let mut faces = stacked_faces(n, rng);
    for _ in 0..3 * n {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
            }
        }
        let mut keys: Vec<_> = by_edge.keys().copied().collect();
        keys.sort_unstable();
        let (a, b) = keys[rng.gen_range(0..keys.len())];
        let fs = &by_edge[&(a, b)];
        let (fi, fj) = (fs[0], fs[1]);
        let third = |f: &[usize; 3]| *f.iter().find(|&&x| x != a && x != b).unwrap();
        let (c, d) = (third(&faces[fi]), third(&faces[fj]));
        if c == d || by_edge.contains_key(&(c.min(d), c.max(d))) {
            continue;
        }
        // keep orientation: face fi is (a, b, c) up to rotation
        let f = faces[fi];
        let k = f.iter().position(|&x| x == c).unwrap();
        let (p, q) = (f[(k + 1) % 3], f[(k + 2) % 3]);
        faces[fi] = [c, p, d];
        faces[fj] = [d, q, c];
    }
    face_pairs(&faces)
}

fn sparsify(n: usize, pairs: Vec<(usize, usize)>, density: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    if density >= 1.0 {
        return pairs;
    }
    let target = ((pairs.len() as f64) * density).ceil() as usize;
    let mut keep = pairs;
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.shuffle(rng);
    let mut removed = vec![false; keep.len()];
    let mut count = keep.len();
    for i in order {
        if count <= target.max(n.saturating_sub(1)) {
            break;
        }
        removed[i] = true;
        let rest: Vec<Edge> = keep.iter().enumerate().filter(|(j, _)| !removed[*j]).map(|(_, &(a, b))| Edge::new(a, b, 0, 0)).collect();
        if Graph::new(n, rest).is_connected() {
            count -= 1;
        } else {
            removed[i] = false;
        }
    }
    let mut j = 0;
    keep.retain(|_| {
        j += 1;
        !removed[j - 1]
    });
    keep
}

fn label_edges(pairs: &[(usize, usize)], cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let (l0, l1) = cfg.lengths;
    let (w0, w1) = cfg.weights;
    pairs
        .iter()
        .map(|&(a, b)| {
            let l = rng.gen_range(l0..=l1);
            let w = if cfg.adversarial && l1 > l0 {
                let base = w1 - (l - l0) * (w1 - w0) / (l1 - l0);
                let jitter = rng.gen_range(0..=(w1 - w0) / 4);
                base.saturating_sub(jitter).max(w0)
            } else {
                rng.gen_range(w0..=w1)
            };
            Edge::new(a, b, l, w)
        })
        .collect()
}

/// Four-vertex gadget in which no spanning tree makes every root path an h-length-shortest path.
pub fn fig1_gadget() -> Instance {
    let edges = vec![Edge::new(0, 1, 1, 5), Edge::new(0, 2, 1, 1), Edge::new(1, 2, 1, 1), Edge::new(1, 3, 1, 0)];
    Instance::new(ProblemKind::Lcmst, 4, edges, 0, 2)
}

fn gst_instance(n: usize, groups: usize, cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Instance {
    let pairs = sparsify(n, flipped_pairs(n, rng), cfg.density, rng);
    let edges = label_edges(&pairs, cfg, rng);
    let mut others: Vec<usize> = (1..n).collect();
    others.shuffle(rng);
    let groups = groups.min(others.len()).max(1);
    let mut gs: Vec<Vec<usize>> = vec![Vec::new(); groups];
    let members = others.len().min(2 * groups);
    for (i, &v) in others.iter().take(members).enumerate() {
        gs[i % groups].push(v);
    }
    let mut inst = Instance::new(ProblemKind::Gst, n, edges, 0, 1);
    inst.groups = gs.into_iter().filter(|g| !g.is_empty()).collect();
    inst.canonicalize();
    inst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::embed_planar;

    #[test]
    fn families_are_planar_and_connected() {
        for seed in 0..20 {
            for fam in [
                Family::Grid { rows: 4, cols: 5 },
                Family::StackedTriangulation { n: 30 },
                Family::TriangulatedRandom { n: 40 },
            ] {
                let mut cfg = GenConfig::new(fam, seed);
                cfg.density = if seed % 2 == 0 { 1.0 } else { 0.6 };
                let inst = generate(&cfg);
                inst.validate().unwrap();
                let emb = embed_planar(&inst).unwrap();
                assert_eq!(emb.euler_characteristic(), 2);
                assert!(emb.check_rotation());
                let tri = emb.triangulate();
                assert!(tri.is_triangulated());
                assert_eq!(tri.m(), 3 * inst.n - 6);
            }
        }
    }

    #[test]
    fn triangulations_are_maximal() {
        let inst = generate(&GenConfig::new(Family::TriangulatedRandom { n: 50 }, 3));
        assert_eq!(inst.edges.len(), 3 * 50 - 6);
    }

    #[test]
    fn deterministic_by_seed() {
        let cfg = GenConfig::new(Family::TriangulatedRandom { n: 25 }, 11);
        assert_eq!(generate(&cfg), generate(&cfg));
    }
}
