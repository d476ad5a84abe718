use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Instance;

/// Combinatorial embedding. Dart `2e` runs `ends[e].0 -> ends[e].1`, dart `2e+1` the reverse.
/// Edge ids `>= real_edges` are synthetic (added by triangulation).
#[derive(Clone, Debug)]
pub struct PlanarEmbedding {
    pub n: usize,
    pub ends: Vec<(usize, usize)>,
    pub real_edges: usize,
    pub rotation: Vec<Vec<usize>>,
    pos: Vec<usize>,
    /// A dart on the designated outer face.
    pub outer: usize,
}

pub fn rev(d: usize) -> usize {
    d ^ 1
}

impl PlanarEmbedding {
    /// Embeds a connected simple graph, or reports a Kuratowski witness.
    pub fn new(n: usize, ends: Vec<(usize, usize)>) -> Result<Self> {
        if !connected(n, &ends) {
            return Err(Error::Disconnected);
        }
        match planar_rotation(n, &ends) {
            Some(rotation) => Ok(Self::from_rotation(n, ends, rotation, None)),
            None => {
                let w = kuratowski_witness(n, &ends);
                let kind = witness_kind(n, &ends, &w);
                Err(Error::NonPlanar { kind, edges: w.iter().map(|&e| ends[e]).collect() })
            }
        }
    }

    pub fn from_rotation(n: usize, ends: Vec<(usize, usize)>, rotation: Vec<Vec<usize>>, outer: Option<usize>) -> Self {
        let real_edges = ends.len();
        let mut emb = PlanarEmbedding { n, pos: vec![0; 2 * ends.len()], ends, real_edges, rotation, outer: 0 };
        for v in 0..n {
            emb.reindex(v);
        }
        emb.outer = outer.unwrap_or_else(|| emb.max_face_dart());
        emb
    }

    fn reindex(&mut self, v: usize) {
        for (i, &d) in self.rotation[v].iter().enumerate() {
            self.pos[d] = i;
        }
    }

    pub fn tail(&self, d: usize) -> usize {
        let (a, b) = self.ends[d / 2];
        if d.is_multiple_of(2) {
            a
        } else {
            b
        }
    }

    pub fn head(&self, d: usize) -> usize {
        self.tail(rev(d))
    }

    pub fn m(&self) -> usize {
        self.ends.len()
    }

    pub fn is_synthetic(&self, e: usize) -> bool {
        e >= self.real_edges
    }

    pub fn synthetic_edges(&self) -> Vec<usize> {
        (self.real_edges..self.ends.len()).collect()
    }

    pub fn face_next(&self, d: usize) -> usize {
        let v = self.head(d);
        let r = &self.rotation[v];
        r[(self.pos[rev(d)] + 1) % r.len()]
    }

    /// Faces as dart cycles, enumerated from the smallest unvisited dart, plus the face id of every dart.
    pub fn faces(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let nd = 2 * self.ends.len();
        let mut face_of = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for s in 0..nd {
            if face_of[s] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut f = Vec::new();
            let mut d = s;
            loop {
                face_of[d] = id;
                f.push(d);
                d = self.face_next(d);
                if d == s {
                    break;
                }
            }
            faces.push(f);
        }
        (faces, face_of)
    }

    fn max_face_dart(&self) -> usize {
        let (faces, _) = self.faces();
        let mut best: Option<&Vec<usize>> = None;
        for f in &faces {
            if best.is_none_or(|b| f.len() > b.len()) {
                best = Some(f);
            }
        }
        best.map_or(0, |f| f[0])
    }

    /// V - E + F for a connected embedding (2 on the sphere).
    pub fn euler_characteristic(&self) -> i64 {
        let f = if self.ends.is_empty() { 1 } else { self.faces().0.len() };
        self.n as i64 - self.ends.len() as i64 + f as i64
    }

    pub fn check_rotation(&self) -> bool {
        let mut seen = vec![false; 2 * self.ends.len()];
        for v in 0..self.n {
            for &d in &self.rotation[v] {
                if seen[d] || self.tail(d) != v {
                    return false;
                }
                seen[d] = true;
            }
        }
        seen.into_iter().all(|x| x)
    }

    /// Restriction to a subset of edges, relabelled: `local_of[v]` maps global vertices (usize::MAX if absent),
    /// `edge_ids[i]` is the global edge of local edge `i`.
    pub fn restrict(&self, local_n: usize, local_of: &[usize], edge_ids: &[usize]) -> PlanarEmbedding {
        let mut local_edge = HashMap::with_capacity(edge_ids.len());
        let mut ends = Vec::with_capacity(edge_ids.len());
        for (i, &e) in edge_ids.iter().enumerate() {
            local_edge.insert(e, i);
            let (a, b) = self.ends[e];
            ends.push((local_of[a], local_of[b]));
        }
        let mut rotation = vec![Vec::new(); local_n];
        for v in 0..self.n {
            let lv = local_of[v];
            if lv == usize::MAX {
                continue;
            }
            for &d in &self.rotation[v] {
                if let Some(&le) = local_edge.get(&(d / 2)) {
                    rotation[lv].push(2 * le + (d % 2));
                }
            }
        }
        PlanarEmbedding::from_rotation(local_n, ends, rotation, None)
    }

    /// Adds synthetic edges until every face is a triangle (graphs with at least 3 vertices).
    pub fn triangulate(&self) -> PlanarEmbedding {
        let mut emb = self.clone();
        if emb.n < 3 {
            return emb;
        }
        let mut adjacent: HashSet<(usize, usize)> = emb.ends.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        loop {
            let (faces, _) = emb.faces();
            let mut changed = false;
            for f in faces.iter().filter(|f| f.len() > 3) {
                let (i, j) = find_diagonal(&emb, f, &adjacent).expect("face without a simple diagonal");
                let k = f.len();
                let x = emb.tail(f[i]);
                let y = emb.tail(f[j]);
                let din_x = f[(i + k - 1) % k];
                let din_y = f[(j + k - 1) % k];
                let e = emb.ends.len();
                emb.ends.push((x, y));
                emb.pos.push(0);
                emb.pos.push(0);
                let px = emb.pos[rev(din_x)] + 1;
                emb.rotation[x].insert(px, 2 * e);
                emb.reindex(x);
                let py = emb.pos[rev(din_y)] + 1;
                emb.rotation[y].insert(py, 2 * e + 1);
                emb.reindex(y);
                adjacent.insert((x.min(y), x.max(y)));
                changed = true;
            }
            if !changed {
                break;
            }
        }
        emb
    }

    pub fn is_triangulated(&self) -> bool {
        self.faces().0.iter().all(|f| f.len() == 3)
    }
}

fn find_diagonal(emb: &PlanarEmbedding, f: &[usize], adjacent: &HashSet<(usize, usize)>) -> Option<(usize, usize)> {
    let k = f.len();
    for i in 0..k {
        let x = emb.tail(f[i]);
        for j in i + 2..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            let y = emb.tail(f[j]);
            if x != y && !adjacent.contains(&(x.min(y), x.max(y))) {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn embed_planar(inst: &Instance) -> Result<PlanarEmbedding> {
    PlanarEmbedding::new(inst.n, underlying_simple_edges(inst))
}

/// Undirected simple edge list of an instance (antiparallel arcs merged, first occurrence kept).
pub fn underlying_simple_edges(inst: &Instance) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in &inst.edges {
        let key = (e.u.min(e.v), e.u.max(e.v));
        if seen.insert(key) {
            out.push((e.u, e.v));
        }
    }
    out
}

fn connected(n: usize, ends: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in ends {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}

pub fn is_planar(n: usize, ends: &[(usize, usize)]) -> bool {
    planar_rotation(n, ends).is_some()
}

/// Rotation system (darts per vertex) for any simple graph, or None if non-planar.
fn planar_rotation(n: usize, ends: &[(usize, usize)]) -> Option<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in ends.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut rotation = vec![Vec::new(); n];
    for block in biconnected_blocks(n, &adj) {
        if block.len() == 1 {
            let e = block[0];
            rotation[ends[e].0].push(2 * e);
            rotation[ends[e].1].push(2 * e + 1);
            continue;
        }
        for (v, rot) in embed_block(ends, &block)? {
            rotation[v].extend(rot);
        }
    }
    Some(rotation)
}

fn biconnected_blocks(n: usize, adj: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut blocks = Vec::new();
    let mut estack: Vec<usize> = Vec::new();
    for s in 0..n {
        if disc[s] != usize::MAX {
            continue;
        }
        disc[s] = timer;
        low[s] = timer;
        timer += 1;
        let mut stack: Vec<(usize, usize, usize)> = vec![(s, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let (w, e) = adj[v][*idx];
                *idx += 1;
                if e == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    estack.push(e);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    estack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut block = Vec::new();
                        while let Some(x) = estack.pop() {
                            block.push(x);
                            if x == pe {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

enum FragmentKind {
    Edge(usize),
    Component(Vec<usize>),
}

struct Fragment {
    attach: Vec<usize>,
    kind: FragmentKind,
}

/// Path-addition embedding of one biconnected block; returns per-vertex rotations (global darts).
fn embed_block(ends: &[(usize, usize)], block: &[usize]) -> Option<Vec<(usize, Vec<usize>)>> {
    let mut verts: Vec<usize> = block.iter().flat_map(|&e| [ends[e].0, ends[e].1]).collect();
    verts.sort_unstable();
    verts.dedup();
    let local: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nv = verts.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    let lends: Vec<(usize, usize)> = block.iter().map(|&e| (local[&ends[e].0], local[&ends[e].1])).collect();
    for (i, &(a, b)) in lends.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
        edge_of.insert((a, b), i);
        edge_of.insert((b, a), i);
    }
    let le = lends.len();
    if le > 3 * nv - 6 {
        return None;
    }
    let mut emb_v = vec![false; nv];
    let mut emb_e = vec![false; le];

    let cycle = find_cycle(nv, &adj);
    for i in 0..cycle.len() {
        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        emb_v[a] = true;
        emb_e[edge_of[&(a, b)]] = true;
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle.iter().rev().copied().collect()];
    let mut embedded = cycle.len();

    while embedded < le {
        let mut vertex_faces: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        let fragments = fragments(nv, &adj, &lends, &emb_v, &emb_e);
        let mut choice: Option<(usize, usize)> = None;
        for (k, frag) in fragments.iter().enumerate() {
            let mut cand = vertex_faces[frag.attach[0]].clone();
            for &a in &frag.attach[1..] {
                cand.retain(|f| vertex_faces[a].contains(f));
            }
            if cand.is_empty() {
                return None;
            }
            if cand.len() == 1 {
                choice = Some((k, cand[0]));
                break;
            }
            if choice.is_none() {
                choice = Some((k, cand[0]));
            }
        }
        let (k, fi) = choice.expect("fragment exists while edges remain");
        let frag = &fragments[k];
        let path = match &frag.kind {
            FragmentKind::Edge(e) => vec![lends[*e].0, lends[*e].1],
            FragmentKind::Component(comp) => fragment_path(&adj, comp, frag.attach[0], frag.attach[1], &emb_v),
        };
        for w in path.windows(2) {
            emb_e[edge_of[&(w[0], w[1])]] = true;
            embedded += 1;
        }
        for &v in &path {
            emb_v[v] = true;
        }
        let face = &faces[fi];
        let i = face.iter().position(|&x| x == path[0]).unwrap();
        let j = face.iter().position(|&x| x == *path.last().unwrap()).unwrap();
        let fl = face.len();
        let interior = &path[1..path.len() - 1];
        let mut f1 = Vec::new();
        let mut t = i;
        loop {
            f1.push(face[t]);
            if t == j {
                break;
            }
            t = (t + 1) % fl;
        }
        f1.extend(interior.iter().rev());
        let mut f2 = Vec::new();
        let mut t = j;
        loop {
            f2.push(face[t]);
            if t == i {
                break;
            }
            t = (t + 1) % fl;
        }
        f2.extend(interior.iter());
        faces[fi] = f1;
        faces.push(f2);
    }

    let dart = |a: usize, b: usize| -> usize {
        let e = block[edge_of[&(a, b)]];
        if ends[e].0 == verts[a] {
            2 * e
        } else {
            2 * e + 1
        }
    };
    let mut next: HashMap<usize, usize> = HashMap::new();
    for f in &faces {
        let k = f.len();
        for i in 0..k {
            let (u, v, w) = (f[i], f[(i + 1) % k], f[(i + 2) % k]);
            next.insert(dart(v, u), dart(v, w));
        }
    }
    let mut out = Vec::with_capacity(nv);
    for v in 0..nv {
        let start = dart(v, adj[v][0].0);
        let mut rot = vec![start];
        let mut d = next[&start];
        while d != start {
            rot.push(d);
            d = next[&d];
        }
        debug_assert_eq!(rot.len(), adj[v].len());
        out.push((verts[v], rot));
    }
    Some(out)
}

fn find_cycle(nv: usize, adj: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let mut parent = vec![usize::MAX; nv];
    let mut depth = vec![usize::MAX; nv];
    depth[0] = 0;
    let mut stack = vec![(0usize, usize::MAX, 0usize)];
    while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
        if *idx == adj[v].len() {
            stack.pop();
            continue;
        }
        let (w, e) = adj[v][*idx];
        *idx += 1;
        if e == pe {
            continue;
        }
        if depth[w] == usize::MAX {
            depth[w] = depth[v] + 1;
            parent[w] = v;
            stack.push((w, e, 0));
        } else if depth[w] < depth[v] {
            let mut cyc = vec![v];
            let mut x = v;
            while x != w {
                x = parent[x];
                cyc.push(x);
            }
            return cyc;
        }
    }
    unreachable!("biconnected block has a cycle")
}

fn fragments(nv: usize, adj: &[Vec<(usize, usize)>], lends: &[(usize, usize)], emb_v: &[bool], emb_e: &[bool]) -> Vec<Fragment> {
    let mut out = Vec::new();
    for (e, &(a, b)) in lends.iter().enumerate() {
        if !emb_e[e] && emb_v[a] && emb_v[b] {
            out.push(Fragment { attach: vec![a, b], kind: FragmentKind::Edge(e) });
        }
    }
    let mut seen = vec![false; nv];
    for s in 0..nv {
        if emb_v[s] || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut attach = Vec::new();
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for &(y, _) in &adj[x] {
                if emb_v[y] {
                    attach.push(y);
                } else if !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                }
            }
        }
        attach.sort_unstable();
        attach.dedup();
        out.push(Fragment { attach, kind: FragmentKind::Component(comp) });
    }
    out
}

fn fragment_path(adj: &[Vec<(usize, usize)>], comp: &[usize], a1: usize, a2: usize, emb_v: &[bool]) -> Vec<usize> {
    let in_comp: HashSet<usize> = comp.iter().copied().collect();
    let start = *comp.iter().find(|&&x| adj[x].iter().any(|&(y, _)| y == a1)).unwrap();
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = std::collections::VecDeque::from([start]);
    prev.insert(start, usize::MAX);
    while let Some(x) = queue.pop_front() {
        if adj[x].iter().any(|&(y, _)| y == a2) {
            let mut path = vec![a2, x];
            let mut c = x;
            while prev[&c] != usize::MAX {
                c = prev[&c];
                path.push(c);
            }
            path.push(a1);
            path.reverse();
            return path;
        }
        for &(y, _) in &adj[x] {
            if !emb_v[y] && in_comp.contains(&y) && !prev.contains_key(&y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    unreachable!("fragment connects its attachments")
}

/// Minimal non-planar edge subset, found by greedy deletion.
pub fn kuratowski_witness(n: usize, ends: &[(usize, usize)]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..ends.len()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<(usize, usize)> = keep.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &e)| ends[e]).collect();
        if !is_planar(n, &trial) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep
}

fn witness_kind(n: usize, ends: &[(usize, usize)], w: &[usize]) -> String {
    let mut deg = vec![0usize; n];
    for &e in w {
        deg[ends[e].0] += 1;
        deg[ends[e].1] += 1;
    }
    match deg.iter().filter(|&&d| d >= 3).count() {
        5 => "K5".into(),
        6 => "K3,3".into(),
        k => format!("{k}-branch"),
    }
}

/// Rooted spanning tree by parent edges.
#[derive(Clone, Debug)]
pub struct RootedTree {
    pub root: usize,
    pub parent_edge: Vec<Option<usize>>,
    pub parent: Vec<usize>,
    pub depth: Vec<usize>,
}

impl RootedTree {
    pub fn from_parents(root: usize, ends: &[(usize, usize)], parent_edge: Vec<Option<usize>>) -> Self {
        let n = parent_edge.len();
        let parent: Vec<usize> = (0..n)
            .map(|v| match parent_edge[v] {
                Some(e) => {
                    let (a, b) = ends[e];
                    if a == v {
                        b
                    } else {
                        a
                    }
                }
                None => usize::MAX,
            })
            .collect();
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        fn resolve(v: usize, parent: &[usize], depth: &mut [usize]) -> usize {
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
            depth[v]
        }
        for v in 0..n {
            if parent_edge[v].is_some() || v == root {
                resolve(v, &parent, &mut depth);
            }
        }
        RootedTree { root, parent_edge, parent, depth }
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.parent_edge.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// Edges on the path from `v` up to the root, in walk order.
    pub fn root_path(&self, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(e) = self.parent_edge[v] {
            out.push(e);
            v = self.parent[v];
        }
        out
    }
}

/// The two tree paths from the endpoints of non-tree edge `e` to their lowest common ancestor.
pub fn fundamental_cycle(tree: &RootedTree, ends: &[(usize, usize)], e: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if tree.parent_edge.contains(&Some(e)) {
        return Err(Error::TreeEdge(e));
    }
    let (mut a, mut b) = ends[e];
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    while tree.depth[a] > tree.depth[b] {
        p1.push(tree.parent_edge[a].unwrap());
        a = tree.parent[a];
    }
    while tree.depth[b] > tree.depth[a] {
        p2.push(tree.parent_edge[b].unwrap());
        b = tree.parent[b];
    }
    while a != b {
        p1.push(tree.parent_edge[a].unwrap());
        a = tree.parent[a];
        p2.push(tree.parent_edge[b].unwrap());
        b = tree.parent[b];
    }
    Ok((p1, p2))
}

#[derive(Clone, Debug, Serialize)]
pub struct CyclePartition {
    pub cycle_vertices: Vec<usize>,
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    /// Per face (in `faces()` order): true when the face lies outside the cycle.
    #[serde(skip)]
    pub face_outside: Vec<bool>,
    #[serde(skip)]
    pub face_of: Vec<usize>,
}

impl CyclePartition {
    /// Side of a non-cycle edge: Some(true) inside, Some(false) outside.
    pub fn edge_inside(&self, e: usize) -> bool {
        !self.face_outside[self.face_of[2 * e]]
    }
}

pub fn classify_inside_outside(emb: &PlanarEmbedding, cycle: &[usize]) -> Result<CyclePartition> {
    let (faces, face_of) = emb.faces();
    classify_with_faces(emb, &faces, face_of, cycle)
}

/// As `classify_inside_outside`, reusing a precomputed face list.
pub fn classify_with_faces(emb: &PlanarEmbedding, faces: &[Vec<usize>], face_of: Vec<usize>, cycle: &[usize]) -> Result<CyclePartition> {
    let mut deg = vec![0usize; emb.n];
    let mut in_cycle = vec![false; emb.m()];
    for &e in cycle {
        if in_cycle[e] {
            return Err(Error::NotSimpleCycle);
        }
        in_cycle[e] = true;
        deg[emb.ends[e].0] += 1;
        deg[emb.ends[e].1] += 1;
    }
    if cycle.len() < 3 || deg.iter().any(|&d| d != 0 && d != 2) {
        return Err(Error::NotSimpleCycle);
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in cycle {
        let (a, b) = emb.ends[e];
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let start = emb.ends[cycle[0]].0;
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[&x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    if seen.len() != adj.len() {
        return Err(Error::NotSimpleCycle);
    }

    let mut outside_face = vec![false; faces.len()];
    let f0 = face_of[emb.outer];
    outside_face[f0] = true;
    let mut stack = vec![f0];
    while let Some(f) = stack.pop() {
        for &d in &faces[f] {
            if in_cycle[d / 2] {
                continue;
            }
            let g = face_of[rev(d)];
            if !outside_face[g] {
                outside_face[g] = true;
                stack.push(g);
            }
        }
    }
    let mut cycle_vertices = Vec::new();
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for v in 0..emb.n {
        if deg[v] == 2 {
            cycle_vertices.push(v);
        } else if let Some(&d) = emb.rotation[v].first() {
            if outside_face[face_of[d]] {
                outside.push(v);
            } else {
                inside.push(v);
            }
        } else {
            outside.push(v);
        }
    }
    Ok(CyclePartition { cycle_vertices, inside, outside, face_outside: outside_face, face_of })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(k: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                e.push((a, b));
            }
        }
        e
    }

    fn cycle(k: usize) -> Vec<(usize, usize)> {
        (0..k).map(|i| (i, (i + 1) % k)).collect()
    }

    pub(crate) fn grid(r: usize, c: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..r {
            for j in 0..c {
                let v = i * c + j;
                if j + 1 < c {
                    e.push((v, v + 1));
                }
                if i + 1 < r {
                    e.push((v, v + c));
                }
            }
        }
        e
    }

    #[test]
    fn k4_has_four_faces() {
        let emb = PlanarEmbedding::new(4, complete(4)).unwrap();
        assert!(emb.check_rotation());
        assert_eq!(emb.faces().0.len(), 4);
        assert_eq!(emb.euler_characteristic(), 2);
    }

    #[test]
    fn k5_and_k33_are_nonplanar() {
        match PlanarEmbedding::new(5, complete(5)) {
            Err(Error::NonPlanar { kind, edges }) => {
                assert_eq!(kind, "K5");
                assert_eq!(edges.len(), 10);
            }
            other => panic!("{other:?}"),
        }
        let mut k33 = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                k33.push((a, b));
            }
        }
        k33.push((0, 1));
        match PlanarEmbedding::new(6, k33) {
            Err(Error::NonPlanar { kind, edges }) => {
                assert_eq!(kind, "K3,3");
                assert_eq!(edges.len(), 9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disconnected_rejected() {
        assert!(matches!(PlanarEmbedding::new(4, vec![(0, 1), (2, 3)]), Err(Error::Disconnected)));
    }

    #[test]
    fn triangulation_counts() {
        let k4 = PlanarEmbedding::new(4, complete(4)).unwrap();
        assert!(k4.triangulate().synthetic_edges().is_empty());
        let c4 = PlanarEmbedding::new(4, cycle(4)).unwrap().triangulate();
        assert_eq!(c4.synthetic_edges().len(), 2);
        let c6 = PlanarEmbedding::new(6, cycle(6)).unwrap().triangulate();
        assert_eq!(c6.synthetic_edges().len(), 6);
        assert!(c6.is_triangulated());
        assert_eq!(c6.euler_characteristic(), 2);
        let g = PlanarEmbedding::new(25, grid(5, 5)).unwrap().triangulate();
        assert!(g.is_triangulated() && g.check_rotation());
        assert_eq!(g.m(), 3 * 25 - 6);
    }

    #[test]
    fn triangulation_of_trees_and_cut_vertices() {
        let star = PlanarEmbedding::new(5, vec![(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap().triangulate();
        assert!(star.is_triangulated());
        assert_eq!(star.m(), 9);
        let bowtie = PlanarEmbedding::new(5, vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(bowtie.euler_characteristic(), 2);
        let t = bowtie.triangulate();
        assert!(t.is_triangulated());
        assert_eq!(t.m(), 9);
    }

    #[test]
    fn fundamental_cycles() {
        let ends = vec![(0, 1), (1, 2), (0, 2)];
        let tree = RootedTree::from_parents(0, &ends, vec![None, Some(0), Some(1)]);
        let (p1, p2) = fundamental_cycle(&tree, &ends, 2).unwrap();
        let mut all: Vec<usize> = p1.into_iter().chain(p2).collect();
        all.sort();
        assert_eq!(all, vec![0, 1]);
        assert!(fundamental_cycle(&tree, &ends, 0).is_err());
        let ends = vec![(0, 1), (0, 2), (0, 3), (1, 2)];
        let tree = RootedTree::from_parents(0, &ends, vec![None, Some(0), Some(1), Some(2)]);
        let (p1, p2) = fundamental_cycle(&tree, &ends, 3).unwrap();
        assert_eq!((p1, p2), (vec![0], vec![1]));
    }

    #[test]
    fn classify_outer_face_cycle() {
        let g = grid(5, 5);
        let emb = PlanarEmbedding::new(25, g.clone()).unwrap();
        let ring: Vec<usize> = g
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| {
                let on = |v: usize| v / 5 == 0 || v / 5 == 4 || v.is_multiple_of(5) || v % 5 == 4;
                on(a) && on(b)
            })
            .map(|(i, _)| i)
            .collect();
        let p = classify_inside_outside(&emb, &ring).unwrap();
        assert_eq!(p.inside.len(), 9);
        assert!(p.outside.is_empty());
        let mid: Vec<usize> = g
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| {
                let on = |v: usize| (1..=3).contains(&(v / 5)) && (1..=3).contains(&(v % 5)) && v != 12;
                on(a) && on(b)
            })
            .map(|(i, _)| i)
            .collect();
        let p = classify_inside_outside(&emb, &mid).unwrap();
        assert_eq!(p.inside, vec![12]);
        assert_eq!(p.outside.len(), 16);
    }

    #[test]
    fn classify_triangle_in_k4() {
        let emb = PlanarEmbedding::new(4, complete(4)).unwrap();
        let tri: Vec<usize> = (0..6).filter(|&e| emb.ends[e].0 != 3 && emb.ends[e].1 != 3).collect();
        let p = classify_inside_outside(&emb, &tri).unwrap();
        assert_eq!(p.inside.len() + p.outside.len(), 1);
        assert!(classify_inside_outside(&emb, &[0, 1]).is_err());
    }
}
