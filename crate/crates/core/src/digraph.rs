use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::INF;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
}

#[derive(Clone, Debug)]
pub struct Digraph {
    pub n: usize,
    pub arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, arcs: Vec<Arc>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (i, a) in arcs.iter().enumerate() {
            out[a.from].push(i);
            inc[a.to].push(i);
        }
        Digraph { n, arcs, out, inc }
    }

    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Forward Dijkstra by weight: distances and the arc used to reach each node.
    pub fn from_source(&self, s: usize) -> (Vec<u64>, Vec<usize>) {
        self.dijkstra(s, false)
    }

    /// Reverse Dijkstra: distance from every node to `t` and the first arc on that path.
    pub fn to_target(&self, t: usize) -> (Vec<u64>, Vec<usize>) {
        self.dijkstra(t, true)
    }

    fn dijkstra(&self, s: usize, reverse: bool) -> (Vec<u64>, Vec<usize>) {
        let mut dist = vec![INF; self.n];
        let mut via = vec![usize::MAX; self.n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0;
        heap.push(Reverse((0u64, s)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if d != dist[x] {
                continue;
            }
            let list = if reverse { &self.inc[x] } else { &self.out[x] };
            for &a in list {
                let arc = self.arcs[a];
                let y = if reverse { arc.from } else { arc.to };
                let c = d + arc.weight;
                if c < dist[y] {
                    heap.push(Reverse((c, y)));
                    dist[y] = c;
                    via[y] = a;
                }
            }
        }
        (dist, via)
    }

    /// Nodes reachable from `s`.
    pub fn reachable(&self, s: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &a in &self.out[x] {
                if !allowed(a) {
                    continue;
                }
                let y = self.arcs[a].to;
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }
}
