use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INF: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: u64,
    pub weight: u64,
}

impl Edge {
    pub fn new(u: usize, v: usize, length: u64, weight: u64) -> Self {
        Edge { u, v, length, weight }
    }

    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected graph with adjacency lists of (neighbor, edge id).
#[derive(Clone, Debug)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        Graph { n, edges, adj }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn adj(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn weight_of(&self, ids: &[usize]) -> u64 {
        ids.iter().map(|&e| self.edges[e].weight).sum()
    }

    pub fn length_of(&self, ids: &[usize]) -> u64 {
        ids.iter().map(|&e| self.edges[e].length).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.components().iter().all(|&c| c == 0)
    }

    /// Component label per vertex, labels in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Subgraph on the same vertex set keeping only the listed edges (ids renumbered in list order).
    pub fn edge_subgraph(&self, ids: &[usize]) -> Graph {
        Graph::new(self.n, ids.iter().map(|&e| self.edges[e]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Lcmst,
    Lcst,
    Dst,
    Gst,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::Lcmst => "lcmst",
            ProblemKind::Lcst => "lcst",
            ProblemKind::Dst => "dst",
            ProblemKind::Gst => "gst",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcmst" => Ok(ProblemKind::Lcmst),
            "lcst" => Ok(ProblemKind::Lcst),
            "dst" => Ok(ProblemKind::Dst),
            "gst" => Ok(ProblemKind::Gst),
            _ => Err(Error::Invalid(format!("unknown problem kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub kind: ProblemKind,
    pub n: usize,
    pub edges: Vec<Edge>,
    pub root: usize,
    pub h: u64,
    pub terminals: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(kind: ProblemKind, n: usize, edges: Vec<Edge>, root: usize, h: u64) -> Self {
        Instance { kind, n, edges, root, h, terminals: Vec::new(), groups: Vec::new() }
    }

    pub fn directed(&self) -> bool {
        self.kind == ProblemKind::Dst
    }

    pub fn graph(&self) -> Graph {
        Graph::new(self.n, self.edges.clone())
    }

    /// Sorts edges into canonical order and normalizes undirected endpoints to u < v.
    pub fn canonicalize(&mut self) {
        if !self.directed() {
            for e in &mut self.edges {
                if e.u > e.v {
                    std::mem::swap(&mut e.u, &mut e.v);
                }
            }
        }
        self.edges.sort_by_key(|e| (e.u, e.v));
        self.terminals.sort_unstable();
        self.terminals.dedup();
        for g in &mut self.groups {
            g.sort_unstable();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("vertex count must be positive".into()));
        }
        if self.root >= self.n {
            return Err(Error::Invalid("root out of range".into()));
        }
        if self.h == 0 {
            return Err(Error::Invalid("length bound must be positive".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if e.u >= self.n || e.v >= self.n {
                return Err(Error::Invalid("vertex id out of range".into()));
            }
            if e.u == e.v {
                return Err(Error::Invalid(format!("self-loop at {}", e.u)));
            }
            let key = if self.directed() { (e.u, e.v) } else { (e.u.min(e.v), e.u.max(e.v)) };
            if !seen.insert(key) {
                return Err(Error::Invalid(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        if self.terminals.iter().any(|&t| t >= self.n) {
            return Err(Error::Invalid("vertex id out of range".into()));
        }
        let mut members = HashSet::new();
        for g in &self.groups {
            for &v in g {
                if v >= self.n {
                    return Err(Error::Invalid("vertex id out of range".into()));
                }
                if !members.insert(v) {
                    return Err(Error::Invalid(format!("overlapping groups at vertex {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut inst = self.clone();
        inst.canonicalize();
        let mut s = String::new();
        let _ = writeln!(s, "p {} {} {} {} {}", inst.kind, inst.n, inst.edges.len(), inst.h, inst.root);
        for e in &inst.edges {
            let _ = writeln!(s, "e {} {} {} {}", e.u, e.v, e.length, e.weight);
        }
        for t in &inst.terminals {
            let _ = writeln!(s, "t {t}");
        }
        for g in &inst.groups {
            let items: Vec<String> = g.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "g {}", items.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Instance> {
        let mut header: Option<(ProblemKind, usize, usize, u64, usize)> = None;
        let mut edges = Vec::new();
        let mut terminals = Vec::new();
        let mut groups = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let syntax = |msg: &str| Error::Syntax { line: line_no, msg: msg.to_string() };
            let num = |t: &str| -> Result<u64> {
                t.parse::<u64>().map_err(|_| Error::Syntax { line: line_no, msg: format!("expected nonnegative integer, got '{t}'") })
            };
            match toks[0] {
                "p" => {
                    if header.is_some() {
                        return Err(syntax("duplicate header"));
                    }
                    if toks.len() != 6 {
                        return Err(syntax("header must be 'p <kind> <n> <m> <h> <root>'"));
                    }
                    let kind = toks[1].parse::<ProblemKind>().map_err(|_| syntax("unknown problem kind"))?;
                    header = Some((kind, num(toks[2])? as usize, num(toks[3])? as usize, num(toks[4])?, num(toks[5])? as usize));
                }
                "e" => {
                    if header.is_none() {
                        return Err(syntax("edge before header"));
                    }
                    if toks.len() != 5 {
                        return Err(syntax("edge must be 'e <u> <v> <length> <weight>'"));
                    }
                    edges.push(Edge::new(num(toks[1])? as usize, num(toks[2])? as usize, num(toks[3])?, num(toks[4])?));
                }
                "t" => {
                    if toks.len() != 2 {
                        return Err(syntax("terminal must be 't <v>'"));
                    }
                    terminals.push(num(toks[1])? as usize);
                }
                "g" => {
                    if toks.len() < 2 {
                        return Err(syntax("empty group"));
                    }
                    let g: Result<Vec<usize>> = toks[1..].iter().map(|t| num(t).map(|x| x as usize)).collect();
                    groups.push(g?);
                }
                other => return Err(syntax(&format!("unknown line type '{other}'"))),
            }
        }
        let (kind, n, m, h, root) = header.ok_or(Error::Syntax { line: 0, msg: "missing header".into() })?;
        if m != edges.len() {
            return Err(Error::Invalid(format!("header declares {m} edges, found {}", edges.len())));
        }
        let mut inst = Instance { kind, n, edges, root, h, terminals, groups };
        inst.validate()?;
        inst.canonicalize();
        Ok(inst)
    }

    pub fn is_terminal_kind(&self) -> bool {
        matches!(self.kind, ProblemKind::Lcst | ProblemKind::Dst)
    }
}

/// Vertex set touched by a set of edges.
pub fn vertices_of(edges: &[Edge], ids: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut s = BTreeSet::new();
    for e in ids {
        s.insert(edges[e].u);
        s.insert(edges[e].v);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_edge() {
        let inst = Instance::parse("p lcmst 2 1 5 0\ne 0 1 3 7\n").unwrap();
        assert_eq!(inst.n, 2);
        assert_eq!(inst.h, 5);
        assert_eq!(inst.root, 0);
        assert_eq!(inst.edges, vec![Edge::new(0, 1, 3, 7)]);
    }

    #[test]
    fn out_of_range_vertex() {
        let err = Instance::parse("p lcmst 3 1 5 0\ne 0 5 1 1\n").unwrap_err();
        assert!(err.to_string().contains("vertex id out of range"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = Instance::parse("# c\np lcmst 3 1 5 0\ne 0 x 1 1\n").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        assert!(Instance::parse("p lcmst 3 1 5 0\ne 0 1 -1 1\n").is_err());
    }

    #[test]
    fn rejects_duplicates_loops_overlap() {
        assert!(Instance::parse("p lcmst 3 2 5 0\ne 0 1 1 1\ne 1 0 1 1\n").is_err());
        assert!(Instance::parse("p lcmst 3 1 5 0\ne 1 1 1 1\n").is_err());
        assert!(Instance::parse("p gst 3 1 5 0\ne 0 1 1 1\ng 1 2\ng 2\n").is_err());
        assert!(Instance::parse("p lcmst 3 1 5 3\ne 0 1 1 1\n").is_err());
        let d = Instance::parse("p dst 2 2 5 0\ne 0 1 1 1\ne 1 0 1 1\nt 1\n").unwrap();
        assert_eq!(d.edges.len(), 2);
    }

    #[test]
    fn roundtrip_is_canonical() {
        let text = "p lcst 4 3 6 0\ne 3 2 1 1\ne 1 0 2 2\ne 2 1 0 4\nt 3\nt 2\n";
        let inst = Instance::parse(text).unwrap();
        let s = inst.serialize();
        assert_eq!(Instance::parse(&s).unwrap().serialize(), s);
        assert!(s.starts_with("p lcst 4 3 6 0\ne 0 1 2 2\ne 1 2 0 4\ne 2 3 1 1\nt 2\nt 3\n"));
    }
}
