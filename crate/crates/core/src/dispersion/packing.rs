//! Graph shrinking: collapse a graph onto an independent set of representatives so that
//! the pairs inside each collapsed group never outnumber the original edges.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Unordered edge `(i, j)` with `i < j`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedGraph {
    pub n: usize,
    /// The representative set `T`, ascending.
    pub representatives: Vec<usize>,
    /// `φ`: representative assigned to each vertex.
    pub assignment: Vec<usize>,
    /// `n_u` for `u ∈ T`, zero for every other vertex.
    pub multiplicity: Vec<usize>,
    pub edge_count: usize,
}

impl PackedGraph {
    pub fn is_representative(&self, v: usize) -> bool {
        self.assignment.get(v) == Some(&v)
    }

    /// `Σ_{u∈T} C(n_u, 2)`.
    pub fn collapsed_pairs(&self) -> u64 {
        self.representatives
            .iter()
            .map(|&u| {
                let m = self.multiplicity[u] as u64;
                m * m.saturating_sub(1) / 2
            })
            .sum()
    }
}

fn degrees_and_adjacency(n: usize, edges: &[Edge]) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut seen = HashSet::with_capacity(edges.len());
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::param(format!("edge ({a}, {b}) out of range for {n} vertices")));
        }
        if a == b {
            return Err(Error::param(format!("self-loop at vertex {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::param(format!("duplicate edge ({a}, {b})")));
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let degrees = adjacency.iter().map(Vec::len).collect();
    Ok((degrees, adjacency))
}

/// Builds `T` and `φ`.
///
/// Vertices are visited by ascending original degree (ties by index). A vertex adjacent to
/// an already chosen representative joins the one of least degree (ties by index);
/// otherwise it becomes a representative itself.
pub fn pack_graph(n: usize, edges: &[Edge]) -> Result<PackedGraph> {
    let (degree, adjacency) = degrees_and_adjacency(n, edges)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (degree[v], v));

    let mut chosen = vec![false; n];
    let mut assignment = vec![usize::MAX; n];
    let mut representatives = Vec::new();
    for &v in &order {
        let target = adjacency[v]
            .iter()
            .copied()
            .filter(|&u| chosen[u])
            .min_by_key(|&u| (degree[u], u));
        match target {
            Some(u) => assignment[v] = u,
            None => {
                chosen[v] = true;
                assignment[v] = v;
                representatives.push(v);
            }
        }
    }
    representatives.sort_unstable();

    let mut multiplicity = vec![0usize; n];
    for &u in &assignment {
        multiplicity[u] += 1;
    }
    Ok(PackedGraph { n, representatives, assignment, multiplicity, edge_count: edges.len() })
}

/// Why a [`PackedGraph`] fails [`verify_packing`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackingViolation {
    MalformedGraph(String),
    SizeMismatch,
    RepresentativeNotFixed(usize),
    AssignedOutsideSet { vertex: usize, target: usize },
    NotAdjacent { vertex: usize, target: usize },
    AdjacentRepresentatives(usize, usize),
    MultiplicityMismatch(usize),
    MultiplicitySum { total: usize, n: usize },
    PairBudgetExceeded { collapsed_pairs: u64, edges: u64 },
}

impl fmt::Display for PackingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackingViolation::MalformedGraph(msg) => write!(f, "malformed graph: {msg}"),
            PackingViolation::SizeMismatch => f.write_str("vertex count does not match"),
            PackingViolation::RepresentativeNotFixed(u) => write!(f, "representative {u} is not mapped to itself"),
            PackingViolation::AssignedOutsideSet { vertex, target } => {
                write!(f, "vertex {vertex} mapped to non-representative {target}")
            }
            PackingViolation::NotAdjacent { vertex, target } => {
                write!(f, "vertex {vertex} mapped to non-neighbour {target}")
            }
            PackingViolation::AdjacentRepresentatives(a, b) => write!(f, "representatives {a} and {b} are adjacent"),
            PackingViolation::MultiplicityMismatch(u) => write!(f, "multiplicity of {u} does not match assignment"),
            PackingViolation::MultiplicitySum { total, n } => write!(f, "multiplicities sum to {total}, expected {n}"),
            PackingViolation::PairBudgetExceeded { collapsed_pairs, edges } => {
                write!(f, "collapsed pairs {collapsed_pairs} exceed edge count {edges}")
            }
        }
    }
}

/// Checks the three packing conditions against the original edge list:
/// representatives are fixed points and every other vertex maps along an edge into `T`;
/// `T` is independent; `Σ C(n_u, 2) ≤ |E|`. Multiplicities must agree with `φ`.
pub fn verify_packing(g: &PackedGraph, edges: &[Edge]) -> Result<(), PackingViolation> {
    let edge_set: HashSet<Edge> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if edge_set.len() != edges.len() || edges.iter().any(|&(a, b)| a == b || a >= g.n || b >= g.n) {
        return Err(PackingViolation::MalformedGraph("edges must be distinct, in range, without loops".into()));
    }
    if g.assignment.len() != g.n || g.multiplicity.len() != g.n {
        return Err(PackingViolation::SizeMismatch);
    }
    let in_set: HashSet<usize> = g.representatives.iter().copied().collect();
    for &u in &g.representatives {
        if u >= g.n || g.assignment[u] != u {
            return Err(PackingViolation::RepresentativeNotFixed(u));
        }
    }
    let adjacent = |a: usize, b: usize| edge_set.contains(&(a.min(b), a.max(b)));
    for (v, &target) in g.assignment.iter().enumerate() {
        if !in_set.contains(&target) {
            return Err(PackingViolation::AssignedOutsideSet { vertex: v, target });
        }
        if target != v && !adjacent(v, target) {
            return Err(PackingViolation::NotAdjacent { vertex: v, target });
        }
    }
    for &(a, b) in &edge_set {
        if in_set.contains(&a) && in_set.contains(&b) {
            return Err(PackingViolation::AdjacentRepresentatives(a, b));
        }
    }
    let mut counted = vec![0usize; g.n];
    for &target in &g.assignment {
        counted[target] += 1;
    }
    for (u, (&have, &want)) in g.multiplicity.iter().zip(&counted).enumerate() {
        if have != want {
            return Err(PackingViolation::MultiplicityMismatch(u));
        }
    }
    let total: usize = g.representatives.iter().map(|&u| g.multiplicity[u]).sum();
    if total != g.n {
        return Err(PackingViolation::MultiplicitySum { total, n: g.n });
    }
    let collapsed_pairs = g.collapsed_pairs();
    let edges = edges.len() as u64;
    if collapsed_pairs > edges {
        return Err(PackingViolation::PairBudgetExceeded { collapsed_pairs, edges });
    }
    Ok(())
}

/// One `i,j` line per edge.
pub fn write_edges<W: Write>(edges: &[Edge], mut w: W) -> Result<()> {
    for &(a, b) in edges {
        writeln!(w, "{},{}", a.min(b), a.max(b))?;
    }
    Ok(())
}

pub fn read_edges<R: BufRead>(r: R) -> Result<Vec<Edge>> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(format!("line {}: bad vertex {s:?}", lineno + 1)))
        };
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::format(format!("line {}: expected \"i,j\"", lineno + 1)))?;
        let (a, b) = (parse(a)?, parse(b)?);
        if a >= b {
            return Err(Error::format(format!("line {}: expected i < j, got {a},{b}", lineno + 1)));
        }
        out.push((a, b));
    }
    Ok(out)
}
