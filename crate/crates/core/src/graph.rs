//! Dependency graphs and colorings.
//!
//! Vertices are dense ids `0..n`. Any proper coloring splits the vertex set
//! into independent sets, and the number of colors is what enters the tail
//! bound, so both an exact chromatic number (small graphs) and a greedy upper
//! bound (any graph) are provided.

use std::fmt::Write as _;

use crate::bounds::ColorClassSizes;
use crate::{Error, Result};

/// Default size limit for [`exact_chromatic_number`].
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    adj: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Graph on `n` vertices without edges.
    pub fn edgeless(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list. Self-loops, duplicate edges (in
    /// either orientation) and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::GraphFormat(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::GraphFormat(format!(
                    "duplicate edge {}-{}",
                    u.min(w[0]),
                    u.max(w[0])
                )));
            }
        }
        Ok(Self { adj })
    }

    /// Parses the text format: a header line `n m` followed by `m` lines
    /// `u v` with `0 <= u < v < n`. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::GraphFormat("missing header line \"n m\"".into()))?;
        let (n, m) = parse_pair(header, 1)?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let (u, v) = parse_pair(line, idx + 1)?;
            if u >= v {
                return Err(Error::GraphFormat(format!(
                    "line {}: expected u < v, got \"{line}\"",
                    idx + 1
                )));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::GraphFormat(format!(
                "header declares {m} edges but {} were given",
                edges.len()
            )));
        }
        Self::from_edges(n, &edges)
    }

    /// Serializes to the text format accepted by [`DependencyGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj
            .get(u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
        }
        Ok(())
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(Error::GraphFormat(format!(
            "line {line_no}: expected two nonnegative integers, got \"{line}\""
        ))),
    }
}

/// A proper coloring using every color id in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    assignment: Vec<usize>,
    k: usize,
}

impl Coloring {
    /// Validates that `assignment` is a proper coloring of `g` whose colors
    /// are exactly `0..k` for some `k`.
    pub fn from_assignment(g: &DependencyGraph, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != g.n() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} entries for a graph on {} vertices",
                assignment.len(),
                g.n()
            )));
        }
        if let Some((u, v)) = g.edges().find(|&(u, v)| assignment[u] == assignment[v]) {
            return Err(Error::ImproperColoring(u, v));
        }
        let k = assignment.iter().max().map_or(0, |&c| c + 1);
        let mut used = vec![false; k];
        for &c in &assignment {
            used[c] = true;
        }
        if let Some(c) = used.iter().position(|&u| !u) {
            return Err(Error::UnusedColor(c));
        }
        Ok(Self { assignment, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn color(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Vertices of each color, in ascending color id and vertex id.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            classes[c].push(v);
        }
        classes
    }

    /// Class sizes in ascending color id. Fails only for the empty graph.
    pub fn class_sizes(&self) -> Result<ColorClassSizes> {
        ColorClassSizes::new(self.classes().iter().map(|c| c.len() as u64).collect())
    }
}

/// `true` iff no two vertices of `set` are adjacent.
pub fn is_independent_set(g: &DependencyGraph, set: &[usize]) -> Result<bool> {
    for &v in set {
        g.check_vertex(v)?;
    }
    for (i, &u) in set.iter().enumerate() {
        if set[i + 1..].iter().any(|&v| g.has_edge(u, v)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Vertex visiting order for [`greedy_coloring`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyOrder {
    #[default]
    Natural,
    /// Highest degree first, ties by vertex id.
    DegreeDescending,
}

/// First-fit coloring: each vertex gets the smallest color not used by an
/// already colored neighbor. Uses at most `max_degree + 1` colors.
pub fn greedy_coloring(g: &DependencyGraph, order: GreedyOrder) -> Coloring {
    let mut vertices: Vec<usize> = (0..g.n()).collect();
    if order == GreedyOrder::DegreeDescending {
        vertices.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    }
    let mut assignment = vec![usize::MAX; g.n()];
    let mut taken = vec![false; g.max_degree() + 1];
    let mut k = 0;
    for v in vertices {
        taken.iter_mut().for_each(|x| *x = false);
        for &w in g.neighbors(v) {
            if let Some(slot) = taken.get_mut(assignment[w]) {
                *slot = true;
            }
        }
        let c = taken.iter().position(|&x| !x).expect("degree + 1 slots");
        assignment[v] = c;
        k = k.max(c + 1);
    }
    Coloring { assignment, k }
}

/// Greedily grown clique: repeatedly add the highest-degree vertex adjacent
/// to everything chosen so far. Its size is a lower bound on the chromatic
/// number.
pub fn greedy_clique(g: &DependencyGraph) -> Vec<usize> {
    let mut best = Vec::new();
    for start in 0..g.n() {
        let mut clique = vec![start];
        let mut candidates: Vec<usize> = g.neighbors(start).to_vec();
        while !candidates.is_empty() {
            let &next = candidates
                .iter()
                .max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v)))
                .expect("nonempty");
            clique.push(next);
            candidates.retain(|&v| v != next && g.has_edge(v, next));
        }
        if clique.len() > best.len() {
            clique.sort_unstable();
            best = clique;
        }
    }
    best
}

/// Exact chromatic number by branch and bound.
///
/// Vertices are colored in degree-descending order; a branch is cut as soon
/// as it needs as many colors as the best coloring found so far. The search
/// starts from the greedy bound and stops early at the clique lower bound.
pub fn exact_chromatic_number(g: &DependencyGraph, vertex_limit: usize) -> Result<usize> {
    if g.n() > vertex_limit {
        return Err(Error::TooLargeForExact { n: g.n(), limit: vertex_limit });
    }
    if g.n() == 0 {
        return Ok(0);
    }
    let upper = greedy_coloring(g, GreedyOrder::DegreeDescending)
        .k()
        .min(greedy_coloring(g, GreedyOrder::Natural).k());
    let lower = greedy_clique(g).len();
    if lower == upper {
        return Ok(upper);
    }
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut search = ColorSearch {
        g,
        order,
        assignment: vec![usize::MAX; g.n()],
        best: upper,
        lower,
    };
    search.descend(0, 0);
    Ok(search.best)
}

struct ColorSearch<'a> {
    g: &'a DependencyGraph,
    order: Vec<usize>,
    assignment: Vec<usize>,
    best: usize,
    lower: usize,
}

impl ColorSearch<'_> {
    /// Returns `true` once the lower bound is reached.
    fn descend(&mut self, depth: usize, used: usize) -> bool {
        if depth == self.order.len() {
            self.best = used;
            return self.best == self.lower;
        }
        let v = self.order[depth];
        // A fresh color is only useful if it keeps us below the incumbent.
        let limit = (used + 1).min(self.best - 1);
        for c in 0..limit {
            if self.g.neighbors(v).iter().any(|&w| self.assignment[w] == c) {
                continue;
            }
            self.assignment[v] = c;
            if self.descend(depth + 1, used.max(c + 1)) {
                return true;
            }
            self.assignment[v] = usize::MAX;
        }
        false
    }
}

/// Disjoint union of `num_blocks` cliques of `block_size` vertices each;
/// block `b` holds vertices `b*block_size..(b+1)*block_size`.
pub fn make_clique_blocks(num_blocks: usize, block_size: usize) -> Result<DependencyGraph> {
    if num_blocks == 0 || block_size == 0 {
        return Err(Error::InvalidArgument(
            "num_blocks and block_size must be at least 1".into(),
        ));
    }
    let mut edges = Vec::with_capacity(num_blocks * block_size * (block_size - 1) / 2);
    for b in 0..num_blocks {
        let base = b * block_size;
        for i in 0..block_size {
            for j in i + 1..block_size {
                edges.push((base + i, base + j));
            }
        }
    }
    DependencyGraph::from_edges(num_blocks * block_size, &edges)
}

/// Dependency graph of the length-`d` windows of a string of `n_positions`
/// letters. Vertex `i` is the window starting at position `i` (0-based);
/// two windows are adjacent iff they share a letter, i.e. `|i - j| < d`.
/// If `d > n_positions` there are no windows.
pub fn make_window_overlap_graph(n_positions: usize, d: usize) -> Result<DependencyGraph> {
    if n_positions == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "n_positions and d must be at least 1".into(),
        ));
    }
    let windows = (n_positions + 1).saturating_sub(d);
    let mut edges = Vec::new();
    for i in 0..windows {
        for j in i + 1..windows.min(i + d) {
            edges.push((i, j));
        }
    }
    DependencyGraph::from_edges(windows, &edges)
}
