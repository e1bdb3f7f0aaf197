//! Undirected, unweighted graphs and the propagation operators derived from
//! their adjacency structure.
//!
//! Three operators are built here and consumed everywhere else:
//!
//! - [`normalized_adjacency`]: `D̃^{-1/2} (A + I) D̃^{-1/2}`, the symmetric
//!   operator of the spectral graph convolution layer.
//! - [`random_walk_matrix`]: the column-stochastic walk `Ã D̃^{-1}` (with or
//!   without self-loops).
//! - [`lazy_walk_matrix`]: `½ m + ½ I`, the operator produced by stacking
//!   naive-residual layers with identity weights.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::io::BufRead;

use thiserror::Error;

use crate::sparse::{SparseError, SparseMatrix};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("a graph needs at least one node")]
    Empty,
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("node {0} is isolated; a walk without self-loops has no transition out of it")]
    DegenerateColumn(usize),
    #[error("line {line}: expected two node identifiers, found {found:?}")]
    MalformedEdgeLine { line: usize, found: String },
    #[error("edge list contains no edges")]
    NoEdges,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// Immutable undirected graph on nodes `0..n`.
///
/// Edges are stored once, as `(i, j)` with `i < j`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    /// Sorted neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Component id per node, numbered in order of the smallest node index.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.neighbors[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Nodes of the largest connected component (ties go to the component
    /// holding the smallest node index), in ascending order.
    pub fn largest_component(&self) -> Vec<usize> {
        let comp = self.components();
        let count = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c] += 1;
        }
        let best = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)));
        match best {
            Some(b) => (0..self.n).filter(|&i| comp[i] == b).collect(),
            None => Vec::new(),
        }
    }

    /// Induced subgraph on `nodes`, relabelled `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph, GraphError> {
        let index: HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let edges = self.edges.iter().filter_map(|&(a, b)| {
            Some((*index.get(&a)?, *index.get(&b)?))
        });
        build_graph(nodes.len(), edges)
    }
}

/// Builds a graph from an edge list. Self-pairs are dropped and duplicate or
/// reversed pairs are merged.
pub fn build_graph(
    n: usize,
    edge_list: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut set = BTreeSet::new();
    for (a, b) in edge_list {
        if a >= n || b >= n {
            return Err(GraphError::EdgeOutOfRange(a, b, n));
        }
        if a != b {
            set.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize)> = set.into_iter().collect();
    let mut neighbors = vec![Vec::new(); n];
    for &(a, b) in &edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let degree = neighbors.iter().map(Vec::len).collect();
    Ok(Graph {
        n,
        edges,
        degree,
        neighbors,
    })
}

/// Parses the plain edge-list format: one edge per line, two
/// whitespace-separated identifiers. Identifiers are mapped to dense indices
/// in first-seen order; blank lines and `#` comments are skipped.
pub fn parse_edge_list(reader: impl BufRead) -> Result<(Graph, Vec<String>), GraphError> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut pairs = Vec::new();
    let mut intern = |s: &str, ids: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(s) {
            return i;
        }
        let i = ids.len();
        ids.push(s.to_owned());
        index.insert(s.to_owned(), i);
        i
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => {
                let a = intern(a, &mut ids);
                let b = intern(b, &mut ids);
                pairs.push((a, b));
            }
            _ => {
                return Err(GraphError::MalformedEdgeLine {
                    line: lineno + 1,
                    found: trimmed.to_owned(),
                })
            }
        }
    }
    if ids.is_empty() {
        return Err(GraphError::NoEdges);
    }
    let graph = build_graph(ids.len(), pairs)?;
    Ok((graph, ids))
}

/// Symmetric normalized adjacency with self-loops, `D̃^{-1/2} (A + I) D̃^{-1/2}`.
pub fn normalized_adjacency(g: &Graph) -> SparseMatrix {
    symmetric_walk_matrix(g, true).expect("self-loops make every degree positive")
}

/// `D^{-1/2} A' D^{-1/2}` where `A'` is `A + I` or `A`. This is the symmetric
/// operator similar to [`random_walk_matrix`] with the same flag, and shares
/// its spectrum.
pub fn symmetric_walk_matrix(g: &Graph, add_self_loops: bool) -> Result<SparseMatrix, GraphError> {
    let deg = walk_degrees(g, add_self_loops)?;
    let weight = |a: usize, b: usize| 1.0 / ((deg[a] * deg[b]) as f64).sqrt();
    let off = g.edges.iter().flat_map(|&(a, b)| {
        let v = weight(a, b);
        [(a, b, v), (b, a, v)]
    });
    let diag = (0..g.n)
        .filter(|_| add_self_loops)
        .map(|i| (i, i, 1.0 / deg[i] as f64));
    Ok(SparseMatrix::from_triplets(g.n, g.n, off.chain(diag))?)
}

/// Column-stochastic walk `Ã D̃^{-1}`: entry `(i, j)` is `Ã(i, j) / d̃(j)`.
///
/// Without self-loops every node must have at least one neighbour.
pub fn random_walk_matrix(g: &Graph, add_self_loops: bool) -> Result<SparseMatrix, GraphError> {
    let deg = walk_degrees(g, add_self_loops)?;
    let off = g
        .edges
        .iter()
        .flat_map(|&(a, b)| [(a, b, 1.0 / deg[b] as f64), (b, a, 1.0 / deg[a] as f64)]);
    let diag = (0..g.n)
        .filter(|_| add_self_loops)
        .map(|i| (i, i, 1.0 / deg[i] as f64));
    Ok(SparseMatrix::from_triplets(g.n, g.n, off.chain(diag))?)
}

/// Lazy version of a square operator: `½ m + ½ I`.
pub fn lazy_walk_matrix(m: &SparseMatrix) -> Result<SparseMatrix, SparseError> {
    m.scale_add_identity(0.5, 0.5)
}

/// Walk degrees `d(i) (+1 with self-loops)`.
pub fn walk_degrees(g: &Graph, add_self_loops: bool) -> Result<Vec<usize>, GraphError> {
    g.degree
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let d = d + usize::from(add_self_loops);
            if d == 0 {
                Err(GraphError::DegenerateColumn(i))
            } else {
                Ok(d)
            }
        })
        .collect()
}

/// Connectivity by breadth-first traversal. A single node is connected; an
/// edgeless graph with more than one node is not.
pub fn is_connected(g: &Graph) -> bool {
    g.components().iter().all(|&c| c == 0)
}

/// Bipartiteness by 2-colouring every component.
pub fn is_bipartite(g: &Graph) -> bool {
    let mut color: Vec<Option<bool>> = vec![None; g.n];
    let mut queue = VecDeque::new();
    for start in 0..g.n {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].expect("queued nodes are coloured");
            for &v in &g.neighbors[u] {
                match color[v] {
                    None => {
                        color[v] = Some(!cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}
