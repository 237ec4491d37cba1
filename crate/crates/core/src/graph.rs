//! Undirected simple graphs and dataset ingestion.
//!
//! `Graph` stores both a CSR neighbor layout (fast iteration) and a packed
//! adjacency bit matrix (O(1) edge tests). Graphs are immutable once built,
//! so they can be shared freely across worker threads.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    bits: Vec<u64>,
    words: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices from an undirected edge list.
    /// Duplicate and reversed pairs collapse to a single edge.
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self::from_edge_set(n, &set))
    }

    fn from_edge_set(n: usize, set: &BTreeSet<(u32, u32)>) -> Self {
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        let mut degree = vec![0u32; n];
        for &(u, v) in set {
            bits[u as usize * words + v as usize / 64] |= 1 << (v % 64);
            bits[v as usize * words + u as usize / 64] |= 1 << (u % 64);
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for v in 0..n {
            offsets.push(offsets[v] + degree[v]);
        }
        let mut neighbors = vec![0u32; offsets[n] as usize];
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        for &(u, v) in set {
            neighbors[cursor[u as usize] as usize] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize] as usize] = u;
            cursor[v as usize] += 1;
        }
        Graph {
            n,
            offsets,
            neighbors,
            bits,
            words,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.bits[u as usize * self.words + v as usize / 64] >> (v % 64) & 1 == 1
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    /// Undirected edges as (u, v) with u < v, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u < v)
    }

    /// True iff a single traversal component covers every vertex.
    /// The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut reached = 1usize;
        while let Some(v) = stack.pop() {
            for &u in self.neighbors(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        reached == self.n
    }

    /// Subgraph on `vertices` keeping exactly the edges among them.
    /// Output vertex `i` corresponds to `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[u32]) -> Result<Graph> {
        let mut seen = BTreeSet::new();
        for &v in vertices {
            if v as usize >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} out of range for {} vertices",
                    self.n
                )));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidArgument(format!("duplicate vertex {v}")));
            }
        }
        let mut edges = BTreeSet::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    edges.insert((i as u32, j as u32));
                }
            }
        }
        Ok(Graph::from_edge_set(vertices.len(), &edges))
    }

    /// Serializes in the minimal edge-list format accepted by
    /// [`parse_edge_list`]: a "n m" header followed by one "u v" line per edge.
    pub fn edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.num_edges());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses the minimal edge-list text format: first line "n m", then m lines
/// "u v" with 0-based endpoints. Duplicate edges collapse.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty edge-list input".into()))?;
    let mut it = header.split_whitespace();
    let (n, m) = match (it.next(), it.next(), it.next()) {
        (Some(n), Some(m), None) => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Format(format!("bad vertex count {n:?}")))?;
            let m: usize = m
                .parse()
                .map_err(|_| Error::Format(format!("bad edge count {m:?}")))?;
            (n, m)
        }
        _ => return Err(Error::Format(format!("bad header line {header:?}"))),
    };
    let mut edges = Vec::with_capacity(m);
    for (i, line) in lines.enumerate() {
        if i >= m {
            return Err(Error::Format(format!("more than {m} edge lines")));
        }
        let mut it = line.split_whitespace();
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(u), Some(v), None) => {
                let u: u32 = u
                    .parse()
                    .map_err(|_| Error::Format(format!("bad endpoint {u:?} on edge line {}", i + 1)))?;
                let v: u32 = v
                    .parse()
                    .map_err(|_| Error::Format(format!("bad endpoint {v:?} on edge line {}", i + 1)))?;
                (u, v)
            }
            _ => return Err(Error::Format(format!("bad edge line {line:?}"))),
        };
        if u == v {
            return Err(Error::Format(format!("self-loop {u} on edge line {}", i + 1)));
        }
        if u as usize >= n || v as usize >= n {
            return Err(Error::Format(format!(
                "endpoint out of range on edge line {line_no}: ({u}, {v}) with n={n}",
                line_no = i + 1
            )));
        }
        edges.push((u, v));
    }
    if edges.len() < m {
        return Err(Error::Format(format!(
            "expected {m} edge lines, found {}",
            edges.len()
        )));
    }
    Graph::new(n, &edges)
}

/// A labeled set of graphs loaded from one dataset.
#[derive(Debug, Clone)]
pub struct GraphCollection {
    pub graphs: Vec<Graph>,
    pub labels: Vec<i64>,
    pub name: String,
}

impl GraphCollection {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a dataset in the TU Dortmund benchmark layout: `<DS>_A.txt`
/// (1-indexed "u, v" edge lines), `<DS>_graph_indicator.txt` (graph id per
/// node) and `<DS>_graph_labels.txt` (class label per graph), all under
/// `dir`. Node and edge label files are ignored. Reversed and duplicate
/// edge lines collapse to one undirected edge.
pub fn parse_tu_dataset(dir: &Path, name: &str) -> Result<GraphCollection> {
    let indicator_path = dir.join(format!("{name}_graph_indicator.txt"));
    let adjacency_path = dir.join(format!("{name}_A.txt"));
    let labels_path = dir.join(format!("{name}_graph_labels.txt"));

    let indicator = read_file(&indicator_path)?;
    let adjacency = read_file(&adjacency_path)?;
    let labels_text = read_file(&labels_path)?;

    for suffix in ["node_labels", "edge_labels", "node_attributes", "edge_attributes"] {
        if dir.join(format!("{name}_{suffix}.txt")).exists() {
            log::info!("{name}: ignoring {name}_{suffix}.txt (labels/attributes unused)");
        }
    }

    // graph id per node, 1-indexed on both sides
    let mut node_graph: Vec<u32> = Vec::new();
    for (i, line) in indicator.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let g: u32 = line.parse().map_err(|_| {
            Error::Format(format!(
                "{}: bad graph id {line:?} on line {}",
                indicator_path.display(),
                i + 1
            ))
        })?;
        if g == 0 {
            return Err(Error::Format(format!(
                "{}: graph ids are 1-indexed, got 0 on line {}",
                indicator_path.display(),
                i + 1
            )));
        }
        node_graph.push(g - 1);
    }
    let num_graphs = match node_graph.iter().max() {
        Some(&m) => m as usize + 1,
        None => {
            return Err(Error::Format(format!(
                "{}: no nodes",
                indicator_path.display()
            )))
        }
    };

    // dense per-graph vertex ids, assigned in node-id order
    let mut local_id: Vec<u32> = vec![0; node_graph.len()];
    let mut graph_sizes: Vec<u32> = vec![0; num_graphs];
    for (node, &g) in node_graph.iter().enumerate() {
        local_id[node] = graph_sizes[g as usize];
        graph_sizes[g as usize] += 1;
    }

    let mut edge_sets: Vec<BTreeSet<(u32, u32)>> = vec![BTreeSet::new(); num_graphs];
    for (i, line) in adjacency.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => {
                return Err(Error::Format(format!(
                    "{}: bad edge line {} ({line:?})",
                    adjacency_path.display(),
                    i + 1
                )))
            }
        };
        let parse_node = |s: &str| -> Result<usize> {
            let id: usize = s.parse().map_err(|_| {
                Error::Format(format!(
                    "{}: bad node id {s:?} on line {}",
                    adjacency_path.display(),
                    i + 1
                ))
            })?;
            if id == 0 || id > node_graph.len() {
                return Err(Error::Format(format!(
                    "{}: node id {id} out of range on line {}",
                    adjacency_path.display(),
                    i + 1
                )));
            }
            Ok(id - 1)
        };
        let u = parse_node(u)?;
        let v = parse_node(v)?;
        let g = node_graph[u];
        if node_graph[v] != g {
            return Err(Error::Format(format!(
                "{}: edge on line {} joins nodes of different graphs ({} and {})",
                adjacency_path.display(),
                i + 1,
                g + 1,
                node_graph[v] + 1
            )));
        }
        if u != v {
            let (a, b) = (local_id[u].min(local_id[v]), local_id[u].max(local_id[v]));
            edge_sets[g as usize].insert((a, b));
        }
    }

    let mut labels = Vec::with_capacity(num_graphs);
    for (i, line) in labels_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let label: i64 = line.parse().map_err(|_| {
            Error::Format(format!(
                "{}: bad label {line:?} on line {}",
                labels_path.display(),
                i + 1
            ))
        })?;
        labels.push(label);
    }
    if labels.len() != num_graphs {
        return Err(Error::Format(format!(
            "{}: {} labels for {} graphs",
            labels_path.display(),
            labels.len(),
            num_graphs
        )));
    }

    let graphs = graph_sizes
        .iter()
        .zip(&edge_sets)
        .map(|(&sz, set)| Graph::from_edge_set(sz as usize, set))
        .collect();

    Ok(GraphCollection {
        graphs,
        labels,
        name: name.to_string(),
    })
}
