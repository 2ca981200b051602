//! Network layers: ring lattices, preferential-attachment graphs, label
//! shuffling and layer merging.
//!
//! A [`Graph`] is an immutable undirected simple graph over nodes
//! `0..node_count`. Neighbour lists are kept sorted so that every consumer
//! iterates them in a fixed order, which the simulation engine relies on for
//! exact replays.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `node_count` nodes and no edges.
    pub fn empty(node_count: usize) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::param("node_count", "must be positive"));
        }
        if node_count > u32::MAX as usize {
            return Err(Error::param("node_count", "exceeds u32 node ids"));
        }
        Ok(Graph {
            adjacency: vec![Vec::new(); node_count],
            edge_count: 0,
        })
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut seen = BTreeSet::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::param(
                    "edges",
                    format!("edge ({u}, {v}) has an endpoint >= {node_count}"),
                ));
            }
            if u == v {
                return Err(Error::param("edges", format!("self-loop on node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::param("edges", format!("duplicate edge ({u}, {v})")));
            }
        }
        Self::from_unique_edges(node_count, seen)
    }

    /// Same as [`Graph::from_edges`] but silently collapses duplicate edges.
    pub fn from_edges_dedup<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::param(
                    "edges",
                    format!("edge ({u}, {v}) has an endpoint >= {node_count}"),
                ));
            }
            if u == v {
                return Err(Error::param("edges", format!("self-loop on node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Self::from_unique_edges(node_count, set)
    }

    fn from_unique_edges(node_count: usize, edges: BTreeSet<(usize, usize)>) -> Result<Self> {
        let mut graph = Graph::empty(node_count)?;
        for &(u, v) in &edges {
            graph.adjacency[u].push(v as u32);
            graph.adjacency[v].push(u as u32);
        }
        for list in &mut graph.adjacency {
            list.sort_unstable();
        }
        graph.edge_count = edges.len();
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbour ids of `node`.
    pub fn neighbours(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut degrees: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        degrees.sort_unstable();
        degrees
    }

    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    let v = v as usize;
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    /// Relabels node `i` as `permutation[i]`.
    pub fn permute(&self, permutation: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if permutation.len() != n {
            return Err(Error::param(
                "permutation",
                format!("length {} does not match node count {n}", permutation.len()),
            ));
        }
        let mut hit = vec![false; n];
        for &p in permutation {
            if p >= n || std::mem::replace(&mut hit[p], true) {
                return Err(Error::param("permutation", "not a permutation of 0..n"));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (u, list) in self.adjacency.iter().enumerate() {
            adjacency[permutation[u]] = list
                .iter()
                .map(|&v| permutation[v as usize] as u32)
                .collect();
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            adjacency,
            edge_count: self.edge_count,
        })
    }

    /// Plain-text edge list: `n <node_count>` followed by one `u v` line per
    /// edge with `u < v`, lexicographically sorted.
    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.node_count())?;
        for (u, v) in self.edges() {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad =
            |line: usize, what: &str| Error::param("edge_list", format!("line {line}: {what}"));

        let (first_no, first) = lines
            .next()
            .ok_or_else(|| bad(1, "missing `n <node_count>` header"))?;
        let node_count = first
            .strip_prefix("n ")
            .and_then(|rest| rest.trim().parse::<usize>().ok())
            .ok_or_else(|| bad(first_no, "expected `n <node_count>`"))?;

        let mut edges = Vec::new();
        for (line_no, line) in lines {
            let mut parts = line.split_whitespace();
            let parsed = match (parts.next(), parts.next(), parts.next()) {
                (Some(u), Some(v), None) => u.parse::<usize>().ok().zip(v.parse::<usize>().ok()),
                _ => None,
            };
            let (u, v) = parsed.ok_or_else(|| bad(line_no, "expected `<u> <v>`"))?;
            edges.push((u, v));
        }
        Graph::from_edges(node_count, edges)
    }
}

/// Ring lattice parameters: `n` nodes, each linked to its next `k` ring
/// neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRegularParams {
    pub n: usize,
    pub k: usize,
}

impl KRegularParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::param(
                "n",
                format!("ring needs at least 3 nodes, got {}", self.n),
            ));
        }
        if self.k < 1 {
            return Err(Error::param("k", "must be at least 1"));
        }
        Ok(())
    }
}

/// Preferential-attachment parameters: `n` nodes, `d` edges per new node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleFreeParams {
    pub n: usize,
    pub d: usize,
}

impl ScaleFreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::param("d", "must be at least 1"));
        }
        if self.n < self.d {
            return Err(Error::param(
                "n",
                format!("node count {} is smaller than d = {}", self.n, self.d),
            ));
        }
        Ok(())
    }
}

/// Ring lattice where node `i` is adjacent to `(i + j) mod n` for
/// `j = 1..=k`. Wrap-around duplicates collapse, so `2k >= n - 1` gives the
/// complete graph. Deterministic; shuffle the labels separately.
pub fn generate_k_regular(params: KRegularParams) -> Result<Graph> {
    params.validate()?;
    let KRegularParams { n, k } = params;
    let reach = k.min(n / 2);
    let edges = (0..n).flat_map(|i| (1..=reach).map(move |j| (i, (i + j) % n)));
    Graph::from_edges_dedup(n, edges)
}

/// Applies a uniformly random node relabelling.
pub fn shuffle_labels<R: Rng + ?Sized>(graph: &Graph, rng: &mut R) -> Graph {
    let mut permutation: Vec<usize> = (0..graph.node_count()).collect();
    permutation.shuffle(rng);
    graph
        .permute(&permutation)
        .expect("a shuffled identity is always a permutation")
}

/// Barabási–Albert style growth.
///
/// The nucleus is `d` isolated nodes. Every later node attaches to `d`
/// distinct existing nodes, each drawn with probability proportional to
/// `degree + 1` among the nodes not yet chosen in that round.
pub fn generate_scale_free<R: Rng + ?Sized>(params: ScaleFreeParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let ScaleFreeParams { n, d } = params;
    let mut degree = vec![0u64; n];
    let mut chosen = vec![false; n];
    let mut edges = Vec::with_capacity(d * (n - d));
    let mut targets = Vec::with_capacity(d);

    for new in d..n {
        // weight of node i is degree[i] + 1; total over 0..new
        let mut total: u64 = degree[..new].iter().sum::<u64>() + new as u64;
        targets.clear();
        for _ in 0..d {
            let mut ticket = rng.random_range(0..total);
            let pick = (0..new)
                .filter(|&i| !chosen[i])
                .find(|&i| {
                    let w = degree[i] + 1;
                    if ticket < w {
                        true
                    } else {
                        ticket -= w;
                        false
                    }
                })
                .expect("ticket is below the remaining total weight");
            chosen[pick] = true;
            total -= degree[pick] + 1;
            targets.push(pick);
        }
        for &t in &targets {
            chosen[t] = false;
            degree[t] += 1;
            degree[new] += 1;
            edges.push((t, new));
        }
    }
    Graph::from_edges(n, edges)
}

/// Union of layer edge sets over a shared node population.
pub fn merge_graphs(layers: &[Graph]) -> Result<Graph> {
    let first = layers
        .first()
        .ok_or_else(|| Error::param("layers", "at least one layer is required"))?;
    let n = first.node_count();
    if let Some(bad) = layers.iter().find(|g| g.node_count() != n) {
        return Err(Error::param(
            "layers",
            format!("node counts differ: {n} vs {}", bad.node_count()),
        ));
    }
    Graph::from_edges_dedup(n, layers.iter().flat_map(Graph::edges))
}

/// Topology of one network layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerTopology {
    KRegular { k: usize },
    ScaleFree { d: usize },
}

impl LayerTopology {
    /// Generates a fresh, label-shuffled instance with `n` nodes.
    pub fn instantiate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Graph> {
        let graph = match *self {
            LayerTopology::KRegular { k } => generate_k_regular(KRegularParams { n, k })?,
            LayerTopology::ScaleFree { d } => generate_scale_free(ScaleFreeParams { n, d }, rng)?,
        };
        Ok(shuffle_labels(&graph, rng))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            LayerTopology::KRegular { k } => KRegularParams { n, k }.validate(),
            LayerTopology::ScaleFree { d } => ScaleFreeParams { n, d }.validate(),
        }
    }
}

impl fmt::Display for LayerTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerTopology::KRegular { k } => write!(f, "kreg-{k}"),
            LayerTopology::ScaleFree { d } => write!(f, "sf-{d}"),
        }
    }
}

impl FromStr for LayerTopology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("layer", format!("`{s}` is not `kreg-<k>` or `sf-<d>`"));
        let (kind, value) = s.trim().split_once('-').ok_or_else(bad)?;
        let value: usize = value.parse().map_err(|_| bad())?;
        match kind {
            "kreg" => Ok(LayerTopology::KRegular { k: value }),
            "sf" => Ok(LayerTopology::ScaleFree { d: value }),
            _ => Err(bad()),
        }
    }
}

/// Instantiates every layer of a stack, in order, from one stream.
pub fn instantiate_layers<R: Rng + ?Sized>(
    stack: &[LayerTopology],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Graph>> {
    stack
        .iter()
        .map(|layer| layer.instantiate(n, rng))
        .collect()
}
