use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub name: String,
    pub n: usize,
    /// Undirected links stored as `(a, b)` with `a < b`.
    pub links: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing nodes=N header")]
    MissingHeader,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node {node} out of range for {n} nodes")]
    OutOfRange { node: usize, n: usize },
    #[error("topology is not connected")]
    Disconnected,
    #[error("unknown topology {0}")]
    Unknown(String),
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "3-clique", "4-clique", "7-clique", "7-star", "4-circle", "7-circle", "7-bridge",
];

fn clique(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn circle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|a| (a, (a + 1) % n)).collect()
}

impl Topology {
    pub fn new(name: &str, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, TopologyError> {
        let mut links = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            for node in [a, b] {
                if node >= n {
                    return Err(TopologyError::OutOfRange { node, n });
                }
            }
            links.insert((a.min(b), a.max(b)));
        }
        let t = Topology {
            name: name.to_string(),
            n,
            links,
        };
        if !t.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(t)
    }

    pub fn builtin(name: &str) -> Result<Self, TopologyError> {
        let (n, edges) = match name {
            "3-clique" => (3, clique(3)),
            "4-clique" => (4, clique(4)),
            "7-clique" => (7, clique(7)),
            "7-star" => (7, (1..7).map(|b| (0, b)).collect()),
            "4-circle" => (4, circle(4)),
            "7-circle" => (7, circle(7)),
            // Two triangles joined through node 3.
            "7-bridge" => (7, vec![(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)]),
            other => return Err(TopologyError::Unknown(other.to_string())),
        };
        Topology::new(name, n, edges)
    }

    pub fn builtins() -> Vec<Topology> {
        BUILTIN_NAMES.iter().map(|n| Topology::builtin(n).unwrap()).collect()
    }

    /// `nodes=N` on the first non-comment line, then one `a<TAB>b` edge per line.
    pub fn parse(name: &str, text: &str) -> Result<Self, TopologyError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| TopologyError::Parse { line: line_no, msg };
            match n {
                None => {
                    let v = line
                        .strip_prefix("nodes=")
                        .ok_or_else(|| err("expected nodes=N".into()))?;
                    n = Some(v.trim().parse::<usize>().map_err(|e| err(e.to_string()))?);
                }
                Some(_) => {
                    let parts: Vec<&str> = line.split('\t').collect();
                    if parts.len() != 2 {
                        return Err(err(format!("expected two tab-separated nodes, got {line:?}")));
                    }
                    let a = parts[0].trim().parse::<usize>().map_err(|e| err(e.to_string()))?;
                    let b = parts[1].trim().parse::<usize>().map_err(|e| err(e.to_string()))?;
                    edges.push((a, b));
                }
            }
        }
        Topology::new(name, n.ok_or(TopologyError::MissingHeader)?, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("nodes={}\n", self.n);
        for (a, b) in &self.links {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        out
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[from] = Some(0);
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            for u in self.neighbors(v) {
                if dist[u].is_none() {
                    dist[u] = Some(dist[v].unwrap() + 1);
                    q.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.distances(0).iter().all(Option::is_some)
    }

    /// A connected graph has a cycle iff it has more than `n - 1` links.
    pub fn has_cycle(&self) -> bool {
        self.links.len() >= self.n
    }

    pub fn eccentricity(&self, v: usize) -> usize {
        self.distances(v).into_iter().flatten().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> usize {
        (0..self.n).map(|v| self.eccentricity(v)).max().unwrap_or(0)
    }
}
