use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Undirected device connectivity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeList", into = "EdgeList")]
pub struct CouplingMap {
    num_physical: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeList {
    num_physical: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<EdgeList> for CouplingMap {
    type Error = Error;

    fn try_from(e: EdgeList) -> Result<Self> {
        Self::new(e.num_physical, &e.edges)
    }
}

impl From<CouplingMap> for EdgeList {
    fn from(m: CouplingMap) -> Self {
        EdgeList {
            num_physical: m.num_physical,
            edges: m.edges,
        }
    }
}

impl CouplingMap {
    /// Builds a map; edges are normalized to `(min, max)`, sorted and
    /// deduplicated. The graph must be connected and loop-free.
    pub fn new(num_physical: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if num_physical == 0 {
            return Err(Error::InvalidParameter("coupling map has no qubits".into()));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on qubit {a}")));
            }
            for q in [a, b] {
                if q >= num_physical {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        num_qubits: num_physical,
                    });
                }
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adjacency = vec![Vec::new(); num_physical];
        for &(a, b) in &norm {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        adjacency.iter_mut().for_each(|v| v.sort_unstable());
        let mut map = Self {
            num_physical,
            edges: norm,
            adjacency,
            dist: Vec::new(),
        };
        map.dist = (0..num_physical).map(|s| map.bfs(s)).collect();
        if map.dist[0].iter().any(|&d| d == usize::MAX) {
            return Err(Error::InvalidParameter("coupling map is disconnected".into()));
        }
        Ok(map)
    }

    /// Seven-qubit heavy-hex fragment of the IBM Falcon `casablanca` device:
    ///
    /// ```text
    /// 0       4
    /// |       |
    /// 1 - 3 - 5
    /// |       |
    /// 2       6
    /// ```
    pub fn casablanca() -> Self {
        Self::new(7, &[(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)]).expect("built-in map")
    }

    pub fn line(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Self::new(n, &edges)
    }

    /// Built-in maps by name: `casablanca`, `line-N`, `complete-N`.
    pub fn by_name(name: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown coupling map `{name}`"));
        if name == "casablanca" {
            return Ok(Self::casablanca());
        }
        let (kind, n) = name.rsplit_once('-').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        match kind {
            "line" => Self::line(n),
            "complete" => Self::complete(n),
            _ => Err(bad()),
        }
    }

    /// Edge-list text: first non-comment line is the node count, then one
    /// `u v` pair per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut count: Option<usize> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (count, fields.as_slice()) {
                (None, [n]) => {
                    count = Some(n.parse().map_err(|_| err(format!("bad node count `{n}`")))?)
                }
                (None, _) => return Err(err("first line must be the node count".into())),
                (Some(_), [u, v]) => {
                    let u = u.parse().map_err(|_| err(format!("bad node `{u}`")))?;
                    let v = v.parse().map_err(|_| err(format!("bad node `{v}`")))?;
                    edges.push((u, v));
                }
                (Some(_), _) => return Err(err("expected `u v`".into())),
            }
        }
        let n = count.ok_or(Error::Parse {
            line: 1,
            msg: "empty coupling map".into(),
        })?;
        Self::new(n, &edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.num_physical);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    /// Subgraph induced by `nodes`, relabelled so `nodes[i]` becomes `i`.
    /// Fails when the subgraph is disconnected.
    pub fn induced(&self, nodes: &[usize]) -> Result<Self> {
        crate::qstate::check_qubits(nodes, self.num_physical)?;
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                let ia = nodes.iter().position(|&x| x == a)?;
                let ib = nodes.iter().position(|&x| x == b)?;
                Some((ia, ib))
            })
            .collect();
        Self::new(nodes.len(), &edges)
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.dist[a][b] == 1
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a][b]
    }

    /// Shortest path `a .. b` inclusive; ties go to the smallest neighbor.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&nb| self.dist[nb][b] + 1 == self.dist[cur][b])
                .expect("connected map");
            path.push(cur);
        }
        path
    }

    fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_physical];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}
