//! Weighted-network data model: symmetric positive conductances on an
//! undirected graph with a distinguished base vertex, plus file I/O and
//! free/wired subnetwork extraction.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// A finite resistance network: vertices with opaque string ids, symmetric
/// positive edge conductances (siemens), no self-loops, connected, with a
/// distinguished base vertex.
///
/// Immutable after construction; internal indices follow declaration order so
/// downstream solves are reproducible.
#[derive(Debug, Clone)]
pub struct Network {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Edges stored once per unordered pair with `u < v`, sorted by (u, v).
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
    /// Total conductance c(x) at each vertex.
    degree: Vec<f64>,
    base: usize,
}

impl Network {
    /// Build a network from raw edge data. Parallel edges are merged by
    /// conductance summation, zero-conductance edges are dropped, negative
    /// conductances and self-loops are rejected, and connectivity from the
    /// base is required.
    pub fn from_edges<I, S>(base: Option<&str>, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: AsRef<str>,
    {
        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let intern = |id: &str, ids: &mut Vec<String>, index: &mut HashMap<String, usize>| {
            if let Some(&i) = index.get(id) {
                i
            } else {
                let i = ids.len();
                ids.push(id.to_string());
                index.insert(id.to_string(), i);
                i
            }
        };
        let mut pair_cond: HashMap<(usize, usize), f64> = HashMap::new();
        for (u, v, c) in raw {
            let (u, v) = (u.as_ref(), v.as_ref());
            if u == v {
                return Err(Error::Validation {
                    invariant: "no self-loops".into(),
                    witness: u.to_string(),
                });
            }
            if c < 0.0 || !c.is_finite() {
                return Err(Error::Validation {
                    invariant: "conductance strictly positive".into(),
                    witness: format!("{u} {v} {c}"),
                });
            }
            let iu = intern(u, &mut ids, &mut index);
            let iv = intern(v, &mut ids, &mut index);
            if c == 0.0 {
                // x ~ y iff c_xy > 0: zero edges never enter the adjacency
                continue;
            }
            let key = if iu < iv { (iu, iv) } else { (iv, iu) };
            *pair_cond.entry(key).or_insert(0.0) += c;
        }
        if ids.is_empty() {
            return Err(Error::Validation {
                invariant: "nonempty vertex set".into(),
                witness: "(no edges)".into(),
            });
        }
        let base = match base {
            Some(b) => *index
                .get(b)
                .ok_or_else(|| Error::UnknownVertex(b.to_string()))?,
            None => 0,
        };
        let mut edges: Vec<(usize, usize, f64)> = pair_cond
            .into_iter()
            .map(|((u, v), c)| (u, v, c))
            .collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut degree = vec![0.0; n];
        for &(u, v, c) in &edges {
            adj[u].push((v, c));
            adj[v].push((u, c));
            degree[u] += c;
            degree[v] += c;
        }
        for list in &mut adj {
            list.sort_by_key(|&(w, _)| w);
        }
        let net = Network {
            ids,
            index,
            edges,
            adj,
            degree,
            base,
        };
        if let Some(unreached) = net.first_unreachable() {
            return Err(Error::Validation {
                invariant: "connected from base".into(),
                witness: net.ids[unreached].clone(),
            });
        }
        Ok(net)
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Index of the base vertex o.
    pub fn base(&self) -> usize {
        self.base
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    /// Edges stored once per unordered pair, `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// Total conductance c(x).
    pub fn total_conductance(&self, v: usize) -> f64 {
        self.degree[v]
    }

    /// Largest total conductance over all vertices; the natural scale for
    /// residual tolerances.
    pub fn conductance_scale(&self) -> f64 {
        self.degree.iter().cloned().fold(0.0, f64::max)
    }

    /// Conductance c_xy (0 when not adjacent).
    pub fn conductance(&self, u: usize, v: usize) -> f64 {
        self.adj[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.adj[u][i].1)
            .unwrap_or(0.0)
    }

    pub fn transition_probability(&self, u: usize, v: usize) -> f64 {
        self.conductance(u, v) / self.degree[u]
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        seen[self.base] = true;
        queue.push_back(self.base);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Graph distance (number of edges) from `from` to every vertex.
    pub fn graph_distances(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[from] = 0;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The full (free) subnetwork induced on `keep`: all edges with both
    /// endpoints in the set, unchanged conductances. The base must be kept
    /// and the induced graph must be connected.
    pub fn full_subnetwork(&self, keep: &[usize]) -> Result<Network> {
        let mark = self.mark(keep)?;
        if !mark[self.base] {
            return Err(Error::Validation {
                invariant: "subnetwork contains base".into(),
                witness: self.ids[self.base].clone(),
            });
        }
        let mut raw = Vec::new();
        for &(u, v, c) in &self.edges {
            if mark[u] && mark[v] {
                raw.push((self.ids[u].clone(), self.ids[v].clone(), c));
            }
        }
        // isolated kept vertices (no kept edge) would be dropped by
        // from_edges; surface them as a connectivity failure instead
        let net = Network::from_edges(Some(&self.ids[self.base]), raw)?;
        if net.len() != keep.len() {
            let missing = keep
                .iter()
                .find(|&&v| net.index.get(&self.ids[v]).is_none())
                .unwrap();
            return Err(Error::Validation {
                invariant: "connected induced subnetwork".into(),
                witness: self.ids[*missing].clone(),
            });
        }
        Ok(net)
    }

    /// The wired subnetwork on `keep`: the complement is identified to a
    /// single new vertex, and every kept vertex with neighbors outside gains
    /// an edge to it carrying the summed frontier conductance. Returns the
    /// network and the apex index (`None` when the frontier is empty, in
    /// which case the network is unchanged).
    pub fn wired_subnetwork(&self, keep: &[usize]) -> Result<(Network, Option<usize>)> {
        let mark = self.mark(keep)?;
        if !mark[self.base] {
            return Err(Error::Validation {
                invariant: "subnetwork contains base".into(),
                witness: self.ids[self.base].clone(),
            });
        }
        let apex_id = self.fresh_apex_id();
        let mut raw: Vec<(String, String, f64)> = Vec::new();
        let mut frontier = false;
        for &(u, v, c) in &self.edges {
            match (mark[u], mark[v]) {
                (true, true) => raw.push((self.ids[u].clone(), self.ids[v].clone(), c)),
                (true, false) => {
                    frontier = true;
                    raw.push((self.ids[u].clone(), apex_id.clone(), c));
                }
                (false, true) => {
                    frontier = true;
                    raw.push((self.ids[v].clone(), apex_id.clone(), c));
                }
                (false, false) => {}
            }
        }
        let net = Network::from_edges(Some(&self.ids[self.base]), raw)?;
        let expected = keep.len() + usize::from(frontier);
        if net.len() != expected {
            return Err(Error::Validation {
                invariant: "connected induced subnetwork".into(),
                witness: "wired identification left an unreachable vertex".into(),
            });
        }
        let apex = if frontier {
            Some(net.index_of(&apex_id)?)
        } else {
            None
        };
        Ok((net, apex))
    }

    fn fresh_apex_id(&self) -> String {
        if !self.index.contains_key("inf") {
            return "inf".to_string();
        }
        let mut k = 1usize;
        loop {
            let candidate = format!("inf{k}");
            if !self.index.contains_key(&candidate) {
                return candidate;
            }
            k += 1;
        }
    }

    fn mark(&self, keep: &[usize]) -> Result<Vec<bool>> {
        let mut mark = vec![false; self.len()];
        for &v in keep {
            if v >= self.len() {
                return Err(Error::UnknownVertex(format!("#{v}")));
            }
            mark[v] = true;
        }
        Ok(mark)
    }

    /// Canonical edge-list serialization: edges sorted by (u, v) id order,
    /// conductances with 17 significant digits.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("base {}\n", self.ids[self.base]));
        let mut rows: Vec<(&str, &str, f64)> = self
            .edges
            .iter()
            .map(|&(u, v, c)| {
                let (a, b) = (self.ids[u].as_str(), self.ids[v].as_str());
                if a <= b {
                    (a, b, c)
                } else {
                    (b, a, c)
                }
            })
            .collect();
        rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        for (u, v, c) in rows {
            out.push_str(&format!("{u} {v} {:.16e}\n", c));
        }
        out
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "network({} vertices, {} edges, base {})",
            self.len(),
            self.edges.len(),
            self.ids[self.base]
        )
    }
}

/// Parse the edge-list text format: `#` comment lines, an optional
/// `base <id>` directive, and data lines `<u> <v> <conductance>`.
/// The base defaults to the first declared vertex.
pub fn load_network(text: &str) -> Result<Network> {
    let (base, raw) = parse_edge_list(text)?;
    Network::from_edges(base.as_deref(), raw)
}

fn parse_edge_list(text: &str) -> Result<(Option<String>, Vec<(String, String, f64)>)> {
    let mut base: Option<String> = None;
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "base" {
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "base directive takes exactly one vertex id".into(),
                });
            }
            base = Some(fields[1].to_string());
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected `<u> <v> <conductance>`, got `{line}`"),
            });
        }
        let c: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid conductance literal `{}`", fields[2]),
        })?;
        if c < 0.0 || !c.is_finite() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("nonpositive conductance {c}"),
            });
        }
        raw.push((fields[0].to_string(), fields[1].to_string(), c));
    }
    Ok((base, raw))
}

/// One invariant check in a diagnostics report.
#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub invariant: String,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Diagnostics report: each invariant with pass/fail and a witness on failure.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Validate a constructed network. Construction already enforces the
/// invariants; this re-verifies them numerically and reports per-invariant.
pub fn validate(net: &Network) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |invariant: &str, witness: Option<String>| {
        checks.push(InvariantCheck {
            invariant: invariant.to_string(),
            passed: witness.is_none(),
            witness,
        });
    };

    let bad_cond = net
        .edges()
        .iter()
        .find(|&&(_, _, c)| !(c > 0.0) || !c.is_finite());
    push(
        "conductance strictly positive",
        bad_cond.map(|&(u, v, c)| format!("{} {} {}", net.id(u), net.id(v), c)),
    );

    let self_loop = net.edges().iter().find(|&&(u, v, _)| u == v);
    push(
        "no self-loops",
        self_loop.map(|&(u, _, _)| net.id(u).to_string()),
    );

    // symmetry of the stored adjacency
    let mut asym = None;
    'outer: for u in 0..net.len() {
        for &(v, c) in net.neighbors(u) {
            if (net.conductance(v, u) - c).abs() > 0.0 {
                asym = Some(format!("{} {}", net.id(u), net.id(v)));
                break 'outer;
            }
        }
    }
    push("conductance symmetric", asym);

    push(
        "connected from base",
        net.first_unreachable().map(|v| net.id(v).to_string()),
    );

    let infinite_total = (0..net.len()).find(|&v| !net.total_conductance(v).is_finite());
    push(
        "total conductance finite",
        infinite_total.map(|v| net.id(v).to_string()),
    );

    ValidationReport { checks }
}

/// Validate raw edge-list text without requiring a well-formed network, so
/// that invariant violations are reported rather than thrown.
pub fn validate_text(text: &str) -> Result<ValidationReport> {
    let (base, raw) = parse_edge_list(text)?;
    let mut checks = Vec::new();
    let mut push = |invariant: &str, witness: Option<String>| {
        checks.push(InvariantCheck {
            invariant: invariant.to_string(),
            passed: witness.is_none(),
            witness,
        });
    };

    let bad = raw.iter().find(|(_, _, c)| *c < 0.0 || !c.is_finite());
    push(
        "conductance strictly positive",
        bad.map(|(u, v, c)| format!("{u} {v} {c}")),
    );
    let self_loop = raw.iter().find(|(u, v, _)| u == v);
    push("no self-loops", self_loop.map(|(u, _, _)| u.clone()));

    // connectivity over the positive-conductance adjacency
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    for (u, v, c) in &raw {
        for id in [u, v] {
            if !index.contains_key(id) {
                index.insert(id.clone(), ids.len());
                ids.push(id.clone());
                adj.push(Vec::new());
            }
        }
        if *c > 0.0 && u != v {
            let (iu, iv) = (index[u], index[v]);
            adj[iu].push(iv);
            adj[iv].push(iu);
        }
    }
    let witness = if ids.is_empty() {
        Some("(no vertices)".to_string())
    } else {
        let start = base
            .as_ref()
            .and_then(|b| index.get(b).copied())
            .unwrap_or(0);
        let mut seen = vec![false; ids.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s).map(|v| ids[v].clone())
    };
    push("connected from base", witness);

    if let Some(b) = &base {
        push(
            "base vertex declared",
            if index.contains_key(b) {
                None
            } else {
                Some(b.clone())
            },
        );
    }
    Ok(ValidationReport { checks })
}
