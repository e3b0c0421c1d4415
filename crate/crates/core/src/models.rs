//! Model generators and lazy infinite networks.
//!
//! Infinite models are never materialized: a spec carries a symmetric,
//! locally finite neighbor oracle plus a deterministic enumeration from the
//! origin, and truncations are built on demand from ball exhaustions.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::Network;

/// Lazy description of an infinite network. Vertices are addressed by an
/// opaque integer key; `id_of` renders the printable id.
#[derive(Clone)]
pub struct InfiniteNetworkSpec {
    name: String,
    origin: i64,
    neighbors: Arc<dyn Fn(i64) -> Vec<(i64, f64)> + Send + Sync>,
    id_of: Arc<dyn Fn(i64) -> String + Send + Sync>,
}

impl std::fmt::Debug for InfiniteNetworkSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InfiniteNetworkSpec({})", self.name)
    }
}

impl InfiniteNetworkSpec {
    pub fn new(
        name: impl Into<String>,
        origin: i64,
        neighbors: impl Fn(i64) -> Vec<(i64, f64)> + Send + Sync + 'static,
        id_of: impl Fn(i64) -> String + Send + Sync + 'static,
    ) -> Self {
        InfiniteNetworkSpec {
            name: name.into(),
            origin,
            neighbors: Arc::new(neighbors),
            id_of: Arc::new(id_of),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn neighbors(&self, key: i64) -> Vec<(i64, f64)> {
        (self.neighbors)(key)
    }

    pub fn id_of(&self, key: i64) -> String {
        (self.id_of)(key)
    }

    /// Key of the named vertex, found by enumerating outward from the
    /// origin. Errors after `budget` vertices.
    pub fn key_of(&self, id: &str, budget: usize) -> Result<i64> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([self.origin]);
        seen.insert(self.origin);
        while let Some(k) = queue.pop_front() {
            if self.id_of(k) == id {
                return Ok(k);
            }
            if seen.len() > budget {
                break;
            }
            for (w, _) in self.neighbors(k) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        Err(Error::UnknownVertex(id.to_string()))
    }

    /// First `count` vertices in canonical (breadth-first) enumeration.
    pub fn enumerate(&self, count: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(count);
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([self.origin]);
        seen.insert(self.origin);
        while let Some(k) = queue.pop_front() {
            out.push(k);
            if out.len() >= count {
                break;
            }
            for (w, _) in self.neighbors(k) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        out
    }
}

/// A finite network or a lazy infinite one; the common input to exhaustion
/// limits and the CLI.
#[derive(Debug, Clone)]
pub enum NetworkSource {
    Finite(Network),
    Infinite(InfiniteNetworkSpec),
}

impl NetworkSource {
    pub fn is_finite(&self) -> bool {
        matches!(self, NetworkSource::Finite(_))
    }
}

/// An increasing sequence of vertex sets (balls around the origin), each
/// inducing a connected subnetwork containing the base.
#[derive(Debug, Clone)]
pub struct Exhaustion {
    /// Cumulative vertex keys per truncation, in enumeration order.
    sets: Vec<Vec<i64>>,
    radii: Vec<u32>,
    /// Radius at which a finite source was fully covered, if any.
    truncated_at: Option<u32>,
}

impl Exhaustion {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn radii(&self) -> &[u32] {
        &self.radii
    }

    pub fn set(&self, k: usize) -> &[i64] {
        &self.sets[k]
    }

    pub fn truncated_at(&self) -> Option<u32> {
        self.truncated_at
    }
}

/// Ball exhaustion: V[G_k] = vertices within graph distance `radii[k]` of
/// the origin. Radii must be strictly increasing and >= 1. A radius that
/// exhausts a finite source is allowed; the exhaustion is cut there and
/// flagged.
pub fn ball_exhaustion(source: &NetworkSource, radii: &[u32]) -> Result<Exhaustion> {
    if radii.is_empty() || radii[0] < 1 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "radii must be strictly increasing and >= 1".into(),
        ));
    }
    let max_radius = *radii.last().unwrap();
    // breadth-first layers from the origin, deterministic order
    let mut order: Vec<(i64, u32)> = Vec::new();
    match source {
        NetworkSource::Finite(net) => {
            let dist = net.graph_distances(net.base());
            let mut idx: Vec<usize> = (0..net.len()).collect();
            idx.sort_by_key(|&v| (dist[v], v));
            for v in idx {
                if dist[v] as u32 <= max_radius || dist[v] == 0 {
                    order.push((v as i64, dist[v] as u32));
                }
            }
        }
        NetworkSource::Infinite(spec) => {
            let mut seen: HashMap<i64, u32> = HashMap::new();
            let mut queue = VecDeque::from([spec.origin()]);
            seen.insert(spec.origin(), 0);
            while let Some(k) = queue.pop_front() {
                let d = seen[&k];
                order.push((k, d));
                if d == max_radius {
                    continue;
                }
                for (w, _) in spec.neighbors(k) {
                    if !seen.contains_key(&w) {
                        seen.insert(w, d + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
    }

    let mut truncated_at = None;
    if let NetworkSource::Finite(net) = source {
        let covering = order.iter().map(|&(_, d)| d).max().unwrap_or(0);
        if order.len() == net.len() && covering < max_radius {
            truncated_at = Some(covering.max(1));
        }
    }

    let mut sets = Vec::new();
    let mut out_radii = Vec::new();
    for &r in radii {
        let set: Vec<i64> = order
            .iter()
            .filter(|&&(_, d)| d <= r)
            .map(|&(k, _)| k)
            .collect();
        if let Some(prev) = sets.last() {
            let prev: &Vec<i64> = prev;
            if set.len() == prev.len() {
                // finite source exhausted; stop growing
                break;
            }
        }
        sets.push(set);
        out_radii.push(r);
    }
    Ok(Exhaustion {
        sets,
        radii: out_radii,
        truncated_at,
    })
}

/// Materialize the free (full) truncation on the exhaustion's k-th set.
pub fn free_truncation(source: &NetworkSource, exh: &Exhaustion, k: usize) -> Result<Network> {
    match source {
        NetworkSource::Finite(net) => {
            let keep: Vec<usize> = exh.set(k).iter().map(|&v| v as usize).collect();
            net.full_subnetwork(&keep)
        }
        NetworkSource::Infinite(spec) => {
            let keys = exh.set(k);
            let inside: HashSet<i64> = keys.iter().copied().collect();
            let mut raw = Vec::new();
            for &u in keys {
                for (w, c) in spec.neighbors(u) {
                    if inside.contains(&w) && u < w {
                        raw.push((spec.id_of(u), spec.id_of(w), c));
                    }
                }
            }
            Network::from_edges(Some(&spec.id_of(spec.origin())), raw)
        }
    }
}

/// Materialize the wired truncation: the complement collapses to an apex
/// vertex, frontier conductances summed. Returns the apex index when a
/// frontier exists.
pub fn wired_truncation(
    source: &NetworkSource,
    exh: &Exhaustion,
    k: usize,
) -> Result<(Network, Option<usize>)> {
    match source {
        NetworkSource::Finite(net) => {
            let keep: Vec<usize> = exh.set(k).iter().map(|&v| v as usize).collect();
            net.wired_subnetwork(&keep)
        }
        NetworkSource::Infinite(spec) => {
            let keys = exh.set(k);
            let inside: HashSet<i64> = keys.iter().copied().collect();
            let apex_id = "inf".to_string();
            let mut raw = Vec::new();
            let mut frontier = false;
            for &u in keys {
                for (w, c) in spec.neighbors(u) {
                    if inside.contains(&w) {
                        if u < w {
                            raw.push((spec.id_of(u), spec.id_of(w), c));
                        }
                    } else {
                        frontier = true;
                        raw.push((spec.id_of(u), apex_id.clone(), c));
                    }
                }
            }
            let net = Network::from_edges(Some(&spec.id_of(spec.origin())), raw)?;
            let apex = if frontier {
                Some(net.index_of(&apex_id)?)
            } else {
                None
            };
            Ok((net, apex))
        }
    }
}

/// Build a recognized model. Finite models return a network; `geometric-z`,
/// `binary-tree`, and `ladder` return lazy specs.
pub fn generate(name: &str, params: &[f64]) -> Result<NetworkSource> {
    match name {
        "geometric-z" => {
            let c = *params
                .first()
                .ok_or_else(|| Error::InvalidParameter("geometric-z requires c".into()))?;
            if !(c > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "geometric-z requires c > 1, got {c}"
                )));
            }
            Ok(NetworkSource::Infinite(geometric_z(c)))
        }
        "binary-tree" => Ok(NetworkSource::Infinite(binary_tree())),
        "ladder" => Ok(NetworkSource::Infinite(ladder())),
        "path" => {
            let n = int_param(params, "path", 2)?;
            let raw = (0..n - 1).map(|i| (i.to_string(), (i + 1).to_string(), 1.0));
            Ok(NetworkSource::Finite(Network::from_edges(Some("0"), raw)?))
        }
        "cycle" => {
            let n = int_param(params, "cycle", 3)?;
            let raw = (0..n).map(|i| (i.to_string(), ((i + 1) % n).to_string(), 1.0));
            Ok(NetworkSource::Finite(Network::from_edges(Some("0"), raw)?))
        }
        "complete" => {
            let n = int_param(params, "complete", 2)?;
            let mut raw = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    raw.push((i.to_string(), j.to_string(), 1.0));
                }
            }
            Ok(NetworkSource::Finite(Network::from_edges(Some("0"), raw)?))
        }
        "grid" => {
            if params.len() != 2 {
                return Err(Error::InvalidParameter("grid requires m,n".into()));
            }
            let (m, n) = (params[0] as usize, params[1] as usize);
            if m < 1 || n < 1 || m * n < 2 {
                return Err(Error::InvalidParameter("grid needs at least 2 vertices".into()));
            }
            let id = |i: usize, j: usize| format!("{i}_{j}");
            let mut raw = Vec::new();
            for i in 0..m {
                for j in 0..n {
                    if i + 1 < m {
                        raw.push((id(i, j), id(i + 1, j), 1.0));
                    }
                    if j + 1 < n {
                        raw.push((id(i, j), id(i, j + 1), 1.0));
                    }
                }
            }
            Ok(NetworkSource::Finite(Network::from_edges(
                Some("0_0"),
                raw,
            )?))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

fn int_param(params: &[f64], model: &str, min: usize) -> Result<usize> {
    let v = *params
        .first()
        .ok_or_else(|| Error::InvalidParameter(format!("{model} requires n")))?;
    if v.fract() != 0.0 || v < min as f64 {
        return Err(Error::InvalidParameter(format!(
            "{model} requires integer n >= {min}, got {v}"
        )));
    }
    Ok(v as usize)
}

/// Parse a CLI model spec `name:param1,param2`.
pub fn generate_from_str(spec: &str) -> Result<NetworkSource> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => {
            let params: std::result::Result<Vec<f64>, _> =
                p.split(',').map(|s| s.trim().parse::<f64>()).collect();
            (
                n,
                params.map_err(|_| Error::InvalidParameter(format!("bad parameter list `{p}`")))?,
            )
        }
        None => (spec, Vec::new()),
    };
    generate(name, &params)
}

/// Integers with geometrically increasing conductances
/// c_{n-1,n} = c^max(|n|, |n-1|); origin 0, enumeration 0, 1, -1, 2, -2, ...
pub fn geometric_z(c: f64) -> InfiniteNetworkSpec {
    let cond = move |n: i64| -> f64 {
        // conductance of the edge between n-1 and n
        let e = (n.abs()).max((n - 1).abs()) as i32;
        c.powi(e)
    };
    InfiniteNetworkSpec::new(
        format!("geometric-z({c})"),
        0,
        move |n| vec![(n + 1, cond(n + 1)), (n - 1, cond(n))],
        |n| n.to_string(),
    )
}

/// The infinite binary tree with unit conductances. Keys are heap indices
/// (root 1, children 2k and 2k+1); enumeration is breadth-first.
pub fn binary_tree() -> InfiniteNetworkSpec {
    InfiniteNetworkSpec::new(
        "binary-tree",
        1,
        |k| {
            let mut out = Vec::with_capacity(3);
            out.push((2 * k, 1.0));
            out.push((2 * k + 1, 1.0));
            if k > 1 {
                out.push((k / 2, 1.0));
            }
            out
        },
        |k| k.to_string(),
    )
}

/// One-sided infinite ladder. Column i has a rung of resistance 4^-i; the
/// rail segments between columns i and i+1 have resistance 4^-(i+1). No
/// shortest path between the two column-0 vertices exists; the geodesic
/// infimum is 2/3.
pub fn ladder() -> InfiniteNetworkSpec {
    // key 2i = top_i, key 2i+1 = bottom_i
    InfiniteNetworkSpec::new(
        "ladder",
        0,
        |k| {
            let i = (k / 2) as i32;
            let top = k % 2 == 0;
            let mate = if top { k + 1 } else { k - 1 };
            let mut out = vec![(mate, 4f64.powi(i))];
            out.push((k + 2, 4f64.powi(i + 1)));
            if i > 0 {
                out.push((k - 2, 4f64.powi(i)));
            }
            out
        },
        |k| {
            let i = k / 2;
            if k % 2 == 0 {
                format!("t{i}")
            } else {
                format!("b{i}")
            }
        },
    )
}

/// The integer line with unit conductances (recurrent). Not a named CLI
/// model; used wherever a recurrent infinite network is needed.
pub fn unit_z() -> InfiniteNetworkSpec {
    InfiniteNetworkSpec::new(
        "unit-z",
        0,
        |n| vec![(n + 1, 1.0), (n - 1, 1.0)],
        |n| n.to_string(),
    )
}

/// The half-line 0 - 1 - 2 - ... with unit conductances: recurrent, and its
/// wired truncations agree with the free ones on every interior pair.
pub fn unit_half_line() -> InfiniteNetworkSpec {
    InfiniteNetworkSpec::new(
        "unit-half-line",
        0,
        |n| {
            if n > 0 {
                vec![(n + 1, 1.0), (n - 1, 1.0)]
            } else {
                vec![(1, 1.0)]
            }
        },
        |n| n.to_string(),
    )
}
