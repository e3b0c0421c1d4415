//! Geodesic distance, metric comparison bounds (geodesic and commutator),
//! distances between probability measures, negative-semidefiniteness of
//! squared metrics, and the isometric Hilbert-space embedding built from a
//! base-pivoted Gram matrix.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{ball_exhaustion, free_truncation, NetworkSource};
use crate::network::Network;
use crate::resistance::effective_resistance;
use crate::solver::{assemble_laplacian, energy_of, solve_grounded, Potential};

/// Dijkstra over edge resistances 1/c: the geodesic distance on a finite
/// network.
pub fn geodesic_distance(net: &Network, x: usize, y: usize) -> f64 {
    geodesic_distances_from(net, x)[y]
}

/// Geodesic distances from one source to every vertex.
pub fn geodesic_distances_from(net: &Network, x: usize) -> Vec<f64> {
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // min-heap on distance
            other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
        }
    }
    let mut dist = vec![f64::INFINITY; net.len()];
    dist[x] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, x));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, c) in net.neighbors(u) {
            let nd = d + 1.0 / c;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist
}

/// Geodesic distance on a finite network or an infinite spec. On infinite
/// models the infimum is approached over growing truncations; the search
/// stops early when every escape route already costs more than the
/// incumbent, and otherwise runs until the per-truncation values settle.
pub fn geodesic_distance_source(
    source: &NetworkSource,
    x: &str,
    y: &str,
    radius_budget: u32,
) -> Result<f64> {
    match source {
        NetworkSource::Finite(net) => {
            let ix = net.index_of(x)?;
            let iy = net.index_of(y)?;
            Ok(geodesic_distance(net, ix, iy))
        }
        NetworkSource::Infinite(spec) => {
            let mut last: Option<f64> = None;
            let mut stable = 0u32;
            for radius in 1..=radius_budget {
                let exh = ball_exhaustion(source, &[radius])?;
                let net = free_truncation(source, &exh, 0)?;
                let (ix, iy) = match (net.index_of(x), net.index_of(y)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue, // endpoints not yet inside the ball
                };
                let from_x = geodesic_distances_from(&net, ix);
                let incumbent = from_x[iy];
                // vertices on the ball surface are the only exits
                let inside: std::collections::HashSet<i64> =
                    exh.set(0).iter().copied().collect();
                let frontier_bound = exh
                    .set(0)
                    .iter()
                    .filter(|&&key| {
                        spec.neighbors(key).iter().any(|(w, _)| !inside.contains(w))
                    })
                    .map(|&key| from_x[net.index_of(&spec.id_of(key)).unwrap()])
                    .fold(f64::INFINITY, f64::min);
                if frontier_bound >= incumbent {
                    return Ok(incumbent); // no outside path can do better
                }
                if let Some(prev) = last {
                    if (prev - incumbent).abs() <= 1e-9 * incumbent.max(1e-30) {
                        stable += 1;
                        if stable >= 3 {
                            return Ok(incumbent);
                        }
                    } else {
                        stable = 0;
                    }
                }
                last = Some(incumbent);
            }
            Err(Error::NonConvergence(format!(
                "geodesic search did not settle by radius {radius_budget}"
            )))
        }
    }
}

/// One pair's geodesic comparison.
#[derive(Debug, Clone)]
pub struct GeodesicBoundRow {
    pub x: String,
    pub y: String,
    pub resistance: f64,
    pub geodesic: f64,
}

/// Compare effective resistance to geodesic distance over the given pairs;
/// the resistance never exceeds the geodesic distance, with equality
/// exactly on trees.
pub fn geodesic_bound_check(net: &Network, pairs: &[(usize, usize)]) -> Result<Vec<GeodesicBoundRow>> {
    pairs
        .iter()
        .map(|&(x, y)| {
            Ok(GeodesicBoundRow {
                x: net.id(x).to_string(),
                y: net.id(y).to_string(),
                resistance: effective_resistance(net, x, y)?,
                geodesic: geodesic_distance(net, x, y),
            })
        })
        .collect()
}

/// Largest dense size accepted by the commutator check.
pub const COMMUTATOR_DENSE_LIMIT: usize = 200;

/// Operator norm of the commutator [M_v, L] on the vertex l2 space.
/// Requires unit conductances.
pub fn commutator_norm(net: &Network, v: &Potential) -> Result<f64> {
    if net.len() > COMMUTATOR_DENSE_LIMIT {
        return Err(Error::Precondition(format!(
            "commutator check is dense-only (n <= {COMMUTATOR_DENSE_LIMIT})"
        )));
    }
    if net.edges().iter().any(|&(_, _, c)| (c - 1.0).abs() > 1e-12) {
        return Err(Error::Precondition(
            "commutator bound requires unit conductances".into(),
        ));
    }
    let ordering: Vec<usize> = (0..net.len()).collect();
    let lap = assemble_laplacian(net, &ordering);
    let n = net.len();
    let mut comm = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            comm[(i, j)] = lap[(i, j)] * (v.values[i] - v.values[j]);
        }
    }
    Ok(linalg::operator_norm(&comm))
}

/// One potential's commutator bound data.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorRow {
    pub norm: f64,
    pub energy: f64,
}

/// For each test potential, the commutator operator norm and the energy:
/// norm^2 <= 2 E(v).
pub fn commutator_bound_check(net: &Network, potentials: &[Potential]) -> Result<Vec<CommutatorRow>> {
    potentials
        .iter()
        .map(|v| {
            Ok(CommutatorRow {
                norm: commutator_norm(net, v)?,
                energy: energy_of(net, v),
            })
        })
        .collect()
}

/// Feasibility data for the normalized kernel-difference witness of one pair.
#[derive(Debug, Clone)]
pub struct ConnesWitnessRow {
    pub x: String,
    pub y: String,
    /// ||[v*, L]|| for v* = (v_x - v_y)/E(v_x - v_y)^(1/2); feasible when
    /// <= sqrt(2).
    pub witness_norm: f64,
    /// |v*(x) - v*(y)|^2; equals R(x, y).
    pub witness_gap_squared: f64,
    pub resistance: f64,
}

/// Certify the commutator lower bound: the normalized dipole difference is
/// feasible for the sup and attains the resistance.
pub fn connes_witness_check(net: &Network, pairs: &[(usize, usize)]) -> Result<Vec<ConnesWitnessRow>> {
    let mut rows = Vec::new();
    for &(x, y) in pairs {
        let vx = crate::solver::energy_kernel_element(net, x)?;
        let vy = crate::solver::energy_kernel_element(net, y)?;
        let w = Potential::from_values(
            vx.values
                .iter()
                .zip(&vy.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        );
        let e = energy_of(net, &w);
        let scale = e.sqrt();
        let vstar = Potential::from_values(w.values.iter().map(|&v| v / scale).collect());
        let witness_norm = commutator_norm(net, &vstar)?;
        let gap = vstar.value(x) - vstar.value(y);
        rows.push(ConnesWitnessRow {
            x: net.id(x).to_string(),
            y: net.id(y).to_string(),
            witness_norm,
            witness_gap_squared: gap * gap,
            resistance: effective_resistance(net, x, y)?,
        });
    }
    Ok(rows)
}

/// A finitely supported probability measure on the vertices.
#[derive(Debug, Clone)]
pub struct ProbabilityMeasure {
    weights: Vec<f64>,
}

impl ProbabilityMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Precondition("measure weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "measure weights must sum to 1, got {total}"
            )));
        }
        Ok(ProbabilityMeasure { weights })
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        ProbabilityMeasure { weights }
    }

    pub fn uniform(n: usize, support: &[usize]) -> Self {
        let mut weights = vec![0.0; n];
        for &v in support {
            weights[v] = 1.0 / support.len() as f64;
        }
        ProbabilityMeasure { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Total variation distance, in the 2 sup_A |m(A) - n(A)| convention:
/// the L1 distance of the weights.
pub fn tv_distance(mu: &ProbabilityMeasure, nu: &ProbabilityMeasure) -> Result<f64> {
    if mu.weights.len() != nu.weights.len() {
        return Err(Error::Precondition("measures on different supports".into()));
    }
    Ok(mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(&a, &b)| (a - b).abs())
        .sum())
}

/// Which resistance form backs the measure distance: the free form on a
/// network as given, the wired form when the network is a wired truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    Free,
    Wired,
}

/// Effective resistance between probability measures: the squared energy
/// norm of the Riesz representer of u -> sum u (mu - nu), obtained from one
/// grounded solve with charge mu - nu. On a finite network the free and
/// wired forms coincide; the wired variant of an infinite model is reached
/// by passing its wired truncation.
pub fn measure_resistance(
    net: &Network,
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    _mode: MeasureMode,
) -> Result<f64> {
    if mu.weights.len() != net.len() || nu.weights.len() != net.len() {
        return Err(Error::Precondition("measure support must match the network".into()));
    }
    let charge: Vec<f64> = mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(&a, &b)| a - b)
        .collect();
    if charge.iter().all(|&c| c.abs() < 1e-15) {
        return Ok(0.0);
    }
    let phi = solve_grounded(net, &charge)?;
    // E(phi) = sum phi (mu - nu)
    Ok(phi
        .values
        .iter()
        .zip(&charge)
        .map(|(&p, &c)| p * c)
        .sum())
}

/// Result of the zero-sum eigen-check of a squared metric.
#[derive(Debug, Clone)]
pub struct NsdReport {
    /// Largest eigenvalue of the squared metric restricted to the zero-sum
    /// subspace (should be <= 0 up to tolerance).
    pub max_zero_sum_eigenvalue: f64,
    pub min_zero_sum_eigenvalue: f64,
    /// Spectral norm of the squared-metric matrix.
    pub norm: f64,
    /// A zero-sum witness achieving the maximal value, when positive.
    pub witness: Option<Vec<f64>>,
}

impl NsdReport {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.max_zero_sum_eigenvalue <= rel_tol * self.norm
    }
}

/// Orthonormal basis of the zero-sum subspace (Helmert contrasts), as the
/// columns of an n x (n-1) matrix.
fn zero_sum_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n - 1);
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = norm;
        }
        b[(k, k - 1)] = -(k as f64) * norm;
    }
    b
}

/// Eigen-check of a squared metric on the zero-sum subspace.
pub fn negative_semidefinite_check(d_squared: &DMatrix<f64>) -> Result<NsdReport> {
    let n = d_squared.nrows();
    if n != d_squared.ncols() || n < 2 {
        return Err(Error::Precondition("need a square matrix of size >= 2".into()));
    }
    for i in 0..n {
        if d_squared[(i, i)].abs() > 1e-12 {
            return Err(Error::Precondition("squared metric must have zero diagonal".into()));
        }
        for j in 0..n {
            if (d_squared[(i, j)] - d_squared[(j, i)]).abs() > 1e-9 {
                return Err(Error::Precondition("squared metric must be symmetric".into()));
            }
        }
    }
    let b = zero_sum_basis(n);
    let restricted = b.transpose() * d_squared * &b;
    let sym = (&restricted + restricted.transpose()) * 0.5;
    let (vals, vecs) = linalg::sym_eigendecomposition(&sym);
    let (mut max_val, mut max_idx) = (f64::NEG_INFINITY, 0);
    let mut min_val = f64::INFINITY;
    for (i, &v) in vals.iter().enumerate() {
        if v > max_val {
            max_val = v;
            max_idx = i;
        }
        min_val = min_val.min(v);
    }
    let norm = linalg::sym_spectral_norm(d_squared);
    let witness = if max_val > 0.0 {
        let w = vecs.column(max_idx);
        let f = &b * w;
        Some(f.iter().copied().collect())
    } else {
        None
    };
    Ok(NsdReport {
        max_zero_sum_eigenvalue: max_val,
        min_zero_sum_eigenvalue: min_val,
        norm,
        witness,
    })
}

/// Both sides of the kernel identity behind negative semidefiniteness:
/// for zero-sum f supported on `sample`,
/// sum f(x) R(x,y) f(y) = -2 || sum f(x) v_x ||^2 in the energy norm.
pub fn nsd_proof_identity(
    net: &Network,
    sample: &[usize],
    f: &[f64],
    r_matrix: &DMatrix<f64>,
) -> Result<(f64, f64)> {
    if f.len() != sample.len() {
        return Err(Error::Precondition("coefficient count must match sample".into()));
    }
    let total: f64 = f.iter().sum();
    if total.abs() > 1e-9 {
        return Err(Error::Precondition("coefficients must sum to zero".into()));
    }
    let m = sample.len();
    let mut lhs = 0.0;
    for i in 0..m {
        for j in 0..m {
            lhs += f[i] * r_matrix[(i, j)] * f[j];
        }
    }
    // sum f(x) v_x solves L phi = sum f(x)(delta_x - delta_o) = f (as the
    // coefficients sum to zero)
    let mut charge = vec![0.0; net.len()];
    for (&v, &c) in sample.iter().zip(f) {
        charge[v] += c;
    }
    let phi = solve_grounded(net, &charge)?;
    let rhs = -2.0 * energy_of(net, &phi);
    Ok((lhs, rhs))
}

/// Relative eigenvalue clipping threshold for the embedding.
pub const EMBED_CLIP_REL: f64 = 1e-9;

/// The isometric embedding of a finite metric space with negative
/// semidefinite squared metric.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// The input metric d (not squared).
    pub metric: DMatrix<f64>,
    pub gram: DMatrix<f64>,
    /// Extremes of the zero-sum-restricted quadratic form of d^2.
    pub max_zero_sum_eigenvalue: f64,
    pub min_zero_sum_eigenvalue: f64,
    /// Coordinates per point, `rank` entries each.
    pub coordinates: Vec<Vec<f64>>,
    pub rank: usize,
    /// max over pairs of | ||w_x - w_y||^2 - d^2(x, y) |.
    pub max_defect: f64,
}

/// Embed a finite metric space into Euclidean coordinates so that norm
/// differences reproduce the metric: Gram pivot at `pivot`, eigenvalue
/// clipping at EMBED_CLIP_REL. Fails when the squared metric is not
/// negative semidefinite.
pub fn vn_embed(metric: &DMatrix<f64>, pivot: usize) -> Result<EmbeddingResult> {
    let n = metric.nrows();
    if n != metric.ncols() || n < 2 {
        return Err(Error::Precondition("need a square metric of size >= 2".into()));
    }
    if pivot >= n {
        return Err(Error::Precondition("pivot out of range".into()));
    }
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d2[(i, j)] = metric[(i, j)] * metric[(i, j)];
        }
    }
    let nsd = negative_semidefinite_check(&d2)?;
    if !nsd.passed(EMBED_CLIP_REL) {
        return Err(Error::Validation {
            invariant: "squared metric negative semidefinite on zero-sum vectors".into(),
            witness: format!(
                "max zero-sum eigenvalue {:.3e} of norm {:.3e}",
                nsd.max_zero_sum_eigenvalue, nsd.norm
            ),
        });
    }

    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = 0.5 * (d2[(i, pivot)] + d2[(j, pivot)] - d2[(i, j)]);
        }
    }
    let gram_sym = (&gram + gram.transpose()) * 0.5;
    let (vals, vecs) = linalg::sym_eigendecomposition(&gram_sym);
    let gnorm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let clip = EMBED_CLIP_REL * gnorm.max(f64::MIN_POSITIVE);
    if let Some(&bad) = vals.iter().find(|&&v| v < -clip) {
        return Err(Error::Validation {
            invariant: "Gram matrix positive semidefinite".into(),
            witness: format!("eigenvalue {bad:.3e}"),
        });
    }
    let kept: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > clip).collect();
    let rank = kept.len();
    let mut coordinates = vec![vec![0.0; rank]; n];
    for (dim, &ei) in kept.iter().enumerate() {
        let scale = vals[ei].sqrt();
        for (x, coord) in coordinates.iter_mut().enumerate() {
            coord[dim] = scale * vecs[(x, ei)];
        }
    }
    let mut max_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dist2: f64 = coordinates[i]
                .iter()
                .zip(&coordinates[j])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            max_defect = max_defect.max((dist2 - d2[(i, j)]).abs());
        }
    }
    Ok(EmbeddingResult {
        metric: metric.clone(),
        gram: gram_sym,
        max_zero_sum_eigenvalue: nsd.max_zero_sum_eigenvalue,
        min_zero_sum_eigenvalue: nsd.min_zero_sum_eigenvalue,
        coordinates,
        rank,
        max_defect,
    })
}

/// Pairwise resistance matrix over a vertex sample.
pub fn resistance_matrix(net: &Network, sample: &[usize]) -> Result<DMatrix<f64>> {
    let m = sample.len();
    let mut r = DMatrix::zeros(m, m);
    // one kernel solve per sample vertex; R(x,y) = (u_x - u_y)(x) - (u_x - u_y)(y)
    let kernels: Vec<Potential> = sample
        .iter()
        .map(|&x| crate::solver::energy_kernel_element(net, x))
        .collect::<Result<_>>()?;
    for i in 0..m {
        for j in i + 1..m {
            let (x, y) = (sample[i], sample[j]);
            let diff_x = kernels[i].value(x) - kernels[j].value(x);
            let diff_y = kernels[i].value(y) - kernels[j].value(y);
            let val = diff_x - diff_y;
            r[(i, j)] = val;
            r[(j, i)] = val;
        }
    }
    Ok(r)
}

/// Entrywise square root of a nonnegative matrix (metric from squared
/// metric or resistance).
pub fn entrywise_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0).sqrt())
}
