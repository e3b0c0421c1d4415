//! Schur-complement reduction of networks onto vertex subsets, the classical
//! series / parallel / wye-delta transforms (special cases of star
//! elimination), trace resistance over exhaustions, and the epsilon-regularized
//! shorted operator.

use std::collections::{BinaryHeap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::limits::{LimitEstimate, TruncationValue};
use crate::linalg;
use crate::models::{ball_exhaustion, free_truncation, Exhaustion, NetworkSource};
use crate::network::Network;
use crate::solver::{assemble_laplacian, dirichlet_solve};

/// Conductances below this fraction of the largest original conductance are
/// pruned after reduction.
pub const PRUNE_REL: f64 = 1e-13;

/// One vertex elimination, with the transform it realizes.
#[derive(Debug, Clone)]
pub struct ElimStep {
    pub vertex: String,
    /// "series" for degree 2, "wye-delta" for degree 3, "star(d)" otherwise.
    pub rule: String,
}

/// Result of tracing a network onto a kept vertex set.
#[derive(Debug, Clone)]
pub struct TraceResult {
    pub network: Network,
    /// Reduced Laplacian over the kept vertices, in keep order.
    pub laplacian: DMatrix<f64>,
    pub elimination: Vec<ElimStep>,
}

/// Schur complement of the network Laplacian onto `keep`, computed by
/// repeated single-vertex star eliminations in minimum-degree order. The
/// reduced object is again a network on the kept vertices.
pub fn schur_trace(net: &Network, keep: &[usize]) -> Result<TraceResult> {
    if keep.is_empty() {
        return Err(Error::Precondition("keep set must be nonempty".into()));
    }
    let n = net.len();
    let mut kept = vec![false; n];
    for &v in keep {
        if v >= n {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        kept[v] = true;
    }
    let mut adj: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
    for &(u, v, c) in net.edges() {
        adj[u].insert(v as u32, c);
        adj[v].insert(u as u32, c);
    }

    // lazy min-degree queue over the complement
    let mut heap: BinaryHeap<(std::cmp::Reverse<usize>, usize)> = (0..n)
        .filter(|&v| !kept[v])
        .map(|v| (std::cmp::Reverse(adj[v].len()), v))
        .collect();
    let mut eliminated = vec![false; n];
    let mut elimination = Vec::new();

    while let Some((std::cmp::Reverse(deg), t)) = heap.pop() {
        if eliminated[t] || deg != adj[t].len() {
            continue; // stale entry
        }
        eliminated[t] = true;
        let nbrs: Vec<(u32, f64)> = adj[t].drain().collect();
        let pivot: f64 = nbrs.iter().map(|&(_, c)| c).sum();
        // star elimination works in sums and products of positive
        // conductances, so any positive finite pivot is sound
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::IllConditioned(format!(
                "pivot {pivot:.3e} at {}",
                net.id(t),
            )));
        }
        for &(i, _) in &nbrs {
            adj[i as usize].remove(&(t as u32));
        }
        for a in 0..nbrs.len() {
            let (i, ci) = nbrs[a];
            for &(j, cj) in nbrs.iter().skip(a + 1) {
                let delta = ci * cj / pivot;
                *adj[i as usize].entry(j).or_insert(0.0) += delta;
                *adj[j as usize].entry(i).or_insert(0.0) += delta;
            }
        }
        let rule = match nbrs.len() {
            2 => "series".to_string(),
            3 => "wye-delta".to_string(),
            d => format!("star({d})"),
        };
        elimination.push(ElimStep {
            vertex: net.id(t).to_string(),
            rule,
        });
        for &(i, _) in &nbrs {
            if !kept[i as usize] && !eliminated[i as usize] {
                heap.push((std::cmp::Reverse(adj[i as usize].len()), i as usize));
            }
        }
    }

    // assemble the reduced network; prune rounding dust against the local
    // degree scale (a global max-c scale would delete genuine edges on
    // models whose conductances grow geometrically)
    let base_id = if kept[net.base()] {
        net.id(net.base()).to_string()
    } else {
        net.id(keep[0]).to_string()
    };
    let mut reduced_degree: HashMap<usize, f64> = HashMap::new();
    for &u in keep {
        let d: f64 = adj[u].values().sum();
        reduced_degree.insert(u, d);
    }
    let mut raw = Vec::new();
    for &u in keep {
        for (&v, &c) in &adj[u] {
            let v = v as usize;
            if u < v {
                let local = reduced_degree[&u].min(reduced_degree[&v]);
                if c > PRUNE_REL * local {
                    raw.push((net.id(u).to_string(), net.id(v).to_string(), c));
                }
            }
        }
    }
    let network = Network::from_edges(Some(&base_id), raw)?;
    if network.len() != keep.len() {
        return Err(Error::Validation {
            invariant: "trace connects all kept vertices".into(),
            witness: "pruning disconnected the reduced network".into(),
        });
    }
    let order: Vec<usize> = keep
        .iter()
        .map(|&v| network.index_of(net.id(v)))
        .collect::<Result<_>>()?;
    let laplacian = assemble_laplacian(&network, &order);
    Ok(TraceResult {
        network,
        laplacian,
        elimination,
    })
}

/// Block-form Schur complement A - B^T D^{-1} B over an explicit ordering,
/// as a dense oracle for the elimination route.
pub fn schur_trace_dense(net: &Network, keep: &[usize]) -> Result<DMatrix<f64>> {
    let comp: Vec<usize> = (0..net.len()).filter(|v| !keep.contains(v)).collect();
    let mut ordering = keep.to_vec();
    ordering.extend(&comp);
    let full = assemble_laplacian(net, &ordering);
    let k = keep.len();
    let m = comp.len();
    let a = full.view((0, 0), (k, k)).into_owned();
    if m == 0 {
        return Ok(a);
    }
    let bt = full.view((0, k), (k, m)).into_owned();
    let b = full.view((k, 0), (m, k)).into_owned();
    let d = full.view((k, k), (m, m)).into_owned();
    let eig = linalg::sym_eigenvalues(&d);
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if lo <= 0.0 || hi / lo > 1e12 {
        return Err(Error::IllConditioned(format!(
            "complement block condition estimate {:.3e}",
            hi / lo.max(f64::MIN_POSITIVE)
        )));
    }
    let chol = d
        .cholesky()
        .ok_or_else(|| Error::Solve("complement block not positive definite".into()))?;
    let dinvb = chol.solve(&b);
    Ok(a - bt * dinvb)
}

/// Series reduction: a degree-2 vertex is removed and its two edges merge
/// into one with c = (c1^-1 + c2^-1)^-1.
pub fn series_reduce(net: &Network, z: usize) -> Result<Network> {
    if net.neighbors(z).len() != 2 {
        return Err(Error::Precondition(format!(
            "series reduction needs degree 2 at {}, found {}",
            net.id(z),
            net.neighbors(z).len()
        )));
    }
    eliminate_one(net, z)
}

/// Wye-delta: a degree-3 vertex is replaced by the triangle on its
/// neighbors with c_xy = c_xt c_ty / c(t).
pub fn wye_delta(net: &Network, t: usize) -> Result<Network> {
    if net.neighbors(t).len() != 3 {
        return Err(Error::Precondition(format!(
            "wye-delta needs degree 3 at {}, found {}",
            net.id(t),
            net.neighbors(t).len()
        )));
    }
    eliminate_one(net, t)
}

/// Merge parallel edges. Parsing already merges, so this is the identity on
/// constructed networks; kept for interface completeness.
pub fn parallel_merge(net: &Network) -> Result<Network> {
    let raw: Vec<(String, String, f64)> = net
        .edges()
        .iter()
        .map(|&(u, v, c)| (net.id(u).to_string(), net.id(v).to_string(), c))
        .collect();
    Network::from_edges(Some(net.id(net.base())), raw)
}

fn eliminate_one(net: &Network, t: usize) -> Result<Network> {
    let keep: Vec<usize> = (0..net.len()).filter(|&v| v != t).collect();
    Ok(schur_trace(net, &keep)?.network)
}

/// Trace the network onto the pair {x, y}; the single reduced conductance is
/// 1/R(x, y).
pub fn reduce_to_pair(net: &Network, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(Error::Precondition("reduce_to_pair requires x != y".into()));
    }
    let traced = schur_trace(net, &[x, y])?;
    let ix = traced.network.index_of(net.id(x))?;
    let iy = traced.network.index_of(net.id(y))?;
    Ok(traced.network.conductance(ix, iy))
}

/// Trace resistance over an exhaustion. Each truncation's value is the
/// resistance inside the trace of the largest available truncation onto
/// V[G_k]; by trace invariance the sequence is constant (up to solver
/// tolerance) once both endpoints are interior, and on transient models it
/// matches the free limit.
pub fn trace_resistance(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
) -> Result<LimitEstimate> {
    let parent = match source {
        NetworkSource::Finite(net) => net.clone(),
        NetworkSource::Infinite(_) => free_truncation(source, exhaustion, exhaustion.len() - 1)?,
    };
    let px = parent.index_of(x)?;
    let py = parent.index_of(y)?;
    let mut values = Vec::new();
    for k in 0..exhaustion.len() {
        let keep: Vec<usize> = match source {
            NetworkSource::Finite(_) => exhaustion.set(k).iter().map(|&v| v as usize).collect(),
            NetworkSource::Infinite(spec) => exhaustion
                .set(k)
                .iter()
                .map(|&key| parent.index_of(&spec.id_of(key)))
                .collect::<Result<_>>()?,
        };
        if !keep.contains(&px) || !keep.contains(&py) {
            return Err(Error::Precondition(format!(
                "{x} and {y} must lie in the first truncation"
            )));
        }
        let traced = schur_trace(&parent, &keep)?;
        let ix = traced.network.index_of(x)?;
        let iy = traced.network.index_of(y)?;
        let value = crate::limits::resistance_within(&traced.network, ix, iy)?;
        values.push(TruncationValue {
            k,
            radius: exhaustion.radii()[k],
            value,
        });
    }
    // trace invariance: successive values agree
    for w in values.windows(2) {
        let scale = w[1].value.abs().max(1e-30);
        if (w[0].value - w[1].value).abs() > 1e-8 * scale {
            return Err(Error::Solve(format!(
                "trace invariance violated: {} vs {}",
                w[0].value, w[1].value
            )));
        }
    }
    Ok(LimitEstimate::from_values_with_coverage(
        "trace",
        values,
        1e-8,
        crate::limits::source_covered(source, exhaustion),
    ))
}

/// Convenience: trace resistance with a ball exhaustion over the radii.
pub fn trace_resistance_over_radii(
    source: &NetworkSource,
    x: &str,
    y: &str,
    radii: &[u32],
) -> Result<LimitEstimate> {
    let exh = ball_exhaustion(source, radii)?;
    trace_resistance(source, x, y, &exh)
}

/// One row of the trace-conductance comparison.
#[derive(Debug, Clone)]
pub struct TraceConductanceRow {
    pub x: String,
    pub y: String,
    pub schur: f64,
    pub formula: f64,
}

/// Verify that Schur-derived conductances match
/// c_xy + c(x) P[x reaches y through the complement] computed by exact
/// absorbing solves.
pub fn trace_conductance_check(
    net: &Network,
    keep: &[usize],
) -> Result<Vec<TraceConductanceRow>> {
    let traced = schur_trace(net, keep)?;
    let kept_set: Vec<usize> = keep.to_vec();
    let mut rows = Vec::new();
    for (a, &x) in kept_set.iter().enumerate() {
        for &y in kept_set.iter().skip(a + 1) {
            let ix = traced.network.index_of(net.id(x))?;
            let iy = traced.network.index_of(net.id(y))?;
            let schur = traced.network.conductance(ix, iy);

            // absorbing probabilities: pin every kept vertex, 1 at y
            let pinned: Vec<(usize, f64)> = kept_set
                .iter()
                .map(|&v| (v, if v == y { 1.0 } else { 0.0 }))
                .collect();
            let through = if kept_set.len() == net.len() {
                0.0
            } else {
                let absorb = dirichlet_solve(net, &pinned)?;
                let cx = net.total_conductance(x);
                let step: f64 = net
                    .neighbors(x)
                    .iter()
                    .filter(|&&(w, _)| !kept_set.contains(&w))
                    .map(|&(w, c)| (c / cx) * absorb.value(w))
                    .sum();
                cx * step
            };
            let formula = net.conductance(x, y) + through;
            rows.push(TraceConductanceRow {
                x: net.id(x).to_string(),
                y: net.id(y).to_string(),
                schur,
                formula,
            });
        }
    }
    Ok(rows)
}

/// Shorted operator of a symmetric positive semidefinite matrix onto `keep`:
/// the limit of A - B^T (D + eps)^{-1} B along a decreasing epsilon schedule.
/// Converges to the Schur complement whenever D is invertible.
pub fn shorted_operator(
    matrix: &DMatrix<f64>,
    keep: &[usize],
    eps_schedule: &[f64],
) -> Result<DMatrix<f64>> {
    if eps_schedule.is_empty() || eps_schedule.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Precondition(
            "epsilon schedule must be positive decreasing".into(),
        ));
    }
    let n = matrix.nrows();
    let comp: Vec<usize> = (0..n).filter(|v| !keep.contains(v)).collect();
    let k = keep.len();
    let m = comp.len();
    let mut a = DMatrix::zeros(k, k);
    for (i, &vi) in keep.iter().enumerate() {
        for (j, &vj) in keep.iter().enumerate() {
            a[(i, j)] = matrix[(vi, vj)];
        }
    }
    if m == 0 {
        return Ok(a);
    }
    let mut b = DMatrix::zeros(m, k);
    let mut d = DMatrix::zeros(m, m);
    for (i, &vi) in comp.iter().enumerate() {
        for (j, &vj) in keep.iter().enumerate() {
            b[(i, j)] = matrix[(vi, vj)];
        }
        for (j, &vj) in comp.iter().enumerate() {
            d[(i, j)] = matrix[(vi, vj)];
        }
    }
    let scale = linalg::frobenius(&a).max(f64::MIN_POSITIVE);
    let mut prev: Option<DMatrix<f64>> = None;
    for &eps in eps_schedule {
        if eps <= 0.0 {
            return Err(Error::Precondition("epsilon must be positive".into()));
        }
        let reg = &d + DMatrix::identity(m, m) * eps;
        let chol = reg
            .cholesky()
            .ok_or_else(|| Error::Solve("regularized block not positive definite".into()))?;
        let dinvb = chol.solve(&b);
        let iterate = &a - b.transpose() * dinvb;
        if let Some(p) = &prev {
            if linalg::frobenius(&(&iterate - p)) <= 1e-9 * scale {
                return Ok(iterate);
            }
        }
        prev = Some(iterate);
    }
    Err(Error::NonConvergence(
        "shorted-operator schedule exhausted before the iterates settled".into(),
    ))
}

/// A single regularized iterate A - B^T (D + eps)^{-1} B, exposed for
/// monotonicity checks.
pub fn shorted_iterate(matrix: &DMatrix<f64>, keep: &[usize], eps: f64) -> Result<DMatrix<f64>> {
    shorted_operator(matrix, keep, &[eps * (1.0 + 1e-9), eps]).or_else(|e| match e {
        Error::NonConvergence(_) => {
            // take the final iterate regardless of settling
            let n = matrix.nrows();
            let comp: Vec<usize> = (0..n).filter(|v| !keep.contains(v)).collect();
            let k = keep.len();
            let m = comp.len();
            let mut a = DMatrix::zeros(k, k);
            for (i, &vi) in keep.iter().enumerate() {
                for (j, &vj) in keep.iter().enumerate() {
                    a[(i, j)] = matrix[(vi, vj)];
                }
            }
            if m == 0 {
                return Ok(a);
            }
            let mut b = DMatrix::zeros(m, k);
            let mut d = DMatrix::zeros(m, m);
            for (i, &vi) in comp.iter().enumerate() {
                for (j, &vj) in keep.iter().enumerate() {
                    b[(i, j)] = matrix[(vi, vj)];
                }
                for (j, &vj) in comp.iter().enumerate() {
                    d[(i, j)] = matrix[(vi, vj)];
                }
            }
            let reg = &d + DMatrix::identity(m, m) * eps;
            let chol = reg
                .cholesky()
                .ok_or_else(|| Error::Solve("regularized block not positive definite".into()))?;
            Ok(&a - b.transpose() * chol.solve(&b))
        }
        other => Err(other),
    })
}

/// Default epsilon schedule 10^-1 .. 10^-12.
pub fn default_eps_schedule() -> Vec<f64> {
    (1..=12).map(|j| 10f64.powi(-j)).collect()
}

/// Solve the reduced system directly (used by tests comparing block and
/// elimination routes).
pub fn laplacian_solve_check(lap: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    lap.clone().lu().solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::load_network;
    use crate::resistance::effective_resistance;

    #[test]
    fn p3_trace_onto_endpoints() {
        let net = load_network("0 1 1\n1 2 1").unwrap();
        let keep = [0usize, 2];
        let traced = schur_trace(&net, &keep).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((traced.laplacian.clone() - expected).abs().max() < 1e-12);
        assert_eq!(traced.elimination.len(), 1);
        assert_eq!(traced.elimination[0].rule, "series");
    }

    #[test]
    fn unit_star_traces_to_uniform_triangle() {
        let net = load_network("a t 1\nb t 1\nc t 1").unwrap();
        let t = net.index_of("t").unwrap();
        let keep: Vec<usize> = (0..4).filter(|&v| v != t).collect();
        let traced = schur_trace(&net, &keep).unwrap();
        for (i, &u) in keep.iter().enumerate() {
            for &v in keep.iter().skip(i + 1) {
                let iu = traced.network.index_of(net.id(u)).unwrap();
                let iv = traced.network.index_of(net.id(v)).unwrap();
                assert!((traced.network.conductance(iu, iv) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn keep_all_is_identity() {
        let net = load_network("0 1 2\n1 2 3\n0 2 0.5").unwrap();
        let keep: Vec<usize> = (0..3).collect();
        let traced = schur_trace(&net, &keep).unwrap();
        assert_eq!(traced.network.to_edge_list(), net.to_edge_list());
        assert!(traced.elimination.is_empty());
    }

    #[test]
    fn elimination_matches_dense_block_schur() {
        let net =
            load_network("0 1 1.5\n1 2 0.7\n2 3 2.2\n3 0 0.9\n0 2 1.1\n1 4 0.4\n3 4 1.3").unwrap();
        let keep = [0usize, 2, 4];
        let traced = schur_trace(&net, &keep).unwrap();
        let dense = schur_trace_dense(&net, &keep).unwrap();
        assert!((traced.laplacian.clone() - dense).abs().max() < 1e-10);
    }

    #[test]
    fn star_elimination_matches_product_formula_any_degree() {
        let net = load_network("x1 t 1\nx2 t 2\nx3 t 3\nx4 t 4\nx5 t 5").unwrap();
        let t = net.index_of("t").unwrap();
        let keep: Vec<usize> = (0..net.len()).filter(|&v| v != t).collect();
        let traced = schur_trace(&net, &keep).unwrap();
        let ct = net.total_conductance(t);
        for &u in &keep {
            for &v in &keep {
                if u >= v {
                    continue;
                }
                let expect = net.conductance(u, t) * net.conductance(t, v) / ct;
                let iu = traced.network.index_of(net.id(u)).unwrap();
                let iv = traced.network.index_of(net.id(v)).unwrap();
                assert!((traced.network.conductance(iu, iv) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_laplacian_has_zero_row_sums_and_nonpositive_offdiag() {
        let net = load_network("0 1 1\n1 2 2\n2 3 1\n3 4 2\n4 0 1\n1 3 0.5").unwrap();
        let keep = [0usize, 2];
        let traced = schur_trace(&net, &keep).unwrap();
        let lap = &traced.laplacian;
        for i in 0..lap.nrows() {
            assert!(lap.row(i).sum().abs() <= 1e-10 * net.conductance_scale());
            for j in 0..lap.ncols() {
                if i != j {
                    assert!(lap[(i, j)] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn series_formula() {
        let net = load_network("0 1 2\n1 2 2").unwrap();
        let reduced = series_reduce(&net, 1).unwrap();
        let i0 = reduced.index_of("0").unwrap();
        let i2 = reduced.index_of("2").unwrap();
        assert!((reduced.conductance(i0, i2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wye_delta_formula() {
        let net = load_network("a t 1\nb t 1\nc t 1").unwrap();
        let t = net.index_of("t").unwrap();
        let delta = wye_delta(&net, t).unwrap();
        assert_eq!(delta.len(), 3);
        for &(u, v, c) in delta.edges() {
            let _ = (u, v);
            assert!((c - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_mismatch_rejected() {
        let net = load_network("a t 1\nb t 1\nc t 1").unwrap();
        let t = net.index_of("t").unwrap();
        assert!(series_reduce(&net, t).is_err());
        let a = net.index_of("a").unwrap();
        assert!(wye_delta(&net, a).is_err());
    }

    #[test]
    fn parallel_then_series_reduces_two_route_network_to_one_edge() {
        // two parallel branches x-z-y, declared with duplicate edges that
        // merge at parse; series elimination of the middles leaves one edge
        let net = load_network("x z1 1\nz1 y 1\nx z2 1\nz2 y 1\nx z2 1\nz2 y 1").unwrap();
        let z1 = net.index_of("z1").unwrap();
        let step1 = series_reduce(&net, z1).unwrap();
        let z2 = step1.index_of("z2").unwrap();
        let step2 = series_reduce(&step1, z2).unwrap();
        assert_eq!(step2.len(), 2);
        assert_eq!(step2.edges().len(), 1);
        // branch 1: two unit resistors in series -> 1/2; branch 2 edges
        // merged to c=2 each -> series gives 1; parallel total 3/2
        let ix = step2.index_of("x").unwrap();
        let iy = step2.index_of("y").unwrap();
        assert!((step2.conductance(ix, iy) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn transforms_preserve_resistance() {
        let net = load_network("0 1 1\n1 2 2\n2 3 1\n3 0 2\n1 3 1\nz 0 1\nz 2 3").unwrap();
        let z = net.index_of("z").unwrap();
        let before = effective_resistance(&net, 0, 2).unwrap();
        let reduced = series_reduce(&net, z).unwrap();
        let after =
            effective_resistance(&reduced, reduced.index_of("0").unwrap(), reduced.index_of("2").unwrap())
                .unwrap();
        assert!((before - after).abs() <= 1e-10 * before);
    }

    #[test]
    fn reduce_to_pair_examples() {
        let k3 = load_network("a b 1\nb c 1\na c 1").unwrap();
        assert!((reduce_to_pair(&k3, 0, 1).unwrap() - 1.5).abs() < 1e-12);
        let p3 = load_network("0 1 1\n1 2 1").unwrap();
        assert!((reduce_to_pair(&p3, 0, 2).unwrap() - 0.5).abs() < 1e-12);
        let edge = load_network("0 1 3").unwrap();
        assert!((reduce_to_pair(&edge, 0, 1).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_invariance_on_nested_subsets_of_k5() {
        let mut raw = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                raw.push((i.to_string(), j.to_string(), 1.0 + (i + 2 * j) as f64 * 0.3));
            }
        }
        let net = Network::from_edges(Some("0"), raw).unwrap();
        let h1 = [0usize, 1, 2, 3];
        let h2 = [0usize, 1];
        let t1 = schur_trace(&net, &h1).unwrap().network;
        let r1 = effective_resistance(&t1, t1.index_of("0").unwrap(), t1.index_of("1").unwrap())
            .unwrap();
        let t2 = schur_trace(&net, &h2).unwrap().network;
        let r2 = effective_resistance(&t2, t2.index_of("0").unwrap(), t2.index_of("1").unwrap())
            .unwrap();
        let direct = effective_resistance(&net, 0, 1).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
        assert!((r1 - direct).abs() < 1e-12);
    }

    #[test]
    fn trace_conductance_on_p3() {
        let net = load_network("0 1 1\n1 2 1").unwrap();
        let rows = trace_conductance_check(&net, &[0, 2]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].schur - 0.5).abs() < 1e-12);
        assert!((rows[0].formula - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trace_conductance_keep_all_is_original() {
        let net = load_network("0 1 2\n1 2 3\n0 2 0.5").unwrap();
        let rows = trace_conductance_check(&net, &[0, 1, 2]).unwrap();
        for row in rows {
            assert!((row.schur - row.formula).abs() < 1e-12);
            let x = net.index_of(&row.x).unwrap();
            let y = net.index_of(&row.y).unwrap();
            assert!((row.schur - net.conductance(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn shorted_operator_matches_schur_on_invertible_block() {
        let net = load_network("0 1 1\n1 2 2\n2 0 1\n2 3 1\n3 0 2").unwrap();
        let keep = [0usize, 1];
        let ordering: Vec<usize> = (0..net.len()).collect();
        let lap = assemble_laplacian(&net, &ordering);
        let shorted = shorted_operator(&lap, &keep, &default_eps_schedule()).unwrap();
        let schur = schur_trace_dense(&net, &keep).unwrap();
        assert!((shorted - schur).abs().max() < 1e-8);
    }

    #[test]
    fn shorted_operator_handles_zero_complement_block() {
        // PSD matrix whose complement block is 0: sh(T) must exist and lie
        // below the kept block in Loewner order
        let t = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let keep = [0usize, 1];
        let sh = shorted_operator(&t, &keep, &default_eps_schedule()).unwrap();
        let kept = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let diff = kept - sh;
        let eigs = linalg::sym_eigenvalues(&diff);
        assert!(eigs[0] > -1e-9);
    }

    #[test]
    fn fixed_epsilon_iterate_decreases_to_schur() {
        // (D + eps)^{-1} grows as eps shrinks, so the regularized iterate
        // starts strictly above the Schur complement and decreases to it
        let net = load_network("0 1 1\n1 2 2\n2 0 1\n2 3 1\n3 0 2").unwrap();
        let keep = [0usize, 1];
        let ordering: Vec<usize> = (0..net.len()).collect();
        let lap = assemble_laplacian(&net, &ordering);
        let schur = schur_trace_dense(&net, &keep).unwrap();
        let coarse = shorted_iterate(&lap, &keep, 0.5).unwrap();
        let fine = shorted_iterate(&lap, &keep, 0.01).unwrap();
        let above = linalg::sym_eigenvalues(&(&coarse - &schur));
        assert!(above[0] > 1e-12, "iterate must sit strictly above the Schur complement");
        let ordered = linalg::sym_eigenvalues(&(&coarse - &fine));
        assert!(ordered[0] > -1e-12, "iterates must decrease along the schedule");
        let near = linalg::sym_eigenvalues(&(&fine - &schur));
        assert!(near[0] > -1e-12);
    }

    #[test]
    fn trace_resistance_constant_on_finite_input() {
        let net = load_network("0 1 1\n1 2 2\n2 3 1\n0 3 1\n1 3 4").unwrap();
        let source = NetworkSource::Finite(net.clone());
        let est = trace_resistance_over_radii(&source, "0", "1", &[1, 2, 3]).unwrap();
        let direct = effective_resistance(&net, 0, 1).unwrap();
        for tv in &est.values {
            assert!((tv.value - direct).abs() < 1e-10);
        }
    }
}
