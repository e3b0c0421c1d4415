//! Free, wired, harmonic, and boundary resistances on infinite networks as
//! exhaustion limits, plus the approximate Royden split of energy-kernel
//! elements into finitely-supported and harmonic parts.

use crate::error::{Error, Result};
use crate::models::{free_truncation, wired_truncation, Exhaustion, NetworkSource};
use crate::network::Network;
use crate::solver::{apply_laplacian, energy_of, solve_dipole, Potential};

/// Convergence rule: this many consecutive relative differences below tol.
pub const CONSECUTIVE_RUNS: usize = 3;
/// Default relative tolerance for limit convergence.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default radius budget for CLI-driven exhaustions.
pub const DEFAULT_RADIUS_BUDGET: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
    Constant,
    Mixed,
}

/// One truncation's value in a limit computation.
#[derive(Debug, Clone, Copy)]
pub struct TruncationValue {
    pub k: usize,
    pub radius: u32,
    pub value: f64,
}

/// A sequence of per-truncation values with a convergence verdict.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    pub metric: &'static str,
    pub values: Vec<TruncationValue>,
    pub verdict: Convergence,
    /// Final estimate: the last value (possibly +inf for boundary markers).
    pub estimate: f64,
    pub monotonicity: Monotonicity,
    pub tol: f64,
}

impl LimitEstimate {
    pub fn from_values(metric: &'static str, values: Vec<TruncationValue>, tol: f64) -> Self {
        Self::from_values_with_coverage(metric, values, tol, false)
    }

    /// `covered` marks sequences whose final truncation is the whole (finite)
    /// source, making the last value exact regardless of sequence length.
    pub fn from_values_with_coverage(
        metric: &'static str,
        values: Vec<TruncationValue>,
        tol: f64,
        covered: bool,
    ) -> Self {
        let verdict = if covered || converged(&values, tol) {
            Convergence::Converged
        } else {
            Convergence::NotConverged
        };
        let estimate = values.last().map(|t| t.value).unwrap_or(f64::NAN);
        let monotonicity = monotonicity_of(&values);
        LimitEstimate {
            metric,
            values,
            verdict,
            estimate,
            monotonicity,
            tol,
        }
    }

    pub fn converged(&self) -> bool {
        self.verdict == Convergence::Converged
    }
}

fn converged(values: &[TruncationValue], tol: f64) -> bool {
    if values.len() == 1 {
        // a constant singleton (finite source fully covered) counts
        return true;
    }
    if values.len() < CONSECUTIVE_RUNS + 1 {
        return false;
    }
    values
        .windows(2)
        .rev()
        .take(CONSECUTIVE_RUNS)
        .all(|w| (w[1].value - w[0].value).abs() <= tol * w[1].value.abs().max(1e-30))
}

fn monotonicity_of(values: &[TruncationValue]) -> Monotonicity {
    let slack = 1e-12;
    let mut non_inc = true;
    let mut non_dec = true;
    for w in values.windows(2) {
        let scale = w[0].value.abs().max(1.0);
        if w[1].value > w[0].value + slack * scale {
            non_inc = false;
        }
        if w[1].value < w[0].value - slack * scale {
            non_dec = false;
        }
    }
    match (non_inc, non_dec) {
        (true, true) => Monotonicity::Constant,
        (true, false) => Monotonicity::NonIncreasing,
        (false, true) => Monotonicity::NonDecreasing,
        (false, false) => Monotonicity::Mixed,
    }
}

/// Effective resistance inside one truncation, computed by tracing the
/// network onto the pair. Elimination works entirely in sums and products
/// of positive conductances, so it stays exact even when truncations carry
/// conductances across many orders of magnitude (where grounded solves
/// develop a near-null plateau mode); equality with the dipole route is
/// pinned by tests.
pub fn resistance_within(net: &Network, x: usize, y: usize) -> Result<f64> {
    let c = crate::trace::reduce_to_pair(net, x, y)?;
    Ok(1.0 / c)
}

/// Pairwise resistance matrix over a sample of one truncation's vertices.
/// Large hosts are first traced onto the sample in one elimination pass
/// (resistance-exact), then pairs come from the small reduced network.
pub fn sample_resistance_matrix(
    net: &Network,
    sample: &[usize],
) -> Result<nalgebra::DMatrix<f64>> {
    let reduced;
    let (host, idx): (&Network, Vec<usize>) = if net.len() > 4 * sample.len() + 16 {
        reduced = crate::trace::schur_trace(net, sample)?.network;
        let idx = sample
            .iter()
            .map(|&v| reduced.index_of(net.id(v)))
            .collect::<Result<_>>()?;
        (&reduced, idx)
    } else {
        (net, sample.to_vec())
    };
    let m = idx.len();
    let mut r = nalgebra::DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let v = resistance_within(host, idx[i], idx[j])?;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

fn pair_indices(net: &Network, x: &str, y: &str) -> Result<(usize, usize)> {
    Ok((net.index_of(x)?, net.index_of(y)?))
}

/// Free resistance: the limit of resistances over the full truncations.
/// The sequence must be monotone nonincreasing (Rayleigh).
pub fn free_resistance(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    tol: f64,
) -> Result<LimitEstimate> {
    let (free, _) = free_and_wired(source, x, y, exhaustion, tol)?;
    Ok(free)
}

/// Wired resistance: the limit over the wired truncations; checks
/// R_wired <= R_free at every truncation.
pub fn wired_resistance(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    tol: f64,
) -> Result<LimitEstimate> {
    let (_, wired) = free_and_wired(source, x, y, exhaustion, tol)?;
    Ok(wired)
}

/// Compute the free and wired sequences together, enforcing Rayleigh
/// domination pointwise and monotonicity of the free sequence.
pub fn free_and_wired(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    tol: f64,
) -> Result<(LimitEstimate, LimitEstimate)> {
    if exhaustion.is_empty() {
        return Err(Error::Precondition("empty exhaustion".into()));
    }
    let mut free_vals = Vec::new();
    let mut wired_vals = Vec::new();
    for k in 0..exhaustion.len() {
        let fnet = free_truncation(source, exhaustion, k)?;
        let (fx, fy) = pair_indices(&fnet, x, y)?;
        let rf = resistance_within(&fnet, fx, fy)?;

        let (wnet, _) = wired_truncation(source, exhaustion, k)?;
        let (wx, wy) = pair_indices(&wnet, x, y)?;
        let rw = resistance_within(&wnet, wx, wy)?;

        if rw > rf * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Solve(format!(
                "Rayleigh violated at radius {}: wired {rw} > free {rf}",
                exhaustion.radii()[k]
            )));
        }
        let radius = exhaustion.radii()[k];
        free_vals.push(TruncationValue {
            k,
            radius,
            value: rf,
        });
        wired_vals.push(TruncationValue {
            k,
            radius,
            value: rw,
        });
    }
    for w in free_vals.windows(2) {
        if w[1].value > w[0].value * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Solve(format!(
                "free sequence must be nonincreasing: {} then {}",
                w[0].value, w[1].value
            )));
        }
    }
    let covered = source_covered(source, exhaustion);
    Ok((
        LimitEstimate::from_values_with_coverage("free", free_vals, tol, covered),
        LimitEstimate::from_values_with_coverage("wired", wired_vals, tol, covered),
    ))
}

/// True when the exhaustion's final set is the whole (finite) source, so the
/// last value is exact rather than a limit approximation.
pub fn source_covered(source: &NetworkSource, exhaustion: &Exhaustion) -> bool {
    match source {
        NetworkSource::Finite(net) => exhaustion.set(exhaustion.len() - 1).len() == net.len(),
        NetworkSource::Infinite(_) => false,
    }
}

/// Harmonic resistance: the difference of the free and wired limits,
/// cross-checked against the energy of the harmonic component of the
/// kernel difference at the largest truncation.
pub fn harmonic_resistance(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    tol: f64,
) -> Result<LimitEstimate> {
    let (free, wired) = free_and_wired(source, x, y, exhaustion, tol)?;
    if !free.converged() || !wired.converged() {
        return Err(Error::NonConvergence(
            "harmonic resistance needs converged free and wired limits".into(),
        ));
    }
    let values: Vec<TruncationValue> = free
        .values
        .iter()
        .zip(&wired.values)
        .map(|(f, w)| TruncationValue {
            k: f.k,
            radius: f.radius,
            value: f.value - w.value,
        })
        .collect();
    let estimate = free.estimate - wired.estimate;
    if estimate < -1e-9 {
        return Err(Error::Solve(format!(
            "harmonic resistance came out negative: {estimate}"
        )));
    }
    // cross-check against E(h_x - h_y) when the component is nonnegligible
    if estimate > 1e-6 * free.estimate {
        let e_h = harmonic_energy_difference(source, x, y, exhaustion)?;
        if (e_h - estimate).abs() > 1e-4 * estimate.abs().max(1e-30) {
            return Err(Error::Solve(format!(
                "harmonic resistance {estimate} disagrees with E(h_x - h_y) = {e_h}"
            )));
        }
    }
    let mut out = LimitEstimate::from_values("harmonic", values, tol);
    out.estimate = estimate.max(0.0);
    Ok(out)
}

/// E(h_x - h_y) at the largest truncation, where h = v - f from the Royden
/// split.
pub fn harmonic_energy_difference(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
) -> Result<f64> {
    let sx = royden_split(source, x, exhaustion)?;
    let base_id = sx.network.id(sx.network.base()).to_string();
    let h = if y == base_id {
        sx.h.clone()
    } else {
        let sy = royden_split(source, y, exhaustion)?;
        Potential::from_values(
            sx.h.values
                .iter()
                .zip(&sy.h.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    };
    Ok(energy_of(&sx.network, &h))
}

/// Threshold below which the boundary resistance is reported as infinite.
pub const BOUNDARY_INFINITE_REL: f64 = 1e-9;

/// Boundary resistance 1/(1/R_wired - 1/R_free), cross-checked against the
/// product form R_wired R_free / E(h_x - h_y). Returns +inf when the
/// harmonic part is negligible.
pub fn boundary_resistance(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    tol: f64,
) -> Result<LimitEstimate> {
    let (free, wired) = free_and_wired(source, x, y, exhaustion, tol)?;
    if !free.converged() || !wired.converged() {
        return Err(Error::NonConvergence(
            "boundary resistance needs converged free and wired limits".into(),
        ));
    }
    let harm = free.estimate - wired.estimate;
    let values: Vec<TruncationValue> = free
        .values
        .iter()
        .zip(&wired.values)
        .map(|(f, w)| {
            let h = f.value - w.value;
            let value = if h <= BOUNDARY_INFINITE_REL * f.value {
                f64::INFINITY
            } else {
                1.0 / (1.0 / w.value - 1.0 / f.value)
            };
            TruncationValue {
                k: f.k,
                radius: f.radius,
                value,
            }
        })
        .collect();
    if harm <= BOUNDARY_INFINITE_REL * free.estimate {
        let mut out = LimitEstimate::from_values("boundary", values, tol);
        out.estimate = f64::INFINITY;
        out.verdict = Convergence::Converged;
        return Ok(out);
    }
    let via_reciprocal = 1.0 / (1.0 / wired.estimate - 1.0 / free.estimate);
    let e_h = harmonic_energy_difference(source, x, y, exhaustion)?;
    let via_product = wired.estimate * free.estimate / e_h;
    if (via_reciprocal - via_product).abs() > 1e-6 * via_reciprocal.abs() {
        return Err(Error::Solve(format!(
            "boundary resistance routes disagree: {via_reciprocal} vs {via_product}"
        )));
    }
    let mut out = LimitEstimate::from_values("boundary", values, tol);
    out.estimate = via_reciprocal;
    Ok(out)
}

/// Approximate Royden decomposition of the energy-kernel element at `x` on
/// the largest truncation: v from the free solve, f from the wired
/// (Dirichlet) solve, h = v - f.
#[derive(Debug, Clone)]
pub struct RoydenSplit {
    /// The largest free truncation; all potentials live on its vertices.
    pub network: Network,
    pub v: Potential,
    pub f: Potential,
    pub h: Potential,
    pub energy_v: f64,
    pub energy_f: f64,
    pub energy_h: f64,
    /// |E(f) + E(h) - E(v)| / E(v).
    pub orthogonality_defect: f64,
    /// max |(L h)(z)| over vertices at graph distance >= 2 from the
    /// truncation boundary.
    pub harmonic_residual: f64,
}

pub fn royden_split(source: &NetworkSource, x: &str, exhaustion: &Exhaustion) -> Result<RoydenSplit> {
    let last = exhaustion.len() - 1;
    let fnet = free_truncation(source, exhaustion, last)?;
    let ix = fnet.index_of(x)?;
    let v = if ix == fnet.base() {
        Potential::zero(fnet.len())
    } else {
        solve_dipole(&fnet, ix, fnet.base())?
    };

    let (wnet, _) = wired_truncation(source, exhaustion, last)?;
    let wx = wnet.index_of(x)?;
    let fw = if wx == wnet.base() {
        Potential::zero(wnet.len())
    } else {
        solve_dipole(&wnet, wx, wnet.base())?
    };
    // restrict the wired solution to the free truncation's vertices
    let mut f_values = vec![0.0; fnet.len()];
    for (i, val) in f_values.iter_mut().enumerate() {
        *val = fw.value(wnet.index_of(fnet.id(i))?);
    }
    let f = Potential {
        values: f_values,
        pinned: true,
    };
    let h = Potential::from_values(
        v.values
            .iter()
            .zip(&f.values)
            .map(|(&a, &b)| a - b)
            .collect(),
    );

    let energy_v = energy_of(&fnet, &v);
    let energy_f = energy_of(&fnet, &f);
    let energy_h = energy_of(&fnet, &h);
    let orthogonality_defect = if energy_v > 0.0 {
        (energy_f + energy_h - energy_v).abs() / energy_v
    } else {
        0.0
    };

    // interior = graph distance >= 2 from vertices that still have
    // unexplored neighbors (or, for finite sources, from the retained set's
    // frontier); boundary layers are polluted by the truncation
    let boundary = truncation_boundary(source, exhaustion, last, &fnet)?;
    let mut dist = vec![usize::MAX; fnet.len()];
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for &b in &boundary {
        dist[b] = 0;
        queue.push_back(b);
    }
    while let Some(u) = queue.pop_front() {
        for &(w, _) in fnet.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let lap_h = apply_laplacian(&fnet, &h);
    let harmonic_residual = (0..fnet.len())
        .filter(|&z| dist[z] == usize::MAX || dist[z] >= 2)
        .map(|z| lap_h[z].abs())
        .fold(0.0, f64::max);

    Ok(RoydenSplit {
        network: fnet,
        v,
        f,
        h,
        energy_v,
        energy_f,
        energy_h,
        orthogonality_defect,
        harmonic_residual,
    })
}

fn truncation_boundary(
    source: &NetworkSource,
    exhaustion: &Exhaustion,
    k: usize,
    fnet: &Network,
) -> Result<Vec<usize>> {
    match source {
        NetworkSource::Finite(net) => {
            let keep: std::collections::HashSet<usize> =
                exhaustion.set(k).iter().map(|&v| v as usize).collect();
            let mut out = Vec::new();
            for &v in exhaustion.set(k) {
                let v = v as usize;
                if net.neighbors(v).iter().any(|&(w, _)| !keep.contains(&w)) {
                    out.push(fnet.index_of(net.id(v))?);
                }
            }
            Ok(out)
        }
        NetworkSource::Infinite(spec) => {
            let inside: std::collections::HashSet<i64> =
                exhaustion.set(k).iter().copied().collect();
            let mut out = Vec::new();
            for &key in exhaustion.set(k) {
                if spec.neighbors(key).iter().any(|(w, _)| !inside.contains(w)) {
                    out.push(fnet.index_of(&spec.id_of(key))?);
                }
            }
            Ok(out)
        }
    }
}
