//! Reversible random-walk simulation and exact absorbing-state solves,
//! verifying the probabilistic identities behind the trace construction.
//!
//! Exact computations are the authoritative path; Monte Carlo corroborates
//! them statistically. Episode i draws from a ChaCha8 stream keyed by
//! (seed, i), so results are bit-identical for a fixed seed regardless of
//! how episodes are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::limits::TruncationValue;
use crate::models::{wired_truncation, Exhaustion, NetworkSource};
use crate::network::Network;
use crate::resistance::effective_resistance;
use crate::solver::{dirichlet_solve, solve_dipole, Potential};

/// Identifier of the episode RNG recorded in outputs.
pub const RNG_ALGORITHM: &str = "chacha8-stream-v1";

/// Monte-Carlo run configuration. A fixed seed reproduces the trajectory
/// stream bit for bit.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub seed: u64,
    pub episodes: u64,
    pub max_steps: u64,
    /// Worker cap; the episode partition is deterministic, so the results
    /// do not depend on it.
    pub threads: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            seed: 0,
            episodes: 100_000,
            max_steps: 1_000_000,
            threads: 1,
        }
    }
}

/// A Monte-Carlo hitting estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingEstimate {
    pub estimate: f64,
    pub episodes: u64,
    pub successes: u64,
    /// Episodes cut off at max_steps and excluded from the estimate.
    pub truncated: u64,
    pub standard_error: f64,
}

impl HittingEstimate {
    pub fn truncation_warning(&self) -> bool {
        (self.truncated as f64) > 0.001 * (self.episodes as f64)
    }
}

fn step(net: &Network, at: usize, rng: &mut ChaCha8Rng) -> usize {
    let total = net.total_conductance(at);
    let mut draw: f64 = rng.random::<f64>() * total;
    let nbrs = net.neighbors(at);
    for &(w, c) in nbrs {
        draw -= c;
        if draw < 0.0 {
            return w;
        }
    }
    nbrs.last().expect("vertex has neighbors").0
}

/// Estimate P[a -> b]: the probability that the walk started at `a` reaches
/// `b` before returning to `a`. Episodes end at `b` (success), back at `a`
/// (failure), or at max_steps (excluded, counted).
pub fn simulate_escape(net: &Network, a: usize, b: usize, cfg: &WalkConfig) -> Result<HittingEstimate> {
    if a == b {
        return Err(Error::Precondition("escape simulation requires a != b".into()));
    }
    let run_range = |range: std::ops::Range<u64>| -> (u64, u64) {
        let mut successes = 0u64;
        let mut truncated = 0u64;
        for episode in range {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(episode);
            let mut at = a;
            let mut steps = 0u64;
            loop {
                at = step(net, at, &mut rng);
                steps += 1;
                if at == b {
                    successes += 1;
                    break;
                }
                if at == a {
                    break;
                }
                if steps >= cfg.max_steps {
                    truncated += 1;
                    break;
                }
            }
        }
        (successes, truncated)
    };

    let workers = cfg.threads.max(1).min(cfg.episodes.max(1) as usize);
    let (successes, truncated) = if workers <= 1 {
        run_range(0..cfg.episodes)
    } else {
        let chunk = cfg.episodes.div_ceil(workers as u64);
        let results = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers as u64 {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(cfg.episodes);
                if lo >= hi {
                    break;
                }
                handles.push(scope.spawn(move || run_range(lo..hi)));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("walk worker panicked"))
                .collect::<Vec<_>>()
        });
        results
            .into_iter()
            .fold((0, 0), |(s, t), (ds, dt)| (s + ds, t + dt))
    };

    let effective = cfg.episodes - truncated;
    let p = if effective > 0 {
        successes as f64 / effective as f64
    } else {
        f64::NAN
    };
    let se = if effective > 0 {
        (p * (1.0 - p) / effective as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(HittingEstimate {
        estimate: p,
        episodes: cfg.episodes,
        successes,
        truncated,
        standard_error: se,
    })
}

/// Exact hitting probabilities: for every start vertex, the probability of
/// reaching `targets` before `avoid`, via the absorbing linear system
/// (harmonic in the interior, 1 on targets, 0 on avoid).
pub fn exact_hitting(net: &Network, targets: &[usize], avoid: &[usize]) -> Result<Potential> {
    if targets.is_empty() {
        return Err(Error::Precondition("targets must be nonempty".into()));
    }
    if targets.iter().any(|t| avoid.contains(t)) {
        return Err(Error::Precondition("targets and avoid must be disjoint".into()));
    }
    let mut pinned: Vec<(usize, f64)> = targets.iter().map(|&t| (t, 1.0)).collect();
    pinned.extend(avoid.iter().map(|&a| (a, 0.0)));
    let h = dirichlet_solve(net, &pinned)?;
    for (v, &p) in h.values.iter().enumerate() {
        if !(-1e-10..=1.0 + 1e-10).contains(&p) {
            return Err(Error::Solve(format!(
                "hitting probability {p} out of range at {}",
                net.id(v)
            )));
        }
    }
    Ok(h)
}

/// Exact escape probability P[x -> y] by first-step decomposition over the
/// hitting solve with target y and taboo x.
pub fn exact_escape(net: &Network, x: usize, y: usize) -> Result<f64> {
    let h = exact_hitting(net, &[y], &[x])?;
    let cx = net.total_conductance(x);
    Ok(net
        .neighbors(x)
        .iter()
        .map(|&(w, c)| (c / cx) * h.value(w))
        .sum())
}

/// The exact and Monte-Carlo sides of the path-integral identity
/// R(x, y) = 1 / (c(x) P[x -> y]).
#[derive(Debug, Clone, Copy)]
pub struct PathIntegralResistance {
    pub exact: f64,
    pub monte_carlo: f64,
    pub mc_standard_error: f64,
    pub escape_probability: f64,
    pub mc_estimate: HittingEstimate,
}

pub fn path_integral_resistance(
    net: &Network,
    x: usize,
    y: usize,
    cfg: &WalkConfig,
) -> Result<PathIntegralResistance> {
    let p = exact_escape(net, x, y)?;
    let cx = net.total_conductance(x);
    let exact = 1.0 / (cx * p);
    let mc = simulate_escape(net, x, y, cfg)?;
    let monte_carlo = 1.0 / (cx * mc.estimate);
    // first-order error propagation through p -> 1/(c p)
    let mc_standard_error = mc.standard_error / (cx * mc.estimate * mc.estimate);
    Ok(PathIntegralResistance {
        exact,
        monte_carlo,
        mc_standard_error,
        escape_probability: p,
        mc_estimate: mc,
    })
}

/// Report for the finite-network identity v_x = R(o, x) u_x.
#[derive(Debug, Clone)]
pub struct DipoleProbabilityReport {
    pub resistance: f64,
    pub max_deviation: f64,
    pub scale: f64,
}

impl DipoleProbabilityReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= 1e-9 * self.scale
    }
}

/// Check v_x = R(o, x) u_x, where u_x(y) is the probability of reaching x
/// before o from y.
pub fn dipole_probability_check(net: &Network, x: usize) -> Result<DipoleProbabilityReport> {
    let o = net.base();
    if x == o {
        return Err(Error::Precondition("x must differ from the base".into()));
    }
    let v = solve_dipole(net, x, o)?;
    let u = exact_hitting(net, &[x], &[o])?;
    let r = v.value(x) - v.value(o);
    let scale = v.values.iter().cloned().fold(0.0f64, |m, t| m.max(t.abs()));
    let max_deviation = v
        .values
        .iter()
        .zip(&u.values)
        .map(|(&vv, &uu)| (vv - r * uu).abs())
        .fold(0.0, f64::max);
    Ok(DipoleProbabilityReport {
        resistance: r,
        max_deviation,
        scale: scale.max(1e-30),
    })
}

/// Per-truncation record for the wired probabilistic identity.
#[derive(Debug, Clone, Copy)]
pub struct WiredFxTruncation {
    pub k: usize,
    pub radius: u32,
    /// max |f_x - R(o,x) u_x| over the wired truncation.
    pub deviation: f64,
    /// Correction prefactor c(x) / c(inf_k); vanishes on transient models.
    pub correction_prefactor: f64,
}

/// On each wired truncation, verify the finite identity
/// f_x = R_{G_k^W}(o, x) P[tau_x < tau_o] exactly, and report the decay of
/// the correction prefactor c(x)/c(inf_k).
pub fn wired_fx_probabilistic(
    source: &NetworkSource,
    x: &str,
    exhaustion: &Exhaustion,
) -> Result<Vec<WiredFxTruncation>> {
    let mut out = Vec::new();
    for k in 0..exhaustion.len() {
        let (net, apex) = wired_truncation(source, exhaustion, k)?;
        let ix = net.index_of(x)?;
        let o = net.base();
        if ix == o {
            return Err(Error::Precondition("x must differ from the base".into()));
        }
        let f = solve_dipole(&net, ix, o)?;
        let u = exact_hitting(&net, &[ix], &[o])?;
        let r = f.value(ix) - f.value(o);
        let deviation = f
            .values
            .iter()
            .zip(&u.values)
            .map(|(&fv, &uv)| (fv - r * uv).abs())
            .fold(0.0, f64::max);
        let correction_prefactor = match apex {
            Some(a) => net.total_conductance(ix) / net.total_conductance(a),
            None => 0.0,
        };
        out.push(WiredFxTruncation {
            k,
            radius: exhaustion.radii()[k],
            deviation,
            correction_prefactor,
        });
    }
    Ok(out)
}

/// One row of the reduced-transition comparison: the trace transition
/// normalized by the parent degree equals p(x,y) plus the exact
/// through-complement escape probability.
#[derive(Debug, Clone)]
pub struct TraceTransitionRow {
    pub x: String,
    pub y: String,
    /// c^tr_xy / c(x), with c(x) the parent total conductance.
    pub reduced: f64,
    /// p(x, y) + P[x -> y through the complement].
    pub formula: f64,
}

/// Compare the trace's transition data against the one-step probability
/// plus the absorbing through-complement probability.
pub fn trace_transition_check(net: &Network, keep: &[usize]) -> Result<Vec<TraceTransitionRow>> {
    let rows = crate::trace::trace_conductance_check(net, keep)?;
    rows.into_iter()
        .map(|row| {
            let x = net.index_of(&row.x)?;
            let cx = net.total_conductance(x);
            Ok(TraceTransitionRow {
                reduced: row.schur / cx,
                formula: row.formula / cx,
                x: row.x,
                y: row.y,
            })
        })
        .collect()
}

/// Experimental estimator for the free-kernel value v_x(y) via walks on a
/// free truncation, exposed with no correctness claim: the underlying
/// argument is known to be faulty because truncation reflects boundary
/// transitions.
#[derive(Debug, Clone, Copy)]
pub struct FreeKernelEstimate {
    pub mc_value: f64,
    pub numeric_value: f64,
    pub free_resistance: f64,
    pub hitting: HittingEstimate,
}

pub fn experimental_free_kernel(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
    cfg: &WalkConfig,
) -> Result<FreeKernelEstimate> {
    let net = crate::models::free_truncation(source, exhaustion, exhaustion.len() - 1)?;
    let ix = net.index_of(x)?;
    let iy = net.index_of(y)?;
    let o = net.base();
    if ix == o || iy == ix {
        return Err(Error::Precondition("need distinct x != o and y != x".into()));
    }
    let r = effective_resistance(&net, ix, o)?;
    // MC estimate of P_y[tau_x < tau_o] on the truncation: a walk from y
    // succeeding at x before o
    let run = simulate_conditional_hit(&net, iy, ix, o, cfg)?;
    let v = solve_dipole(&net, ix, o)?;
    Ok(FreeKernelEstimate {
        mc_value: r * run.estimate,
        numeric_value: v.value(iy),
        free_resistance: r,
        hitting: run,
    })
}

fn simulate_conditional_hit(
    net: &Network,
    start: usize,
    target: usize,
    taboo: usize,
    cfg: &WalkConfig,
) -> Result<HittingEstimate> {
    let mut successes = 0u64;
    let mut truncated = 0u64;
    for episode in 0..cfg.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(episode);
        let mut at = start;
        let mut steps = 0u64;
        loop {
            if at == target {
                successes += 1;
                break;
            }
            if at == taboo {
                break;
            }
            if steps >= cfg.max_steps {
                truncated += 1;
                break;
            }
            at = step(net, at, &mut rng);
            steps += 1;
        }
    }
    let effective = cfg.episodes - truncated;
    let p = successes as f64 / effective.max(1) as f64;
    Ok(HittingEstimate {
        estimate: p,
        episodes: cfg.episodes,
        successes,
        truncated,
        standard_error: (p * (1.0 - p) / effective.max(1) as f64).sqrt(),
    })
}

/// Mean number of visits to `a` before the walk is absorbed at `b`,
/// estimated by simulation; the exact value is c(a) R(a, b).
pub fn simulate_mean_visits(net: &Network, a: usize, b: usize, cfg: &WalkConfig) -> Result<(f64, f64)> {
    if a == b {
        return Err(Error::Precondition("visit count requires a != b".into()));
    }
    let mut total_visits = 0u64;
    let mut completed = 0u64;
    for episode in 0..cfg.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(episode);
        let mut at = a;
        let mut visits = 1u64;
        let mut steps = 0u64;
        loop {
            at = step(net, at, &mut rng);
            steps += 1;
            if at == b {
                total_visits += visits;
                completed += 1;
                break;
            }
            if at == a {
                visits += 1;
            }
            if steps >= cfg.max_steps {
                break;
            }
        }
    }
    if completed == 0 {
        return Err(Error::NonConvergence("no episode reached the absorber".into()));
    }
    let mean = total_visits as f64 / completed as f64;
    // per-episode visit counts are geometric with mean 1/p; use the sample
    // standard error of the mean via the geometric variance (1-p)/p^2
    let p = completed as f64 / total_visits as f64;
    let se = ((1.0 - p) / (p * p * completed as f64)).sqrt();
    Ok((mean, se))
}

/// Detailed-balance check on simulated transition counts: for sampled edges,
/// c(x) p_hat(x, y) should match c(y) p_hat(y, x) within sampling error.
pub fn empirical_detailed_balance(
    net: &Network,
    steps: u64,
    seed: u64,
) -> Result<Vec<(String, String, f64, f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX); // keep clear of episode streams
    let mut at = 0usize;
    let mut visit_counts = vec![0u64; net.len()];
    let mut edge_counts: std::collections::HashMap<(usize, usize), u64> =
        std::collections::HashMap::new();
    for _ in 0..steps {
        let next = step(net, at, &mut rng);
        visit_counts[at] += 1;
        *edge_counts.entry((at, next)).or_insert(0) += 1;
        at = next;
    }
    let mut rows = Vec::new();
    for &(u, v, _) in net.edges() {
        let nu = visit_counts[u];
        let nv = visit_counts[v];
        if nu == 0 || nv == 0 {
            continue;
        }
        let puv = *edge_counts.get(&(u, v)).unwrap_or(&0) as f64 / nu as f64;
        let pvu = *edge_counts.get(&(v, u)).unwrap_or(&0) as f64 / nv as f64;
        let lhs = net.total_conductance(u) * puv;
        let rhs = net.total_conductance(v) * pvu;
        // binomial errors propagated through the scaling
        let se = (net.total_conductance(u).powi(2) * puv * (1.0 - puv) / nu as f64
            + net.total_conductance(v).powi(2) * pvu * (1.0 - pvu) / nv as f64)
            .sqrt();
        rows.push((net.id(u).to_string(), net.id(v).to_string(), lhs, rhs, se));
    }
    Ok(rows)
}

/// Per-truncation values of the path-integral resistance, for convergence
/// displays.
pub fn path_integral_over_exhaustion(
    source: &NetworkSource,
    x: &str,
    y: &str,
    exhaustion: &Exhaustion,
) -> Result<Vec<TruncationValue>> {
    let mut out = Vec::new();
    for k in 0..exhaustion.len() {
        let net = crate::models::free_truncation(source, exhaustion, k)?;
        let ix = net.index_of(x)?;
        let iy = net.index_of(y)?;
        let p = exact_escape(&net, ix, iy)?;
        out.push(TruncationValue {
            k,
            radius: exhaustion.radii()[k],
            value: 1.0 / (net.total_conductance(ix) * p),
        });
    }
    Ok(out)
}
