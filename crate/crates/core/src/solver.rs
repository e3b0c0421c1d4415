//! Laplacian assembly, the Dirichlet energy form, current flows (Ohm drop,
//! Kirchhoff divergence, dissipation), and grounded dipole solves.
//!
//! The Laplacian acts by (Lv)(x) = sum_y c_xy (v(x) - v(y)). Dipole systems
//! Lv = delta_x - delta_y are solved by deleting the base row and column
//! (pinning v(o) = 0), which leaves a positive definite system; every
//! solution is residual-checked after the fact.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, SparseSym, DENSE_LIMIT};
use crate::network::Network;

/// Relative residual bound for dipole solves, in units of max c(x).
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// A real function on the vertices, in volts. `pinned` records the
/// normalization value(o) = 0.
#[derive(Debug, Clone)]
pub struct Potential {
    pub values: Vec<f64>,
    pub pinned: bool,
}

impl Potential {
    pub fn zero(n: usize) -> Self {
        Potential {
            values: vec![0.0; n],
            pinned: true,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Potential {
            values,
            pinned: false,
        }
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Re-pin so that value(base) = 0.
    pub fn pinned_at(mut self, base: usize) -> Self {
        let shift = self.values[base];
        for v in &mut self.values {
            *v -= shift;
        }
        self.pinned = true;
        self
    }
}

/// An antisymmetric function on directed edges, in amps; stored once per
/// undirected edge in the orientation of `Network::edges` (u < v).
#[derive(Debug, Clone)]
pub struct CurrentFlow {
    pub per_edge: Vec<f64>,
}

impl CurrentFlow {
    pub fn zero(net: &Network) -> Self {
        CurrentFlow {
            per_edge: vec![0.0; net.edges().len()],
        }
    }

    /// I(u, v) for an arbitrary ordered pair (0 off the edge set).
    pub fn value(&self, net: &Network, u: usize, v: usize) -> f64 {
        let key = if u < v { (u, v) } else { (v, u) };
        match net
            .edges()
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
        {
            Ok(i) => {
                if u < v {
                    self.per_edge[i]
                } else {
                    -self.per_edge[i]
                }
            }
            Err(_) => 0.0,
        }
    }

    /// The characteristic current of a path: one amp along consecutive
    /// vertices.
    pub fn path_indicator(net: &Network, path: &[usize]) -> Result<Self> {
        let mut flow = CurrentFlow::zero(net);
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if net.conductance(u, v) == 0.0 {
                return Err(Error::Precondition(format!(
                    "path step {}-{} is not an edge",
                    net.id(u),
                    net.id(v)
                )));
            }
            let key = if u < v { (u, v) } else { (v, u) };
            let i = net
                .edges()
                .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
                .unwrap();
            flow.per_edge[i] += if u < v { 1.0 } else { -1.0 };
        }
        Ok(flow)
    }
}

/// Assemble the dense Laplacian over an explicit vertex ordering.
pub fn assemble_laplacian(net: &Network, ordering: &[usize]) -> DMatrix<f64> {
    let n = ordering.len();
    let mut pos = vec![usize::MAX; net.len()];
    for (row, &v) in ordering.iter().enumerate() {
        pos[v] = row;
    }
    let mut m = DMatrix::zeros(n, n);
    for &v in ordering {
        m[(pos[v], pos[v])] = net.total_conductance(v);
    }
    for &(u, v, c) in net.edges() {
        if pos[u] != usize::MAX && pos[v] != usize::MAX {
            m[(pos[u], pos[v])] = -c;
            m[(pos[v], pos[u])] = -c;
        }
    }
    m
}

/// Row-stochastic transition kernel p(x, y) = c_xy / c(x).
pub fn transition_kernel(net: &Network) -> DMatrix<f64> {
    let n = net.len();
    let mut p = DMatrix::zeros(n, n);
    for u in 0..n {
        let cu = net.total_conductance(u);
        for &(v, c) in net.neighbors(u) {
            p[(u, v)] = c / cu;
        }
    }
    p
}

/// Dirichlet energy form: E(u, v) = sum over edges of c_xy (u(x)-u(y))(v(x)-v(y)).
pub fn energy(net: &Network, u: &Potential, v: &Potential) -> f64 {
    net.edges()
        .iter()
        .map(|&(a, b, c)| c * (u.values[a] - u.values[b]) * (v.values[a] - v.values[b]))
        .sum()
}

pub fn energy_of(net: &Network, u: &Potential) -> f64 {
    energy(net, u, u)
}

/// Dissipation form on currents: D(I, J) = sum over edges of I J / c.
pub fn dissipation(net: &Network, i: &CurrentFlow, j: &CurrentFlow) -> f64 {
    net.edges()
        .iter()
        .zip(i.per_edge.iter().zip(&j.per_edge))
        .map(|(&(_, _, c), (&a, &b))| a * b / c)
        .sum()
}

/// Ohm's law: the current induced by a potential, I(x,y) = c_xy (u(x)-u(y)).
pub fn drop_current(net: &Network, u: &Potential) -> CurrentFlow {
    CurrentFlow {
        per_edge: net
            .edges()
            .iter()
            .map(|&(a, b, c)| c * (u.values[a] - u.values[b]))
            .collect(),
    }
}

/// Kirchhoff divergence: (div I)(x) = sum_y I(x, y).
pub fn divergence(net: &Network, flow: &CurrentFlow) -> Vec<f64> {
    let mut div = vec![0.0; net.len()];
    for (&(a, b, _), &i) in net.edges().iter().zip(&flow.per_edge) {
        div[a] += i;
        div[b] -= i;
    }
    div
}

/// Apply the Laplacian to a potential.
pub fn apply_laplacian(net: &Network, u: &Potential) -> Vec<f64> {
    let mut out = vec![0.0; net.len()];
    for (v, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &(w, c) in net.neighbors(v) {
            acc += c * (u.values[v] - u.values[w]);
        }
        *o = acc;
    }
    out
}

/// Solve L v = rhs with v pinned to 0 at the base vertex. `rhs` must sum to
/// zero for the solution to satisfy the full system; the residual is checked
/// on all rows.
pub fn solve_grounded(net: &Network, rhs: &[f64]) -> Result<Potential> {
    let n = net.len();
    let base = net.base();
    let free: Vec<usize> = (0..n).filter(|&v| v != base).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let m = free.len();
    let reduced_rhs: Vec<f64> = free.iter().map(|&v| rhs[v]).collect();

    let solution = if m <= DENSE_LIMIT {
        let mut a = DMatrix::zeros(m, m);
        for (i, &v) in free.iter().enumerate() {
            a[(i, i)] = net.total_conductance(v);
            for &(w, c) in net.neighbors(v) {
                if w != base {
                    a[(i, slot[w])] = -c;
                }
            }
        }
        let x = linalg::solve_dense_spd(&a, &DVector::from_vec(reduced_rhs))?;
        x.iter().copied().collect::<Vec<f64>>()
    } else {
        let mut a = SparseSym::new(m);
        for (i, &v) in free.iter().enumerate() {
            a.add(i, i, net.total_conductance(v));
            for &(w, c) in net.neighbors(v) {
                if w != base {
                    a.add(i, slot[w], -c);
                }
            }
        }
        linalg::solve_cg(&a, &reduced_rhs, 1e-13, 40 * m + 1000)?
    };

    let mut values = vec![0.0; n];
    for (i, &v) in free.iter().enumerate() {
        values[v] = solution[i];
    }
    let potential = Potential {
        values,
        pinned: true,
    };

    let scale = net.conductance_scale().max(1.0);
    let lap = apply_laplacian(net, &potential);
    let residual = lap
        .iter()
        .zip(rhs)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > SOLVE_RESIDUAL_TOL * scale {
        return Err(Error::Solve(format!(
            "residual {residual:.3e} exceeds {:.3e}",
            SOLVE_RESIDUAL_TOL * scale
        )));
    }
    Ok(potential)
}

/// Solve the dipole problem L v = delta_x - delta_y, pinned at the base.
pub fn solve_dipole(net: &Network, x: usize, y: usize) -> Result<Potential> {
    if x == y {
        return Err(Error::Precondition("dipole requires x != y".into()));
    }
    let mut rhs = vec![0.0; net.len()];
    rhs[x] = 1.0;
    rhs[y] = -1.0;
    solve_grounded(net, &rhs)
}

/// The energy-kernel element v_x: the dipole with L v = delta_x - delta_o,
/// pinned at the base. v_o is the zero function.
pub fn energy_kernel_element(net: &Network, x: usize) -> Result<Potential> {
    if x == net.base() {
        return Ok(Potential::zero(net.len()));
    }
    solve_dipole(net, x, net.base())
}

/// Solve the discrete Dirichlet problem: harmonic on the complement of the
/// pinned set, with the given boundary values.
pub fn dirichlet_solve(net: &Network, pinned: &[(usize, f64)]) -> Result<Potential> {
    if pinned.is_empty() {
        return Err(Error::Precondition("no pinned vertices".into()));
    }
    let n = net.len();
    let mut fixed = vec![None; n];
    for &(v, val) in pinned {
        fixed[v] = Some(val);
    }
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let m = free.len();
    let mut rhs = vec![0.0; m];
    let mut values = vec![0.0; n];
    for &(v, val) in pinned {
        values[v] = val;
    }
    let solution = if m == 0 {
        Vec::new()
    } else if m <= DENSE_LIMIT {
        let mut a = DMatrix::zeros(m, m);
        for (i, &v) in free.iter().enumerate() {
            a[(i, i)] = net.total_conductance(v);
            for &(w, c) in net.neighbors(v) {
                match fixed[w] {
                    None => a[(i, slot[w])] = -c,
                    Some(val) => rhs[i] += c * val,
                }
            }
        }
        linalg::solve_dense_spd(&a, &DVector::from_vec(rhs))?
            .iter()
            .copied()
            .collect()
    } else {
        let mut a = SparseSym::new(m);
        for (i, &v) in free.iter().enumerate() {
            a.add(i, i, net.total_conductance(v));
            for &(w, c) in net.neighbors(v) {
                match fixed[w] {
                    None => a.add(i, slot[w], -c),
                    Some(val) => rhs[i] += c * val,
                }
            }
        }
        linalg::solve_cg(&a, &rhs, 1e-13, 40 * m + 1000)?
    };
    for (i, &v) in free.iter().enumerate() {
        values[v] = solution[i];
    }

    // harmonicity check away from the pinned set
    let potential = Potential {
        values,
        pinned: false,
    };
    let lap = apply_laplacian(net, &potential);
    let scale = net.conductance_scale().max(1.0);
    for &v in &free {
        if lap[v].abs() > SOLVE_RESIDUAL_TOL * scale {
            return Err(Error::Solve(format!(
                "Dirichlet residual {:.3e} at {}",
                lap[v].abs(),
                net.id(v)
            )));
        }
    }
    Ok(potential)
}
