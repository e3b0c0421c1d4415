//! Independent verification routes used by the test and acceptance suites.
//! Everything here deliberately avoids the grounded-solve and elimination
//! paths used by the library proper: resistances come from a regularized
//! full-matrix solve, and small combinatorial quantities from brute
//! enumeration.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::solver::assemble_laplacian;

/// Effective resistance via the pseudoinverse route: solve
/// (L + J/n) z = e_x - e_y with a full LU factorization and read z_x - z_y.
/// The rank-one shift is invisible on mean-zero right-hand sides.
pub fn pinv_resistance(net: &Network, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let n = net.len();
    let ordering: Vec<usize> = (0..n).collect();
    let mut m = assemble_laplacian(net, &ordering);
    let shift = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += shift;
        }
    }
    let mut rhs = DVector::zeros(n);
    rhs[x] = 1.0;
    rhs[y] = -1.0;
    let z = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solve("regularized Laplacian solve failed".into()))?;
    Ok(z[x] - z[y])
}

/// Full pairwise resistance matrix by the pseudoinverse route.
pub fn pinv_resistance_matrix(net: &Network, sample: &[usize]) -> Result<DMatrix<f64>> {
    let m = sample.len();
    let mut r = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let v = pinv_resistance(net, sample[i], sample[j])?;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Geodesic distance by exhaustive simple-path enumeration; exponential, for
/// networks of a dozen vertices at most.
pub fn brute_force_geodesic(net: &Network, x: usize, y: usize) -> f64 {
    fn explore(
        net: &Network,
        at: usize,
        target: usize,
        visited: &mut Vec<bool>,
        cost: f64,
        best: &mut f64,
    ) {
        if cost >= *best {
            return;
        }
        if at == target {
            *best = cost;
            return;
        }
        visited[at] = true;
        for &(w, c) in net.neighbors(at) {
            if !visited[w] {
                explore(net, w, target, visited, cost + 1.0 / c, best);
            }
        }
        visited[at] = false;
    }
    let mut best = f64::INFINITY;
    let mut visited = vec![false; net.len()];
    explore(net, x, y, &mut visited, 0.0, &mut best);
    best
}

/// Total variation by subset enumeration (<= 20 points): 2 sup_A |mu(A)-nu(A)|.
pub fn brute_force_tv(mu: &[f64], nu: &[f64]) -> f64 {
    let n = mu.len();
    assert!(n <= 20, "enumeration oracle limited to 20 points");
    let mut best = 0.0f64;
    for mask in 0u64..(1 << n) {
        let mut diff = 0.0;
        for (i, (m, v)) in mu.iter().zip(nu).enumerate() {
            if mask & (1 << i) != 0 {
                diff += m - v;
            }
        }
        best = best.max(diff.abs());
    }
    2.0 * best
}

/// Series-parallel value of the wired geometric-chain limit: the direct
/// edge in parallel with the two tails joined through the collapsed
/// complement. Closed form for the truncation at radius k >= 1.
pub fn geometric_chain_wired_pair(c: f64, k: u32) -> f64 {
    let r = 1.0 / c;
    // tail resistance from 1 out to the apex and back in to 0
    let mut long_way = 0.0;
    for n in 2..=k {
        long_way += r.powi(n as i32); // edges (n-1, n)
    }
    long_way += 2.0 * r.powi(k as i32 + 1); // the two apex edges
    for n in 1..=k {
        long_way += r.powi(n as i32); // edges (-n, -n+1)
    }
    let direct = r;
    direct * long_way / (direct + long_way)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::load_network;
    use crate::resistance::effective_resistance;

    #[test]
    fn pinv_route_agrees_with_grounded_route() {
        let net = load_network("0 1 1.5\n1 2 0.3\n2 3 2\n3 0 1\n0 2 0.7").unwrap();
        for (x, y) in [(0usize, 1usize), (1, 3), (0, 2)] {
            let a = pinv_resistance(&net, x, y).unwrap();
            let b = effective_resistance(&net, x, y).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn brute_tv_matches_l1() {
        let mu = [0.25, 0.25, 0.5, 0.0];
        let nu = [0.0, 0.5, 0.25, 0.25];
        let l1: f64 = mu.iter().zip(&nu).map(|(a, b): (&f64, &f64)| (a - b).abs()).sum();
        assert!((brute_force_tv(&mu, &nu) - l1).abs() < 1e-12);
    }

    #[test]
    fn geometric_chain_closed_form_limits_to_three_eighths() {
        let v30 = geometric_chain_wired_pair(2.0, 30);
        assert!((v30 - 0.375).abs() < 1e-8);
    }
}
