//! Dense and iterative linear-algebra backends for grounded Laplacian
//! systems. Direct Cholesky below `DENSE_LIMIT` unknowns, Jacobi-scaled
//! conjugate gradients above; every solve is residual-checked by the caller.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Crossover between dense factorization and conjugate gradients.
pub const DENSE_LIMIT: usize = 2000;

/// Sparse symmetric matrix in row-list form, sufficient for CG.
pub struct SparseSym {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn new(n: usize) -> Self {
        SparseSym {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.rows[i].push((j, value));
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, a) in row {
                acc += a * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                if i == j {
                    d[i] += a;
                }
            }
        }
        d
    }
}

/// Solve a symmetric positive definite system with Jacobi-preconditioned
/// conjugate gradients to relative residual `tol`.
pub fn solve_cg(matrix: &SparseSym, rhs: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = matrix.len();
    let diag = matrix.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::Solve("nonpositive diagonal in CG system".into()));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|&d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(&r, &m)| r * m).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut ap = vec![0.0; n];
    for _ in 0..max_iters {
        matrix.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(&a, &b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Solve("CG encountered a nonpositive curvature".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * rhs_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solve(format!(
        "CG did not reach tolerance {tol} in {max_iters} iterations"
    )))
}

/// Dense SPD solve: Jacobi-equilibrated Cholesky with two steps of
/// iterative refinement, which keeps solutions accurate even when
/// conductances span many orders of magnitude.
pub fn solve_dense_spd(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = matrix.nrows();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = matrix[(i, i)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = matrix.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= scale[i] * scale[j];
        }
    }
    let chol = scaled
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solve("Cholesky factorization failed".into()))?;
    // refine within the equilibrated system, where the matrix entries are
    // O(1) and residuals do not suffer cancellation across scales
    let mut srhs = rhs.clone();
    for i in 0..n {
        srhs[i] *= scale[i];
    }
    let mut y = chol.solve(&srhs);
    for _ in 0..2 {
        let residual = &srhs - &scaled * &y;
        y += chol.solve(&residual);
    }
    for i in 0..n {
        y[i] *= scale[i];
    }
    Ok(y)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(matrix: &DMatrix<f64>) -> Vec<f64> {
    let eig = matrix.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Full symmetric eigendecomposition: (eigenvalues, eigenvectors as columns).
pub fn sym_eigendecomposition(matrix: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = matrix.clone().symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    (vals, eig.eigenvectors)
}

/// Operator norm (largest singular value) of a dense matrix.
pub fn operator_norm(matrix: &DMatrix<f64>) -> f64 {
    matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
pub fn sym_spectral_norm(matrix: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(matrix)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

pub fn frobenius(matrix: &DMatrix<f64>) -> f64 {
    matrix.iter().map(|v| v * v).sum::<f64>().sqrt()
}
