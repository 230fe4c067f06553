//! Dense symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! The sweep order is fixed (row-major over the strict upper triangle), so the
//! decomposition is bit-reproducible for a given input. Matrices are stored
//! row-major in a flat `Vec<f64>`.

use crate::error::{Error, Result};

/// Eigenvalues and eigenvectors of a symmetric matrix.
///
/// `vectors` is stored row-major; column `k` is the unit eigenvector paired
/// with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub dim: usize,
}

impl SymEigen {
    /// Entry `k` of eigenvector `j` (matrix column `j`).
    pub fn vector_entry(&self, k: usize, j: usize) -> f64 {
        self.vectors[k * self.dim + j]
    }
}

const DEFAULT_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigendecomposition of a symmetric `n x n` matrix.
///
/// Fails with [`Error::EigenFailure`] if the off-diagonal mass has not fallen
/// below `1e-14 * ||A||_F` within the sweep budget.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> Result<SymEigen> {
    jacobi_eigen_with_budget(matrix, n, DEFAULT_MAX_SWEEPS)
}

pub fn jacobi_eigen_with_budget(matrix: &[f64], n: usize, max_sweeps: usize) -> Result<SymEigen> {
    assert_eq!(matrix.len(), n * n, "matrix buffer must be n*n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 1 {
        return Ok(SymEigen {
            values: vec![a[0]],
            vectors: v,
            dim: 1,
        });
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);

    for sweep in 0..max_sweeps {
        let off = off_diagonal_norm(&a, n);
        if off <= tol {
            return Ok(collect(a, v, n));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Skip rotations that cannot change anything at f64 precision.
                if apq.abs() <= f64::EPSILON * (app.abs() + aqq.abs()) && sweep > 2 {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        let new_kp = akp - s * (akq + tau * akp);
                        let new_kq = akq + s * (akp - tau * akq);
                        a[k * n + p] = new_kp;
                        a[p * n + k] = new_kp;
                        a[k * n + q] = new_kq;
                        a[q * n + k] = new_kq;
                    }
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp - s * (vkq + tau * vkp);
                    v[k * n + q] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    let off = off_diagonal_norm(&a, n);
    if off <= tol {
        Ok(collect(a, v, n))
    } else {
        Err(Error::EigenFailure {
            sweeps: max_sweeps,
            offdiag: off,
        })
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    s.sqrt()
}

fn collect(a: Vec<f64>, v: Vec<f64>, n: usize) -> SymEigen {
    let values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    SymEigen {
        values,
        vectors: v,
        dim: n,
    }
}

/// Dense matrix product `C = A * B` for row-major `n x n` buffers.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let out = &mut c[i * n..(i + 1) * n];
            for (cj, bj) in out.iter_mut().zip(row) {
                *cj += aik * bj;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let a = [3.0, 0.0, 0.0, -2.0];
        let e = jacobi_eigen(&a, 2).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_abs_diff_eq!(vals[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn off_diagonal_two_by_two() {
        // [[0,1],[1,0]] has eigenvalues +-1.
        let a = [0.0, 1.0, 1.0, 0.0];
        let e = jacobi_eigen(&a, 2).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reconstruction_from_eigenpairs() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        // Fixed pseudo-random symmetric fill.
        let mut state = 0x12345u64;
        for i in 0..n {
            for j in i..n {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = ((state >> 33) as f64) / (u32::MAX as f64) - 0.5;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let e = jacobi_eigen(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut r = 0.0;
                for k in 0..n {
                    r += e.vector_entry(i, k) * e.values[k] * e.vector_entry(j, k);
                }
                assert_abs_diff_eq!(r, a[i * n + j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matmul_identity() {
        let n = 3;
        let a: Vec<f64> = (0..9).map(|x| x as f64).collect();
        let mut id = vec![0.0; 9];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        assert_eq!(matmul(&a, &id, n), a);
    }
}
