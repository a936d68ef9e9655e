//! Zero-fill incomplete LU.
//!
//! IKJ-variant elimination restricted to the pattern of A plus the full
//! diagonal. The factors share one CSR structure: entries left of the
//! diagonal belong to the unit lower factor, the diagonal and everything
//! right of it to the upper factor.

use crate::error::{dim_mismatch, Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct Ilu0Factorization {
    factors: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0Factorization {
    pub fn dim(&self) -> usize {
        self.factors.nrows()
    }

    /// Combined L\U storage (unit lower, upper with diagonal).
    pub fn factors(&self) -> &SparseMatrix {
        &self.factors
    }

    /// Forward then backward triangular solve.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = self.dim();
        debug_assert_eq!(r.len(), n);
        let mut x = r.to_vec();
        for i in 0..n {
            let (cols, vals) = self.factors.row(i);
            let mut acc = x[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= i {
                    break;
                }
                acc -= v * x[c];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let (cols, vals) = self.factors.row(i);
            let dp = self.diag_pos[i] - self.factors.row_offsets()[i];
            let mut acc = x[i];
            for k in (dp + 1)..cols.len() {
                acc -= vals[k] * x[cols[k]];
            }
            x[i] = acc / vals[dp];
        }
        x
    }
}

pub fn ilu0_factor(a: &SparseMatrix) -> Result<Ilu0Factorization> {
    if !a.is_square() {
        return Err(dim_mismatch(
            "ilu0_factor",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    let n = a.nrows();
    // Working pattern: A plus any missing diagonal entries (stored as zero).
    let mut triplets: Vec<(usize, usize, f64)> = a.iter().collect();
    for i in 0..n {
        if a.get(i, i) == 0.0 {
            let (cols, _) = a.row(i);
            if cols.binary_search(&i).is_err() {
                triplets.push((i, i, 0.0));
            }
        }
    }
    let mut f = SparseMatrix::from_triplets(n, n, &triplets);
    let diag_pos: Vec<usize> = (0..n)
        .map(|i| {
            let (cols, _) = f.row(i);
            let local = cols.binary_search(&i).expect("diagonal inserted above");
            f.row_offsets()[i] + local
        })
        .collect();

    // col_map[j] = position of (i, j) while row i is active, usize::MAX otherwise.
    let mut col_map = vec![usize::MAX; n];
    let offsets = f.row_offsets().to_vec();
    let cols = f.col_indices().to_vec();
    for i in 0..n {
        let (lo, hi) = (offsets[i], offsets[i + 1]);
        for p in lo..hi {
            col_map[cols[p]] = p;
        }
        for p in lo..hi {
            let k = cols[p];
            if k >= i {
                break;
            }
            let pivot = f.values()[diag_pos[k]];
            if pivot == 0.0 {
                return Err(Error::ZeroPivot { row: k });
            }
            let lik = f.values()[p] / pivot;
            f.values_mut()[p] = lik;
            // Row update restricted to the stored pattern of row i.
            let (klo, khi) = (offsets[k], offsets[k + 1]);
            for q in klo..khi {
                let j = cols[q];
                if j <= k {
                    continue;
                }
                let target = col_map[j];
                if target != usize::MAX {
                    f.values_mut()[target] -= lik * f.values()[q];
                }
            }
        }
        if f.values()[diag_pos[i]] == 0.0 {
            return Err(Error::ZeroPivot { row: i });
        }
        for p in lo..hi {
            col_map[cols[p]] = usize::MAX;
        }
    }
    Ok(Ilu0Factorization {
        factors: f,
        diag_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::rng::SplitMix64;
    use crate::sparse::norm2;

    fn laplacian_2d(nx: usize) -> SparseMatrix {
        let n = nx * nx;
        let idx = |i: usize, j: usize| i * nx + j;
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..nx {
                let r = idx(i, j);
                t.push((r, r, 4.0));
                if i > 0 {
                    t.push((r, idx(i - 1, j), -1.0));
                }
                if i + 1 < nx {
                    t.push((r, idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((r, idx(i, j - 1), -1.0));
                }
                if j + 1 < nx {
                    t.push((r, idx(i, j + 1), -1.0));
                }
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = ilu0_factor(&SparseMatrix::identity(6)).unwrap();
        let v = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        assert_eq!(f.apply(&v), v);
    }

    #[test]
    fn triangular_matrix_gives_exact_inverse() {
        let a = SparseMatrix::from_dense_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![1.0, 3.0, 0.0],
            vec![0.5, -1.0, 4.0],
        ]);
        let f = ilu0_factor(&a).unwrap();
        let mut rng = SplitMix64::new(2);
        let b = rng.vector(3);
        let x = f.apply(&b);
        let back = a.spmv(&x).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-14);
        }
    }

    #[test]
    fn full_pattern_equals_exact_lu() {
        let mut rng = SplitMix64::new(5);
        let n = 12;
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = rng.next_signed();
                if i == j {
                    *v += n as f64;
                }
            }
        }
        let a = SparseMatrix::from_dense_rows(&rows);
        let f = ilu0_factor(&a).unwrap();
        let b = rng.vector(n);
        let x = f.apply(&b);
        let exact = DenseMatrix::from_sparse(&a).lu().unwrap().solve(&b).unwrap();
        let scale = norm2(&exact);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn factor_pattern_is_a_plus_diagonal() {
        let a = laplacian_2d(8);
        let f = ilu0_factor(&a).unwrap();
        assert_eq!(f.factors().row_offsets(), a.row_offsets());
        assert_eq!(f.factors().col_indices(), a.col_indices());

        // Missing diagonal entries are inserted (and only those).
        let nodiag = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 2.0)]);
        let err = ilu0_factor(&nodiag);
        // (1,1) is structurally zero: elimination leaves -1/2 there, fine;
        // the inserted diagonal participates in the update.
        let f = err.unwrap();
        assert_eq!(f.factors().nnz(), 4);
        assert!((f.factors().get(1, 1) + 0.5).abs() <= 1e-15);
    }

    #[test]
    fn zero_pivot_names_row() {
        // Structural singularity in row 1 that elimination cannot repair.
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 0.0), (1, 0, 1.0)]);
        match ilu0_factor(&a) {
            Err(Error::ZeroPivot { row }) => assert_eq!(row, 1),
            other => panic!("expected zero pivot, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_iteration_matrix_contracts() {
        let a = laplacian_2d(16);
        let n = a.nrows();
        let f = ilu0_factor(&a).unwrap();
        // Power iteration on G = I - (LU)^{-1} A.
        let mut rng = SplitMix64::new(77);
        let mut v = rng.vector(n);
        let mut rho = 1.0;
        for _ in 0..120 {
            let av = a.spmv(&v).unwrap();
            let minv_av = f.apply(&av);
            let gv: Vec<f64> = v.iter().zip(&minv_av).map(|(x, y)| x - y).collect();
            rho = norm2(&gv) / norm2(&v);
            let s = 1.0 / norm2(&gv);
            v = gv.iter().map(|x| x * s).collect();
        }
        assert!(rho <= 0.99, "spectral radius estimate {rho} too large");
    }
}
