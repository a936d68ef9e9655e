//! Aggregation-based algebraic multigrid.
//!
//! Setup builds a Galerkin hierarchy A_{l+1} = P_l^T A_l P_l from greedy
//! root-node aggregation on the strength graph
//! { j : |a_ij| > theta * sqrt(|a_ii| |a_jj|) }, with piecewise-constant
//! tentative prolongation, optionally Jacobi-smoothed. The cycle is a
//! V(pre, post) from a zero initial guess with a dense LU at the coarsest
//! level; when coarsening stagnates the hierarchy is truncated and the
//! final level falls back to plain smoothing.

use crate::dense::{DenseMatrix, LuFactors};
use crate::error::Result;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Smoother {
    DampedJacobi,
    #[default]
    GaussSeidel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmgConfig {
    pub strength_threshold: f64,
    pub max_levels: usize,
    pub coarsest_size: usize,
    pub smoother: Smoother,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub smoothed_prolongation: bool,
    pub prolongation_damping: f64,
    /// Damping for the damped-Jacobi smoother (unused by Gauss-Seidel).
    pub jacobi_damping: f64,
}

impl Default for AmgConfig {
    fn default() -> Self {
        Self {
            strength_threshold: 0.08,
            max_levels: 10,
            coarsest_size: 64,
            smoother: Smoother::GaussSeidel,
            pre_sweeps: 1,
            post_sweeps: 1,
            smoothed_prolongation: true,
            prolongation_damping: 0.66,
            jacobi_damping: 0.67,
        }
    }
}

impl AmgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| crate::error::Error::InvalidConfig(msg);
        if !(0.0..1.0).contains(&self.strength_threshold) {
            return Err(bad(format!(
                "strength_threshold must lie in [0,1), got {}",
                self.strength_threshold
            )));
        }
        if self.coarsest_size == 0 {
            return Err(bad("coarsest_size must be >= 1".into()));
        }
        if self.max_levels == 0 {
            return Err(bad("max_levels must be >= 1".into()));
        }
        Ok(())
    }
}

struct Level {
    a: SparseMatrix,
    diag_inv: Vec<f64>,
    /// Prolongation from the next-coarser level; absent on the coarsest.
    p: Option<SparseMatrix>,
    r: Option<SparseMatrix>,
}

pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse_lu: Option<LuFactors>,
    cfg: AmgConfig,
    /// Symmetric scaling applied at setup: the hierarchy coarsens
    /// S A S with s_i = |a_ii|^{-1/2}. The strength measure is invariant
    /// under this scaling, but smoothed prolongation and the Galerkin
    /// products behave far better when field diagonals differ by orders
    /// of magnitude (velocity vs stabilized pressure).
    scale: Vec<f64>,
}

impl AmgHierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn fine_dim(&self) -> usize {
        self.levels[0].a.nrows()
    }

    pub fn level_matrix(&self, l: usize) -> &SparseMatrix {
        &self.levels[l].a
    }

    pub fn prolongation(&self, l: usize) -> Option<&SparseMatrix> {
        self.levels[l].p.as_ref()
    }

    pub fn config(&self) -> &AmgConfig {
        &self.cfg
    }

    /// Whether the coarsest level is solved exactly.
    pub fn has_coarse_solve(&self) -> bool {
        self.coarse_lu.is_some()
    }

    /// sum_l nnz(A_l) / nnz(A_0).
    pub fn operator_complexity(&self) -> f64 {
        let base = self.levels[0].a.nnz().max(1) as f64;
        self.levels.iter().map(|l| l.a.nnz() as f64).sum::<f64>() / base
    }

    /// One V(pre, post) cycle from a zero initial guess.
    pub fn vcycle(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.fine_dim());
        let scaled_r: Vec<f64> = r.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        let y = self.cycle(0, &scaled_r);
        y.iter().zip(&self.scale).map(|(v, s)| v * s).collect()
    }

    fn cycle(&self, l: usize, r: &[f64]) -> Vec<f64> {
        let level = &self.levels[l];
        let n = level.a.nrows();
        if l + 1 == self.levels.len() {
            if let Some(lu) = &self.coarse_lu {
                return lu.solve(r).expect("coarse matrix factored at setup");
            }
            // Truncated hierarchy: smooth only.
            let mut x = vec![0.0; n];
            for _ in 0..self.cfg.pre_sweeps + self.cfg.post_sweeps {
                self.smooth(level, r, &mut x);
            }
            return x;
        }
        let mut x = vec![0.0; n];
        for _ in 0..self.cfg.pre_sweeps {
            self.smooth(level, r, &mut x);
        }
        let ax = level.a.spmv(&x).expect("level dims consistent");
        let resid: Vec<f64> = r.iter().zip(&ax).map(|(ri, ai)| ri - ai).collect();
        let rc = level
            .r
            .as_ref()
            .expect("non-coarsest level has restriction")
            .spmv(&resid)
            .expect("restriction dims consistent");
        let xc = self.cycle(l + 1, &rc);
        let correction = level
            .p
            .as_ref()
            .expect("non-coarsest level has prolongation")
            .spmv(&xc)
            .expect("prolongation dims consistent");
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi += ci;
        }
        for _ in 0..self.cfg.post_sweeps {
            self.smooth(level, r, &mut x);
        }
        x
    }

    fn smooth(&self, level: &Level, r: &[f64], x: &mut [f64]) {
        match self.cfg.smoother {
            Smoother::GaussSeidel => super::gauss_seidel_sweep(&level.a, r, x),
            Smoother::DampedJacobi => {
                let ax = level.a.spmv(x).expect("level dims consistent");
                for i in 0..x.len() {
                    x[i] += self.cfg.jacobi_damping * level.diag_inv[i] * (r[i] - ax[i]);
                }
            }
        }
    }
}

/// Greedy root-node aggregation; returns (aggregate id per node, count).
///
/// Strength of connection is |a_ij| > theta * sqrt(|a_ii| |a_jj|).
/// Unknowns whose diagonals differ in sign are never merged: on saddle
/// blocks (positive velocity diagonal, negative stabilized-pressure
/// diagonal) a mixed aggregate cancels the Galerkin coarse diagonal and
/// the coarse solves blow up. The cross couplings still enter the level
/// operators and the smoother.
pub fn aggregate(a: &SparseMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag = a.diag();
    let strong_row = |i: usize| -> Vec<usize> {
        let (cols, vals) = a.row(i);
        let di = diag[i].abs();
        cols.iter()
            .zip(vals)
            .filter(|(&c, &v)| {
                c != i
                    && diag[c] * diag[i] > 0.0
                    && v.abs() > theta * (di * diag[c].abs()).sqrt()
            })
            .map(|(&c, _)| c)
            .collect()
    };
    let strong: Vec<Vec<usize>> = (0..n).map(strong_row).collect();

    const UNASSIGNED: usize = usize::MAX;
    let mut assign = vec![UNASSIGNED; n];
    let mut count = 0usize;
    // Pass 1: roots whose whole strong neighborhood is still free.
    for i in 0..n {
        if assign[i] != UNASSIGNED || strong[i].is_empty() {
            continue;
        }
        if strong[i].iter().all(|&j| assign[j] == UNASSIGNED) {
            assign[i] = count;
            for &j in &strong[i] {
                assign[j] = count;
            }
            count += 1;
        }
    }
    // Pass 2: attach leftovers to the first aggregated strong neighbor.
    for i in 0..n {
        if assign[i] == UNASSIGNED {
            if let Some(&j) = strong[i].iter().find(|&&j| assign[j] != UNASSIGNED) {
                assign[i] = assign[j];
            }
        }
    }
    // Pass 3: isolated nodes become singletons.
    for i in 0..n {
        if assign[i] == UNASSIGNED {
            assign[i] = count;
            count += 1;
        }
    }
    (assign, count)
}

/// Entries a_ij with sign(a_ii) != sign(a_jj) dropped; diagonal kept.
fn same_sign_filter(a: &SparseMatrix) -> SparseMatrix {
    let diag = a.diag();
    let triplets: Vec<(usize, usize, f64)> = a
        .iter()
        .filter(|&(i, j, _)| i == j || diag[i] * diag[j] > 0.0)
        .collect();
    SparseMatrix::from_triplets(a.nrows(), a.ncols(), &triplets)
}

fn tentative_prolongation(assign: &[usize], n_agg: usize) -> SparseMatrix {
    let triplets: Vec<(usize, usize, f64)> = assign
        .iter()
        .enumerate()
        .map(|(i, &agg)| (i, agg, 1.0))
        .collect();
    SparseMatrix::from_triplets(assign.len(), n_agg, &triplets)
}

pub fn amg_setup(a: &SparseMatrix, cfg: &AmgConfig) -> Result<AmgHierarchy> {
    cfg.validate()?;
    let diag_inv_fine = a.diag_inverse()?;
    let scale: Vec<f64> = diag_inv_fine.iter().map(|d| d.abs().sqrt()).collect();
    let mut levels = Vec::new();
    let mut current = a.scale_rows(&scale)?.scale_cols(&scale)?;
    loop {
        let diag_inv = current.diag_inverse()?;
        let n = current.nrows();
        if n <= cfg.coarsest_size || levels.len() + 1 >= cfg.max_levels {
            levels.push(Level {
                a: current,
                diag_inv,
                p: None,
                r: None,
            });
            break;
        }
        let (assign, n_agg) = aggregate(&current, cfg.strength_threshold);
        if n_agg as f64 >= 0.9 * n as f64 {
            // Stagnation: keep this level as the coarsest.
            levels.push(Level {
                a: current,
                diag_inv,
                p: None,
                r: None,
            });
            break;
        }
        let p_hat = tentative_prolongation(&assign, n_agg);
        let p = if cfg.smoothed_prolongation {
            // P = (I - w D^{-1} A) P_hat, with A restricted to same-sign
            // diagonal pairs for the same reason aggregation is: a
            // pressure-row smear of size |b_ij| / |c_ii| would inject huge
            // cross-field entries into the coarse basis.
            let filtered = same_sign_filter(&current);
            let scaled = filtered.scale_rows(&diag_inv)?;
            let ap = scaled.spgemm(&p_hat)?;
            SparseMatrix::axpby(1.0, &p_hat, -cfg.prolongation_damping, &ap)?
        } else {
            p_hat
        };
        let r = p.transpose();
        let next = r.spgemm(&current.spgemm(&p)?)?;
        levels.push(Level {
            a: current,
            diag_inv,
            p: Some(p),
            r: Some(r),
        });
        current = next;
    }
    let last = levels.last().expect("at least one level");
    let coarse_lu = if last.a.nrows() <= cfg.coarsest_size {
        Some(DenseMatrix::from_sparse(&last.a).lu()?)
    } else {
        None
    };
    Ok(AmgHierarchy {
        levels,
        coarse_lu,
        cfg: cfg.clone(),
        scale,
    })
}
