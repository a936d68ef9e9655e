//! Right-preconditioned GMRES and flexible GMRES.
//!
//! Both solvers run modified Gram-Schmidt Arnoldi with Givens-rotation
//! least squares. Right preconditioning keeps the monitored residual equal
//! to the true residual of the original system, and the stopping rule is a
//! relative reduction of that residual. FGMRES stores the preconditioned
//! basis so the preconditioner may change between iterations (inner Krylov
//! solves); with a fixed linear preconditioner it reproduces GMRES.

use std::time::Instant;

use crate::error::{dim_mismatch, Result};
use crate::sparse::{dot, norm2, SparseMatrix};

/// Anything that maps a vector to a vector of the same length.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.nrows()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.spmv(v).expect("operator dimension mismatch")
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
}

pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F: Fn(&[f64]) -> Vec<f64>> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (self.f)(v)
    }
}

#[derive(Debug, Clone)]
pub struct KrylovConfig {
    /// Stop when the residual norm has dropped by this factor.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `None` runs full (unrestarted) GMRES.
    pub restart: Option<usize>,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 250,
            restart: None,
        }
    }
}

impl KrylovConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(crate::error::Error::InvalidConfig(format!(
                "tolerance must lie in (0,1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(crate::error::Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.restart == Some(0) {
            return Err(crate::error::Error::InvalidConfig(
                "restart length must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Arnoldi residual-norm estimates, starting with the initial residual.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// True relative residual ||b - Ax|| / ||b - Ax0||, recomputed at exit.
    pub final_relative_residual: f64,
    pub wall_time: f64,
}

/// Right-preconditioned GMRES; `apply_m` must be a fixed linear operator.
pub fn gmres<A, M>(
    apply_a: &A,
    apply_m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    solve_inner(apply_a, apply_m, b, x0, cfg, false)
}

/// Flexible GMRES; `apply_m` may vary between iterations.
pub fn fgmres<A, M>(
    apply_a: &A,
    apply_m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    solve_inner(apply_a, apply_m, b, x0, cfg, true)
}

const BREAKDOWN_EPS: f64 = 1e-300;

fn solve_inner<A, M>(
    apply_a: &A,
    apply_m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
    flexible: bool,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    cfg.validate()?;
    let n = apply_a.dim();
    if b.len() != n {
        return Err(dim_mismatch(
            "gmres",
            format!("operator dim {n}, rhs length {}", b.len()),
        ));
    }
    if apply_m.dim() != n {
        return Err(dim_mismatch(
            "gmres",
            format!("operator dim {n}, preconditioner dim {}", apply_m.dim()),
        ));
    }
    let start = Instant::now();
    let mut x = match x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(dim_mismatch(
                    "gmres",
                    format!("operator dim {n}, x0 length {}", x0.len()),
                ));
            }
            x0.to_vec()
        }
        None => vec![0.0; n],
    };

    let r0 = residual(apply_a, b, &x);
    let beta0 = norm2(&r0);
    let mut history = vec![beta0];
    if beta0 == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                residual_history: history,
                converged: true,
                final_relative_residual: 0.0,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }
    let target = cfg.tolerance * beta0;
    let mut total_iters = 0usize;

    'outer: loop {
        let cycle_len = cfg
            .restart
            .unwrap_or(cfg.max_iterations)
            .min(cfg.max_iterations - total_iters);
        // Arnoldi basis; FGMRES also stores the preconditioned vectors.
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(cycle_len + 1);
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(cycle_len);
        let mut cs: Vec<f64> = Vec::with_capacity(cycle_len);
        let mut sn: Vec<f64> = Vec::with_capacity(cycle_len);
        let mut g = vec![0.0; cycle_len + 1];

        let r = residual(apply_a, b, &x);
        let mut v0 = r;
        let rnorm = norm2(&v0);
        if rnorm <= BREAKDOWN_EPS {
            break 'outer;
        }
        scale(&mut v0, 1.0 / rnorm);
        g[0] = rnorm;
        v.push(v0);

        let mut k_done = 0usize;
        let mut happy = false;
        for k in 0..cycle_len {
            total_iters += 1;
            let zk = apply_m.apply(&v[k]);
            let mut w = apply_a.apply(&zk);
            if flexible {
                z.push(zk);
            }
            let mut hk = vec![0.0; k + 2];
            for (j, vj) in v.iter().enumerate() {
                let hjk = dot(&w, vj);
                hk[j] = hjk;
                for (wi, vji) in w.iter_mut().zip(vj) {
                    *wi -= hjk * vji;
                }
            }
            let wnorm = norm2(&w);
            hk[k + 1] = wnorm;
            let breakdown = wnorm <= BREAKDOWN_EPS;
            if !breakdown {
                scale(&mut w, 1.0 / wnorm);
                v.push(w);
            }
            // Apply accumulated rotations, then a new one to zero h[k+1].
            for j in 0..k {
                let t = cs[j] * hk[j] + sn[j] * hk[j + 1];
                hk[j + 1] = -sn[j] * hk[j] + cs[j] * hk[j + 1];
                hk[j] = t;
            }
            let (c, s) = givens(hk[k], hk[k + 1]);
            cs.push(c);
            sn.push(s);
            hk[k] = c * hk[k] + s * hk[k + 1];
            hk[k + 1] = 0.0;
            let t = c * g[k] + s * g[k + 1];
            g[k + 1] = -s * g[k] + c * g[k + 1];
            g[k] = t;
            h_cols.push(hk);

            k_done = k + 1;
            let estimate = g[k_done].abs();
            history.push(estimate);
            if estimate <= target || breakdown {
                happy = true;
                break;
            }
            if total_iters >= cfg.max_iterations {
                break;
            }
        }

        if k_done > 0 {
            // Back-substitute H y = g.
            let mut y = vec![0.0; k_done];
            for i in (0..k_done).rev() {
                let mut acc = g[i];
                for (j, yj) in y.iter().enumerate().skip(i + 1) {
                    acc -= h_cols[j][i] * yj;
                }
                y[i] = acc / h_cols[i][i];
            }
            if flexible {
                for (j, yj) in y.iter().enumerate() {
                    axpy(&mut x, *yj, &z[j]);
                }
            } else {
                let mut u = vec![0.0; n];
                for (j, yj) in y.iter().enumerate() {
                    axpy(&mut u, *yj, &v[j]);
                }
                let correction = apply_m.apply(&u);
                for (xi, ci) in x.iter_mut().zip(&correction) {
                    *xi += ci;
                }
            }
        }

        if happy || total_iters >= cfg.max_iterations {
            break 'outer;
        }
    }

    let final_res = norm2(&residual(apply_a, b, &x));
    let final_rel = final_res / beta0;
    let report = SolveReport {
        iterations: total_iters,
        residual_history: history,
        converged: final_rel <= cfg.tolerance,
        final_relative_residual: final_rel,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((x, report))
}

fn residual<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &[f64]) -> Vec<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return b.to_vec();
    }
    let ax = a.apply(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn scale(v: &mut [f64], s: f64) {
    for x in v {
        *x *= s;
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, c * t)
    } else {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    }
}
