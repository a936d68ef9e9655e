//! Approximate inverses for the diagonal blocks and the Schur complement.
//!
//! Every built solver maps a residual to an approximate solution starting
//! from a zero initial guess and is deterministic. All kinds except the
//! inner GMRES are linear operators, so they are valid inside plain GMRES;
//! the inner GMRES forces the flexible variant.

pub mod amg;
pub mod ilu0;

use crate::dense::{DenseMatrix, LuFactors};
use crate::error::{dim_mismatch, Result};
use crate::krylov::{self, IdentityOperator, KrylovConfig, LinearOperator};
use crate::sparse::SparseMatrix;

pub use amg::{AmgConfig, AmgHierarchy, Smoother};
pub use ilu0::Ilu0Factorization;

/// Which approximate inverse to build for a block.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSolverSpec {
    ExactLu,
    JacobiSweeps { sweeps: usize, damping: f64 },
    GaussSeidelSweeps { sweeps: usize },
    Ilu0,
    AmgVcycle(AmgConfig),
    InnerGmres { iterations: usize },
}

impl InnerSolverSpec {
    pub fn jacobi_default() -> Self {
        Self::JacobiSweeps {
            sweeps: 2,
            damping: 0.67,
        }
    }

    pub fn gauss_seidel_default() -> Self {
        Self::GaussSeidelSweeps { sweeps: 2 }
    }

    pub fn amg_default() -> Self {
        Self::AmgVcycle(AmgConfig::default())
    }

    pub fn inner_gmres_default() -> Self {
        Self::InnerGmres { iterations: 5 }
    }

    /// False only for the inner Krylov solver.
    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::InnerGmres { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| crate::error::Error::InvalidConfig(msg);
        match self {
            Self::JacobiSweeps { sweeps, damping } => {
                if *sweeps == 0 {
                    return Err(bad("jacobi sweeps must be >= 1".into()));
                }
                if !(*damping > 0.0 && *damping <= 1.0) {
                    return Err(bad(format!("jacobi damping must lie in (0,1], got {damping}")));
                }
            }
            Self::GaussSeidelSweeps { sweeps } => {
                if *sweeps == 0 {
                    return Err(bad("gauss-seidel sweeps must be >= 1".into()));
                }
            }
            Self::InnerGmres { iterations } => {
                if *iterations == 0 {
                    return Err(bad("inner gmres iterations must be >= 1".into()));
                }
            }
            Self::AmgVcycle(cfg) => cfg.validate()?,
            Self::ExactLu | Self::Ilu0 => {}
        }
        Ok(())
    }
}

/// A built approximate inverse for one square block.
pub enum InnerSolver {
    ExactLu {
        lu: LuFactors,
        dim: usize,
    },
    Jacobi {
        a: SparseMatrix,
        diag_inv: Vec<f64>,
        sweeps: usize,
        damping: f64,
    },
    GaussSeidel {
        a: SparseMatrix,
        sweeps: usize,
    },
    Ilu0(Ilu0Factorization),
    Amg(AmgHierarchy),
    /// ILU(0) standing in for AMG after coarsening stagnated on the block.
    AmgIluFallback(Ilu0Factorization),
    InnerGmres {
        a: SparseMatrix,
        /// ILU(0) right preconditioner for the inner iteration; without it
        /// a handful of Krylov steps does nothing useful on the stiff
        /// blocks. Absent when the block has no stable zero-fill factors.
        ilu: Option<Box<Ilu0Factorization>>,
        iterations: usize,
    },
}

impl InnerSolver {
    pub fn dim(&self) -> usize {
        match self {
            Self::ExactLu { dim, .. } => *dim,
            Self::Jacobi { a, .. } | Self::GaussSeidel { a, .. } | Self::InnerGmres { a, .. } => {
                a.nrows()
            }
            Self::Ilu0(f) | Self::AmgIluFallback(f) => f.dim(),
            Self::Amg(h) => h.fine_dim(),
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::InnerGmres { .. })
    }

    /// True when AMG setup stagnated and ILU(0) was substituted.
    pub fn used_amg_fallback(&self) -> bool {
        matches!(self, Self::AmgIluFallback(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::ExactLu { .. } => "exact_lu",
            Self::Jacobi { .. } => "jacobi_sweeps",
            Self::GaussSeidel { .. } => "gauss_seidel_sweeps",
            Self::Ilu0(_) => "ilu0",
            Self::Amg(_) => "amg_vcycle",
            Self::AmgIluFallback(_) => "amg_vcycle(ilu0 fallback)",
            Self::InnerGmres { .. } => "inner_gmres",
        }
    }

    /// v -> approx A^{-1} v, always from a zero initial guess.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.dim());
        match self {
            Self::ExactLu { lu, .. } => lu.solve(r).expect("factored matrix became singular"),
            Self::Jacobi {
                a,
                diag_inv,
                sweeps,
                damping,
            } => {
                let mut x = vec![0.0; r.len()];
                for _ in 0..*sweeps {
                    let ax = a.spmv(&x).expect("dim checked at build");
                    for i in 0..x.len() {
                        x[i] += damping * diag_inv[i] * (r[i] - ax[i]);
                    }
                }
                x
            }
            Self::GaussSeidel { a, sweeps } => {
                let mut x = vec![0.0; r.len()];
                for _ in 0..*sweeps {
                    gauss_seidel_sweep(a, r, &mut x);
                }
                x
            }
            Self::Ilu0(f) | Self::AmgIluFallback(f) => f.apply(r),
            Self::Amg(h) => h.vcycle(r),
            Self::InnerGmres { a, ilu, iterations } => {
                let cfg = KrylovConfig {
                    tolerance: 1e-14,
                    max_iterations: *iterations,
                    restart: None,
                };
                let x = match ilu {
                    Some(f) => {
                        let m = krylov::FnOperator::new(a.nrows(), |v: &[f64]| f.apply(v));
                        krylov::gmres(a, &m, r, None, &cfg)
                    }
                    None => krylov::gmres(a, &IdentityOperator(a.nrows()), r, None, &cfg),
                }
                .expect("inner gmres dimensions checked at build");
                x.0
            }
        }
    }
}

impl LinearOperator for InnerSolver {
    fn dim(&self) -> usize {
        InnerSolver::dim(self)
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        InnerSolver::apply(self, v)
    }
}

/// One forward Gauss-Seidel sweep on x in place.
pub(crate) fn gauss_seidel_sweep(a: &SparseMatrix, r: &[f64], x: &mut [f64]) {
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut acc = r[i];
        let mut diag = 0.0;
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag = v;
            } else {
                acc -= v * x[c];
            }
        }
        debug_assert!(diag != 0.0, "gauss-seidel hit zero diagonal in row {i}");
        x[i] = acc / diag;
    }
}

/// Builds the approximate inverse described by `spec` for the square block `a`.
pub fn build_inner(a: &SparseMatrix, spec: &InnerSolverSpec) -> Result<InnerSolver> {
    spec.validate()?;
    if !a.is_square() {
        return Err(dim_mismatch(
            "build_inner",
            format!("block is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    match spec {
        InnerSolverSpec::ExactLu => {
            let lu = DenseMatrix::from_sparse(a).lu()?;
            Ok(InnerSolver::ExactLu { lu, dim: a.nrows() })
        }
        InnerSolverSpec::JacobiSweeps { sweeps, damping } => Ok(InnerSolver::Jacobi {
            a: a.clone(),
            diag_inv: a.diag_inverse()?,
            sweeps: *sweeps,
            damping: *damping,
        }),
        InnerSolverSpec::GaussSeidelSweeps { sweeps } => {
            a.diag_inverse()?;
            Ok(InnerSolver::GaussSeidel {
                a: a.clone(),
                sweeps: *sweeps,
            })
        }
        InnerSolverSpec::Ilu0 => Ok(InnerSolver::Ilu0(ilu0::ilu0_factor(a)?)),
        InnerSolverSpec::AmgVcycle(cfg) => {
            let hierarchy = amg::amg_setup(a, cfg)?;
            if hierarchy.depth() == 1 && a.nrows() > cfg.coarsest_size {
                // Coarsening stagnated on a block too large to smooth alone.
                return Ok(InnerSolver::AmgIluFallback(ilu0::ilu0_factor(a)?));
            }
            Ok(InnerSolver::Amg(hierarchy))
        }
        InnerSolverSpec::InnerGmres { iterations } => Ok(InnerSolver::InnerGmres {
            a: a.clone(),
            ilu: ilu0::ilu0_factor(a).ok().map(Box::new),
            iterations: *iterations,
        }),
    }
}
