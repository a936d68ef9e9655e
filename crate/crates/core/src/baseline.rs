//! Classical block preconditioners used as comparison baselines.
//!
//! Block diagonal, block lower/upper triangular (approximate diagonal
//! solves, exact coupling blocks), a block SSOR composition, and ILU(0)
//! of the assembled monolithic matrix. The fluid diagonal approximation
//! acts on A_f itself, not on a Schur complement, which is precisely why
//! these degrade as the coupling strengthens.

use crate::error::Result;
use crate::inner::{build_inner, ilu0::ilu0_factor, Ilu0Factorization, InnerSolver, InnerSolverSpec};
use crate::krylov::LinearOperator;
use crate::system::FsiBlockSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// blockdiag(A_m, A_s, A_f) with approximate solves.
    Diagonal,
    /// Block lower triangle of K, forward substitution.
    Lower,
    /// Block upper triangle of K, backward substitution.
    Upper,
    /// Forward solve, exact block-diagonal multiply, backward solve.
    Ssor,
    /// ILU(0) of the assembled monolithic matrix.
    Ilu,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Diagonal => "P_D",
            Self::Lower => "P_L",
            Self::Upper => "P_U",
            Self::Ssor => "P_SSOR",
            Self::Ilu => "P_ILU",
        }
    }
}

struct BlockwiseInners {
    inner_m: InnerSolver,
    inner_s: InnerSolver,
    inner_f: InnerSolver,
}

enum Realization {
    Blockwise(Box<BlockwiseInners>),
    MonolithicIlu(Box<Ilu0Factorization>),
}

pub struct BaselinePreconditioner {
    kind: BaselineKind,
    sys: FsiBlockSystem,
    realization: Realization,
}

impl BaselinePreconditioner {
    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn is_linear(&self) -> bool {
        match &self.realization {
            Realization::Blockwise(b) => {
                b.inner_m.is_linear() && b.inner_s.is_linear() && b.inner_f.is_linear()
            }
            Realization::MonolithicIlu(_) => true,
        }
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        match &self.realization {
            Realization::MonolithicIlu(f) => f.apply(r),
            Realization::Blockwise(b) => {
                let BlockwiseInners {
                    inner_m,
                    inner_s,
                    inner_f,
                } = b.as_ref();
                let sys = &self.sys;
                match self.kind {
                    BaselineKind::Diagonal => {
                        let (r_m, r_s, r_f) = sys.split(r);
                        let mut x = inner_m.apply(r_m);
                        x.extend(inner_s.apply(r_s));
                        x.extend(inner_f.apply(r_f));
                        x
                    }
                    BaselineKind::Lower => forward_solve(sys, inner_m, inner_s, inner_f, r),
                    BaselineKind::Upper => backward_solve(sys, inner_m, inner_s, inner_f, r),
                    BaselineKind::Ssor => {
                        let y = forward_solve(sys, inner_m, inner_s, inner_f, r);
                        // Exact block-diagonal multiply between the sweeps.
                        let (y_m, y_s, y_f) = sys.split(&y);
                        let mut z = sys.a_m.spmv(y_m).expect("dims validated");
                        z.extend(sys.a_s.spmv(y_s).expect("dims validated"));
                        z.extend(sys.a_f.spmv(y_f).expect("dims validated"));
                        backward_solve(sys, inner_m, inner_s, inner_f, &z)
                    }
                    BaselineKind::Ilu => unreachable!("ILU uses the monolithic realization"),
                }
            }
        }
    }
}

/// x_m = M^-1 r_m; x_s = S^-1 r_s; x_f = F^-1 (r_f - A_fm x_m - A_fs x_s).
fn forward_solve(
    sys: &FsiBlockSystem,
    inner_m: &InnerSolver,
    inner_s: &InnerSolver,
    inner_f: &InnerSolver,
    r: &[f64],
) -> Vec<f64> {
    let (r_m, r_s, r_f) = sys.split(r);
    let x_m = inner_m.apply(r_m);
    let x_s = inner_s.apply(r_s);
    let mut t = r_f.to_vec();
    sys.a_fm.spmv_acc(-1.0, &x_m, &mut t);
    sys.a_fs.spmv_acc(-1.0, &x_s, &mut t);
    let x_f = inner_f.apply(&t);
    let mut x = x_m;
    x.extend(x_s);
    x.extend(x_f);
    x
}

/// x_f = F^-1 r_f; x_s = S^-1 (r_s - A_sf x_f); x_m = M^-1 (r_m - A_ms x_s).
fn backward_solve(
    sys: &FsiBlockSystem,
    inner_m: &InnerSolver,
    inner_s: &InnerSolver,
    inner_f: &InnerSolver,
    r: &[f64],
) -> Vec<f64> {
    let (r_m, r_s, r_f) = sys.split(r);
    let x_f = inner_f.apply(r_f);
    let mut t_s = r_s.to_vec();
    sys.a_sf.spmv_acc(-1.0, &x_f, &mut t_s);
    let x_s = inner_s.apply(&t_s);
    let mut t_m = r_m.to_vec();
    sys.a_ms.spmv_acc(-1.0, &x_s, &mut t_m);
    let x_m = inner_m.apply(&t_m);
    let mut x = x_m;
    x.extend(x_s);
    x.extend(x_f);
    x
}

impl LinearOperator for BaselinePreconditioner {
    fn dim(&self) -> usize {
        self.sys.total_dim()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        BaselinePreconditioner::apply(self, v)
    }
}

/// Builds one of the five baselines. The inner specs approximate A_m, A_s
/// and A_f; P_ILU ignores them and factors the assembled matrix instead.
pub fn build_baseline(
    sys: &FsiBlockSystem,
    kind: BaselineKind,
    spec_m: &InnerSolverSpec,
    spec_s: &InnerSolverSpec,
    spec_f: &InnerSolverSpec,
) -> Result<BaselinePreconditioner> {
    sys.validate()?;
    let realization = match kind {
        BaselineKind::Ilu => {
            let k = sys.assemble_monolithic()?;
            Realization::MonolithicIlu(Box::new(ilu0_factor(&k)?))
        }
        _ => Realization::Blockwise(Box::new(BlockwiseInners {
            inner_m: build_inner(&sys.a_m, spec_m)?,
            inner_s: build_inner(&sys.a_s, spec_s)?,
            inner_f: build_inner(&sys.a_f, spec_f)?,
        })),
    };
    Ok(BaselinePreconditioner {
        kind,
        sys: sys.clone(),
        realization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{gmres, KrylovConfig};
    use crate::rng::SplitMix64;
    use crate::sparse::{norm2, SparseMatrix};

    #[test]
    fn decoupled_baselines_equal_exact_inverse() {
        let mut rng = SplitMix64::new(7);
        let mut sys = crate::testutil::random_system(&mut rng, 6, 5, 8);
        // Full-pattern diagonal blocks so that even ILU(0) is an exact
        // factorization once every coupling block vanishes.
        let dense_block = |rng: &mut SplitMix64, n: usize| {
            let mut rows = vec![vec![0.0; n]; n];
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = rng.next_signed();
                    if i == j {
                        *v += n as f64;
                    }
                }
            }
            SparseMatrix::from_dense_rows(&rows)
        };
        sys.a_m = dense_block(&mut rng, 6);
        sys.a_s = dense_block(&mut rng, 5);
        sys.a_f = dense_block(&mut rng, 8);
        sys.a_ms = SparseMatrix::zeros(6, 5);
        sys.a_sf = SparseMatrix::zeros(5, 8);
        sys.a_fm = SparseMatrix::zeros(8, 6);
        sys.a_fs = SparseMatrix::zeros(8, 5);
        let k = sys.assemble_monolithic().unwrap();
        let b = rng.vector(sys.total_dim());
        for kind in [
            BaselineKind::Diagonal,
            BaselineKind::Lower,
            BaselineKind::Upper,
            BaselineKind::Ssor,
            BaselineKind::Ilu,
        ] {
            let p = build_baseline(
                &sys,
                kind,
                &InnerSolverSpec::ExactLu,
                &InnerSolverSpec::ExactLu,
                &InnerSolverSpec::ExactLu,
            )
            .unwrap();
            if kind != BaselineKind::Ilu {
                let x = p.apply(&b);
                let kx = sys.apply(&x).unwrap();
                let err: Vec<f64> = kx.iter().zip(&b).map(|(u, v)| u - v).collect();
                assert!(
                    norm2(&err) <= 1e-10 * norm2(&b),
                    "{} not exact on decoupled system",
                    kind.name()
                );
            }
            let (_, rep) = gmres(&k, &p, &b, None, &KrylovConfig::default()).unwrap();
            assert_eq!(
                rep.iterations,
                1,
                "{} took {} iterations on a decoupled system",
                kind.name(),
                rep.iterations
            );
        }
    }

    #[test]
    fn baselines_are_linear_with_linear_inners() {
        let mut rng = SplitMix64::new(17);
        let sys = crate::testutil::random_system(&mut rng, 5, 4, 7);
        for kind in [
            BaselineKind::Diagonal,
            BaselineKind::Lower,
            BaselineKind::Upper,
            BaselineKind::Ssor,
            BaselineKind::Ilu,
        ] {
            let p = build_baseline(
                &sys,
                kind,
                &InnerSolverSpec::jacobi_default(),
                &InnerSolverSpec::jacobi_default(),
                &InnerSolverSpec::jacobi_default(),
            )
            .unwrap();
            assert!(p.is_linear());
            let u = rng.vector(sys.total_dim());
            let v = rng.vector(sys.total_dim());
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| 1.5 * x - 0.5 * y).collect();
            let lhs = p.apply(&combo);
            let pu = p.apply(&u);
            let pv = p.apply(&v);
            let scale = norm2(&lhs).max(1.0);
            for i in 0..lhs.len() {
                assert!((lhs[i] - (1.5 * pu[i] - 0.5 * pv[i])).abs() <= 1e-12 * scale);
            }
        }
    }
}
