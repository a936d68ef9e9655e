//! The block-LDU preconditioner with an explicit fluid Schur complement.
//!
//! The coupled matrix admits an exact block factorization whose diagonal
//! carries the fluid Schur complement S = A_f - (A_fs - A_fm A_m^-1 A_ms)
//! A_s^-1 A_sf. The preconditioner replaces the inner inverses of A_m and
//! A_s inside S by plain diagonal inverses, which makes the perturbed
//! fluid matrix cheap to construct with sparse matrix products, and
//! replaces the block inverses applied during the solve by pluggable
//! approximate inverses. Dense reference factorizations (fluid, structure
//! and mesh-movement Schur complements) are provided as test oracles.

use crate::dense::{DenseMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::inner::{build_inner, InnerSolver, InnerSolverSpec};
use crate::krylov::LinearOperator;
use crate::sparse::SparseMatrix;
use crate::system::FsiBlockSystem;

/// Ablation switches; the default build keeps the mesh-coupling term.
#[derive(Debug, Clone, Default)]
pub struct LduOptions {
    /// Drop -A_fm diag(A_m)^-1 A_ms from the coupling approximation.
    /// Cheaper but known to lose density robustness; off by default.
    pub drop_mesh_coupling: bool,
}

/// tilde(A_fs) = A_fs - A_fm diag(A_m)^-1 A_ms.
pub fn build_tilde_afs_hat(sys: &FsiBlockSystem) -> Result<SparseMatrix> {
    let dinv_m = sys.a_m.diag_inverse()?;
    let scaled = sys.a_fm.scale_cols(&dinv_m)?;
    let prod = scaled.spgemm(&sys.a_ms)?;
    SparseMatrix::axpby(1.0, &sys.a_fs, -1.0, &prod)
}

/// S_hat = A_f - tilde(A_fs) diag(A_s)^-1 A_sf.
///
/// The perturbation's nonzero columns must stay inside the interface
/// velocity range; anything else signals mis-assembled couplings.
pub fn build_schur_hat(sys: &FsiBlockSystem, tilde_afs_hat: &SparseMatrix) -> Result<SparseMatrix> {
    let dinv_s = sys.a_s.diag_inverse()?;
    let scaled = tilde_afs_hat.scale_cols(&dinv_s)?;
    let prod = scaled.spgemm(&sys.a_sf)?;
    let gamma = &sys.interface_maps.fluid_velocity_gamma;
    for col in prod.nonzero_columns() {
        if !gamma.contains(&col) {
            return Err(Error::SchurPatternViolation { col });
        }
    }
    SparseMatrix::axpby(1.0, &sys.a_f, -1.0, &prod)
}

pub struct LduPreconditioner {
    inner_m: InnerSolver,
    inner_s: InnerSolver,
    inner_schur: InnerSolver,
    tilde_afs_hat: SparseMatrix,
    schur_hat: SparseMatrix,
    a_fm: SparseMatrix,
    a_sf: SparseMatrix,
    a_ms: SparseMatrix,
    dims: (usize, usize, usize),
    linear: bool,
}

impl LduPreconditioner {
    /// True when every inner solver is linear, making the preconditioner
    /// eligible for plain GMRES.
    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn schur_hat(&self) -> &SparseMatrix {
        &self.schur_hat
    }

    pub fn tilde_afs_hat(&self) -> &SparseMatrix {
        &self.tilde_afs_hat
    }

    pub fn inner_kinds(&self) -> [&'static str; 3] {
        [
            self.inner_m.kind_name(),
            self.inner_s.kind_name(),
            self.inner_schur.kind_name(),
        ]
    }

    /// Whether any AMG inner stagnated and fell back to ILU(0).
    pub fn amg_fallbacks(&self) -> [bool; 3] {
        [
            self.inner_m.used_amg_fallback(),
            self.inner_s.used_amg_fallback(),
            self.inner_schur.used_amg_fallback(),
        ]
    }

    /// The five preconditioning steps: approximate forward elimination on
    /// (m, s), a Schur solve for the fluid unknowns, then the backward
    /// substitution updates for s and m. The same inner approximations are
    /// reused for both applications per block.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (n_m, n_s, n_f) = self.dims;
        debug_assert_eq!(r.len(), n_m + n_s + n_f);
        let r_m = &r[0..n_m];
        let r_s = &r[n_m..n_m + n_s];
        let r_f = &r[n_m + n_s..];

        // 1-2: provisional block solves.
        let xt_m = self.inner_m.apply(r_m);
        let xt_s = self.inner_s.apply(r_s);
        // 3: fluid solve against the Schur approximation.
        let mut t = r_f.to_vec();
        self.a_fm.spmv_acc(-1.0, &xt_m, &mut t);
        self.tilde_afs_hat.spmv_acc(-1.0, &xt_s, &mut t);
        let x_f = self.inner_schur.apply(&t);
        // 4: structure update.
        let asf_xf = self.a_sf.spmv(&x_f).expect("dims validated at build");
        let corr_s = self.inner_s.apply(&asf_xf);
        let x_s: Vec<f64> = xt_s.iter().zip(&corr_s).map(|(a, b)| a - b).collect();
        // 5: mesh update.
        let ams_xs = self.a_ms.spmv(&x_s).expect("dims validated at build");
        let corr_m = self.inner_m.apply(&ams_xs);
        let x_m: Vec<f64> = xt_m.iter().zip(&corr_m).map(|(a, b)| a - b).collect();

        let mut x = Vec::with_capacity(r.len());
        x.extend_from_slice(&x_m);
        x.extend_from_slice(&x_s);
        x.extend_from_slice(&x_f);
        x
    }
}

impl LinearOperator for LduPreconditioner {
    fn dim(&self) -> usize {
        let (m, s, f) = self.dims;
        m + s + f
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        LduPreconditioner::apply(self, v)
    }
}

pub fn build_ldu_preconditioner(
    sys: &FsiBlockSystem,
    spec_m: &InnerSolverSpec,
    spec_s: &InnerSolverSpec,
    spec_schur: &InnerSolverSpec,
) -> Result<LduPreconditioner> {
    build_ldu_with_options(sys, spec_m, spec_s, spec_schur, &LduOptions::default())
}

pub fn build_ldu_with_options(
    sys: &FsiBlockSystem,
    spec_m: &InnerSolverSpec,
    spec_s: &InnerSolverSpec,
    spec_schur: &InnerSolverSpec,
    opts: &LduOptions,
) -> Result<LduPreconditioner> {
    sys.validate()?;
    let tilde_afs_hat = if opts.drop_mesh_coupling {
        sys.a_fs.clone()
    } else {
        build_tilde_afs_hat(sys)?
    };
    let schur_hat = build_schur_hat(sys, &tilde_afs_hat)?;
    let inner_m = build_inner(&sys.a_m, spec_m)?;
    let inner_s = build_inner(&sys.a_s, spec_s)?;
    let inner_schur = build_inner(&schur_hat, spec_schur)?;
    let linear = inner_m.is_linear() && inner_s.is_linear() && inner_schur.is_linear();
    Ok(LduPreconditioner {
        inner_m,
        inner_s,
        inner_schur,
        tilde_afs_hat,
        schur_hat,
        a_fm: sys.a_fm.clone(),
        a_sf: sys.a_sf.clone(),
        a_ms: sys.a_ms.clone(),
        dims: sys.dims(),
        linear,
    })
}

/// Hard cap for the dense reference paths.
const DENSE_LIMIT: usize = 5000;

fn check_dense_limit(op: &'static str, n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::InvalidConfig(format!(
            "{op} densifies and is limited to {DENSE_LIMIT} unknowns, got {n}"
        )));
    }
    Ok(())
}

/// Exact factorization solve: equals K^-1 up to rounding. Test oracle and
/// the strongest possible preconditioner for small systems.
pub struct ExactLduReference {
    lu_m: LuFactors,
    lu_s: LuFactors,
    lu_schur: LuFactors,
    tilde_afs: DenseMatrix,
    a_fm: SparseMatrix,
    a_sf: SparseMatrix,
    a_ms: SparseMatrix,
    dims: (usize, usize, usize),
}

impl ExactLduReference {
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (n_m, n_s, n_f) = self.dims;
        debug_assert_eq!(r.len(), n_m + n_s + n_f);
        let r_m = &r[0..n_m];
        let r_s = &r[n_m..n_m + n_s];
        let r_f = &r[n_m + n_s..];

        let xt_m = self.lu_m.solve(r_m).expect("factored at build");
        let xt_s = self.lu_s.solve(r_s).expect("factored at build");
        let mut t = r_f.to_vec();
        self.a_fm.spmv_acc(-1.0, &xt_m, &mut t);
        let tilde_xts = self.tilde_afs.matvec(&xt_s);
        for (ti, ci) in t.iter_mut().zip(&tilde_xts) {
            *ti -= ci;
        }
        let x_f = self.lu_schur.solve(&t).expect("factored at build");
        let asf_xf = self.a_sf.spmv(&x_f).expect("dims validated");
        let corr_s = self.lu_s.solve(&asf_xf).expect("factored at build");
        let x_s: Vec<f64> = xt_s.iter().zip(&corr_s).map(|(a, b)| a - b).collect();
        let ams_xs = self.a_ms.spmv(&x_s).expect("dims validated");
        let corr_m = self.lu_m.solve(&ams_xs).expect("factored at build");
        let x_m: Vec<f64> = xt_m.iter().zip(&corr_m).map(|(a, b)| a - b).collect();

        let mut x = Vec::with_capacity(r.len());
        x.extend_from_slice(&x_m);
        x.extend_from_slice(&x_s);
        x.extend_from_slice(&x_f);
        x
    }
}

impl LinearOperator for ExactLduReference {
    fn dim(&self) -> usize {
        let (m, s, f) = self.dims;
        m + s + f
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        ExactLduReference::apply(self, v)
    }
}

/// Builds the exact factorization with dense inverses and the exact fluid
/// Schur complement S = A_f - tilde(A_fs) A_s^-1 A_sf.
pub fn build_exact_ldu_reference(sys: &FsiBlockSystem) -> Result<ExactLduReference> {
    sys.validate()?;
    check_dense_limit("build_exact_ldu_reference", sys.total_dim())?;
    let lu_m = DenseMatrix::from_sparse(&sys.a_m).lu()?;
    let minv_ams = lu_m.solve_matrix(&DenseMatrix::from_sparse(&sys.a_ms))?;
    let tilde_afs = DenseMatrix::from_sparse(&sys.a_fs)
        .sub(&DenseMatrix::from_sparse(&sys.a_fm).matmul(&minv_ams));
    let lu_s = DenseMatrix::from_sparse(&sys.a_s).lu()?;
    let sinv_asf = lu_s.solve_matrix(&DenseMatrix::from_sparse(&sys.a_sf))?;
    let schur = DenseMatrix::from_sparse(&sys.a_f).sub(&tilde_afs.matmul(&sinv_asf));
    let lu_schur = schur.lu()?;
    Ok(ExactLduReference {
        lu_m,
        lu_s,
        lu_schur,
        tilde_afs,
        a_fm: sys.a_fm.clone(),
        a_sf: sys.a_sf.clone(),
        a_ms: sys.a_ms.clone(),
        dims: sys.dims(),
    })
}

/// Structure Schur complement S = A_s - A_sf A_f^-1 (A_fs - A_fm A_m^-1 A_ms).
pub fn build_structure_schur_reference(sys: &FsiBlockSystem) -> Result<DenseMatrix> {
    sys.validate()?;
    check_dense_limit("build_structure_schur_reference", sys.total_dim())?;
    let lu_m = DenseMatrix::from_sparse(&sys.a_m).lu()?;
    let minv_ams = lu_m.solve_matrix(&DenseMatrix::from_sparse(&sys.a_ms))?;
    let tilde_afs = DenseMatrix::from_sparse(&sys.a_fs)
        .sub(&DenseMatrix::from_sparse(&sys.a_fm).matmul(&minv_ams));
    let lu_f = DenseMatrix::from_sparse(&sys.a_f).lu()?;
    let finv_tilde = lu_f.solve_matrix(&tilde_afs)?;
    Ok(DenseMatrix::from_sparse(&sys.a_s)
        .sub(&DenseMatrix::from_sparse(&sys.a_sf).matmul(&finv_tilde)))
}

/// Mesh-movement Schur complement
/// S = A_m + A_ms A_s^-1 A_sf (A_f - A_fs A_s^-1 A_sf)^-1 A_fm.
pub fn build_mesh_schur_reference(sys: &FsiBlockSystem) -> Result<DenseMatrix> {
    sys.validate()?;
    check_dense_limit("build_mesh_schur_reference", sys.total_dim())?;
    let lu_s = DenseMatrix::from_sparse(&sys.a_s).lu()?;
    let sinv_asf = lu_s.solve_matrix(&DenseMatrix::from_sparse(&sys.a_sf))?;
    let tilde_af = DenseMatrix::from_sparse(&sys.a_f)
        .sub(&DenseMatrix::from_sparse(&sys.a_fs).matmul(&sinv_asf));
    let lu_tilde_af = tilde_af.lu()?;
    let tafinv_afm = lu_tilde_af.solve_matrix(&DenseMatrix::from_sparse(&sys.a_fm))?;
    let ams_sinv_asf = DenseMatrix::from_sparse(&sys.a_ms).matmul(&sinv_asf);
    Ok(DenseMatrix::from_sparse(&sys.a_m).add(&ams_sinv_asf.matmul(&tafinv_afm)))
}

/// K^-1 through the (m, f, s)-ordered factorization whose pivot is the
/// structure Schur complement. Validation oracle only.
pub fn structure_schur_solve(sys: &FsiBlockSystem, r: &[f64]) -> Result<Vec<f64>> {
    sys.validate()?;
    check_dense_limit("structure_schur_solve", sys.total_dim())?;
    let (n_m, n_s, _) = sys.dims();
    let (r_m, r_s, r_f) = (
        &r[0..n_m],
        &r[n_m..n_m + n_s],
        &r[n_m + n_s..],
    );
    let lu_m = DenseMatrix::from_sparse(&sys.a_m).lu()?;
    let lu_f = DenseMatrix::from_sparse(&sys.a_f).lu()?;
    let schur = build_structure_schur_reference(sys)?;
    let lu_schur = schur.lu()?;
    let minv_ams = lu_m.solve_matrix(&DenseMatrix::from_sparse(&sys.a_ms))?;
    let tilde_afs = DenseMatrix::from_sparse(&sys.a_fs)
        .sub(&DenseMatrix::from_sparse(&sys.a_fm).matmul(&minv_ams));

    // Forward elimination in field order (m, f, s).
    let y1 = r_m.to_vec();
    let minv_y1 = lu_m.solve(&y1)?;
    let mut y2 = r_f.to_vec();
    sys.a_fm.spmv_acc(-1.0, &minv_y1, &mut y2);
    let finv_y2 = lu_f.solve(&y2)?;
    let mut y3 = r_s.to_vec();
    sys.a_sf.spmv_acc(-1.0, &finv_y2, &mut y3);
    // Diagonal solves.
    let z1 = lu_m.solve(&y1)?;
    let z2 = lu_f.solve(&y2)?;
    let x_s = lu_schur.solve(&y3)?;
    // Backward substitution.
    let tilde_xs = lu_f.solve(&tilde_afs.matvec(&x_s))?;
    let x_f: Vec<f64> = z2.iter().zip(&tilde_xs).map(|(a, b)| a - b).collect();
    let ams_xs = lu_m.solve(&sys.a_ms.spmv(&x_s)?)?;
    let x_m: Vec<f64> = z1.iter().zip(&ams_xs).map(|(a, b)| a - b).collect();

    let mut x = Vec::with_capacity(r.len());
    x.extend_from_slice(&x_m);
    x.extend_from_slice(&x_s);
    x.extend_from_slice(&x_f);
    Ok(x)
}

/// K^-1 through the (s, f, m)-ordered factorization whose pivot is the
/// mesh-movement Schur complement. Validation oracle only.
pub fn mesh_schur_solve(sys: &FsiBlockSystem, r: &[f64]) -> Result<Vec<f64>> {
    sys.validate()?;
    check_dense_limit("mesh_schur_solve", sys.total_dim())?;
    let (n_m, n_s, _) = sys.dims();
    let (r_m, r_s, r_f) = (
        &r[0..n_m],
        &r[n_m..n_m + n_s],
        &r[n_m + n_s..],
    );
    let lu_s = DenseMatrix::from_sparse(&sys.a_s).lu()?;
    let sinv_asf = lu_s.solve_matrix(&DenseMatrix::from_sparse(&sys.a_sf))?;
    let tilde_af = DenseMatrix::from_sparse(&sys.a_f)
        .sub(&DenseMatrix::from_sparse(&sys.a_fs).matmul(&sinv_asf));
    let lu_tilde_af = tilde_af.lu()?;
    let a_mf = DenseMatrix::from_sparse(&sys.a_ms)
        .matmul(&sinv_asf)
        .scale(-1.0)
        .matmul(&lu_tilde_af.solve_matrix(&DenseMatrix::identity(tilde_af.nrows()))?);
    let schur = build_mesh_schur_reference(sys)?;
    let lu_schur = schur.lu()?;

    // Forward elimination in field order (s, f, m).
    let y1 = r_s.to_vec();
    let sinv_y1 = lu_s.solve(&y1)?;
    let mut y2 = r_f.to_vec();
    sys.a_fs.spmv_acc(-1.0, &sinv_y1, &mut y2);
    let mut y3 = r_m.to_vec();
    sys.a_ms.spmv_acc(-1.0, &sinv_y1, &mut y3);
    let amf_y2 = a_mf.matvec(&y2);
    for (t, v) in y3.iter_mut().zip(&amf_y2) {
        *t -= v;
    }
    // Diagonal solves.
    let z1 = lu_s.solve(&y1)?;
    let z2 = lu_tilde_af.solve(&y2)?;
    let x_m = lu_schur.solve(&y3)?;
    // Backward substitution.
    let tafinv_afm_xm = lu_tilde_af.solve(&sys.a_fm.spmv(&x_m)?)?;
    let x_f: Vec<f64> = z2.iter().zip(&tafinv_afm_xm).map(|(a, b)| a - b).collect();
    let sinv_asf_xf = lu_s.solve(&sys.a_sf.spmv(&x_f)?)?;
    let x_s: Vec<f64> = z1.iter().zip(&sinv_asf_xf).map(|(a, b)| a - b).collect();

    let mut x = Vec::with_capacity(r.len());
    x.extend_from_slice(&x_m);
    x.extend_from_slice(&x_s);
    x.extend_from_slice(&x_f);
    Ok(x)
}

/// Dense assembly of K_hat = L_hat D_hat U_hat with exact A_m, A_s and the
/// diagonal-substituted Schur approximation. Oracle for the application path.
pub fn assemble_dense_khat(sys: &FsiBlockSystem) -> Result<DenseMatrix> {
    sys.validate()?;
    check_dense_limit("assemble_dense_khat", sys.total_dim())?;
    let (n_m, n_s, n_f) = sys.dims();
    let n = n_m + n_s + n_f;
    let tilde = build_tilde_afs_hat(sys)?;
    let schur = build_schur_hat(sys, &tilde)?;

    let place = |dst: &mut DenseMatrix, src: &DenseMatrix, r0: usize, c0: usize| {
        for i in 0..src.nrows() {
            for j in 0..src.ncols() {
                dst[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    };
    // L_hat D_hat = [[A_m, 0, 0], [0, A_s, 0], [A_fm, tilde, S_hat]]
    let mut ld = DenseMatrix::zeros(n, n);
    place(&mut ld, &DenseMatrix::from_sparse(&sys.a_m), 0, 0);
    place(&mut ld, &DenseMatrix::from_sparse(&sys.a_s), n_m, n_m);
    place(&mut ld, &DenseMatrix::from_sparse(&sys.a_fm), n_m + n_s, 0);
    place(&mut ld, &DenseMatrix::from_sparse(&tilde), n_m + n_s, n_m);
    place(&mut ld, &DenseMatrix::from_sparse(&schur), n_m + n_s, n_m + n_s);
    // U_hat = [[I, A_m^-1 A_ms, 0], [0, I, A_s^-1 A_sf], [0, 0, I]]
    let lu_m = DenseMatrix::from_sparse(&sys.a_m).lu()?;
    let lu_s = DenseMatrix::from_sparse(&sys.a_s).lu()?;
    let minv_ams = lu_m.solve_matrix(&DenseMatrix::from_sparse(&sys.a_ms))?;
    let sinv_asf = lu_s.solve_matrix(&DenseMatrix::from_sparse(&sys.a_sf))?;
    let mut u = DenseMatrix::identity(n);
    place(&mut u, &minv_ams, 0, n_m);
    place(&mut u, &sinv_asf, n_m, n_m + n_s);
    Ok(ld.matmul(&u))
}
