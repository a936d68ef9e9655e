//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured figures (run with --nocapture to see them).

use std::time::Instant;

use fsi_core::baseline::{build_baseline, BaselineKind};
use fsi_core::dense::{dense_solve_robust, DenseMatrix};
use fsi_core::inner::{amg::amg_setup, ilu0::ilu0_factor, AmgConfig, InnerSolverSpec};
use fsi_core::krylov::{fgmres, gmres, KrylovConfig};
use fsi_core::ldu::{
    assemble_dense_khat, build_exact_ldu_reference, build_ldu_preconditioner, build_schur_hat,
    build_tilde_afs_hat,
};
use fsi_core::matrix_market::{read_from, write_to};
use fsi_core::problem::{
    density_values, generate_compact, generate_natural, reorder, FsiMesh2d, FsiParameters,
    GeneratorOptions, RhsMode,
};
use fsi_core::rng::SplitMix64;
use fsi_core::sparse::{norm2, SparseMatrix};
use fsi_core::system::{FsiBlockSystem, InterfaceMaps};

fn solver_cfg() -> KrylovConfig {
    KrylovConfig {
        tolerance: 1e-10,
        max_iterations: 250,
        restart: None,
    }
}

fn random_block(rng: &mut SplitMix64, nrows: usize, ncols: usize, fill: f64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..nrows {
        for j in 0..ncols {
            if rng.next_f64() < fill {
                t.push((i, j, rng.next_signed()));
            }
        }
    }
    SparseMatrix::from_triplets(nrows, ncols, &t)
}

fn random_small_system(rng: &mut SplitMix64) -> FsiBlockSystem {
    let n_m = 2 + rng.next_range(39);
    let n_s = 2 + rng.next_range(39);
    let n_f = 3 + rng.next_range(38);
    let gamma_f = 1 + rng.next_range(n_f - 1);
    let diag_dominant = |rng: &mut SplitMix64, n: usize| {
        let m = random_block(rng, n, n, 0.3);
        SparseMatrix::axpby(1.0, &m, 1.0, &SparseMatrix::from_diag(&vec![n as f64; n])).unwrap()
    };
    let mut a_sf_triplets = Vec::new();
    for i in 0..n_s {
        for j in 0..gamma_f {
            if rng.next_f64() < 0.3 {
                a_sf_triplets.push((i, j, rng.next_signed()));
            }
        }
    }
    FsiBlockSystem {
        a_m: diag_dominant(rng, n_m),
        a_ms: random_block(rng, n_m, n_s, 0.25),
        a_s: diag_dominant(rng, n_s),
        a_sf: SparseMatrix::from_triplets(n_s, n_f, &a_sf_triplets),
        a_fm: random_block(rng, n_f, n_m, 0.25),
        a_fs: random_block(rng, n_f, n_s, 0.25),
        a_f: diag_dominant(rng, n_f),
        b_m: rng.vector(n_m),
        b_s: rng.vector(n_s),
        b_f: rng.vector(n_f),
        interface_maps: InterfaceMaps {
            mesh_gamma: n_m..n_m,
            structure_gamma: n_s..n_s,
            fluid_velocity_gamma: 0..gamma_f,
        },
    }
}

#[test]
fn criterion_1_exact_ldu_oracle() {
    let start = Instant::now();
    let params = FsiParameters::default();
    let opts = GeneratorOptions::default();
    let mut sizes = Vec::new();
    for level in 0..3 {
        let sys = generate_compact(level, &params, &opts).unwrap();
        assert!(
            sys.total_dim() <= 5000,
            "dense-oracle variant requires <= 5000 unknowns"
        );
        let op = build_exact_ldu_reference(&sys).unwrap();
        let k = sys.assemble_monolithic().unwrap();
        let (_, rep) = gmres(&k, &op, &sys.rhs(), None, &solver_cfg()).unwrap();
        assert_eq!(rep.iterations, 1, "level {level}: expected exactly 1 iteration");
        assert!(rep.converged);
        assert!(rep.final_relative_residual <= 1e-10);
        sizes.push(sys.total_dim());
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "runtime {elapsed:.1}s exceeds 30s");
    println!(
        "acceptance criterion 1 (exact-LDU oracle): PASS - 1 iteration at sizes {sizes:?}, {elapsed:.1}s"
    );
}

#[test]
fn criterion_2_dense_khat_equivalence() {
    let start = Instant::now();
    let sys = generate_compact(0, &FsiParameters::default(), &GeneratorOptions::default()).unwrap();
    let exact = InnerSolverSpec::ExactLu;
    let p = build_ldu_preconditioner(&sys, &exact, &exact, &exact).unwrap();
    let khat = assemble_dense_khat(&sys).unwrap();
    let lu = khat.lu().unwrap();
    let mut rng = SplitMix64::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = rng.vector(sys.total_dim());
        let ours = p.apply(&r);
        let reference = lu.solve(&r).unwrap();
        let scale = norm2(&reference);
        let diff: Vec<f64> = ours.iter().zip(&reference).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / scale);
    }
    assert!(worst <= 1e-10, "worst relative difference {worst:.2e}");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.1}s exceeds 10s");
    println!(
        "acceptance criterion 2 (dense K-hat equivalence): PASS - worst rel diff {worst:.2e} over 20 rhs, {elapsed:.1}s"
    );
}

#[test]
fn criterion_3_schur_construction() {
    // Explicit construction against the dense formula on 50 random systems.
    let mut rng = SplitMix64::new(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let sys = random_small_system(&mut rng);
        let tilde = build_tilde_afs_hat(&sys).unwrap();
        let schur = build_schur_hat(&sys, &tilde).unwrap();
        let dm_inv = DenseMatrix::from_diag(&sys.a_m.diag_inverse().unwrap());
        let ds_inv = DenseMatrix::from_diag(&sys.a_s.diag_inverse().unwrap());
        let tilde_ref = DenseMatrix::from_sparse(&sys.a_fs).sub(
            &DenseMatrix::from_sparse(&sys.a_fm)
                .matmul(&dm_inv)
                .matmul(&DenseMatrix::from_sparse(&sys.a_ms)),
        );
        let schur_ref = DenseMatrix::from_sparse(&sys.a_f).sub(
            &tilde_ref
                .matmul(&ds_inv)
                .matmul(&DenseMatrix::from_sparse(&sys.a_sf)),
        );
        let d1 = DenseMatrix::from_sparse(&tilde).sub(&tilde_ref).frobenius_norm()
            / tilde_ref.frobenius_norm().max(1.0);
        let d2 = DenseMatrix::from_sparse(&schur).sub(&schur_ref).frobenius_norm()
            / schur_ref.frobenius_norm().max(1.0);
        worst = worst.max(d1).max(d2);
    }
    assert!(worst <= 1e-13, "worst relative error {worst:.2e}");

    // Pattern confinement on every generated system of the default sweeps.
    let base = FsiParameters::default();
    for level in 0..3 {
        for &rho in &density_values(base.rho_f) {
            let sys =
                generate_compact(level, &base.with_rho_f(rho), &GeneratorOptions::default()).unwrap();
            let tilde = build_tilde_afs_hat(&sys).unwrap();
            let schur = build_schur_hat(&sys, &tilde).unwrap();
            let perturbation = SparseMatrix::axpby(1.0, &schur, -1.0, &sys.a_f).unwrap();
            let gamma = &sys.interface_maps.fluid_velocity_gamma;
            for col in perturbation.nonzero_columns() {
                assert!(
                    gamma.contains(&col),
                    "level {level} rho {rho}: perturbation column {col} outside gamma"
                );
            }
        }
    }
    println!(
        "acceptance criterion 3 (Schur construction): PASS - 50 random systems within {worst:.2e}, confinement on 15 generated systems"
    );
}

#[test]
fn criterion_4_density_robustness() {
    let start = Instant::now();
    let base = FsiParameters::default(); // dt = 0.125 ms analog
    let amg = InnerSolverSpec::amg_default();
    let mut table = Vec::new();
    for level in 0..3 {
        let mut counts = Vec::new();
        for &rho in &density_values(base.rho_f) {
            let sys =
                generate_compact(level, &base.with_rho_f(rho), &GeneratorOptions::default()).unwrap();
            let p = build_ldu_preconditioner(&sys, &amg, &amg, &amg).unwrap();
            let k = sys.assemble_monolithic().unwrap();
            let (_, rep) = gmres(&k, &p, &sys.rhs(), None, &solver_cfg()).unwrap();
            assert!(rep.converged, "level {level} rho {rho} did not converge");
            assert!(
                rep.iterations <= 40,
                "level {level} rho {rho}: {} iterations exceeds 40",
                rep.iterations
            );
            counts.push(rep.iterations);
        }
        let max = *counts.iter().max().unwrap() as f64;
        let min = *counts.iter().min().unwrap() as f64;
        assert!(
            max / min <= 2.0,
            "level {level}: max/min = {max}/{min} exceeds 2"
        );
        table.push(counts);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.1}s exceeds 5 minutes");
    println!(
        "acceptance criterion 4 (density robustness): PASS - iterations {table:?}, {elapsed:.1}s"
    );
}

#[test]
fn criterion_5_baseline_degradation() {
    // Table-1 analog: the block-diagonal baseline loses robustness as the
    // density drops. A smaller time step keeps the five counts finite and
    // strictly separated on the 2D model.
    let base = FsiParameters {
        dt: 1.25e-5,
        ..Default::default()
    };
    let amg = InnerSolverSpec::amg_default();
    let cfg = KrylovConfig {
        tolerance: 1e-10,
        max_iterations: 400,
        restart: None,
    };
    let mut pd_counts = Vec::new();
    let mut ldu_counts = Vec::new();
    for &rho in &density_values(base.rho_f) {
        let sys = generate_compact(0, &base.with_rho_f(rho), &GeneratorOptions::default()).unwrap();
        let k = sys.assemble_monolithic().unwrap();
        let pd = build_baseline(&sys, BaselineKind::Diagonal, &amg, &amg, &amg).unwrap();
        let (_, rep) = gmres(&k, &pd, &sys.rhs(), None, &cfg).unwrap();
        pd_counts.push(rep.iterations);
        let ldu = build_ldu_preconditioner(&sys, &amg, &amg, &amg).unwrap();
        let (_, rep) = gmres(&k, &ldu, &sys.rhs(), None, &cfg).unwrap();
        assert!(rep.converged);
        ldu_counts.push(rep.iterations);
    }
    let mut ties = 0;
    for w in pd_counts.windows(2) {
        assert!(
            w[1] >= w[0],
            "P_D counts decreased: {pd_counts:?} (density decreasing)"
        );
        if w[1] == w[0] {
            ties += 1;
        }
    }
    assert!(ties <= 1, "P_D counts have {ties} ties: {pd_counts:?}");
    for (pd, ldu) in pd_counts.iter().zip(&ldu_counts) {
        assert!(
            *pd as f64 >= 2.0 * *ldu as f64,
            "P_D {pd} not at least twice LDU {ldu}"
        );
    }
    println!(
        "acceptance criterion 5 (baseline degradation): PASS - P_D {pd_counts:?} vs LDU {ldu_counts:?}"
    );
}

#[test]
fn criterion_6_mesh_robustness() {
    let base = FsiParameters::default(); // dt = 0.125 ms analog, rho_f = 1.1
    let amg = InnerSolverSpec::amg_default();
    let mut counts = Vec::new();
    for level in 0..3 {
        let sys = generate_compact(level, &base, &GeneratorOptions::default()).unwrap();
        let p = build_ldu_preconditioner(&sys, &amg, &amg, &amg).unwrap();
        let k = sys.assemble_monolithic().unwrap();
        let (_, rep) = gmres(&k, &p, &sys.rhs(), None, &solver_cfg()).unwrap();
        assert!(rep.converged);
        counts.push(rep.iterations);
    }
    for w in counts.windows(2) {
        assert!(
            (w[1] as f64) <= 2.0 * (w[0] as f64),
            "refinement growth exceeds 2: {counts:?}"
        );
    }
    println!("acceptance criterion 6 (mesh robustness): PASS - iterations per level {counts:?}");
}

#[test]
fn criterion_7_reordering_equivalence() {
    let mesh = FsiMesh2d::new(0);
    let params = FsiParameters::default();
    let opts = GeneratorOptions {
        rhs: RhsMode::Manufactured,
        oseen_wind: false,
    };
    let natural = generate_natural(&mesh, &params, &opts).unwrap();
    let reordered = reorder(&natural).unwrap();

    // RHS identities of the reordering.
    let mut back = reordered.rt_m_i.clone();
    natural.a_m_ig.spmv_acc(1.0, &natural.r_m_g, &mut back);
    for (u, v) in back.iter().zip(&natural.r_m_i) {
        assert_eq!(u, v, "mesh rhs identity violated");
    }
    let mut back_s = reordered.rt_s_i.clone();
    natural.a_s_ig.spmv_acc(natural.dt, &natural.r_s_g, &mut back_s);
    for (u, v) in back_s.iter().zip(&natural.r_s_i) {
        assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0), "structure rhs identity violated");
    }

    let x_nat = dense_solve_robust(&natural.assemble_full().unwrap(), &natural.rhs_full()).unwrap();
    let x_re = dense_solve_robust(&reordered.assemble_full().unwrap(), &reordered.rhs_full()).unwrap();
    let perm = reordered.natural_permutation();
    let scale = norm2(&x_nat);
    let mut worst: f64 = 0.0;
    for (k, &p) in perm.iter().enumerate() {
        worst = worst.max((x_re[k] - x_nat[p]).abs() / scale);
    }
    assert!(worst <= 1e-10, "worst permuted disagreement {worst:.2e}");
    println!(
        "acceptance criterion 7 (reordering equivalence): PASS - permuted solutions agree to {worst:.2e}"
    );
}

#[test]
fn criterion_8_kernel_suites() {
    let mut rng = SplitMix64::new(99);

    // SpGEMM / spmv / axpby against the dense oracle.
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a = random_block(&mut rng, 25, 20, 0.3);
        let b = random_block(&mut rng, 20, 22, 0.3);
        let c = a.spgemm(&b).unwrap();
        let c_ref = DenseMatrix::from_sparse(&a).matmul(&DenseMatrix::from_sparse(&b));
        worst = worst.max(
            DenseMatrix::from_sparse(&c).sub(&c_ref).frobenius_norm()
                / c_ref.frobenius_norm().max(1.0),
        );
        let x = rng.vector(22);
        let y = b.spmv(&x).unwrap();
        let y_ref = DenseMatrix::from_sparse(&b).matvec(&x);
        let diff: Vec<f64> = y.iter().zip(&y_ref).map(|(u, v)| u - v).collect();
        worst = worst.max(norm2(&diff) / norm2(&y_ref).max(1.0));
        let other = random_block(&mut rng, 25, 20, 0.3);
        let s = SparseMatrix::axpby(0.7, &a, -1.3, &other).unwrap();
        let s_ref = DenseMatrix::from_sparse(&a)
            .scale(0.7)
            .add(&DenseMatrix::from_sparse(&other).scale(-1.3));
        worst = worst.max(
            DenseMatrix::from_sparse(&s).sub(&s_ref).frobenius_norm()
                / s_ref.frobenius_norm().max(1.0),
        );
    }
    assert!(worst <= 1e-12, "kernel oracle error {worst:.2e}");

    // Matrix Market round trip is bit exact.
    let a = random_block(&mut rng, 30, 17, 0.25);
    let mut buf = Vec::new();
    write_to(&a, &mut buf).unwrap();
    let b = read_from(std::io::Cursor::new(&buf)).unwrap();
    assert_eq!(a.col_indices(), b.col_indices());
    for (x, y) in a.values().iter().zip(b.values()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }

    // ILU(0) pattern preservation on a 2D Laplacian.
    let lap = laplacian_2d(16);
    let f = ilu0_factor(&lap).unwrap();
    assert_eq!(f.factors().row_offsets(), lap.row_offsets());
    assert_eq!(f.factors().col_indices(), lap.col_indices());

    // AMG Galerkin identity and V-cycle linearity.
    let lap = laplacian_2d(24);
    let h = amg_setup(&lap, &AmgConfig::default()).unwrap();
    assert!(h.depth() >= 2);
    for l in 0..h.depth() - 1 {
        let p = h.prolongation(l).unwrap();
        let recomputed = p
            .transpose()
            .spgemm(&h.level_matrix(l).spgemm(p).unwrap())
            .unwrap();
        let diff = SparseMatrix::axpby(1.0, &recomputed, -1.0, h.level_matrix(l + 1))
            .unwrap()
            .frobenius_norm();
        assert!(diff <= 1e-12 * h.level_matrix(l + 1).frobenius_norm());
    }
    let u = rng.vector(lap.nrows());
    let v = rng.vector(lap.nrows());
    let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| 1.7 * x - 0.3 * y).collect();
    let lhs = h.vcycle(&combo);
    let hu = h.vcycle(&u);
    let hv = h.vcycle(&v);
    let scale = norm2(&lhs).max(1.0);
    for i in 0..lhs.len() {
        assert!((lhs[i] - (1.7 * hu[i] - 0.3 * hv[i])).abs() <= 1e-12 * scale);
    }

    // V-cycle contraction factor on the 64x64 five-point Laplacian.
    let lap = laplacian_2d(64);
    let h = amg_setup(&lap, &AmgConfig::default()).unwrap();
    let b = rng.vector(lap.nrows());
    let mut x = vec![0.0; lap.nrows()];
    let mut norms = Vec::new();
    for _ in 0..10 {
        let ax = lap.spmv(&x).unwrap();
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        norms.push(norm2(&r));
        let dx = h.vcycle(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let factor = (norms[9] / norms[1]).powf(1.0 / 8.0);
    assert!(factor <= 0.5, "contraction factor {factor:.3}");

    println!(
        "acceptance criterion 8 (kernel suites): PASS - oracle {worst:.1e}, round-trip exact, ILU(0) pattern, Galerkin, linearity, contraction {factor:.2}"
    );
}

#[test]
fn criterion_9_fgmres_gmres_consistency() {
    // Identical iterates with a fixed linear preconditioner.
    let sys = generate_compact(0, &FsiParameters::default(), &GeneratorOptions::default()).unwrap();
    let k = sys.assemble_monolithic().unwrap();
    let amg = InnerSolverSpec::amg_default();
    let p = build_ldu_preconditioner(&sys, &amg, &amg, &amg).unwrap();
    assert!(p.is_linear());
    let (xg, rg) = gmres(&k, &p, &sys.rhs(), None, &solver_cfg()).unwrap();
    let (xf, rf) = fgmres(&k, &p, &sys.rhs(), None, &solver_cfg()).unwrap();
    assert_eq!(rg.iterations, rf.iterations);
    assert_eq!(rg.residual_history, rf.residual_history);
    let scale = norm2(&xg).max(1.0);
    let mut worst: f64 = 0.0;
    for (u, v) in xg.iter().zip(&xf) {
        worst = worst.max((u - v).abs() / scale);
    }
    assert!(worst <= 1e-12, "iterate disagreement {worst:.2e}");

    // Flexible outer solver with an inner Krylov approximation of the
    // Schur inverse converges on the level-0 system.
    let p_inner = build_ldu_preconditioner(
        &sys,
        &amg,
        &amg,
        &InnerSolverSpec::inner_gmres_default(),
    )
    .unwrap();
    assert!(!p_inner.is_linear());
    let cfg = KrylovConfig {
        tolerance: 1e-10,
        max_iterations: 60,
        restart: None,
    };
    let (_, rep) = fgmres(&k, &p_inner, &sys.rhs(), None, &cfg).unwrap();
    assert!(rep.converged, "inner-GMRES variant did not converge in 60 iterations");
    println!(
        "acceptance criterion 9 (FGMRES/GMRES consistency): PASS - identical iterates to {worst:.1e}, inner-GMRES converges in {} iterations",
        rep.iterations
    );
}

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
