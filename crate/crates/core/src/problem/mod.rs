//! Desk-scale 2D model-problem generator.
//!
//! Produces the natural seven-field system, its reordered form, and the
//! compact 3x3 block system, with parameter sweeps over fluid density,
//! mesh level and time step. Units are CGS; time steps are seconds
//! internally (the command-line layer accepts milliseconds).

pub mod mesh;
pub mod natural;
pub mod reorder;

pub use mesh::{DofClass, FsiMesh2d};
pub use natural::{generate_natural, FsiParameters, GeneratorOptions, NaturalDims, NaturalSystem, RhsMode};
pub use reorder::{reorder, ReorderedSystem};

use crate::error::Result;
use crate::system::FsiBlockSystem;

/// Generate, reorder and group in one step.
pub fn generate_compact(
    level: usize,
    params: &FsiParameters,
    opts: &GeneratorOptions,
) -> Result<FsiBlockSystem> {
    let mesh = FsiMesh2d::new(level);
    let natural = generate_natural(&mesh, params, opts)?;
    reorder(&natural)?.to_compact()
}

/// Snaps a computed sweep value to the double nearest its short decimal
/// form, so 1.1 * 10^-1 reads back as 0.11 rather than 0.11000000000000001.
fn snap_decimal(x: f64) -> f64 {
    format!("{x:.9e}").parse().unwrap_or(x)
}

/// The five fluid densities of the robustness sweep, ratios of ten.
pub fn density_values(base_rho_f: f64) -> Vec<f64> {
    (0..5)
        .map(|i| snap_decimal(base_rho_f * 10f64.powi(-i)))
        .collect()
}

/// Time steps of the sweep, in milliseconds.
pub fn dt_values_ms() -> Vec<f64> {
    (0..4)
        .map(|i| snap_decimal(1.25 * 10f64.powi(-i)))
        .collect()
}

/// The three refinement levels (coarse, intermediate, fine).
pub fn mesh_levels() -> Vec<usize> {
    vec![0, 1, 2]
}

/// One generated member of a parameter sweep.
pub struct SweepSystem {
    pub level: usize,
    pub rho_f: f64,
    /// Seconds.
    pub dt: f64,
    pub system: FsiBlockSystem,
}

/// Cross product of the requested axes; deterministic generation order
/// (level-major, then density, then time step).
pub fn generate_sweep(
    levels: &[usize],
    densities: &[f64],
    dts_seconds: &[f64],
    base: &FsiParameters,
    opts: &GeneratorOptions,
) -> Result<Vec<SweepSystem>> {
    let mut out = Vec::new();
    for &level in levels {
        for &rho_f in densities {
            for &dt in dts_seconds {
                let params = FsiParameters {
                    rho_f,
                    dt,
                    ..base.clone()
                };
                out.push(SweepSystem {
                    level,
                    rho_f,
                    dt,
                    system: generate_compact(level, &params, opts)?,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{dense_lu_solve, dense_solve_robust, DenseMatrix};
    use crate::rng::SplitMix64;
    use crate::sparse::{norm2, SparseMatrix};

    fn level0_natural(rhs: RhsMode) -> (FsiMesh2d, NaturalSystem) {
        let mesh = FsiMesh2d::new(0);
        let params = FsiParameters::default();
        let opts = GeneratorOptions { rhs, oseen_wind: false };
        let sys = generate_natural(&mesh, &params, &opts).unwrap();
        (mesh, sys)
    }

    #[test]
    fn level0_system_is_nonsingular() {
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        let k = sys.assemble_full().unwrap();
        let b = sys.rhs_full();
        assert!(norm2(&b) > 0.0, "inflow residual must be nonzero");
        let x = dense_lu_solve(&k, &b).unwrap();
        let kx = k.spmv(&x).unwrap();
        let r: Vec<f64> = kx.iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(norm2(&r) / norm2(&b) <= 1e-10);
    }

    #[test]
    fn rho_f_scales_fluid_blocks_linearly() {
        let mesh = FsiMesh2d::new(0);
        let opts = GeneratorOptions::default();
        let p1 = FsiParameters::default();
        let p10 = p1.with_rho_f(p1.rho_f * 10.0);
        let s1 = generate_natural(&mesh, &p1, &opts).unwrap();
        let s10 = generate_natural(&mesh, &p10, &opts).unwrap();
        // The whole momentum operator is proportional to rho_f (mass and
        // viscous parts alike), as are the divergence row and the shape
        // derivative; the pressure gradient and stabilization are not.
        for (b10, b1, name) in [
            (&s10.a_f_ii, &s1.a_f_ii, "a_f_ii"),
            (&s10.a_f_gg, &s1.a_f_gg, "a_f_gg"),
            (&s10.b_1f_i, &s1.b_1f_i, "b_1f_i"),
            (&s10.a_fm_ii, &s1.a_fm_ii, "a_fm_ii"),
        ] {
            let scaled = b1.scaled(10.0);
            let diff = SparseMatrix::axpby(1.0, b10, -1.0, &scaled).unwrap().frobenius_norm();
            assert!(
                diff <= 1e-12 * scaled.frobenius_norm(),
                "{name} does not scale linearly in rho_f"
            );
        }
        for (b10, b1, name) in [
            (&s10.b_2f_i, &s1.b_2f_i, "b_2f_i"),
            (&s10.c_f, &s1.c_f, "c_f"),
            (&s10.a_s_ii, &s1.a_s_ii, "a_s_ii"),
        ] {
            let diff = SparseMatrix::axpby(1.0, b10, -1.0, b1).unwrap().frobenius_norm();
            assert!(diff <= 1e-13 * b1.frobenius_norm(), "{name} must not depend on rho_f");
        }
    }

    #[test]
    fn interface_identity_rows_have_one_plus_one_minus() {
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        let k = sys.assemble_full().unwrap();
        let d = sys.dims;
        let row0 = d.n_mi;
        for r in row0..row0 + d.n_mg {
            let (cols, vals) = k.row(r);
            assert_eq!(cols.len(), 2, "row {r} should have exactly two entries");
            assert_eq!(vals[0], 1.0);
            assert_eq!(vals[1], -1.0);
        }
    }

    #[test]
    fn mesh_block_is_m_matrix_patterned() {
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        for i in 0..sys.a_m_ii.nrows() {
            let (cols, vals) = sys.a_m_ii.row(i);
            let mut row_sum = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c != i {
                    assert!(v <= 1e-12, "positive off-diagonal in mesh Laplacian");
                }
                row_sum += v;
            }
            // Interface and Dirichlet columns are trimmed, so interior row
            // sums are nonnegative.
            assert!(row_sum >= -1e-12);
        }
    }

    #[test]
    fn viscous_momentum_block_is_symmetric() {
        // Without convection the velocity-velocity coupling is mass plus
        // viscous stiffness, both symmetric across the i/g split.
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        let d = sys.dims;
        let grid: Vec<Vec<Option<&SparseMatrix>>> = vec![
            vec![Some(&sys.a_f_ii), Some(&sys.a_f_ig)],
            vec![Some(&sys.a_f_gi), Some(&sys.a_f_gg)],
        ];
        let f = crate::block::assemble_block_grid(&grid, &[d.n_ui, d.n_ug], &[d.n_ui, d.n_ug]).unwrap();
        let diff = SparseMatrix::axpby(1.0, &f, -1.0, &f.transpose()).unwrap().frobenius_norm();
        assert!(diff <= 1e-14 * f.frobenius_norm());
    }

    #[test]
    fn structure_elasticity_is_spd_on_constrained_space() {
        // A huge time step makes the Newmark mass negligible, leaving the
        // elasticity operator; inverse power iteration then certifies the
        // smallest eigenvalue is positive.
        let mesh = FsiMesh2d::new(0);
        let params = FsiParameters {
            dt: 1.0e3,
            ..Default::default()
        };
        let sys = generate_natural(&mesh, &params, &GeneratorOptions::default()).unwrap();
        let a = &sys.a_s_ii;
        let sym_diff = SparseMatrix::axpby(1.0, a, -1.0, &a.transpose()).unwrap().frobenius_norm();
        assert!(sym_diff <= 1e-12 * a.frobenius_norm());
        let lu = DenseMatrix::from_sparse(a).lu().unwrap();
        let mut rng = SplitMix64::new(3);
        let mut v = rng.vector(a.nrows());
        let mut lambda_min = 0.0;
        for _ in 0..60 {
            let w = lu.solve(&v).unwrap();
            let nw = norm2(&w);
            lambda_min = norm2(&v) / nw;
            v = w.iter().map(|x| x / nw).collect();
        }
        assert!(lambda_min > 0.0);
        // Rayleigh quotient agrees in sign.
        let av = a.spmv(&v).unwrap();
        let rq = crate::sparse::dot(&v, &av);
        assert!(rq > 0.0, "smallest-mode Rayleigh quotient {rq} not positive");
    }

    #[test]
    fn gamma_cardinalities_agree() {
        for level in 0..2 {
            let mesh = FsiMesh2d::new(level);
            let sys = generate_natural(&mesh, &FsiParameters::default(), &GeneratorOptions::default()).unwrap();
            let d = sys.dims;
            assert_eq!(d.n_mg, d.n_ug);
            assert_eq!(d.n_ug, d.n_sg);
            assert_eq!(d.n_mg, 2 * (mesh.nx - 1));
        }
    }

    #[test]
    fn dt_scaling_is_consistent() {
        let mesh = FsiMesh2d::new(0);
        let base = FsiParameters::default();
        let opts = GeneratorOptions::default();
        let dts = [base.dt, 2.0 * base.dt, 4.0 * base.dt];
        let systems: Vec<NaturalSystem> = dts
            .iter()
            .map(|&dt| generate_natural(&mesh, &base.with_dt(dt), &opts).unwrap())
            .collect();
        // The structure block is elasticity + rho_s/(beta dt^2) M: recover M
        // from two assemblies and check it predicts the third.
        let c = |dt: f64| base.rho_s / (base.newmark_beta * dt * dt);
        let m01 = SparseMatrix::axpby(
            1.0 / (c(dts[0]) - c(dts[1])),
            &systems[0].a_s_ii,
            -1.0 / (c(dts[0]) - c(dts[1])),
            &systems[1].a_s_ii,
        )
        .unwrap();
        let m02 = SparseMatrix::axpby(
            1.0 / (c(dts[0]) - c(dts[2])),
            &systems[0].a_s_ii,
            -1.0 / (c(dts[0]) - c(dts[2])),
            &systems[2].a_s_ii,
        )
        .unwrap();
        let diff = SparseMatrix::axpby(1.0, &m01, -1.0, &m02).unwrap().frobenius_norm();
        assert!(diff <= 1e-10 * m01.frobenius_norm());

        // Kinematic rows scale as 1/dt: doubling dt halves the diagonal.
        let k0 = systems[0].assemble_full().unwrap();
        let k1 = systems[1].assemble_full().unwrap();
        let d = systems[0].dims;
        let kin_row = d.n_mi + d.n_mg + d.n_p + d.n_ui + d.n_ug;
        let sg_col = kin_row;
        assert!((k0.get(kin_row, sg_col) - 2.0 * k1.get(kin_row, sg_col)).abs() <= 1e-12 * k0.get(kin_row, sg_col).abs());
    }

    #[test]
    fn reorder_rhs_identities_hold() {
        let (_, sys) = level0_natural(RhsMode::Manufactured);
        assert!(norm2(&sys.r_m_g) > 0.0, "manufactured rhs must load the interface rows");
        let re = reorder(&sys).unwrap();
        // rt_m^i + A_m^{ig} r_m^g = r_m^i exactly.
        let mut back = re.rt_m_i.clone();
        sys.a_m_ig.spmv_acc(1.0, &sys.r_m_g, &mut back);
        for (u, v) in back.iter().zip(&sys.r_m_i) {
            assert_eq!(u, v);
        }
        let mut back_s = re.rt_s_i.clone();
        sys.a_s_ig.spmv_acc(sys.dt, &sys.r_s_g, &mut back_s);
        for (u, v) in back_s.iter().zip(&sys.r_s_i) {
            assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn zero_interface_rhs_passes_through() {
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        assert!(sys.r_m_g.iter().all(|&v| v == 0.0));
        assert!(sys.r_s_g.iter().all(|&v| v == 0.0));
        let re = reorder(&sys).unwrap();
        assert_eq!(re.rt_m_i, sys.r_m_i);
        assert_eq!(re.rt_s_i, sys.r_s_i);
    }

    #[test]
    fn natural_and_reordered_solutions_agree_under_permutation() {
        // The raw CGS systems carry row magnitudes from 1 to ~1e7, so the
        // dense oracle equilibrates before factoring.
        let (_, sys) = level0_natural(RhsMode::Manufactured);
        let k_nat = sys.assemble_full().unwrap();
        let x_nat = dense_solve_robust(&k_nat, &sys.rhs_full()).unwrap();
        let re = reorder(&sys).unwrap();
        let k_re = re.assemble_full().unwrap();
        let x_re = dense_solve_robust(&k_re, &re.rhs_full()).unwrap();
        let perm = re.natural_permutation();
        let scale = norm2(&x_nat);
        for (k, &p) in perm.iter().enumerate() {
            assert!(
                (x_re[k] - x_nat[p]).abs() <= 1e-10 * scale,
                "mismatch at reordered index {k}"
            );
        }
    }

    #[test]
    fn compact_grouping_preserves_the_operator() {
        let (_, sys) = level0_natural(RhsMode::Manufactured);
        let re = reorder(&sys).unwrap();
        let compact = re.to_compact().unwrap();
        let mut rng = SplitMix64::new(31);
        let x = rng.vector(compact.total_dim());
        let via_blocks = compact.apply(&x).unwrap();
        let via_seven = re.assemble_full().unwrap().spmv(&x).unwrap();
        let scale = norm2(&via_seven).max(1.0);
        for (u, v) in via_blocks.iter().zip(&via_seven) {
            assert!((u - v).abs() <= 1e-14 * scale);
        }
        assert_eq!(compact.rhs(), re.rhs_full());
    }

    #[test]
    fn compact_structural_zeros_hold() {
        let (_, sys) = level0_natural(RhsMode::InflowResidual);
        let compact = reorder(&sys).unwrap().to_compact().unwrap();
        let (n_m, n_s, _) = compact.dims();
        let k = compact.assemble_monolithic().unwrap();
        // (s, m) block region must be structurally empty.
        for r in n_m..n_m + n_s {
            let (cols, _) = k.row(r);
            for &c in cols {
                assert!(c >= n_m, "entry in the structurally zero (s,m) block at ({r},{c})");
            }
        }
        // (m, f) block region must be structurally empty.
        for r in 0..n_m {
            let (cols, _) = k.row(r);
            for &c in cols {
                assert!(c < n_m + n_s, "entry in the structurally zero (m,f) block at ({r},{c})");
            }
        }
    }

    #[test]
    fn compact_dims_bookkeeping() {
        let mesh = FsiMesh2d::new(0);
        let sys = generate_natural(&mesh, &FsiParameters::default(), &GeneratorOptions::default()).unwrap();
        let compact = reorder(&sys).unwrap().to_compact().unwrap();
        let d = sys.dims;
        let (n_m, n_s, n_f) = compact.dims();
        assert_eq!(n_m, d.n_mi + d.n_mg);
        assert_eq!(n_s, d.n_si + d.n_sg);
        assert_eq!(n_f, d.n_ug + d.n_ui + d.n_p);
        assert_eq!(n_m + n_s + n_f, d.total());
        assert_eq!(compact.interface_maps.fluid_velocity_gamma, 0..d.n_ug);
    }

    #[test]
    fn sweep_axes_match_the_experiment_design() {
        let densities = density_values(1.1);
        assert_eq!(densities.len(), 5);
        for w in densities.windows(2) {
            assert!((w[0] / w[1] - 10.0).abs() <= 1e-12);
        }
        let dts = dt_values_ms();
        assert_eq!(dts.len(), 4);
        assert!((dts[0] - 1.25).abs() <= 1e-15);
        assert!((dts[3] - 0.00125).abs() <= 1e-15);
        for w in dts.windows(2) {
            assert!((w[0] / w[1] - 10.0).abs() <= 1e-12);
        }
        assert_eq!(mesh_levels(), vec![0, 1, 2]);
    }

    #[test]
    fn sweep_generates_cross_product() {
        let base = FsiParameters::default();
        let systems = generate_sweep(
            &[0],
            &[1.1, 0.11],
            &[1.25e-4],
            &base,
            &GeneratorOptions::default(),
        )
        .unwrap();
        assert_eq!(systems.len(), 2);
        assert!(systems[0].system.total_dim() > 0);
    }
}
