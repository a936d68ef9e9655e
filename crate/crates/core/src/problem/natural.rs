//! Assembly of the coupled system in its natural seven-field layout.
//!
//! Unknown order: (d_m^i, d_m^g, p, u_f^i, u_f^g, d_s^g, d_s^i). The mesh
//! motion is a componentwise Laplacian, the fluid is a backward-Euler
//! stabilized P1-P1 Stokes operator with shape-derivative couplings into
//! the mesh unknowns, and the structure is linear elasticity plus a
//! Newmark mass term. Interface rows carry the displacement identity, the
//! traction balance (fluid momentum plus structure stiffness on gamma
//! rows) and the kinematic condition.

use crate::block::assemble_block_grid;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::sparse::SparseMatrix;

use super::mesh::{triangle_geometry, DofClass, FsiMesh2d, FLUID_HEIGHT, LENGTH, STRUCTURE_HEIGHT};

/// Physical and discretization parameters, CGS units; `dt` in seconds.
#[derive(Debug, Clone)]
pub struct FsiParameters {
    pub rho_f: f64,
    pub rho_s: f64,
    pub nu: f64,
    pub lambda_s: f64,
    pub mu_s: f64,
    pub dt: f64,
    pub u_in: f64,
    pub stab_delta: f64,
    pub newmark_beta: f64,
}

impl Default for FsiParameters {
    fn default() -> Self {
        Self {
            rho_f: 1.1,
            rho_s: 1.0,
            nu: 0.1568,
            lambda_s: 1.73e6,
            mu_s: 1.15e6,
            dt: 1.25e-4,
            u_in: 30.0,
            stab_delta: 0.05,
            newmark_beta: 0.25,
        }
    }
}

impl FsiParameters {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("nu", self.nu),
            ("lambda_s", self.lambda_s),
            ("mu_s", self.mu_s),
            ("dt", self.dt),
            ("u_in", self.u_in),
            ("stab_delta", self.stab_delta),
            ("newmark_beta", self.newmark_beta),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_rho_f(&self, rho_f: f64) -> Self {
        Self { rho_f, ..self.clone() }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }
}

/// Right-hand-side construction.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsMode {
    /// Residual of the rest state driven by the inflow boundary data.
    InflowResidual,
    /// r = K x* for a smooth manufactured field x* (nonzero on gamma rows).
    Manufactured,
    /// Seeded uniform random right-hand side.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    pub rhs: RhsMode,
    /// Adds a frozen-wind convection term to the fluid momentum operator.
    pub oseen_wind: bool,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            rhs: RhsMode::InflowResidual,
            oseen_wind: false,
        }
    }
}

/// Sizes of the seven natural fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaturalDims {
    pub n_mi: usize,
    pub n_mg: usize,
    pub n_p: usize,
    pub n_ui: usize,
    pub n_ug: usize,
    pub n_sg: usize,
    pub n_si: usize,
}

impl NaturalDims {
    pub fn as_array(&self) -> [usize; 7] {
        [
            self.n_mi, self.n_mg, self.n_p, self.n_ui, self.n_ug, self.n_sg, self.n_si,
        ]
    }

    pub fn total(&self) -> usize {
        self.as_array().iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct NaturalSystem {
    pub dims: NaturalDims,
    pub dt: f64,
    // Mesh-interior row.
    pub a_m_ii: SparseMatrix,
    pub a_m_ig: SparseMatrix,
    // Pressure (mass) row.
    pub b_fm_i: SparseMatrix,
    pub b_fm_g: SparseMatrix,
    /// Stored positive definite; enters the system as -C_f.
    pub c_f: SparseMatrix,
    pub b_1f_i: SparseMatrix,
    pub b_1f_g: SparseMatrix,
    // Fluid interior momentum row.
    pub a_fm_ii: SparseMatrix,
    pub a_fm_ig: SparseMatrix,
    pub b_2f_i: SparseMatrix,
    pub a_f_ii: SparseMatrix,
    pub a_f_ig: SparseMatrix,
    // Traction row (fluid momentum on gamma plus structure stiffness).
    pub a_fm_gi: SparseMatrix,
    pub a_fm_gg: SparseMatrix,
    pub b_2f_g: SparseMatrix,
    pub a_f_gi: SparseMatrix,
    pub a_f_gg: SparseMatrix,
    pub a_s_gg: SparseMatrix,
    pub a_s_gi: SparseMatrix,
    // Structure interior row.
    pub a_s_ig: SparseMatrix,
    pub a_s_ii: SparseMatrix,
    // Right-hand side, one segment per field row.
    pub r_m_i: Vec<f64>,
    pub r_m_g: Vec<f64>,
    pub r_p: Vec<f64>,
    pub r_f_i: Vec<f64>,
    pub r_f_g: Vec<f64>,
    pub r_s_g: Vec<f64>,
    pub r_s_i: Vec<f64>,
}

impl NaturalSystem {
    /// Assembles the full seven-field matrix in the natural layout.
    pub fn assemble_full(&self) -> Result<SparseMatrix> {
        let d = &self.dims;
        let eye_g = SparseMatrix::identity(d.n_mg);
        let neg_eye_g = eye_g.scaled(-1.0);
        let kin_scale = SparseMatrix::from_diag(&vec![1.0 / self.dt; d.n_sg]);
        let neg_c_f = self.c_f.scaled(-1.0);
        let grid: Vec<Vec<Option<&SparseMatrix>>> = vec![
            vec![
                Some(&self.a_m_ii),
                Some(&self.a_m_ig),
                None,
                None,
                None,
                None,
                None,
            ],
            vec![None, Some(&eye_g), None, None, None, Some(&neg_eye_g), None],
            vec![
                Some(&self.b_fm_i),
                Some(&self.b_fm_g),
                Some(&neg_c_f),
                Some(&self.b_1f_i),
                Some(&self.b_1f_g),
                None,
                None,
            ],
            vec![
                Some(&self.a_fm_ii),
                Some(&self.a_fm_ig),
                Some(&self.b_2f_i),
                Some(&self.a_f_ii),
                Some(&self.a_f_ig),
                None,
                None,
            ],
            vec![
                Some(&self.a_fm_gi),
                Some(&self.a_fm_gg),
                Some(&self.b_2f_g),
                Some(&self.a_f_gi),
                Some(&self.a_f_gg),
                Some(&self.a_s_gg),
                Some(&self.a_s_gi),
            ],
            vec![None, None, None, None, Some(&neg_eye_g), Some(&kin_scale), None],
            vec![None, None, None, None, None, Some(&self.a_s_ig), Some(&self.a_s_ii)],
        ];
        let dims = self.dims.as_array();
        assemble_block_grid(&grid, &dims, &dims)
    }

    pub fn rhs_full(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.dims.total());
        b.extend_from_slice(&self.r_m_i);
        b.extend_from_slice(&self.r_m_g);
        b.extend_from_slice(&self.r_p);
        b.extend_from_slice(&self.r_f_i);
        b.extend_from_slice(&self.r_f_g);
        b.extend_from_slice(&self.r_s_g);
        b.extend_from_slice(&self.r_s_i);
        b
    }
}

/// Dof slot for one (node, component) pair of one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Dirichlet,
    Interior(usize),
    Gamma(usize),
}

/// Node-to-dof maps for all fields.
pub(crate) struct DofMaps {
    mesh: Vec<Slot>,
    velocity: Vec<Slot>,
    structure: Vec<Slot>,
    pub dims: NaturalDims,
}

pub(crate) fn build_dof_maps(mesh: &FsiMesh2d) -> DofMaps {
    let nf = mesh.n_fluid_nodes();
    let ns = mesh.n_structure_nodes();
    let gamma_cols = mesh.gamma_columns();
    let gamma_pos: std::collections::HashMap<usize, usize> = gamma_cols
        .iter()
        .enumerate()
        .map(|(pos, &i)| (i, pos))
        .collect();

    let mut mesh_map = vec![Slot::Dirichlet; 2 * nf];
    let mut vel_map = vec![Slot::Dirichlet; 2 * nf];
    let mut str_map = vec![Slot::Dirichlet; 2 * ns];
    let (mut n_mi, mut n_ui, mut n_si) = (0usize, 0usize, 0usize);
    for j in 0..=mesh.ny_fluid {
        for i in 0..=mesh.nx {
            let node = mesh.fluid_node(i, j);
            for c in 0..2 {
                let slot = &mut mesh_map[2 * node + c];
                *slot = match mesh.mesh_class(i, j) {
                    DofClass::Dirichlet => Slot::Dirichlet,
                    DofClass::Gamma => Slot::Gamma(2 * gamma_pos[&i] + c),
                    DofClass::Interior => {
                        n_mi += 1;
                        Slot::Interior(n_mi - 1)
                    }
                };
                let vslot = &mut vel_map[2 * node + c];
                *vslot = match mesh.velocity_class(i, j) {
                    DofClass::Dirichlet => Slot::Dirichlet,
                    DofClass::Gamma => Slot::Gamma(2 * gamma_pos[&i] + c),
                    DofClass::Interior => {
                        n_ui += 1;
                        Slot::Interior(n_ui - 1)
                    }
                };
            }
        }
    }
    for j in 0..=mesh.ny_structure {
        for i in 0..=mesh.nx {
            let node = mesh.structure_node(i, j);
            for c in 0..2 {
                let slot = &mut str_map[2 * node + c];
                *slot = match mesh.structure_class(i, j) {
                    DofClass::Dirichlet => Slot::Dirichlet,
                    DofClass::Gamma => Slot::Gamma(2 * gamma_pos[&i] + c),
                    DofClass::Interior => {
                        n_si += 1;
                        Slot::Interior(n_si - 1)
                    }
                };
            }
        }
    }
    let n_g = 2 * gamma_cols.len();
    DofMaps {
        mesh: mesh_map,
        velocity: vel_map,
        structure: str_map,
        dims: NaturalDims {
            n_mi,
            n_mg: n_g,
            n_p: nf,
            n_ui,
            n_ug: n_g,
            n_sg: n_g,
            n_si,
        },
    }
}

/// Inflow profile extended over the channel; zero on the interface and the
/// wall, decaying toward the outlet so its divergence is nonzero.
fn wind(u_in: f64, x: f64, y: f64) -> (f64, f64) {
    let yy = y / FLUID_HEIGHT;
    (u_in * 4.0 * yy * (1.0 - yy) * (1.0 - x / (2.0 * LENGTH)), 0.0)
}

fn wind_divergence(u_in: f64, _x: f64, y: f64) -> f64 {
    let yy = y / FLUID_HEIGHT;
    -u_in * 4.0 * yy * (1.0 - yy) / (2.0 * LENGTH)
}

/// Inflow Dirichlet data for a fluid node.
fn dirichlet_velocity(mesh: &FsiMesh2d, params: &FsiParameters, node: usize, comp: usize) -> f64 {
    let i = node % (mesh.nx + 1);
    if i != 0 || comp != 0 {
        return 0.0;
    }
    let (_, y) = mesh.fluid_coords(node);
    let yy = y / FLUID_HEIGHT;
    params.u_in * 4.0 * yy * (1.0 - yy)
}

pub fn generate_natural(
    mesh: &FsiMesh2d,
    params: &FsiParameters,
    opts: &GeneratorOptions,
) -> Result<NaturalSystem> {
    params.validate()?;
    if mesh.level > 6 {
        return Err(Error::InvalidConfig(format!(
            "mesh level {} exceeds the desk-scale range (0..=6)",
            mesh.level
        )));
    }
    let maps = build_dof_maps(mesh);
    let d = maps.dims;

    let mut t_m_ii = Vec::new();
    let mut t_m_ig = Vec::new();
    let mut t_b_fm_i = Vec::new();
    let mut t_b_fm_g = Vec::new();
    let mut t_c_f = Vec::new();
    let mut t_b_1f_i = Vec::new();
    let mut t_b_1f_g = Vec::new();
    let mut t_a_fm = [Vec::new(), Vec::new(), Vec::new(), Vec::new()]; // ii, ig, gi, gg
    let mut t_b_2f_i = Vec::new();
    let mut t_b_2f_g = Vec::new();
    let mut t_a_f = [Vec::new(), Vec::new(), Vec::new(), Vec::new()]; // ii, ig, gi, gg
    let mut t_a_s = [Vec::new(), Vec::new(), Vec::new(), Vec::new()]; // ii, ig, gi, gg

    let mut r_f_i = vec![0.0; d.n_ui];
    let mut r_f_g = vec![0.0; d.n_ug];
    let mut r_p = vec![0.0; d.n_p];

    // Fluid-domain loops: mesh Laplacian, momentum, pressure couplings,
    // stabilization and the shape-derivative blocks.
    let mass_coef = |area: f64, a: usize, b: usize| {
        if a == b {
            area / 6.0
        } else {
            area / 12.0
        }
    };
    for tri in mesh.fluid_triangles() {
        let coords = [
            mesh.fluid_coords(tri[0]),
            mesh.fluid_coords(tri[1]),
            mesh.fluid_coords(tri[2]),
        ];
        let g = triangle_geometry(coords);
        let (cx, cy) = g.centroid;
        let (wx, wy) = wind(params.u_in, cx, cy);
        let divw = wind_divergence(params.u_in, cx, cy);
        let h_t_sq = 2.0 * g.area;

        for a in 0..3 {
            let ga = g.grads[a];
            for b in 0..3 {
                let gb = g.grads[b];
                let grad_dot = ga[0] * gb[0] + ga[1] * gb[1];
                let lap = g.area * grad_dot;
                let mass = mass_coef(g.area, a, b);
                // Mesh-motion Laplacian rows (interior test functions only;
                // the gamma rows are replaced by the interface identity).
                for c in 0..2 {
                    if let Slot::Interior(ri) = maps.mesh[2 * tri[a] + c] {
                        match maps.mesh[2 * tri[b] + c] {
                            Slot::Interior(ci) => t_m_ii.push((ri, ci, lap)),
                            Slot::Gamma(ci) => t_m_ig.push((ri, ci, lap)),
                            Slot::Dirichlet => {}
                        }
                    }
                }
                // Fluid momentum: (rho_f/dt) M + rho_f nu K, optional Oseen.
                let mut f_ab = params.rho_f * params.nu * lap + params.rho_f / params.dt * mass;
                if opts.oseen_wind {
                    f_ab += params.rho_f * (wx * gb[0] + wy * gb[1]) * g.area / 3.0;
                }
                for c in 0..2 {
                    let row = maps.velocity[2 * tri[a] + c];
                    let col = maps.velocity[2 * tri[b] + c];
                    match row {
                        Slot::Interior(ri) => match col {
                            Slot::Interior(ci) => t_a_f[0].push((ri, ci, f_ab)),
                            Slot::Gamma(ci) => t_a_f[1].push((ri, ci, f_ab)),
                            Slot::Dirichlet => {
                                r_f_i[ri] -= f_ab * dirichlet_velocity(mesh, params, tri[b], c);
                            }
                        },
                        Slot::Gamma(rg) => match col {
                            Slot::Interior(ci) => t_a_f[2].push((rg, ci, f_ab)),
                            Slot::Gamma(ci) => t_a_f[3].push((rg, ci, f_ab)),
                            Slot::Dirichlet => {
                                r_f_g[rg] -= f_ab * dirichlet_velocity(mesh, params, tri[b], c);
                            }
                        },
                        Slot::Dirichlet => {}
                    }
                }
                // Pressure stabilization (Brezzi-Pitkaranta).
                t_c_f.push((tri[a], tri[b], params.stab_delta * h_t_sq * lap));

                // Shape derivative of the fluid time term and of the mass
                // equation, first-order volume-change linearization.
                for c in 0..2 {
                    let wind_c = if c == 0 { wx } else { wy };
                    let row = maps.velocity[2 * tri[a] + c];
                    for dcomp in 0..2 {
                        let val = params.rho_f / params.dt * wind_c * g.area / 3.0 * gb[dcomp];
                        if val == 0.0 {
                            continue;
                        }
                        let col = maps.mesh[2 * tri[b] + dcomp];
                        match (row, col) {
                            (Slot::Interior(ri), Slot::Interior(ci)) => t_a_fm[0].push((ri, ci, val)),
                            (Slot::Interior(ri), Slot::Gamma(ci)) => t_a_fm[1].push((ri, ci, val)),
                            (Slot::Gamma(rg), Slot::Interior(ci)) => t_a_fm[2].push((rg, ci, val)),
                            (Slot::Gamma(rg), Slot::Gamma(ci)) => t_a_fm[3].push((rg, ci, val)),
                            _ => {}
                        }
                    }
                }
                for dcomp in 0..2 {
                    let val = params.rho_f * divw * g.area / 3.0 * gb[dcomp];
                    if val == 0.0 {
                        continue;
                    }
                    match maps.mesh[2 * tri[b] + dcomp] {
                        Slot::Interior(ci) => t_b_fm_i.push((tri[a], ci, val)),
                        Slot::Gamma(ci) => t_b_fm_g.push((tri[a], ci, val)),
                        Slot::Dirichlet => {}
                    }
                }
            }
            // Pressure gradient and divergence couplings (test a fixed).
            for b in 0..3 {
                let gb = g.grads[b];
                for c in 0..2 {
                    // -(p, div v): row velocity (a, c), column pressure b.
                    let val_grad = -g.area / 3.0 * ga[c];
                    match maps.velocity[2 * tri[a] + c] {
                        Slot::Interior(ri) => t_b_2f_i.push((ri, tri[b], val_grad)),
                        Slot::Gamma(rg) => t_b_2f_g.push((rg, tri[b], val_grad)),
                        Slot::Dirichlet => {}
                    }
                    // rho_f (q, div u): row pressure a, column velocity (b, c).
                    let val_div = params.rho_f * g.area / 3.0 * gb[c];
                    match maps.velocity[2 * tri[b] + c] {
                        Slot::Interior(ci) => t_b_1f_i.push((tri[a], ci, val_div)),
                        Slot::Gamma(ci) => t_b_1f_g.push((tri[a], ci, val_div)),
                        Slot::Dirichlet => {
                            r_p[tri[a]] -= val_div * dirichlet_velocity(mesh, params, tri[b], c);
                        }
                    }
                }
            }
        }
    }

    // Structure loops: linear elasticity plus the Newmark mass term.
    let newmark = params.rho_s / (params.newmark_beta * params.dt * params.dt);
    for tri in mesh.structure_triangles() {
        let coords = [
            mesh.structure_coords(tri[0]),
            mesh.structure_coords(tri[1]),
            mesh.structure_coords(tri[2]),
        ];
        let g = triangle_geometry(coords);
        for a in 0..3 {
            let ga = g.grads[a];
            for b in 0..3 {
                let gb = g.grads[b];
                let grad_dot = ga[0] * gb[0] + ga[1] * gb[1];
                let mass = mass_coef(g.area, a, b);
                for c in 0..2 {
                    for dcomp in 0..2 {
                        let mut val = g.area
                            * (params.lambda_s * ga[c] * gb[dcomp]
                                + params.mu_s * (ga[dcomp] * gb[c] + if c == dcomp { grad_dot } else { 0.0 }));
                        if c == dcomp {
                            val += newmark * mass;
                        }
                        let row = maps.structure[2 * tri[a] + c];
                        let col = maps.structure[2 * tri[b] + dcomp];
                        match (row, col) {
                            (Slot::Interior(ri), Slot::Interior(ci)) => t_a_s[0].push((ri, ci, val)),
                            (Slot::Interior(ri), Slot::Gamma(ci)) => t_a_s[1].push((ri, ci, val)),
                            (Slot::Gamma(rg), Slot::Interior(ci)) => t_a_s[2].push((rg, ci, val)),
                            (Slot::Gamma(rg), Slot::Gamma(ci)) => t_a_s[3].push((rg, ci, val)),
                            _ => {}
                        }
                    }
                }
            }
        }
    }

    let mut sys = NaturalSystem {
        dims: d,
        dt: params.dt,
        a_m_ii: SparseMatrix::from_triplets(d.n_mi, d.n_mi, &t_m_ii),
        a_m_ig: SparseMatrix::from_triplets(d.n_mi, d.n_mg, &t_m_ig),
        b_fm_i: SparseMatrix::from_triplets(d.n_p, d.n_mi, &t_b_fm_i),
        b_fm_g: SparseMatrix::from_triplets(d.n_p, d.n_mg, &t_b_fm_g),
        c_f: SparseMatrix::from_triplets(d.n_p, d.n_p, &t_c_f),
        b_1f_i: SparseMatrix::from_triplets(d.n_p, d.n_ui, &t_b_1f_i),
        b_1f_g: SparseMatrix::from_triplets(d.n_p, d.n_ug, &t_b_1f_g),
        a_fm_ii: SparseMatrix::from_triplets(d.n_ui, d.n_mi, &t_a_fm[0]),
        a_fm_ig: SparseMatrix::from_triplets(d.n_ui, d.n_mg, &t_a_fm[1]),
        b_2f_i: SparseMatrix::from_triplets(d.n_ui, d.n_p, &t_b_2f_i),
        a_f_ii: SparseMatrix::from_triplets(d.n_ui, d.n_ui, &t_a_f[0]),
        a_f_ig: SparseMatrix::from_triplets(d.n_ui, d.n_ug, &t_a_f[1]),
        a_fm_gi: SparseMatrix::from_triplets(d.n_ug, d.n_mi, &t_a_fm[2]),
        a_fm_gg: SparseMatrix::from_triplets(d.n_ug, d.n_mg, &t_a_fm[3]),
        b_2f_g: SparseMatrix::from_triplets(d.n_ug, d.n_p, &t_b_2f_g),
        a_f_gi: SparseMatrix::from_triplets(d.n_ug, d.n_ui, &t_a_f[2]),
        a_f_gg: SparseMatrix::from_triplets(d.n_ug, d.n_ug, &t_a_f[3]),
        a_s_gg: SparseMatrix::from_triplets(d.n_ug, d.n_sg, &t_a_s[3]),
        a_s_gi: SparseMatrix::from_triplets(d.n_ug, d.n_si, &t_a_s[2]),
        a_s_ig: SparseMatrix::from_triplets(d.n_si, d.n_sg, &t_a_s[1]),
        a_s_ii: SparseMatrix::from_triplets(d.n_si, d.n_si, &t_a_s[0]),
        r_m_i: vec![0.0; d.n_mi],
        r_m_g: vec![0.0; d.n_mg],
        r_p,
        r_f_i,
        r_f_g,
        r_s_g: vec![0.0; d.n_sg],
        r_s_i: vec![0.0; d.n_si],
    };

    match &opts.rhs {
        RhsMode::InflowResidual => {}
        RhsMode::Manufactured => {
            let x = manufactured_solution(mesh, &maps);
            let k = sys.assemble_full()?;
            let r = k.spmv(&x)?;
            sys.set_rhs_from_full(&r);
        }
        RhsMode::Random(seed) => {
            let mut rng = SplitMix64::new(*seed);
            let r = rng.vector(d.total());
            sys.set_rhs_from_full(&r);
        }
    }
    Ok(sys)
}

impl NaturalSystem {
    fn set_rhs_from_full(&mut self, r: &[f64]) {
        let d = self.dims;
        let mut at = 0usize;
        let mut take = |n: usize| {
            let s = r[at..at + n].to_vec();
            at += n;
            s
        };
        self.r_m_i = take(d.n_mi);
        self.r_m_g = take(d.n_mg);
        self.r_p = take(d.n_p);
        self.r_f_i = take(d.n_ui);
        self.r_f_g = take(d.n_ug);
        self.r_s_g = take(d.n_sg);
        self.r_s_i = take(d.n_si);
    }
}

/// Smooth per-field reference solution in the natural layout.
pub(crate) fn manufactured_solution(mesh: &FsiMesh2d, maps: &DofMaps) -> Vec<f64> {
    use std::f64::consts::PI;
    let d = maps.dims;
    let mut x = vec![0.0; d.total()];
    let off_mg = d.n_mi;
    let off_p = off_mg + d.n_mg;
    let off_ui = off_p + d.n_p;
    let off_ug = off_ui + d.n_ui;
    let off_sg = off_ug + d.n_ug;
    let off_si = off_sg + d.n_sg;

    for node in 0..mesh.n_fluid_nodes() {
        let (px, py) = mesh.fluid_coords(node);
        for c in 0..2 {
            let mesh_val =
                (PI * px / LENGTH).sin() * (0.3 + 0.7 * (PI * py / FLUID_HEIGHT).cos()) * (1.0 + 0.2 * c as f64);
            match maps.mesh[2 * node + c] {
                Slot::Interior(i) => x[i] = mesh_val,
                Slot::Gamma(g) => x[off_mg + g] = mesh_val,
                Slot::Dirichlet => {}
            }
            let vel_val =
                (2.0 * PI * px / LENGTH).sin() * (PI * py / FLUID_HEIGHT).cos() * (1.3 - 0.3 * c as f64);
            match maps.velocity[2 * node + c] {
                Slot::Interior(i) => x[off_ui + i] = vel_val,
                Slot::Gamma(g) => x[off_ug + g] = vel_val,
                Slot::Dirichlet => {}
            }
        }
        x[off_p + node] = (PI * px / LENGTH).cos() * (1.0 + py / FLUID_HEIGHT);
    }
    for node in 0..mesh.n_structure_nodes() {
        let (px, py) = mesh.structure_coords(node);
        for c in 0..2 {
            let val = (PI * px / LENGTH).sin()
                * (0.5 + 0.5 * (PI * py / STRUCTURE_HEIGHT).cos())
                * (0.8 + 0.1 * c as f64);
            match maps.structure[2 * node + c] {
                Slot::Gamma(g) => x[off_sg + g] = val,
                Slot::Interior(i) => x[off_si + i] = val,
                Slot::Dirichlet => {}
            }
        }
    }
    x
}
