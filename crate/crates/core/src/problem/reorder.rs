//! Reordering of the natural system and grouping into the compact form.
//!
//! Reordered unknown order: (d_m^i, d_m^g | d_s^i, d_s^g | u_f^g, u_f^i, p).
//! Two rows change under the reordering: the mesh-interior row trades its
//! coupling to d_m^g for one to d_s^g through the interface identity, and
//! the structure-interior row trades its coupling to d_s^g for a
//! dt-scaled one to u_f^g through the kinematic condition. The right-hand
//! side picks up the matching corrections; everything else is a pure
//! permutation, so solutions agree with the natural system.

use crate::block::assemble_block_grid;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::system::{FsiBlockSystem, InterfaceMaps};

use super::natural::{NaturalDims, NaturalSystem};

#[derive(Debug, Clone)]
pub struct ReorderedSystem {
    pub dims: NaturalDims,
    pub dt: f64,
    // Mesh rows.
    pub a_m_ii: SparseMatrix,
    /// Coupling of the mesh-interior row to d_s^g (the natural A_m^{ig}).
    pub a_ms_ig: SparseMatrix,
    // Structure rows.
    pub a_s_ii: SparseMatrix,
    /// dt-scaled coupling of the structure-interior row to u_f^g.
    pub a_sf_ig: SparseMatrix,
    // Fluid rows (traction, interior momentum, mass), natural blocks.
    pub a_fm_gi: SparseMatrix,
    pub a_fm_gg: SparseMatrix,
    pub a_fs_gi: SparseMatrix,
    pub a_fs_gg: SparseMatrix,
    pub a_f_gg: SparseMatrix,
    pub a_f_gi: SparseMatrix,
    pub b_2f_g: SparseMatrix,
    pub a_fm_ii: SparseMatrix,
    pub a_fm_ig: SparseMatrix,
    pub a_f_ig: SparseMatrix,
    pub a_f_ii: SparseMatrix,
    pub b_2f_i: SparseMatrix,
    pub b_fm_i: SparseMatrix,
    pub b_fm_g: SparseMatrix,
    pub b_1f_g: SparseMatrix,
    pub b_1f_i: SparseMatrix,
    pub c_f: SparseMatrix,
    // Right-hand side in reordered field order.
    pub rt_m_i: Vec<f64>,
    pub r_m_g: Vec<f64>,
    pub rt_s_i: Vec<f64>,
    pub r_s_g: Vec<f64>,
    pub r_f_g: Vec<f64>,
    pub r_f_i: Vec<f64>,
    pub r_p: Vec<f64>,
}

/// Applies the row modifications and permutation of the natural system.
pub fn reorder(sys: &NaturalSystem) -> Result<ReorderedSystem> {
    let d = sys.dims;
    // rt_m^i = r_m^i - A_m^{ig} r_m^g
    let mut rt_m_i = sys.r_m_i.clone();
    sys.a_m_ig.spmv_acc(-1.0, &sys.r_m_g, &mut rt_m_i);
    // rt_s^i = r_s^i - dt A_s^{ig} r_s^g
    let mut rt_s_i = sys.r_s_i.clone();
    sys.a_s_ig.spmv_acc(-sys.dt, &sys.r_s_g, &mut rt_s_i);

    Ok(ReorderedSystem {
        dims: d,
        dt: sys.dt,
        a_m_ii: sys.a_m_ii.clone(),
        a_ms_ig: sys.a_m_ig.clone(),
        a_s_ii: sys.a_s_ii.clone(),
        a_sf_ig: sys.a_s_ig.scaled(sys.dt),
        a_fm_gi: sys.a_fm_gi.clone(),
        a_fm_gg: sys.a_fm_gg.clone(),
        a_fs_gi: sys.a_s_gi.clone(),
        a_fs_gg: sys.a_s_gg.clone(),
        a_f_gg: sys.a_f_gg.clone(),
        a_f_gi: sys.a_f_gi.clone(),
        b_2f_g: sys.b_2f_g.clone(),
        a_fm_ii: sys.a_fm_ii.clone(),
        a_fm_ig: sys.a_fm_ig.clone(),
        a_f_ig: sys.a_f_ig.clone(),
        a_f_ii: sys.a_f_ii.clone(),
        b_2f_i: sys.b_2f_i.clone(),
        b_fm_i: sys.b_fm_i.clone(),
        b_fm_g: sys.b_fm_g.clone(),
        b_1f_g: sys.b_1f_g.clone(),
        b_1f_i: sys.b_1f_i.clone(),
        c_f: sys.c_f.clone(),
        rt_m_i,
        r_m_g: sys.r_m_g.clone(),
        rt_s_i,
        r_s_g: sys.r_s_g.clone(),
        r_f_g: sys.r_f_g.clone(),
        r_f_i: sys.r_f_i.clone(),
        r_p: sys.r_p.clone(),
    })
}

impl ReorderedSystem {
    /// Field sizes in reordered order (m^i, m^g, s^i, s^g, u^g, u^i, p).
    pub fn field_dims(&self) -> [usize; 7] {
        let d = self.dims;
        [d.n_mi, d.n_mg, d.n_si, d.n_sg, d.n_ug, d.n_ui, d.n_p]
    }

    /// Maps each reordered global index to its natural position.
    pub fn natural_permutation(&self) -> Vec<usize> {
        let d = self.dims;
        // Natural field offsets: (m^i, m^g, p, u^i, u^g, s^g, s^i).
        let nat_mi = 0;
        let nat_mg = nat_mi + d.n_mi;
        let nat_p = nat_mg + d.n_mg;
        let nat_ui = nat_p + d.n_p;
        let nat_ug = nat_ui + d.n_ui;
        let nat_sg = nat_ug + d.n_ug;
        let nat_si = nat_sg + d.n_sg;
        let mut perm = Vec::with_capacity(d.total());
        for (offset, len) in [
            (nat_mi, d.n_mi),
            (nat_mg, d.n_mg),
            (nat_si, d.n_si),
            (nat_sg, d.n_sg),
            (nat_ug, d.n_ug),
            (nat_ui, d.n_ui),
            (nat_p, d.n_p),
        ] {
            perm.extend(offset..offset + len);
        }
        perm
    }

    pub fn rhs_full(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.dims.total());
        b.extend_from_slice(&self.rt_m_i);
        b.extend_from_slice(&self.r_m_g);
        b.extend_from_slice(&self.rt_s_i);
        b.extend_from_slice(&self.r_s_g);
        b.extend_from_slice(&self.r_f_g);
        b.extend_from_slice(&self.r_f_i);
        b.extend_from_slice(&self.r_p);
        b
    }

    /// Assembles the full seven-field reordered matrix.
    pub fn assemble_full(&self) -> Result<SparseMatrix> {
        let d = self.dims;
        let eye = SparseMatrix::identity(d.n_mg);
        let neg_eye = eye.scaled(-1.0);
        let kin = SparseMatrix::from_diag(&vec![1.0 / self.dt; d.n_sg]);
        let neg_c_f = self.c_f.scaled(-1.0);
        let grid: Vec<Vec<Option<&SparseMatrix>>> = vec![
            vec![Some(&self.a_m_ii), None, None, Some(&self.a_ms_ig), None, None, None],
            vec![None, Some(&eye), None, Some(&neg_eye), None, None, None],
            vec![None, None, Some(&self.a_s_ii), None, Some(&self.a_sf_ig), None, None],
            vec![None, None, None, Some(&kin), Some(&neg_eye), None, None],
            vec![
                Some(&self.a_fm_gi),
                Some(&self.a_fm_gg),
                Some(&self.a_fs_gi),
                Some(&self.a_fs_gg),
                Some(&self.a_f_gg),
                Some(&self.a_f_gi),
                Some(&self.b_2f_g),
            ],
            vec![
                Some(&self.a_fm_ii),
                Some(&self.a_fm_ig),
                None,
                None,
                Some(&self.a_f_ig),
                Some(&self.a_f_ii),
                Some(&self.b_2f_i),
            ],
            vec![
                Some(&self.b_fm_i),
                Some(&self.b_fm_g),
                None,
                None,
                Some(&self.b_1f_g),
                Some(&self.b_1f_i),
                Some(&neg_c_f),
            ],
        ];
        let dims = self.field_dims();
        assemble_block_grid(&grid, &dims, &dims)
    }

    /// Groups the seven fields into the compact 3x3 block system.
    pub fn to_compact(&self) -> Result<FsiBlockSystem> {
        let d = self.dims;
        let n_m = d.n_mi + d.n_mg;
        let n_s = d.n_si + d.n_sg;
        let n_f = d.n_ug + d.n_ui + d.n_p;

        let eye = SparseMatrix::identity(d.n_mg);
        let neg_eye = eye.scaled(-1.0);
        let kin = SparseMatrix::from_diag(&vec![1.0 / self.dt; d.n_sg]);
        let neg_c_f = self.c_f.scaled(-1.0);

        let a_m = assemble_block_grid(
            &[vec![Some(&self.a_m_ii), None], vec![None, Some(&eye)]],
            &[d.n_mi, d.n_mg],
            &[d.n_mi, d.n_mg],
        )?;
        let a_ms = assemble_block_grid(
            &[vec![None, Some(&self.a_ms_ig)], vec![None, Some(&neg_eye)]],
            &[d.n_mi, d.n_mg],
            &[d.n_si, d.n_sg],
        )?;
        let a_s = assemble_block_grid(
            &[vec![Some(&self.a_s_ii), None], vec![None, Some(&kin)]],
            &[d.n_si, d.n_sg],
            &[d.n_si, d.n_sg],
        )?;
        let a_sf = assemble_block_grid(
            &[
                vec![Some(&self.a_sf_ig), None, None],
                vec![Some(&neg_eye), None, None],
            ],
            &[d.n_si, d.n_sg],
            &[d.n_ug, d.n_ui, d.n_p],
        )?;
        let a_fm = assemble_block_grid(
            &[
                vec![Some(&self.a_fm_gi), Some(&self.a_fm_gg)],
                vec![Some(&self.a_fm_ii), Some(&self.a_fm_ig)],
                vec![Some(&self.b_fm_i), Some(&self.b_fm_g)],
            ],
            &[d.n_ug, d.n_ui, d.n_p],
            &[d.n_mi, d.n_mg],
        )?;
        let a_fs = assemble_block_grid(
            &[
                vec![Some(&self.a_fs_gi), Some(&self.a_fs_gg)],
                vec![None, None],
                vec![None, None],
            ],
            &[d.n_ug, d.n_ui, d.n_p],
            &[d.n_si, d.n_sg],
        )?;
        let a_f = assemble_block_grid(
            &[
                vec![Some(&self.a_f_gg), Some(&self.a_f_gi), Some(&self.b_2f_g)],
                vec![Some(&self.a_f_ig), Some(&self.a_f_ii), Some(&self.b_2f_i)],
                vec![Some(&self.b_1f_g), Some(&self.b_1f_i), Some(&neg_c_f)],
            ],
            &[d.n_ug, d.n_ui, d.n_p],
            &[d.n_ug, d.n_ui, d.n_p],
        )?;

        let mut b_m = Vec::with_capacity(n_m);
        b_m.extend_from_slice(&self.rt_m_i);
        b_m.extend_from_slice(&self.r_m_g);
        let mut b_s = Vec::with_capacity(n_s);
        b_s.extend_from_slice(&self.rt_s_i);
        b_s.extend_from_slice(&self.r_s_g);
        let mut b_f = Vec::with_capacity(n_f);
        b_f.extend_from_slice(&self.r_f_g);
        b_f.extend_from_slice(&self.r_f_i);
        b_f.extend_from_slice(&self.r_p);

        let sys = FsiBlockSystem {
            a_m,
            a_ms,
            a_s,
            a_sf,
            a_fm,
            a_fs,
            a_f,
            b_m,
            b_s,
            b_f,
            interface_maps: InterfaceMaps {
                mesh_gamma: d.n_mi..n_m,
                structure_gamma: d.n_si..n_s,
                fluid_velocity_gamma: 0..d.n_ug,
            },
        };
        sys.validate()?;
        // The compact layout has structural zeros at (m,f) and (s,m); the
        // named-block representation cannot carry them, so verify that the
        // grouping above used every natural block exactly once.
        let expected_nnz = self.assemble_full()?.nnz();
        let got = sys.a_m.nnz()
            + sys.a_ms.nnz()
            + sys.a_s.nnz()
            + sys.a_sf.nnz()
            + sys.a_fm.nnz()
            + sys.a_fs.nnz()
            + sys.a_f.nnz();
        if got != expected_nnz {
            return Err(Error::InvalidStructure(format!(
                "compact grouping lost or invented entries: {got} vs {expected_nnz}"
            )));
        }
        Ok(sys)
    }
}
