//! Structured 2D mesh for the desk-scale model problem.
//!
//! Two stacked rectangles share the interface line y = 0: the fluid
//! channel [0,L] x [0,H_f] above, the structure slab [0,L] x [-H_s,0]
//! below. Both are triangulated with right triangles on a square grid;
//! refinement level l halves the mesh size of level l-1. Interface grids
//! conform by construction.

/// Channel length (cm).
pub const LENGTH: f64 = 6.0;
/// Fluid channel height (cm).
pub const FLUID_HEIGHT: f64 = 2.0;
/// Structure slab thickness (cm).
pub const STRUCTURE_HEIGHT: f64 = 1.0;

const BASE_NX: usize = 12;
const BASE_NY_FLUID: usize = 4;
const BASE_NY_STRUCTURE: usize = 2;

/// How unknowns at a node are treated for one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofClass {
    /// Eliminated by an essential boundary condition.
    Dirichlet,
    Interior,
    /// On the fluid-structure interface.
    Gamma,
}

#[derive(Debug, Clone)]
pub struct FsiMesh2d {
    pub level: usize,
    pub nx: usize,
    pub ny_fluid: usize,
    pub ny_structure: usize,
    pub h: f64,
}

/// A triangle as three node ids (counter-clockwise).
pub type Triangle = [usize; 3];

impl FsiMesh2d {
    pub fn new(level: usize) -> Self {
        let scale = 1usize << level;
        let nx = BASE_NX * scale;
        Self {
            level,
            nx,
            ny_fluid: BASE_NY_FLUID * scale,
            ny_structure: BASE_NY_STRUCTURE * scale,
            h: LENGTH / nx as f64,
        }
    }

    pub fn n_fluid_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny_fluid + 1)
    }

    pub fn n_structure_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny_structure + 1)
    }

    /// Fluid node id at grid position (i, j); j = 0 is the interface line.
    pub fn fluid_node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Structure node id at (i, j); j = ny_structure is the interface line.
    pub fn structure_node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn fluid_coords(&self, node: usize) -> (f64, f64) {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        (i as f64 * self.h, j as f64 * self.h)
    }

    pub fn structure_coords(&self, node: usize) -> (f64, f64) {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        (i as f64 * self.h, -STRUCTURE_HEIGHT + j as f64 * self.h)
    }

    /// Interface node columns, excluding the two corner columns whose
    /// unknowns are pinned by the side boundary conditions.
    pub fn gamma_columns(&self) -> Vec<usize> {
        (1..self.nx).collect()
    }

    pub fn fluid_triangles(&self) -> Vec<Triangle> {
        grid_triangles(self.nx, self.ny_fluid, |i, j| self.fluid_node(i, j))
    }

    pub fn structure_triangles(&self) -> Vec<Triangle> {
        grid_triangles(self.nx, self.ny_structure, |i, j| self.structure_node(i, j))
    }

    /// Mesh-motion classification of a fluid node: the outer fluid boundary
    /// (inflow, outflow, wall) is clamped, the interface row is gamma.
    pub fn mesh_class(&self, i: usize, j: usize) -> DofClass {
        if i == 0 || i == self.nx || j == self.ny_fluid {
            DofClass::Dirichlet
        } else if j == 0 {
            DofClass::Gamma
        } else {
            DofClass::Interior
        }
    }

    /// Velocity classification: inflow and wall are clamped, interface
    /// columns 1..nx are gamma, the outflow column stays free.
    pub fn velocity_class(&self, i: usize, j: usize) -> DofClass {
        if i == 0 || j == self.ny_fluid || (j == 0 && i == self.nx) {
            DofClass::Dirichlet
        } else if j == 0 {
            DofClass::Gamma
        } else {
            DofClass::Interior
        }
    }

    /// Structure classification: bottom and both sides are clamped, the
    /// interface row is gamma.
    pub fn structure_class(&self, i: usize, j: usize) -> DofClass {
        if j == 0 || i == 0 || i == self.nx {
            DofClass::Dirichlet
        } else if j == self.ny_structure {
            DofClass::Gamma
        } else {
            DofClass::Interior
        }
    }
}

fn grid_triangles(nx: usize, ny: usize, node: impl Fn(usize, usize) -> usize) -> Vec<Triangle> {
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let n00 = node(i, j);
            let n10 = node(i + 1, j);
            let n01 = node(i, j + 1);
            let n11 = node(i + 1, j + 1);
            tris.push([n00, n10, n11]);
            tris.push([n00, n11, n01]);
        }
    }
    tris
}

/// Geometry of one P1 triangle: area and constant basis gradients.
pub struct TriangleGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
    pub centroid: (f64, f64),
}

pub fn triangle_geometry(coords: [(f64, f64); 3]) -> TriangleGeometry {
    let [(x0, y0), (x1, y1), (x2, y2)] = coords;
    let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    let area = 0.5 * det.abs();
    debug_assert!(det > 0.0, "triangles are oriented counter-clockwise");
    let inv = 1.0 / det;
    let grads = [
        [(y1 - y2) * inv, (x2 - x1) * inv],
        [(y2 - y0) * inv, (x0 - x2) * inv],
        [(y0 - y1) * inv, (x1 - x0) * inv],
    ];
    TriangleGeometry {
        area,
        grads,
        centroid: ((x0 + x1 + x2) / 3.0, (y0 + y1 + y2) / 3.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_halves_h() {
        let m0 = FsiMesh2d::new(0);
        let m1 = FsiMesh2d::new(1);
        let m2 = FsiMesh2d::new(2);
        assert_eq!(m0.h, 2.0 * m1.h);
        assert_eq!(m1.h, 2.0 * m2.h);
    }

    #[test]
    fn gamma_sets_conform() {
        for level in 0..3 {
            let m = FsiMesh2d::new(level);
            let cols = m.gamma_columns();
            assert_eq!(cols.len(), m.nx - 1);
            for &i in &cols {
                assert_eq!(m.mesh_class(i, 0), DofClass::Gamma);
                assert_eq!(m.velocity_class(i, 0), DofClass::Gamma);
                assert_eq!(m.structure_class(i, m.ny_structure), DofClass::Gamma);
                // Coordinates coincide on the interface.
                let (xf, yf) = m.fluid_coords(m.fluid_node(i, 0));
                let (xs, ys) = m.structure_coords(m.structure_node(i, m.ny_structure));
                assert!((xf - xs).abs() <= 1e-14 && (yf - ys).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn triangle_geometry_is_consistent() {
        let g = triangle_geometry([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!((g.area - 0.5).abs() <= 1e-15);
        // Gradients sum to zero.
        for c in 0..2 {
            let s: f64 = g.grads.iter().map(|gr| gr[c]).sum();
            assert!(s.abs() <= 1e-15);
        }
        // Gradient of the hat at node 0 along x is -1.
        assert!((g.grads[0][0] + 1.0).abs() <= 1e-15);
    }

    #[test]
    fn triangulation_covers_domain() {
        let m = FsiMesh2d::new(0);
        let total_area: f64 = m
            .fluid_triangles()
            .iter()
            .map(|t| {
                let c = [
                    m.fluid_coords(t[0]),
                    m.fluid_coords(t[1]),
                    m.fluid_coords(t[2]),
                ];
                triangle_geometry(c).area
            })
            .sum();
        assert!((total_area - LENGTH * FLUID_HEIGHT).abs() <= 1e-10);
    }
}
