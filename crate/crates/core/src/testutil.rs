//! Shared helpers for unit tests.

use crate::rng::SplitMix64;
use crate::sparse::SparseMatrix;
use crate::system::{FsiBlockSystem, InterfaceMaps};

pub fn random_block(rng: &mut SplitMix64, nrows: usize, ncols: usize, fill: f64) -> SparseMatrix {
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

fn diag_dominant(rng: &mut SplitMix64, n: usize) -> SparseMatrix {
    let m = random_block(rng, n, n, 0.3);
    let shift = SparseMatrix::from_diag(&vec![n as f64; n]);
    SparseMatrix::axpby(1.0, &m, 1.0, &shift).unwrap()
}

/// A random well-conditioned block system whose fluid couplings stay inside
/// the declared interface velocity columns.
pub fn random_system(rng: &mut SplitMix64, n_m: usize, n_s: usize, n_f: usize) -> FsiBlockSystem {
    let gamma_f = (n_f / 3).max(1);
    let sys = FsiBlockSystem {
        a_m: diag_dominant(rng, n_m),
        a_ms: random_block(rng, n_m, n_s, 0.2),
        a_s: diag_dominant(rng, n_s),
        a_sf: {
            let mut t = Vec::new();
            for i in 0..n_s {
                for j in 0..gamma_f {
                    if rng.next_f64() < 0.3 {
                        t.push((i, j, rng.next_signed()));
                    }
                }
            }
            SparseMatrix::from_triplets(n_s, n_f, &t)
        },
        a_fm: random_block(rng, n_f, n_m, 0.2),
        a_fs: random_block(rng, n_f, n_s, 0.2),
        a_f: diag_dominant(rng, n_f),
        b_m: rng.vector(n_m),
        b_s: rng.vector(n_s),
        b_f: rng.vector(n_f),
        interface_maps: InterfaceMaps {
            mesh_gamma: n_m..n_m,
            structure_gamma: n_s..n_s,
            fluid_velocity_gamma: 0..gamma_f,
        },
    };
    sys.validate().unwrap();
    sys
}
