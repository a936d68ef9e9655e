//! Shared fixtures for the criterion benchmarks.

use fsi_core::problem::{generate_compact, FsiParameters, GeneratorOptions};
use fsi_core::system::FsiBlockSystem;

/// Generated system at the requested mesh level with default parameters.
pub fn fixture_system(level: usize) -> FsiBlockSystem {
    generate_compact(level, &FsiParameters::default(), &GeneratorOptions::default())
        .expect("desk-scale generation succeeds")
}
