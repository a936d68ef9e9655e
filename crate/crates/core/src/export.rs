//! Block-system snapshots on disk: Matrix Market files plus a manifest.
//!
//! The manifest is plain-text `key=value` lines listing dimensions,
//! interface ranges and any caller-supplied context (density, time step,
//! level). Right-hand sides are stored as n-by-1 coordinate matrices.
//! Absent coupling-block files import as zero blocks with a warning;
//! absent diagonal blocks or right-hand sides are errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix_market::{read_matrix_market, write_matrix_market};
use crate::sparse::SparseMatrix;
use crate::system::{FsiBlockSystem, InterfaceMaps};

pub const MANIFEST_NAME: &str = "manifest.txt";
const FORMAT_TAG: &str = "fsi-block-system-v1";

const COUPLING_BLOCKS: [&str; 4] = ["a_ms", "a_sf", "a_fm", "a_fs"];
const RHS_BLOCKS: [&str; 3] = ["b_m", "b_s", "b_f"];

fn range_to_string(r: &Range<usize>) -> String {
    format!("{}..{}", r.start, r.end)
}

fn parse_range(s: &str) -> Result<Range<usize>> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Error::InvalidConfig(format!("bad range syntax: {s}")))?;
    let lo = lo
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad range start: {s}")))?;
    let hi = hi
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad range end: {s}")))?;
    Ok(lo..hi)
}

/// Additionally writes the assembled monolithic matrix and right-hand side
/// (`k.mtx`, `b.mtx`) next to the block files.
pub fn export_system_with_monolithic(
    sys: &FsiBlockSystem,
    dir: impl AsRef<Path>,
    context: &[(String, String)],
) -> Result<()> {
    export_system(sys, dir.as_ref(), context)?;
    write_matrix_market(&sys.assemble_monolithic()?, dir.as_ref().join("k.mtx"))?;
    write_matrix_market(&column_matrix(&sys.rhs()), dir.as_ref().join("b.mtx"))?;
    Ok(())
}

/// Writes all seven blocks, the right-hand side and the manifest into `dir`.
/// `context` entries (e.g. rho_f, dt, level) are copied into the manifest.
pub fn export_system(
    sys: &FsiBlockSystem,
    dir: impl AsRef<Path>,
    context: &[(String, String)],
) -> Result<()> {
    sys.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let (n_m, n_s, n_f) = sys.dims();

    let blocks: [(&str, &SparseMatrix); 7] = [
        ("a_m", &sys.a_m),
        ("a_ms", &sys.a_ms),
        ("a_s", &sys.a_s),
        ("a_sf", &sys.a_sf),
        ("a_fm", &sys.a_fm),
        ("a_fs", &sys.a_fs),
        ("a_f", &sys.a_f),
    ];
    for (name, m) in blocks {
        write_matrix_market(m, dir.join(format!("{name}.mtx")))?;
    }
    for (name, v) in [("b_m", &sys.b_m), ("b_s", &sys.b_s), ("b_f", &sys.b_f)] {
        write_matrix_market(&column_matrix(v), dir.join(format!("{name}.mtx")))?;
    }

    let mut f = std::fs::File::create(dir.join(MANIFEST_NAME))?;
    writeln!(f, "format={FORMAT_TAG}")?;
    writeln!(f, "n_m={n_m}")?;
    writeln!(f, "n_s={n_s}")?;
    writeln!(f, "n_f={n_f}")?;
    writeln!(f, "gamma_m={}", range_to_string(&sys.interface_maps.mesh_gamma))?;
    writeln!(f, "gamma_s={}", range_to_string(&sys.interface_maps.structure_gamma))?;
    writeln!(f, "gamma_f={}", range_to_string(&sys.interface_maps.fluid_velocity_gamma))?;
    for (k, v) in context {
        writeln!(f, "{k}={v}")?;
    }
    Ok(())
}

fn column_matrix(v: &[f64]) -> SparseMatrix {
    let triplets: Vec<(usize, usize, f64)> = v
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, 0, x))
        .collect();
    SparseMatrix::from_triplets(v.len(), 1, &triplets)
}

fn column_vector(m: &SparseMatrix, name: &str) -> Result<Vec<f64>> {
    if m.ncols() != 1 {
        return Err(Error::InvalidConfig(format!(
            "{name} must be a column vector, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut v = vec![0.0; m.nrows()];
    for (i, _, val) in m.iter() {
        v[i] = val;
    }
    Ok(v)
}

/// Parses a manifest file into an ordered key-value map.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("manifest line {} is not key=value: {line}", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// The result of importing a snapshot.
pub struct ImportedSystem {
    pub system: FsiBlockSystem,
    pub manifest: BTreeMap<String, String>,
    /// One entry per coupling block that was absent and replaced by zero.
    pub warnings: Vec<String>,
}

pub fn import_system(dir: impl AsRef<Path>) -> Result<ImportedSystem> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir.join(MANIFEST_NAME))?;
    if manifest.get("format").map(String::as_str) != Some(FORMAT_TAG) {
        return Err(Error::InvalidConfig(format!(
            "manifest missing or wrong format tag (expected {FORMAT_TAG})"
        )));
    }
    let dim = |key: &str| -> Result<usize> {
        manifest
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::InvalidConfig(format!("manifest missing integer key {key}")))
    };
    let n_m = dim("n_m")?;
    let n_s = dim("n_s")?;
    let n_f = dim("n_f")?;
    let gamma = |key: &str| -> Result<Range<usize>> {
        parse_range(
            manifest
                .get(key)
                .ok_or_else(|| Error::InvalidConfig(format!("manifest missing key {key}")))?,
        )
    };

    let expected: BTreeMap<&str, (usize, usize)> = BTreeMap::from([
        ("a_m", (n_m, n_m)),
        ("a_ms", (n_m, n_s)),
        ("a_s", (n_s, n_s)),
        ("a_sf", (n_s, n_f)),
        ("a_fm", (n_f, n_m)),
        ("a_fs", (n_f, n_s)),
        ("a_f", (n_f, n_f)),
    ]);
    let mut warnings = Vec::new();
    let mut load = |name: &str| -> Result<SparseMatrix> {
        let path = dir.join(format!("{name}.mtx"));
        let (er, ec) = expected[name];
        if !path.exists() {
            if COUPLING_BLOCKS.contains(&name) {
                warnings.push(format!("{name}.mtx absent; treating the block as zero"));
                return Ok(SparseMatrix::zeros(er, ec));
            }
            return Err(Error::InvalidConfig(format!(
                "required block file {name}.mtx is missing"
            )));
        }
        let m = read_matrix_market(&path)?;
        if (m.nrows(), m.ncols()) != (er, ec) {
            return Err(crate::error::dim_mismatch(
                "import_system",
                format!("{name} is {}x{}, manifest says {er}x{ec}", m.nrows(), m.ncols()),
            ));
        }
        Ok(m)
    };

    let a_m = load("a_m")?;
    let a_ms = load("a_ms")?;
    let a_s = load("a_s")?;
    let a_sf = load("a_sf")?;
    let a_fm = load("a_fm")?;
    let a_fs = load("a_fs")?;
    let a_f = load("a_f")?;

    let mut rhs = Vec::new();
    for (name, n) in RHS_BLOCKS.iter().zip([n_m, n_s, n_f]) {
        let path = dir.join(format!("{name}.mtx"));
        if !path.exists() {
            return Err(Error::InvalidConfig(format!(
                "required right-hand-side file {name}.mtx is missing"
            )));
        }
        let m = read_matrix_market(&path)?;
        if m.nrows() != n {
            return Err(crate::error::dim_mismatch(
                "import_system",
                format!("{name} has length {}, manifest says {n}", m.nrows()),
            ));
        }
        rhs.push(column_vector(&m, name)?);
    }
    let b_f = rhs.pop().expect("three rhs segments");
    let b_s = rhs.pop().expect("three rhs segments");
    let b_m = rhs.pop().expect("three rhs segments");

    let system = FsiBlockSystem {
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
            mesh_gamma: gamma("gamma_m")?,
            structure_gamma: gamma("gamma_s")?,
            fluid_velocity_gamma: gamma("gamma_f")?,
        },
    };
    system.validate()?;
    Ok(ImportedSystem {
        system,
        manifest,
        warnings,
    })
}
