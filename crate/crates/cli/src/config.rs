//! Experiment configuration: plain-text key=value files with section
//! headers, overridden by command-line flags.
//!
//! Grammar (one statement per line):
//!   [section]            sections: sweep, solver, precond, output
//!   key = value          keys are case-insensitive; '#' starts a comment
//!
//! Lists are comma-separated. See the repository README for every key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use fsi_core::inner::{AmgConfig, InnerSolverSpec};
use fsi_core::problem::RhsMode;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Gmres,
    Fgmres,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gmres => "gmres",
            Self::Fgmres => "fgmres",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "gmres" => Ok(Self::Gmres),
            "fgmres" => Ok(Self::Fgmres),
            other => err(format!("unknown solver '{other}' (expected gmres or fgmres)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    Ldu,
    LduExact,
    BlockDiagonal,
    BlockLower,
    BlockUpper,
    BlockSsor,
    MonolithicIlu,
    None,
}

impl PrecondKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ldu => "ldu",
            Self::LduExact => "ldu_exact",
            Self::BlockDiagonal => "p_d",
            Self::BlockLower => "p_l",
            Self::BlockUpper => "p_u",
            Self::BlockSsor => "p_ssor",
            Self::MonolithicIlu => "p_ilu",
            Self::None => "none",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "ldu" => Ok(Self::Ldu),
            "ldu_exact" => Ok(Self::LduExact),
            "p_d" => Ok(Self::BlockDiagonal),
            "p_l" => Ok(Self::BlockLower),
            "p_u" => Ok(Self::BlockUpper),
            "p_ssor" => Ok(Self::BlockSsor),
            "p_ilu" => Ok(Self::MonolithicIlu),
            "none" => Ok(Self::None),
            other => err(format!(
                "unknown preconditioner '{other}' (expected ldu, ldu_exact, p_d, p_l, p_u, p_ssor, p_ilu or none)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => err(format!("unknown format '{other}' (expected csv or markdown)")),
        }
    }
}

/// Tunables shared by every inner-solver spec string.
#[derive(Debug, Clone)]
pub struct InnerTuning {
    pub sweeps: usize,
    pub damping: f64,
    pub inner_iters: usize,
    pub amg: AmgConfig,
}

impl Default for InnerTuning {
    fn default() -> Self {
        Self {
            sweeps: 2,
            damping: 0.67,
            inner_iters: 5,
            amg: AmgConfig::default(),
        }
    }
}

pub fn parse_inner_spec(s: &str, tuning: &InnerTuning) -> Result<InnerSolverSpec, ConfigError> {
    match s {
        "exact_lu" => Ok(InnerSolverSpec::ExactLu),
        "jacobi" => Ok(InnerSolverSpec::JacobiSweeps {
            sweeps: tuning.sweeps,
            damping: tuning.damping,
        }),
        "gauss_seidel" => Ok(InnerSolverSpec::GaussSeidelSweeps {
            sweeps: tuning.sweeps,
        }),
        "ilu0" => Ok(InnerSolverSpec::Ilu0),
        "amg" => Ok(InnerSolverSpec::AmgVcycle(tuning.amg.clone())),
        "inner_gmres" => Ok(InnerSolverSpec::InnerGmres {
            iterations: tuning.inner_iters,
        }),
        other => err(format!(
            "unknown inner solver '{other}' (expected exact_lu, jacobi, gauss_seidel, ilu0, amg or inner_gmres)"
        )),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub levels: Vec<usize>,
    pub densities: Vec<f64>,
    pub dts_ms: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub preconds: Vec<PrecondKind>,
    pub inner_m: InnerSolverSpec,
    pub inner_s: InnerSolverSpec,
    pub inner_schur: InnerSolverSpec,
    pub drop_mesh_coupling: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: Option<usize>,
    pub format: OutputFormat,
    pub seed: u64,
    pub rhs: RhsMode,
    pub oseen_wind: bool,
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        // The default experiment mirrors the dt = 0.125 ms density sweep
        // over all three mesh levels with both outer solvers.
        Self {
            levels: vec![0, 1, 2],
            densities: fsi_core::problem::density_values(1.1),
            dts_ms: vec![0.125],
            solvers: vec![SolverKind::Gmres, SolverKind::Fgmres],
            preconds: vec![PrecondKind::Ldu],
            inner_m: InnerSolverSpec::amg_default(),
            inner_s: InnerSolverSpec::amg_default(),
            inner_schur: InnerSolverSpec::amg_default(),
            drop_mesh_coupling: false,
            tolerance: 1e-10,
            max_iterations: 250,
            restart: None,
            format: OutputFormat::Markdown,
            seed: 0,
            rhs: RhsMode::InflowResidual,
            oseen_wind: false,
            timings: false,
        }
    }
}

impl ExperimentConfig {
    /// Rejects combinations that cannot run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels.is_empty() || self.densities.is_empty() || self.dts_ms.is_empty() {
            return err("sweep axes must be non-empty");
        }
        for &l in &self.levels {
            if l > 6 {
                return err(format!("mesh level {l} out of range (0..=6)"));
            }
        }
        for &d in &self.densities {
            if d.is_nan() || d <= 0.0 {
                return err(format!("density {d} must be positive"));
            }
        }
        for &dt in &self.dts_ms {
            if dt.is_nan() || dt <= 0.0 {
                return err(format!("time step {dt} ms must be positive"));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return err(format!("tolerance {} must lie in (0,1)", self.tolerance));
        }
        if self.max_iterations == 0 {
            return err("maxit must be at least 1");
        }
        let nonlinear = !self.inner_m.is_linear()
            || !self.inner_s.is_linear()
            || !self.inner_schur.is_linear();
        if nonlinear && self.solvers.contains(&SolverKind::Gmres) {
            return err(
                "inner_gmres is a nonlinear preconditioner and requires the flexible outer \
                 solver; use --solver fgmres or a linear inner solver",
            );
        }
        Ok(())
    }
}

/// Raw section.key -> value map.
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn empty() -> Self {
        Self(BTreeMap::new())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ConfigError(format!("cannot read config {:?}: {e}", path.as_ref())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {}: unterminated section", lineno + 1)))?;
                section = name.trim().to_lowercase();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            let key = if section.is_empty() {
                k.trim().to_lowercase()
            } else {
                format!("{section}.{}", k.trim().to_lowercase())
            };
            map.insert(key, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.0.insert(key.to_string(), value);
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.0.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Builds the experiment configuration, starting from defaults.
    pub fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(v) = self.get("sweep.levels") {
            cfg.levels = parse_list(v, parse_usize)?;
        }
        if let Some(v) = self.get("sweep.densities") {
            cfg.densities = parse_list(v, parse_f64)?;
        }
        if let Some(v) = self.get("sweep.dts_ms") {
            cfg.dts_ms = parse_list(v, parse_f64)?;
        }
        if let Some(v) = self.get("solver.kind") {
            cfg.solvers = parse_list(v, SolverKind::parse)?;
        }
        if let Some(v) = self.get("solver.tol") {
            cfg.tolerance = parse_f64(v)?;
        }
        if let Some(v) = self.get("solver.maxit") {
            cfg.max_iterations = parse_usize(v)?;
        }
        if let Some(v) = self.get("solver.restart") {
            cfg.restart = if v == "none" { None } else { Some(parse_usize(v)?) };
        }

        let mut tuning = InnerTuning::default();
        if let Some(v) = self.get("precond.sweeps") {
            tuning.sweeps = parse_usize(v)?;
        }
        if let Some(v) = self.get("precond.damping") {
            tuning.damping = parse_f64(v)?;
        }
        if let Some(v) = self.get("precond.inner_iters") {
            tuning.inner_iters = parse_usize(v)?;
        }
        if let Some(v) = self.get("precond.amg_theta") {
            tuning.amg.strength_threshold = parse_f64(v)?;
        }
        if let Some(v) = self.get("precond.amg_coarsest_size") {
            tuning.amg.coarsest_size = parse_usize(v)?;
        }
        if let Some(v) = self.get("precond.amg_pre_sweeps") {
            tuning.amg.pre_sweeps = parse_usize(v)?;
        }
        if let Some(v) = self.get("precond.amg_post_sweeps") {
            tuning.amg.post_sweeps = parse_usize(v)?;
        }
        if let Some(v) = self.get("precond.amg_smoothed") {
            tuning.amg.smoothed_prolongation = parse_bool(v)?;
        }
        if let Some(v) = self.get("precond.kind") {
            cfg.preconds = parse_list(v, PrecondKind::parse)?;
        }
        if let Some(v) = self.get("precond.inner_m") {
            cfg.inner_m = parse_inner_spec(v, &tuning)?;
        }
        if let Some(v) = self.get("precond.inner_s") {
            cfg.inner_s = parse_inner_spec(v, &tuning)?;
        }
        if let Some(v) = self.get("precond.inner_schur") {
            cfg.inner_schur = parse_inner_spec(v, &tuning)?;
        }
        if let Some(v) = self.get("precond.drop_mesh_coupling") {
            cfg.drop_mesh_coupling = parse_bool(v)?;
        }

        if let Some(v) = self.get("output.format") {
            cfg.format = OutputFormat::parse(v)?;
        }
        if let Some(v) = self.get("output.seed") {
            cfg.seed = parse_u64(v)?;
        }
        if let Some(v) = self.get("output.rhs") {
            cfg.rhs = parse_rhs(v, self.get("output.seed"))?;
        }
        if let Some(v) = self.get("output.timings") {
            cfg.timings = parse_bool(v)?;
        }
        if let Some(v) = self.get("sweep.oseen_wind") {
            cfg.oseen_wind = parse_bool(v)?;
        }
        // Random right-hand sides take the seed even when rhs was set first.
        if let RhsMode::Random(_) = cfg.rhs {
            cfg.rhs = RhsMode::Random(cfg.seed);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_rhs(v: &str, _seed: Option<&str>) -> Result<RhsMode, ConfigError> {
    match v {
        "inflow" => Ok(RhsMode::InflowResidual),
        "manufactured" => Ok(RhsMode::Manufactured),
        "random" => Ok(RhsMode::Random(0)),
        other => err(format!(
            "unknown rhs mode '{other}' (expected inflow, manufactured or random)"
        )),
    }
}

pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(item)
        .collect()
}

pub fn parse_usize(s: &str) -> Result<usize, ConfigError> {
    s.parse().map_err(|_| ConfigError(format!("expected an integer, got '{s}'")))
}

pub fn parse_u64(s: &str) -> Result<u64, ConfigError> {
    s.parse().map_err(|_| ConfigError(format!("expected an integer, got '{s}'")))
}

pub fn parse_f64(s: &str) -> Result<f64, ConfigError> {
    s.parse().map_err(|_| ConfigError(format!("expected a number, got '{s}'")))
}

pub fn parse_bool(s: &str) -> Result<bool, ConfigError> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => err(format!("expected a boolean, got '{other}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_reference_sweep() {
        let cfg = ConfigMap::empty().build().unwrap();
        assert_eq!(cfg.levels, vec![0, 1, 2]);
        assert_eq!(cfg.densities.len(), 5);
        assert_eq!(cfg.dts_ms, vec![0.125]);
        assert_eq!(cfg.solvers, vec![SolverKind::Gmres, SolverKind::Fgmres]);
        assert_eq!(cfg.preconds, vec![PrecondKind::Ldu]);
    }

    #[test]
    fn file_sections_and_overrides() {
        let text = "
[sweep]
levels = 0,1
densities = 1.1, 0.11
dts_ms = 0.125
[solver]
kind = gmres
tol = 1e-8
maxit = 99
[precond]
kind = p_d, ldu
inner_m = ilu0
[output]
format = csv
seed = 7
";
        let mut map = ConfigMap::parse(text).unwrap();
        map.set("solver.maxit", "50".into());
        let cfg = map.build().unwrap();
        assert_eq!(cfg.levels, vec![0, 1]);
        assert_eq!(cfg.densities, vec![1.1, 0.11]);
        assert_eq!(cfg.max_iterations, 50);
        assert_eq!(cfg.tolerance, 1e-8);
        assert_eq!(
            cfg.preconds,
            vec![PrecondKind::BlockDiagonal, PrecondKind::Ldu]
        );
        assert_eq!(cfg.inner_m, fsi_core::inner::InnerSolverSpec::Ilu0);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn nonlinear_inner_with_gmres_is_rejected() {
        let text = "
[solver]
kind = gmres
[precond]
inner_schur = inner_gmres
";
        let map = ConfigMap::parse(text).unwrap();
        let e = map.build().unwrap_err();
        assert!(e.0.contains("fgmres"), "message should point at the fix: {e}");
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(ConfigMap::parse("[sweep\nlevels=0").is_err());
        assert!(ConfigMap::parse("levels 0").is_err());
        let map = ConfigMap::parse("[sweep]\nlevels = x").unwrap();
        assert!(map.build().is_err());
    }
}
