//! Sweep execution: generate systems, build preconditioners, solve, and
//! collect iteration counts per cell. Systems are cached per
//! (level, dt, density); a failing cell is recorded and the run continues.

use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use fsi_core::baseline::{build_baseline, BaselineKind};
use fsi_core::krylov::{fgmres, gmres, IdentityOperator, KrylovConfig, LinearOperator, SolveReport};
use fsi_core::ldu::{build_exact_ldu_reference, build_ldu_with_options, LduOptions};
use fsi_core::problem::{generate_compact, FsiParameters, GeneratorOptions};
use fsi_core::system::FsiBlockSystem;

use crate::config::{ExperimentConfig, PrecondKind, SolverKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellResult {
    Iterations(usize),
    /// Solver hit the iteration cap without converging.
    MaxItExceeded,
    /// Build or solve failed outright.
    Failed(String),
}

impl CellResult {
    pub fn display(&self, maxit: usize) -> String {
        match self {
            Self::Iterations(n) => n.to_string(),
            Self::MaxItExceeded => format!(">{maxit}"),
            Self::Failed(msg) => format!("error: {msg}"),
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Self::Iterations(_))
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub precond: PrecondKind,
    pub solver: SolverKind,
    /// One cell per (density, level), density-major.
    pub cells: Vec<CellResult>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub dt_ms: f64,
    pub densities: Vec<f64>,
    pub levels: Vec<usize>,
    pub max_iterations: usize,
    pub rows: Vec<TableRow>,
}

impl ResultTable {
    pub fn all_converged(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.cells.iter().all(CellResult::is_success))
    }
}

/// Runs every (dt, precond, solver, density, level) combination.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>, String> {
    cfg.validate().map_err(|e| e.to_string())?;
    let mut cache: HashMap<(usize, u64, u64), Rc<FsiBlockSystem>> = HashMap::new();
    let gen_opts = GeneratorOptions {
        rhs: cfg.rhs.clone(),
        oseen_wind: cfg.oseen_wind,
    };
    let krylov = KrylovConfig {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        restart: cfg.restart,
    };

    let mut tables = Vec::new();
    for &dt_ms in &cfg.dts_ms {
        let dt = dt_ms * 1e-3;
        let mut rows = Vec::new();
        for &precond in &cfg.preconds {
            for &solver in &cfg.solvers {
                let mut cells = Vec::new();
                let mut times = Vec::new();
                for &rho in &cfg.densities {
                    for &level in &cfg.levels {
                        let start = Instant::now();
                        let key = (level, dt.to_bits(), rho.to_bits());
                        let sys = match cache.get(&key) {
                            Some(s) => Rc::clone(s),
                            None => {
                                let params = FsiParameters {
                                    rho_f: rho,
                                    dt,
                                    ..Default::default()
                                };
                                match generate_compact(level, &params, &gen_opts) {
                                    Ok(s) => {
                                        let rc = Rc::new(s);
                                        cache.insert(key, Rc::clone(&rc));
                                        rc
                                    }
                                    Err(e) => {
                                        cells.push(CellResult::Failed(e.to_string()));
                                        times.push(start.elapsed().as_secs_f64());
                                        continue;
                                    }
                                }
                            }
                        };
                        let cell = solve_cell(&sys, precond, solver, cfg, &krylov);
                        cells.push(cell);
                        times.push(start.elapsed().as_secs_f64());
                    }
                }
                rows.push(TableRow {
                    precond,
                    solver,
                    cells,
                    times,
                });
            }
        }
        tables.push(ResultTable {
            dt_ms,
            densities: cfg.densities.clone(),
            levels: cfg.levels.clone(),
            max_iterations: cfg.max_iterations,
            rows,
        });
    }
    Ok(tables)
}

/// Builds the requested preconditioner and runs one solve.
pub fn solve_cell(
    sys: &FsiBlockSystem,
    precond: PrecondKind,
    solver: SolverKind,
    cfg: &ExperimentConfig,
    krylov: &KrylovConfig,
) -> CellResult {
    match solve_cell_report(sys, precond, solver, cfg, krylov) {
        Ok(rep) => {
            if rep.converged {
                CellResult::Iterations(rep.iterations)
            } else {
                CellResult::MaxItExceeded
            }
        }
        Err(msg) => CellResult::Failed(msg),
    }
}

pub fn solve_cell_report(
    sys: &FsiBlockSystem,
    precond: PrecondKind,
    solver: SolverKind,
    cfg: &ExperimentConfig,
    krylov: &KrylovConfig,
) -> Result<SolveReport, String> {
    let k = sys.assemble_monolithic().map_err(|e| e.to_string())?;
    let b = sys.rhs();
    let apply_m: Box<dyn LinearOperator> = match precond {
        PrecondKind::None => Box::new(IdentityOperator(sys.total_dim())),
        PrecondKind::Ldu => Box::new(
            build_ldu_with_options(
                sys,
                &cfg.inner_m,
                &cfg.inner_s,
                &cfg.inner_schur,
                &LduOptions {
                    drop_mesh_coupling: cfg.drop_mesh_coupling,
                },
            )
            .map_err(|e| e.to_string())?,
        ),
        PrecondKind::LduExact => {
            Box::new(build_exact_ldu_reference(sys).map_err(|e| e.to_string())?)
        }
        PrecondKind::BlockDiagonal
        | PrecondKind::BlockLower
        | PrecondKind::BlockUpper
        | PrecondKind::BlockSsor
        | PrecondKind::MonolithicIlu => {
            let kind = match precond {
                PrecondKind::BlockDiagonal => BaselineKind::Diagonal,
                PrecondKind::BlockLower => BaselineKind::Lower,
                PrecondKind::BlockUpper => BaselineKind::Upper,
                PrecondKind::BlockSsor => BaselineKind::Ssor,
                _ => BaselineKind::Ilu,
            };
            Box::new(
                build_baseline(sys, kind, &cfg.inner_m, &cfg.inner_s, &cfg.inner_schur)
                    .map_err(|e| e.to_string())?,
            )
        }
    };
    let result = match solver {
        SolverKind::Gmres => gmres(&k, apply_m.as_ref(), &b, None, krylov),
        SolverKind::Fgmres => fgmres(&k, apply_m.as_ref(), &b, None, krylov),
    };
    result.map(|(_, rep)| rep).map_err(|e| e.to_string())
}
