//! Experiment harness library behind the `fsi` binary.

pub mod config;
pub mod experiment;
pub mod table;

use std::io::Write;
use std::path::PathBuf;

use fsi_core::export::{export_system, export_system_with_monolithic, import_system};
use fsi_core::krylov::KrylovConfig;
use fsi_core::problem::{generate_compact, FsiParameters, GeneratorOptions};
use fsi_core::system::FsiBlockSystem;

use config::{ConfigError, ConfigMap, ExperimentConfig, OutputFormat};
use experiment::{run_experiment, solve_cell_report};

const USAGE: &str = "usage: fsi <command> [flags]

commands:
  generate      build one system and print its block summary
  solve         build one system, precondition and solve it
  sweep         run a parameter sweep and emit an iteration-count table
  export        write a system snapshot (Matrix Market blocks + manifest)
  import-solve  read a snapshot directory and solve it

flags (command-dependent):
  --config <path>      key=value configuration file (flags override it)
  --levels <list>      mesh levels, e.g. 0,1,2
  --level <n>          single mesh level (generate/solve/export)
  --densities <list>   fluid densities in g/cm^3
  --rho <x>            single density (generate/solve/export)
  --dts <list>         time steps in ms
  --dt-ms <x>          single time step in ms (generate/solve/export)
  --precond <list>     ldu | ldu_exact | p_d | p_l | p_u | p_ssor | p_ilu | none
  --solver <list>      gmres | fgmres
  --inner-m <spec>     exact_lu | jacobi | gauss_seidel | ilu0 | amg | inner_gmres
  --inner-s <spec>     inner solver for the structure block
  --inner-schur <spec> inner solver for the Schur complement (A_f for baselines)
  --tol <x>            relative residual reduction (default 1e-10)
  --maxit <n>          iteration cap (default 250)
  --restart <n|none>   GMRES restart length (default none)
  --format <fmt>       csv | markdown (default markdown)
  --out <path>         output file (sweep) or directory (generate/export)
  --dir <path>         snapshot directory (import-solve)
  --seed <n>           seed for randomized right-hand sides
  --rhs <mode>         inflow | manufactured | random
  --oseen              add the frozen-wind convection term
  --timings            include wall-clock columns / lines
  --monolithic         also export the assembled matrix (k.mtx, b.mtx)
  --drop-mesh-coupling cheaper Schur approximation (ablation only)

exit codes: 0 success, 1 configuration error, 2 at least one unconverged cell";

pub fn dispatch(args: &[String]) -> i32 {
    match dispatch_inner(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch_inner(args: &[String]) -> Result<i32, ConfigError> {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return Ok(1);
    };
    let rest = &args[1..];
    match command.as_str() {
        "generate" => cmd_generate(rest),
        "solve" => cmd_solve(rest),
        "sweep" => cmd_sweep(rest),
        "export" => cmd_export(rest),
        "import-solve" => cmd_import_solve(rest),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(0)
        }
        other => Err(ConfigError(format!(
            "unknown command '{other}'; run `fsi help` for usage"
        ))),
    }
}

struct ParsedFlags {
    map: ConfigMap,
    out: Option<PathBuf>,
    dir: Option<PathBuf>,
    monolithic: bool,
}

/// Folds flags into the same key space as the config file.
fn parse_flags(args: &[String]) -> Result<ParsedFlags, ConfigError> {
    let mut out = None;
    let mut dir = None;
    let mut monolithic = false;
    let mut config_path: Option<PathBuf> = None;
    let mut overrides: Vec<(&'static str, String)> = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let mut take_value = |name: &str| -> Result<String, ConfigError> {
            it.next()
                .cloned()
                .ok_or_else(|| ConfigError(format!("flag {name} needs a value")))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(take_value("--config")?)),
            "--levels" => overrides.push(("sweep.levels", take_value("--levels")?)),
            "--level" => overrides.push(("sweep.levels", take_value("--level")?)),
            "--densities" => overrides.push(("sweep.densities", take_value("--densities")?)),
            "--rho" => overrides.push(("sweep.densities", take_value("--rho")?)),
            "--dts" => overrides.push(("sweep.dts_ms", take_value("--dts")?)),
            "--dt-ms" => overrides.push(("sweep.dts_ms", take_value("--dt-ms")?)),
            "--precond" => overrides.push(("precond.kind", take_value("--precond")?)),
            "--solver" => overrides.push(("solver.kind", take_value("--solver")?)),
            "--inner-m" => overrides.push(("precond.inner_m", take_value("--inner-m")?)),
            "--inner-s" => overrides.push(("precond.inner_s", take_value("--inner-s")?)),
            "--inner-schur" => overrides.push(("precond.inner_schur", take_value("--inner-schur")?)),
            "--tol" => overrides.push(("solver.tol", take_value("--tol")?)),
            "--maxit" => overrides.push(("solver.maxit", take_value("--maxit")?)),
            "--restart" => overrides.push(("solver.restart", take_value("--restart")?)),
            "--format" => overrides.push(("output.format", take_value("--format")?)),
            "--seed" => overrides.push(("output.seed", take_value("--seed")?)),
            "--rhs" => overrides.push(("output.rhs", take_value("--rhs")?)),
            "--timings" => overrides.push(("output.timings", "true".into())),
            "--oseen" => overrides.push(("sweep.oseen_wind", "true".into())),
            "--drop-mesh-coupling" => {
                overrides.push(("precond.drop_mesh_coupling", "true".into()))
            }
            "--out" => out = Some(PathBuf::from(take_value("--out")?)),
            "--dir" => dir = Some(PathBuf::from(take_value("--dir")?)),
            "--monolithic" => monolithic = true,
            other => {
                return Err(ConfigError(format!(
                    "unknown flag '{other}'; run `fsi help` for usage"
                )))
            }
        }
    }
    let mut map = match config_path {
        Some(path) => ConfigMap::from_file(&path)?,
        None => ConfigMap::empty(),
    };
    for (k, v) in overrides {
        map.set(k, v);
    }
    Ok(ParsedFlags {
        map,
        out,
        dir,
        monolithic,
    })
}

/// Single-cell commands reuse the sweep axes but insist they are singletons.
fn single_cell(cfg: &ExperimentConfig) -> Result<(usize, f64, f64), ConfigError> {
    match (cfg.levels.as_slice(), cfg.densities.as_slice(), cfg.dts_ms.as_slice()) {
        ([level], [rho], [dt_ms]) => Ok((*level, *rho, *dt_ms)),
        _ => Err(ConfigError(
            "this command takes exactly one --level, --rho and --dt-ms".into(),
        )),
    }
}

fn single_cell_defaults(map: &mut ConfigMap) {
    map.set_default("sweep.levels", "0");
    map.set_default("sweep.densities", "1.1");
    map.set_default("sweep.dts_ms", "0.125");
}

fn build_cell_system(
    cfg: &ExperimentConfig,
    level: usize,
    rho: f64,
    dt_ms: f64,
) -> Result<FsiBlockSystem, ConfigError> {
    let params = FsiParameters {
        rho_f: rho,
        dt: dt_ms * 1e-3,
        ..Default::default()
    };
    let opts = GeneratorOptions {
        rhs: cfg.rhs.clone(),
        oseen_wind: cfg.oseen_wind,
    };
    generate_compact(level, &params, &opts).map_err(|e| ConfigError(e.to_string()))
}

fn system_summary(sys: &FsiBlockSystem, level: usize, rho: f64, dt_ms: f64) -> String {
    let (n_m, n_s, n_f) = sys.dims();
    let maps = &sys.interface_maps;
    let mut s = String::new();
    s.push_str(&format!("level={level}\n"));
    s.push_str(&format!("rho_f={rho}\n"));
    s.push_str(&format!("dt_ms={dt_ms}\n"));
    s.push_str(&format!("n_m={n_m}\nn_s={n_s}\nn_f={n_f}\n"));
    s.push_str(&format!("total={}\n", sys.total_dim()));
    s.push_str(&format!(
        "gamma_m={}..{}\ngamma_s={}..{}\ngamma_f={}..{}\n",
        maps.mesh_gamma.start,
        maps.mesh_gamma.end,
        maps.structure_gamma.start,
        maps.structure_gamma.end,
        maps.fluid_velocity_gamma.start,
        maps.fluid_velocity_gamma.end
    ));
    for (name, m) in [
        ("a_m", &sys.a_m),
        ("a_ms", &sys.a_ms),
        ("a_s", &sys.a_s),
        ("a_sf", &sys.a_sf),
        ("a_fm", &sys.a_fm),
        ("a_fs", &sys.a_fs),
        ("a_f", &sys.a_f),
    ] {
        s.push_str(&format!("nnz_{name}={}\n", m.nnz()));
    }
    s
}

fn write_snapshot(
    sys: &FsiBlockSystem,
    dir: &PathBuf,
    level: usize,
    rho: f64,
    dt_ms: f64,
    seed: u64,
    monolithic: bool,
) -> Result<(), ConfigError> {
    let context = vec![
        ("level".to_string(), level.to_string()),
        ("rho_f".to_string(), format!("{rho}")),
        ("dt_ms".to_string(), format!("{dt_ms}")),
        ("seed".to_string(), seed.to_string()),
    ];
    if monolithic {
        export_system_with_monolithic(sys, dir, &context).map_err(|e| ConfigError(e.to_string()))
    } else {
        export_system(sys, dir, &context).map_err(|e| ConfigError(e.to_string()))
    }
}

fn cmd_generate(args: &[String]) -> Result<i32, ConfigError> {
    let mut flags = parse_flags(args)?;
    single_cell_defaults(&mut flags.map);
    let cfg = flags.map.build()?;
    let (level, rho, dt_ms) = single_cell(&cfg)?;
    let sys = build_cell_system(&cfg, level, rho, dt_ms)?;
    print!("{}", system_summary(&sys, level, rho, dt_ms));
    if let Some(dir) = flags.out {
        write_snapshot(&sys, &dir, level, rho, dt_ms, cfg.seed, flags.monolithic)?;
        println!("written={}", dir.display());
    }
    Ok(0)
}

fn cmd_export(args: &[String]) -> Result<i32, ConfigError> {
    let mut flags = parse_flags(args)?;
    single_cell_defaults(&mut flags.map);
    let cfg = flags.map.build()?;
    let (level, rho, dt_ms) = single_cell(&cfg)?;
    let out = flags
        .out
        .ok_or_else(|| ConfigError("export needs --out <directory>".into()))?;
    let sys = build_cell_system(&cfg, level, rho, dt_ms)?;
    write_snapshot(&sys, &out, level, rho, dt_ms, cfg.seed, flags.monolithic)?;
    println!("written={}", out.display());
    Ok(0)
}

fn solve_one(cfg: &ExperimentConfig, sys: &FsiBlockSystem) -> Result<i32, ConfigError> {
    let precond = match cfg.preconds.as_slice() {
        [one] => *one,
        _ => return Err(ConfigError("solve takes exactly one --precond".into())),
    };
    let solver = match cfg.solvers.as_slice() {
        [one] => *one,
        _ => return Err(ConfigError("solve takes exactly one --solver".into())),
    };
    let krylov = KrylovConfig {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        restart: cfg.restart,
    };
    let rep = solve_cell_report(sys, precond, solver, cfg, &krylov).map_err(ConfigError)?;
    println!("iterations={}", rep.iterations);
    println!("converged={}", rep.converged);
    println!("final_relative_residual={:.6e}", rep.final_relative_residual);
    if cfg.timings {
        println!("wall_time_s={:.3}", rep.wall_time);
    }
    Ok(if rep.converged { 0 } else { 2 })
}

fn cmd_solve(args: &[String]) -> Result<i32, ConfigError> {
    let mut flags = parse_flags(args)?;
    single_cell_defaults(&mut flags.map);
    flags.map.set_default("solver.kind", "gmres");
    let cfg = flags.map.build()?;
    let (level, rho, dt_ms) = single_cell(&cfg)?;
    let sys = build_cell_system(&cfg, level, rho, dt_ms)?;
    solve_one(&cfg, &sys)
}

fn cmd_import_solve(args: &[String]) -> Result<i32, ConfigError> {
    let mut flags = parse_flags(args)?;
    flags.map.set_default("solver.kind", "gmres");
    let cfg = flags.map.build()?;
    let dir = flags
        .dir
        .or(flags.out)
        .ok_or_else(|| ConfigError("import-solve needs --dir <directory>".into()))?;
    let imported = import_system(&dir).map_err(|e| ConfigError(e.to_string()))?;
    for w in &imported.warnings {
        eprintln!("warning: {w}");
    }
    solve_one(&cfg, &imported.system)
}

fn cmd_sweep(args: &[String]) -> Result<i32, ConfigError> {
    let flags = parse_flags(args)?;
    let cfg = flags.map.build()?;
    let tables = run_experiment(&cfg).map_err(ConfigError)?;
    let mut text = String::new();
    for t in &tables {
        match cfg.format {
            OutputFormat::Markdown => {
                text.push_str(&table::emit_markdown(t, cfg.timings));
                text.push('\n');
            }
            OutputFormat::Csv => text.push_str(&table::emit_csv(t, cfg.timings)),
        }
    }
    match flags.out {
        Some(path) => {
            let mut f = std::fs::File::create(&path)
                .map_err(|e| ConfigError(format!("cannot create {path:?}: {e}")))?;
            f.write_all(text.as_bytes())
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        None => print!("{text}"),
    }
    let ok = tables.iter().all(|t| t.all_converged());
    Ok(if ok { 0 } else { 2 })
}
