//! Batch front end: load a run configuration, solve, and emit trajectory
//! files and verification reports.
//!
//! Exit codes: 0 success, 1 configuration error, 2 collision detected
//! (partial output retained), 3 verification failure.

use crate::config::RunConfig;
use crate::exact::{self, SolveError};
use crate::oracle;
use crate::traj::{write_csv, write_jsonl, Trajectory};
use crate::verify::{self, MetricSpec, Suite};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_COLLISION: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Environment variable overriding the directory trajectory and report
/// files are written into.
pub const OUTPUT_DIR_ENV: &str = "SPIN_CM_OUTPUT_DIR";

fn output_path(stem: &str, suffix: &str, ext: &str) -> PathBuf {
    let file = format!("{stem}{suffix}.{ext}");
    match std::env::var(OUTPUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => Path::new(&dir).join(file),
        _ => PathBuf::from(file),
    }
}

fn write_trajectory(
    traj: &Trajectory,
    cfg: &RunConfig,
    hash: &str,
    suffix: &str,
    n: usize,
    spin_count: usize,
) -> Result<PathBuf, String> {
    let path = output_path(&cfg.output.path, suffix, &cfg.output.format);
    let mut buf = Vec::new();
    match cfg.output.format.as_str() {
        "jsonl" => write_jsonl(&mut buf, traj, hash).map_err(|e| e.to_string())?,
        _ => write_csv(&mut buf, traj, hash, n, spin_count).map_err(|e| e.to_string())?,
    }
    fs::write(&path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

/// `run <config>`: solve and write trajectory files.
pub fn run(config_path: &str) -> i32 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {config_path}: {e}");
            return EXIT_CONFIG;
        }
    };
    let hash = hex_digest(&text);
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return EXIT_CONFIG;
        }
    };
    let system = match cfg.system_config() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid system: {e}");
            return EXIT_CONFIG;
        }
    };
    let times = match cfg.output_times() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: invalid output grid: {e}");
            return EXIT_CONFIG;
        }
    };
    let settings = match cfg.integrator_settings() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid integrator settings: {e}");
            return EXIT_CONFIG;
        }
    };

    let n = system.n();
    let spin_count = system.ansatz.spin_count();
    let mut exit = EXIT_OK;
    let mut exact_traj: Option<Trajectory> = None;
    if matches!(cfg.solver.as_str(), "exact" | "both") {
        match exact::solve(&system, &times) {
            Ok(traj) => {
                match write_trajectory(&traj, &cfg, &hash, "_exact", n, spin_count) {
                    Ok(p) => eprintln!("wrote {}", p.display()),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_CONFIG;
                    }
                }
                exact_traj = Some(traj);
            }
            Err(SolveError::CollisionDetected { t, partial }) => {
                eprintln!("collision detected at t = {t}; writing partial trajectory");
                let _ = write_trajectory(&partial, &cfg, &hash, "_exact", n, spin_count)
                    .map(|p| eprintln!("wrote {}", p.display()));
                return EXIT_COLLISION;
            }
            Err(e) => {
                eprintln!("error: exact solve failed: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if matches!(cfg.solver.as_str(), "oracle" | "both") {
        match oracle::integrate(&system, &settings, &times) {
            Ok(traj) => {
                match write_trajectory(&traj, &cfg, &hash, "_oracle", n, spin_count) {
                    Ok(p) => eprintln!("wrote {}", p.display()),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return EXIT_CONFIG;
                    }
                }
                if exact_traj.is_some() {
                    // comparison report for `both`
                    let spec = MetricSpec {
                        n_samples: times.len().saturating_sub(1).max(1),
                        q_tol: 1e-6,
                        p_tol: 1e-5,
                        spin_tol: 1e-4,
                        compare_moduli: false,
                    };
                    let mut rep = verify::compare_exact_vs_oracle(
                        &system,
                        "run-config",
                        *times.last().unwrap(),
                        &spec,
                    );
                    rep.name = "run-comparison".into();
                    let text = verify::render_reports(&[rep.clone()]);
                    let path = output_path(&cfg.output.path, "_compare", "txt");
                    if fs::write(&path, &text).is_ok() {
                        eprintln!("wrote {}", path.display());
                    }
                    if !rep.passed() {
                        exit = EXIT_VERIFY_FAILED;
                    }
                }
            }
            Err(oracle::OracleError::CollisionSingularity { t }) => {
                eprintln!("collision singularity approached at t = {t}");
                return EXIT_COLLISION;
            }
            Err(e) => {
                eprintln!("error: oracle integration failed: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    exit
}

/// `verify <suite> [--seed N]`: run a verification suite over the regression
/// corpus and emit a deterministic report file.
pub fn verify_suite(suite_name: &str, seed: u64, report_path: Option<&str>) -> i32 {
    let Some(suite) = Suite::parse(suite_name) else {
        eprintln!(
            "error: unknown suite '{suite_name}' (expected identities, lax, conservation, crosscheck, gauss, all)"
        );
        return EXIT_CONFIG;
    };
    let reports = verify::run_suite(suite, seed);
    let text = verify::render_reports(&reports);
    print!("{text}");
    for r in &reports {
        eprintln!("# {} :: {} took {:.1} ms", r.name, r.instance, r.runtime_ms);
    }
    let path = match report_path {
        Some(p) => PathBuf::from(p),
        None => output_path(&format!("verify_{suite_name}_seed{seed}"), "", "txt"),
    };
    if let Err(e) = fs::write(&path, &text) {
        eprintln!("error: cannot write report {}: {e}", path.display());
        return EXIT_CONFIG;
    }
    eprintln!("wrote {}", path.display());
    if reports.iter().all(|r| r.passed()) {
        EXIT_OK
    } else {
        for r in reports.iter().filter(|r| !r.passed()) {
            eprintln!("FAILED: {} :: {}", r.name, r.instance);
        }
        EXIT_VERIFY_FAILED
    }
}

/// `identities [--samples N]`: the identity validators alone.
pub fn identities(samples: usize, seed: u64) -> i32 {
    let rep = verify::check_identities(samples, seed);
    let text = verify::render_reports(std::slice::from_ref(&rep));
    print!("{text}");
    if rep.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
