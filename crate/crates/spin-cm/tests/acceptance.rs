//! Acceptance suite: every release criterion, one test per criterion, each
//! printing a pass/fail line with the measured figure against its pinned
//! tolerance.

use spin_cm::corpus::{no_collision_instances, regression_corpus};
use spin_cm::exact::{self, COLLISION_GAP};
use spin_cm::linalg::C64;
use spin_cm::models::{grad_q_hamiltonian, hamiltonian, ChargeAnsatz, PhaseState, SystemConfig};
use spin_cm::oracle::{integrate, IntegratorSettings, Method};
use spin_cm::verify::{
    check_conservation, check_decoupling, check_duality, check_gauge_periodicity, check_gauss,
    check_identities, check_lax, check_sutherland_equivalence, compare_exact_vs_oracle,
    render_reports, MetricSpec, VerificationReport,
};
use std::f64::consts::PI;
use std::time::Instant;

fn gate(criterion: &str, rep: &VerificationReport) {
    let status = if rep.passed() { "PASS" } else { "FAIL" };
    let worst = rep
        .worst()
        .map(|l| format!("{} = {:.3e} (tol {:.1e})", l.label, l.value, l.threshold))
        .unwrap_or_else(|| "no measured lines".into());
    println!("[{status}] {criterion}: {worst}");
    assert!(
        rep.passed(),
        "{criterion} failed:\n{}",
        render_reports(std::slice::from_ref(rep))
    );
}

fn gate_value(criterion: &str, label: &str, value: f64, tol: f64) {
    let ok = value.is_finite() && value <= tol;
    println!(
        "[{}] {criterion}: {label} = {value:.3e} (tol {tol:.1e})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion}: {label} = {value:.3e} exceeds {tol:.1e}");
}

fn times(t_end: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t_end * i as f64 / k as f64).collect()
}

#[test]
fn criterion_01_identity_suite() {
    let start = Instant::now();
    let rep = check_identities(100, 2024);
    gate("criterion 1 (identities, 100 random points)", &rep);
    let secs = start.elapsed().as_secs_f64();
    gate_value(
        "criterion 1 (runtime)",
        "identity suite seconds",
        secs,
        30.0,
    );
}

#[test]
fn criterion_02_cross_solver_agreement() {
    // Examples 1-4: exact q(t) vs the adaptive oracle at rel_tol 1e-10 over
    // T = 1; positions to 1e-6, gauge-invariant spin observables to 1e-5
    for inst in regression_corpus()
        .iter()
        .filter(|i| !matches!(i.config.ansatz, ChargeAnsatz::PiecewiseExp { .. }))
    {
        let start = Instant::now();
        let spec = MetricSpec {
            n_samples: 10,
            q_tol: 1e-6,
            p_tol: 1e-5,
            spin_tol: 1e-5,
            compare_moduli: inst.compare_moduli,
        };
        let rep = compare_exact_vs_oracle(&inst.config, inst.name, inst.config.t_end, &spec);
        gate(&format!("criterion 2 ({})", inst.name), &rep);
        let secs = start.elapsed().as_secs_f64();
        gate_value(
            &format!("criterion 2 ({}, runtime)", inst.name),
            "seconds per instance",
            secs,
            60.0,
        );
    }
}

#[test]
fn criterion_03_single_site_decouples() {
    let corpus = regression_corpus();
    let suth = corpus.iter().find(|i| i.name == "sutherland-n2").unwrap();
    let equiv = corpus
        .iter()
        .find(|i| i.name == "delta-n2-m1-sutherland-equivalent")
        .unwrap();
    let rep = check_decoupling(&suth.config, &equiv.config, "delta m=1 vs sutherland");
    gate("criterion 3 (single-site decoupling, 1e-10)", &rep);
}

#[test]
fn criterion_04_split_product_equivalence() {
    let rep = check_sutherland_equivalence(10, 99);
    gate("criterion 4 (split vs symmetric transport spectra)", &rep);
}

#[test]
fn criterion_05_conservation_along_exact_trajectories() {
    for inst in regression_corpus().iter().filter(|i| i.strict_conservation) {
        let mut cfg = inst.config.clone();
        cfg.t_end = inst.conservation_t;
        let ts = times(cfg.t_end, 20);
        let traj = exact::solve(&cfg, &ts).unwrap_or_else(|e| panic!("{}: {e}", inst.name));
        let rep = check_conservation(&traj, inst.name, 1e-8);
        gate(
            &format!("criterion 5 ({}, T = {})", inst.name, inst.conservation_t),
            &rep,
        );
    }
}

#[test]
fn criterion_06_no_collisions_over_long_horizon() {
    for inst in no_collision_instances() {
        let ts = times(100.0, 200);
        let traj = exact::solve(&inst.config, &ts).unwrap_or_else(|e| panic!("{}: {e}", inst.name));
        let floor = traj
            .samples
            .iter()
            .map(|s| s.min_gap)
            .fold(f64::INFINITY, f64::min);
        // margin must never dip below ten times the detection threshold
        gate_value(
            &format!("criterion 6 ({}, T = 100)", inst.name),
            "10 * threshold / min margin",
            10.0 * COLLISION_GAP / floor,
            1.0,
        );
    }
}

#[test]
fn criterion_07_lax_residual_order() {
    let corpus = regression_corpus();
    let xs = [-2.3, -0.9, 0.3, 1.7, PI];
    for name in [
        "sutherland-n3",
        "delta-n2-m2-hermitian",
        "delta-n3-m3-hermitian",
    ] {
        let inst = corpus.iter().find(|i| i.name == name).unwrap();
        let rep = check_lax(&inst.config, inst.name, 0.45, &xs, 0.02);
        gate(&format!("criterion 7 (Lax order >= 1.9, {name})"), &rep);
    }
}

#[test]
fn criterion_08_gauss_law_reconstruction() {
    for inst in regression_corpus() {
        let rep = check_gauss(&inst.config, inst.name);
        gate(
            &format!("criterion 8 (gauss residuals, {})", inst.name),
            &rep,
        );
    }
}

#[test]
fn criterion_09_gauge_periodicity() {
    for inst in regression_corpus() {
        let rep = check_gauge_periodicity(&inst.config, inst.name, 20);
        gate(
            &format!("criterion 9 (U(t, pi) = U(t, -pi), {})", inst.name),
            &rep,
        );
    }
}

#[test]
fn criterion_10_hyperbolic_trig_duality() {
    let corpus = regression_corpus();
    for name in ["hyperbolic-n2", "hyperbolic-n3"] {
        let inst = corpus.iter().find(|i| i.name == name).unwrap();
        let rep = check_duality(&inst.config, inst.name);
        gate(&format!("criterion 10 (duality, {name})"), &rep);
    }
}

#[test]
fn criterion_11_piecewise_exact_vs_oracle() {
    let corpus = regression_corpus();
    let inst = corpus
        .iter()
        .find(|i| i.name == "piecewise-n2-m2-hermitian")
        .unwrap();
    let spec = MetricSpec {
        n_samples: 5,
        q_tol: 1e-5,
        p_tol: 1e-4,
        spin_tol: 1e-4,
        compare_moduli: inst.compare_moduli,
    };
    let rep = compare_exact_vs_oracle(&inst.config, inst.name, 0.5, &spec);
    gate(
        "criterion 11 (panel source, q to 1e-5 / spins to 1e-4)",
        &rep,
    );
}

#[test]
fn criterion_12_gradients_and_rk4_order() {
    // gradient of every Hamiltonian against central finite differences on
    // 50 random instances; this mirrors the per-module unit test but runs as
    // part of the acceptance gate
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use spin_cm::linalg::CMat;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let n = 2 + (seed as usize % 3);
        let config = match seed % 4 {
            0 => {
                let mut s0 = CMat::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            s0[(i, j)] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                        }
                    }
                }
                SystemConfig {
                    ansatz: ChargeAnsatz::RationalSpin { s0 },
                    g: 1.0,
                    q0: (0..n).map(|i| c(i as f64 * 0.9 - 0.8, 0.0)).collect(),
                    p0: (0..n).map(|_| c(rng.random::<f64>() - 0.5, 0.0)).collect(),
                    t_end: 1.0,
                }
            }
            1 => SystemConfig {
                ansatz: ChargeAnsatz::SutherlandTrig { e: 0.9 },
                g: 0.37,
                q0: (0..n).map(|i| c(i as f64 * 0.8 - 0.9, 0.0)).collect(),
                p0: (0..n).map(|_| c(rng.random::<f64>() - 0.5, 0.0)).collect(),
                t_end: 1.0,
            },
            2 => SystemConfig {
                ansatz: ChargeAnsatz::SutherlandHyp { e: 0.6 },
                g: 0.44,
                q0: (0..n).map(|i| c(i as f64 * 0.8 - 0.9, 0.0)).collect(),
                p0: (0..n).map(|_| c(rng.random::<f64>() - 0.5, 0.0)).collect(),
                t_end: 1.0,
            },
            _ => {
                let m = 1 + (seed as usize % 3);
                let mut sites: Vec<f64> =
                    (0..m).map(|_| -2.4 + 4.8 * rng.random::<f64>()).collect();
                sites.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for i in 1..m {
                    if sites[i] - sites[i - 1] < 0.3 {
                        sites[i] = sites[i - 1] + 0.3;
                    }
                }
                let mut rho: Vec<CMat> = (0..m)
                    .map(|_| {
                        CMat::from_shape_fn((n, n), |_| {
                            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                        })
                    })
                    .collect();
                for a in 0..n {
                    let sum: C64 = rho.iter().map(|r| r[(a, a)]).sum();
                    rho.last_mut().unwrap()[(a, a)] -= sum;
                }
                SystemConfig {
                    ansatz: ChargeAnsatz::DeltaSites { sites, rho0: rho },
                    g: 0.31,
                    q0: (0..n)
                        .map(|i| c(-0.9 + 1.7 * i as f64 / n as f64, 0.0))
                        .collect(),
                    p0: (0..n).map(|_| c(rng.random::<f64>() - 0.5, 0.0)).collect(),
                    t_end: 1.0,
                }
            }
        };
        let state = PhaseState::initial(&config);
        let grad = grad_q_hamiltonian(&state, &config).unwrap();
        let h = 1e-6;
        for a in 0..n {
            let mut sp = state.clone();
            let mut sm = state.clone();
            sp.q[a] += c(h, 0.0);
            sm.q[a] -= c(h, 0.0);
            let fd = (hamiltonian(&sp, &config).unwrap() - hamiltonian(&sm, &config).unwrap())
                / c(2.0 * h, 0.0);
            worst = worst.max((grad[a] - fd).norm() / fd.norm().max(1.0));
        }
    }
    gate_value(
        "criterion 12a (gradients vs finite differences, 50 instances)",
        "worst relative deviation",
        worst,
        1e-6,
    );

    // RK4 exhibits fourth-order convergence on a trigonometric instance
    let config = SystemConfig {
        ansatz: ChargeAnsatz::SutherlandTrig { e: 0.9 },
        g: 0.31,
        q0: vec![c(-0.9, 0.0), c(0.8, 0.0)],
        p0: vec![c(0.2, 0.0), c(-0.06, 0.0)],
        t_end: 1.0,
    };
    let target = [1.0];
    let reference = integrate(
        &config,
        &IntegratorSettings {
            method: Method::Rk45Adaptive {
                rel_tol: 1e-13,
                abs_tol: 1e-14,
            },
            max_steps: 10_000_000,
        },
        &target,
    )
    .unwrap();
    let qref = reference.samples[0].q.clone();
    let mut errs = Vec::new();
    for &step in &[0.05, 0.025, 0.0125] {
        let traj = integrate(
            &config,
            &IntegratorSettings {
                method: Method::Rk4Fixed { step },
                max_steps: 10_000_000,
            },
            &target,
        )
        .unwrap();
        let err: f64 = traj.samples[0]
            .q
            .iter()
            .zip(&qref)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
    gate_value(
        "criterion 12b (RK4 fourth-order convergence)",
        "order deficit",
        (3.8 - order).max(0.0),
        1e-12,
    );
}
