//! Falsifiable checks: identity validators, Lax-equation residuals,
//! conservation laws, Gauss-law residuals, gauge periodicity, duality, and
//! exact-vs-oracle comparison with gauge-invariant metrics.

use crate::corpus::{no_collision_instances, regression_corpus, CorpusInstance};
use crate::exact::{self, build_initial_field, monodromy_at, COLLISION_GAP};
use crate::fields::{a0_at, e_field_at};
use crate::kernels::{kernel_id, kernel_id0, kernel_id1};
use crate::linalg::{eig_general, expm, fro_norm, CMat, C64};
use crate::models::{ChargeAnsatz, PhaseState, SystemConfig};
use crate::oracle::{integrate, IntegratorSettings, Method};
use crate::series::{series_id, series_id0, series_id1};
use crate::traj::Trajectory;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

/// One measured residual with its pass threshold.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.threshold
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub name: String,
    pub instance: String,
    pub lines: Vec<CheckLine>,
    /// informational; excluded from the deterministic rendering
    pub runtime_ms: f64,
}

impl VerificationReport {
    fn new(name: &str, instance: &str) -> Self {
        VerificationReport {
            name: name.into(),
            instance: instance.into(),
            lines: Vec::new(),
            runtime_ms: 0.0,
        }
    }

    fn push(&mut self, label: impl Into<String>, value: f64, threshold: f64) {
        self.lines.push(CheckLine {
            label: label.into(),
            value,
            threshold,
        });
    }

    fn fail(&mut self, label: impl Into<String>, detail: String) {
        self.lines.push(CheckLine {
            label: format!("{} [{detail}]", label.into()),
            value: f64::INFINITY,
            threshold: 0.0,
        });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed())
    }

    pub fn worst(&self) -> Option<&CheckLine> {
        self.lines
            .iter()
            .filter(|l| l.threshold > 0.0)
            .max_by(|a, b| {
                (a.value / a.threshold)
                    .partial_cmp(&(b.value / b.threshold))
                    .unwrap()
            })
    }
}

/// Deterministic rendering (runtimes omitted), reports sorted by name then
/// instance.
pub fn render_reports(reports: &[VerificationReport]) -> String {
    let mut sorted: Vec<&VerificationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| (&a.name, &a.instance).cmp(&(&b.name, &b.instance)));
    let mut out = String::new();
    for r in sorted {
        let status = if r.passed() { "pass" } else { "FAIL" };
        writeln!(out, "[{status}] {} :: {}", r.name, r.instance).unwrap();
        for l in &r.lines {
            writeln!(
                out,
                "    {} = {:.3e} (<= {:.3e}) {}",
                l.label,
                l.value,
                l.threshold,
                if l.passed() { "ok" } else { "FAIL" }
            )
            .unwrap();
        }
    }
    out
}

fn tight_settings() -> IntegratorSettings {
    IntegratorSettings {
        method: Method::Rk45Adaptive {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        },
        max_steps: 50_000_000,
    }
}

fn sample_times(t_end: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t_end * i as f64 / k as f64).collect()
}

// ---------------------------------------------------------------------------

/// Closed forms against the truncated series with analytic tails at `samples`
/// random points each, plus the fixed spot values.
pub fn check_identities(samples: usize, seed: u64) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("identities", "random-points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const CUTOFF: i64 = 100_000;
    const TOL: f64 = 1e-6;

    // spot values
    rep.push(
        "id0(1/2) vs pi^2",
        (kernel_id0(C64::new(0.5, 0.0)).unwrap() - C64::new(PI * PI, 0.0)).norm(),
        1e-10,
    );
    rep.push(
        "id1(0) vs pi^2/3",
        (kernel_id1(0.0) - PI * PI / 3.0).abs(),
        1e-12,
    );
    rep.push(
        "id(1/2, 0) vs pi^2",
        (kernel_id(C64::new(0.5, 0.0), 0.0).unwrap() - C64::new(PI * PI, 0.0)).norm(),
        1e-10,
    );

    let mut worst_id0 = 0.0f64;
    let mut worst_id = 0.0f64;
    let mut worst_id1 = 0.0f64;
    let mut worst_point = (C64::new(0.0, 0.0), 0.0);
    for _ in 0..samples {
        // r bounded away from the integer poles
        let r = loop {
            let re = 5.0 * (rng.random::<f64>() - 0.5);
            let im = if rng.random::<f64>() < 0.5 {
                0.0
            } else {
                0.8 * (rng.random::<f64>() - 0.5)
            };
            let cand = C64::new(re, im);
            if crate::kernels::dist_to_integer(cand) > 0.05 {
                break cand;
            }
        };
        let s = 20.0 * (rng.random::<f64>() - 0.5);

        let d0 = (kernel_id0(r).unwrap() - series_id0(r, CUTOFF)).norm();
        let d = (kernel_id(r, s).unwrap() - series_id(r, s, CUTOFF)).norm();
        let d1 = (C64::new(kernel_id1(s), 0.0) - series_id1(s, CUTOFF)).norm();
        if d > worst_id {
            worst_point = (r, s);
        }
        worst_id0 = worst_id0.max(d0);
        worst_id = worst_id.max(d);
        worst_id1 = worst_id1.max(d1);
    }
    rep.push(
        format!("id0 closed vs series ({samples} pts)"),
        worst_id0,
        TOL,
    );
    rep.push(
        format!(
            "id closed vs series ({samples} pts, worst at r={:.3}{:+.3}i s={:.3})",
            worst_point.0.re, worst_point.0.im, worst_point.1
        ),
        worst_id,
        TOL,
    );
    rep.push(
        format!("id1 closed vs series ({samples} pts)"),
        worst_id1,
        TOL,
    );
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Gauss-law residuals of the initial field: jump conditions, periodicity,
/// momentum normalization, smooth-interval transport, panel slopes.
pub fn check_gauss(config: &SystemConfig, name: &str) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("gauss", name);
    const TOL: f64 = 1e-10;
    let field = match build_initial_field(config) {
        Ok(f) => f,
        Err(e) => {
            rep.fail("initial field", e.to_string());
            return rep;
        }
    };
    let n = config.n();
    let g = config.g;
    let state = PhaseState::initial(config);
    let phase = |x: f64, sign: f64| -> CMat {
        let mut m = CMat::zeros((n, n));
        for (i, q) in field.q_eff.iter().enumerate() {
            m[(i, i)] = (C64::new(0.0, sign * g * x) * q).exp();
        }
        m
    };

    if field.straightened {
        // periodicity of the unstraightened field
        let b0 = field.blocks[0].eval(0.0);
        let bl = field.blocks.last().unwrap().eval(1.0);
        let resid = fro_norm(&(&phase(2.0 * PI, 1.0).dot(&b0).dot(&phase(2.0 * PI, -1.0)) - &bl));
        rep.push("periodicity", resid / fro_norm(&bl).max(1.0), TOL);

        // momentum normalization: the diagonal integral recovers 2 pi p
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..field.blocks.len() {
                let span = field.bounds[j + 1] - field.bounds[j];
                acc += (field.blocks[j].eval(0.0)[(a, a)] + field.blocks[j].eval(1.0)[(a, a)])
                    * C64::new(0.5 * span / (2.0 * PI), 0.0);
            }
            let p_expect = match &config.ansatz {
                ChargeAnsatz::SutherlandHyp { .. } => C64::new(0.0, 1.0) * config.p0[a],
                _ => config.p0[a],
            };
            worst = worst.max((acc - p_expect).norm());
        }
        rep.push("momentum normalization", worst, TOL);

        // smooth-interval transport: within a block, the straightened field
        // is constant (affine) so E satisfies the sourceless Gauss law there
        let j = 0;
        let (lo, hi) = (field.bounds[j], field.bounds[j + 1]);
        let (x1, x2) = (lo + 0.2 * (hi - lo), lo + 0.8 * (hi - lo));
        let e1 = field.e_at(x1, g);
        let e2 = field.e_at(x2, g);
        match &config.ansatz {
            ChargeAnsatz::PiecewiseExp { .. } => {
                // affine in the straightened frame: checked via slopes below
            }
            _ => {
                let l = phase(x2 - x1, -1.0);
                let r = phase(x2 - x1, 1.0);
                let resid = fro_norm(&(&l.dot(&e1).dot(&r) - &e2));
                rep.push(
                    "smooth-interval transport",
                    resid / fro_norm(&e2).max(1.0),
                    TOL,
                );
            }
        }
    }

    match &config.ansatz {
        ChargeAnsatz::DeltaSites { sites, .. } => {
            let mut worst: f64 = 0.0;
            for (j, site) in sites.iter().enumerate() {
                let bj = field.blocks[j + 1].eval(0.0);
                let bjm = field.blocks[j].eval(0.0);
                let expect = phase(*site, 1.0)
                    .dot(&state.spins[j])
                    .dot(&phase(*site, -1.0));
                worst = worst.max(fro_norm(&(&(&bj - &bjm) - &expect)));
            }
            rep.push("site jump conditions", worst, TOL);
        }
        ChargeAnsatz::PiecewiseExp { breakpoints, s0 } => {
            let mut worst: f64 = 0.0;
            for (j, sj) in s0.iter().enumerate() {
                let dj = breakpoints[j + 1] - breakpoints[j];
                let b0 = field.blocks[j].eval(0.0);
                let b1 = field.blocks[j].eval(1.0);
                let slope = (&b1 - &b0).mapv(|z| z / C64::new(dj, 0.0));
                let expect = sj.mapv(|z| z / C64::new(dj, 0.0));
                worst = worst.max(fro_norm(&(&slope - &expect)));
            }
            rep.push("panel slopes", worst, TOL);
            // continuity across interior breakpoints
            let mut cont: f64 = 0.0;
            for j in 1..field.blocks.len() {
                let left = field.blocks[j - 1].eval(1.0);
                let right = field.blocks[j].eval(0.0);
                cont = cont.max(fro_norm(&(&left - &right)));
            }
            rep.push("panel continuity", cont, TOL);
        }
        ChargeAnsatz::SutherlandTrig { e } | ChargeAnsatz::SutherlandHyp { e } => {
            let bp = field.blocks[1].eval(0.0);
            let bm = field.blocks[0].eval(0.0);
            let jump = 2.0 * PI * g * e;
            let mut worst: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let expect = if a == b { 0.0 } else { jump };
                    worst = worst.max((bp[(a, b)] - bm[(a, b)] - C64::new(expect, 0.0)).norm());
                }
            }
            rep.push("charge jump at origin", worst, TOL);
        }
        ChargeAnsatz::RationalSpin { s0 } => {
            // constant field: i g [Q, E] = rho = g S offdiag
            let e0 = field.blocks[0].eval(0.0);
            let mut q = CMat::zeros((n, n));
            for (i, qi) in config.q0.iter().enumerate() {
                q[(i, i)] = *qi;
            }
            let comm = (&q.dot(&e0) - &e0.dot(&q)).mapv(|z| z * C64::new(0.0, g));
            let rho = s0.mapv(|z| z * C64::new(g, 0.0));
            rep.push(
                "constant-field gauss law",
                fro_norm(&(&comm - &rho)) / fro_norm(&rho).max(1.0),
                TOL,
            );
        }
    }
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Relative drift of H and the block-trace conservation laws along a
/// trajectory.
pub fn check_conservation(traj: &Trajectory, name: &str, threshold: f64) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("conservation", name);
    if traj.samples.is_empty() {
        rep.fail("trajectory", "no samples".into());
        return rep;
    }
    let h0 = traj.samples[0].energy;
    let mut h_drift = 0.0f64;
    let mut casimir = 0.0f64;
    for s in &traj.samples {
        h_drift = h_drift.max((s.energy - h0).norm() / h0.norm().max(1.0));
        casimir = casimir.max(s.casimir_drift);
    }
    rep.push("energy drift", h_drift, threshold);
    rep.push("block trace drift (n = 1..4)", casimir, threshold);
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Central-difference residual of the Lax equation d_t E + i g [A0, E] = 0,
/// measured at three step sizes; the observed order must stay >= 1.9.
pub fn check_lax(
    config: &SystemConfig,
    name: &str,
    t_probe: f64,
    x_samples: &[f64],
    h0: f64,
) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("lax", name);
    let g = config.g;
    let hs = [h0, h0 / 2.0, h0 / 4.0];
    let mut stencil_times = vec![t_probe];
    for h in hs {
        stencil_times.push(t_probe - h);
        stencil_times.push(t_probe + h);
    }
    stencil_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stencil_times.dedup();
    // the Lax partner A0 is written in the a = 0 residual gauge. The
    // spinless trigonometric trajectory is gauge-free, so the projection
    // solver's samples can be differenced directly; spin-carrying variants
    // take their stencil states from the oracle, which integrates in that
    // gauge by construction (the projection solver's transported frame
    // differs from it by a time-dependent diagonal phase).
    let traj = if config.ansatz.spin_count() == 0 {
        match exact::solve(config, &stencil_times) {
            Ok(t) => t,
            Err(e) => {
                rep.fail("exact solve", e.to_string());
                return rep;
            }
        }
    } else {
        let settings = IntegratorSettings {
            method: Method::Rk45Adaptive {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
            },
            max_steps: 50_000_000,
        };
        match integrate(config, &settings, &stencil_times) {
            Ok(t) => t,
            Err(e) => {
                rep.fail("oracle integrate", e.to_string());
                return rep;
            }
        }
    };
    let state_at = |t: f64| -> &crate::traj::Sample {
        traj.samples
            .iter()
            .min_by(|a, b| ((a.t - t).abs()).partial_cmp(&(b.t - t).abs()).unwrap())
            .unwrap()
    };

    for &x in x_samples {
        let mut resids = Vec::new();
        for &h in &hs {
            let sp = state_at(t_probe + h).state();
            let sm = state_at(t_probe - h).state();
            let s0 = state_at(t_probe).state();
            let ep = e_field_at(&sp, config, x).unwrap();
            let em = e_field_at(&sm, config, x).unwrap();
            let e0 = e_field_at(&s0, config, x).unwrap();
            let a0 = a0_at(&s0, config, x).unwrap();
            let dt = (&ep - &em).mapv(|z| z / C64::new(2.0 * h, 0.0));
            let comm = (&a0.dot(&e0) - &e0.dot(&a0)).mapv(|z| z * C64::new(0.0, g));
            resids.push(fro_norm(&(&dt + &comm)));
        }
        let order1 = (resids[0] / resids[1]).log2();
        let order2 = (resids[1] / resids[2]).log2();
        let min_order = order1.min(order2);
        // report as a deficit against the required order (value <= 0 passes)
        rep.push(
            format!("order deficit at x = {x:.4} (resid {:.2e})", resids[0]),
            (1.9 - min_order).max(0.0),
            1e-12,
        );
    }

    // conservation corollary: tr E(t,x)^n constant in t (and x-independent
    // for the single-site trigonometric model)
    let s0 = state_at(t_probe).state();
    let sp = state_at(t_probe + h0).state();
    let mut worst_t = 0.0f64;
    let mut worst_x = 0.0f64;
    let e_ref = e_field_at(&s0, config, x_samples[0]).unwrap();
    let tr_ref = trace_powers(&e_ref, 4);
    for &x in x_samples {
        let e_now = e_field_at(&s0, config, x).unwrap();
        let e_fut = e_field_at(&sp, config, x).unwrap();
        let tr_now = trace_powers(&e_now, 4);
        let tr_fut = trace_powers(&e_fut, 4);
        for (a, b) in tr_now.iter().zip(&tr_fut) {
            worst_t = worst_t.max((a - b).norm() / a.norm().max(1.0));
        }
        if matches!(config.ansatz, ChargeAnsatz::SutherlandTrig { .. }) {
            for (a, b) in tr_now.iter().zip(&tr_ref) {
                worst_x = worst_x.max((a - b).norm() / a.norm().max(1.0));
            }
        }
    }
    rep.push("tr E^n time invariance", worst_t, 1e-8);
    if matches!(config.ansatz, ChargeAnsatz::SutherlandTrig { .. }) {
        rep.push("tr E^n x-independence", worst_x, 1e-10);
    }
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

fn trace_powers(m: &CMat, max_n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(max_n);
    let mut pw = m.clone();
    for _ in 0..max_n {
        out.push(pw.diag().iter().sum());
        pw = pw.dot(m);
    }
    out
}

/// Gauge-invariant comparison of the projection solver against the ODE
/// oracle on a shared time grid.
pub struct MetricSpec {
    pub n_samples: usize,
    pub q_tol: f64,
    pub p_tol: f64,
    pub spin_tol: f64,
    pub compare_moduli: bool,
}

pub fn compare_exact_vs_oracle(
    config: &SystemConfig,
    name: &str,
    t_end: f64,
    spec: &MetricSpec,
) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("crosscheck", name);
    let ts = sample_times(t_end, spec.n_samples);
    let exact = match exact::solve(config, &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("exact solve", e.to_string());
            return rep;
        }
    };
    let oracle = match integrate(config, &tight_settings(), &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("oracle integrate", e.to_string());
            return rep;
        }
    };
    let mut dq = 0.0f64;
    let mut dp = 0.0f64;
    let mut ddiag = 0.0f64;
    let mut dmod = 0.0f64;
    let mut dtr = 0.0f64;
    let mut worst_t = 0.0f64;
    for (se, so) in exact.samples.iter().zip(&oracle.samples) {
        for a in 0..config.n() {
            let e = (se.q[a] - so.q[a]).norm();
            if e > dq {
                dq = e;
                worst_t = se.t;
            }
            dp = dp.max((se.p[a] - so.p[a]).norm());
        }
        for (me, mo) in se.spins.iter().zip(&so.spins) {
            for a in 0..config.n() {
                ddiag = ddiag.max((me[(a, a)] - mo[(a, a)]).norm());
                for b in 0..config.n() {
                    dmod = dmod.max((me[(a, b)].norm() - mo[(a, b)].norm()).abs());
                }
            }
            let te = trace_powers(me, 4);
            let to = trace_powers(mo, 4);
            for (x, y) in te.iter().zip(&to) {
                dtr = dtr.max((x - y).norm() / x.norm().max(1.0));
            }
        }
    }
    rep.push(
        format!("max |q_exact - q_oracle| (worst at t = {worst_t:.3})"),
        dq,
        spec.q_tol,
    );
    rep.push("max |p_exact - p_oracle|", dp, spec.p_tol);
    if config.ansatz.spin_count() > 0 {
        rep.push("spin diagonals", ddiag, spec.spin_tol);
        if spec.compare_moduli {
            rep.push("spin moduli", dmod, spec.spin_tol);
        }
        rep.push("spin trace powers (rel)", dtr, spec.spin_tol);
    }
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Periodicity of the gauge transformation: S(t, pi) V diag(1/lambda) = V,
/// the assembled form of U(t, pi) = U(t, -pi) = V(t).
pub fn check_gauge_periodicity(
    config: &SystemConfig,
    name: &str,
    n_times: usize,
) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("gauge-periodicity", name);
    if matches!(config.ansatz, ChargeAnsatz::RationalSpin { .. }) {
        // the rational variant has an x-independent gauge field; periodicity
        // is vacuous there
        rep.push("not applicable", 0.0, 1.0);
        return rep;
    }
    let field = match build_initial_field(config) {
        Ok(f) => f,
        Err(e) => {
            rep.fail("initial field", e.to_string());
            return rep;
        }
    };
    let mut frame =
        match exact::extract_positions(&monodromy_at(0.0, &field, config).unwrap(), None, config) {
            Ok(f) => f,
            Err(e) => {
                rep.fail("frame", e.to_string());
                return rep;
            }
        };
    let mut worst = 0.0f64;
    for i in 1..=n_times {
        let t = config.t_end * i as f64 / n_times as f64;
        let mono = match monodromy_at(t, &field, config) {
            Ok(m) => m,
            Err(e) => {
                rep.fail("monodromy", e.to_string());
                return rep;
            }
        };
        frame = match exact::extract_positions(&mono, Some(&frame), config) {
            Ok(f) => f,
            Err(e) => {
                rep.fail("positions", e.to_string());
                return rep;
            }
        };
        let n = config.n();
        let mut inv_lam = CMat::zeros((n, n));
        for (a, l) in frame.lambda.iter().enumerate() {
            inv_lam[(a, a)] = C64::new(1.0, 0.0) / l;
        }
        let u_pi = mono.s_pi.dot(&frame.v).dot(&inv_lam);
        worst = worst.max(fro_norm(&(&u_pi - &frame.v)) / fro_norm(&frame.v).max(1.0));
    }
    rep.push(
        format!("|U(t, pi) - U(t, -pi)| over {n_times} times"),
        worst,
        1e-8,
    );
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Equivalence of the two trigonometric transport products: the split
/// product around the charge site has the same spectrum as the symmetric
/// single-exponential form.
pub fn check_sutherland_equivalence(samples: usize, seed: u64) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("sutherland-equivalence", "random-configs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let n = 2 + (rng.random::<u32>() % 3) as usize;
        let g = 0.2 + 0.3 * rng.random::<f64>();
        let e = 0.4 + 0.8 * rng.random::<f64>();
        let mut q0: Vec<f64> = (0..n).map(|_| 2.4 * (rng.random::<f64>() - 0.5)).collect();
        q0.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 1..n {
            if q0[i] - q0[i - 1] < 0.35 {
                q0[i] = q0[i - 1] + 0.35;
            }
        }
        let p0: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let t = 0.2 + 1.3 * rng.random::<f64>();
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e },
            g,
            q0: q0.iter().map(|&x| C64::new(x, 0.0)).collect(),
            p0: p0.iter().map(|&x| C64::new(x, 0.0)).collect(),
            t_end: t,
        };
        let field = build_initial_field(&config).unwrap();
        let mono = monodromy_at(t, &field, &config).unwrap();
        // symmetric form e^{-i pi g Q} e^{-2 i pi g B t} e^{-i pi g Q} with
        // B = p-diag + off-diagonal e pi g / (i sin(pi g dq))
        let mut b = CMat::zeros((n, n));
        for a in 0..n {
            b[(a, a)] = C64::new(p0[a], 0.0);
            for c in 0..n {
                if a != c {
                    let d = C64::new(PI * g * (q0[a] - q0[c]), 0.0);
                    b[(a, c)] = C64::new(e * PI * g, 0.0) / (C64::new(0.0, 1.0) * d.sin());
                }
            }
        }
        let mut edge = CMat::zeros((n, n));
        for a in 0..n {
            edge[(a, a)] = C64::new(0.0, -PI * g * q0[a]).exp();
        }
        let mid = expm(&b.mapv(|z| z * C64::new(0.0, -2.0 * PI * g * t))).unwrap();
        let alt = edge.dot(&mid).dot(&edge);
        let ev1 = eig_general(&mono.s_pi, 1e-8).unwrap().eigenvalues;
        let ev2 = eig_general(&alt, 1e-8).unwrap().eigenvalues;
        let scale = ev1.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in ev1.iter().zip(&ev2) {
            worst = worst.max((a - b).norm() / scale.max(1.0));
        }
    }
    rep.push(
        format!("split vs symmetric product spectra ({samples} configs)"),
        worst,
        1e-9,
    );
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Hyperbolic/trigonometric duality: the hyperbolic solve equals the
/// trigonometric solve continued to imaginary data and mapped back.
pub fn check_duality(config_hyp: &SystemConfig, name: &str) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("duality", name);
    let e = match &config_hyp.ansatz {
        ChargeAnsatz::SutherlandHyp { e } => *e,
        _ => {
            rep.fail(
                "variant",
                "duality check expects the hyperbolic variant".into(),
            );
            return rep;
        }
    };
    let trig = SystemConfig {
        ansatz: ChargeAnsatz::SutherlandTrig { e },
        g: config_hyp.g,
        q0: config_hyp
            .q0
            .iter()
            .map(|q| C64::new(0.0, 1.0) * q)
            .collect(),
        p0: config_hyp
            .p0
            .iter()
            .map(|p| C64::new(0.0, 1.0) * p)
            .collect(),
        t_end: config_hyp.t_end,
    };
    let ts = sample_times(config_hyp.t_end, 8);
    let hyp_traj = match exact::solve(config_hyp, &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("hyperbolic solve", e.to_string());
            return rep;
        }
    };
    let trig_traj = match exact::solve(&trig, &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("trig solve (imaginary data)", e.to_string());
            return rep;
        }
    };
    let mut worst = 0.0f64;
    for (sh, st) in hyp_traj.samples.iter().zip(&trig_traj.samples) {
        for a in 0..config_hyp.n() {
            // q_hyp = q_trig / i
            let mapped = st.q[a] / C64::new(0.0, 1.0);
            worst = worst.max((sh.q[a] - mapped).norm());
        }
    }
    rep.push("position map under the imaginary substitution", worst, 1e-8);
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Decoupling: a single site with the frozen uniform charge reproduces the
/// spinless trigonometric trajectory.
pub fn check_decoupling(
    suth: &SystemConfig,
    delta: &SystemConfig,
    name: &str,
) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("decoupling", name);
    let ts = sample_times(suth.t_end.min(delta.t_end), 10);
    let a = match exact::solve(suth, &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("sutherland solve", e.to_string());
            return rep;
        }
    };
    let b = match exact::solve(delta, &ts) {
        Ok(t) => t,
        Err(e) => {
            rep.fail("single-site solve", e.to_string());
            return rep;
        }
    };
    let mut worst = 0.0f64;
    for (sa, sb) in a.samples.iter().zip(&b.samples) {
        for i in 0..suth.n() {
            worst = worst.max((sa.q[i] - sb.q[i]).norm());
        }
    }
    rep.push("position agreement", worst, 1e-10);
    // the single-site charge diagonals stay frozen
    let mut diag_drift = 0.0f64;
    for sb in &b.samples {
        for m in &sb.spins {
            for i in 0..delta.n() {
                diag_drift = diag_drift.max((m[(i, i)] - b.samples[0].spins[0][(i, i)]).norm());
            }
        }
    }
    rep.push("frozen charge diagonals", diag_drift, 1e-8);
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

/// Long-horizon run without collisions: the margin never dips below ten
/// times the detection threshold.
pub fn check_no_collision(inst: &CorpusInstance) -> VerificationReport {
    let start = Instant::now();
    let mut rep = VerificationReport::new("no-collision", inst.name);
    let ts = sample_times(inst.config.t_end, 200);
    match exact::solve(&inst.config, &ts) {
        Ok(traj) => {
            let min_margin = traj
                .samples
                .iter()
                .map(|s| s.min_gap)
                .fold(f64::INFINITY, f64::min);
            // report the reciprocal so that "value <= threshold" is the gate
            rep.push(
                format!("margin floor (min gap {min_margin:.3e})"),
                10.0 * COLLISION_GAP / min_margin.max(1e-300),
                1.0,
            );
        }
        Err(e) => rep.fail("long solve", e.to_string()),
    }
    rep.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rep
}

// ---------------------------------------------------------------------------
// suites

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Lax,
    Conservation,
    Crosscheck,
    Gauss,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "identities" => Suite::Identities,
            "lax" => Suite::Lax,
            "conservation" => Suite::Conservation,
            "crosscheck" => Suite::Crosscheck,
            "gauss" => Suite::Gauss,
            "all" => Suite::All,
            _ => return None,
        })
    }
}

/// Run the named verification set over the built-in regression corpus.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<VerificationReport> {
    run_suite_with(suite, seed, &regression_corpus())
}

/// Same as `run_suite` over an explicit instance list.
pub fn run_suite_with(
    suite: Suite,
    seed: u64,
    corpus: &[CorpusInstance],
) -> Vec<VerificationReport> {
    let mut reports = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        reports.push(check_identities(100, seed));
    }
    if matches!(suite, Suite::Gauss | Suite::All) {
        for inst in corpus {
            reports.push(check_gauss(&inst.config, inst.name));
        }
    }
    if matches!(suite, Suite::Conservation | Suite::All) {
        for inst in corpus.iter().filter(|i| i.strict_conservation) {
            let mut cfg = inst.config.clone();
            cfg.t_end = inst.conservation_t;
            let ts = sample_times(cfg.t_end, 20);
            match exact::solve(&cfg, &ts) {
                Ok(traj) => reports.push(check_conservation(&traj, inst.name, 1e-8)),
                Err(e) => {
                    let mut rep = VerificationReport::new("conservation", inst.name);
                    rep.fail("exact solve", e.to_string());
                    reports.push(rep);
                }
            }
        }
    }
    if matches!(suite, Suite::Lax | Suite::All) {
        for inst in corpus.iter().filter(|i| {
            matches!(
                i.config.ansatz,
                ChargeAnsatz::SutherlandTrig { .. } | ChargeAnsatz::DeltaSites { .. }
            ) && i.compare_moduli
        }) {
            let xs = [-2.3, -0.9, 0.3, 1.7, PI];
            reports.push(check_lax(&inst.config, inst.name, 0.45, &xs, 0.02));
        }
    }
    if matches!(suite, Suite::Crosscheck | Suite::All) {
        for inst in corpus {
            let spec = MetricSpec {
                n_samples: 10,
                q_tol: inst.q_tol,
                p_tol: inst.q_tol * 10.0,
                spin_tol: inst.spin_tol,
                compare_moduli: inst.compare_moduli,
            };
            reports.push(compare_exact_vs_oracle(
                &inst.config,
                inst.name,
                inst.config.t_end,
                &spec,
            ));
            reports.push(check_gauge_periodicity(&inst.config, inst.name, 20));
        }
        reports.push(check_sutherland_equivalence(10, seed ^ 0x5eed));
        for inst in corpus
            .iter()
            .filter(|i| matches!(i.config.ansatz, ChargeAnsatz::SutherlandHyp { .. }))
        {
            reports.push(check_duality(&inst.config, inst.name));
        }
        let suth = corpus.iter().find(|i| i.name == "sutherland-n2");
        let equiv = corpus
            .iter()
            .find(|i| i.name == "delta-n2-m1-sutherland-equivalent");
        if let (Some(suth), Some(equiv)) = (suth, equiv) {
            reports.push(check_decoupling(
                &suth.config,
                &equiv.config,
                "delta-m1 vs sutherland",
            ));
        }
        for inst in no_collision_instances() {
            reports.push(check_no_collision(&inst));
        }
    }
    reports
}
