//! The projection solver: build the initial field blocks from Gauss's law,
//! propagate freely, form the monodromy as an ordered product of matrix
//! exponentials, and read positions off its eigenvalues and spins off the
//! diagonalizing gauge frame.
//!
//! Log branches are fixed by continuity with adaptive bisection between
//! samples; eigenvector frames are transported by real-positive overlap with
//! the previous sample, starting from the identity frame at t = 0.

use crate::fields::{block_field_for_state, BlockField};
use crate::linalg::{
    eig_general, expm, inverse, pair_eigenvalues, CMat, Generator, LinalgError, C64,
};
use crate::models::{ChargeAnsatz, ModelError, PhaseState, SystemConfig};
use crate::traj::{casimir_traces, make_sample, Sample, Trajectory};
use std::f64::consts::PI;
use thiserror::Error;

/// Eigenvalue-gap threshold under which the field stops being regular and a
/// collision is reported, relative to the largest eigenvalue modulus.
pub const COLLISION_GAP: f64 = 1e-8;

/// Phase motion per tracking step above which the interval is bisected.
pub const MAX_PHASE_STEP: f64 = PI / 4.0;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("particle collision detected at t = {t}")]
    CollisionDetected { t: f64, partial: Trajectory },
    #[error("initial data sits on a collision")]
    CollisionAtStart,
    #[error("branch tracking failed to settle at t = {t}")]
    BranchTrackingFailed { t: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Monodromy data at one time: the full transport matrix around the circle
/// (or the position-carrying matrix A1(t) for the rational variant), its
/// t-derivative, and the partial transports at the interior grid points.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub t: f64,
    pub s_pi: CMat,
    pub s_pi_dot: CMat,
    /// S(t, x_i) at grid points 1..K-1 (the charge sites / breakpoints).
    pub partials: Vec<CMat>,
    /// prefix products of the straightened transport, one per block:
    /// prefix[j] = product of block factors 0..=j (no edge phases)
    prefix: Vec<CMat>,
    /// per-panel step density used for affine blocks
    affine_steps: Vec<usize>,
}

/// Diagonalizing frame with branch bookkeeping.
#[derive(Debug, Clone)]
pub struct GaugeFrame {
    pub t: f64,
    pub v: CMat,
    pub lambda: Vec<C64>,
    /// eigenvalue velocities from the transport-derivative sandwich
    pub lambda_dot: Vec<C64>,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub winding: Vec<i64>,
    pub ambiguous_pairing: bool,
}

/// Step 1 of the recipe: the initial electric-field blocks from Gauss's law.
pub fn build_initial_field(config: &SystemConfig) -> Result<BlockField, SolveError> {
    config.validate()?;
    block_field_for_state(&PhaseState::initial(config), config).map_err(|e| match e {
        ModelError::CollisionSingularity(_, _) => SolveError::CollisionAtStart,
        other => SolveError::Model(other),
    })
}

struct ProductAccum {
    p: CMat,
    pdot: CMat,
}

impl ProductAccum {
    fn new(n: usize) -> Self {
        ProductAccum {
            p: crate::linalg::identity(n),
            pdot: CMat::zeros((n, n)),
        }
    }

    /// Left-multiply by F = exp(t G) (G may be None for constant factors).
    fn push(&mut self, f: &CMat, g: Option<&CMat>) {
        let new_p = f.dot(&self.p);
        let mut new_dot = f.dot(&self.pdot);
        if let Some(g) = g {
            new_dot = new_dot + g.dot(f).dot(&self.p);
        }
        self.p = new_p;
        self.pdot = new_dot;
    }
}

fn phase_diag(q_eff: &[C64], g: f64, x: f64) -> CMat {
    let n = q_eff.len();
    let mut m = CMat::zeros((n, n));
    for (i, q) in q_eff.iter().enumerate() {
        m[(i, i)] = (C64::new(0.0, -g * x) * q).exp();
    }
    m
}

/// Number of midpoint sub-steps that brings the ordered product of an affine
/// block to ~1e-10 self-consistency, by step doubling.
fn affine_steps_for(gen: &CMat, smat: &CMat) -> Result<usize, LinalgError> {
    let mut steps = 32usize;
    let gpath = |n: usize| -> Result<CMat, LinalgError> {
        let mut prod = crate::linalg::identity(gen.nrows());
        let h = 1.0 / n as f64;
        for k in 0..n {
            let xi = (k as f64 + 0.5) * h;
            let m = gen + &(smat * C64::new(xi, 0.0));
            prod = expm(&(&m * C64::new(h, 0.0)))?.dot(&prod);
        }
        Ok(prod)
    };
    let mut prev = gpath(steps)?;
    for _ in 0..8 {
        let next = gpath(steps * 2)?;
        let diff = crate::linalg::fro_norm(&(&next - &prev));
        if diff <= 1e-10 * crate::linalg::fro_norm(&next).max(1.0) {
            return Ok(steps * 2);
        }
        steps *= 2;
        prev = next;
    }
    Ok(steps)
}

/// Step 2 of the recipe: the transport matrix S(t, pi) as an ordered product
/// of block exponentials (path-ordered exponentials for affine blocks), with
/// partial transports and the t-derivative carried along.
pub fn monodromy_at(
    t: f64,
    field: &BlockField,
    config: &SystemConfig,
) -> Result<Monodromy, SolveError> {
    let n = config.n();
    let g = config.g;
    if let ChargeAnsatz::RationalSpin { .. } = &config.ansatz {
        // position-carrying matrix is A1(t) = Q0 + E0 t directly
        let e0 = field.blocks[0].eval(0.0);
        let mut a1 = e0.mapv(|z| z * C64::new(t, 0.0));
        for (i, q) in config.q0.iter().enumerate() {
            a1[(i, i)] += q;
        }
        return Ok(Monodromy {
            t,
            s_pi: a1,
            s_pi_dot: e0,
            partials: vec![],
            prefix: vec![],
            affine_steps: vec![],
        });
    }

    let edge = phase_diag(&field.q_eff, g, PI);
    let mut acc = ProductAccum::new(n);
    acc.push(&edge, None);
    let mut prefix = Vec::with_capacity(field.blocks.len());
    let mut affine_steps = Vec::new();
    let mut inner = ProductAccum::new(n);
    for (j, gen) in field.blocks.iter().enumerate() {
        let len = field.bounds[j + 1] - field.bounds[j];
        match gen {
            Generator::Constant(b) => {
                let gmat = b.mapv(|z| z * C64::new(0.0, -g * len));
                let f = expm(&gmat.mapv(|z| z * C64::new(t, 0.0)))?;
                acc.push(&f, Some(&gmat));
                inner.push(&f, Some(&gmat));
            }
            Generator::Affine { c, s } => {
                // substep factors exp(t * Gk), Gk = -i g h len (C + xi_mid S)
                let cg = c.mapv(|z| z * C64::new(0.0, -g * len));
                let sg = s.mapv(|z| z * C64::new(0.0, -g * len));
                let steps = affine_steps_for(&(&cg * C64::new(t, 0.0)), &(&sg * C64::new(t, 0.0)))?;
                affine_steps.push(steps);
                let h = 1.0 / steps as f64;
                for k in 0..steps {
                    let xi = (k as f64 + 0.5) * h;
                    let gk = (&cg + &(&sg * C64::new(xi, 0.0))).mapv(|z| z * C64::new(h, 0.0));
                    let f = expm(&gk.mapv(|z| z * C64::new(t, 0.0)))?;
                    acc.push(&f, Some(&gk));
                    inner.push(&f, Some(&gk));
                }
            }
        }
        prefix.push(inner.p.clone());
    }
    // partial transports at interior grid points: S(t, x_i) =
    // e^{-i g Q x_i} prefix[i-1] e^{-i g Q pi}
    let mut partials = Vec::new();
    for i in 1..field.bounds.len() - 1 {
        let left = phase_diag(&field.q_eff, g, field.bounds[i]);
        partials.push(left.dot(&prefix[i - 1]).dot(&edge));
    }
    acc.push(&edge, None);
    Ok(Monodromy {
        t,
        s_pi: acc.p,
        s_pi_dot: acc.pdot,
        partials,
        prefix,
        affine_steps,
    })
}

fn lambda_predicted(config: &SystemConfig) -> Vec<C64> {
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => config.q0.clone(),
        ChargeAnsatz::SutherlandHyp { .. } => config
            .q0
            .iter()
            .map(|q| (C64::new(2.0 * PI * config.g, 0.0) * q).exp())
            .collect(),
        _ => config
            .q0
            .iter()
            .map(|q| (C64::new(0.0, -2.0 * PI * config.g) * q).exp())
            .collect(),
    }
}

/// Principal-branch position from an eigenvalue, before winding correction.
fn position_principal(lambda: C64, config: &SystemConfig) -> C64 {
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => lambda,
        ChargeAnsatz::SutherlandHyp { .. } => lambda.ln() / C64::new(2.0 * PI * config.g, 0.0),
        _ => -lambda.ln() / C64::new(0.0, 2.0 * PI * config.g),
    }
}

fn winding_applies(config: &SystemConfig) -> bool {
    !matches!(
        config.ansatz,
        ChargeAnsatz::RationalSpin { .. } | ChargeAnsatz::SutherlandHyp { .. }
    )
}

/// Step 3 of the recipe: positions from the monodromy eigenvalues, with the
/// log branch fixed by continuity against `prev` (exactly the configured
/// initial positions when `prev` is None).
pub fn extract_positions(
    mono: &Monodromy,
    prev: Option<&GaugeFrame>,
    config: &SystemConfig,
) -> Result<GaugeFrame, SolveError> {
    let n = config.n();
    let decomp = eig_general(&mono.s_pi, 1e-8)?;
    let scale = decomp
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((decomp.eigenvalues[i] - decomp.eigenvalues[j]).norm());
        }
    }
    if n > 1 && min_gap < COLLISION_GAP * scale {
        return Err(SolveError::CollisionDetected {
            t: mono.t,
            partial: Trajectory {
                solver: "exact",
                variant: config.ansatz.name(),
                samples: vec![],
            },
        });
    }

    let reference: Vec<C64> = match prev {
        Some(f) => f.lambda.clone(),
        None => lambda_predicted(config),
    };
    let pairing = pair_eigenvalues(&reference, &decomp.eigenvalues);
    let mut lambda = vec![C64::new(0.0, 0.0); n];
    let mut v = CMat::zeros((n, n));
    for i in 0..n {
        let src = pairing.to_curr[i];
        lambda[i] = decomp.eigenvalues[src];
        v.column_mut(i)
            .assign(&decomp.right_eigenvectors.column(src));
    }

    // frame normalization: real-positive overlap with the previous columns,
    // or with the standard basis at t = 0 (identity frame)
    for i in 0..n {
        let overlap: C64 = match prev {
            Some(f) => {
                f.v.column(i)
                    .iter()
                    .zip(v.column(i).iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum()
            }
            None => v[(i, i)],
        };
        let mag = overlap.norm();
        if mag > 1e-300 {
            let corr = overlap.conj() / C64::new(mag, 0.0);
            for a in 0..n {
                v[(a, i)] *= corr;
            }
        }
    }

    let mut q = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    let mut winding = vec![0i64; n];
    let mut lambda_dot = vec![C64::new(0.0, 0.0); n];
    // lambda-dot sandwich gives the momenta
    let vinv = inverse(&v)?;
    let sandwich = vinv.dot(&mono.s_pi_dot).dot(&v);
    for i in 0..n {
        let mu = position_principal(lambda[i], config);
        if winding_applies(config) {
            let anchor = match prev {
                Some(f) => f.q[i],
                None => config.q0[i],
            };
            let k = (config.g * (anchor - mu).re).round() as i64;
            winding[i] = k;
            q[i] = mu + C64::new(k as f64 / config.g, 0.0);
        } else {
            q[i] = mu;
        }
        let ldot = sandwich[(i, i)];
        lambda_dot[i] = ldot;
        p[i] = match &config.ansatz {
            ChargeAnsatz::RationalSpin { .. } => ldot,
            ChargeAnsatz::SutherlandHyp { .. } => {
                ldot / (C64::new(2.0 * PI * config.g, 0.0) * lambda[i])
            }
            _ => -ldot / (C64::new(0.0, 2.0 * PI * config.g) * lambda[i]),
        };
    }

    Ok(GaugeFrame {
        t: mono.t,
        v,
        lambda,
        lambda_dot,
        q,
        p,
        winding,
        ambiguous_pairing: pairing.ambiguous,
    })
}

/// Step 4 of the recipe: evolved spin matrices via the gauge conjugation.
pub fn extract_spins(
    mono: &Monodromy,
    frame: &GaugeFrame,
    field: &BlockField,
    config: &SystemConfig,
) -> Result<Vec<CMat>, SolveError> {
    let n = config.n();
    let g = config.g;
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { s0 } => {
            let vinv = inverse(&frame.v)?;
            Ok(vec![vinv.dot(s0).dot(&frame.v)])
        }
        ChargeAnsatz::SutherlandTrig { .. } | ChargeAnsatz::SutherlandHyp { .. } => Ok(vec![]),
        ChargeAnsatz::DeltaSites { sites, rho0 } => {
            let vinv = inverse(&frame.v)?;
            let mut out = Vec::with_capacity(sites.len());
            for (j, site) in sites.iter().enumerate() {
                let s_x = &mono.partials[j];
                let s_x_inv = inverse(s_x)?;
                let core = vinv.dot(&s_x_inv).dot(&rho0[j]).dot(s_x).dot(&frame.v);
                let mut left = CMat::zeros((n, n));
                let mut right = CMat::zeros((n, n));
                for a in 0..n {
                    left[(a, a)] = (C64::new(0.0, -g * (site + PI)) * frame.q[a]).exp();
                    right[(a, a)] = (C64::new(0.0, g * (site + PI)) * frame.q[a]).exp();
                }
                out.push(left.dot(&core).dot(&right));
            }
            Ok(out)
        }
        ChargeAnsatz::PiecewiseExp { breakpoints, s0 } => {
            // s_j(t) = int over the panel of G(x)^{-1} s_j(0) G(x) dxi with
            // G(x) = e^{i g Q0 x} S(t,x) V e^{i g pi Q(t)}; the straightened
            // transport inside panel j is T_j(t, xi) * prefix(j-1) * edge
            let m = breakpoints.len() - 1;
            let t = mono.t;
            let edge = phase_diag(&field.q_eff, g, PI);
            let mut eq_pi = CMat::zeros((n, n));
            for a in 0..n {
                eq_pi[(a, a)] = (C64::new(0.0, g * PI) * frame.q[a]).exp();
            }
            let (gx, gw) = crate::kernels::gauss_legendre(64);
            let mut out = Vec::with_capacity(m);
            for j in 0..m {
                let base = if j == 0 {
                    edge.clone()
                } else {
                    mono.prefix[j - 1].dot(&edge)
                };
                // partial ordered products of this panel at the node points
                let pts: Vec<f64> = gx.iter().map(|x| 0.5 * (x + 1.0)).collect();
                let gen = match &field.blocks[j] {
                    Generator::Affine { c, s } => {
                        let len = field.bounds[j + 1] - field.bounds[j];
                        Generator::Affine {
                            c: c.mapv(|z| z * C64::new(0.0, -g * len * t)),
                            s: s.mapv(|z| z * C64::new(0.0, -g * len * t)),
                        }
                    }
                    Generator::Constant(b) => {
                        let len = field.bounds[j + 1] - field.bounds[j];
                        Generator::Constant(b.mapv(|z| z * C64::new(0.0, -g * len * t)))
                    }
                };
                let steps = mono.affine_steps.get(j).copied().unwrap_or(256).max(64);
                let prefixes = crate::linalg::pexp_prefixes(1.0, &gen, &pts, steps)?;
                let mut acc = CMat::zeros((n, n));
                for ((w, _pt), tj) in gw.iter().zip(&pts).zip(&prefixes) {
                    let gmat = tj.dot(&base).dot(&frame.v).dot(&eq_pi);
                    let ginv = inverse(&gmat)?;
                    acc = acc
                        + ginv
                            .dot(&s0[j])
                            .dot(&gmat)
                            .mapv(|z| z * C64::new(w * 0.5, 0.0));
                }
                out.push(acc);
            }
            Ok(out)
        }
    }
}

/// Full pipeline: track the gauge frame continuously and sample at the
/// requested output times. Collisions abort with the partial trajectory.
pub fn solve(config: &SystemConfig, output_times: &[f64]) -> Result<Trajectory, SolveError> {
    let field = build_initial_field(config)?;
    let mut frame = extract_positions(&monodromy_at(0.0, &field, config)?, None, config)?;
    let mut samples: Vec<Sample> = Vec::with_capacity(output_times.len());
    let mut reference: Option<Vec<C64>> = None;

    let record = |frame: &GaugeFrame,
                  mono: &Monodromy,
                  reference: &mut Option<Vec<C64>>|
     -> Result<Sample, SolveError> {
        let spins = extract_spins(mono, frame, &field, config)?;
        let state = PhaseState {
            t: frame.t,
            q: frame.q.clone(),
            p: frame.p.clone(),
            spins,
        };
        if reference.is_none() {
            *reference = Some(casimir_traces(&state, config)?);
        }
        Ok(make_sample(&state, config, reference.as_ref().unwrap())?)
    };

    let mut t_cur = 0.0f64;
    for &target in output_times {
        if target < -1e-15 {
            continue;
        }
        // track continuity from t_cur to target with adaptive bisection
        let mut stack = vec![target];
        while let Some(next) = stack.pop() {
            if (next - t_cur).abs() < 1e-15 {
                continue;
            }
            let mono = monodromy_at(next, &field, config)?;
            let cand = attach_partial(&mono, &frame, config, &samples)?;
            if needs_bisection(&frame, &cand, config) {
                if stack.len() > 60 {
                    return Err(SolveError::BranchTrackingFailed { t: next });
                }
                stack.push(next);
                stack.push(0.5 * (t_cur + next));
            } else {
                frame = cand;
                t_cur = next;
            }
        }
        let mono = monodromy_at(target, &field, config)?;
        if (frame.t - target).abs() > 1e-15 {
            frame = attach_partial(&mono, &frame, config, &samples)?;
            t_cur = target;
        }
        samples.push(record(&frame, &mono, &mut reference)?);
    }
    Ok(Trajectory {
        solver: "exact",
        variant: config.ansatz.name(),
        samples,
    })
}

fn attach_partial(
    mono: &Monodromy,
    prev: &GaugeFrame,
    config: &SystemConfig,
    samples: &[Sample],
) -> Result<GaugeFrame, SolveError> {
    extract_positions(mono, Some(prev), config).map_err(|e| match e {
        SolveError::CollisionDetected { t, .. } => SolveError::CollisionDetected {
            t,
            partial: Trajectory {
                solver: "exact",
                variant: config.ansatz.name(),
                samples: samples.to_vec(),
            },
        },
        other => other,
    })
}

fn needs_bisection(prev: &GaugeFrame, cand: &GaugeFrame, config: &SystemConfig) -> bool {
    let dt = (cand.t - prev.t).abs();
    // a pair whose eigenvalues could meet within this step at their current
    // speeds must be resolved finer, otherwise a crossing (a collision) can
    // slip between samples unseen
    let n = prev.lambda.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (prev.lambda[i] - prev.lambda[j]).norm();
            let rate = prev.lambda_dot[i].norm() + prev.lambda_dot[j].norm();
            if gap < 1.2 * rate * dt {
                return true;
            }
        }
    }
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => {
            // positions are tracked directly: bisect when any eigenvalue
            // moves by a sizable fraction of the previous minimum gap
            let mut gap = f64::INFINITY;
            for i in 0..n {
                for j in (i + 1)..n {
                    gap = gap.min((prev.lambda[i] - prev.lambda[j]).norm());
                }
            }
            prev.lambda
                .iter()
                .zip(&cand.lambda)
                .any(|(a, b)| (a - b).norm() > 0.4 * gap)
        }
        ChargeAnsatz::SutherlandHyp { .. } => false, // positive real eigenvalues
        _ => prev.lambda.iter().zip(&cand.lambda).any(|(a, b)| {
            let ratio = b / a;
            ratio.arg().abs() > MAX_PHASE_STEP
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro_norm;
    use crate::oracle::{integrate, IntegratorSettings, Method};
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn times(t_max: f64, k: usize) -> Vec<f64> {
        (0..=k).map(|i| t_max * i as f64 / k as f64).collect()
    }

    fn tight() -> IntegratorSettings {
        IntegratorSettings {
            method: Method::Rk45Adaptive {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
            },
            max_steps: 10_000_000,
        }
    }

    fn hermitian_zero_sum_charges(n: usize, m: usize, seed: u64) -> Vec<CMat> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rho: Vec<CMat> = (0..m)
            .map(|_| {
                let raw = Array2::from_shape_fn((n, n), |_| {
                    c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                });
                let mut h = CMat::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        h[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * c(0.5, 0.0);
                    }
                }
                h
            })
            .collect();
        for a in 0..n {
            let sum: C64 = rho.iter().map(|r| r[(a, a)]).sum();
            rho.last_mut().unwrap()[(a, a)] -= sum;
        }
        rho
    }

    #[test]
    fn monodromy_at_zero_is_initial_exponential() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::DeltaSites {
                sites: vec![-0.8, 0.9],
                rho0: hermitian_zero_sum_charges(2, 2, 3),
            },
            g: 0.31,
            q0: vec![c(-0.5, 0.0), c(0.45, 0.0)],
            p0: vec![c(0.2, 0.0), c(-0.15, 0.0)],
            t_end: 1.0,
        };
        let field = build_initial_field(&config).unwrap();
        let mono = monodromy_at(0.0, &field, &config).unwrap();
        for a in 0..2 {
            let expect = (c(0.0, -2.0 * PI * config.g) * config.q0[a]).exp();
            assert!((mono.s_pi[(a, a)] - expect).norm() < 1e-12);
        }
        assert!(mono.s_pi[(0, 1)].norm() < 1e-12);
        // frame at t = 0 reproduces q0 and the identity frame
        let frame = extract_positions(&mono, None, &config).unwrap();
        for a in 0..2 {
            assert!((frame.q[a] - config.q0[a]).norm() < 1e-10);
        }
        assert!(fro_norm(&(&frame.v - &crate::linalg::identity(2))) < 1e-6);
        // spins at t = 0 come back exactly
        let spins = extract_spins(&mono, &frame, &field, &config).unwrap();
        match &config.ansatz {
            ChargeAnsatz::DeltaSites { rho0, .. } => {
                for (s, r) in spins.iter().zip(rho0) {
                    assert!(fro_norm(&(s - r)) < 1e-9);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn free_particles_move_straight() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e: 0.0 },
            g: 0.4,
            q0: vec![c(-0.3, 0.0), c(0.6, 0.0)],
            p0: vec![c(0.25, 0.0), c(0.4, 0.0)],
            t_end: 1.5,
        };
        let traj = solve(&config, &times(1.5, 8)).unwrap();
        for s in &traj.samples {
            for a in 0..2 {
                let expect = config.q0[a] + config.p0[a] * c(s.t, 0.0);
                assert!((s.q[a] - expect).norm() < 1e-9, "free drift at t={}", s.t);
                assert!((s.p[a] - config.p0[a]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn single_free_particle_scalar_monodromy() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e: 0.0 },
            g: 0.7,
            q0: vec![c(0.3, 0.0)],
            p0: vec![c(0.5, 0.0)],
            t_end: 1.0,
        };
        let field = build_initial_field(&config).unwrap();
        let mono = monodromy_at(0.8, &field, &config).unwrap();
        let expect =
            (c(0.0, -2.0 * PI * config.g) * (config.q0[0] + config.p0[0] * c(0.8, 0.0))).exp();
        assert!((mono.s_pi[(0, 0)] - expect).norm() < 1e-12);
    }

    #[test]
    fn sutherland_matches_oracle() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e: 1.0 },
            g: 0.37,
            q0: vec![c(-0.9, 0.0), c(0.2, 0.0), c(0.9, 0.0)],
            p0: vec![c(0.3, 0.0), c(-0.2, 0.0), c(0.1, 0.0)],
            t_end: 1.0,
        };
        let ts = times(1.0, 10);
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..3 {
                assert!(
                    (se.q[a] - so.q[a]).norm() < 1e-7,
                    "q mismatch {} at t={}",
                    (se.q[a] - so.q[a]).norm(),
                    se.t
                );
                assert!((se.p[a] - so.p[a]).norm() < 1e-6);
            }
            // realness of the trajectory
            assert!(se.q.iter().all(|z| z.im.abs() < 1e-10));
        }
    }

    #[test]
    fn rational_matches_oracle_with_spins() {
        let mut s0 = CMat::zeros((2, 2));
        s0[(0, 1)] = c(0.9, 0.35);
        s0[(1, 0)] = c(0.9, -0.35); // hermitian: real trajectory
        let config = SystemConfig {
            ansatz: ChargeAnsatz::RationalSpin { s0 },
            g: 1.0,
            q0: vec![c(-0.6, 0.0), c(0.7, 0.0)],
            p0: vec![c(0.2, 0.0), c(-0.1, 0.0)],
            t_end: 1.0,
        };
        let ts = times(1.0, 8);
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..2 {
                assert!((se.q[a] - so.q[a]).norm() < 1e-7);
            }
            // gauge-invariant spin observables
            let (e, o) = (&se.spins[0], &so.spins[0]);
            for a in 0..2 {
                assert!((e[(a, a)] - o[(a, a)]).norm() < 1e-6, "diag mismatch");
                for b in 0..2 {
                    assert!(
                        (e[(a, b)].norm() - o[(a, b)].norm()).abs() < 1e-6,
                        "modulus mismatch"
                    );
                }
            }
            let tr2e: C64 = e.dot(e).diag().iter().sum();
            let tr2o: C64 = o.dot(o).diag().iter().sum();
            assert!((tr2e - tr2o).norm() < 1e-6);
        }
    }

    #[test]
    fn delta_sites_matches_oracle() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::DeltaSites {
                sites: vec![-1.1, 0.7],
                rho0: hermitian_zero_sum_charges(2, 2, 7),
            },
            g: 0.31,
            q0: vec![c(-0.5, 0.0), c(0.45, 0.0)],
            p0: vec![c(0.2, 0.0), c(-0.15, 0.0)],
            t_end: 0.6,
        };
        let ts = times(0.6, 6);
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..2 {
                assert!(
                    (se.q[a] - so.q[a]).norm() < 1e-7,
                    "q mismatch {} at t={}",
                    (se.q[a] - so.q[a]).norm(),
                    se.t
                );
            }
            for (e, o) in se.spins.iter().zip(&so.spins) {
                for a in 0..2 {
                    assert!((e[(a, a)] - o[(a, a)]).norm() < 1e-6, "spin diag");
                    for b in 0..2 {
                        assert!((e[(a, b)].norm() - o[(a, b)].norm()).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn hyperbolic_matches_oracle_and_stays_real() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandHyp { e: 0.55 },
            g: 0.29,
            q0: vec![c(-0.8, 0.0), c(0.15, 0.0), c(1.0, 0.0)],
            p0: vec![c(0.25, 0.0), c(-0.35, 0.0), c(0.1, 0.0)],
            t_end: 0.8,
        };
        let ts = times(0.8, 8);
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..3 {
                assert!(
                    (se.q[a] - so.q[a]).norm() < 1e-7,
                    "hyp q mismatch {} at t={}",
                    (se.q[a] - so.q[a]).norm(),
                    se.t
                );
                assert!(
                    se.q[a].im.abs() < 1e-10,
                    "hyperbolic positions left the real line"
                );
            }
        }
        // repulsive pair separation grows monotonically once ordered
        let first = &exact.samples[0];
        let last = exact.samples.last().unwrap();
        let spread0 = (first.q[2] - first.q[0]).re;
        let spread1 = (last.q[2] - last.q[0]).re;
        assert!(spread1 > spread0);
    }

    #[test]
    fn piecewise_matches_oracle() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::PiecewiseExp {
                breakpoints: vec![-PI, 0.4, PI],
                s0: hermitian_zero_sum_charges(2, 2, 11),
            },
            g: 0.31,
            q0: vec![c(-0.5, 0.0), c(0.45, 0.0)],
            p0: vec![c(0.2, 0.0), c(-0.15, 0.0)],
            t_end: 0.4,
        };
        let ts = vec![0.0, 0.2, 0.4];
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..2 {
                assert!(
                    (se.q[a] - so.q[a]).norm() < 1e-6,
                    "piecewise q mismatch {} at t={}",
                    (se.q[a] - so.q[a]).norm(),
                    se.t
                );
            }
            for (e, o) in se.spins.iter().zip(&so.spins) {
                for a in 0..2 {
                    assert!(
                        (e[(a, a)] - o[(a, a)]).norm() < 1e-5,
                        "panel spin diag mismatch {}",
                        (e[(a, a)] - o[(a, a)]).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn spin_traces_preserved_by_extraction() {
        let config = SystemConfig {
            ansatz: ChargeAnsatz::DeltaSites {
                sites: vec![-0.6, 1.3],
                rho0: hermitian_zero_sum_charges(3, 2, 19),
            },
            g: 0.27,
            q0: vec![c(-0.8, 0.0), c(0.0, 0.0), c(0.75, 0.0)],
            p0: vec![c(0.1, 0.0), c(0.05, 0.0), c(-0.2, 0.0)],
            t_end: 0.7,
        };
        let traj = solve(&config, &times(0.7, 5)).unwrap();
        let ref_traces: Vec<C64> = traj.samples[0]
            .spins
            .iter()
            .map(|s| s.dot(s).diag().iter().sum())
            .collect();
        for s in &traj.samples {
            for (m, tr_ref) in s.spins.iter().zip(&ref_traces) {
                let tr: C64 = m.dot(m).diag().iter().sum();
                assert!((tr - tr_ref).norm() < 1e-9, "similarity trace drifted");
            }
        }
    }

    #[test]
    fn monodromy_matches_x_integration_of_transport_ode() {
        // independent route: integrate dS/dx = -i g A1(t, x) S from -pi to pi
        // with fixed-step RK4 in x and compare the full and partial
        // transports against the ordered exponential products
        let config = SystemConfig {
            ansatz: ChargeAnsatz::DeltaSites {
                sites: vec![-1.1, 0.7],
                rho0: hermitian_zero_sum_charges(2, 2, 3),
            },
            g: 0.31,
            q0: vec![c(-0.5, 0.0), c(0.45, 0.0)],
            p0: vec![c(0.2, 0.0), c(-0.15, 0.0)],
            t_end: 1.0,
        };
        let t = 0.8;
        let field = build_initial_field(&config).unwrap();
        let mono = monodromy_at(t, &field, &config).unwrap();

        let a1_at = |x: f64| -> CMat {
            // A1(t, x) = e^{-i g Q0 x} (Q0 + B(x) t) e^{i g Q0 x}
            let n = config.n();
            let b = field.block_value(x);
            let mut core = b.mapv(|z| z * c(t, 0.0));
            for (i, q) in config.q0.iter().enumerate() {
                core[(i, i)] += q;
            }
            let mut l = CMat::zeros((n, n));
            let mut r = CMat::zeros((n, n));
            for (i, q) in config.q0.iter().enumerate() {
                l[(i, i)] = (c(0.0, -config.g * x) * q).exp();
                r[(i, i)] = (c(0.0, config.g * x) * q).exp();
            }
            l.dot(&core).dot(&r)
        };
        let rhs = |x: f64, s: &CMat| -> CMat { a1_at(x).dot(s).mapv(|z| z * c(0.0, -config.g)) };
        // integrate block by block: the field jumps at the sites, so no RK4
        // step may straddle an interval boundary
        let mut s_num = crate::linalg::identity(2);
        let mut partial_checks: Vec<CMat> = Vec::new();
        for j in 0..field.blocks.len() {
            let (lo, hi) = (field.bounds[j], field.bounds[j + 1]);
            let steps = ((hi - lo) * 1500.0).ceil() as usize;
            let h = (hi - lo) / steps as f64;
            let mut x = lo;
            for _ in 0..steps {
                // evaluate strictly inside the interval at the step edges
                let xe = |p: f64| (x + p).clamp(lo + 1e-13, hi - 1e-13);
                let k1 = rhs(xe(1e-13), &s_num);
                let k2 = rhs(xe(0.5 * h), &(&s_num + &k1.mapv(|z| z * c(0.5 * h, 0.0))));
                let k3 = rhs(xe(0.5 * h), &(&s_num + &k2.mapv(|z| z * c(0.5 * h, 0.0))));
                let k4 = rhs(xe(h), &(&s_num + &k3.mapv(|z| z * c(h, 0.0))));
                s_num = &s_num
                    + &(&(&k1 + &k4) + &(&(&k2 + &k3) * c(2.0, 0.0))).mapv(|z| z * c(h / 6.0, 0.0));
                x += h;
            }
            if j + 1 < field.blocks.len() {
                partial_checks.push(s_num.clone());
            }
        }
        let err = fro_norm(&(&s_num - &mono.s_pi)) / fro_norm(&mono.s_pi);
        assert!(
            err < 1e-8,
            "x-integration disagrees with the product: {err}"
        );
        for (j, s_part) in partial_checks.iter().enumerate() {
            let err =
                fro_norm(&(s_part - &mono.partials[j])) / fro_norm(&mono.partials[j]).max(1.0);
            assert!(err < 1e-7, "partial transport {j} mismatch: {err}");
        }
    }

    #[test]
    fn winding_tracks_multiple_wraps() {
        // fast particles wrap the circle of length 1/g; the unwrapped
        // positions must keep matching the direct integration
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e: 0.7 },
            g: 0.37,
            q0: vec![c(-0.9, 0.0), c(0.6, 0.0)],
            p0: vec![c(1.5, 0.0), c(1.2, 0.0)],
            t_end: 4.0,
        };
        let ts = times(4.0, 8);
        let exact = solve(&config, &ts).unwrap();
        let oracle = integrate(&config, &tight(), &ts).unwrap();
        let last = exact.samples.last().unwrap();
        // both particles have crossed at least one box boundary
        assert!((last.q[0].re - config.q0[0].re).abs() > 1.0 / config.g);
        for (se, so) in exact.samples.iter().zip(&oracle.samples) {
            for a in 0..2 {
                assert!(
                    (se.q[a] - so.q[a]).norm() < 1e-6,
                    "winding mismatch {} at t = {}",
                    (se.q[a] - so.q[a]).norm(),
                    se.t
                );
            }
        }
        // the spectral relation e^{-2 pi i g q} = lambda holds on every frame
        let field = build_initial_field(&config).unwrap();
        let mut frame =
            extract_positions(&monodromy_at(0.0, &field, &config).unwrap(), None, &config).unwrap();
        for i in 1..=16 {
            let t = 4.0 * i as f64 / 16.0;
            frame = extract_positions(
                &monodromy_at(t, &field, &config).unwrap(),
                Some(&frame),
                &config,
            )
            .unwrap();
            for a in 0..2 {
                let lam_of_q = (c(0.0, -2.0 * PI * config.g) * frame.q[a]).exp();
                assert!(
                    (lam_of_q - frame.lambda[a]).norm() < 1e-8,
                    "spectral position relation broken"
                );
            }
        }
    }

    #[test]
    fn gap_collision_reported_with_timestamp() {
        // head-on free particles cross: the monodromy eigenvalues collide
        let config = SystemConfig {
            ansatz: ChargeAnsatz::SutherlandTrig { e: 0.0 },
            g: 0.4,
            q0: vec![c(-0.5, 0.0), c(0.5, 0.0)],
            p0: vec![c(0.5, 0.0), c(-0.5, 0.0)],
            t_end: 2.0,
        };
        let err = solve(&config, &times(2.0, 20)).unwrap_err();
        match err {
            SolveError::CollisionDetected { t, partial } => {
                assert!(t > 0.5 && t <= 1.2, "collision near t = 1, got {t}");
                assert!(!partial.samples.is_empty());
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }
}
