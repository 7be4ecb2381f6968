//! Gauge-field reconstruction from phase-space data: the piecewise block
//! decomposition of the electric field, the field value E(t,x), and the
//! Lax partner A0(t,x).
//!
//! The same closed formulas produce the initial data for the exact solver
//! (state at t = 0) and the rebuilt fields along a trajectory that the
//! conservation and Lax checks consume.

use crate::kernels::{kernel_id, kernel_id0, kernel_id1};
use crate::linalg::{CMat, Generator, C64};
use crate::models::{ChargeAnsatz, ModelError, PhaseState, SystemConfig};
use std::f64::consts::PI;

/// Electric field in block form. On block j (`bounds[j] <= x < bounds[j+1]`)
/// the straightened field is B_j(xi) with xi the normalized coordinate, and
/// E(t,x) = e^{-i g x Q_eff} B_j(xi) e^{i g x Q_eff}.
///
/// For the rational variant the field is x-independent and `blocks[0]` is
/// E itself (`straightened` is false there).
#[derive(Debug, Clone)]
pub struct BlockField {
    pub bounds: Vec<f64>,
    pub blocks: Vec<Generator>,
    /// Positions entering the conjugation phases; i*q for the hyperbolic
    /// variant, q itself otherwise.
    pub q_eff: Vec<C64>,
    pub straightened: bool,
}

impl BlockField {
    pub fn block_index(&self, x: f64) -> usize {
        let k = self.bounds.len() - 1;
        for j in 0..k {
            if x < self.bounds[j + 1] {
                return j;
            }
        }
        k - 1
    }

    /// Straightened block value at position x.
    pub fn block_value(&self, x: f64) -> CMat {
        let j = self.block_index(x);
        let lo = self.bounds[j];
        let hi = self.bounds[j + 1];
        let xi = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        self.blocks[j].eval(xi)
    }

    fn phase(&self, x: f64, g: f64, sign: f64) -> CMat {
        let n = self.q_eff.len();
        let mut m = CMat::zeros((n, n));
        for (a, q) in self.q_eff.iter().enumerate() {
            m[(a, a)] = (C64::new(0.0, sign * g * x) * q).exp();
        }
        m
    }

    /// E(t, x) reconstructed from the blocks.
    pub fn e_at(&self, x: f64, g: f64) -> CMat {
        let b = self.block_value(x);
        if !self.straightened {
            return b;
        }
        let left = self.phase(x, g, -1.0);
        let right = self.phase(x, g, 1.0);
        left.dot(&b).dot(&right)
    }
}

fn diag_matrix(v: &[C64]) -> CMat {
    let n = v.len();
    let mut m = CMat::zeros((n, n));
    for (i, z) in v.iter().enumerate() {
        m[(i, i)] = *z;
    }
    m
}

/// Rebuild the block field from a phase-space sample using the variant's
/// Gauss-law solution. At t = 0 this is the initial data of the projection
/// recipe; at later times it feeds the conservation-law checks.
pub fn block_field_for_state(
    state: &PhaseState,
    config: &SystemConfig,
) -> Result<BlockField, ModelError> {
    let n = config.n();
    let g = config.g;
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => {
            let s = &state.spins[0];
            let mut e0 = diag_matrix(&state.p);
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let d = state.q[a] - state.q[b];
                    if d.norm() < 1e-12 {
                        return Err(ModelError::CollisionSingularity(a, b));
                    }
                    e0[(a, b)] = s[(a, b)] / (C64::new(0.0, 1.0) * d);
                }
            }
            Ok(BlockField {
                bounds: vec![-PI, PI],
                blocks: vec![Generator::Constant(e0)],
                q_eff: state.q.clone(),
                straightened: false,
            })
        }
        ChargeAnsatz::SutherlandTrig { e } => {
            let mut bp = diag_matrix(&state.p);
            let mut bm = diag_matrix(&state.p);
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let d = (state.q[a] - state.q[b]) * PI * g;
                    let sn = d.sin();
                    if sn.norm() < 1e-12 {
                        return Err(ModelError::CollisionSingularity(a, b));
                    }
                    let pref = C64::new(e * PI * g, 0.0) / (C64::new(0.0, 1.0) * sn);
                    bp[(a, b)] = pref * (C64::new(0.0, 1.0) * d).exp();
                    bm[(a, b)] = pref * (C64::new(0.0, -1.0) * d).exp();
                }
            }
            Ok(BlockField {
                bounds: vec![-PI, 0.0, PI],
                blocks: vec![Generator::Constant(bm), Generator::Constant(bp)],
                q_eff: state.q.clone(),
                straightened: true,
            })
        }
        ChargeAnsatz::SutherlandHyp { e } => {
            // the trigonometric construction continued to imaginary data:
            // q_eff = i q, and the blocks pick up an i on the diagonal
            let q_eff: Vec<C64> = state.q.iter().map(|q| C64::new(0.0, 1.0) * q).collect();
            let p_eff: Vec<C64> = state.p.iter().map(|p| C64::new(0.0, 1.0) * p).collect();
            let mut bp = diag_matrix(&p_eff);
            let mut bm = diag_matrix(&p_eff);
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let d = (state.q[a] - state.q[b]) * PI * g;
                    let sh = d.sinh();
                    if sh.norm() < 1e-12 {
                        return Err(ModelError::CollisionSingularity(a, b));
                    }
                    let pref = C64::new(-e * PI * g, 0.0) / sh;
                    bp[(a, b)] = pref * (-d).exp();
                    bm[(a, b)] = pref * d.exp();
                }
            }
            Ok(BlockField {
                bounds: vec![-PI, 0.0, PI],
                blocks: vec![Generator::Constant(bm), Generator::Constant(bp)],
                q_eff,
                straightened: true,
            })
        }
        ChargeAnsatz::DeltaSites { sites, .. } => {
            let rho = &state.spins;
            let m = sites.len();
            let bounds = config.grid();
            let mut blocks = Vec::with_capacity(m + 1);
            // weighted diagonal compensation sum_i (x_{i+1}-x_i)/2pi sum_{l<=i} rho_l
            let mut weighted = vec![C64::new(0.0, 0.0); n];
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for i in 1..=m {
                    let span = bounds[i + 1] - bounds[i];
                    let part: C64 = (0..i).map(|l| rho[l][(a, a)]).sum();
                    acc += C64::new(span / (2.0 * PI), 0.0) * part;
                }
                weighted[a] = acc;
            }
            for j in 0..=m {
                let mut b = CMat::zeros((n, n));
                for a in 0..n {
                    let partial: C64 = (0..j).map(|l| rho[l][(a, a)]).sum();
                    b[(a, a)] = state.p[a] + partial - weighted[a];
                }
                let xj = bounds[j];
                for a in 0..n {
                    for bb in 0..n {
                        if a == bb {
                            continue;
                        }
                        let d = (state.q[a] - state.q[bb]) * PI * g;
                        let sn = d.sin();
                        if sn.norm() < 1e-12 {
                            return Err(ModelError::CollisionSingularity(a, bb));
                        }
                        let mut acc = C64::new(0.0, 0.0);
                        for l in 0..m {
                            let sgn = if xj - sites[l] >= 0.0 { 1.0 } else { -1.0 };
                            let phase = (C64::new(0.0, g * (sites[l] + PI * sgn))
                                * (state.q[a] - state.q[bb]))
                                .exp();
                            acc += rho[l][(a, bb)] * phase;
                        }
                        b[(a, bb)] = acc / (C64::new(0.0, 2.0) * sn);
                    }
                }
                blocks.push(Generator::Constant(b));
            }
            Ok(BlockField {
                bounds,
                blocks,
                q_eff: state.q.clone(),
                straightened: true,
            })
        }
        ChargeAnsatz::PiecewiseExp { breakpoints, .. } => {
            let s = &state.spins;
            let m = breakpoints.len() - 1;
            // B(-pi) from the momentum normalization and periodicity
            let mut b_start = CMat::zeros((n, n));
            for a in 0..n {
                let mut acc = state.p[a];
                for j in 0..m {
                    let dj = breakpoints[j + 1] - breakpoints[j];
                    let partial: C64 = (0..j).map(|k| s[k][(a, a)]).sum();
                    acc -= C64::new(dj / (2.0 * PI), 0.0)
                        * (C64::new(0.5, 0.0) * s[j][(a, a)] + partial);
                }
                b_start[(a, a)] = acc;
            }
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let r = state.q[a] - state.q[b];
                    let d = r * PI * g;
                    let sn = d.sin();
                    if sn.norm() < 1e-12 {
                        return Err(ModelError::CollisionSingularity(a, b));
                    }
                    let total: C64 = s.iter().map(|sj| sj[(a, b)]).sum();
                    b_start[(a, b)] =
                        (C64::new(0.0, -1.0) * d).exp() * total / (C64::new(0.0, 2.0) * sn);
                }
            }
            let mut blocks = Vec::with_capacity(m);
            let mut c = b_start;
            for sj in s.iter().take(m) {
                blocks.push(Generator::Affine {
                    c: c.clone(),
                    s: sj.clone(),
                });
                c = &c + sj;
            }
            Ok(BlockField {
                bounds: breakpoints.clone(),
                blocks,
                q_eff: state.q.clone(),
                straightened: true,
            })
        }
    }
}

/// E(t, x) evaluated from the state's rebuilt block field.
pub fn e_field_at(state: &PhaseState, config: &SystemConfig, x: f64) -> Result<CMat, ModelError> {
    Ok(block_field_for_state(state, config)?.e_at(x, config.g))
}

/// The Lax partner A0(t, x) in the diagonal gauge, with the variant's gauge
/// choice: the spin-freezing diagonal for the trigonometric model, a = 0 for
/// the site models, and the x-independent matrix of the rational model.
pub fn a0_at(state: &PhaseState, config: &SystemConfig, x: f64) -> Result<CMat, ModelError> {
    let n = config.n();
    let g = config.g;
    let q = &state.q;
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => {
            let s = &state.spins[0];
            let mut a0 = CMat::zeros((n, n));
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let d = q[a] - q[b];
                    if d.norm() < 1e-12 {
                        return Err(ModelError::CollisionSingularity(a, b));
                    }
                    a0[(a, b)] = s[(a, b)] / (C64::new(g, 0.0) * d * d);
                }
            }
            Ok(a0)
        }
        ChargeAnsatz::SutherlandTrig { e } => {
            let mut a0 = CMat::zeros((n, n));
            for a in 0..n {
                let mut diag = C64::new(PI * PI / 3.0, 0.0);
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    diag += kernel_id0((q[a] - q[c]) * g)?;
                }
                a0[(a, a)] = C64::new(-e * g, 0.0) * diag;
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    a0[(a, b)] = C64::new(e * g, 0.0) * kernel_id((q[a] - q[b]) * g, x)?;
                }
            }
            Ok(a0)
        }
        ChargeAnsatz::DeltaSites { sites, .. } => {
            let rho = &state.spins;
            let mut a0 = CMat::zeros((n, n));
            for a in 0..n {
                let mut diag = C64::new(0.0, 0.0);
                for (k, site) in sites.iter().enumerate() {
                    diag += rho[k][(a, a)] * C64::new(kernel_id1(x - site), 0.0);
                }
                a0[(a, a)] = diag / C64::new(2.0 * PI, 0.0);
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let r = (q[a] - q[b]) * g;
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, site) in sites.iter().enumerate() {
                        acc += rho[k][(a, b)] * kernel_id(r, x - site)?;
                    }
                    a0[(a, b)] = acc / C64::new(2.0 * PI, 0.0);
                }
            }
            Ok(a0)
        }
        _ => Err(ModelError::InvalidConfig(format!(
            "A0 assembly is not provided for the {} variant",
            config.ansatz.name()
        ))),
    }
}
