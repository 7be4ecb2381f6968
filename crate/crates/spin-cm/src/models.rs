//! System variants, their configuration and validation, Hamiltonians and
//! analytic position gradients.
//!
//! Positions and momenta are complex throughout; variants whose derivation
//! requires real data (the hyperbolic model) enforce realness at validation.

use crate::kernels::{
    self, coeff_cjk, dist_to_integer, kernel_id0, potential_vjk, potential_vjk_dr, reduce_2pi,
    KernelError,
};
use crate::linalg::{is_finite, CMat, C64};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("kernel pole: {0}")]
    Kernel(#[from] KernelError),
    #[error("collision singularity: pair distance within pole guard at particles {0}, {1}")]
    CollisionSingularity(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Charge structure selecting the dynamical system.
#[derive(Debug, Clone)]
pub enum ChargeAnsatz {
    /// Inverse-square pair potential with matrix spin couplings; the spin
    /// matrix must have exactly zero diagonal.
    RationalSpin { s0: CMat },
    /// Spinless trigonometric model with coupling strength `e`.
    SutherlandTrig { e: f64 },
    /// Spinless hyperbolic model with coupling strength `e`; real data only.
    SutherlandHyp { e: f64 },
    /// Point charges rho_j at sites x_j in (-pi, pi).
    DeltaSites { sites: Vec<f64>, rho0: Vec<CMat> },
    /// Piecewise-exponential charge on panels of a breakpoint grid spanning
    /// [-pi, pi]; one matrix weight per panel.
    PiecewiseExp {
        breakpoints: Vec<f64>,
        s0: Vec<CMat>,
    },
}

impl ChargeAnsatz {
    pub fn name(&self) -> &'static str {
        match self {
            ChargeAnsatz::RationalSpin { .. } => "rational_spin",
            ChargeAnsatz::SutherlandTrig { .. } => "sutherland_trig",
            ChargeAnsatz::SutherlandHyp { .. } => "sutherland_hyp",
            ChargeAnsatz::DeltaSites { .. } => "delta_sites",
            ChargeAnsatz::PiecewiseExp { .. } => "piecewise_exp",
        }
    }

    /// Number of spin matrices carried in the phase state.
    pub fn spin_count(&self) -> usize {
        match self {
            ChargeAnsatz::RationalSpin { .. } => 1,
            ChargeAnsatz::SutherlandTrig { .. } | ChargeAnsatz::SutherlandHyp { .. } => 0,
            ChargeAnsatz::DeltaSites { rho0, .. } => rho0.len(),
            ChargeAnsatz::PiecewiseExp { s0, .. } => s0.len(),
        }
    }

    pub fn initial_spins(&self) -> Vec<CMat> {
        match self {
            ChargeAnsatz::RationalSpin { s0 } => vec![s0.clone()],
            ChargeAnsatz::SutherlandTrig { .. } | ChargeAnsatz::SutherlandHyp { .. } => vec![],
            ChargeAnsatz::DeltaSites { rho0, .. } => rho0.clone(),
            ChargeAnsatz::PiecewiseExp { s0, .. } => s0.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub ansatz: ChargeAnsatz,
    /// Coupling; particles on a circle of length 1/g for the trigonometric
    /// variants.
    pub g: f64,
    pub q0: Vec<C64>,
    pub p0: Vec<C64>,
    /// Final time of the integration window [0, t_end].
    pub t_end: f64,
}

/// Phase-space sample: positions, momenta, and the variant's spin matrices
/// (the S matrix, the site charges rho_j, or the panel weights s_j).
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub t: f64,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub spins: Vec<CMat>,
}

impl PhaseState {
    pub fn initial(config: &SystemConfig) -> Self {
        PhaseState {
            t: 0.0,
            q: config.q0.clone(),
            p: config.p0.clone(),
            spins: config.ansatz.initial_spins(),
        }
    }
}

impl SystemConfig {
    pub fn n(&self) -> usize {
        self.q0.len()
    }

    /// Full interval grid for the site variants: -pi, x_1..x_m, pi for
    /// delta sites; the breakpoint vector itself for piecewise panels.
    pub fn grid(&self) -> Vec<f64> {
        match &self.ansatz {
            ChargeAnsatz::DeltaSites { sites, .. } => {
                let mut v = Vec::with_capacity(sites.len() + 2);
                v.push(-PI);
                v.extend_from_slice(sites);
                v.push(PI);
                v
            }
            ChargeAnsatz::PiecewiseExp { breakpoints, .. } => breakpoints.clone(),
            _ => vec![-PI, PI],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        let fail = |msg: String| Err(ModelError::InvalidConfig(msg));
        if n == 0 {
            return fail("at least one particle required".into());
        }
        if self.p0.len() != n {
            return fail(format!("q0 has {} entries but p0 has {}", n, self.p0.len()));
        }
        if !(self.g != 0.0 && self.g.is_finite()) {
            return fail("coupling g must be finite and nonzero".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail("t_end must be positive".into());
        }
        if !self
            .q0
            .iter()
            .chain(&self.p0)
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return fail("q0/p0 entries must be finite".into());
        }
        let check_spin_dims = |mats: &[CMat]| -> Result<(), ModelError> {
            for (j, m) in mats.iter().enumerate() {
                if m.nrows() != n || m.ncols() != n {
                    return fail(format!(
                        "spin matrix {} is {}x{}, expected {n}x{n}",
                        j,
                        m.nrows(),
                        m.ncols()
                    ));
                }
                if !is_finite(m) {
                    return fail(format!("spin matrix {j} has non-finite entries"));
                }
            }
            Ok(())
        };
        match &self.ansatz {
            ChargeAnsatz::RationalSpin { s0 } => {
                check_spin_dims(std::slice::from_ref(s0))?;
                for a in 0..n {
                    if s0[(a, a)].norm() != 0.0 {
                        return fail(format!(
                            "rational spin matrix must have zero diagonal (entry {a})"
                        ));
                    }
                }
                for a in 0..n {
                    for b in (a + 1)..n {
                        if (self.q0[a] - self.q0[b]).norm() < 1e-9 {
                            return fail(format!("initial positions {a} and {b} coincide"));
                        }
                    }
                }
            }
            ChargeAnsatz::SutherlandTrig { e } => {
                if !e.is_finite() {
                    return fail("coupling e must be finite".into());
                }
                self.check_regular_at_start()?;
            }
            ChargeAnsatz::SutherlandHyp { e } => {
                if !e.is_finite() {
                    return fail("coupling e must be finite".into());
                }
                if self.q0.iter().chain(&self.p0).any(|z| z.im != 0.0) {
                    return fail("hyperbolic variant requires real q0, p0".into());
                }
                for a in 0..n {
                    for b in (a + 1)..n {
                        if (self.q0[a] - self.q0[b]).norm() < 1e-9 {
                            return fail(format!("initial positions {a} and {b} coincide"));
                        }
                    }
                }
            }
            ChargeAnsatz::DeltaSites { sites, rho0 } => {
                if sites.is_empty() || sites.len() != rho0.len() {
                    return fail("need matching, nonempty site and charge lists".into());
                }
                for w in sites.windows(2) {
                    if w[1] <= w[0] {
                        return fail("sites must be strictly increasing".into());
                    }
                }
                if sites[0] <= -PI || *sites.last().unwrap() >= PI {
                    return fail("sites must lie strictly inside (-pi, pi)".into());
                }
                check_spin_dims(rho0)?;
                self.check_diag_sum_zero(rho0)?;
                self.check_regular_at_start()?;
            }
            ChargeAnsatz::PiecewiseExp { breakpoints, s0 } => {
                if breakpoints.len() < 2 || s0.len() + 1 != breakpoints.len() {
                    return fail("need m+1 breakpoints for m panel weights".into());
                }
                if (breakpoints[0] + PI).abs() > 1e-12
                    || (breakpoints.last().unwrap() - PI).abs() > 1e-12
                {
                    return fail("breakpoints must span [-pi, pi]".into());
                }
                for w in breakpoints.windows(2) {
                    if w[1] <= w[0] {
                        return fail("breakpoints must be strictly increasing".into());
                    }
                }
                check_spin_dims(s0)?;
                self.check_diag_sum_zero(s0)?;
                self.check_regular_at_start()?;
            }
        }
        Ok(())
    }

    fn check_diag_sum_zero(&self, spins: &[CMat]) -> Result<(), ModelError> {
        for a in 0..self.n() {
            let sum: C64 = spins.iter().map(|m| m[(a, a)]).sum();
            if sum.norm() > 1e-12 {
                return Err(ModelError::InvalidConfig(format!(
                    "charge diagonals must sum to zero per particle; particle {a} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Regularity at t = 0: the eigenvalues e^{-2 pi i g q0} must be
    /// pairwise distinct, i.e. positions distinct modulo 1/g.
    fn check_regular_at_start(&self) -> Result<(), ModelError> {
        let lam: Vec<C64> = self
            .q0
            .iter()
            .map(|q| (C64::new(0.0, -2.0 * PI * self.g) * q).exp())
            .collect();
        let scale = lam.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for a in 0..lam.len() {
            for b in (a + 1)..lam.len() {
                if (lam[a] - lam[b]).norm() < 1e-8 * scale {
                    return Err(ModelError::InvalidConfig(format!(
                        "initial positions {a} and {b} coincide modulo 1/g"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Coefficient tables for the site variants: reduced separations and the
/// diagonal couplings (c_jk for delta sites, d_jk for panels).
#[derive(Debug, Clone)]
pub struct PotentialTables {
    pub x_jk: Vec<Vec<f64>>,
    pub diag: Vec<Vec<f64>>,
}

impl PotentialTables {
    pub fn for_config(config: &SystemConfig) -> Option<PotentialTables> {
        match &config.ansatz {
            ChargeAnsatz::DeltaSites { sites, .. } => {
                let m = sites.len();
                let mut x = vec![vec![0.0; m]; m];
                let mut c = vec![vec![0.0; m]; m];
                for j in 0..m {
                    for k in 0..m {
                        x[j][k] = reduce_2pi(sites[j] - sites[k]);
                        c[j][k] = coeff_cjk(x[j][k]);
                    }
                }
                Some(PotentialTables { x_jk: x, diag: c })
            }
            ChargeAnsatz::PiecewiseExp { breakpoints, .. } => {
                let m = breakpoints.len() - 1;
                let mut d = vec![vec![0.0; m]; m];
                for j in 0..m {
                    for k in 0..m {
                        d[j][k] = kernels::djk(j, k, breakpoints, 40);
                    }
                }
                Some(PotentialTables {
                    x_jk: vec![],
                    diag: d,
                })
            }
            _ => None,
        }
    }
}

fn guard_pair_distance(q: &[C64], a: usize, b: usize) -> Result<(), ModelError> {
    if (q[a] - q[b]).norm() < 1e-12 {
        Err(ModelError::CollisionSingularity(a, b))
    } else {
        Ok(())
    }
}

fn guard_circle_distance(q: &[C64], g: f64, a: usize, b: usize) -> Result<(), ModelError> {
    if dist_to_integer((q[a] - q[b]) * g) < 1e-12 {
        Err(ModelError::CollisionSingularity(a, b))
    } else {
        Ok(())
    }
}

/// Total energy of the state under its variant's Hamiltonian. Real-valued
/// for real data; complex in general.
pub fn hamiltonian(state: &PhaseState, config: &SystemConfig) -> Result<C64, ModelError> {
    let n = config.n();
    let mut h: C64 = state.p.iter().map(|p| p * p).sum::<C64>() * C64::new(0.5, 0.0);
    let q = &state.q;
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => {
            let s = &state.spins[0];
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    guard_pair_distance(q, a, b)?;
                    let d = q[a] - q[b];
                    h += C64::new(0.5, 0.0) * s[(a, b)] * s[(b, a)] / (d * d);
                }
            }
        }
        ChargeAnsatz::SutherlandTrig { e } => {
            let pref = 0.5 * e * e * PI * PI * config.g * config.g;
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, b)?;
                    let sn = (C64::new(PI * config.g, 0.0) * (q[a] - q[b])).sin();
                    h += C64::new(pref, 0.0) / (sn * sn);
                }
            }
        }
        ChargeAnsatz::SutherlandHyp { e } => {
            let pref = 0.5 * e * e * PI * PI * config.g * config.g;
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    guard_pair_distance(q, a, b)?;
                    let sh = (C64::new(PI * config.g, 0.0) * (q[a] - q[b])).sinh();
                    h += C64::new(pref, 0.0) / (sh * sh);
                }
            }
        }
        ChargeAnsatz::DeltaSites { sites, .. } => {
            let m = sites.len();
            let rho = &state.spins;
            let tables = PotentialTables::for_config(config).unwrap();
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, b)?;
                    let r = q[a] - q[b];
                    for j in 0..m {
                        for k in 0..m {
                            let v = potential_vjk(r, tables.x_jk[j][k], config.g)?;
                            h += C64::new(0.5, 0.0) * v * rho[k][(a, b)] * rho[j][(b, a)];
                        }
                    }
                }
                for j in 0..m {
                    for k in 0..m {
                        h += C64::new(0.5 * tables.diag[j][k], 0.0)
                            * rho[k][(a, a)]
                            * rho[j][(a, a)];
                    }
                }
            }
        }
        ChargeAnsatz::PiecewiseExp { breakpoints, .. } => {
            let m = breakpoints.len() - 1;
            let s = &state.spins;
            let tables = PotentialTables::for_config(config).unwrap();
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, b)?;
                    let r = q[a] - q[b];
                    for j in 0..m {
                        for k in 0..m {
                            let w = kernels::wjk(j, k, breakpoints, config.g, r, 40)?;
                            h += C64::new(0.5, 0.0) * w * s[k][(a, b)] * s[j][(b, a)];
                        }
                    }
                }
                for j in 0..m {
                    for k in 0..m {
                        h += C64::new(0.5 * tables.diag[j][k], 0.0) * s[k][(a, a)] * s[j][(a, a)];
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Analytic dH/dq^alpha, verified against central finite differences of
/// `hamiltonian` in the test suite.
pub fn grad_q_hamiltonian(
    state: &PhaseState,
    config: &SystemConfig,
) -> Result<Vec<C64>, ModelError> {
    let n = config.n();
    let q = &state.q;
    let mut grad = vec![C64::new(0.0, 0.0); n];
    match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => {
            let s = &state.spins[0];
            for a in 0..n {
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    guard_pair_distance(q, a, c)?;
                    let d = q[a] - q[c];
                    grad[a] -= C64::new(2.0, 0.0) * s[(a, c)] * s[(c, a)] / (d * d * d);
                }
            }
        }
        ChargeAnsatz::SutherlandTrig { e } => {
            let pref = 2.0 * e * e * PI.powi(3) * config.g.powi(3);
            for a in 0..n {
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, c)?;
                    let z = C64::new(PI * config.g, 0.0) * (q[a] - q[c]);
                    grad[a] -= C64::new(pref, 0.0) * z.cos() / (z.sin() * z.sin() * z.sin());
                }
            }
        }
        ChargeAnsatz::SutherlandHyp { e } => {
            let pref = 2.0 * e * e * PI.powi(3) * config.g.powi(3);
            for a in 0..n {
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    guard_pair_distance(q, a, c)?;
                    let z = C64::new(PI * config.g, 0.0) * (q[a] - q[c]);
                    grad[a] -= C64::new(pref, 0.0) * z.cosh() / (z.sinh() * z.sinh() * z.sinh());
                }
            }
        }
        ChargeAnsatz::DeltaSites { sites, .. } => {
            let m = sites.len();
            let rho = &state.spins;
            let tables = PotentialTables::for_config(config).unwrap();
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, c)?;
                    let r_ac = q[a] - q[c];
                    for j in 0..m {
                        for k in 0..m {
                            let dv = potential_vjk_dr(r_ac, tables.x_jk[j][k], config.g)?;
                            // d/dq^a acts on both v_jk(q^a - q^c) and v_jk(q^c - q^a)
                            acc += C64::new(0.5, 0.0) * dv * rho[k][(a, c)] * rho[j][(c, a)];
                            let dv_rev = potential_vjk_dr(-r_ac, tables.x_jk[j][k], config.g)?;
                            acc -= C64::new(0.5, 0.0) * dv_rev * rho[k][(c, a)] * rho[j][(a, c)];
                        }
                    }
                }
                grad[a] = acc;
            }
        }
        ChargeAnsatz::PiecewiseExp { breakpoints, .. } => {
            let m = breakpoints.len() - 1;
            let s = &state.spins;
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..n {
                    if c == a {
                        continue;
                    }
                    guard_circle_distance(q, config.g, a, c)?;
                    let r_ac = q[a] - q[c];
                    for j in 0..m {
                        for k in 0..m {
                            let dw = kernels::wjk_dr(j, k, breakpoints, config.g, r_ac, 40)?;
                            acc += C64::new(0.5, 0.0) * dw * s[k][(a, c)] * s[j][(c, a)];
                            let dw_rev = kernels::wjk_dr(j, k, breakpoints, config.g, -r_ac, 40)?;
                            acc -= C64::new(0.5, 0.0) * dw_rev * s[k][(c, a)] * s[j][(a, c)];
                        }
                    }
                }
                grad[a] = acc;
            }
        }
    }
    Ok(grad)
}

/// Smallest separation of the position-carrying eigenvalues, the collision
/// margin reported in trajectory diagnostics. For the rational variant the
/// positions themselves are the eigenvalues; for the circle variants it is
/// the gap of e^{-2 pi i g q} (e^{2 pi g q} for the hyperbolic model), both
/// normalized by the largest eigenvalue modulus.
pub fn collision_margin(q: &[C64], config: &SystemConfig) -> f64 {
    let lam: Vec<C64> = match &config.ansatz {
        ChargeAnsatz::RationalSpin { .. } => q.to_vec(),
        ChargeAnsatz::SutherlandHyp { .. } => q
            .iter()
            .map(|qa| (C64::new(2.0 * PI * config.g, 0.0) * qa).exp())
            .collect(),
        _ => q
            .iter()
            .map(|qa| (C64::new(0.0, -2.0 * PI * config.g) * qa).exp())
            .collect(),
    };
    let scale = lam.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut gap = f64::INFINITY;
    for a in 0..lam.len() {
        for b in (a + 1)..lam.len() {
            gap = gap.min((lam[a] - lam[b]).norm());
        }
    }
    if lam.len() < 2 {
        f64::INFINITY
    } else {
        gap / scale
    }
}

/// The frozen uniform spin matrix 2 pi g e (1 - delta) that makes a single
/// delta site reproduce the spinless trigonometric model.
pub fn sutherland_equivalent_charge(n: usize, g: f64, e: f64) -> CMat {
    let mut m = CMat::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            if a != b {
                m[(a, b)] = C64::new(2.0 * PI * g * e, 0.0);
            }
        }
    }
    m
}

/// Reference value used by tests and validators: sum over the full Fourier
/// lattice of the interaction, truncated at |n| <= cutoff (no tail).
pub fn sutherland_kernel_check(g: f64, r: C64) -> Result<C64, ModelError> {
    Ok(kernel_id0(r * g)?)
}
