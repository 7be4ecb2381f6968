//! Trajectory container and the CSV / JSONL writers shared by both solvers.

use crate::fields::block_field_for_state;
use crate::linalg::{CMat, C64};
use crate::models::{collision_margin, hamiltonian, ModelError, PhaseState, SystemConfig};
use std::io::{self, Write};

/// One output sample with its diagnostics.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub spins: Vec<CMat>,
    pub energy: C64,
    /// max over blocks and powers n = 1..4 of the relative drift of
    /// tr B_j(t)^n against the first sample
    pub casimir_drift: f64,
    /// smallest normalized gap of the position-carrying eigenvalues
    pub min_gap: f64,
}

impl Sample {
    pub fn state(&self) -> PhaseState {
        PhaseState {
            t: self.t,
            q: self.q.clone(),
            p: self.p.clone(),
            spins: self.spins.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub solver: &'static str,
    pub variant: &'static str,
    pub samples: Vec<Sample>,
}

/// Traces tr[B_j(t)^n] for n = 1..=4 of every block of the rebuilt field,
/// flattened block-major. These are the conserved quantities of the flow
/// (exact for the point-charge variants, diagnostic for panel sources).
pub fn casimir_traces(state: &PhaseState, config: &SystemConfig) -> Result<Vec<C64>, ModelError> {
    let field = block_field_for_state(state, config)?;
    let mut out = Vec::new();
    for gen in &field.blocks {
        let b = gen.eval(0.0);
        let mut pw = b.clone();
        for _ in 0..4 {
            let tr: C64 = (0..b.nrows()).map(|i| pw[(i, i)]).sum();
            out.push(tr);
            pw = pw.dot(&b);
        }
    }
    Ok(out)
}

pub fn casimir_drift(reference: &[C64], current: &[C64]) -> f64 {
    reference
        .iter()
        .zip(current)
        .map(|(r, c)| (r - c).norm() / r.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Assemble a sample with diagnostics; `reference_traces` comes from the
/// first sample of the trajectory (pass the state's own traces there for
/// the first sample).
pub fn make_sample(
    state: &PhaseState,
    config: &SystemConfig,
    reference_traces: &[C64],
) -> Result<Sample, ModelError> {
    let energy = hamiltonian(state, config)?;
    let traces = casimir_traces(state, config)?;
    Ok(Sample {
        t: state.t,
        q: state.q.clone(),
        p: state.p.clone(),
        spins: state.spins.clone(),
        energy,
        casimir_drift: casimir_drift(reference_traces, &traces),
        min_gap: collision_margin(&state.q, config),
    })
}

fn fmt_f(x: f64) -> String {
    // shortest round-trip representation; deterministic for identical input
    format!("{x:?}")
}

/// Header + column layout contract: leading comment lines carry the schema
/// version, config hash and column meanings; one CSV row per sample.
pub fn write_csv<W: Write>(
    w: &mut W,
    traj: &Trajectory,
    config_hash: &str,
    n: usize,
    spin_count: usize,
) -> io::Result<()> {
    writeln!(w, "# spin-cm trajectory schema 1")?;
    writeln!(w, "# config_sha256: {config_hash}")?;
    writeln!(
        w,
        "# variant: {}, solver: {}, particles: {}, spin_matrices: {}",
        traj.variant, traj.solver, n, spin_count
    )?;
    writeln!(
        w,
        "# columns: t, per particle q_re q_im, per particle p_re p_im, per spin matrix row-major entry_re entry_im, energy_re, energy_im, casimir_drift, min_gap"
    )?;
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("q{i}_re"));
        header.push(format!("q{i}_im"));
    }
    for i in 1..=n {
        header.push(format!("p{i}_re"));
        header.push(format!("p{i}_im"));
    }
    for j in 1..=spin_count {
        for a in 1..=n {
            for b in 1..=n {
                header.push(format!("spin{j}_{a}{b}_re"));
                header.push(format!("spin{j}_{a}{b}_im"));
            }
        }
    }
    header.extend(
        ["energy_re", "energy_im", "casimir_drift", "min_gap"]
            .iter()
            .map(|s| s.to_string()),
    );
    writeln!(w, "{}", header.join(","))?;
    for s in &traj.samples {
        let mut row = vec![fmt_f(s.t)];
        for z in &s.q {
            row.push(fmt_f(z.re));
            row.push(fmt_f(z.im));
        }
        for z in &s.p {
            row.push(fmt_f(z.re));
            row.push(fmt_f(z.im));
        }
        for m in &s.spins {
            for a in 0..m.nrows() {
                for b in 0..m.ncols() {
                    row.push(fmt_f(m[(a, b)].re));
                    row.push(fmt_f(m[(a, b)].im));
                }
            }
        }
        row.push(fmt_f(s.energy.re));
        row.push(fmt_f(s.energy.im));
        row.push(fmt_f(s.casimir_drift));
        row.push(fmt_f(s.min_gap));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// One JSON record per sample, same self-description in a leading record.
pub fn write_jsonl<W: Write>(w: &mut W, traj: &Trajectory, config_hash: &str) -> io::Result<()> {
    let head = serde_json::json!({
        "schema": 1,
        "config_sha256": config_hash,
        "variant": traj.variant,
        "solver": traj.solver,
    });
    writeln!(w, "{head}")?;
    for s in &traj.samples {
        let rec = serde_json::json!({
            "t": s.t,
            "q": s.q.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "p": s.p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "spins": s.spins.iter().map(|m| {
                (0..m.nrows()).map(|a| {
                    (0..m.ncols()).map(|b| [m[(a,b)].re, m[(a,b)].im]).collect::<Vec<_>>()
                }).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "energy": [s.energy.re, s.energy.im],
            "casimir_drift": s.casimir_drift,
            "min_gap": s.min_gap,
        });
        writeln!(w, "{rec}")?;
    }
    Ok(())
}
