//! Trigonometric, hyperbolic and rational spin Calogero-Moser systems solved
//! by the gauge-theory projection method: positions are eigenvalues of
//! explicit products of matrix exponentials, spins follow by gauge
//! conjugation, and an independent ODE integrator cross-checks everything.
//!
//! Start with the runnable examples (`cargo run --example sutherland`) or
//! the `spin-cm` binary (`run`, `verify`, `identities` subcommands).

#![forbid(unsafe_code)]

pub mod cli;
pub mod config;
pub mod corpus;
pub mod exact;
pub mod fields;
pub mod kernels;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod series;
pub mod traj;
pub mod verify;
