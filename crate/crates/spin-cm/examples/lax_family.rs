//! The one-parameter family of Lax pairs: at every fixed x the field E(t,x)
//! satisfies dE/dt + i g [A0(t,x), E(t,x)] = 0, so tr E(t,x)^n is conserved
//! for every x and n. This example measures the residual's convergence order
//! in the time step and tabulates the conserved traces.
//!
//! Run with: cargo run --release --example lax_family

use num_complex::Complex64 as C64;
use spin_cm::corpus::regression_corpus;
use spin_cm::exact;
use spin_cm::fields::{a0_at, e_field_at};
use spin_cm::linalg::fro_norm;
use spin_cm::verify::{check_lax, render_reports};
use std::f64::consts::PI;

fn main() {
    let corpus = regression_corpus();
    let inst = corpus.iter().find(|i| i.name == "sutherland-n3").unwrap();
    let config = &inst.config;
    let t0 = 0.45;
    let x = 0.9;

    println!("central-difference residual of dE/dt + i g [A0, E] at x = {x}:");
    println!("{:>10} {:>14} {:>8}", "h", "residual", "order");
    let mut prev: Option<f64> = None;
    for k in 0..4 {
        let h = 0.04 / 2f64.powi(k);
        let ts = [t0 - h, t0, t0 + h];
        let traj = exact::solve(config, &ts).unwrap();
        let sm = traj.samples[0].state();
        let s0 = traj.samples[1].state();
        let sp = traj.samples[2].state();
        let ep = e_field_at(&sp, config, x).unwrap();
        let em = e_field_at(&sm, config, x).unwrap();
        let e0 = e_field_at(&s0, config, x).unwrap();
        let a0 = a0_at(&s0, config, x).unwrap();
        let dt = (&ep - &em).mapv(|z| z / C64::new(2.0 * h, 0.0));
        let comm = (&a0.dot(&e0) - &e0.dot(&a0)).mapv(|z| z * C64::new(0.0, config.g));
        let resid = fro_norm(&(&dt + &comm));
        match prev {
            Some(p) => println!("{:>10.5} {:>14.3e} {:>8.3}", h, resid, (p / resid).log2()),
            None => println!("{:>10.5} {:>14.3e} {:>8}", h, resid, "-"),
        }
        prev = Some(resid);
    }

    println!("\nconserved traces tr E(t,x)^2 across x and t:");
    let ts: Vec<f64> = vec![0.0, 0.3, 0.6, 0.9];
    let traj = exact::solve(config, &ts).unwrap();
    print!("{:>8}", "x \\ t");
    for t in &ts {
        print!(" {:>14.2}", t);
    }
    println!();
    for x in [-2.0, -0.5, 1.0, PI] {
        print!("{:>8.3}", x);
        for s in &traj.samples {
            let e = e_field_at(&s.state(), config, x).unwrap();
            let tr2: C64 = e.dot(&e).diag().iter().sum();
            print!(" {:>14.10}", tr2.re);
        }
        println!();
    }
    println!("(every column and every row is constant for this variant)");

    println!("\nstructured report over the regression instances:");
    let xs = [-2.3, -0.9, 0.3, 1.7, PI];
    for name in ["sutherland-n3", "delta-n2-m2-hermitian"] {
        let inst = corpus.iter().find(|i| i.name == name).unwrap();
        let rep = check_lax(&inst.config, inst.name, 0.45, &xs, 0.02);
        print!("{}", render_reports(std::slice::from_ref(&rep)));
    }
}
