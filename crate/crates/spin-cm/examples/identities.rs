//! The three lattice-sum identities every potential kernel rests on,
//! validated against truncated series with analytic tail corrections.
//!
//! Run with: cargo run --release --example identities

use num_complex::Complex64 as C64;
use spin_cm::kernels::{kernel_id, kernel_id0, kernel_id1};
use spin_cm::series::{series_id, series_id0, series_id1};
use spin_cm::verify::{check_identities, render_reports};
use std::f64::consts::PI;

fn main() {
    println!("sum 1/(n+r)^2            = pi^2 / sin^2(pi r)");
    println!("sum e^(ins)/(n+r)^2      = e^(-i r s') (pi^2/sin^2 + i pi s' cot - pi|s'|)");
    println!("sum_(n!=0) e^(ins)/n^2   = s'^2/2 - pi|s'| + pi^2/3,  s' reduced to [-pi, pi)\n");

    let cutoff = 100_000;
    let points = [
        (C64::new(0.5, 0.0), 0.0),
        (C64::new(0.3, 0.0), 1.0),
        (C64::new(0.25, 0.1), 2.2),
        (C64::new(-0.45, 0.0), -3.14159),
        (C64::new(0.3, 0.0), 1e-5),
    ];
    println!(
        "{:>22} {:>8} {:>24} {:>12}",
        "r", "s", "closed form", "vs series"
    );
    for (r, s) in points {
        let closed = kernel_id(r, s).unwrap();
        let series = series_id(r, s, cutoff);
        println!(
            "{:>22} {:>8.5} {:>24} {:>12.2e}",
            format!("{:+.3}{:+.3}i", r.re, r.im),
            s,
            format!("{:+.6}{:+.6}i", closed.re, closed.im),
            (closed - series).norm()
        );
    }

    // spot values with pencil-and-paper results
    println!("\nspot checks:");
    println!(
        "  r = 1/2: sum = {:.12} (pi^2 = {:.12})",
        kernel_id0(C64::new(0.5, 0.0)).unwrap().re,
        PI * PI
    );
    println!(
        "  r = 1/4: sum = {:.12} (2 pi^2 = {:.12})",
        kernel_id0(C64::new(0.25, 0.0)).unwrap().re,
        2.0 * PI * PI
    );
    println!(
        "  s = 0 alternating sum = {:.12} (pi^2/3 = {:.12})",
        kernel_id1(0.0),
        PI * PI / 3.0
    );
    let d0 =
        (kernel_id0(C64::new(0.37, 0.0)).unwrap() - series_id0(C64::new(0.37, 0.0), cutoff)).norm();
    let d1 = (C64::new(kernel_id1(0.7), 0.0) - series_id1(0.7, cutoff)).norm();
    println!("  series residuals at spot points: {d0:.2e}, {d1:.2e}");

    println!("\nfull randomized validation (100 points):");
    let rep = check_identities(100, 0);
    print!("{}", render_reports(std::slice::from_ref(&rep)));
}
