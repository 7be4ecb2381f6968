//! The hyperbolic pair potential: same machinery with real exponential
//! growth in the transport matrix, q(t) = log(lambda)/(2 pi g). The run also
//! demonstrates the duality with the trigonometric model continued to
//! imaginary initial data.
//!
//! Run with: cargo run --release --example hyperbolic

use num_complex::Complex64 as C64;
use spin_cm::exact;
use spin_cm::models::{ChargeAnsatz, SystemConfig};

fn main() {
    let config = SystemConfig {
        ansatz: ChargeAnsatz::SutherlandHyp { e: 0.55 },
        g: 0.29,
        q0: vec![C64::new(-0.8, 0.0), C64::new(0.15, 0.0), C64::new(1.0, 0.0)],
        p0: vec![
            C64::new(0.25, 0.0),
            C64::new(-0.35, 0.0),
            C64::new(0.1, 0.0),
        ],
        t_end: 2.0,
    };
    let times: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let hyp = exact::solve(&config, &times).expect("hyperbolic solve");

    // the dual run: trigonometric solver on purely imaginary data
    let trig = SystemConfig {
        ansatz: ChargeAnsatz::SutherlandTrig { e: 0.55 },
        g: config.g,
        q0: config.q0.iter().map(|q| C64::new(0.0, 1.0) * q).collect(),
        p0: config.p0.iter().map(|p| C64::new(0.0, 1.0) * p).collect(),
        t_end: config.t_end,
    };
    let dual = exact::solve(&trig, &times).expect("dual trig solve");

    println!("repulsive hyperbolic flow; the dual trigonometric run is mapped");
    println!("back through q -> q / i\n");
    println!(
        "{:>5} {:>27} {:>14} {:>12}",
        "t", "positions", "duality gap", "spread"
    );
    for (sh, st) in hyp.samples.iter().zip(&dual.samples) {
        let gap =
            sh.q.iter()
                .zip(&st.q)
                .map(|(a, b)| (a - b / C64::new(0.0, 1.0)).norm())
                .fold(0.0, f64::max);
        let qs: Vec<String> = sh.q.iter().map(|z| format!("{:+.4}", z.re)).collect();
        let spread = (sh.q[2] - sh.q[0]).re;
        println!(
            "{:>5.2} {:>27} {:>14.3e} {:>12.4}",
            sh.t,
            qs.join(" "),
            gap,
            spread
        );
    }
    println!("\nthe pair separations grow monotonically: collisions never occur here");
}
