//! Writing trajectories to the self-describing CSV and JSONL formats, the
//! same files the `spin-cm run` subcommand emits.
//!
//! Run with: cargo run --release --example trajectory_files

use num_complex::Complex64 as C64;
use spin_cm::exact;
use spin_cm::models::{ChargeAnsatz, SystemConfig};
use spin_cm::traj::{write_csv, write_jsonl};

fn main() {
    let config = SystemConfig {
        ansatz: ChargeAnsatz::SutherlandTrig { e: 0.8 },
        g: 0.37,
        q0: vec![C64::new(-0.9, 0.0), C64::new(0.8, 0.0)],
        p0: vec![C64::new(0.25, 0.0), C64::new(-0.2, 0.0)],
        t_end: 1.0,
    };
    let times: Vec<f64> = (0..=4).map(|i| 0.25 * i as f64).collect();
    let traj = exact::solve(&config, &times).expect("solve");

    let mut csv = Vec::new();
    write_csv(&mut csv, &traj, "example-hash", config.n(), 0).unwrap();
    println!("--- CSV ---");
    print!("{}", String::from_utf8(csv).unwrap());

    let mut jsonl = Vec::new();
    write_jsonl(&mut jsonl, &traj, "example-hash").unwrap();
    println!("--- JSONL ---");
    print!("{}", String::from_utf8(jsonl).unwrap());

    println!("--- equivalent batch usage ---");
    println!("spin-cm run config.json        # writes <path>_exact.csv per the config");
    println!("spin-cm verify all --seed 1    # regression suites, deterministic report");
    println!("spin-cm identities             # identity validators only");
}
