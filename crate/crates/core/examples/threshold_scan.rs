//! Threshold time for one constraint set: walk down in T until the optimizer misses F = 0.99.
//!
//! cargo run --release --example threshold_scan -- [g_max] [t_min/pi] [t_max/pi]

use std::f64::consts::PI;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::optimizer::{threshold_time, OptimizerOptions, ThresholdScan};

fn arg(i: usize, default: f64) -> f64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> jcqoc::Result<()> {
    let bounds = Bounds { g_max: arg(1, 4.0), j_max: 2.0 };
    let scan = ThresholdScan {
        t_min: arg(2, 1.5),
        t_max: arg(3, 2.5),
        coarse_step: 0.25,
        fine_step: 0.02,
        warm_start: false,
    };
    let mut config = RunConfig::default();
    config.evolution.optimizer_steps = 1000;
    let bench = Workbench::new(&config)?;
    let problem = bench.problem(&config, scan.t_max * PI, bounds)?;
    let opts = OptimizerOptions {
        max_iterations: 6000,
        restarts: 2,
        target_cost: Some(0.01),
        ..Default::default()
    };
    let result = threshold_time(&problem, &scan, &opts)?;
    for p in &result.scan_points {
        println!(
            "T = {:.2} pi  F = {:.4}  {}",
            p.total_time / PI,
            p.best_fidelity,
            if p.success { "ok" } else { "below threshold" }
        );
    }
    match result.t_threshold {
        Some(t) => println!("T_th = {:.2} pi for g_max = {}", t / PI, bounds.g_max),
        None => println!("no threshold below {:.2} pi", scan.t_max),
    }
    Ok(())
}
