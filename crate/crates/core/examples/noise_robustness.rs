//! Mean fidelity of an optimized pulse under piecewise-constant Gaussian control errors.
//!
//! cargo run --release --example noise_robustness -- [samples]

use std::f64::consts::PI;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::optimizer::{noise_robustness, optimize_pulse, OptimizerOptions};

fn main() -> jcqoc::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = RunConfig::default();
    let bench = Workbench::new(&config)?;
    let problem = bench.problem(&config, 2.2 * PI, Bounds { g_max: 4.0, j_max: 2.0 })?;
    let opts = OptimizerOptions { target_cost: Some(0.005), max_iterations: 20_000, ..Default::default() };
    let report = optimize_pulse(&problem, &opts, None)?;
    println!("noiseless fidelity {:.4}", report.best_fidelity);

    let sigmas = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05];
    for s in noise_robustness(&problem, &report.best_params, &sigmas, samples, 100, 1)? {
        println!(
            "sigma = {:.2}  mean F = {:.4}  std = {:.4}  (n = {})",
            s.sigma, s.mean_fidelity, s.std_fidelity, s.samples
        );
    }
    Ok(())
}
