//! CRAB + Nelder-Mead optimization of the ramp at fixed duration and bounds.
//!
//! cargo run --release --example optimize_pulse -- [g_max] [J_max] [T/pi] [seed]

use std::f64::consts::PI;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::controls::AdiabaticSchedule;
use jcqoc::optimizer::{optimize_pulse, OptimizerOptions};

fn arg(i: usize, default: f64) -> f64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> jcqoc::Result<()> {
    let bounds = Bounds { g_max: arg(1, 4.0), j_max: arg(2, 2.0) };
    let t = arg(3, 3.3) * PI;
    let seed = arg(4, 0.0) as u64;

    let config = RunConfig::default();
    let bench = Workbench::new(&config)?;
    let problem = bench.problem(&config, t, bounds)?;
    let adiabatic = problem.fidelity_of(&AdiabaticSchedule { ramp: problem.ramp }, problem.report_steps);

    let opts = OptimizerOptions {
        seed,
        // stop once comfortably past the threshold
        target_cost: Some(1.0 - 0.995),
        max_iterations: 20_000,
        ..Default::default()
    };
    let report = optimize_pulse(&problem, &opts, None)?;
    println!("g_max = {}, J_max = {}, T = {:.2} pi", bounds.g_max, bounds.j_max, t / PI);
    println!("adiabatic fidelity  {adiabatic:.4}");
    println!("optimized fidelity  {:.4}  ({} iterations, {:.0} s)", report.best_fidelity, report.iterations_used, report.wall_time);
    for r in &report.restarts {
        println!("  restart {} (seed {}): F = {:.4}, {:?}", r.index, r.seed, r.fidelity, r.stop);
    }
    println!("history (iteration, fidelity):");
    let step = (report.fidelity_history.len() / 10).max(1);
    for (it, f) in report.fidelity_history.iter().step_by(step) {
        println!("  {it:6} {f:.5}");
    }
    Ok(())
}
