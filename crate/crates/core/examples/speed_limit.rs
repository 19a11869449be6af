//! Speed-limit estimate T_QSL = distance / dE_ave for the linear ramp and an optimized pulse.
//!
//! cargo run --release --example speed_limit

use std::f64::consts::PI;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::controls::AdiabaticSchedule;
use jcqoc::optimizer::{optimize_pulse, OptimizerOptions};

fn main() -> jcqoc::Result<()> {
    let config = RunConfig::default();
    let bench = Workbench::new(&config)?;
    let problem = bench.problem(&config, 2.2 * PI, Bounds { g_max: 4.0, j_max: 2.0 })?;

    let ramp = bench.trajectory(&config, &AdiabaticSchedule { ramp: problem.ramp })?;
    let q = bench.qsl(&ramp)?;
    println!("distance            {:.4} pi", q.distance / PI);
    println!(
        "linear ramp:  F = {:.4}  dE_ave = {:.4}  T_QSL = {:.3} pi",
        ramp.final_fidelity().unwrap(),
        q.delta_e_ave,
        q.t_qsl / PI
    );

    let opts = OptimizerOptions { target_cost: Some(0.01), max_iterations: 20_000, ..Default::default() };
    let report = optimize_pulse(&problem, &opts, None)?;
    let traj = bench.trajectory(&config, &problem.schedule(report.best_params))?;
    let q = bench.qsl(&traj)?;
    println!(
        "optimized:    F = {:.4}  dE_ave = {:.4}  T_QSL = {:.3} pi  (T = {:.2} pi)",
        traj.final_fidelity().unwrap(),
        q.delta_e_ave,
        q.t_qsl / PI,
        problem.total_time() / PI
    );
    Ok(())
}
