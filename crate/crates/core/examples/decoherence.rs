//! Fidelity of an optimized pulse with cavity and qubit decay at superconducting-circuit rates.
//!
//! cargo run --release --example decoherence

use std::f64::consts::PI;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::lindblad::{evolve_lindblad, DecoherenceRates, LindbladSystem};
use jcqoc::optimizer::{optimize_pulse, OptimizerOptions};

fn main() -> jcqoc::Result<()> {
    let config = RunConfig::default();
    let bench = Workbench::new(&config)?;
    let problem = bench.problem(&config, 3.3 * PI, Bounds { g_max: 4.0, j_max: 2.0 })?;
    let opts = OptimizerOptions { target_cost: Some(0.005), max_iterations: 20_000, ..Default::default() };
    let report = optimize_pulse(&problem, &opts, None)?;
    let schedule = problem.schedule(report.best_params);

    let system = LindbladSystem::new(&config.lattice_config()?)?;
    println!("direct-sum dimension {}", system.basis().dim());
    let rates = DecoherenceRates::superconducting();
    let out = evolve_lindblad(&system, &bench.initial.state, &schedule, &rates, &bench.target.state, None)?;
    let open = out.fidelity.unwrap();
    println!("kappa = {:.1e}, gamma = {:.2e}", rates.kappa, rates.gamma);
    println!("closed-system fidelity {:.5}", report.best_fidelity);
    println!("with decoherence       {:.5}  (drop {:.5})", open, report.best_fidelity - open);
    println!("sector populations     {:?}", out.rho.sector_populations());
    println!("trace drift            {:.1e}", out.max_trace_drift);
    Ok(())
}
