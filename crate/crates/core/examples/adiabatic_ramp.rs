//! Linear ramp from (g, J) = (0, 0.5) to (1, 0.02): final fidelity versus duration.
//!
//! cargo run --release --example adiabatic_ramp

use std::f64::consts::PI;

use jcqoc::controls::{AdiabaticSchedule, RampSpec};
use jcqoc::fockspace::{enumerate_sector, LatticeConfig};
use jcqoc::model::{build_ht, Couplings, HamiltonianTemplates};
use jcqoc::propagate::{evolve, EvolveOptions};
use jcqoc::spectrum::ground_state;

fn main() -> jcqoc::Result<()> {
    let basis = enumerate_sector(&LatticeConfig::unit_filling(4)?, 4)?;
    let start = Couplings::new(0.0, 0.5);
    let end = Couplings::new(1.0, 0.02);
    let psi0 = ground_state(&build_ht(&basis, start))?.state;
    let target = ground_state(&build_ht(&basis, end))?.state;
    let templates = HamiltonianTemplates::new(basis);

    println!("{:>8} {:>9} {:>10} {:>12}", "T/pi", "fidelity", "dE_ave", "norm drift");
    for t_pi in [1.0, 1.90, 1.96, 2.23, 3.28, 3.30, 5.27, 8.0, 12.0] {
        let schedule = AdiabaticSchedule {
            ramp: RampSpec::new(start, end, t_pi * PI)?,
        };
        let traj = evolve(&templates, &psi0, &schedule, Some(&target), &EvolveOptions::default())?;
        println!(
            "{:8.2} {:9.4} {:10.4} {:12.1e}",
            t_pi,
            traj.final_fidelity().unwrap(),
            traj.delta_e_ave,
            traj.max_norm_drift
        );
    }
    Ok(())
}
