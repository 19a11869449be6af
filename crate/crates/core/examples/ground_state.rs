//! Ground states at the initial and target couplings, their distance, and the SPDM.
//!
//! cargo run --release --example ground_state

use std::f64::consts::PI;

use jcqoc::fockspace::{enumerate_sector, LatticeConfig};
use jcqoc::model::{build_ht, Couplings};
use jcqoc::spectrum::{analytic_mi_state, analytic_sf_state, bures_angle, fidelity, ground_state, spdm};

fn main() -> jcqoc::Result<()> {
    let lattice = LatticeConfig::unit_filling(4)?;
    let basis = enumerate_sector(&lattice, 4)?;
    println!("N = 4, M = 4: sector dimension {}", basis.dim());

    let sf = ground_state(&build_ht(&basis, Couplings::new(0.0, 0.5)))?;
    let mi = ground_state(&build_ht(&basis, Couplings::new(1.0, 0.0)))?;
    let target = ground_state(&build_ht(&basis, Couplings::new(1.0, 0.02)))?;

    println!("E0(g=0, J=0.5)  = {:.6}  gap {:.4}", sf.energy, sf.gap);
    println!("E0(g=1, J=0.02) = {:.6}  gap {:.4}", target.energy, target.gap);
    println!(
        "1 - F vs analytic superfluid: {:.2e}",
        1.0 - fidelity(&sf.state, &analytic_sf_state(&basis)?)?
    );
    println!(
        "1 - F vs analytic Mott product: {:.2e}",
        1.0 - fidelity(&mi.state, &analytic_mi_state(&basis, 1.0, 0.0)?)?
    );
    println!(
        "distance arccos|<psi0|psiT>| = {:.4} pi",
        bures_angle(&sf.state, &target.state)? / PI
    );

    for (name, gs) in [("initial", &sf), ("target", &target)] {
        println!("\n|rho1(i,j)| for the {name} state");
        for i in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|j| format!("{:7.4}", spdm(&gs.state, i, j).map(|z| z.norm()).unwrap_or(f64::NAN)))
                .collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
