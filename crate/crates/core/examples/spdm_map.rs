//! Long-range coherence |rho1(1,3)| of the ground state across the (g, J) plane.
//!
//! cargo run --release --example spdm_map

use jcqoc::fockspace::{enumerate_sector, LatticeConfig};
use jcqoc::model::{build_ht, Couplings};
use jcqoc::spectrum::{ground_state, spdm};

fn main() -> jcqoc::Result<()> {
    let basis = enumerate_sector(&LatticeConfig::unit_filling(4)?, 4)?;
    let gs: Vec<f64> = (0..=5).map(|k| 0.2 * k as f64).collect();
    let js: Vec<f64> = (1..=5).map(|k| 0.1 * k as f64).collect();

    print!("  J \\ g ");
    for g in &gs {
        print!("{g:7.2}");
    }
    println!();
    for &j in js.iter().rev() {
        print!("{j:7.2}");
        for &g in &gs {
            let psi = ground_state(&build_ht(&basis, Couplings::new(g, j)))?.state;
            print!("{:7.3}", spdm(&psi, 0, 2)?.norm());
        }
        println!();
    }
    Ok(())
}
