//! A random CRAB pulse under tight bounds: the clipped waveform starts and ends on the ramp.
//!
//! cargo run --release --example crab_waveform > waveform.csv

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jcqoc::controls::{
    write_waveform_csv, AngularConvention, Constraints, ControlSchedule, CrabSchedule, RampSpec,
};
use jcqoc::model::Couplings;
use jcqoc::optimizer::random_params;

fn main() -> jcqoc::Result<()> {
    let ramp = RampSpec::new(Couplings::new(0.0, 0.5), Couplings::new(1.0, 0.02), 3.3 * PI)?;
    let schedule = CrabSchedule {
        ramp,
        params: random_params(&mut ChaCha8Rng::seed_from_u64(7)),
        constraints: Constraints::new(1.0, 1.0)?,
        convention: AngularConvention::Literal,
    };
    let start = schedule.couplings(0.0);
    let end = schedule.couplings(ramp.total_time);
    eprintln!("g(0) = {}, J(0) = {}, g(T) = {}, J(T) = {}", start.g, start.j_hop, end.g, end.j_hop);
    write_waveform_csv(&schedule, 501, std::io::stdout().lock())
}
