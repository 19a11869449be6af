use std::f64::consts::PI;
use std::sync::Arc;

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jcqoc::controls::{AdiabaticSchedule, AngularConvention, Constraints, ControlSchedule, CrabSchedule, RampSpec};
use jcqoc::fockspace::{enumerate_sector, LatticeConfig, SectorBasis};
use jcqoc::lindblad::{evolve_lindblad, DecoherenceRates, LindbladSystem};
use jcqoc::model::{build_ht, Couplings, HamiltonianTemplates};
use jcqoc::optimizer::random_params;
use jcqoc::propagate::{evolve, EvolveOptions};
use jcqoc::spectrum::ground_state;

fn sector(n: usize, m: usize) -> Arc<SectorBasis> {
    enumerate_sector(&LatticeConfig::new(n, m).unwrap(), m).unwrap()
}

fn crab(seed: u64, t_pi: f64, g_max: f64) -> CrabSchedule {
    CrabSchedule {
        ramp: RampSpec::new(Couplings::new(0.0, 0.5), Couplings::new(1.0, 0.02), t_pi * PI).unwrap(),
        params: random_params(&mut ChaCha8Rng::seed_from_u64(seed)),
        constraints: Constraints::new(g_max, 2.0).unwrap(),
        convention: AngularConvention::Literal,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_hermitian_and_excitation_conserving(
        g in -3.0..3.0f64,
        j in -3.0..3.0f64,
        omega_c in -2.0..2.0f64,
        delta in -1.0..1.0f64,
    ) {
        let c = Couplings::new(g, j).with_detuning(delta);
        let b = sector(3, 3);
        let h = HamiltonianTemplates::new(b.clone())
            .assemble(jcqoc::model::Coefficients::new(omega_c, c));
        prop_assert!(h.hermiticity_error() < 1e-12);
        prop_assert!(b.states().iter().all(|s| s.excitations() == 3));
        prop_assert_eq!(b.dim(), common::brute_force_sector(3, 3, 3).len());
        // the ladder construction only exists if H maps the sector into itself
        prop_assert!(h.max_abs_diff(&common::ladder_hamiltonian(&b, omega_c, c)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn clipped_waveform_respects_bounds(
        seed in any::<u64>(),
        t_pi in 0.5..6.0f64,
        x in 0.0..=1.0f64,
        g_max in prop::sample::select(vec![1.0, 2.0, 4.0]),
    ) {
        let s = crab(seed, t_pi, g_max);
        let c = s.couplings(x * s.total_time());
        prop_assert!(c.g.abs() <= g_max);
        prop_assert!(c.j_hop.abs() <= 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn crab_waveform_pinned_at_boundaries(seed in any::<u64>(), t_pi in 0.5..6.0f64) {
        let s = crab(seed, t_pi, 4.0);
        let a = s.couplings(0.0);
        let b = s.couplings(s.total_time());
        prop_assert!(a.g.abs() < 1e-12 && (a.j_hop - 0.5).abs() < 1e-12);
        prop_assert!((b.g - 1.0).abs() < 1e-12 && (b.j_hop - 0.02).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_evolution_keeps_norm(seed in any::<u64>(), t_pi in 1.0..4.0f64) {
        let b = sector(3, 3);
        let psi0 = ground_state(&build_ht(&b, Couplings::new(0.0, 0.5))).unwrap().state;
        let opts = EvolveOptions { track_energy: false, norm_tolerance: None, ..Default::default() };
        let traj = evolve(&HamiltonianTemplates::new(b), &psi0, &crab(seed, t_pi, 4.0), None, &opts).unwrap();
        prop_assert!(traj.max_norm_drift < 1e-8);
    }

    #[test]
    fn open_evolution_keeps_trace(kappa in 0.0..0.2f64, gamma in 0.0..0.2f64, gamma_d in 0.0..0.1f64) {
        let cfg = LatticeConfig::unit_filling(2).unwrap();
        let sys = LindbladSystem::new(&cfg).unwrap();
        let b = enumerate_sector(&cfg, 2).unwrap();
        let psi0 = ground_state(&build_ht(&b, Couplings::new(0.0, 0.5))).unwrap().state;
        let target = ground_state(&build_ht(&b, Couplings::new(1.0, 0.02))).unwrap().state;
        let schedule = AdiabaticSchedule {
            ramp: RampSpec::new(Couplings::new(0.0, 0.5), Couplings::new(1.0, 0.02), 2.0 * PI).unwrap(),
        };
        let rates = DecoherenceRates { kappa, gamma, gamma_d };
        let out = evolve_lindblad(&sys, &psi0, &schedule, &rates, &target, Some(1000)).unwrap();
        prop_assert!(out.max_trace_drift < 1e-8);
        prop_assert!(out.rho.hermiticity_error() < 1e-12);
        prop_assert!(out.rho.min_eigenvalue() > -1e-10);
    }
}

#[test]
fn fidelity_converges_under_step_halving() {
    let b = sector(4, 4);
    let psi0 = ground_state(&build_ht(&b, Couplings::new(0.0, 0.5))).unwrap().state;
    let target = ground_state(&build_ht(&b, Couplings::new(1.0, 0.02))).unwrap().state;
    let templates = HamiltonianTemplates::new(b);
    let s = crab(7, 3.3, 4.0);
    let fid = |steps: usize| {
        let opts = EvolveOptions { track_energy: false, ..Default::default() }.steps(steps);
        evolve(&templates, &psi0, &s, Some(&target), &opts).unwrap().final_fidelity().unwrap()
    };
    let (f1, f2) = (fid(4000), fid(8000));
    assert!((f1 - f2).abs() < 1e-8, "{f1} vs {f2}");
}
