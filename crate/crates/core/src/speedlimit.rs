//! Quantum-speed-limit estimate `T_QSL ≈ arccos|⟨ψ₀|ψ_T⟩| / ΔE_ave`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagate::{average_energy_fluctuation, Trajectory};
use crate::spectrum::{bures_angle, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QslEstimate {
    /// Bures angle in radians.
    pub distance: f64,
    pub delta_e_ave: f64,
    pub t_qsl: f64,
}

impl QslEstimate {
    pub fn from_parts(distance: f64, delta_e_ave: f64) -> Result<Self> {
        if !(delta_e_ave > 0.0 && delta_e_ave.is_finite()) {
            return Err(Error::UndefinedSpeedLimit);
        }
        Ok(Self {
            distance,
            delta_e_ave,
            t_qsl: distance / delta_e_ave,
        })
    }
}

/// Uses the time-averaged energy spread recorded along `traj`.
pub fn estimate_qsl(psi0: &StateVector, target: &StateVector, traj: &Trajectory) -> Result<QslEstimate> {
    let distance = bures_angle(psi0, target)?;
    QslEstimate::from_parts(distance, average_energy_fluctuation(traj)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{AdiabaticSchedule, RampSpec};
    use crate::fockspace::{enumerate_sector, LatticeConfig};
    use crate::model::{build_ht, Couplings, HamiltonianTemplates};
    use crate::propagate::{evolve, EvolveOptions};
    use crate::spectrum::ground_state;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn orthogonal_states_unit_spread() {
        let q = QslEstimate::from_parts(PI / 2.0, 1.0).unwrap();
        assert_eq!(q.t_qsl, PI / 2.0);
        assert!(QslEstimate::from_parts(1.0, 0.0).is_err());
        assert!(QslEstimate::from_parts(1.0, f64::NAN).is_err());
    }

    fn run(scale: f64, phase: f64) -> QslEstimate {
        let b = enumerate_sector(&LatticeConfig::unit_filling(4).unwrap(), 4).unwrap();
        let start = Couplings::new(0.0, 0.5);
        let end = Couplings::new(1.0, 0.02);
        let psi0 = ground_state(&build_ht(&b, start)).unwrap().state;
        let target = ground_state(&build_ht(&b, end)).unwrap().state;
        let scaled = |c: Couplings| Couplings::new(c.g * scale, c.j_hop * scale);
        let ramp = RampSpec::new(scaled(start), scaled(end), 2.0 * PI / scale).unwrap();
        let traj = evolve(
            &HamiltonianTemplates::new(b),
            &psi0,
            &AdiabaticSchedule { ramp },
            Some(&target),
            &EvolveOptions::default(),
        )
        .unwrap();
        let rotated = target.scaled(Complex64::from_polar(1.0, phase));
        estimate_qsl(&psi0, &rotated, &traj).unwrap()
    }

    #[test]
    fn lattice_distance_and_scaling() {
        let base = run(1.0, 0.0);
        assert!((base.distance / PI - 0.469).abs() < 0.002);
        assert!(base.t_qsl > 0.0 && base.t_qsl < 2.0 * PI);
        let fast = run(2.0, 0.0);
        assert!((fast.t_qsl - base.t_qsl / 2.0).abs() < 1e-9 * base.t_qsl);
        let rotated = run(1.0, 1.3);
        assert!((rotated.t_qsl - base.t_qsl).abs() < 1e-12);
    }
}
