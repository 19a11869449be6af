//! Fixed-step Schrödinger propagation under a control schedule.
//!
//! The integrator is classical RK4 with the Hamiltonian sampled at the start,
//! midpoint and end of every step. Within a step the Hamiltonian is offset by
//! the instantaneous energy `⟨ψ|H|ψ⟩` of the step's initial state; a real
//! multiple of the identity only contributes a global phase, so fidelities and
//! energy fluctuations are unchanged while the RK4 truncation error is governed
//! by the energy spread of the state rather than its absolute energy.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controls::ControlSchedule;
use crate::error::{Error, Result};
use crate::fockspace::SparseOperator;
use crate::model::{HamiltonianTemplates, RealHamiltonian};
use crate::spectrum::{inner, StateVector};

/// Reporting-precision step count (`dt = T / 4000`).
pub const DEFAULT_STEPS: usize = 4000;
/// Step count on the optimizer's cost path.
pub const OPTIMIZER_STEPS: usize = 2000;
/// Integration steps between trajectory samples.
pub const DEFAULT_SAMPLE_EVERY: usize = 10;
/// Largest tolerated `| ‖ψ‖² - 1 |`.
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub steps: usize,
    /// Record a sample every this many steps (the endpoints are always kept).
    pub sample_every: usize,
    pub track_energy: bool,
    pub keep_states: bool,
    /// Fail when the norm drifts further than this; `None` disables the check.
    pub norm_tolerance: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            sample_every: DEFAULT_SAMPLE_EVERY,
            track_energy: true,
            keep_states: false,
            norm_tolerance: Some(NORM_TOLERANCE),
        }
    }
}

impl EvolveOptions {
    /// Options for a requested step size; the step count is rounded up.
    pub fn with_dt(total_time: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(dt <= total_time) {
            return Err(Error::InvalidConfig(format!(
                "time step {dt} must lie in (0, {total_time}]"
            )));
        }
        Ok(Self {
            steps: (total_time / dt).ceil() as usize,
            ..Self::default()
        })
    }

    pub fn steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
}

/// Sampled evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub g: Vec<f64>,
    pub j_hop: Vec<f64>,
    /// Empty when no target was supplied.
    pub fidelity_vs_t: Vec<f64>,
    /// Empty when energy tracking is off.
    pub delta_e_vs_t: Vec<f64>,
    pub delta_e_ave: f64,
    /// Empty unless requested.
    pub states: Vec<StateVector>,
    pub final_state: StateVector,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn total_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity_vs_t.last().copied()
    }

    /// CSV with header `t,g,J,fidelity,delta_e`; missing columns are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "g", "J", "fidelity", "delta_e"])?;
        for i in 0..self.times.len() {
            let opt = |v: &Vec<f64>| v.get(i).map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                self.times[i].to_string(),
                self.g[i].to_string(),
                self.j_hop[i].to_string(),
                opt(&self.fidelity_vs_t),
                opt(&self.delta_e_vs_t),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reusable scratch space for one propagation.
struct Rk4Workspace<'a> {
    h_start: RealHamiltonian<'a>,
    h_mid: RealHamiltonian<'a>,
    h_end: RealHamiltonian<'a>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Rk4Workspace<'a> {
    fn new(templates: &'a HamiltonianTemplates, schedule: &dyn ControlSchedule) -> Self {
        let c0 = templates.coefficients(schedule.couplings(0.0));
        let dim = templates.dim();
        let zero = vec![Complex64::default(); dim];
        Self {
            h_start: templates.real_matrix(c0),
            h_mid: templates.real_matrix(c0),
            h_end: templates.real_matrix(c0),
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        }
    }

    /// Advances `psi` from `t` to `t + h`; `h_start` must hold `H(t)` on entry
    /// and holds `H(t + h)` on exit.
    fn step(
        &mut self,
        templates: &HamiltonianTemplates,
        schedule: &dyn ControlSchedule,
        psi: &mut [Complex64],
        t: f64,
        h: f64,
    ) {
        let mi = Complex64::new(0.0, -1.0);
        self.h_mid
            .set(templates.coefficients(schedule.couplings(t + 0.5 * h)));
        self.h_end
            .set(templates.coefficients(schedule.couplings(t + h)));

        let [k1, k2, k3, k4] = &mut self.k;
        self.h_start.apply(psi, k1);
        let shift = inner(psi, k1).re / inner(psi, psi).re;
        for (k, p) in k1.iter_mut().zip(psi.iter()) {
            *k = mi * (*k - p * shift);
        }

        for ((x, p), k) in self.tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *x = p + k * (0.5 * h);
        }
        self.h_mid.apply_shifted(&self.tmp, shift, k2);
        k2.iter_mut().for_each(|k| *k *= mi);

        for ((x, p), k) in self.tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *x = p + k * (0.5 * h);
        }
        self.h_mid.apply_shifted(&self.tmp, shift, k3);
        k3.iter_mut().for_each(|k| *k *= mi);

        for ((x, p), k) in self.tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *x = p + k * h;
        }
        self.h_end.apply_shifted(&self.tmp, shift, k4);
        k4.iter_mut().for_each(|k| *k *= mi);

        let w = h / 6.0;
        for i in 0..psi.len() {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        std::mem::swap(&mut self.h_start, &mut self.h_end);
    }

    /// `ΔE` of `psi` under `h_start`.
    fn energy_spread(&mut self, psi: &[Complex64]) -> f64 {
        self.h_start.apply(psi, &mut self.tmp);
        spread(psi, &mut self.tmp)
    }
}

fn time_at(total: f64, n: usize, steps: usize) -> f64 {
    total * n as f64 / steps as f64
}

/// Propagates `psi0` through `schedule`, sampling along the way.
///
/// With a `target`, the fidelity `|⟨ψ(t)|target⟩|²` is recorded at each sample.
pub fn evolve(
    templates: &HamiltonianTemplates,
    psi0: &StateVector,
    schedule: &dyn ControlSchedule,
    target: Option<&StateVector>,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !psi0.basis().same_sector(templates.basis()) {
        return Err(Error::BasisMismatch);
    }
    if let Some(t) = target {
        if !t.basis().same_sector(templates.basis()) {
            return Err(Error::BasisMismatch);
        }
    }
    if opts.steps == 0 {
        return Err(Error::InvalidConfig("step count must be positive".into()));
    }
    let total = schedule.total_time();
    let h = total / opts.steps as f64;
    let every = opts.sample_every.max(1);
    let mut ws = Rk4Workspace::new(templates, schedule);
    let mut psi = psi0.amplitudes().to_vec();

    let mut traj = Trajectory {
        times: Vec::new(),
        g: Vec::new(),
        j_hop: Vec::new(),
        fidelity_vs_t: Vec::new(),
        delta_e_vs_t: Vec::new(),
        delta_e_ave: 0.0,
        states: Vec::new(),
        final_state: psi0.clone(),
        max_norm_drift: 0.0,
    };

    let record = |ws: &mut Rk4Workspace, psi: &[Complex64], t: f64, traj: &mut Trajectory| {
        let c = schedule.couplings(t);
        traj.times.push(t);
        traj.g.push(c.g);
        traj.j_hop.push(c.j_hop);
        let drift = (inner(psi, psi).re - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if let Some(target) = target {
            traj.fidelity_vs_t
                .push(inner(target.amplitudes(), psi).norm_sqr());
        }
        if opts.track_energy {
            traj.delta_e_vs_t.push(ws.energy_spread(psi));
        }
        if opts.keep_states {
            traj.states
                .push(StateVector::from_raw(psi0.basis().clone(), psi.to_vec()));
        }
    };

    record(&mut ws, &psi, 0.0, &mut traj);
    for n in 0..opts.steps {
        let t = time_at(total, n, opts.steps);
        ws.step(templates, schedule, &mut psi, t, h);
        if (n + 1) % every == 0 || n + 1 == opts.steps {
            record(&mut ws, &psi, time_at(total, n + 1, opts.steps), &mut traj);
        }
    }

    if let Some(tol) = opts.norm_tolerance {
        if traj.max_norm_drift > tol {
            return Err(Error::NormDrift {
                drift: traj.max_norm_drift,
                tolerance: tol,
            });
        }
    }
    if opts.track_energy {
        traj.delta_e_ave = trapezoid_average(&traj.times, &traj.delta_e_vs_t);
    }
    traj.final_state = StateVector::from_raw(psi0.basis().clone(), psi);
    Ok(traj)
}

/// Final amplitudes only; no sampling, no checks. Used on the cost path.
pub fn propagate_final(
    templates: &HamiltonianTemplates,
    psi0: &[Complex64],
    schedule: &dyn ControlSchedule,
    steps: usize,
) -> Vec<Complex64> {
    let total = schedule.total_time();
    let h = total / steps as f64;
    let mut ws = Rk4Workspace::new(templates, schedule);
    let mut psi = psi0.to_vec();
    for n in 0..steps {
        ws.step(templates, schedule, &mut psi, time_at(total, n, steps), h);
    }
    psi
}

/// `sqrt(⟨ψ|H²|ψ⟩ - ⟨ψ|H|ψ⟩²)`, clamped at zero.
pub fn energy_fluctuation(psi: &StateVector, h: &SparseOperator) -> Result<f64> {
    if !h.rows().same_sector(psi.basis()) || !h.is_square() {
        return Err(Error::BasisMismatch);
    }
    let a = psi.amplitudes();
    let mut ha = h.apply(a);
    Ok(spread(a, &mut ha))
}

/// `‖(H - ⟨H⟩)ψ‖ / ‖ψ‖` given `hpsi = Hψ`; overwrites `hpsi` with the residual.
///
/// Equal to `sqrt(⟨H²⟩ - ⟨H⟩²)` but free of the cancellation in that form.
fn spread(psi: &[Complex64], hpsi: &mut [Complex64]) -> f64 {
    let n2 = inner(psi, psi).re;
    let mean = inner(psi, hpsi).re / n2;
    for (r, p) in hpsi.iter_mut().zip(psi) {
        *r -= p * mean;
    }
    (inner(hpsi, hpsi).re / n2).sqrt()
}

/// `(1/T) ∫ ΔE(t) dt` by the trapezoidal rule over the trajectory samples.
pub fn average_energy_fluctuation(traj: &Trajectory) -> Result<f64> {
    if traj.times.len() < 2 || traj.delta_e_vs_t.len() != traj.times.len() {
        return Err(Error::InvalidConfig(
            "average needs at least two energy samples".into(),
        ));
    }
    Ok(trapezoid_average(&traj.times, &traj.delta_e_vs_t))
}

pub(crate) fn trapezoid_average(t: &[f64], y: &[f64]) -> f64 {
    if t.len() < 2 {
        return y.first().copied().unwrap_or(0.0);
    }
    let integral: f64 = t
        .windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum();
    integral / (t[t.len() - 1] - t[0])
}
