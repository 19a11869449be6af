//! Nelder-Mead pulse optimization, threshold-time search and noise studies.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controls::{
    standard_noise, AngularConvention, Constraints, ControlSchedule, CrabParams, CrabSchedule,
    NoisySchedule, RampSpec, HARMONICS, N_PARAMS,
};
use crate::error::{Error, Result};
use crate::model::HamiltonianTemplates;
use crate::propagate::{propagate_final, DEFAULT_STEPS, OPTIMIZER_STEPS};
use crate::spectrum::StateVector;

pub const DEFAULT_THRESHOLD_FIDELITY: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub max_iterations: usize,
    /// Stop once `f_worst - f_best` over the simplex falls below this.
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub initial_step: f64,
    /// Stop as soon as the best cost reaches this value.
    pub target_cost: Option<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iterations: 150_000,
            tolerance: 1e-8,
            restarts: 5,
            seed: 0,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            target_cost: None,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.reflection > 0.0) {
            return bad("reflection coefficient must be positive");
        }
        if !(self.expansion > 1.0) || self.expansion <= self.reflection {
            return bad("expansion coefficient must exceed 1 and the reflection coefficient");
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction coefficient must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink coefficient must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial simplex step must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    TargetReached,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    /// `(iteration, best cost)` every time the best vertex improves.
    pub history: Vec<(usize, f64)>,
}

/// Nelder-Mead downhill simplex. Non-finite objective values count as `+inf`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &OptimizerOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let best_of = |values: &[f64]| {
        let mut b = 0;
        for (i, &v) in values.iter().enumerate() {
            if v < values[b] {
                b = i;
            }
        }
        b
    };
    let mut best = best_of(&values);
    let mut history = vec![(0usize, values[best])];
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let trial = |c: &[f64], w: &[f64], coef: f64, out: &mut Vec<f64>| {
        out.clear();
        out.extend(c.iter().zip(w).map(|(c, w)| c + coef * (c - w)));
    };
    let mut xr = Vec::with_capacity(n);
    let mut xe = Vec::with_capacity(n);
    let mut xc = Vec::with_capacity(n);

    let mut iterations = 0;
    let stop = loop {
        if let Some(target) = opts.target_cost {
            if values[best] <= target {
                break StopReason::TargetReached;
            }
        }
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let (lo, hi, second) = (order[0], order[n], order[n - 1]);
        if values[hi] - values[lo] < opts.tolerance {
            break StopReason::Converged;
        }
        if iterations >= opts.max_iterations {
            break StopReason::IterationCap;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        trial(&centroid, &simplex[hi], opts.reflection, &mut xr);
        let fr = eval(&xr);
        if fr < values[lo] {
            trial(&centroid, &simplex[hi], opts.reflection * opts.expansion, &mut xe);
            let fe = eval(&xe);
            if fe < fr {
                simplex[hi].clone_from(&xe);
                values[hi] = fe;
            } else {
                simplex[hi].clone_from(&xr);
                values[hi] = fr;
            }
        } else if fr < values[second] {
            simplex[hi].clone_from(&xr);
            values[hi] = fr;
        } else {
            let outside = fr < values[hi];
            if outside {
                trial(&centroid, &simplex[hi], opts.reflection * opts.contraction, &mut xc);
            } else {
                trial(&centroid, &simplex[hi], -opts.contraction, &mut xc);
            }
            let fc = eval(&xc);
            if (outside && fc <= fr) || (!outside && fc < values[hi]) {
                simplex[hi].clone_from(&xc);
                values[hi] = fc;
            } else {
                let anchor = simplex[lo].clone();
                for &i in &order[1..] {
                    for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                        *x = a + opts.shrink * (*x - a);
                    }
                    values[i] = eval(&simplex[i]);
                }
            }
        }

        let b = best_of(&values);
        if values[b] < history.last().unwrap().1 {
            history.push((iterations, values[b]));
        }
        best = b;
    };

    NelderMeadResult {
        x_best: simplex[best].clone(),
        f_best: values[best],
        iterations,
        evaluations,
        stop,
        history,
    }
}

/// Everything the infidelity cost needs besides the pulse parameters.
#[derive(Debug, Clone)]
pub struct PulseProblem {
    pub templates: Arc<HamiltonianTemplates>,
    pub psi0: StateVector,
    pub target: StateVector,
    pub ramp: RampSpec,
    pub constraints: Constraints,
    pub convention: AngularConvention,
    /// RK4 steps on the optimization path.
    pub optimizer_steps: usize,
    /// RK4 steps for reported fidelities.
    pub report_steps: usize,
    pub threshold_fidelity: f64,
}

impl PulseProblem {
    pub fn new(
        templates: Arc<HamiltonianTemplates>,
        psi0: StateVector,
        target: StateVector,
        ramp: RampSpec,
        constraints: Constraints,
    ) -> Result<Self> {
        ramp.validate()?;
        constraints.validate()?;
        constraints.admit(&ramp)?;
        if !psi0.basis().same_sector(templates.basis()) || !target.basis().same_sector(templates.basis())
        {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            templates,
            psi0,
            target,
            ramp,
            constraints,
            convention: AngularConvention::default(),
            optimizer_steps: OPTIMIZER_STEPS,
            report_steps: DEFAULT_STEPS,
            threshold_fidelity: DEFAULT_THRESHOLD_FIDELITY,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.ramp.total_time
    }

    pub fn with_total_time(&self, total_time: f64) -> Result<Self> {
        let mut p = self.clone();
        p.ramp = self.ramp.with_total_time(total_time)?;
        Ok(p)
    }

    pub fn with_constraints(&self, constraints: Constraints) -> Result<Self> {
        constraints.validate()?;
        constraints.admit(&self.ramp)?;
        let mut p = self.clone();
        p.constraints = constraints;
        Ok(p)
    }

    pub fn schedule(&self, params: CrabParams) -> CrabSchedule {
        CrabSchedule {
            ramp: self.ramp,
            params,
            constraints: self.constraints,
            convention: self.convention,
        }
    }

    /// `|⟨ψ_T|ψ(T)⟩|²` after evolving under `schedule` for `steps` RK4 steps.
    pub fn fidelity_of(&self, schedule: &dyn ControlSchedule, steps: usize) -> f64 {
        let psi = propagate_final(&self.templates, self.psi0.amplitudes(), schedule, steps);
        overlap_fidelity(self.target.amplitudes(), &psi)
    }

    pub fn fidelity(&self, params: CrabParams) -> f64 {
        self.fidelity_of(&self.schedule(params), self.report_steps)
    }
}

fn overlap_fidelity(target: &[Complex64], psi: &[Complex64]) -> f64 {
    let mut ov = Complex64::new(0.0, 0.0);
    let mut nn = 0.0;
    for (t, p) in target.iter().zip(psi) {
        ov += t.conj() * p;
        nn += p.norm_sqr();
    }
    (ov.norm_sqr() / nn).clamp(0.0, 1.0)
}

/// Infidelity `1 - F` on the optimization-path step count.
pub fn cost(params: &CrabParams, problem: &PulseProblem) -> f64 {
    1.0 - problem.fidelity_of(&problem.schedule(*params), problem.optimizer_steps)
}

fn cost_slice(x: &[f64], problem: &PulseProblem) -> f64 {
    match CrabParams::from_slice(x) {
        Ok(p) => cost(&p, problem),
        Err(_) => f64::INFINITY,
    }
}

/// `c, d ~ U(-1, 1)`, `δω ~ U(-0.5, 0.5)`.
pub fn random_params(rng: &mut impl Rng) -> CrabParams {
    let mut x = vec![0.0; N_PARAMS];
    for (i, v) in x.iter_mut().enumerate() {
        *v = if i < 4 * HARMONICS {
            rng.random_range(-1.0..1.0)
        } else {
            rng.random_range(-0.5..0.5)
        };
    }
    CrabParams::from_slice(&x).expect("finite draws")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub seed: u64,
    pub warm_start: bool,
    pub fidelity: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub total_time: f64,
    pub constraints: Constraints,
    pub best_params: CrabParams,
    /// Recomputed at the reporting step count.
    pub best_fidelity: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub success: bool,
    /// `(iteration, fidelity)` of the selected restart, one entry per improvement.
    pub fidelity_history: Vec<(usize, f64)>,
    pub restarts: Vec<RestartSummary>,
    pub wall_time: f64,
}

struct RestartOutcome {
    summary: RestartSummary,
    params: CrabParams,
    result: NelderMeadResult,
}

fn run_restart(
    problem: &PulseProblem,
    opts: &OptimizerOptions,
    index: usize,
    start: Option<&CrabParams>,
) -> RestartOutcome {
    let seed = opts.seed.wrapping_add(index as u64);
    let x0 = match start {
        Some(p) => *p,
        None => random_params(&mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let result = nelder_mead(|x| cost_slice(x, problem), &x0.to_vec(), opts);
    let params = CrabParams::from_slice(&result.x_best).expect("simplex stays finite");
    let fidelity = problem.fidelity(params);
    RestartOutcome {
        summary: RestartSummary {
            index,
            seed,
            warm_start: start.is_some(),
            fidelity,
            iterations: result.iterations,
            evaluations: result.evaluations,
            stop: result.stop,
        },
        params,
        result,
    }
}

/// Runs up to `opts.restarts` independent Nelder-Mead searches.
///
/// Restart `i` is seeded with `opts.seed + i`; if `warm_start` is given it
/// replaces the random start of restart 0. Restarts run in batches the size
/// of the rayon pool and the first batch containing a success ends the
/// search, so the selected restart (lowest successful index, otherwise the
/// best fidelity) does not depend on the pool size.
pub fn optimize_pulse(
    problem: &PulseProblem,
    opts: &OptimizerOptions,
    warm_start: Option<&CrabParams>,
) -> Result<OptimizationReport> {
    opts.validate()?;
    let clock = Instant::now();
    let batch = rayon::current_num_threads().max(1);
    let mut outcomes: Vec<RestartOutcome> = Vec::new();
    let mut next = 0;
    while next < opts.restarts {
        let end = (next + batch).min(opts.restarts);
        let mut fresh: Vec<RestartOutcome> = (next..end)
            .into_par_iter()
            .map(|i| run_restart(problem, opts, i, if i == 0 { warm_start } else { None }))
            .collect();
        outcomes.append(&mut fresh);
        next = end;
        if outcomes
            .iter()
            .any(|o| o.summary.fidelity >= problem.threshold_fidelity)
        {
            break;
        }
    }

    let chosen = outcomes
        .iter()
        .find(|o| o.summary.fidelity >= problem.threshold_fidelity)
        .or_else(|| {
            outcomes.iter().fold(None, |acc: Option<&RestartOutcome>, o| match acc {
                Some(a) if a.summary.fidelity >= o.summary.fidelity => Some(a),
                _ => Some(o),
            })
        })
        .expect("at least one restart");

    Ok(OptimizationReport {
        total_time: problem.total_time(),
        constraints: problem.constraints,
        best_params: chosen.params,
        best_fidelity: chosen.summary.fidelity,
        iterations_used: chosen.result.iterations,
        converged: chosen.result.stop != StopReason::IterationCap,
        success: chosen.summary.fidelity >= problem.threshold_fidelity,
        fidelity_history: chosen
            .result
            .history
            .iter()
            .map(|&(it, c)| (it, 1.0 - c))
            .collect(),
        restarts: outcomes.iter().map(|o| o.summary.clone()).collect(),
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// Grid for the threshold search, in units of π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdScan {
    pub t_min: f64,
    pub t_max: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
    /// Seed each optimization with the best pulse of the closest successful
    /// scanned time. Off by default, so every point starts from random parameters.
    pub warm_start: bool,
}

impl Default for ThresholdScan {
    fn default() -> Self {
        Self {
            t_min: 1.0,
            t_max: 6.0,
            coarse_step: 0.25,
            fine_step: 0.01,
            warm_start: false,
        }
    }
}

impl ThresholdScan {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::InvalidConfig("threshold scan needs 0 < t_min < t_max".into()));
        }
        if !(self.fine_step > 0.0 && self.coarse_step >= self.fine_step) {
            return Err(Error::InvalidConfig(
                "threshold scan needs 0 < fine_step <= coarse_step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub total_time: f64,
    pub best_fidelity: f64,
    pub success: bool,
    pub report: OptimizationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub constraints: Constraints,
    /// `None` when no scanned time reached the threshold.
    pub t_threshold: Option<f64>,
    pub threshold_fidelity: f64,
    /// Every optimized time in scan order.
    pub scan_points: Vec<ScanPoint>,
}

impl ThresholdResult {
    pub fn threshold_point(&self) -> Option<&ScanPoint> {
        let t = self.t_threshold?;
        self.scan_points.iter().find(|p| p.total_time == t)
    }

    pub fn best_point(&self) -> &ScanPoint {
        self.scan_points
            .iter()
            .max_by(|a, b| a.best_fidelity.total_cmp(&b.best_fidelity))
            .expect("at least one scan point")
    }

    /// The threshold time, or [`Error::ThresholdNotFound`] with the best scanned point.
    pub fn require(&self) -> Result<f64> {
        self.t_threshold.ok_or_else(|| {
            let best = self.best_point();
            Error::ThresholdNotFound {
                threshold: self.threshold_fidelity,
                best_time: best.total_time,
                best_fidelity: best.best_fidelity,
            }
        })
    }
}

/// Grid index `k` ↔ `T = k · fine_step · π`.
fn grid_time(k: i64, scan: &ThresholdScan) -> f64 {
    k as f64 * scan.fine_step * PI
}

/// Smallest scanned `T` at which the optimizer reaches the threshold fidelity.
///
/// Coarse pass walks down from `t_max` in `coarse_step` until the first
/// failure, then bisects the bracketing interval on the `fine_step` grid.
/// If even `t_max` fails the result has no threshold and a single scan point.
pub fn threshold_time(
    problem: &PulseProblem,
    scan: &ThresholdScan,
    opts: &OptimizerOptions,
) -> Result<ThresholdResult> {
    scan.validate()?;
    let per = |x: f64| (x / scan.fine_step).round() as i64;
    let k_min = per(scan.t_min).max(1);
    let k_max = per(scan.t_max);
    let k_coarse = per(scan.coarse_step).max(1);

    let mut points: Vec<(i64, ScanPoint)> = Vec::new();
    let run = |k: i64, points: &mut Vec<(i64, ScanPoint)>| -> Result<bool> {
        let t = grid_time(k, scan);
        let warm = if scan.warm_start {
            points
                .iter()
                .filter(|(_, p)| p.success)
                .min_by_key(|(kk, _)| (kk - k).abs())
                .map(|(_, p)| p.report.best_params)
        } else {
            None
        };
        let report = optimize_pulse(&problem.with_total_time(t)?, opts, warm.as_ref())?;
        let success = report.success;
        points.push((
            k,
            ScanPoint {
                total_time: t,
                best_fidelity: report.best_fidelity,
                success,
                report,
            },
        ));
        Ok(success)
    };

    let mut hi = None;
    let mut lo = None;
    let mut k = k_max;
    loop {
        if run(k, &mut points)? {
            hi = Some(k);
        } else {
            lo = Some(k);
            break;
        }
        if k == k_min {
            break;
        }
        k = (k - k_coarse).max(k_min);
    }

    if let (Some(h), Some(mut lo)) = (hi.as_mut(), lo) {
        while *h - lo > 1 {
            let mid = lo + (*h - lo) / 2;
            if run(mid, &mut points)? {
                *h = mid;
            } else {
                lo = mid;
            }
        }
    }

    let t_threshold = hi.map(|k| grid_time(k, scan));
    Ok(ThresholdResult {
        constraints: problem.constraints,
        t_threshold,
        threshold_fidelity: problem.threshold_fidelity,
        scan_points: points.into_iter().map(|(_, p)| p).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseStatistics {
    pub sigma: f64,
    pub samples: usize,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
}

impl NoiseStatistics {
    pub fn standard_error(&self) -> f64 {
        self.std_fidelity / (self.samples as f64).sqrt()
    }
}

/// Mean and sample standard deviation of the final fidelity under control noise.
///
/// Sample `i` uses the unit realization seeded with `seed + i` for every σ,
/// so curves over σ share their random numbers.
pub fn noise_robustness(
    problem: &PulseProblem,
    params: &CrabParams,
    sigmas: &[f64],
    n_samples: usize,
    grid_points: usize,
    seed: u64,
) -> Result<Vec<NoiseStatistics>> {
    if n_samples == 0 {
        return Err(Error::InvalidConfig("noise study needs at least one sample".into()));
    }
    if grid_points == 0 {
        return Err(Error::InvalidConfig("noise grid needs at least one bin".into()));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidConfig(format!("noise sigma {s} must be finite and >= 0")));
    }
    let schedule = problem.schedule(*params);
    let realizations: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples)
        .map(|i| standard_noise(grid_points, seed.wrapping_add(i as u64)))
        .collect();

    let mut out = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let fids: Vec<f64> = if sigma == 0.0 {
            vec![problem.fidelity(*params); n_samples]
        } else {
            realizations
                .par_iter()
                .map(|(dg, dj)| {
                    let noisy = NoisySchedule::from_standard(schedule, sigma, dg.clone(), dj.clone());
                    problem.fidelity_of(&noisy, problem.report_steps)
                })
                .collect()
        };
        let n = fids.len() as f64;
        let mean = fids[0] + fids.iter().map(|f| f - fids[0]).sum::<f64>() / n;
        let var = if fids.len() > 1 {
            fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        out.push(NoiseStatistics {
            sigma,
            samples: fids.len(),
            mean_fidelity: mean,
            std_fidelity: var.sqrt(),
        });
    }
    Ok(out)
}
