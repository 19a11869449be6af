//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Optimized pulses are cached under `target/tmp/acceptance/`, keyed by the
//! run configuration hash; delete that directory to recompute them.
//! A failing stochastic criterion is reported but does not fail the run.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use jcqoc::app::Workbench;
use jcqoc::config::{Bounds, RunConfig};
use jcqoc::controls::{AdiabaticSchedule, ControlSchedule};
use jcqoc::fockspace::{enumerate_sector, LatticeConfig};
use jcqoc::lindblad::{evolve_lindblad, DecoherenceRates, LindbladSystem};
use jcqoc::model::{build_ht, Couplings, HamiltonianTemplates};
use jcqoc::optimizer::{
    nelder_mead, noise_robustness, optimize_pulse, random_params, threshold_time, NoiseStatistics,
    OptimizationReport, OptimizerOptions, ThresholdResult,
};
use jcqoc::propagate::{evolve, EvolveOptions};
use jcqoc::spectrum::{analytic_mi_state, analytic_sf_state, bures_angle, fidelity, ground_state};
use jcqoc::Result;

mod common;

const ADIABATIC_GOLDEN: [(f64, f64); 6] = [
    (5.27, 0.6610),
    (3.30, 0.42),
    (3.28, 0.4223),
    (2.23, 0.3995),
    (1.96, 0.3276),
    (1.90, 0.3001),
];
const ADIABATIC_TOL: f64 = 0.01;
const ADIABATIC_SECONDS: f64 = 10.0;
const DISTANCE_OVER_PI: f64 = 0.469;
const DISTANCE_TOL: f64 = 0.002;
const DISTANCE_SECONDS: f64 = 1.0;
const ORACLE_FIDELITY: f64 = 1.0 - 1e-10;
const SECTOR_DIMS: [usize; 5] = [1, 8, 32, 88, 192];

const QOC_TIME_PI: f64 = 3.30;
const QOC_RESTARTS: usize = 5;
const QOC_ITERATIONS: usize = 4000;
const QOC_LOW_FLOOR: f64 = 0.80;
const QOC_SECONDS: f64 = 7200.0;

const SCAN_RESTARTS: usize = 2;
const SCAN_ITERATIONS: usize = 3000;
const THRESHOLD_PAPER_PI: [f64; 3] = [1.96, 3.28, 5.27];
const THRESHOLD_BAND_PI: f64 = 0.5;

const LINDBLAD_DROP: (f64, f64) = (0.0005, 0.005);
const ZERO_RATE_TOL: f64 = 1e-6;

const POLISH_ITERATIONS: usize = 3000;
const NOISE_SAMPLES: usize = 200;
const NOISE_SIGMAS: [f64; 6] = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05];
const NOISE_FLOOR: f64 = 0.985;
const NOISE_PAPER: [f64; 3] = [0.9902, 0.9910, 0.9948];
const NOISE_TOL: f64 = 0.005;

const NORM_DRIFT: f64 = 1e-8;
const TRACE_DRIFT: f64 = 1e-8;
const CLIP_PROBES: usize = 10_000;
const PIN_DRAWS: usize = 100;
const STEP_HALVING_TOL: f64 = 1e-8;

/// Constraint sets in the order g_max = 1, 2, 4.
const BOUNDS: [Bounds; 3] = [
    Bounds { g_max: 1.0, j_max: 2.0 },
    Bounds { g_max: 2.0, j_max: 2.0 },
    Bounds { g_max: 4.0, j_max: 2.0 },
];

struct Verdict {
    pass: bool,
    detail: String,
}

struct Harness {
    failed_deterministic: usize,
    failed_stochastic: usize,
}

impl Harness {
    fn check(&mut self, id: usize, name: &str, stochastic: bool, f: impl FnOnce() -> Result<Verdict>) {
        let clock = Instant::now();
        let v = f().unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!("error: {e}"),
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {id} {name} [{:.1}s] {}",
            clock.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            if stochastic {
                self.failed_stochastic += 1;
            } else {
                self.failed_deterministic += 1;
            }
        }
    }
}

/// Defaults with the optimization path on 1000 RK4 steps and an early stop
/// slightly above the threshold so the reporting grid still clears it.
fn budget_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.evolution.optimizer_steps = 1000;
    c.optimizer.target_cost = Some(0.009);
    c
}

fn cached<T: Serialize + DeserializeOwned>(kind: &str, cfg: &RunConfig, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let path = dir.join(format!("{kind}-{}.json", &cfg.hash()[..16]));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(v) = serde_json::from_str(&text) {
            return Ok(v);
        }
    }
    let v = f()?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(&path, serde_json::to_string(&v).expect("serializes"))?;
    Ok(v)
}

fn qoc_config(bounds: Bounds) -> RunConfig {
    let mut c = budget_config();
    c.constraints = bounds;
    c.evolution.total_time_pi = QOC_TIME_PI;
    c.optimizer.restarts = QOC_RESTARTS;
    c.optimizer.max_iterations = QOC_ITERATIONS;
    c
}

fn scan_config(bounds: Bounds) -> RunConfig {
    let mut c = budget_config();
    c.constraints = bounds;
    c.threshold.constraints = vec![bounds];
    c.optimizer.restarts = SCAN_RESTARTS;
    c.optimizer.max_iterations = SCAN_ITERATIONS;
    c
}

fn qoc_report(bench: &Workbench, bounds: Bounds) -> Result<OptimizationReport> {
    let cfg = qoc_config(bounds);
    cached("qoc", &cfg, || {
        let problem = bench.problem(&cfg, cfg.evolution.total_time(), bounds)?;
        optimize_pulse(&problem, &cfg.optimizer_options(), None)
    })
}

fn threshold_scan(bench: &Workbench, bounds: Bounds) -> Result<ThresholdResult> {
    let cfg = scan_config(bounds);
    cached("threshold", &cfg, || {
        let scan = cfg.threshold.scan();
        let problem = bench.problem(&cfg, scan.t_max * PI, bounds)?;
        threshold_time(&problem, &scan, &cfg.optimizer_options())
    })
}

/// Runs the threshold pulse on to convergence (or the iteration cap) without the early stop.
fn polished_pulse(bench: &Workbench, bounds: Bounds, th: &ThresholdResult) -> Result<OptimizationReport> {
    let mut cfg = scan_config(bounds);
    th.require()?;
    let point = th.threshold_point().expect("threshold has a scan point");
    cfg.evolution.total_time_pi = point.total_time / PI;
    cfg.optimizer.target_cost = None;
    cfg.optimizer.restarts = 1;
    cfg.optimizer.max_iterations = POLISH_ITERATIONS;
    let start = point.report.best_params;
    cached("polished", &cfg, || {
        let problem = bench.problem(&cfg, point.total_time, bounds)?;
        optimize_pulse(&problem, &cfg.optimizer_options(), Some(&start))
    })
}

fn main() {
    let mut h = Harness {
        failed_deterministic: 0,
        failed_stochastic: 0,
    };
    let base = budget_config();
    let bench = Workbench::new(&base).expect("default lattice builds");

    h.check(1, "adiabatic golden values", false, || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (t_pi, expected) in ADIABATIC_GOLDEN {
            let clock = Instant::now();
            let schedule = AdiabaticSchedule { ramp: base.ramp(t_pi * PI)? };
            let f = bench.trajectory(&base, &schedule)?.final_fidelity().unwrap_or(f64::NAN);
            let secs = clock.elapsed().as_secs_f64();
            pass &= (f - expected).abs() <= ADIABATIC_TOL && secs < ADIABATIC_SECONDS;
            parts.push(format!("T={t_pi:.2}pi F={f:.4} ({expected})"));
        }
        Ok(Verdict { pass, detail: parts.join(", ") })
    });

    h.check(2, "initial-target distance", false, || {
        let clock = Instant::now();
        let lattice = LatticeConfig::unit_filling(4)?;
        let b = enumerate_sector(&lattice, 4)?;
        let psi0 = ground_state(&build_ht(&b, base.initial()))?.state;
        let target = ground_state(&build_ht(&b, base.target()))?.state;
        let d = bures_angle(&psi0, &target)? / PI;
        let secs = clock.elapsed().as_secs_f64();
        Ok(Verdict {
            pass: (d - DISTANCE_OVER_PI).abs() <= DISTANCE_TOL && secs < DISTANCE_SECONDS,
            detail: format!("distance = {d:.4} pi in {secs:.3}s"),
        })
    });

    h.check(3, "analytic limits", false, || {
        let b = enumerate_sector(&LatticeConfig::unit_filling(4)?, 4)?;
        let sf = fidelity(&ground_state(&build_ht(&b, Couplings::new(0.0, 0.5)))?.state, &analytic_sf_state(&b)?)?;
        let mi = fidelity(&ground_state(&build_ht(&b, Couplings::new(1.0, 0.0)))?.state, &analytic_mi_state(&b, 1.0, 0.0)?)?;
        Ok(Verdict {
            pass: sf > ORACLE_FIDELITY && mi > ORACLE_FIDELITY,
            detail: format!("SF 1-F = {:.1e}, MI 1-F = {:.1e}", 1.0 - sf, 1.0 - mi),
        })
    });

    h.check(4, "sector dimensions", false, || {
        let lattice = LatticeConfig::unit_filling(4)?;
        let mut pass = true;
        let mut dims = Vec::new();
        for (m, &expected) in SECTOR_DIMS.iter().enumerate() {
            let b = enumerate_sector(&lattice, m)?;
            let ours: std::collections::BTreeSet<_> =
                b.states().iter().map(|s| (s.photons().to_vec(), s.qubits().to_vec())).collect();
            let brute = common::brute_force_sector(4, lattice.fock_cutoff, m);
            pass &= b.dim() == expected && ours == brute;
            dims.push(b.dim().to_string());
        }
        Ok(Verdict { pass, detail: format!("dims = [{}]", dims.join(", ")) })
    });

    let mut qoc: Vec<Option<OptimizationReport>> = vec![None, None, None];
    h.check(5, "optimal control at T = 3.30 pi", true, || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (i, bounds) in BOUNDS.iter().enumerate() {
            let r = qoc_report(&bench, *bounds)?;
            let ok = if bounds.g_max == 1.0 {
                r.best_fidelity < 0.99 && r.best_fidelity > QOC_LOW_FLOOR
            } else {
                r.best_fidelity >= 0.99
            };
            pass &= ok && r.wall_time < QOC_SECONDS;
            parts.push(format!(
                "g_max={} F={:.4} ({} restarts, {:.0}s)",
                bounds.g_max,
                r.best_fidelity,
                r.restarts.len(),
                r.wall_time
            ));
            qoc[i] = Some(r);
        }
        Ok(Verdict { pass, detail: parts.join(", ") })
    });

    let mut thresholds: Vec<Option<ThresholdResult>> = vec![None, None, None];
    h.check(6, "threshold-time ordering", true, || {
        let mut parts = Vec::new();
        let mut times = Vec::new();
        for (i, bounds) in BOUNDS.iter().enumerate() {
            let th = threshold_scan(&bench, *bounds)?;
            let t = th.t_threshold.map(|t| t / PI);
            parts.push(match t {
                Some(t) => format!("g_max={} T_th={t:.2}pi ({})", bounds.g_max, THRESHOLD_PAPER_PI[2 - i]),
                None => format!("g_max={} no threshold", bounds.g_max),
            });
            times.push(t);
            thresholds[i] = Some(th);
        }
        let pass = match (times[0], times[1], times[2]) {
            (Some(t1), Some(t2), Some(t4)) => {
                let band = [t4, t2, t1]
                    .iter()
                    .zip(THRESHOLD_PAPER_PI)
                    .all(|(t, p)| (t - p).abs() <= THRESHOLD_BAND_PI);
                t4 < t2 && t2 < t1 && band
            }
            _ => false,
        };
        Ok(Verdict { pass, detail: parts.join(", ") })
    });

    let mut trace_drift = 0.0f64;
    h.check(7, "decoherence-induced fidelity drop", false, || {
        let system = LindbladSystem::new(&base.lattice_config()?)?;
        let rates = DecoherenceRates::superconducting();
        let mut pass = true;
        let mut parts = Vec::new();
        for (bounds, report) in BOUNDS.iter().zip(&qoc) {
            let Some(report) = report else {
                return Ok(Verdict { pass: false, detail: "no optimized pulses".into() });
            };
            let cfg = qoc_config(*bounds);
            let problem = bench.problem(&cfg, report.total_time, *bounds)?;
            let schedule = problem.schedule(report.best_params);
            let steps = Some(cfg.evolution.steps_for(report.total_time));
            let (psi0, target) = (&bench.initial.state, &bench.target.state);
            let open = evolve_lindblad(&system, psi0, &schedule, &rates, target, steps)?;
            let zero = evolve_lindblad(&system, psi0, &schedule, &DecoherenceRates::new(0.0, 0.0)?, target, steps)?;
            let closed = problem.fidelity(report.best_params);
            let (f_open, f_zero) = (open.fidelity.unwrap(), zero.fidelity.unwrap());
            let drop = f_zero - f_open;
            trace_drift = trace_drift.max(open.max_trace_drift).max(zero.max_trace_drift);
            pass &= drop >= LINDBLAD_DROP.0 && drop <= LINDBLAD_DROP.1 && (f_zero - closed).abs() < ZERO_RATE_TOL;
            parts.push(format!(
                "g_max={} drop={drop:.5} |F0-Fclosed|={:.1e}",
                bounds.g_max,
                (f_zero - closed).abs()
            ));
        }
        Ok(Verdict { pass, detail: parts.join(", ") })
    });

    h.check(8, "noise robustness at T_th", true, || {
        let mut pass = true;
        let mut parts = Vec::new();
        for (i, bounds) in BOUNDS.iter().enumerate() {
            let Some(th) = &thresholds[i] else {
                return Ok(Verdict { pass: false, detail: "no threshold scans".into() });
            };
            let pulse = polished_pulse(&bench, *bounds, th)?;
            let cfg = scan_config(*bounds);
            let problem = bench.problem(&cfg, pulse.total_time, *bounds)?;
            let stats: Vec<NoiseStatistics> = cached("noise", &{
                let mut c = cfg.clone();
                c.evolution.total_time_pi = pulse.total_time / PI;
                c.noise.samples = NOISE_SAMPLES;
                c.noise.sigmas = NOISE_SIGMAS.to_vec();
                c
            }, || {
                noise_robustness(
                    &problem,
                    &pulse.best_params,
                    &NOISE_SIGMAS,
                    NOISE_SAMPLES,
                    cfg.noise.grid_points,
                    cfg.noise_seed(),
                )
            })?;
            let last = stats.last().unwrap();
            let monotone = stats.windows(2).all(|w| {
                let slack = 2.0 * w[0].standard_error().hypot(w[1].standard_error());
                w[1].mean_fidelity <= w[0].mean_fidelity + slack
            });
            let paper = NOISE_PAPER[i];
            pass &= last.mean_fidelity >= NOISE_FLOOR && (last.mean_fidelity - paper).abs() <= NOISE_TOL && monotone;
            parts.push(format!(
                "g_max={} T={:.2}pi F0={:.4} mean(0.05)={:.4}±{:.4} ({paper}){}",
                bounds.g_max,
                pulse.total_time / PI,
                pulse.best_fidelity,
                last.mean_fidelity,
                last.standard_error(),
                if monotone { "" } else { " non-monotone" }
            ));
        }
        Ok(Verdict { pass, detail: parts.join(", ") })
    });

    h.check(9, "property suites", false, || {
        let mut failures = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = bench.basis.clone();

        let mut herm = 0.0f64;
        let mut ladder = 0.0f64;
        for _ in 0..20 {
            let c = Couplings::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let hm = build_ht(&b, c);
            herm = herm.max(hm.hermiticity_error());
            ladder = ladder.max(hm.max_abs_diff(&common::ladder_hamiltonian(&b, 0.0, c)));
        }
        if herm > 1e-12 {
            failures.push(format!("hermiticity {herm:.1e}"));
        }
        if ladder > 1e-12 || b.states().iter().any(|s| s.excitations() != 4) {
            failures.push(format!("excitation conservation {ladder:.1e}"));
        }

        let templates = HamiltonianTemplates::new(b.clone());
        let mut norm = 0.0f64;
        let mut halving = 0.0f64;
        let psi0 = &bench.initial.state;
        for bounds in BOUNDS {
            let problem = bench.problem(&base, QOC_TIME_PI * PI, bounds)?;
            let schedule = problem.schedule(random_params(&mut rng));
            let opts = EvolveOptions { track_energy: false, norm_tolerance: None, ..Default::default() };
            let coarse = evolve(&templates, psi0, &schedule, Some(&bench.target.state), &opts)?;
            let fine = evolve(&templates, psi0, &schedule, Some(&bench.target.state), &opts.steps(2 * opts.steps))?;
            norm = norm.max(coarse.max_norm_drift).max(fine.max_norm_drift);
            halving = halving.max((coarse.final_fidelity().unwrap() - fine.final_fidelity().unwrap()).abs());
        }
        if norm >= NORM_DRIFT {
            failures.push(format!("norm drift {norm:.1e}"));
        }
        if halving >= STEP_HALVING_TOL {
            failures.push(format!("step halving {halving:.1e}"));
        }
        if trace_drift >= TRACE_DRIFT {
            failures.push(format!("trace drift {trace_drift:.1e}"));
        }

        let mut clipped = 0;
        let mut pinned = 0;
        for k in 0..CLIP_PROBES {
            let bounds = BOUNDS[k % 3];
            let t_pi = rng.random_range(0.5..6.0);
            let s = bench.problem(&base, t_pi * PI, bounds)?.schedule(random_params(&mut rng));
            let c = s.couplings(rng.random_range(0.0..=1.0) * s.total_time());
            if c.g.abs() > bounds.g_max || c.j_hop.abs() > bounds.j_max {
                clipped += 1;
            }
            if k < PIN_DRAWS {
                let (a, z) = (s.couplings(0.0), s.couplings(s.total_time()));
                let (i, t) = (base.initial(), base.target());
                let off = [a.g - i.g, a.j_hop - i.j_hop, z.g - t.g, z.j_hop - t.j_hop];
                if off.iter().any(|d| d.abs() > 1e-12) {
                    pinned += 1;
                }
            }
        }
        if clipped > 0 {
            failures.push(format!("{clipped} probes outside bounds"));
        }
        if pinned > 0 {
            failures.push(format!("{pinned} waveforms not pinned"));
        }

        let opts = OptimizerOptions {
            max_iterations: 10_000,
            tolerance: 1e-14,
            ..Default::default()
        };
        let quad = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[1.0; 6], &opts);
        let qnorm = quad.x_best.iter().map(|v| v * v).sum::<f64>().sqrt();
        if qnorm >= 1e-4 {
            failures.push(format!("quadratic |x| = {qnorm:.1e}"));
        }
        let rosen = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        if rosen.f_best >= 1e-6 {
            failures.push(format!("rosenbrock f = {:.1e}", rosen.f_best));
        }

        Ok(Verdict {
            pass: failures.is_empty(),
            detail: if failures.is_empty() {
                format!(
                    "norm {norm:.1e}, trace {trace_drift:.1e}, halving {halving:.1e}, {CLIP_PROBES} clip probes, {PIN_DRAWS} pinned draws"
                )
            } else {
                failures.join(", ")
            },
        })
    });

    println!(
        "acceptance: {} deterministic and {} stochastic criteria failed",
        h.failed_deterministic, h.failed_stochastic
    );
    if h.failed_deterministic > 0 {
        std::process::exit(1);
    }
}
