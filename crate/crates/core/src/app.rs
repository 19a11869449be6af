//! Subcommand orchestration and artifact persistence for the command-line tool.
//!
//! Every subcommand writes into `<output_dir>/<subcommand>/`. JSON reports have
//! the shape `{ "metadata": .., "config": .., "result": .. }`; CSV files start
//! with `#`-prefixed metadata lines followed by a header row.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Bounds, RunConfig};
use crate::controls::{write_waveform_csv, AdiabaticSchedule, ControlSchedule};
use crate::error::{Error, Result};
use crate::fockspace::{enumerate_sector, SectorBasis};
use crate::lindblad::{evolve_lindblad, DecoherenceRates, LindbladSystem};
use crate::model::{build_ht, HamiltonianTemplates};
use crate::optimizer::{
    noise_robustness, optimize_pulse, threshold_time, OptimizationReport, PulseProblem,
};
use crate::propagate::{evolve, EvolveOptions, Trajectory};
use crate::spectrum::{
    analytic_mi_state, analytic_sf_state, bures_angle, fidelity, ground_state, photon_correlator,
    spdm, GroundState,
};
use crate::speedlimit::{estimate_qsl, QslEstimate};

/// Bumped whenever a CSV header or JSON field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;
pub const WAVEFORM_SAMPLES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Ground,
    SpdmMap,
    Adiabatic,
    Optimize,
    Sweep,
    Threshold,
    Qsl,
    Noise,
    Lindblad,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Ground,
        Subcommand::SpdmMap,
        Subcommand::Adiabatic,
        Subcommand::Optimize,
        Subcommand::Sweep,
        Subcommand::Threshold,
        Subcommand::Qsl,
        Subcommand::Noise,
        Subcommand::Lindblad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ground => "ground",
            Subcommand::SpdmMap => "spdm-map",
            Subcommand::Adiabatic => "adiabatic",
            Subcommand::Optimize => "optimize",
            Subcommand::Sweep => "sweep",
            Subcommand::Threshold => "threshold",
            Subcommand::Qsl => "qsl",
            Subcommand::Noise => "noise",
            Subcommand::Lindblad => "lindblad",
        }
    }

    fn time_dependent(self) -> bool {
        !matches!(self, Subcommand::Ground | Subcommand::SpdmMap)
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown subcommand {s:?}")))
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub dt: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut config: RunConfig) -> RunConfig {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.output_dir {
            config.output_dir = o.clone();
        }
        if let Some(w) = self.workers {
            config.workers = Some(w);
        }
        if let Some(dt) = self.dt {
            config.evolution.dt = Some(dt);
        }
        config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub subcommand: Subcommand,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub headline: String,
}

#[derive(Serialize)]
struct Document<'a> {
    metadata: &'a Metadata,
    config: &'a RunConfig,
    result: &'a Value,
}

enum Artifact {
    Json(String, Value),
    Csv(String, Vec<u8>),
}

struct Session<'a> {
    config: &'a RunConfig,
    subcommand: Subcommand,
    clock: Instant,
    artifacts: Vec<Artifact>,
}

impl<'a> Session<'a> {
    fn json(&mut self, name: &str, result: impl Serialize) -> Result<()> {
        self.artifacts
            .push(Artifact::Json(name.into(), serde_json::to_value(result)?));
        Ok(())
    }

    fn csv(&mut self, name: &str, body: Vec<u8>) {
        self.artifacts.push(Artifact::Csv(name.into(), body));
    }

    fn table<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.csv(name, body);
        Ok(())
    }

    fn flush(self) -> Result<(PathBuf, Vec<PathBuf>)> {
        let dir = self.config.output_dir.join(self.subcommand.name());
        fs::create_dir_all(&dir)?;
        let meta = Metadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
            subcommand: self.subcommand.name().into(),
            config_hash: self.config.hash(),
            seed: self.config.seed,
            workers: rayon::current_num_threads(),
            wall_time: self.clock.elapsed().as_secs_f64(),
        };
        let mut files = Vec::new();
        for a in self.artifacts {
            match a {
                Artifact::Json(name, result) => {
                    let path = dir.join(name);
                    let doc = Document {
                        metadata: &meta,
                        config: self.config,
                        result: &result,
                    };
                    fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
                    files.push(path);
                }
                Artifact::Csv(name, body) => {
                    let path = dir.join(name);
                    let mut f = fs::File::create(&path)?;
                    writeln!(f, "# tool={} version={}", meta.tool, meta.version)?;
                    writeln!(f, "# schema_version={}", meta.schema_version)?;
                    writeln!(f, "# subcommand={}", meta.subcommand)?;
                    writeln!(f, "# config_hash={}", meta.config_hash)?;
                    writeln!(f, "# seed={}", meta.seed)?;
                    writeln!(f, "# wall_time={:.3}", meta.wall_time)?;
                    f.write_all(&body)?;
                    files.push(path);
                }
            }
        }
        Ok((dir, files))
    }
}

/// Reads a CSV artifact written by this module, skipping the metadata lines.
pub fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Reads the `metadata` block of a JSON artifact.
pub fn read_metadata(path: &Path) -> Result<Metadata> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(serde_json::from_value(doc["metadata"].clone())?)
}

/// Loads the pulse from a saved `optimize` report.
pub fn load_report(path: &Path) -> Result<OptimizationReport> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)?;
    let report = doc.get("result").cloned().unwrap_or(doc);
    serde_json::from_value(report)
        .map_err(|e| Error::InvalidConfig(format!("{} is not a pulse report: {e}", path.display())))
}

/// Sector, templates, and the initial/target ground states shared by the time-dependent runs.
pub struct Workbench {
    pub basis: Arc<SectorBasis>,
    pub templates: Arc<HamiltonianTemplates>,
    pub initial: GroundState,
    pub target: GroundState,
}

impl Workbench {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let lattice = config.lattice_config()?;
        let basis = enumerate_sector(&lattice, lattice.n_excitations)?;
        let mut initial = ground_state(&build_ht(&basis, config.initial()))?;
        let mut target = ground_state(&build_ht(&basis, config.target()))?;
        initial.state.fix_phase();
        target.state.fix_phase();
        Ok(Self {
            templates: Arc::new(HamiltonianTemplates::new(basis.clone())),
            basis,
            initial,
            target,
        })
    }

    pub fn problem(&self, config: &RunConfig, total_time: f64, bounds: Bounds) -> Result<PulseProblem> {
        let mut p = PulseProblem::new(
            self.templates.clone(),
            self.initial.state.clone(),
            self.target.state.clone(),
            config.ramp(total_time)?,
            bounds.to_constraints()?,
        )?;
        p.convention = config.evolution.angular_convention;
        p.optimizer_steps = config.evolution.optimizer_steps_for(total_time);
        p.report_steps = config.evolution.steps_for(total_time);
        p.threshold_fidelity = config.threshold.fidelity;
        Ok(p)
    }

    pub fn trajectory(&self, config: &RunConfig, schedule: &dyn ControlSchedule) -> Result<Trajectory> {
        let opts = EvolveOptions {
            sample_every: config.evolution.sample_every,
            ..EvolveOptions::default().steps(config.evolution.steps_for(schedule.total_time()))
        };
        evolve(&self.templates, &self.initial.state, schedule, Some(&self.target.state), &opts)
    }

    pub fn qsl(&self, traj: &Trajectory) -> Result<QslEstimate> {
        estimate_qsl(&self.initial.state, &self.target.state, traj)
    }
}

fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    Ok(buf)
}

fn waveform_csv(schedule: &dyn ControlSchedule) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_waveform_csv(schedule, WAVEFORM_SAMPLES, &mut buf)?;
    Ok(buf)
}

fn pi_label(t: f64) -> String {
    format!("{:.2}pi", t / std::f64::consts::PI)
}

/// Validates, runs one subcommand inside a pool of `workers` threads and writes its artifacts.
///
/// Invalid configurations fail before any file is created. A threshold scan
/// that finds no threshold still writes its scan before returning
/// [`Error::ThresholdNotFound`].
pub fn run(subcommand: Subcommand, config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    if subcommand.time_dependent() {
        config.require_resonant()?;
    }
    if subcommand == Subcommand::SpdmMap {
        config.check_spdm_sites()?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(subcommand, config))
}

fn dispatch(subcommand: Subcommand, config: &RunConfig) -> Result<RunSummary> {
    let mut s = Session {
        config,
        subcommand,
        clock: Instant::now(),
        artifacts: Vec::new(),
    };
    let outcome = match subcommand {
        Subcommand::Ground => ground(&mut s),
        Subcommand::SpdmMap => spdm_map(&mut s),
        Subcommand::Adiabatic => adiabatic(&mut s),
        Subcommand::Optimize => optimize(&mut s),
        Subcommand::Sweep => sweep(&mut s),
        Subcommand::Threshold => threshold(&mut s),
        Subcommand::Qsl => qsl(&mut s),
        Subcommand::Noise => noise(&mut s),
        Subcommand::Lindblad => lindblad(&mut s),
    };
    let (headline, deferred) = match outcome {
        Ok(h) => (h, None),
        Err(e @ Error::ThresholdNotFound { .. }) => (e.to_string(), Some(e)),
        Err(e) => return Err(e),
    };
    let (output_dir, files) = s.flush()?;
    if let Some(e) = deferred {
        return Err(e);
    }
    Ok(RunSummary {
        subcommand,
        output_dir,
        files,
        headline,
    })
}

#[derive(Serialize)]
struct GroundReport {
    couplings: crate::model::Couplings,
    energy: f64,
    gap: f64,
    sf_oracle_fidelity: Option<f64>,
    mi_oracle_fidelity: Option<f64>,
    /// `ρ₁(i, j)` as `[re, im]`, `None` where a site is empty.
    spdm: Vec<Vec<Option<[f64; 2]>>>,
}

fn ground_report(gs: &GroundState, couplings: crate::model::Couplings) -> GroundReport {
    let basis = gs.state.basis();
    let n = basis.config().n_sites;
    let sf = (couplings.g == 0.0)
        .then(|| analytic_sf_state(basis).ok())
        .flatten()
        .and_then(|o| fidelity(&o, &gs.state).ok());
    let mi = (couplings.j_hop == 0.0)
        .then(|| analytic_mi_state(basis, couplings.g, couplings.delta).ok())
        .flatten()
        .and_then(|o| fidelity(&o, &gs.state).ok());
    let spdm = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| spdm(&gs.state, i, j).ok().map(|z| [z.re, z.im]))
                .collect()
        })
        .collect();
    GroundReport {
        couplings,
        energy: gs.energy,
        gap: gs.gap,
        sf_oracle_fidelity: sf,
        mi_oracle_fidelity: mi,
        spdm,
    }
}

fn ground(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let distance = bures_angle(&wb.initial.state, &wb.target.state)?;
    let initial = ground_report(&wb.initial, cfg.initial());
    let target = ground_report(&wb.target, cfg.target());

    #[derive(Serialize)]
    struct StateRow {
        index: usize,
        occupation: String,
        initial_re: f64,
        initial_im: f64,
        target_re: f64,
        target_im: f64,
    }
    let rows: Vec<StateRow> = wb
        .basis
        .states()
        .iter()
        .enumerate()
        .map(|(i, occ)| StateRow {
            index: i,
            occupation: occ.to_string(),
            initial_re: wb.initial.state.amplitudes()[i].re,
            initial_im: wb.initial.state.amplitudes()[i].im,
            target_re: wb.target.state.amplitudes()[i].re,
            target_im: wb.target.state.amplitudes()[i].im,
        })
        .collect();
    s.table("states.csv", &rows)?;

    #[derive(Serialize)]
    struct CorrRow {
        state: &'static str,
        i: usize,
        j: usize,
        correlator_re: f64,
        correlator_im: f64,
        spdm_re: Option<f64>,
        spdm_abs: Option<f64>,
    }
    let n = wb.basis.config().n_sites;
    let mut corr = Vec::new();
    for (label, gs) in [("initial", &wb.initial), ("target", &wb.target)] {
        for i in 0..n {
            for j in 0..n {
                let c = photon_correlator(&gs.state, i, j)?;
                let r = spdm(&gs.state, i, j).ok();
                corr.push(CorrRow {
                    state: label,
                    i,
                    j,
                    correlator_re: c.re,
                    correlator_im: c.im,
                    spdm_re: r.map(|z| z.re),
                    spdm_abs: r.map(|z| z.norm()),
                });
            }
        }
    }
    s.table("spdm.csv", &corr)?;
    s.json(
        "ground.json",
        json!({
            "dimension": wb.basis.dim(),
            "initial": initial,
            "target": target,
            "distance": distance,
            "distance_over_pi": distance / std::f64::consts::PI,
        }),
    )?;
    Ok(format!(
        "dim {}  E0(initial) = {:.6}  E0(target) = {:.6}  distance = {:.4}π",
        wb.basis.dim(),
        wb.initial.energy,
        wb.target.energy,
        distance / std::f64::consts::PI
    ))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn spdm_map(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let m = cfg.spdm_map;
    let lattice = cfg.lattice_config()?;
    let basis = enumerate_sector(&lattice, lattice.n_excitations)?;
    let points: Vec<(f64, f64)> = linspace(m.g_min, m.g_max, m.g_points)
        .into_iter()
        .flat_map(|g| linspace(m.j_min, m.j_max, m.j_points).into_iter().map(move |j| (g, j)))
        .collect();

    #[derive(Serialize)]
    struct Row {
        g: f64,
        j: f64,
        energy: f64,
        gap: f64,
        spdm_re: f64,
        spdm_abs: f64,
    }
    let detuning = cfg.detuning();
    let rows: Vec<Row> = points
        .par_iter()
        .map(|&(g, j)| {
            let c = crate::model::Couplings::new(g, j).with_detuning(detuning);
            match ground_state(&build_ht(&basis, c)) {
                Ok(gs) => {
                    let r = spdm(&gs.state, m.site_i, m.site_j).ok();
                    Row {
                        g,
                        j,
                        energy: gs.energy,
                        gap: gs.gap,
                        spdm_re: r.map_or(f64::NAN, |z| z.re),
                        spdm_abs: r.map_or(f64::NAN, |z| z.norm()),
                    }
                }
                Err(_) => Row {
                    g,
                    j,
                    energy: f64::NAN,
                    gap: 0.0,
                    spdm_re: f64::NAN,
                    spdm_abs: f64::NAN,
                },
            }
        })
        .collect();
    let undefined = rows.iter().filter(|r| r.spdm_abs.is_nan()).count();
    s.table("spdm_map.csv", &rows)?;
    s.json(
        "spdm_map.json",
        json!({ "points": rows.len(), "undefined_points": undefined, "sites": [m.site_i, m.site_j] }),
    )?;
    Ok(format!("{} grid points, {} undefined", rows.len(), undefined))
}

fn adiabatic(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;

    #[derive(Serialize)]
    struct Row {
        t_over_pi: f64,
        total_time: f64,
        fidelity: f64,
        delta_e_ave: f64,
        t_qsl: f64,
        max_norm_drift: f64,
    }
    let mut rows = Vec::new();
    for &t_pi in &cfg.adiabatic.times_pi {
        let total = t_pi * std::f64::consts::PI;
        let schedule = AdiabaticSchedule {
            ramp: cfg.ramp(total)?,
        };
        let traj = wb.trajectory(cfg, &schedule)?;
        let qsl = wb.qsl(&traj)?;
        s.csv(&format!("trajectory_{}.csv", pi_label(total)), trajectory_csv(&traj)?);
        rows.push(Row {
            t_over_pi: t_pi,
            total_time: total,
            fidelity: traj.final_fidelity().expect("target given"),
            delta_e_ave: traj.delta_e_ave,
            t_qsl: qsl.t_qsl,
            max_norm_drift: traj.max_norm_drift,
        });
    }
    s.table("adiabatic.csv", &rows)?;
    let headline = rows
        .iter()
        .map(|r| format!("T={:.2}π F={:.4}", r.t_over_pi, r.fidelity))
        .collect::<Vec<_>>()
        .join("  ");
    s.json("adiabatic.json", &rows)?;
    Ok(headline)
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    fidelity: f64,
}

fn record_pulse(s: &mut Session, wb: &Workbench, problem: &PulseProblem, report: &OptimizationReport, tag: &str) -> Result<Trajectory> {
    let schedule = problem.schedule(report.best_params);
    let traj = wb.trajectory(s.config, &schedule)?;
    s.csv(&format!("waveform{tag}.csv"), waveform_csv(&schedule)?);
    s.csv(&format!("trajectory{tag}.csv"), trajectory_csv(&traj)?);
    Ok(traj)
}

fn optimize(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let total = cfg.evolution.total_time();
    let problem = wb.problem(cfg, total, cfg.constraints)?;
    let adiabatic = problem.fidelity_of(&AdiabaticSchedule { ramp: problem.ramp }, problem.report_steps);
    let report = optimize_pulse(&problem, &cfg.optimizer_options(), None)?;
    let traj = record_pulse(s, &wb, &problem, &report, "")?;
    let history: Vec<HistoryRow> = report
        .fidelity_history
        .iter()
        .map(|&(iteration, fidelity)| HistoryRow { iteration, fidelity })
        .collect();
    s.table("history.csv", &history)?;
    let headline = format!(
        "T={} g_max={} J_max={}  F={:.4} (adiabatic {:.4}) after {} iterations",
        pi_label(total),
        cfg.constraints.g_max,
        cfg.constraints.j_max,
        report.best_fidelity,
        adiabatic,
        report.iterations_used
    );
    s.json("report.json", &report)?;
    s.json(
        "summary.json",
        json!({
            "adiabatic_fidelity": adiabatic,
            "qoc_fidelity": report.best_fidelity,
            "success": report.success,
            "delta_e_ave": traj.delta_e_ave,
        }),
    )?;
    Ok(headline)
}

fn sweep(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;

    #[derive(Serialize)]
    struct Row {
        g_max: f64,
        j_max: f64,
        t_over_pi: f64,
        qoc_fidelity: f64,
        adiabatic_fidelity: f64,
        success: bool,
        iterations: usize,
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for bounds in cfg.sweep_constraints() {
        for &t_pi in &cfg.sweep.times_pi {
            let total = t_pi * std::f64::consts::PI;
            let problem = wb.problem(cfg, total, bounds)?;
            let adiabatic =
                problem.fidelity_of(&AdiabaticSchedule { ramp: problem.ramp }, problem.report_steps);
            let report = optimize_pulse(&problem, &cfg.optimizer_options(), None)?;
            rows.push(Row {
                g_max: bounds.g_max,
                j_max: bounds.j_max,
                t_over_pi: t_pi,
                qoc_fidelity: report.best_fidelity,
                adiabatic_fidelity: adiabatic,
                success: report.success,
                iterations: report.iterations_used,
            });
            reports.push(report);
        }
    }
    s.table("sweep.csv", &rows)?;
    s.json("sweep.json", &reports)?;
    let ok = rows.iter().filter(|r| r.success).count();
    Ok(format!("{} points, {} above threshold", rows.len(), ok))
}

fn threshold(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let scan = cfg.threshold.scan();

    #[derive(Serialize)]
    struct Row {
        g_max: f64,
        j_max: f64,
        t_over_pi: f64,
        best_fidelity: f64,
        success: bool,
        iterations: usize,
    }
    #[derive(Serialize)]
    struct Entry {
        g_max: f64,
        j_max: f64,
        t_threshold: Option<f64>,
        t_threshold_over_pi: Option<f64>,
        qsl: Option<QslEstimate>,
        result: crate::optimizer::ThresholdResult,
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut missing = None;
    let mut parts = Vec::new();
    for bounds in cfg.threshold_constraints() {
        let template = wb.problem(cfg, scan.t_max * std::f64::consts::PI, bounds)?;
        let result = threshold_time(&template, &scan, &cfg.optimizer_options())?;
        for p in &result.scan_points {
            rows.push(Row {
                g_max: bounds.g_max,
                j_max: bounds.j_max,
                t_over_pi: p.total_time / std::f64::consts::PI,
                best_fidelity: p.best_fidelity,
                success: p.success,
                iterations: p.report.iterations_used,
            });
        }
        let tag = format!("_g{}_j{}", bounds.g_max, bounds.j_max);
        let qsl = match result.threshold_point() {
            Some(point) => {
                let problem = template.with_total_time(point.total_time)?;
                let traj = record_pulse(s, &wb, &problem, &point.report, &tag)?;
                Some(wb.qsl(&traj)?)
            }
            None => None,
        };
        match result.require() {
            Ok(t) => parts.push(format!(
                "g_max={} J_max={}: T_th={}",
                bounds.g_max,
                bounds.j_max,
                pi_label(t)
            )),
            Err(e) => {
                parts.push(format!("g_max={} J_max={}: not found", bounds.g_max, bounds.j_max));
                missing.get_or_insert(e);
            }
        }
        entries.push(Entry {
            g_max: bounds.g_max,
            j_max: bounds.j_max,
            t_threshold: result.t_threshold,
            t_threshold_over_pi: result.t_threshold.map(|t| t / std::f64::consts::PI),
            qsl,
            result,
        });
    }
    s.table("scan.csv", &rows)?;
    s.json("threshold.json", &entries)?;
    match missing {
        Some(e) => Err(e),
        None => Ok(parts.join("  ")),
    }
}

/// Pulse from `pulse_report` if configured, otherwise a fresh optimization.
fn pulse(s: &mut Session, wb: &Workbench) -> Result<(PulseProblem, OptimizationReport)> {
    let cfg = s.config;
    match &cfg.pulse_report {
        Some(path) => {
            let report = load_report(path)?;
            let bounds = Bounds {
                g_max: report.constraints.g_max,
                j_max: report.constraints.j_max,
            };
            let problem = wb.problem(cfg, report.total_time, bounds)?;
            Ok((problem, report))
        }
        None => {
            let problem = wb.problem(cfg, cfg.evolution.total_time(), cfg.constraints)?;
            let report = optimize_pulse(&problem, &cfg.optimizer_options(), None)?;
            s.json("report.json", &report)?;
            Ok((problem, report))
        }
    }
}

fn qsl(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let (problem, report) = pulse(s, &wb)?;
    let traj = record_pulse(s, &wb, &problem, &report, "")?;
    let q = wb.qsl(&traj)?;
    let adiabatic = wb.trajectory(cfg, &AdiabaticSchedule { ramp: problem.ramp })?;
    let qa = wb.qsl(&adiabatic)?;
    s.csv("trajectory_adiabatic.csv", trajectory_csv(&adiabatic)?);
    let pi = std::f64::consts::PI;
    s.json(
        "qsl.json",
        json!({
            "total_time": problem.total_time(),
            "total_time_over_pi": problem.total_time() / pi,
            "fidelity": traj.final_fidelity(),
            "distance_over_pi": q.distance / pi,
            "pulse": q,
            "t_qsl_over_pi": q.t_qsl / pi,
            "adiabatic": qa,
            "adiabatic_fidelity": adiabatic.final_fidelity(),
        }),
    )?;
    Ok(format!(
        "T={}  ΔE_ave={:.4}  T_QSL={:.3}π (adiabatic ramp {:.3}π)",
        pi_label(problem.total_time()),
        q.delta_e_ave,
        q.t_qsl / pi,
        qa.t_qsl / pi
    ))
}

fn noise(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let (problem, report) = pulse(s, &wb)?;
    let n = &cfg.noise;
    let stats = noise_robustness(
        &problem,
        &report.best_params,
        &n.sigmas,
        n.samples,
        n.grid_points,
        cfg.noise_seed(),
    )?;

    #[derive(Serialize)]
    struct Row {
        sigma: f64,
        samples: usize,
        mean_fidelity: f64,
        std_fidelity: f64,
        standard_error: f64,
    }
    let rows: Vec<Row> = stats
        .iter()
        .map(|st| Row {
            sigma: st.sigma,
            samples: st.samples,
            mean_fidelity: st.mean_fidelity,
            std_fidelity: st.std_fidelity,
            standard_error: st.standard_error(),
        })
        .collect();
    s.table("noise.csv", &rows)?;
    s.json(
        "noise.json",
        json!({ "total_time": problem.total_time(), "constraints": problem.constraints, "statistics": stats }),
    )?;
    Ok(rows
        .iter()
        .map(|r| format!("σ={:.3} F={:.4}±{:.4}", r.sigma, r.mean_fidelity, r.std_fidelity))
        .collect::<Vec<_>>()
        .join("  "))
}

fn lindblad(s: &mut Session) -> Result<String> {
    let cfg = s.config;
    let wb = Workbench::new(cfg)?;
    let (problem, report) = pulse(s, &wb)?;
    let system = LindbladSystem::new(&cfg.lattice_config()?)?;
    let schedule = problem.schedule(report.best_params);
    let steps = Some(problem.report_steps);
    let closed = problem.fidelity(report.best_params);
    let rates = cfg.decoherence;
    let open = evolve_lindblad(&system, &wb.initial.state, &schedule, &rates, &wb.target.state, steps)?;
    let noiseless = evolve_lindblad(
        &system,
        &wb.initial.state,
        &schedule,
        &DecoherenceRates::default(),
        &wb.target.state,
        steps,
    )?;
    let f_open = open.fidelity.expect("target given");
    s.json(
        "lindblad.json",
        json!({
            "total_time": problem.total_time(),
            "constraints": problem.constraints,
            "rates": rates,
            "closed_fidelity": closed,
            "zero_rate_fidelity": noiseless.fidelity,
            "open_fidelity": f_open,
            "fidelity_drop": closed - f_open,
            "max_trace_drift": open.max_trace_drift,
            "min_eigenvalue": open.rho.min_eigenvalue(),
            "sector_populations": open.rho.sector_populations(),
        }),
    )?;
    Ok(format!(
        "closed F={:.4}  with decoherence F={:.4}  drop={:.5}",
        closed,
        f_open,
        closed - f_open
    ))
}
