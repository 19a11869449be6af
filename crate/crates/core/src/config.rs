//! TOML run configuration shared by the command-line front end and the examples.
//!
//! Times are given in units of π (`total_time_pi = 3.3` means `T = 3.3π`).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controls::{AngularConvention, Constraints, NoiseSpec, RampSpec};
use crate::error::{Error, Result};
use crate::fockspace::LatticeConfig;
use crate::lindblad::DecoherenceRates;
use crate::model::Couplings;
use crate::optimizer::{OptimizerOptions, ThresholdScan, DEFAULT_THRESHOLD_FIDELITY};
use crate::propagate::{DEFAULT_SAMPLE_EVERY, DEFAULT_STEPS, OPTIMIZER_STEPS};

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub n_sites: usize,
    pub n_excitations: usize,
    /// Defaults to `n_excitations`.
    pub fock_cutoff: Option<usize>,
    pub omega_c: f64,
    pub omega_z: f64,
    pub periodic: bool,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            n_sites: 4,
            n_excitations: 4,
            fock_cutoff: None,
            omega_c: 0.0,
            omega_z: 0.0,
            periodic: true,
        }
    }
}

impl LatticeSection {
    pub fn to_config(&self) -> Result<LatticeConfig> {
        let mut cfg = LatticeConfig::new(self.n_sites, self.n_excitations)?
            .with_frequencies(self.omega_c, self.omega_z)?;
        if let Some(c) = self.fock_cutoff {
            cfg = cfg.with_cutoff(c)?;
        }
        cfg.periodic = self.periodic;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingPoint {
    pub g: f64,
    pub j: f64,
}

impl CouplingPoint {
    pub fn to_couplings(self, detuning: f64) -> Couplings {
        Couplings::new(self.g, self.j).with_detuning(detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingsSection {
    pub initial: CouplingPoint,
    pub target: CouplingPoint,
}

impl Default for CouplingsSection {
    fn default() -> Self {
        Self {
            initial: CouplingPoint { g: 0.0, j: 0.5 },
            target: CouplingPoint { g: 1.0, j: 0.02 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub g_max: f64,
    pub j_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { g_max: 2.0, j_max: 2.0 }
    }
}

impl Bounds {
    pub fn to_constraints(self) -> Result<Constraints> {
        Constraints::new(self.g_max, self.j_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Adiabatic,
    #[default]
    Crab,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub schedule: ScheduleKind,
    pub total_time_pi: f64,
    /// Reporting time step; overrides `steps` when set.
    pub dt: Option<f64>,
    pub steps: usize,
    pub optimizer_steps: usize,
    pub sample_every: usize,
    pub angular_convention: AngularConvention,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            schedule: ScheduleKind::Crab,
            total_time_pi: 3.3,
            dt: None,
            steps: DEFAULT_STEPS,
            optimizer_steps: OPTIMIZER_STEPS,
            sample_every: DEFAULT_SAMPLE_EVERY,
            angular_convention: AngularConvention::Literal,
        }
    }
}

impl EvolutionSection {
    pub fn total_time(&self) -> f64 {
        self.total_time_pi * PI
    }

    /// Reporting step count for a run of length `total_time`.
    pub fn steps_for(&self, total_time: f64) -> usize {
        match self.dt {
            Some(dt) => (total_time / dt).ceil().max(1.0) as usize,
            None => self.steps,
        }
    }

    /// Optimization-path step count; never finer than the reporting grid.
    pub fn optimizer_steps_for(&self, total_time: f64) -> usize {
        self.optimizer_steps.min(self.steps_for(total_time))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSection {
    pub fidelity: f64,
    pub t_min_pi: f64,
    pub t_max_pi: f64,
    pub coarse_step_pi: f64,
    pub fine_step_pi: f64,
    pub warm_start: bool,
    /// Constraint sets to scan; empty means the top-level `[constraints]`.
    pub constraints: Vec<Bounds>,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        let scan = ThresholdScan::default();
        Self {
            fidelity: DEFAULT_THRESHOLD_FIDELITY,
            t_min_pi: scan.t_min,
            t_max_pi: scan.t_max,
            coarse_step_pi: scan.coarse_step,
            fine_step_pi: scan.fine_step,
            warm_start: scan.warm_start,
            constraints: Vec::new(),
        }
    }
}

impl ThresholdSection {
    pub fn scan(&self) -> ThresholdScan {
        ThresholdScan {
            t_min: self.t_min_pi,
            t_max: self.t_max_pi,
            coarse_step: self.coarse_step_pi,
            fine_step: self.fine_step_pi,
            warm_start: self.warm_start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdiabaticSection {
    pub times_pi: Vec<f64>,
}

impl Default for AdiabaticSection {
    fn default() -> Self {
        Self {
            times_pi: vec![5.27, 3.30, 3.28, 2.23, 1.96, 1.90],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub times_pi: Vec<f64>,
    /// Empty means the top-level `[constraints]`.
    pub constraints: Vec<Bounds>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            times_pi: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
            constraints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpdmMapSection {
    pub g_min: f64,
    pub g_max: f64,
    pub g_points: usize,
    pub j_min: f64,
    pub j_max: f64,
    pub j_points: usize,
    /// Zero-based sites of the correlator `ρ₁(i, j)`.
    pub site_i: usize,
    pub site_j: usize,
}

impl Default for SpdmMapSection {
    fn default() -> Self {
        Self {
            g_min: 0.0,
            g_max: 1.0,
            g_points: 21,
            j_min: 0.0,
            j_max: 0.5,
            j_points: 21,
            site_i: 0,
            site_j: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub sigmas: Vec<f64>,
    pub samples: usize,
    pub grid_points: usize,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
            samples: 1000,
            grid_points: NoiseSpec::DEFAULT_GRID_POINTS,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    /// Saved `optimize` report reused by `qsl`, `noise` and `lindblad`.
    pub pulse_report: Option<PathBuf>,
    pub lattice: LatticeSection,
    pub couplings: CouplingsSection,
    pub constraints: Bounds,
    pub evolution: EvolutionSection,
    pub optimizer: OptimizerOptions,
    pub threshold: ThresholdSection,
    pub adiabatic: AdiabaticSection,
    pub sweep: SweepSection,
    pub spdm_map: SpdmMapSection,
    pub noise: NoiseSection,
    pub decoherence: DecoherenceRates,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            workers: None,
            pulse_report: None,
            lattice: LatticeSection::default(),
            couplings: CouplingsSection::default(),
            constraints: Bounds::default(),
            evolution: EvolutionSection::default(),
            optimizer: OptimizerOptions::default(),
            threshold: ThresholdSection::default(),
            adiabatic: AdiabaticSection::default(),
            sweep: SweepSection::default(),
            spdm_map: SpdmMapSection::default(),
            noise: NoiseSection::default(),
            decoherence: DecoherenceRates::superconducting(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// SHA-256 over the canonical JSON form of the resolved configuration,
    /// leaving out the output directory and worker count.
    pub fn hash(&self) -> String {
        let canonical = Self {
            output_dir: PathBuf::new(),
            workers: None,
            ..self.clone()
        };
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn lattice_config(&self) -> Result<LatticeConfig> {
        self.lattice.to_config()
    }

    pub fn detuning(&self) -> f64 {
        self.lattice.omega_c - self.lattice.omega_z
    }

    pub fn initial(&self) -> Couplings {
        self.couplings.initial.to_couplings(self.detuning())
    }

    pub fn target(&self) -> Couplings {
        self.couplings.target.to_couplings(self.detuning())
    }

    pub fn ramp(&self, total_time: f64) -> Result<RampSpec> {
        RampSpec::new(self.initial(), self.target(), total_time)
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise.seed.unwrap_or(self.seed)
    }

    pub fn optimizer_options(&self) -> OptimizerOptions {
        OptimizerOptions {
            seed: self.seed,
            ..self.optimizer
        }
    }

    pub fn threshold_constraints(&self) -> Vec<Bounds> {
        if self.threshold.constraints.is_empty() {
            vec![self.constraints]
        } else {
            self.threshold.constraints.clone()
        }
    }

    pub fn sweep_constraints(&self) -> Vec<Bounds> {
        if self.sweep.constraints.is_empty() {
            vec![self.constraints]
        } else {
            self.sweep.constraints.clone()
        }
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        self.lattice_config()?;
        for (name, p) in [("initial", self.couplings.initial), ("target", self.couplings.target)] {
            if !p.g.is_finite() || !p.j.is_finite() {
                return invalid(format!("{name} couplings must be finite"));
            }
        }
        let evo = &self.evolution;
        let total = evo.total_time();
        let ramp = self.ramp(total)?;
        if evo.steps == 0 || evo.optimizer_steps == 0 || evo.sample_every == 0 {
            return invalid("step counts must be positive");
        }
        if let Some(dt) = evo.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return invalid(format!("dt must be positive, got {dt}"));
            }
            if dt >= total {
                return invalid(format!("dt = {dt} must be smaller than T = {total}"));
            }
        }
        let constraints = self.constraints.to_constraints()?;
        constraints.admit(&ramp)?;
        self.optimizer.validate()?;

        let th = &self.threshold;
        if !(th.fidelity > 0.0 && th.fidelity <= 1.0) {
            return invalid("threshold fidelity must lie in (0, 1]");
        }
        th.scan().validate()?;
        for b in self.threshold_constraints().into_iter().chain(self.sweep_constraints()) {
            b.to_constraints()?.admit(&ramp)?;
        }
        let positive_times = |name: &str, ts: &[f64]| -> Result<()> {
            if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return invalid(format!("{name} contains non-positive time {t}"));
            }
            Ok(())
        };
        positive_times("adiabatic.times_pi", &self.adiabatic.times_pi)?;
        positive_times("sweep.times_pi", &self.sweep.times_pi)?;

        let m = &self.spdm_map;
        if m.g_points == 0 || m.j_points == 0 {
            return invalid("spdm_map needs at least one point per axis");
        }
        if !(m.g_max >= m.g_min && m.j_max >= m.j_min) {
            return invalid("spdm_map ranges must be increasing");
        }

        let n = &self.noise;
        if n.samples == 0 || n.grid_points == 0 {
            return invalid("noise needs at least one sample and one grid bin");
        }
        if let Some(s) = n.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return invalid(format!("noise sigma {s} must be finite and >= 0"));
        }
        self.decoherence.validate()?;
        if self.workers == Some(0) {
            return invalid("workers must be at least 1");
        }
        Ok(())
    }

    /// The SPDM map needs both correlator sites inside the lattice.
    pub fn check_spdm_sites(&self) -> Result<()> {
        let m = &self.spdm_map;
        let n = self.lattice.n_sites;
        if m.site_i >= n || m.site_j >= n {
            return invalid(format!(
                "spdm_map sites ({}, {}) outside a {n}-site lattice",
                m.site_i, m.site_j
            ));
        }
        Ok(())
    }

    /// Time-dependent runs hold the detuning at zero.
    pub fn require_resonant(&self) -> Result<()> {
        if self.detuning() != 0.0 {
            return invalid(format!(
                "time-dependent runs need omega_c == omega_z, got detuning {}",
                self.detuning()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.lattice_config().unwrap().fock_cutoff, 4);
        assert_eq!(c.initial(), Couplings::new(0.0, 0.5));
        assert_eq!(c.optimizer_options().restarts, 5);
    }

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig::default();
        let text = c.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let other = RunConfig { seed: 1, ..c.clone() };
        assert_ne!(other.hash(), c.hash());
        let moved = RunConfig { output_dir: "elsewhere".into(), workers: Some(3), ..c.clone() };
        assert_eq!(moved.hash(), c.hash());
    }

    #[test]
    fn spdm_sites_checked_on_demand() {
        let mut c = RunConfig::default();
        c.spdm_map.site_j = 9;
        c.validate().unwrap();
        assert!(c.check_spdm_sites().is_err());
    }

    #[test]
    fn partial_file() {
        let c = RunConfig::from_toml_str(
            r#"
            seed = 7
            [evolution]
            total_time_pi = 1.96
            [constraints]
            g_max = 4.0
            j_max = 2.0
            [optimizer]
            restarts = 2
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.optimizer_options().seed, 7);
        assert_eq!(c.optimizer.max_iterations, 150_000);
        assert!((c.evolution.total_time() - 1.96 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejections() {
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
        let base = RunConfig::default();
        let cases = [
            RunConfig {
                evolution: EvolutionSection { dt: Some(20.0), ..base.evolution },
                ..base.clone()
            },
            RunConfig {
                evolution: EvolutionSection { total_time_pi: -1.0, ..base.evolution },
                ..base.clone()
            },
            RunConfig {
                constraints: Bounds { g_max: 0.5, j_max: 2.0 },
                ..base.clone()
            },
            RunConfig {
                noise: NoiseSection { samples: 0, ..base.noise.clone() },
                ..base.clone()
            },
            RunConfig {
                lattice: LatticeSection { fock_cutoff: Some(1), ..base.lattice.clone() },
                ..base.clone()
            },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))), "{c:?}");
        }
    }

    #[test]
    fn dt_controls_steps() {
        let mut c = RunConfig::default();
        assert_eq!(c.evolution.steps_for(c.evolution.total_time()), 4000);
        c.evolution.dt = Some(c.evolution.total_time() / 1000.0 * 1.0000001);
        assert_eq!(c.evolution.steps_for(c.evolution.total_time()), 1000);
        assert_eq!(c.evolution.optimizer_steps_for(c.evolution.total_time()), 1000);
    }

    #[test]
    fn detuned_runs_flagged() {
        let mut c = RunConfig::default();
        c.lattice.omega_c = 1.0;
        c.validate().unwrap();
        assert!(c.require_resonant().is_err());
        assert_eq!(c.target().delta, 1.0);
    }
}
