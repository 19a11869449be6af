//! Time-dependent coupling schedules.
//!
//! A schedule maps `t ∈ [0, T]` to [`Couplings`]. Three kinds exist:
//! linear ramps between the initial and target couplings, CRAB-modulated
//! ramps with sign-preserving clipping, and a noisy wrapper adding
//! piecewise-constant Gaussian errors to any other schedule.

use std::f64::consts::TAU;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Couplings;

/// Number of harmonics per Fourier series.
pub const HARMONICS: usize = 8;
/// Total number of CRAB parameters.
pub const N_PARAMS: usize = 6 * HARMONICS;

/// Relative slack when checking `t` against the schedule window.
const TIME_SLACK: f64 = 1e-9;

/// Linear ramp of `g` and `J` over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub g_start: f64,
    pub g_end: f64,
    pub j_start: f64,
    pub j_end: f64,
    pub total_time: f64,
}

impl RampSpec {
    pub fn new(start: Couplings, end: Couplings, total_time: f64) -> Result<Self> {
        let spec = Self {
            g_start: start.g,
            g_end: end.g,
            j_start: start.j_hop,
            j_end: end.j_hop,
            total_time,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same boundary values, different duration.
    pub fn with_total_time(mut self, total_time: f64) -> Result<Self> {
        self.total_time = total_time;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        Ok(())
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<f64> {
        let slack = TIME_SLACK * self.total_time;
        if !(t >= -slack && t <= self.total_time + slack) {
            return Err(Error::TimeOutOfRange {
                t,
                total: self.total_time,
            });
        }
        Ok(t.clamp(0.0, self.total_time))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> (f64, f64) {
        let x = t / self.total_time;
        if x >= 1.0 {
            return (self.g_end, self.j_end);
        }
        (
            self.g_start + (self.g_end - self.g_start) * x,
            self.j_start + (self.j_end - self.j_start) * x,
        )
    }
}

/// `(g₀(t), J₀(t))` of the linear ramp.
pub fn ramp_eval(spec: &RampSpec, t: f64) -> Result<(f64, f64)> {
    let t = spec.check_time(t)?;
    Ok(spec.eval_unchecked(t))
}

/// `s(t) = 1 - cos(2πt/T)`, vanishing at both ends.
pub fn envelope_s(t: f64, total_time: f64) -> f64 {
    1.0 - (TAU * t / total_time).cos()
}

/// Fourier coefficients and frequency offsets of the two modulation series.
///
/// `c1`/`c2` are the cosine/sine amplitudes for `g`, `d1`/`d2` those for `J`,
/// and `dw1`/`dw2` shift the harmonic frequencies `ω_k = k + δω_k` of the
/// `g` and `J` series respectively.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrabParams {
    pub c1: [f64; HARMONICS],
    pub c2: [f64; HARMONICS],
    pub d1: [f64; HARMONICS],
    pub d2: [f64; HARMONICS],
    pub dw1: [f64; HARMONICS],
    pub dw2: [f64; HARMONICS],
}

impl CrabParams {
    /// Flat layout `[c1, c2, d1, d2, dw1, dw2]`.
    pub fn to_vec(&self) -> Vec<f64> {
        [self.c1, self.c2, self.d1, self.d2, self.dw1, self.dw2].concat()
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != N_PARAMS {
            return Err(Error::InvalidConfig(format!(
                "expected {N_PARAMS} CRAB parameters, got {}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("CRAB parameters must be finite".into()));
        }
        let block = |i: usize| -> [f64; HARMONICS] {
            x[i * HARMONICS..(i + 1) * HARMONICS].try_into().unwrap()
        };
        Ok(Self {
            c1: block(0),
            c2: block(1),
            d1: block(2),
            d2: block(3),
            dw1: block(4),
            dw2: block(5),
        })
    }
}

/// Upper bounds on `|g(t)|` and `|J(t)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub g_max: f64,
    pub j_max: f64,
}

impl Constraints {
    pub fn new(g_max: f64, j_max: f64) -> Result<Self> {
        let c = Self { g_max, j_max };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_max > 0.0 && self.j_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "constraints must be positive, got g_max={} j_max={}",
                self.g_max, self.j_max
            )));
        }
        Ok(())
    }

    /// Boundary couplings must already satisfy the bounds.
    pub fn admit(&self, ramp: &RampSpec) -> Result<()> {
        let g_ok = ramp.g_start.abs() <= self.g_max && ramp.g_end.abs() <= self.g_max;
        let j_ok = ramp.j_start.abs() <= self.j_max && ramp.j_end.abs() <= self.j_max;
        if !(g_ok && j_ok) {
            return Err(Error::InvalidConfig(format!(
                "boundary couplings exceed constraints g_max={} j_max={}",
                self.g_max, self.j_max
            )));
        }
        Ok(())
    }
}

/// Harmonic argument convention: `ω t / T` as written, or `2π ω t / T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularConvention {
    #[default]
    Literal,
    TwoPi,
}

impl AngularConvention {
    fn factor(self) -> f64 {
        match self {
            AngularConvention::Literal => 1.0,
            AngularConvention::TwoPi => TAU,
        }
    }
}

/// `x` clipped to `[-max, max]`, keeping its sign.
pub fn clip(x: f64, max: f64) -> f64 {
    if x.abs() > max {
        max.copysign(x)
    } else {
        x
    }
}

fn fourier(cos: &[f64; HARMONICS], sin: &[f64; HARMONICS], dw: &[f64; HARMONICS], phase: f64) -> f64 {
    (0..HARMONICS)
        .map(|k| {
            let arg = (k as f64 + 1.0 + dw[k]) * phase;
            let (s, c) = arg.sin_cos();
            cos[k] * c + sin[k] * s
        })
        .sum()
}

/// Raw and clipped CRAB couplings at `t`.
pub fn crab_eval(
    spec: &RampSpec,
    params: &CrabParams,
    constraints: &Constraints,
    convention: AngularConvention,
    t: f64,
) -> Result<(f64, f64)> {
    let t = spec.check_time(t)?;
    Ok(crab_eval_unchecked(spec, params, constraints, convention, t))
}

fn crab_eval_unchecked(
    spec: &RampSpec,
    params: &CrabParams,
    constraints: &Constraints,
    convention: AngularConvention,
    t: f64,
) -> (f64, f64) {
    let (g0, j0) = spec.eval_unchecked(t);
    let s = envelope_s(t, spec.total_time);
    let phase = convention.factor() * t / spec.total_time;
    let f1 = fourier(&params.c1, &params.c2, &params.dw1, phase);
    let f2 = fourier(&params.d1, &params.d2, &params.dw2, phase);
    (
        clip(g0 * (1.0 + s * f1), constraints.g_max),
        clip(j0 * (1.0 + s * f2), constraints.j_max),
    )
}

/// Anything that yields couplings on `[0, T]`.
pub trait ControlSchedule: Sync {
    fn total_time(&self) -> f64;

    /// Couplings at `t`; `t` must lie in `[0, T]` up to rounding.
    fn couplings(&self, t: f64) -> Couplings;
}

/// Linear ramp of both couplings at zero detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticSchedule {
    pub ramp: RampSpec,
}

impl ControlSchedule for AdiabaticSchedule {
    fn total_time(&self) -> f64 {
        self.ramp.total_time
    }

    fn couplings(&self, t: f64) -> Couplings {
        let (g, j) = self.ramp.eval_unchecked(t.clamp(0.0, self.ramp.total_time));
        Couplings::new(g, j)
    }
}

/// CRAB-modulated ramp with clipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrabSchedule {
    pub ramp: RampSpec,
    pub params: CrabParams,
    pub constraints: Constraints,
    pub convention: AngularConvention,
}

impl ControlSchedule for CrabSchedule {
    fn total_time(&self) -> f64 {
        self.ramp.total_time
    }

    fn couplings(&self, t: f64) -> Couplings {
        let t = t.clamp(0.0, self.ramp.total_time);
        let (g, j) =
            crab_eval_unchecked(&self.ramp, &self.params, &self.constraints, self.convention, t);
        Couplings::new(g, j)
    }
}

/// Gaussian control-error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub grid_points: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub const DEFAULT_GRID_POINTS: usize = 100;

    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            sigma,
            grid_points: Self::DEFAULT_GRID_POINTS,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.grid_points == 0 {
            return Err(Error::InvalidConfig("noise grid needs at least one point".into()));
        }
        Ok(())
    }
}

/// Unit-variance noise realization: `grid_points` standard-normal draws for
/// `g` followed by as many for `J`. Scaling by `σ` happens at evaluation, so
/// one realization serves every noise strength.
pub fn standard_noise(grid_points: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let g = draw(grid_points);
    let j = draw(grid_points);
    (g, j)
}

/// `g(t) + δ₁(t)`, `J(t) + δ₂(t)` with piecewise-constant Gaussian errors.
///
/// `[0, T]` is split into `grid_points` equal bins; each bin holds one draw.
/// The noisy values are not clipped.
#[derive(Debug, Clone)]
pub struct NoisySchedule<S> {
    inner: S,
    sigma: f64,
    delta_g: Vec<f64>,
    delta_j: Vec<f64>,
}

impl<S: ControlSchedule> NoisySchedule<S> {
    /// Uses a unit realization from [`standard_noise`], scaled by `sigma`.
    pub fn from_standard(inner: S, sigma: f64, delta_g: Vec<f64>, delta_j: Vec<f64>) -> Self {
        assert_eq!(delta_g.len(), delta_j.len());
        assert!(!delta_g.is_empty());
        Self {
            inner,
            sigma,
            delta_g,
            delta_j,
        }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    fn bin(&self, t: f64) -> usize {
        let n = self.delta_g.len();
        let x = (t / self.inner.total_time()).clamp(0.0, 1.0);
        ((x * n as f64) as usize).min(n - 1)
    }

    /// `(δ₁(t), δ₂(t))`.
    pub fn errors(&self, t: f64) -> (f64, f64) {
        let b = self.bin(t);
        (self.sigma * self.delta_g[b], self.sigma * self.delta_j[b])
    }
}

impl<S: ControlSchedule> ControlSchedule for NoisySchedule<S> {
    fn total_time(&self) -> f64 {
        self.inner.total_time()
    }

    fn couplings(&self, t: f64) -> Couplings {
        let c = self.inner.couplings(t);
        if self.sigma == 0.0 {
            return c;
        }
        let (dg, dj) = self.errors(t);
        Couplings {
            g: c.g + dg,
            j_hop: c.j_hop + dj,
            delta: c.delta,
        }
    }
}

/// Wraps `schedule` with the noise realization drawn from `noise.seed`.
pub fn apply_noise<S: ControlSchedule>(schedule: S, noise: &NoiseSpec) -> Result<NoisySchedule<S>> {
    noise.validate()?;
    let (g, j) = standard_noise(noise.grid_points, noise.seed);
    Ok(NoisySchedule::from_standard(schedule, noise.sigma, g, j))
}

/// `(t, g, J)` rows on `samples` equally spaced times including both ends.
pub fn sample_waveform(schedule: &dyn ControlSchedule, samples: usize) -> Vec<(f64, f64, f64)> {
    let total = schedule.total_time();
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let t = total * k as f64 / (n - 1) as f64;
            let c = schedule.couplings(t);
            (t, c.g, c.j_hop)
        })
        .collect()
}

/// Writes a waveform as CSV with header `t,g,J`.
pub fn write_waveform_csv<W: Write>(schedule: &dyn ControlSchedule, samples: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "g", "J"])?;
    for (t, g, j) in sample_waveform(schedule, samples) {
        w.serialize((t, g, j))?;
    }
    w.flush()?;
    Ok(())
}
