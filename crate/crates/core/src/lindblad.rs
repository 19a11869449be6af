//! Density-matrix evolution under cavity decay, qubit decay and dephasing.
//!
//! The jump operators only remove excitations, so starting inside the
//! `M`-excitation sector the state never leaves the direct sum of the sectors
//! `m = 0..=M`. That direct sum is the working space here.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controls::ControlSchedule;
use crate::error::{Error, Result};
use crate::fockspace::{enumerate_sector, LatticeConfig, SectorBasis};
use crate::model::{HamiltonianTemplates, RealHamiltonian};
use crate::propagate::DEFAULT_STEPS;
use crate::spectrum::StateVector;

/// Trace drift above which an evolution is reported as failed.
pub const TRACE_TOLERANCE: f64 = 1e-6;

/// Sectors `m = 0..=M` stacked in increasing `m`.
#[derive(Debug, Clone)]
pub struct DirectSumBasis {
    config: LatticeConfig,
    sectors: Vec<Arc<SectorBasis>>,
    offsets: Vec<usize>,
    dim: usize,
}

impl DirectSumBasis {
    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> &[Arc<SectorBasis>] {
        &self.sectors
    }

    /// Offset of sector `m` inside the stacked basis.
    pub fn offset(&self, m: usize) -> usize {
        self.offsets[m]
    }

    fn locate(&self, basis: &SectorBasis) -> Result<usize> {
        let m = basis.excitations();
        match self.sectors.get(m) {
            Some(s) if s.same_sector(basis) => Ok(self.offsets[m]),
            _ => Err(Error::BasisMismatch),
        }
    }
}

pub fn build_sector_sum_basis(config: &LatticeConfig) -> Result<DirectSumBasis> {
    config.validate()?;
    let mut sectors = Vec::with_capacity(config.n_excitations + 1);
    let mut offsets = Vec::with_capacity(config.n_excitations + 1);
    let mut dim = 0;
    for m in 0..=config.n_excitations {
        let s = enumerate_sector(config, m)?;
        offsets.push(dim);
        dim += s.dim();
        sectors.push(s);
    }
    Ok(DirectSumBasis {
        config: *config,
        sectors,
        offsets,
        dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecoherenceRates {
    pub kappa: f64,
    pub gamma: f64,
    #[serde(default)]
    pub gamma_d: f64,
}

impl DecoherenceRates {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        let r = Self {
            kappa,
            gamma,
            gamma_d: 0.0,
        };
        r.validate()?;
        Ok(r)
    }

    /// `κ = 5e-5`, `γ = 5e-5/π` in units of the final coupling `g = 2π × 100 MHz`.
    pub fn superconducting() -> Self {
        Self {
            kappa: 5e-5,
            gamma: 5e-5 / std::f64::consts::PI,
            gamma_d: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("gamma", self.gamma), ("gamma_d", self.gamma_d)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.kappa == 0.0 && self.gamma == 0.0 && self.gamma_d == 0.0
    }
}

/// Dense row-major density matrix on a [`DirectSumBasis`].
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<DirectSumBasis>,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure(basis: Arc<DirectSumBasis>, psi: &StateVector) -> Result<Self> {
        let off = basis.locate(psi.basis())?;
        let n = basis.dim();
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let a: Vec<Complex64> = psi.amplitudes().iter().map(|x| x / norm).collect();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (r, ar) in a.iter().enumerate() {
            for (c, ac) in a.iter().enumerate() {
                data[(off + r) * n + off + c] = ar * ac.conj();
            }
        }
        Ok(Self { basis, data })
    }

    pub fn basis(&self) -> &Arc<DirectSumBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.dim();
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = self.to_dense().symmetric_eigen();
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `⟨ψ|ρ|ψ⟩` for a state in one of the sectors.
    pub fn fidelity(&self, psi: &StateVector) -> Result<f64> {
        let off = self.basis.locate(psi.basis())?;
        let n = self.dim();
        let a = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, ar) in a.iter().enumerate() {
            let row = &self.data[(off + r) * n + off..(off + r) * n + off + a.len()];
            let s: Complex64 = row.iter().zip(a).map(|(x, ac)| x * ac).sum();
            acc += ar.conj() * s;
        }
        Ok(acc.re / psi.norm().powi(2))
    }

    /// Population of each sector `m`.
    pub fn sector_populations(&self) -> Vec<f64> {
        let n = self.dim();
        self.basis
            .sectors
            .iter()
            .zip(&self.basis.offsets)
            .map(|(s, &off)| (off..off + s.dim()).map(|i| self.data[i * n + i].re).sum())
            .collect()
    }

    /// `⟨Σ_j (a_j†a_j + σ_j+σ_j-)⟩`.
    pub fn excitation_expectation(&self) -> f64 {
        self.sector_populations()
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }
}

/// `(source, destination, amplitude)` for every basis state a jump operator does not annihilate.
type JumpMap = Vec<(usize, usize, f64)>;

/// Precomputed generator pieces on the direct-sum space.
#[derive(Debug, Clone)]
pub struct LindbladSystem {
    basis: Arc<DirectSumBasis>,
    templates: Vec<HamiltonianTemplates>,
    cavity_jumps: Vec<JumpMap>,
    qubit_jumps: Vec<JumpMap>,
    photons: Vec<f64>,
    excited: Vec<f64>,
    qubit_mask: Vec<u64>,
}

impl LindbladSystem {
    pub fn new(config: &LatticeConfig) -> Result<Self> {
        let basis = Arc::new(build_sector_sum_basis(config)?);
        let templates = basis
            .sectors
            .iter()
            .map(|s| HamiltonianTemplates::new(s.clone()))
            .collect();
        let n_sites = config.n_sites;
        let mut cavity_jumps = vec![Vec::new(); n_sites];
        let mut qubit_jumps = vec![Vec::new(); n_sites];
        let mut photons = Vec::with_capacity(basis.dim);
        let mut excited = Vec::with_capacity(basis.dim);
        let mut qubit_mask = Vec::with_capacity(basis.dim);
        for (m, sector) in basis.sectors.iter().enumerate() {
            let off = basis.offsets[m];
            for (i, occ) in sector.states().iter().enumerate() {
                photons.push(occ.photon_count() as f64);
                excited.push(occ.qubit_count() as f64);
                qubit_mask.push(
                    (0..n_sites)
                        .filter(|&j| occ.qubit(j) == 1)
                        .fold(0u64, |acc, j| acc | (1 << j)),
                );
                if m == 0 {
                    continue;
                }
                let lower = &basis.sectors[m - 1];
                let lower_off = basis.offsets[m - 1];
                for j in 0..n_sites {
                    let n = occ.photon(j);
                    if n > 0 {
                        let mut t = occ.clone();
                        t.set_photon(j, n - 1);
                        let d = lower.index_of(&t).expect("lowered state lies in the sector below");
                        cavity_jumps[j].push((off + i, lower_off + d, (n as f64).sqrt()));
                    }
                    if occ.qubit(j) == 1 {
                        let mut t = occ.clone();
                        t.set_qubit(j, 0);
                        let d = lower.index_of(&t).expect("lowered state lies in the sector below");
                        qubit_jumps[j].push((off + i, lower_off + d, 1.0));
                    }
                }
            }
        }
        if n_sites > 64 {
            return Err(Error::InvalidConfig("dephasing supports at most 64 sites".into()));
        }
        Ok(Self {
            basis,
            templates,
            cavity_jumps,
            qubit_jumps,
            photons,
            excited,
            qubit_mask,
        })
    }

    pub fn basis(&self) -> &Arc<DirectSumBasis> {
        &self.basis
    }

    pub fn pure_state(&self, psi: &StateVector) -> Result<DensityMatrix> {
        DensityMatrix::pure(self.basis.clone(), psi)
    }

    /// Integrates the master equation with `steps` RK4 steps.
    pub fn evolve(
        &self,
        rho0: &DensityMatrix,
        schedule: &dyn ControlSchedule,
        rates: &DecoherenceRates,
        target: Option<&StateVector>,
        steps: usize,
    ) -> Result<LindbladOutcome> {
        rates.validate()?;
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be positive".into()));
        }
        if rho0.basis.config != self.basis.config {
            return Err(Error::BasisMismatch);
        }
        let n = self.basis.dim;
        let total = schedule.total_time();
        let h = total / steps as f64;
        let zero = Complex64::new(0.0, 0.0);

        let coeffs = |t: f64| {
            let c = schedule.couplings(t);
            self.templates[0].coefficients(c)
        };
        let mut ham: Vec<RealHamiltonian<'_>> = self
            .templates
            .iter()
            .map(|t| t.real_matrix(coeffs(0.0)))
            .collect();

        let mut rho = rho0.data.clone();
        let mut k = vec![zero; n * n];
        let mut acc = vec![zero; n * n];
        let mut stage = vec![zero; n * n];
        let mut scratch = vec![zero; n * n];
        let trace0 = rho0.trace().re;
        let mut max_trace_drift: f64 = 0.0;

        for s in 0..steps {
            let t0 = s as f64 * h;
            let t1 = if s + 1 == steps { total } else { (s + 1) as f64 * h };
            let tm = 0.5 * (t0 + t1);
            acc.copy_from_slice(&rho);

            for (i, (t, weight, next)) in [
                (t0, h / 6.0, 0.5 * h),
                (tm, h / 3.0, 0.5 * h),
                (tm, h / 3.0, h),
                (t1, h / 6.0, 0.0),
            ]
            .into_iter()
            .enumerate()
            {
                if i != 2 {
                    let c = coeffs(t);
                    ham.iter_mut().for_each(|m| m.set(c));
                }
                let input = if i == 0 { &rho } else { &stage };
                self.rhs(&ham, rates, input, &mut scratch, &mut k);
                for (a, kv) in acc.iter_mut().zip(&k) {
                    *a += kv * weight;
                }
                if i < 3 {
                    for ((st, r), kv) in stage.iter_mut().zip(&rho).zip(&k) {
                        *st = r + kv * next;
                    }
                }
            }
            std::mem::swap(&mut rho, &mut acc);
            hermitize(&mut rho, n);

            let tr: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
            max_trace_drift = max_trace_drift.max((tr - trace0).abs());
            if !tr.is_finite() || max_trace_drift > TRACE_TOLERANCE {
                return Err(Error::TraceDrift {
                    drift: max_trace_drift,
                    tolerance: TRACE_TOLERANCE,
                });
            }
        }

        let rho = DensityMatrix {
            basis: self.basis.clone(),
            data: rho,
        };
        let fidelity = target.map(|psi| rho.fidelity(psi)).transpose()?;
        Ok(LindbladOutcome {
            rho,
            fidelity,
            max_trace_drift,
        })
    }

    /// `out = L[ρ]`; `hr` receives `Hρ`.
    fn rhs(
        &self,
        ham: &[RealHamiltonian<'_>],
        rates: &DecoherenceRates,
        rho: &[Complex64],
        hr: &mut [Complex64],
        out: &mut [Complex64],
    ) {
        let n = self.basis.dim;
        // Hρ, sector rows at a time; H is block diagonal over sectors.
        for (m, hm) in ham.iter().enumerate() {
            let off = self.basis.offsets[m];
            for r in 0..self.basis.sectors[m].dim() {
                let (d, cols, vals) = hm.row(r);
                let row = off + r;
                let (dst, src_rows) = split_row(hr, rho, row, n);
                for (x, y) in dst.iter_mut().zip(src_rows) {
                    *x = y * d;
                }
                for (&c, &v) in cols.iter().zip(vals) {
                    let src = &rho[(off + c) * n..(off + c + 1) * n];
                    for (x, y) in dst.iter_mut().zip(src) {
                        *x += y * v;
                    }
                }
            }
        }
        // -i(Hρ - ρH) with ρH = (Hρ)†
        let mi = Complex64::new(0.0, -1.0);
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = mi * (hr[r * n + c] - hr[c * n + r].conj());
            }
        }
        if rates.is_zero() {
            return;
        }

        let loss: Vec<f64> = self
            .photons
            .iter()
            .zip(&self.excited)
            .map(|(p, q)| 0.5 * (rates.kappa * p + rates.gamma * q))
            .collect();
        for r in 0..n {
            for c in 0..n {
                let mut rate = loss[r] + loss[c];
                if rates.gamma_d > 0.0 {
                    let flips = (self.qubit_mask[r] ^ self.qubit_mask[c]).count_ones();
                    rate += rates.gamma_d * flips as f64;
                }
                out[r * n + c] -= rho[r * n + c] * rate;
            }
        }
        for (rate, maps) in [(rates.kappa, &self.cavity_jumps), (rates.gamma, &self.qubit_jumps)] {
            if rate == 0.0 {
                continue;
            }
            for map in maps.iter() {
                for &(sr, dr, ar) in map {
                    for &(sc, dc, ac) in map {
                        out[dr * n + dc] += rho[sr * n + sc] * (rate * ar * ac);
                    }
                }
            }
        }
    }
}

fn split_row<'a>(
    hr: &'a mut [Complex64],
    rho: &'a [Complex64],
    row: usize,
    n: usize,
) -> (&'a mut [Complex64], &'a [Complex64]) {
    (&mut hr[row * n..(row + 1) * n], &rho[row * n..(row + 1) * n])
}

fn hermitize(rho: &mut [Complex64], n: usize) {
    for r in 0..n {
        rho[r * n + r].im = 0.0;
        for c in r + 1..n {
            let avg = 0.5 * (rho[r * n + c] + rho[c * n + r].conj());
            rho[r * n + c] = avg;
            rho[c * n + r] = avg.conj();
        }
    }
}

#[derive(Debug, Clone)]
pub struct LindbladOutcome {
    pub rho: DensityMatrix,
    pub fidelity: Option<f64>,
    pub max_trace_drift: f64,
}

/// Evolves `|ψ₀⟩⟨ψ₀|` and returns `⟨ψ_T|ρ(T)|ψ_T⟩`.
pub fn evolve_lindblad(
    system: &LindbladSystem,
    psi0: &StateVector,
    schedule: &dyn ControlSchedule,
    rates: &DecoherenceRates,
    target: &StateVector,
    steps: Option<usize>,
) -> Result<LindbladOutcome> {
    let rho0 = system.pure_state(psi0)?;
    system.evolve(&rho0, schedule, rates, Some(target), steps.unwrap_or(DEFAULT_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controls::{AdiabaticSchedule, RampSpec};
    use crate::model::{build_ht, Couplings};
    use crate::propagate::{evolve, EvolveOptions};
    use crate::spectrum::{fidelity, ground_state};
    use std::f64::consts::PI;

    #[test]
    fn direct_sum_dims() {
        let b = build_sector_sum_basis(&LatticeConfig::unit_filling(4).unwrap()).unwrap();
        assert_eq!(b.dim(), 321);
        let dims: Vec<usize> = b.sectors().iter().map(|s| s.dim()).collect();
        assert_eq!(dims, vec![1, 8, 32, 88, 192]);
        assert_eq!(b.offset(4), 129);

        let one = build_sector_sum_basis(&LatticeConfig::new(1, 1).unwrap()).unwrap();
        assert_eq!(one.dim(), 3);
        let empty = build_sector_sum_basis(&LatticeConfig::new(3, 0).unwrap()).unwrap();
        assert_eq!(empty.dim(), 1);
    }

    #[test]
    fn rates_validation() {
        assert!(DecoherenceRates::new(-1.0, 0.0).is_err());
        assert!(DecoherenceRates::new(0.0, f64::NAN).is_err());
        assert!(DecoherenceRates::superconducting().validate().is_ok());
    }

    fn single_cavity() -> (LindbladSystem, StateVector, StateVector) {
        let cfg = LatticeConfig::new(1, 1).unwrap();
        let sys = LindbladSystem::new(&cfg).unwrap();
        let s1 = sys.basis().sectors()[1].clone();
        let photon = s1.index_of(&crate::fockspace::Occupation::from_parts(&[1], &[0])).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); s1.dim()];
        amps[photon] = Complex64::new(1.0, 0.0);
        let psi = StateVector::new(s1, amps).unwrap();
        let s0 = sys.basis().sectors()[0].clone();
        let vac = StateVector::new(s0, vec![Complex64::new(1.0, 0.0)]).unwrap();
        (sys, psi, vac)
    }

    #[test]
    fn cavity_decay_is_exponential() {
        let (sys, psi, vac) = single_cavity();
        let kappa = 0.3;
        let t = 2.0;
        let ramp = RampSpec::new(Couplings::new(0.0, 0.0), Couplings::new(0.0, 0.0), t).unwrap();
        let rates = DecoherenceRates::new(kappa, 0.0).unwrap();
        let out = evolve_lindblad(&sys, &psi, &AdiabaticSchedule { ramp }, &rates, &psi, Some(2000)).unwrap();
        let expect = (-kappa * t).exp();
        assert!((out.fidelity.unwrap() - expect).abs() < 1e-10);
        assert!((out.rho.fidelity(&vac).unwrap() - (1.0 - expect)).abs() < 1e-10);
    }

    #[test]
    fn damped_rabi_matches_two_level_solution() {
        // one photon resonantly exchanged with a decaying qubit, κ = 0
        let (sys, psi, _) = single_cavity();
        let g = 1.0;
        let gamma = 0.2;
        let t = 3.0;
        let ramp = RampSpec::new(Couplings::new(g, 0.0), Couplings::new(g, 0.0), t).unwrap();
        let rates = DecoherenceRates::new(0.0, gamma).unwrap();
        let out = evolve_lindblad(&sys, &psi, &AdiabaticSchedule { ramp }, &rates, &psi, Some(4000)).unwrap();

        // amplitude equations in the no-jump subspace: c_p' = -i g c_q, c_q' = -i g c_p - γ/2 c_q
        let mut cp = Complex64::new(1.0, 0.0);
        let mut cq = Complex64::new(0.0, 0.0);
        let n = 200_000;
        let h = t / n as f64;
        let i = Complex64::new(0.0, 1.0);
        let f = |cp: Complex64, cq: Complex64| (-i * g * cq, -i * g * cp - cq * (gamma / 2.0));
        for _ in 0..n {
            let (a1, b1) = f(cp, cq);
            let (a2, b2) = f(cp + a1 * (h / 2.0), cq + b1 * (h / 2.0));
            let (a3, b3) = f(cp + a2 * (h / 2.0), cq + b2 * (h / 2.0));
            let (a4, b4) = f(cp + a3 * h, cq + b3 * h);
            cp += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
            cq += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
        }
        assert!((out.fidelity.unwrap() - cp.norm_sqr()).abs() < 1e-9);
        let pops = out.rho.sector_populations();
        assert!((pops[1] - (cp.norm_sqr() + cq.norm_sqr())).abs() < 1e-9);
    }

    fn lattice_case(rates: DecoherenceRates, steps: usize) -> (LindbladOutcome, f64) {
        let cfg = LatticeConfig::new(2, 2).unwrap();
        let sys = LindbladSystem::new(&cfg).unwrap();
        let b = sys.basis().sectors()[2].clone();
        let start = Couplings::new(0.0, 0.5);
        let end = Couplings::new(1.0, 0.02);
        let psi0 = ground_state(&build_ht(&b, start)).unwrap().state;
        let target = ground_state(&build_ht(&b, end)).unwrap().state;
        let sched = AdiabaticSchedule {
            ramp: RampSpec::new(start, end, 2.0 * PI).unwrap(),
        };
        let closed = evolve(
            &HamiltonianTemplates::new(b),
            &psi0,
            &sched,
            Some(&target),
            &EvolveOptions::default().steps(steps),
        )
        .unwrap();
        let out = evolve_lindblad(&sys, &psi0, &sched, &rates, &target, Some(steps)).unwrap();
        (out, fidelity(&closed.final_state, &target).unwrap())
    }

    #[test]
    fn zero_rates_match_closed_system() {
        let (out, closed) = lattice_case(DecoherenceRates::default(), 1000);
        assert!((out.fidelity.unwrap() - closed).abs() < 1e-9);
        assert!(out.max_trace_drift < 1e-12);
    }

    #[test]
    fn physical_invariants_under_decay() {
        let rates = DecoherenceRates {
            kappa: 0.05,
            gamma: 0.03,
            gamma_d: 0.02,
        };
        let (out, closed) = lattice_case(rates, 1000);
        assert!(out.max_trace_drift < 1e-8);
        assert!(out.rho.hermiticity_error() < 1e-10);
        assert!(out.rho.min_eigenvalue() > -1e-8);
        assert!(out.fidelity.unwrap() < closed);
        let pops = out.rho.sector_populations();
        assert!(pops.iter().all(|p| *p > -1e-12));
        assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn excitation_number_decreases() {
        let cfg = LatticeConfig::new(2, 2).unwrap();
        let sys = LindbladSystem::new(&cfg).unwrap();
        let b = sys.basis().sectors()[2].clone();
        let psi = ground_state(&build_ht(&b, Couplings::new(0.5, 0.3))).unwrap().state;
        let rates = DecoherenceRates::new(0.1, 0.05).unwrap();
        let mut rho = sys.pure_state(&psi).unwrap();
        let mut last = rho.excitation_expectation();
        assert!((last - 2.0).abs() < 1e-12);
        for k in 0..5 {
            let ramp = RampSpec::new(
                Couplings::new(0.5 + 0.1 * k as f64, 0.3),
                Couplings::new(0.6 + 0.1 * k as f64, 0.3),
                0.5,
            )
            .unwrap();
            rho = sys.evolve(&rho, &AdiabaticSchedule { ramp }, &rates, None, 100).unwrap().rho;
            let now = rho.excitation_expectation();
            assert!(now < last);
            last = now;
        }
    }

    #[test]
    fn pure_state_embedding() {
        let cfg = LatticeConfig::new(2, 2).unwrap();
        let sys = LindbladSystem::new(&cfg).unwrap();
        let b = sys.basis().sectors()[2].clone();
        let psi = ground_state(&build_ht(&b, Couplings::new(1.0, 0.1))).unwrap().state;
        let rho = sys.pure_state(&psi).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!((rho.fidelity(&psi).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(rho.sector_populations()[..2], [0.0, 0.0]);
        let other = enumerate_sector(&LatticeConfig::new(3, 2).unwrap(), 2).unwrap();
        let wrong = StateVector::new(other.clone(), vec![Complex64::new(1.0, 0.0); other.dim()]).unwrap();
        assert!(sys.pure_state(&wrong).is_err());
    }
}
