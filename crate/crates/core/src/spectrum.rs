//! Ground states, state overlaps, photon correlations and the analytic limiting states.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{SectorBasis, SparseOperator};
use crate::model::jc_analytic;

/// Gap below which the lowest level counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Normalized amplitude vector on one sector.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes` on construction.
    pub fn new(basis: Arc<SectorBasis>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::SectorMismatch(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { basis, amplitudes })
    }

    /// Wraps amplitudes as they are, e.g. the output of a propagator whose
    /// norm drift is tracked separately.
    pub fn from_raw(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(amplitudes.len(), basis.dim());
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if !self.basis.same_sector(&other.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    /// Rotates the global phase so the largest-magnitude amplitude (first one
    /// on ties) is real and positive.
    pub fn fix_phase(&mut self) {
        let max = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return;
        }
        let pivot = self
            .amplitudes
            .iter()
            .position(|a| a.norm() >= max * (1.0 - 1e-12))
            .expect("max is attained");
        let rot = self.amplitudes[pivot].conj() / self.amplitudes[pivot].norm();
        for a in &mut self.amplitudes {
            *a *= rot;
        }
        self.amplitudes[pivot].im = 0.0;
    }

    /// `⟨ψ|O|ψ⟩` for an operator on this sector.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        if !op.rows().same_sector(&self.basis) || !op.cols().same_sector(&self.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(op.matrix_element(&self.amplitudes, &self.amplitudes))
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Full eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the order of `energies`.
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn gap(&self) -> f64 {
        match self.energies.as_slice() {
            [e0, e1, ..] => e1 - e0,
            _ => f64::INFINITY,
        }
    }
}

/// Dense Hermitian diagonalization.
pub fn diagonalize(h: &SparseOperator) -> Result<Spectrum> {
    if !h.is_square() {
        return Err(Error::SectorMismatch("Hamiltonian must map a sector to itself".into()));
    }
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { energies, vectors })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub gap: f64,
}

/// Lowest eigenpair with the canonical global phase.
///
/// Fails with [`Error::DegenerateGroundState`] when the gap is below
/// [`DEGENERACY_GAP`]; use [`diagonalize`] to handle that case by hand.
pub fn ground_state(h: &SparseOperator) -> Result<GroundState> {
    let spec = diagonalize(h)?;
    let energy = spec.energies[0];
    let gap = spec.gap();
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateGroundState { energy, gap });
    }
    let amps = spec.vectors.column(0).iter().copied().collect();
    let mut state = StateVector::new(h.rows().clone(), amps)?;
    state.fix_phase();
    Ok(GroundState { energy, state, gap })
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr().min(1.0))
}

/// `arccos |⟨a|b⟩|`, in `[0, π/2]`.
pub fn bures_angle(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.overlap(b)?.norm().min(1.0).acos())
}

/// Unnormalized correlator `⟨ψ|a_i† a_j|ψ⟩` (zero-based sites).
pub fn photon_correlator(psi: &StateVector, i: usize, j: usize) -> Result<Complex64> {
    let basis = psi.basis();
    let cfg = basis.config();
    for site in [i, j] {
        if site >= cfg.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: cfg.n_sites,
            });
        }
    }
    let cutoff = cfg.fock_cutoff as u8;
    let amps = psi.amplitudes();
    let mut acc = Complex64::default();
    for (c, occ) in basis.states().iter().enumerate() {
        if amps[c] == Complex64::default() {
            continue;
        }
        let nj = occ.photon(j);
        if nj == 0 {
            continue;
        }
        if i == j {
            acc += amps[c].norm_sqr() * nj as f64;
            continue;
        }
        let ni = occ.photon(i);
        if ni >= cutoff {
            continue;
        }
        let mut t = occ.clone();
        t.set_photon(j, nj - 1);
        t.set_photon(i, ni + 1);
        if let Some(r) = basis.index_of(&t) {
            let amp = ((nj as f64) * ((ni + 1) as f64)).sqrt();
            acc += amps[r].conj() * amps[c] * amp;
        }
    }
    Ok(acc)
}

/// Single-particle density matrix `ρ₁(i,j) = ⟨a_i†a_j⟩ / ⟨a_i†a_i⟩` (zero-based sites).
pub fn spdm(psi: &StateVector, i: usize, j: usize) -> Result<Complex64> {
    let density = photon_correlator(psi, i, i)?.re;
    if density < 1e-12 {
        return Err(Error::ZeroPhotonDensity { site: i });
    }
    Ok(photon_correlator(psi, i, j)? / density)
}

fn check_unit_filling(basis: &SectorBasis) -> Result<()> {
    let n = basis.config().n_sites;
    if basis.excitations() != n {
        return Err(Error::FillingMismatch {
            n_sites: n,
            m: basis.excitations(),
        });
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(a_{k=0}†)^N |0,↓⟩ / sqrt(N!)`, the hopping-only ground state at unit filling.
pub fn analytic_sf_state(basis: &Arc<SectorBasis>) -> Result<StateVector> {
    check_unit_filling(basis)?;
    let n = basis.config().n_sites;
    let m = basis.excitations();
    let scale = factorial(m).sqrt() / (n as f64).powf(m as f64 / 2.0);
    let amps = basis
        .states()
        .iter()
        .map(|occ| {
            if occ.qubit_count() > 0 {
                return Complex64::default();
            }
            let denom: f64 = occ.photons().iter().map(|&k| factorial(k as usize)).product();
            Complex64::new(scale / denom.sqrt(), 0.0)
        })
        .collect();
    let mut s = StateVector::new(basis.clone(), amps)?;
    s.fix_phase();
    Ok(s)
}

/// `∏_j |1,-⟩_j`, the zero-hopping ground state at unit filling.
///
/// `omega_c` only enters the energies, so the mixing angle depends on `g` and `Δ` alone.
pub fn analytic_mi_state(basis: &Arc<SectorBasis>, g: f64, delta: f64) -> Result<StateVector> {
    check_unit_filling(basis)?;
    let theta = jc_analytic(1, g, delta, 0.0)?.theta;
    let (down, up) = ((theta / 2.0).sin(), -(theta / 2.0).cos());
    let n = basis.config().n_sites;
    let amps = basis
        .states()
        .iter()
        .map(|occ| {
            let mut a = 1.0;
            for j in 0..n {
                a *= match (occ.photon(j), occ.qubit(j)) {
                    (1, 0) => down,
                    (0, 1) => up,
                    _ => 0.0,
                };
            }
            Complex64::new(a, 0.0)
        })
        .collect();
    let mut s = StateVector::new(basis.clone(), amps)?;
    s.fix_phase();
    Ok(s)
}
