//! Jaynes-Cummings lattice Hamiltonian.
//!
//! `H = Σ_j [ω_c a_j†a_j + ω_z (σ_jz + 1)/2 + g (a_j†σ_j- + σ_j+ a_j)] - J Σ_j (a_j†a_{j+1} + h.c.)`
//! with periodic boundary `a_{N+1} = a_1`. The qubit frequency is taken as
//! `ω_z = ω_c - Δ`, so a [`Couplings`] value fully fixes the coefficients once
//! the lattice's `ω_c` is known.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{SectorBasis, SparseOperator};

/// Qubit-cavity coupling, hopping rate and detuning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Couplings {
    pub g: f64,
    pub j_hop: f64,
    #[serde(default)]
    pub delta: f64,
}

impl Couplings {
    /// Resonant couplings (`Δ = 0`).
    pub fn new(g: f64, j_hop: f64) -> Self {
        Self { g, j_hop, delta: 0.0 }
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Scalar prefactors of the four Hamiltonian templates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub omega_c: f64,
    pub omega_z: f64,
    pub g: f64,
    pub j_hop: f64,
}

impl Coefficients {
    pub fn new(omega_c: f64, couplings: Couplings) -> Self {
        Self {
            omega_c,
            omega_z: omega_c - couplings.delta,
            g: couplings.g,
            j_hop: couplings.j_hop,
        }
    }
}

/// Coefficient-independent pieces of the Hamiltonian on one sector.
///
/// All templates are real in the occupation basis: two diagonals (photon
/// number, number of excited qubits) and one off-diagonal pattern whose
/// entries carry a JC-coupling part and a hopping part. Hopping entries
/// already include the `-1` of `-J Σ(...)`.
#[derive(Debug, Clone)]
pub struct HamiltonianTemplates {
    basis: Arc<SectorBasis>,
    photons: Vec<f64>,
    qubits: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    jc: Vec<f64>,
    hop: Vec<f64>,
}

/// Nearest-neighbour bonds `(j, j+1)`, wrapping around for periodic lattices.
///
/// A single site has no bonds; two sites joined periodically carry the bond twice.
pub fn bonds(n_sites: usize, periodic: bool) -> Vec<(usize, usize)> {
    if n_sites < 2 {
        return Vec::new();
    }
    let mut out: Vec<(usize, usize)> = (0..n_sites - 1).map(|j| (j, j + 1)).collect();
    if periodic {
        out.push((n_sites - 1, 0));
    }
    out
}

impl HamiltonianTemplates {
    pub fn new(basis: Arc<SectorBasis>) -> Self {
        let cfg = *basis.config();
        let cutoff = cfg.fock_cutoff as u8;
        let dim = basis.dim();
        let photons = basis.states().iter().map(|s| s.photon_count() as f64).collect();
        let qubits = basis.states().iter().map(|s| s.qubit_count() as f64).collect();

        // (row, col, jc, hop)
        let mut entries: Vec<(usize, usize, f64, f64)> = Vec::new();
        for (c, occ) in basis.states().iter().enumerate() {
            for j in 0..cfg.n_sites {
                let n = occ.photon(j);
                let s = occ.qubit(j);
                // a_j† σ_j-
                if s == 1 && n < cutoff {
                    let mut t = occ.clone();
                    t.set_photon(j, n + 1);
                    t.set_qubit(j, 0);
                    if let Some(r) = basis.index_of(&t) {
                        entries.push((r, c, ((n + 1) as f64).sqrt(), 0.0));
                    }
                }
                // σ_j+ a_j
                if s == 0 && n > 0 {
                    let mut t = occ.clone();
                    t.set_photon(j, n - 1);
                    t.set_qubit(j, 1);
                    if let Some(r) = basis.index_of(&t) {
                        entries.push((r, c, (n as f64).sqrt(), 0.0));
                    }
                }
            }
            for (j, k) in bonds(cfg.n_sites, cfg.periodic) {
                // a_j† a_k and a_k† a_j
                for (to, from) in [(j, k), (k, j)] {
                    let nf = occ.photon(from);
                    let nt = occ.photon(to);
                    if nf == 0 || nt >= cutoff {
                        continue;
                    }
                    let mut t = occ.clone();
                    t.set_photon(from, nf - 1);
                    t.set_photon(to, nt + 1);
                    let amp = ((nf as f64) * ((nt + 1) as f64)).sqrt();
                    if let Some(r) = basis.index_of(&t) {
                        entries.push((r, c, 0.0, -amp));
                    }
                }
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut jc: Vec<f64> = Vec::with_capacity(entries.len());
        let mut hop: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, a, h) in entries {
            if last == Some((r, c)) {
                *jc.last_mut().unwrap() += a;
                *hop.last_mut().unwrap() += h;
            } else {
                col_idx.push(c);
                jc.push(a);
                hop.push(h);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            basis,
            photons,
            qubits,
            row_ptr,
            col_idx,
            jc,
            hop,
        }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn coefficients(&self, couplings: Couplings) -> Coefficients {
        Coefficients::new(self.basis.config().omega_c, couplings)
    }

    /// Builds a reusable real matrix for the given coefficients.
    pub fn real_matrix(&self, coeffs: Coefficients) -> RealHamiltonian<'_> {
        let mut h = RealHamiltonian {
            templates: self,
            diag: vec![0.0; self.dim()],
            offdiag: vec![0.0; self.jc.len()],
        };
        h.set(coeffs);
        h
    }

    /// Full Hamiltonian as a complex sparse operator.
    pub fn assemble(&self, coeffs: Coefficients) -> SparseOperator {
        let h = self.real_matrix(coeffs);
        let mut t = Vec::with_capacity(self.jc.len() + self.dim());
        for (r, &d) in h.diag.iter().enumerate() {
            if d != 0.0 {
                t.push((r, r, Complex64::new(d, 0.0)));
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if h.offdiag[k] != 0.0 {
                    t.push((r, self.col_idx[k], Complex64::new(h.offdiag[k], 0.0)));
                }
            }
        }
        SparseOperator::from_triplets(self.basis.clone(), self.basis.clone(), t)
            .expect("template entries lie inside the sector")
    }
}

/// A real symmetric Hamiltonian on top of shared templates; coefficients can be
/// swapped in place without reallocating.
#[derive(Debug, Clone)]
pub struct RealHamiltonian<'a> {
    templates: &'a HamiltonianTemplates,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl RealHamiltonian<'_> {
    pub fn set(&mut self, c: Coefficients) {
        let t = self.templates;
        for ((d, &n), &q) in self.diag.iter_mut().zip(&t.photons).zip(&t.qubits) {
            *d = c.omega_c * n + c.omega_z * q;
        }
        for ((v, &a), &h) in self.offdiag.iter_mut().zip(&t.jc).zip(&t.hop) {
            *v = c.g * a + c.j_hop * h;
        }
    }

    /// `y = (H - shift) x`.
    #[inline]
    pub fn apply_shifted(&self, x: &[Complex64], shift: f64, y: &mut [Complex64]) {
        let t = self.templates;
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = x[r] * (self.diag[r] - shift);
            for k in t.row_ptr[r]..t.row_ptr[r + 1] {
                acc += x[t.col_idx[k]] * self.offdiag[k];
            }
            *yr = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_shifted(x, 0.0, y)
    }

    /// Diagonal entry and off-diagonal `(columns, values)` of row `r`.
    #[inline]
    pub(crate) fn row(&self, r: usize) -> (f64, &[usize], &[f64]) {
        let t = self.templates;
        let span = t.row_ptr[r]..t.row_ptr[r + 1];
        (self.diag[r], &t.col_idx[span.clone()], &self.offdiag[span])
    }
}

/// On-site JC terms `H_0` (no hopping).
pub fn build_h0(basis: &Arc<SectorBasis>, couplings: Couplings) -> SparseOperator {
    let t = HamiltonianTemplates::new(basis.clone());
    t.assemble(Coefficients {
        j_hop: 0.0,
        ..t.coefficients(couplings)
    })
}

/// Hopping term `-J Σ_j (a_j†a_{j+1} + a_{j+1}†a_j)`.
pub fn build_hint(basis: &Arc<SectorBasis>, j_hop: f64) -> SparseOperator {
    let t = HamiltonianTemplates::new(basis.clone());
    t.assemble(Coefficients {
        omega_c: 0.0,
        omega_z: 0.0,
        g: 0.0,
        j_hop,
    })
}

/// `H_t = H_0 + H_int`.
pub fn build_ht(basis: &Arc<SectorBasis>, couplings: Couplings) -> SparseOperator {
    let t = HamiltonianTemplates::new(basis.clone());
    t.assemble(t.coefficients(couplings))
}

/// Energies and mixing angle of the single-cell polariton doublet `|n,±⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcDoublet {
    pub e_plus: f64,
    pub e_minus: f64,
    /// `θ` with `|n,+⟩ = cos(θ/2)|n,↓⟩ + sin(θ/2)|n-1,↑⟩`.
    pub theta: f64,
}

/// `χ(n) = sqrt(Δ² + 4 n g²)`.
pub fn jc_splitting(n: usize, g: f64, delta: f64) -> f64 {
    (delta * delta + 4.0 * n as f64 * g * g).sqrt()
}

pub fn jc_analytic(n: usize, g: f64, delta: f64, omega_c: f64) -> Result<JcDoublet> {
    if n == 0 {
        return Err(Error::ZeroExcitationDoublet);
    }
    let chi = jc_splitting(n, g, delta);
    let base = n as f64 * omega_c - 0.5 * delta;
    // fully degenerate cell: any mixing works, take the resonant one
    let theta = if chi == 0.0 {
        FRAC_PI_2
    } else {
        2.0 * ((0.5 * (1.0 - delta / chi)).clamp(0.0, 1.0)).sqrt().asin()
    };
    Ok(JcDoublet {
        e_plus: base + 0.5 * chi,
        e_minus: base - 0.5 * chi,
        theta,
    })
}
