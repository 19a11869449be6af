//! Fixed-excitation sectors of the lattice Hilbert space and sparse operators on them.
//!
//! Every cell carries a cavity mode (photon number `0..=fock_cutoff`) and a qubit
//! (`0` = down, `1` = up). A basis state is stored as one flat occupation tuple
//! `(n_1, .., n_N, s_1, .., s_N)` and sectors list the tuples in lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and bare frequencies of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub n_excitations: usize,
    pub fock_cutoff: usize,
    pub omega_c: f64,
    pub omega_z: f64,
    pub periodic: bool,
}

impl LatticeConfig {
    /// Periodic lattice with `fock_cutoff = n_excitations` and zero bare frequencies.
    pub fn new(n_sites: usize, n_excitations: usize) -> Result<Self> {
        let config = Self {
            n_sites,
            n_excitations,
            fock_cutoff: n_excitations.max(1),
            omega_c: 0.0,
            omega_z: 0.0,
            periodic: true,
        };
        config.validate()?;
        Ok(config)
    }

    /// Unit filling: one excitation per site.
    pub fn unit_filling(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, n_sites)
    }

    pub fn with_cutoff(mut self, fock_cutoff: usize) -> Result<Self> {
        self.fock_cutoff = fock_cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_frequencies(mut self, omega_c: f64, omega_z: f64) -> Result<Self> {
        self.omega_c = omega_c;
        self.omega_z = omega_z;
        self.validate()?;
        Ok(self)
    }

    pub fn detuning(&self) -> f64 {
        self.omega_c - self.omega_z
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidConfig("n_sites must be positive".into()));
        }
        if self.fock_cutoff == 0 {
            return Err(Error::InvalidConfig("fock_cutoff must be positive".into()));
        }
        // at filling <= 1 the sector is only exact when all photons fit in one cavity
        if self.n_excitations <= self.n_sites && self.fock_cutoff < self.n_excitations {
            return Err(Error::InvalidConfig(format!(
                "fock_cutoff {} below excitation number {}",
                self.fock_cutoff, self.n_excitations
            )));
        }
        if !self.omega_c.is_finite() || !self.omega_z.is_finite() {
            return Err(Error::InvalidConfig("frequencies must be finite".into()));
        }
        Ok(())
    }
}

/// Occupation tuple `(n_1..n_N, s_1..s_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn from_parts(photons: &[u8], qubits: &[u8]) -> Self {
        assert_eq!(photons.len(), qubits.len());
        let mut v = Vec::with_capacity(2 * photons.len());
        v.extend_from_slice(photons);
        v.extend_from_slice(qubits);
        Occupation(v)
    }

    pub fn n_sites(&self) -> usize {
        self.0.len() / 2
    }

    pub fn photons(&self) -> &[u8] {
        &self.0[..self.n_sites()]
    }

    pub fn qubits(&self) -> &[u8] {
        &self.0[self.n_sites()..]
    }

    pub fn photon(&self, site: usize) -> u8 {
        self.0[site]
    }

    pub fn qubit(&self, site: usize) -> u8 {
        self.0[self.n_sites() + site]
    }

    pub fn excitations(&self) -> usize {
        self.0.iter().map(|&x| x as usize).sum()
    }

    pub fn photon_count(&self) -> usize {
        self.photons().iter().map(|&x| x as usize).sum()
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits().iter().map(|&x| x as usize).sum()
    }

    pub(crate) fn set_photon(&mut self, site: usize, n: u8) {
        self.0[site] = n;
    }

    pub(crate) fn set_qubit(&mut self, site: usize, s: u8) {
        let n = self.n_sites();
        self.0[n + site] = s;
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for j in 0..self.n_sites() {
            if j > 0 {
                write!(f, ";")?;
            }
            let s = if self.qubit(j) == 1 { '↑' } else { '↓' };
            write!(f, "{},{}", self.photon(j), s)?;
        }
        write!(f, "⟩")
    }
}

/// All occupation tuples of a lattice with a fixed total excitation number.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    config: LatticeConfig,
    excitations: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl SectorBasis {
    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Same lattice and same excitation number.
    pub fn same_sector(&self, other: &SectorBasis) -> bool {
        self.excitations == other.excitations && self.config == other.config
    }
}

impl PartialEq for SectorBasis {
    fn eq(&self, other: &Self) -> bool {
        self.same_sector(other)
    }
}

/// Enumerates the sector with `m` total excitations, lexicographically ordered.
pub fn enumerate_sector(config: &LatticeConfig, m: usize) -> Result<Arc<SectorBasis>> {
    config.validate()?;
    let max = config.n_sites * (config.fock_cutoff + 1);
    if m > max {
        return Err(Error::ExcitationsOutOfRange { m, max });
    }
    let n = config.n_sites;
    let mut states = Vec::new();
    let mut current = vec![0u8; 2 * n];
    fill(&mut current, 0, m, n, config.fock_cutoff, &mut states);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(Arc::new(SectorBasis {
        config: *config,
        excitations: m,
        states,
        index,
    }))
}

fn fill(
    current: &mut [u8],
    pos: usize,
    remaining: usize,
    n_sites: usize,
    cutoff: usize,
    out: &mut Vec<Occupation>,
) {
    if pos == current.len() {
        if remaining == 0 {
            out.push(Occupation(current.to_vec()));
        }
        return;
    }
    let cap = if pos < n_sites { cutoff } else { 1 };
    // capacity left in the positions after this one
    let tail: usize = (pos + 1..current.len())
        .map(|p| if p < n_sites { cutoff } else { 1 })
        .sum();
    for v in 0..=cap.min(remaining) {
        if remaining - v > tail {
            continue;
        }
        current[pos] = v as u8;
        fill(current, pos + 1, remaining - v, n_sites, cutoff, out);
    }
    current[pos] = 0;
}

/// Sparse complex matrix mapping amplitudes on `cols` to amplitudes on `rows`.
///
/// Stored in compressed-row form; duplicate entries are summed at construction.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    rows: Arc<SectorBasis>,
    cols: Arc<SectorBasis>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    pub fn from_triplets(
        rows: Arc<SectorBasis>,
        cols: Arc<SectorBasis>,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        let (nr, nc) = (rows.dim(), cols.dim());
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= nr || c >= nc) {
            return Err(Error::SectorMismatch(format!(
                "entry ({r}, {c}) outside {nr}x{nc}"
            )));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nr + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nr {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zero(rows: Arc<SectorBasis>, cols: Arc<SectorBasis>) -> Self {
        let nr = rows.dim();
        Self {
            rows,
            cols,
            row_ptr: vec![0; nr + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> &Arc<SectorBasis> {
        &self.rows
    }

    pub fn cols(&self) -> &Arc<SectorBasis> {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.dim()
    }

    pub fn ncols(&self) -> usize {
        self.cols.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows.same_sector(&self.cols)
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .find(|&k| self.col_idx[k] == c)
            .map(|k| self.values[k])
            .unwrap_or_default()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.nrows()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `⟨a|O|b⟩` for amplitude vectors on the codomain and domain.
    pub fn matrix_element(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        self.apply(b)
            .iter()
            .zip(a)
            .map(|(ob, ai)| ai.conj() * ob)
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols.clone(), self.rows.clone(), t).expect("transpose stays in range")
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + other`; both must act between the same pair of sectors.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.rows.same_sector(&other.rows) || !self.cols.same_sector(&other.cols) {
            return Err(Error::SectorMismatch("adding operators on different sectors".into()));
        }
        let t = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.rows.clone(), self.cols.clone(), t)
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !self.cols.same_sector(&other.rows) {
            return Err(Error::SectorMismatch("inner sectors of product differ".into()));
        }
        let mut t = Vec::new();
        for r in 0..self.nrows() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.col_idx[k];
                for q in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    t.push((r, other.col_idx[q], self.values[k] * other.values[q]));
                }
            }
        }
        Self::from_triplets(self.rows.clone(), other.cols.clone(), t)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entrywise deviation `max |A - B|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.to_dense() - other.to_dense())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max |H - H†|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }
}

/// Single-site ladder, Pauli and number operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    AnnihilatePhoton,
    CreatePhoton,
    LowerQubit,
    RaiseQubit,
    QubitZ,
    PhotonNumber,
}

impl LadderKind {
    /// Change of the total excitation number.
    pub fn excitation_shift(self) -> isize {
        match self {
            LadderKind::AnnihilatePhoton | LadderKind::LowerQubit => -1,
            LadderKind::CreatePhoton | LadderKind::RaiseQubit => 1,
            LadderKind::QubitZ | LadderKind::PhotonNumber => 0,
        }
    }
}

/// Matrix of a site-local operator from sector `from` into sector `to`.
///
/// `site` is zero-based.
pub fn ladder_op(
    from: &Arc<SectorBasis>,
    to: &Arc<SectorBasis>,
    site: usize,
    kind: LadderKind,
) -> Result<SparseOperator> {
    let cfg = from.config();
    if cfg != to.config() {
        return Err(Error::SectorMismatch("sectors belong to different lattices".into()));
    }
    if site >= cfg.n_sites {
        return Err(Error::SiteOutOfRange {
            site,
            n_sites: cfg.n_sites,
        });
    }
    let expected = from.excitations() as isize + kind.excitation_shift();
    if expected != to.excitations() as isize {
        return Err(Error::SectorMismatch(format!(
            "{kind:?} maps sector {} to {expected}, not {}",
            from.excitations(),
            to.excitations()
        )));
    }
    let cutoff = cfg.fock_cutoff as u8;
    let mut t = Vec::new();
    for (c, occ) in from.states().iter().enumerate() {
        let n = occ.photon(site);
        let s = occ.qubit(site);
        let mut target = occ.clone();
        let amp = match kind {
            LadderKind::AnnihilatePhoton if n > 0 => {
                target.set_photon(site, n - 1);
                (n as f64).sqrt()
            }
            LadderKind::CreatePhoton if n < cutoff => {
                target.set_photon(site, n + 1);
                ((n + 1) as f64).sqrt()
            }
            LadderKind::LowerQubit if s == 1 => {
                target.set_qubit(site, 0);
                1.0
            }
            LadderKind::RaiseQubit if s == 0 => {
                target.set_qubit(site, 1);
                1.0
            }
            LadderKind::QubitZ => {
                if s == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            LadderKind::PhotonNumber => n as f64,
            _ => continue,
        };
        if amp == 0.0 {
            continue;
        }
        let r = to
            .index_of(&target)
            .ok_or_else(|| Error::SectorMismatch(format!("{target} missing from target sector")))?;
        t.push((r, c, Complex64::new(amp, 0.0)));
    }
    SparseOperator::from_triplets(to.clone(), from.clone(), t)
}
