#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;

use jcqoc::fockspace::{enumerate_sector, ladder_op, LadderKind, SectorBasis, SparseOperator};
use jcqoc::model::{bonds, Couplings};

/// Every (photons, qubits) configuration with `m` excitations, by brute force
/// over the full product space.
pub fn brute_force_sector(n_sites: usize, cutoff: usize, m: usize) -> BTreeSet<(Vec<u8>, Vec<u8>)> {
    let mut out = BTreeSet::new();
    let photon_configs = (cutoff + 1).pow(n_sites as u32);
    for p in 0..photon_configs {
        let mut rest = p;
        let photons: Vec<u8> = (0..n_sites)
            .map(|_| {
                let v = rest % (cutoff + 1);
                rest /= cutoff + 1;
                v as u8
            })
            .collect();
        for q in 0..(1usize << n_sites) {
            let qubits: Vec<u8> = (0..n_sites).map(|j| ((q >> j) & 1) as u8).collect();
            let total: usize = photons.iter().chain(&qubits).map(|&v| v as usize).sum();
            if total == m {
                out.insert((photons.clone(), qubits));
            }
        }
    }
    out
}

fn op(from: &Arc<SectorBasis>, to: &Arc<SectorBasis>, site: usize, kind: LadderKind) -> SparseOperator {
    ladder_op(from, to, site, kind).unwrap()
}

/// Periodic-lattice Hamiltonian on sector `here`, assembled from single-site
/// ladder operators routed through the sector below.
pub fn ladder_hamiltonian(here: &Arc<SectorBasis>, omega_c: f64, c: Couplings) -> SparseOperator {
    let cfg = *here.config();
    let below = enumerate_sector(&cfg, here.excitations() - 1).unwrap();
    let mut h = SparseOperator::zero(here.clone(), here.clone());
    let mut add = |term: SparseOperator, s: f64| {
        h = h.add(&term.scaled(Complex64::new(s, 0.0))).unwrap();
    };
    for j in 0..cfg.n_sites {
        let a = op(here, &below, j, LadderKind::AnnihilatePhoton);
        let ad = op(&below, here, j, LadderKind::CreatePhoton);
        let sm = op(here, &below, j, LadderKind::LowerQubit);
        let sp = op(&below, here, j, LadderKind::RaiseQubit);
        add(ad.compose(&a).unwrap(), omega_c);
        add(sp.compose(&sm).unwrap(), omega_c - c.delta);
        add(ad.compose(&sm).unwrap(), c.g);
        add(sp.compose(&a).unwrap(), c.g);
    }
    for (j, k) in bonds(cfg.n_sites, cfg.periodic) {
        let hop = |to: usize, from: usize| {
            op(&below, here, to, LadderKind::CreatePhoton)
                .compose(&op(here, &below, from, LadderKind::AnnihilatePhoton))
                .unwrap()
        };
        add(hop(j, k), -c.j_hop);
        add(hop(k, j), -c.j_hop);
    }
    h
}
