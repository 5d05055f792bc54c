//! Sector-resolved Hamiltonian assembly and diagonalization, plus jump-operator
//! matrix elements ⟨a|c_μ^s|b⟩ in the global eigenbasis.
//!
//! The Hamiltonian is
//!   H = Σ_{σ,ij} T_ij c†_iσ c_jσ
//!     + Σ_{ij,σσ'} (U_ij/2) (n_iσ n_jσ' − (n_iσ + n_jσ')/2),
//! which leaves the vacuum at exactly zero energy. Since T and U are real
//! symmetric, every sector block is real symmetric and all eigenvectors (and
//! hence all jump-operator matrix elements) are real.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{CoreError, Result};
use crate::fockspace::{SectorBasis, SectorKey, SystemSpec};

/// Matrix elements below this magnitude are flushed to zero in the eigenbasis
/// jump operators.
pub const JUMP_DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub key: SectorKey,
    /// Ascending eigenvalues [eV].
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub vectors: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Aligned with the sector order of the basis.
    pub sectors: Vec<SectorSpectrum>,
    pub ground_energy: f64,
}

impl Spectrum {
    pub fn total_states(&self) -> usize {
        self.sectors.iter().map(|s| s.energies.len()).sum()
    }

    pub fn energy(&self, sector: usize, idx: usize) -> f64 {
        self.sectors[sector].energies[idx]
    }

    pub fn key(&self, sector: usize) -> SectorKey {
        self.sectors[sector].key
    }

    /// (min, max) over all eigenvalues.
    pub fn energy_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.sectors {
            for &e in &s.energies {
                lo = lo.min(e);
                hi = hi.max(e);
            }
        }
        (lo, hi)
    }
}

/// Per-sector Hamiltonian blocks in the occupation basis.
pub fn build_hamiltonian(spec: &SystemSpec, basis: &SectorBasis) -> Vec<Array2<f64>> {
    let l = spec.sites;
    let nspin = if spec.spinful { 2usize } else { 1 };
    let mut blocks = Vec::with_capacity(basis.sectors.len());
    for sector in &basis.sectors {
        let states = &sector.states;
        let d = states.len();
        let mut h = Array2::<f64>::zeros((d, d));
        let pos = |s: u64| states.binary_search(&s).expect("state within sector");
        for (col, &s) in states.iter().enumerate() {
            // site occupations; the interaction is diagonal in this basis
            let mut occ = vec![0.0f64; l];
            for site in 0..l {
                for sp in 0..nspin {
                    let o = if spec.spinful { 2 * site + sp } else { site };
                    occ[site] += ((s >> o) & 1) as f64;
                }
            }
            let mut diag = 0.0;
            for i in 0..l {
                for j in 0..l {
                    let u = spec.interaction[[i, j]];
                    if u == 0.0 {
                        continue;
                    }
                    diag += u / 2.0
                        * (occ[i] * occ[j] - nspin as f64 * (occ[i] + occ[j]) / 2.0);
                }
            }
            h[[col, col]] += diag;
            // hopping: T_ij c†_iσ c_jσ
            for i in 0..l {
                for j in 0..l {
                    let t = spec.hopping[[i, j]];
                    if t == 0.0 {
                        continue;
                    }
                    for sp in 0..nspin {
                        let (p, q) = if spec.spinful {
                            (2 * i + sp, 2 * j + sp)
                        } else {
                            (i, j)
                        };
                        if (s >> q) & 1 == 0 {
                            continue;
                        }
                        let s1 = s & !(1u64 << q);
                        let mut sign =
                            if (s & ((1u64 << q) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        if (s1 >> p) & 1 != 0 {
                            continue;
                        }
                        let s2 = s1 | (1u64 << p);
                        if (s1 & ((1u64 << p) - 1)).count_ones() % 2 != 0 {
                            sign = -sign;
                        }
                        h[[pos(s2), col]] += t * sign;
                    }
                }
            }
        }
        blocks.push(h);
    }
    blocks
}

/// Dense symmetric eigensolve of every sector block.
pub fn diagonalize(basis: &SectorBasis, blocks: &[Array2<f64>]) -> Result<Spectrum> {
    let mut sectors = Vec::with_capacity(blocks.len());
    let mut ground = f64::INFINITY;
    for (i, h) in blocks.iter().enumerate() {
        let key = basis.sectors[i].key;
        let (vals, vecs) = h.eigh(UPLO::Lower).map_err(|e| {
            CoreError::Numerical(format!(
                "sector eigensolve failed for (N={}, Sz2={}): {e}",
                key.n, key.sz2
            ))
        })?;
        let energies: Vec<f64> = vals.to_vec();
        if let Some(&e0) = energies.first() {
            ground = ground.min(e0);
        }
        sectors.push(SectorSpectrum { key, energies, vectors: vecs });
    }
    Ok(Spectrum { sectors, ground_energy: ground })
}

/// Eigenbasis block of one annihilator: rows live in the target sector
/// (one particle fewer), columns in the source sector.
#[derive(Debug, Clone)]
pub struct JumpBlock {
    pub from: usize,
    pub to: usize,
    /// ⟨a|c_μ|b⟩ with a indexing rows (sector `to`), b columns (sector `from`).
    pub mat: Array2<f64>,
}

/// Annihilation-sector blocks ⟨a|c_μ|b⟩ for a set of orbitals. Creation blocks
/// are the transposes with swapped sectors (real eigenvectors).
#[derive(Debug, Clone)]
pub struct JumpOperators {
    /// blocks[orbital][source sector]
    blocks: Vec<Vec<Option<JumpBlock>>>,
    orbitals: Vec<usize>,
}

impl JumpOperators {
    /// Build blocks for every orbital of the system.
    pub fn build(basis: &SectorBasis, spectrum: &Spectrum) -> Self {
        let all: Vec<usize> = (0..basis.orbital_count()).collect();
        Self::build_for_orbitals(basis, spectrum, &all)
    }

    /// Build blocks only for the listed orbitals (the ones actual leads couple
    /// to); keeps the memory footprint proportional to what is used.
    pub fn build_for_orbitals(
        basis: &SectorBasis,
        spectrum: &Spectrum,
        orbitals: &[usize],
    ) -> Self {
        let mut blocks = vec![Vec::new(); basis.orbital_count()];
        for &orb in orbitals {
            let mut per: Vec<Option<JumpBlock>> = Vec::with_capacity(basis.sectors.len());
            for from in 0..basis.sectors.len() {
                let blk = basis.annihilator_block(from, orb).map(|b| {
                    let vf = &spectrum.sectors[b.from].vectors;
                    let vt = &spectrum.sectors[b.to].vectors;
                    // C·V_from is a signed row selection of V_from
                    let mut cv = Array2::<f64>::zeros((vt.nrows(), vf.ncols()));
                    for &(row, col, sign) in &b.entries {
                        for k in 0..vf.ncols() {
                            cv[[row, k]] += sign * vf[[col, k]];
                        }
                    }
                    let mut mat = vt.t().dot(&cv);
                    mat.mapv_inplace(|x| if x.abs() < JUMP_DROP_TOL { 0.0 } else { x });
                    JumpBlock { from: b.from, to: b.to, mat }
                });
                per.push(blk);
            }
            blocks[orb] = per;
        }
        JumpOperators { blocks, orbitals: orbitals.to_vec() }
    }

    pub fn orbitals(&self) -> &[usize] {
        &self.orbitals
    }

    /// ⟨a|c_μ|b⟩ block for b in `from`; None if the transition is impossible
    /// or the orbital was not built.
    pub fn annihilation(&self, orbital: usize, from: usize) -> Option<&JumpBlock> {
        self.blocks.get(orbital)?.get(from)?.as_ref()
    }
}
