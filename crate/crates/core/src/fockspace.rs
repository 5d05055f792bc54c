//! Occupation-number basis of a fermionic lattice, partitioned into
//! conserved-quantum-number sectors, with fermionic operator matrix elements.
//!
//! States are machine-word bitstrings over a fixed orbital order, site-major
//! and spin-minor (site0↑, site0↓, site1↑, …). The Jordan–Wigner sign of an
//! operator acting on orbital p is (−1)^(number of occupied orbitals below p).

use std::collections::HashMap;

use ndarray::Array2;

use crate::error::{CoreError, Result};

/// Hard cap on the orbital count; 2^24 basis states is already beyond what the
/// dense sector solvers downstream can absorb.
pub const MAX_ORBITALS: usize = 24;

const SYMMETRY_RTOL: f64 = 1e-12;

/// Lattice definition: hopping matrix `T` and interaction matrix `U`, both
/// real symmetric `l×l` in eV.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub sites: usize,
    pub spinful: bool,
    pub hopping: Array2<f64>,
    pub interaction: Array2<f64>,
}

impl SystemSpec {
    pub fn new(
        sites: usize,
        spinful: bool,
        hopping: Array2<f64>,
        interaction: Array2<f64>,
    ) -> Result<Self> {
        if sites == 0 {
            return Err(CoreError::Validation("system needs at least one site".into()));
        }
        for (name, m) in [("hopping", &hopping), ("interaction", &interaction)] {
            if m.nrows() != sites || m.ncols() != sites {
                return Err(CoreError::Validation(format!(
                    "{name} matrix must be {sites}x{sites}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
            for i in 0..sites {
                for j in 0..i {
                    if (m[[i, j]] - m[[j, i]]).abs() > SYMMETRY_RTOL * scale {
                        return Err(CoreError::Validation(format!(
                            "{name} matrix is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(SystemSpec { sites, spinful, hopping, interaction })
    }

    /// Number of single-particle orbitals (2l spinful, l spinless).
    pub fn orbital_count(&self) -> usize {
        if self.spinful {
            2 * self.sites
        } else {
            self.sites
        }
    }

    /// Orbital index for (site, spin); spin is ignored for spinless systems.
    pub fn orbital(&self, site: usize, spin: Spin) -> usize {
        if self.spinful {
            2 * site + spin.index()
        } else {
            site
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Conserved quantum numbers of a sector: particle count and twice the spin-z
/// component (so it stays integral for odd particle numbers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorKey {
    pub n: u32,
    pub sz2: i32,
}

#[derive(Debug, Clone)]
pub struct Sector {
    pub key: SectorKey,
    /// Occupation bitstrings in ascending order.
    pub states: Vec<u64>,
}

/// Full many-body basis split into (N, Sz) sectors.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub sectors: Vec<Sector>,
    index: HashMap<u64, (usize, usize)>,
    norb: usize,
    spinful: bool,
}

/// One annihilator block in sector-resolved form: entries (row in target
/// sector, column in source sector, fermionic sign).
#[derive(Debug, Clone)]
pub struct AnnihilatorBlock {
    pub from: usize,
    pub to: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn build_basis(spec: &SystemSpec) -> Result<SectorBasis> {
    let norb = spec.orbital_count();
    if norb > MAX_ORBITALS {
        return Err(CoreError::Capacity(format!(
            "{norb} orbitals exceeds the configured limit of {MAX_ORBITALS}"
        )));
    }
    let mut map: HashMap<SectorKey, Vec<u64>> = HashMap::new();
    for state in 0u64..(1u64 << norb) {
        let n = state.count_ones();
        let sz2 = if spec.spinful {
            let mut up = 0i32;
            for site in 0..spec.sites {
                up += ((state >> (2 * site)) & 1) as i32;
            }
            2 * up - n as i32
        } else {
            0
        };
        map.entry(SectorKey { n, sz2 }).or_default().push(state);
    }
    let mut keys: Vec<SectorKey> = map.keys().copied().collect();
    keys.sort();
    let mut sectors = Vec::with_capacity(keys.len());
    let mut index = HashMap::new();
    for key in keys {
        let mut states = map.remove(&key).unwrap();
        states.sort_unstable();
        for (pos, &s) in states.iter().enumerate() {
            index.insert(s, (sectors.len(), pos));
        }
        sectors.push(Sector { key, states });
    }
    Ok(SectorBasis { sectors, index, norb, spinful: spec.spinful })
}

impl SectorBasis {
    pub fn orbital_count(&self) -> usize {
        self.norb
    }

    pub fn total_states(&self) -> usize {
        self.sectors.iter().map(|s| s.states.len()).sum()
    }

    pub fn locate(&self, state: u64) -> Option<(usize, usize)> {
        self.index.get(&state).copied()
    }

    pub fn sector_of_key(&self, key: SectorKey) -> Option<usize> {
        self.sectors.iter().position(|s| s.key == key)
    }

    /// Sector the annihilator on `orbital` maps into, starting from `from`.
    pub fn annihilation_target(&self, from: usize, orbital: usize) -> Option<usize> {
        let key = self.sectors[from].key;
        if key.n == 0 {
            return None;
        }
        let sz2 = if self.spinful {
            if orbital % 2 == 0 {
                key.sz2 - 1
            } else {
                key.sz2 + 1
            }
        } else {
            0
        };
        self.sector_of_key(SectorKey { n: key.n - 1, sz2 })
    }

    /// Matrix elements of the annihilator c_orbital out of one source sector.
    /// Empty (None) where the sector transition is impossible.
    pub fn annihilator_block(&self, from: usize, orbital: usize) -> Option<AnnihilatorBlock> {
        assert!(orbital < self.norb, "orbital {orbital} out of range");
        let to = self.annihilation_target(from, orbital)?;
        let mut entries = Vec::new();
        for (col, &s) in self.sectors[from].states.iter().enumerate() {
            if (s >> orbital) & 1 == 0 {
                continue;
            }
            let target = s & !(1u64 << orbital);
            let mask = (1u64 << orbital) - 1;
            let sign = if (s & mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let (sec, row) = self.index[&target];
            debug_assert_eq!(sec, to);
            entries.push((row, col, sign));
        }
        Some(AnnihilatorBlock { from, to, entries })
    }

    /// All annihilator blocks of one orbital, keyed by source sector.
    pub fn annihilator_matrix(&self, orbital: usize) -> Vec<Option<AnnihilatorBlock>> {
        (0..self.sectors.len())
            .map(|from| self.annihilator_block(from, orbital))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn spec(l: usize, spinful: bool) -> SystemSpec {
        SystemSpec::new(l, spinful, Array2::zeros((l, l)), Array2::zeros((l, l))).unwrap()
    }

    /// Dense full-space annihilator assembled from the sector blocks.
    fn full_annihilator(basis: &SectorBasis, orbital: usize) -> Array2<f64> {
        let dim = basis.total_states();
        // global index = offset of sector + position
        let mut offset = vec![0usize; basis.sectors.len()];
        let mut acc = 0;
        for (i, s) in basis.sectors.iter().enumerate() {
            offset[i] = acc;
            acc += s.states.len();
        }
        let mut m = Array2::zeros((dim, dim));
        for (from, block) in basis.annihilator_matrix(orbital).into_iter().enumerate() {
            if let Some(b) = block {
                for (row, col, sign) in b.entries {
                    m[[offset[b.to] + row, offset[from] + col]] = sign;
                }
            }
        }
        m
    }

    #[test]
    fn spinless_three_site_sector_sizes() {
        let basis = build_basis(&spec(3, false)).unwrap();
        assert_eq!(basis.total_states(), 8);
        let sizes: Vec<(u32, usize)> =
            basis.sectors.iter().map(|s| (s.key.n, s.states.len())).collect();
        assert_eq!(sizes, vec![(0, 1), (1, 3), (2, 3), (3, 1)]);
    }

    #[test]
    fn spinful_six_site_state_count() {
        let basis = build_basis(&spec(6, true)).unwrap();
        assert_eq!(basis.total_states(), 4096);
    }

    #[test]
    fn spinless_single_site_sectors() {
        let basis = build_basis(&spec(1, false)).unwrap();
        let sizes: Vec<(u32, usize)> =
            basis.sectors.iter().map(|s| (s.key.n, s.states.len())).collect();
        assert_eq!(sizes, vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn single_site_annihilator_amplitude() {
        let basis = build_basis(&spec(1, false)).unwrap();
        let c = full_annihilator(&basis, 0);
        // |0> is global index 0 (N=0 sector first), |1> is index 1
        assert_eq!(c[[0, 1]], 1.0);
        assert_eq!(c.iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn canonical_anticommutation_up_to_four_sites() {
        for l in 1..=4 {
            let basis = build_basis(&spec(l, false)).unwrap();
            let dim = basis.total_states();
            let cs: Vec<Array2<f64>> = (0..l).map(|o| full_annihilator(&basis, o)).collect();
            for mu in 0..l {
                for nu in 0..l {
                    let acc = cs[mu].dot(&cs[nu].t()) + cs[nu].t().dot(&cs[mu]).to_owned();
                    let expect: Array2<f64> = if mu == nu { Array2::eye(dim) } else { Array2::zeros((dim, dim)) };
                    let err = (&acc - &expect).iter().fold(0.0f64, |a, x| a.max(x.abs()));
                    assert!(err < 1e-14, "{{c_{mu}, c_{nu}^+}} failed for l={l}: {err}");
                    let anti = cs[mu].dot(&cs[nu]) + cs[nu].dot(&cs[mu]);
                    let err = anti.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                    assert!(err < 1e-14, "{{c_{mu}, c_{nu}}} failed for l={l}: {err}");
                }
            }
        }
    }

    #[test]
    fn spinful_anticommutation_two_sites() {
        let basis = build_basis(&spec(2, true)).unwrap();
        let dim = basis.total_states();
        let cs: Vec<Array2<f64>> = (0..4).map(|o| full_annihilator(&basis, o)).collect();
        for mu in 0..4 {
            for nu in 0..4 {
                let acc = cs[mu].dot(&cs[nu].t()) + cs[nu].t().dot(&cs[mu]).to_owned();
                let expect: Array2<f64> = if mu == nu { Array2::eye(dim) } else { Array2::zeros((dim, dim)) };
                let err = (&acc - &expect).iter().fold(0.0f64, |a, x| a.max(x.abs()));
                assert!(err < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_exclusion_squared_annihilator() {
        let basis = build_basis(&spec(3, false)).unwrap();
        for o in 0..3 {
            let c = full_annihilator(&basis, o);
            let sq = c.dot(&c);
            assert!(sq.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn number_operator_counts_occupation() {
        let basis = build_basis(&spec(3, false)).unwrap();
        let dim = basis.total_states();
        let mut num = Array2::<f64>::zeros((dim, dim));
        for o in 0..3 {
            let c = full_annihilator(&basis, o);
            num = num + c.t().dot(&c);
        }
        // diagonal equals popcount of the state at each global index
        let mut gi = 0;
        for sector in &basis.sectors {
            for &s in &sector.states {
                assert_eq!(num[[gi, gi]], s.count_ones() as f64);
                gi += 1;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    assert_eq!(num[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn deterministic_ordering() {
        let a = build_basis(&spec(4, true)).unwrap();
        let b = build_basis(&spec(4, true)).unwrap();
        for (sa, sb) in a.sectors.iter().zip(b.sectors.iter()) {
            assert_eq!(sa.key, sb.key);
            assert_eq!(sa.states, sb.states);
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut t = Array2::zeros((2, 2));
        t[[0, 1]] = 1.0;
        let err = SystemSpec::new(2, false, t, Array2::zeros((2, 2)));
        assert!(err.is_err());
    }

    #[test]
    fn capacity_error_for_oversized_lattice() {
        let l = 30;
        let s = SystemSpec::new(l, false, Array2::zeros((l, l)), Array2::zeros((l, l))).unwrap();
        match build_basis(&s) {
            Err(CoreError::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
