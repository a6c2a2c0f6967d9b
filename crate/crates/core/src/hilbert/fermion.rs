//! Fixed-particle-number occupation bases for spinful lattice fermions.
//!
//! Spin-orbital `2 * site + spin` holds bit `2 * site + spin` of a
//! configuration mask, with spin 0 = up and spin 1 = down. A configuration
//! mask stands for the ordered product of creation operators with ascending
//! mode index acting on the vacuum, which fixes all fermionic signs.

use super::{HilbertError, SparseOperator, TripletBuilder};

/// Electron spin projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// All configurations with `n_up` up and `n_down` down electrons on
/// `n_sites` sites, sorted by ascending bit pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionSector {
    n_sites: usize,
    n_up: usize,
    n_down: usize,
    states: Vec<u64>,
}

impl FermionSector {
    pub const MAX_SITES: usize = 32;

    pub fn new(n_sites: usize, n_up: usize, n_down: usize) -> Result<Self, HilbertError> {
        if n_sites == 0 || n_sites > Self::MAX_SITES || n_up > n_sites || n_down > n_sites {
            return Err(HilbertError::InvalidSector {
                n_sites,
                n_up,
                n_down,
            });
        }
        let up_masks = site_subsets(n_sites, n_up);
        let down_masks = site_subsets(n_sites, n_down);
        let mut states = Vec::with_capacity(up_masks.len() * down_masks.len());
        for &u in &up_masks {
            for &d in &down_masks {
                states.push(interleave(u, Spin::Up) | interleave(d, Spin::Down));
            }
        }
        states.sort_unstable();
        Ok(Self {
            n_sites,
            n_up,
            n_down,
            states,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn n_down(&self) -> usize {
        self.n_down
    }

    pub fn n_electrons(&self) -> usize {
        self.n_up + self.n_down
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        2 * site + spin.offset()
    }

    pub fn index_of(&self, config: u64) -> Option<usize> {
        self.states.binary_search(&config).ok()
    }

    pub fn occupied(&self, state: usize, mode: usize) -> bool {
        self.states[state] >> mode & 1 == 1
    }

    fn check_mode(&self, mode: usize) -> Result<(), HilbertError> {
        if mode >= self.n_modes() {
            Err(HilbertError::InvalidMode {
                mode,
                n_modes: self.n_modes(),
            })
        } else {
            Ok(())
        }
    }

    /// Matrix of `ĉ†_create ĉ_destroy` projected onto this sector; spin-flip
    /// bilinears leave the sector and project to zero.
    pub fn bilinear(&self, create: usize, destroy: usize) -> Result<SparseOperator, HilbertError> {
        self.check_mode(create)?;
        self.check_mode(destroy)?;
        let mut b = TripletBuilder::with_capacity(self.dim(), self.dim());
        for (col, &config) in self.states.iter().enumerate() {
            if let Some((target, sign)) = apply_bilinear(config, create, destroy) {
                if let Some(row) = self.index_of(target) {
                    b.push(row, col, sign)?;
                }
            }
        }
        Ok(b.build())
    }

    /// Occupation number operator of one spin-orbital.
    pub fn number(&self, mode: usize) -> Result<SparseOperator, HilbertError> {
        self.check_mode(mode)?;
        let diag: Vec<f64> = (0..self.dim())
            .map(|s| if self.occupied(s, mode) { 1.0 } else { 0.0 })
            .collect();
        Ok(SparseOperator::diagonal(&diag))
    }

    /// Site density `n̂_i = n̂_{i↑} + n̂_{i↓}` as a diagonal vector.
    pub fn site_density_diagonal(&self, site: usize) -> Vec<f64> {
        let up = self.mode(site, Spin::Up);
        let down = self.mode(site, Spin::Down);
        (0..self.dim())
            .map(|s| self.occupied(s, up) as u8 as f64 + self.occupied(s, down) as u8 as f64)
            .collect()
    }

    /// Open-chain hopping `Σ_{i,σ} (ĉ†_{iσ}ĉ_{i+1σ} + h.c.)` without the `−t0` prefactor.
    pub fn hopping(&self) -> Result<SparseOperator, HilbertError> {
        let mut b = TripletBuilder::new(self.dim());
        for site in 0..self.n_sites.saturating_sub(1) {
            for spin in Spin::BOTH {
                let a = self.mode(site, spin);
                let c = self.mode(site + 1, spin);
                b.add_operator(&self.bilinear(a, c)?, 1.0)?;
                b.add_operator(&self.bilinear(c, a)?, 1.0)?;
            }
        }
        b.build().into_hermitian()
    }

    /// Hopping on a single bond and spin, `ĉ†_{iσ}ĉ_{i+1σ} + h.c.`.
    pub fn bond_hopping(&self, site: usize, spin: Spin) -> Result<SparseOperator, HilbertError> {
        let a = self.mode(site, spin);
        let c = self.mode(site + 1, spin);
        self.bilinear(a, c)?.add(&self.bilinear(c, a)?)
    }

    /// `Σ_i n̂_{i↑} n̂_{i↓}`.
    pub fn double_occupancy(&self) -> SparseOperator {
        let diag: Vec<f64> = (0..self.dim())
            .map(|s| {
                (0..self.n_sites)
                    .filter(|&i| {
                        self.occupied(s, self.mode(i, Spin::Up))
                            && self.occupied(s, self.mode(i, Spin::Down))
                    })
                    .count() as f64
            })
            .collect();
        let mut op = SparseOperator::diagonal(&diag);
        op = op.into_hermitian().expect("diagonal real operator");
        op
    }

    /// `Σ_i w_i n̂_i`.
    pub fn weighted_density(&self, weights: &[f64]) -> Result<SparseOperator, HilbertError> {
        if weights.len() != self.n_sites {
            return Err(HilbertError::ShapeMismatch {
                expected: self.n_sites,
                found: weights.len(),
            });
        }
        let mut diag = vec![0.0; self.dim()];
        for (site, &w) in weights.iter().enumerate() {
            for (d, n) in diag.iter_mut().zip(self.site_density_diagonal(site)) {
                *d += w * n;
            }
        }
        SparseOperator::diagonal(&diag).into_hermitian()
    }

    /// Total electron number operator.
    pub fn total_number(&self) -> SparseOperator {
        let n = self.n_electrons() as f64;
        SparseOperator::diagonal(&vec![n; self.dim()])
    }
}

/// Applies `ĉ†_a ĉ_b` to a configuration; `None` when the result vanishes.
pub(crate) fn apply_bilinear(config: u64, create: usize, destroy: usize) -> Option<(u64, f64)> {
    if config >> destroy & 1 == 0 {
        return None;
    }
    let removed = config & !(1u64 << destroy);
    if removed >> create & 1 == 1 {
        return None;
    }
    let below = |mask: u64, mode: usize| (mask & ((1u64 << mode) - 1)).count_ones();
    let parity = below(config, destroy) + below(removed, create);
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((removed | 1u64 << create, sign))
}

fn site_subsets(n_sites: usize, k: usize) -> Vec<u64> {
    (0u64..1u64 << n_sites)
        .filter(|m| m.count_ones() as usize == k)
        .collect()
}

fn interleave(site_mask: u64, spin: Spin) -> u64 {
    let mut out = 0u64;
    let mut m = site_mask;
    while m != 0 {
        let site = m.trailing_zeros() as u64;
        out |= 1u64 << (2 * site + spin.offset() as u64);
        m &= m - 1;
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl FermionSector {
    /// `C(n_sites, n_up) * C(n_sites, n_down)`.
    pub fn expected_dim(n_sites: usize, n_up: usize, n_down: usize) -> usize {
        binomial(n_sites, n_up) * binomial(n_sites, n_down)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions() {
        assert_eq!(FermionSector::new(2, 1, 0).unwrap().dim(), 2);
        assert_eq!(FermionSector::new(2, 1, 1).unwrap().dim(), 4);
        assert_eq!(FermionSector::new(4, 2, 2).unwrap().dim(), 36);
        for n in 1..=6 {
            for u in 0..=n {
                for d in 0..=n {
                    let s = FermionSector::new(n, u, d).unwrap();
                    assert_eq!(s.dim(), FermionSector::expected_dim(n, u, d));
                }
            }
        }
    }

    #[test]
    fn invalid_sector() {
        assert!(matches!(
            FermionSector::new(2, 3, 0),
            Err(HilbertError::InvalidSector { .. })
        ));
        assert!(FermionSector::new(0, 0, 0).is_err());
    }

    #[test]
    fn states_are_sorted_with_correct_counts() {
        let s = FermionSector::new(4, 2, 1).unwrap();
        assert!(s.states().windows(2).all(|w| w[0] < w[1]));
        for &c in s.states() {
            let up = (0..4).filter(|i| c >> (2 * i) & 1 == 1).count();
            let down = (0..4).filter(|i| c >> (2 * i + 1) & 1 == 1).count();
            assert_eq!((up, down), (2, 1));
        }
    }

    #[test]
    fn single_particle_hop_has_no_sign() {
        // one up electron: states |site1⟩ = bit0, |site2⟩ = bit2
        let s = FermionSector::new(2, 1, 0).unwrap();
        assert_eq!(s.states(), &[0b0001, 0b0100]);
        let op = s.bilinear(s.mode(0, Spin::Up), s.mode(1, Spin::Up)).unwrap();
        assert_eq!(op.get(0, 1), 1.0);
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn number_operator_is_diagonal_projector() {
        let s = FermionSector::new(3, 2, 1).unwrap();
        for mode in 0..s.n_modes() {
            let n = s.bilinear(mode, mode).unwrap();
            for (r, c, v) in n.iter() {
                assert_eq!(r, c);
                assert_eq!(v, 1.0);
            }
            assert_eq!(n, s.number(mode).unwrap());
        }
    }

    #[test]
    fn hubbard_term_on_two_site_singlet_sector() {
        // hand enumeration: 0b0011 (both on site 1), 0b0110, 0b1001, 0b1100 (both on site 2)
        let s = FermionSector::new(2, 1, 1).unwrap();
        assert_eq!(s.states(), &[0b0011, 0b0110, 0b1001, 0b1100]);
        let h = s.double_occupancy();
        let diag: Vec<f64> = (0..4).map(|i| h.get(i, i)).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.nnz(), 2);
    }

    #[test]
    fn jordan_wigner_sign_between_modes() {
        // ĉ†_0 ĉ_2 acting on bits {1,2}: one occupied mode (1) between 0 and 2
        let (target, sign) = apply_bilinear(0b0110, 0, 2).unwrap();
        assert_eq!(target, 0b0011);
        assert_eq!(sign, -1.0);
        assert!(apply_bilinear(0b0110, 1, 2).is_none());
        assert!(apply_bilinear(0b0001, 0, 2).is_none());
    }

    #[test]
    fn bilinear_adjoint_symmetry_and_number_conservation() {
        let s = FermionSector::new(3, 2, 1).unwrap();
        let n_tot = s.total_number();
        for a in 0..s.n_modes() {
            for b in 0..s.n_modes() {
                let ab = s.bilinear(a, b).unwrap();
                let ba = s.bilinear(b, a).unwrap();
                assert_eq!(ab.adjoint(), ba);
                let comm = ab.commutator(&n_tot).unwrap();
                assert!(comm.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_anticommutation_via_bilinears() {
        // ĉ†_a ĉ_b ĉ†_b ĉ_a = n_a (1 - n_b) for a != b of equal spin
        let s = FermionSector::new(3, 1, 1).unwrap();
        for a in 0..s.n_modes() {
            for b in 0..s.n_modes() {
                if a == b || a % 2 != b % 2 {
                    continue;
                }
                let lhs = s.bilinear(a, b).unwrap().mul(&s.bilinear(b, a).unwrap()).unwrap();
                let na = s.number(a).unwrap();
                let nb = s.number(b).unwrap();
                let rhs = na.sub(&na.mul(&nb).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn invalid_mode_is_rejected() {
        let s = FermionSector::new(2, 1, 0).unwrap();
        assert!(matches!(
            s.bilinear(0, 4),
            Err(HilbertError::InvalidMode { .. })
        ));
    }
}
