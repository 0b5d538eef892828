use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default dimension cap.
pub const DEFAULT_DIMENSION_CAP: usize = 25_000;

/// Truncation of the two transmons and the three resonators (left, center, right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    pub qubit_levels: usize,
    pub resonator_levels: [usize; 3],
    pub cap: usize,
}

impl Default for HilbertSpec {
    fn default() -> Self {
        HilbertSpec { qubit_levels: 3, resonator_levels: [7, 7, 7], cap: DEFAULT_DIMENSION_CAP }
    }
}

/// Occupation numbers of one basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub left_qubit: usize,
    pub right_qubit: usize,
    pub left: usize,
    pub center: usize,
    pub right: usize,
}

impl BasisState {
    pub fn occupations(&self) -> [usize; 5] {
        [self.left_qubit, self.right_qubit, self.left, self.center, self.right]
    }

    pub fn from_occupations(o: [usize; 5]) -> Self {
        BasisState { left_qubit: o[0], right_qubit: o[1], left: o[2], center: o[3], right: o[4] }
    }
}

impl HilbertSpec {
    pub fn uniform(qubit_levels: usize, resonator_levels: usize) -> Self {
        HilbertSpec { qubit_levels, resonator_levels: [resonator_levels; 3], ..Default::default() }
    }

    pub fn dimension(&self) -> usize {
        self.qubit_levels.pow(2) * self.resonator_levels.iter().product::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubit_levels < 2 || self.resonator_levels.iter().any(|&n| n < 2) {
            return Err(Error::Config("every subsystem needs at least two levels".into()));
        }
        let dim = self.dimension();
        if dim > self.cap {
            return Err(Error::DimensionCap { dim, cap: self.cap });
        }
        Ok(())
    }

    pub(crate) fn sizes(&self) -> [usize; 5] {
        let [l, c, r] = self.resonator_levels;
        [self.qubit_levels, self.qubit_levels, l, c, r]
    }

    /// Row-major index over (left qubit, right qubit, left, center, right).
    pub fn index(&self, s: BasisState) -> usize {
        s.occupations()
            .iter().zip(self.sizes()).fold(0, |acc, (&n, size)| {
            debug_assert!(n < size);
            acc * size + n
        })
    }

    pub fn state(&self, mut index: usize) -> BasisState {
        let sizes = self.sizes();
        let mut occ = [0; 5];
        for k in (0..5).rev() {
            occ[k] = index % sizes[k];
            index /= sizes[k];
        }
        BasisState::from_occupations(occ)
    }

    /// |jk⟩ with every resonator in vacuum.
    pub fn computational(&self, left_qubit: usize, right_qubit: usize) -> usize {
        self.index(BasisState { left_qubit, right_qubit, left: 0, center: 0, right: 0 })
    }

    /// Computational indices ordered 00, 01, 10, 11.
    pub fn computational_indices(&self) -> [usize; 4] {
        [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(j, k)| self.computational(j, k))
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dimension()).map(|i| self.state(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_of_default_truncation() {
        assert_eq!(HilbertSpec::default().dimension(), 3087);
        assert_eq!(HilbertSpec::uniform(3, 13).dimension(), 19773);
    }

    #[test]
    fn cap_is_enforced() {
        let h = HilbertSpec { cap: 3000, ..Default::default() };
        assert!(matches!(h.validate(), Err(Error::DimensionCap { dim: 3087, cap: 3000 })));
        assert!(HilbertSpec::uniform(3, 13).validate().is_ok());
        assert!(HilbertSpec::uniform(3, 15).validate().is_err());
        assert!(HilbertSpec::uniform(1, 5).validate().is_err());
    }

    #[test]
    fn index_round_trips() {
        let h = HilbertSpec { qubit_levels: 3, resonator_levels: [4, 5, 6], cap: 10_000 };
        for i in 0..h.dimension() {
            assert_eq!(h.index(h.state(i)), i);
        }
        assert_eq!(h.computational(0, 0), 0);
        assert_eq!(h.computational(0, 1), 4 * 5 * 6);
    }
}
