//! Switching and permutation of the three positions of a triple.

use std::fmt;

/// A subset of positions to complement together with a relabelling of the
/// triple. Acting on a form `f`, the pattern yields `f(T(x))` where
/// `T(x)_a = x_perm[a]`, complemented (`1 - .`) when position `a` is flipped.
///
/// The 48 patterns form a group; [`SwitchPattern::then`] is its product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwitchPattern {
    flips: u8,
    perm: [u8; 3],
}

pub const PERMUTATIONS: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Flip sets in the order used by the coefficient tables: no switch, then
/// `{x3}`, `{x2}`, `{x2,x3}`, `{x1}`, `{x1,x3}`, `{x1,x2}`, `{x1,x2,x3}`.
pub const SWITCH_ORDER: [u8; 8] = [0b000, 0b100, 0b010, 0b110, 0b001, 0b101, 0b011, 0b111];

impl SwitchPattern {
    pub const IDENTITY: SwitchPattern = SwitchPattern {
        flips: 0,
        perm: [0, 1, 2],
    };

    /// Panics unless `perm` is a permutation of `{0,1,2}` and `flips < 8`.
    pub fn new(flips: u8, perm: [u8; 3]) -> Self {
        assert!(flips < 8, "flip mask out of range: {flips}");
        let mut seen = [false; 3];
        for &p in &perm {
            assert!(p < 3 && !seen[p as usize], "not a permutation: {perm:?}");
            seen[p as usize] = true;
        }
        SwitchPattern { flips, perm }
    }

    /// Complements the listed positions, no relabelling.
    pub fn switch(positions: &[usize]) -> Self {
        let flips = positions.iter().fold(0u8, |m, &a| m | (1 << a));
        SwitchPattern::new(flips, [0, 1, 2])
    }

    pub fn permutation(perm: [u8; 3]) -> Self {
        SwitchPattern::new(0, perm)
    }

    pub fn flips(&self, position: usize) -> bool {
        self.flips >> position & 1 == 1
    }

    pub fn flip_mask(&self) -> u8 {
        self.flips
    }

    pub fn perm(&self) -> [usize; 3] {
        self.perm.map(usize::from)
    }

    /// All 48 patterns, permutation-major in [`PERMUTATIONS`] order and flips
    /// in [`SWITCH_ORDER`].
    pub fn all() -> impl Iterator<Item = SwitchPattern> {
        PERMUTATIONS.into_iter().flat_map(|perm| {
            SWITCH_ORDER
                .into_iter()
                .map(move |flips| SwitchPattern::new(flips, perm))
        })
    }

    /// The pattern equivalent to applying `self` first and `next` second.
    pub fn then(&self, next: &SwitchPattern) -> SwitchPattern {
        let mut flips = 0u8;
        let mut perm = [0u8; 3];
        for a in 0..3 {
            let p1 = self.perm[a] as usize;
            perm[a] = next.perm[p1];
            let f = self.flips(a) ^ next.flips(p1);
            flips |= (f as u8) << a;
        }
        SwitchPattern { flips, perm }
    }

    /// `second ∘ first`, i.e. the pattern for applying `first` then `second`.
    pub fn compose(second: &SwitchPattern, first: &SwitchPattern) -> SwitchPattern {
        first.then(second)
    }

    pub fn inverse(&self) -> SwitchPattern {
        SwitchPattern::all()
            .find(|p| self.then(p) == SwitchPattern::IDENTITY)
            .expect("finite group")
    }
}

impl Default for SwitchPattern {
    fn default() -> Self {
        SwitchPattern::IDENTITY
    }
}

impl fmt::Display for SwitchPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = (0..3)
            .filter(|&a| self.flips(a))
            .map(|a| format!("x{}", a + 1))
            .collect();
        write!(
            f,
            "switch{{{}}} perm({}{}{})",
            s.join(","),
            self.perm[0] + 1,
            self.perm[1] + 1,
            self.perm[2] + 1
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_eight_distinct() {
        let all: std::collections::BTreeSet<_> = SwitchPattern::all().collect();
        assert_eq!(all.len(), 48);
    }

    #[test]
    fn group_axioms() {
        let all: Vec<_> = SwitchPattern::all().collect();
        for a in &all {
            assert_eq!(a.then(&SwitchPattern::IDENTITY), *a);
            assert_eq!(SwitchPattern::IDENTITY.then(a), *a);
            assert_eq!(a.then(&a.inverse()), SwitchPattern::IDENTITY);
            for b in &all {
                for c in all.iter().step_by(7) {
                    assert_eq!(a.then(b).then(c), a.then(&b.then(c)));
                }
            }
        }
    }
}
