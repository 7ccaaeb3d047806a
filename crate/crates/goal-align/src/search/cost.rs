//! Lexicographic cost vectors for layered optimization.
//!
//! A vector holds up to three components compared lexicographically:
//! the dominant component first. Plain models use one component (the
//! action cost); compiled models put the penalized-check count or the
//! source-plan costs in the leading components so that huge penalty
//! integers are never needed in-process.

use std::ops::Add;

pub const COST_COMPONENTS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostVec {
    parts: [u64; COST_COMPONENTS],
}

impl CostVec {
    pub const ZERO: CostVec = CostVec {
        parts: [0; COST_COMPONENTS],
    };

    pub fn scalar(c: u64) -> CostVec {
        CostVec { parts: [c, 0, 0] }
    }

    pub fn pair(dominant: u64, base: u64) -> CostVec {
        CostVec {
            parts: [dominant, base, 0],
        }
    }

    pub fn triple(first: u64, second: u64, third: u64) -> CostVec {
        CostVec {
            parts: [first, second, third],
        }
    }

    pub fn component(&self, i: usize) -> u64 {
        self.parts[i]
    }

    /// The dominant (first) component.
    pub fn dominant(&self) -> u64 {
        self.parts[0]
    }

    pub fn is_zero(&self) -> bool {
        *self == CostVec::ZERO
    }

    pub fn saturating_add(&self, other: &CostVec) -> CostVec {
        let mut parts = self.parts;
        for (p, o) in parts.iter_mut().zip(&other.parts) {
            *p = p.saturating_add(*o);
        }
        CostVec { parts }
    }

    /// Adds `h` to the dominant component only; used for A* priorities
    /// where the heuristic estimates just the dominant layer.
    pub fn with_dominant_estimate(&self, h: u64) -> CostVec {
        let mut parts = self.parts;
        parts[0] = parts[0].saturating_add(h);
        CostVec { parts }
    }

    pub fn render(&self, components: usize) -> String {
        let shown: Vec<String> = self.parts[..components.clamp(1, COST_COMPONENTS)]
            .iter()
            .map(|c| c.to_string())
            .collect();
        format!("({})", shown.join(", "))
    }
}

impl Add for CostVec {
    type Output = CostVec;
    fn add(self, other: CostVec) -> CostVec {
        self.saturating_add(&other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        assert!(CostVec::pair(0, 100) < CostVec::pair(1, 0));
        assert!(CostVec::triple(2, 0, 0) > CostVec::triple(1, 99, 99));
        assert!(CostVec::scalar(3) < CostVec::scalar(4));
    }

    #[test]
    fn addition_is_componentwise() {
        let a = CostVec::triple(1, 2, 3) + CostVec::triple(4, 5, 6);
        assert_eq!(a, CostVec::triple(5, 7, 9));
    }
}
