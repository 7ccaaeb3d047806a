//! Propositional states as canonical bitsets over a fluent index.

use std::fmt;

/// Index of a fluent in a model's fluent table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentId(pub u32);

impl FluentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for FluentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// A state is the set of fluents that are currently true.
///
/// Stored as a bitset. Trailing zero words are always trimmed, so two
/// equal sets compare and hash equal no matter how wide the states they
/// were derived from were. That lets compiled models (which extend the
/// fluent table) reuse states built against the base table.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    words: Vec<u64>,
}

impl State {
    pub fn empty() -> Self {
        State { words: Vec::new() }
    }

    pub fn from_fluents<I: IntoIterator<Item = FluentId>>(it: I) -> Self {
        let mut s = State::empty();
        for f in it {
            s.insert(f);
        }
        s
    }

    #[inline]
    pub fn contains(&self, f: FluentId) -> bool {
        let w = f.index() / 64;
        w < self.words.len() && self.words[w] >> (f.index() % 64) & 1 == 1
    }

    pub fn insert(&mut self, f: FluentId) {
        let w = f.index() / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << (f.index() % 64);
    }

    pub fn remove(&mut self, f: FluentId) {
        let w = f.index() / 64;
        if w < self.words.len() {
            self.words[w] &= !(1u64 << (f.index() % 64));
            self.trim();
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// True iff `self ⊇ other`.
    pub fn is_superset(&self, other: &State) -> bool {
        if other.words.len() > self.words.len() {
            return false;
        }
        other
            .words
            .iter()
            .zip(&self.words)
            .all(|(o, s)| o & !s == 0)
    }

    /// True iff `self ∩ other = ∅`.
    pub fn is_disjoint(&self, other: &State) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & b == 0)
    }

    /// In-place `self ∪= other`.
    pub fn union_with(&mut self, other: &State) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (s, o) in self.words.iter_mut().zip(&other.words) {
            *s |= o;
        }
    }

    /// In-place `self \= other`.
    pub fn subtract(&mut self, other: &State) {
        for (s, o) in self.words.iter_mut().zip(&other.words) {
            *s &= !o;
        }
        self.trim();
    }

    /// In-place `self ∩= other`.
    pub fn intersect_with(&mut self, other: &State) {
        if self.words.len() > other.words.len() {
            self.words.truncate(other.words.len());
        }
        for (s, o) in self.words.iter_mut().zip(&other.words) {
            *s &= o;
        }
        self.trim();
    }

    /// `self Δ other` as a new set.
    pub fn symmetric_difference(&self, other: &State) -> State {
        let n = self.words.len().max(other.words.len());
        let mut words = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            words.push(a ^ b);
        }
        let mut s = State { words };
        s.trim();
        s
    }

    /// |self Δ other| without building the set.
    pub fn symmetric_difference_len(&self, other: &State) -> usize {
        let n = self.words.len().max(other.words.len());
        let mut count = 0usize;
        for i in 0..n {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            count += (a ^ b).count_ones() as usize;
        }
        count
    }

    /// Iterate over member fluents in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(FluentId((wi * 64) as u32 + tz))
                }
            })
        })
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<FluentId> for State {
    fn from_iter<I: IntoIterator<Item = FluentId>>(it: I) -> Self {
        State::from_fluents(it)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(i: u32) -> FluentId {
        FluentId(i)
    }

    #[test]
    fn insert_remove_contains() {
        let mut s = State::empty();
        s.insert(f(3));
        s.insert(f(70));
        assert!(s.contains(f(3)) && s.contains(f(70)) && !s.contains(f(4)));
        s.remove(f(70));
        assert!(!s.contains(f(70)));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn trailing_words_do_not_affect_equality() {
        let mut a = State::from_fluents([f(0)]);
        let mut b = State::from_fluents([f(0), f(100)]);
        b.remove(f(100));
        assert_eq!(a, b);
        a.insert(f(100));
        a.remove(f(100));
        assert_eq!(a, b);
    }

    #[test]
    fn superset_and_disjoint() {
        let big = State::from_fluents([f(1), f(2), f(65)]);
        let small = State::from_fluents([f(2), f(65)]);
        assert!(big.is_superset(&small));
        assert!(!small.is_superset(&big));
        assert!(small.is_disjoint(&State::from_fluents([f(1), f(3)])));
        assert!(!small.is_disjoint(&State::from_fluents([f(2)])));
    }

    #[test]
    fn symmetric_difference_examples() {
        let a = State::from_fluents([f(0), f(1)]);
        let b = State::from_fluents([f(1), f(2)]);
        assert_eq!(
            a.symmetric_difference(&b),
            State::from_fluents([f(0), f(2)])
        );
        assert_eq!(a.symmetric_difference(&a), State::empty());
        assert_eq!(
            State::empty().symmetric_difference(&State::from_fluents([f(0)])),
            State::from_fluents([f(0)])
        );
    }

    fn arb_state() -> impl Strategy<Value = State> {
        proptest::collection::vec(0u32..128, 0..12)
            .prop_map(|v| State::from_fluents(v.into_iter().map(FluentId)))
    }

    proptest! {
        #[test]
        fn symdiff_is_symmetric(a in arb_state(), b in arb_state()) {
            prop_assert_eq!(a.symmetric_difference(&b), b.symmetric_difference(&a));
            prop_assert_eq!(a.symmetric_difference_len(&b), a.symmetric_difference(&b).len());
        }

        #[test]
        fn symdiff_triangle_inequality(a in arb_state(), b in arb_state(), c in arb_state()) {
            let ac = a.symmetric_difference_len(&c);
            let ab = a.symmetric_difference_len(&b);
            let bc = b.symmetric_difference_len(&c);
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn iter_round_trips(a in arb_state()) {
            let rebuilt: State = a.iter().collect();
            prop_assert_eq!(rebuilt, a);
        }
    }
}
