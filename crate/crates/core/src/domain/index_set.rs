use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of small indices (`< 64`) stored as a bitmask.
///
/// Used for candidate action sets and for the set of active subsequences in a
/// round. Iteration is always in ascending index order.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(u64);

pub type ActionSet = IndexSet;
pub type SubsequenceSet = IndexSet;

impl IndexSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        IndexSet(0)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= Self::CAPACITY, "index set capacity is {}", Self::CAPACITY);
        if n == Self::CAPACITY {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = Self::empty();
        s.insert(i);
        s
    }

    pub const fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::CAPACITY && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < Self::CAPACITY, "index {i} exceeds set capacity");
        self.0 |= 1u64 << i;
    }

    /// Removes `i`, returning whether it was present.
    pub fn remove(&mut self, i: usize) -> bool {
        let present = self.contains(i);
        if present {
            self.0 &= !(1u64 << i);
        }
        present
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

impl IntoIterator for IndexSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_operations() {
        let mut s = IndexSet::full(4);
        assert_eq!(s.len(), 4);
        assert!(s.remove(2));
        assert!(!s.remove(2));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(s.to_string(), "{0,1,3}");
        assert_eq!(IndexSet::full(64).len(), 64);
        assert_eq!(IndexSet::empty().first(), None);
    }

    proptest! {
        #[test]
        fn matches_btreeset(a in proptest::collection::btree_set(0usize..64, 0..20),
                            b in proptest::collection::btree_set(0usize..64, 0..20)) {
            let sa: IndexSet = a.iter().copied().collect();
            let sb: IndexSet = b.iter().copied().collect();
            let union: Vec<usize> = a.union(&b).copied().collect();
            prop_assert_eq!(sa.union(sb).iter().collect::<Vec<_>>(), union);
            let inter: Vec<usize> = a.intersection(&b).copied().collect();
            prop_assert_eq!(sa.intersection(sb).iter().collect::<Vec<_>>(), inter);
            prop_assert_eq!(sa.is_subset(sb), a.is_subset(&b));
        }
    }
}
