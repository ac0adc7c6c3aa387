use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND_SET: usize = 64;

/// Largest ground set for exhaustive `2^n` sweeps.
pub const MAX_EXHAUSTIVE: usize = 24;

/// A subset of the ground set `{0, .., n-1}` stored as a bitmask.
///
/// The ground-set size is carried by the owning structure; [`Subset::fits`]
/// checks that no bit at or above `n` is set.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        assert!(n <= MAX_GROUND_SET);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(v: usize) -> Subset {
        Subset(1u64 << v)
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Subset> {
        if n > MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(n));
        }
        let mut bits = 0u64;
        for &i in indices {
            if i >= n {
                return Err(Error::ElementOutOfRange { element: i, n });
            }
            bits |= 1u64 << i;
        }
        Ok(Subset(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: usize) -> bool {
        v < 64 && self.0 >> v & 1 == 1
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn fits(self, n: usize) -> bool {
        n >= 64 || self.0 >> n == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn with(self, v: usize) -> Subset {
        Subset(self.0 | 1u64 << v)
    }

    pub fn without(self, v: usize) -> Subset {
        Subset(self.0 & !(1u64 << v))
    }

    /// Lowest element, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> Elements {
        Elements(self.0)
    }

    pub fn to_indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> SubsetsOf {
        SubsetsOf { universe: self.0, next: Some(0) }
    }

    /// All `k`-element subsets of `self`, in increasing bitmask order.
    pub fn combinations(self, k: usize) -> impl Iterator<Item = Subset> {
        let elems = self.to_indices();
        Combinations::new(elems, k)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(Subset::EMPTY, Subset::with)
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_indices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        Subset::from_indices(MAX_GROUND_SET, &idx).map_err(serde::de::Error::custom)
    }
}

pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

/// Submask enumeration in increasing numeric order.
pub struct SubsetsOf {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for SubsetsOf {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        // Increment within the universe's bit positions.
        let succ = (cur | !self.universe).wrapping_add(1) & self.universe;
        self.next = (succ != 0).then_some(succ);
        Some(Subset(cur))
    }
}

struct Combinations {
    elems: Vec<usize>,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(elems: Vec<usize>, k: usize) -> Self {
        let done = k > elems.len();
        Combinations { idx: (0..k).collect(), elems, done }
    }
}

impl Iterator for Combinations {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        if self.done {
            return None;
        }
        let out: Subset = self.idx.iter().map(|&i| self.elems[i]).collect();
        let k = self.idx.len();
        let n = self.elems.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = Subset::from_indices(5, &[0, 2, 4]).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.contains(2) && !a.contains(1));
        assert!(Subset::from_indices(5, &[2]).unwrap().is_subset_of(a));
        assert!(a.fits(5) && !a.fits(4));
        assert_eq!(a.to_indices(), vec![0, 2, 4]);
        assert!(Subset::from_indices(3, &[3]).is_err());
    }

    #[test]
    fn submasks_enumerate_everything_once() {
        let u = Subset(0b1011_0100);
        let subs: Vec<_> = u.subsets().collect();
        assert_eq!(subs.len(), 16);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|s| s.is_subset_of(u)));
    }

    #[test]
    fn combinations_count() {
        let u = Subset::full(6);
        assert_eq!(u.combinations(3).count(), 20);
        assert_eq!(u.combinations(0).collect::<Vec<_>>(), vec![Subset::EMPTY]);
        assert_eq!(u.combinations(7).count(), 0);
        assert!(u.combinations(2).all(|s| s.len() == 2));
    }
}
