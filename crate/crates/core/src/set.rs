//! Fixed-capacity vertex sets backed by a bit vector.

use std::cmp::Ordering;
use std::fmt;

use crate::tree::VertexId;

/// A set of vertex ids over one tree or forest. The capacity is fixed at
/// construction; ids are dense in `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    capacity: usize,
    len: usize,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
            len: 0,
        }
    }

    pub fn from_ids(capacity: usize, ids: &[VertexId]) -> Self {
        let mut s = VertexSet::new(capacity);
        for &v in ids {
            s.insert(v);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        debug_assert!(v < self.capacity);
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Inserts `v`; returns true if it was not already present.
    #[inline]
    pub fn insert(&mut self, v: VertexId) -> bool {
        assert!(v < self.capacity, "vertex {v} out of range");
        let w = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// Removes `v`; returns true if it was present.
    #[inline]
    pub fn remove(&mut self, v: VertexId) -> bool {
        assert!(v < self.capacity, "vertex {v} out of range");
        let w = &mut self.words[v / 64];
        let bit = 1u64 << (v % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
        self.len = 0;
    }

    /// Ascending iteration over members.
    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.iter().collect()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        assert_eq!(self.capacity, other.capacity);
        self.len = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
            self.len += a.count_ones() as usize;
        }
    }

    /// Packs the membership bits into a `u128` key. Requires capacity <= 128.
    pub fn as_key(&self) -> u128 {
        assert!(self.capacity <= 128, "set too large for a packed key");
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        hi << 64 | lo
    }

    /// Comma-separated sorted ids, the CLI wire form.
    pub fn to_csv(&self) -> String {
        let ids: Vec<String> = self.iter().map(|v| v.to_string()).collect();
        ids.join(",")
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the ascending member lists.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_iter() {
        let mut s = VertexSet::new(100);
        assert!(s.insert(5));
        assert!(!s.insert(5));
        assert!(s.insert(70));
        assert!(s.insert(0));
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(), vec![0, 5, 70]);
        assert!(s.remove(5));
        assert!(!s.remove(5));
        assert_eq!(s.to_vec(), vec![0, 70]);
    }

    #[test]
    fn lexicographic_order_on_sorted_lists() {
        let n = 10;
        let a = VertexSet::from_ids(n, &[0, 5]);
        let b = VertexSet::from_ids(n, &[1, 2]);
        assert!(a < b);
        let c = VertexSet::from_ids(n, &[1, 2]);
        let d = VertexSet::from_ids(n, &[1, 3]);
        assert!(c < d);
        let e = VertexSet::from_ids(n, &[1]);
        assert!(e < c);
    }

    #[test]
    fn packed_key_distinguishes() {
        let a = VertexSet::from_ids(120, &[0, 100]);
        let b = VertexSet::from_ids(120, &[0, 101]);
        assert_ne!(a.as_key(), b.as_key());
    }
}
