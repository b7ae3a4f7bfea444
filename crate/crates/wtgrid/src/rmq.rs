//! Range-minimum index in one bit per tree node (at most about two bits
//! per entry after rounding the leaf count to a power of two).
//!
//! A complete tournament tree over the array stores, per internal node, a
//! single bit saying which child holds the subtree minimum (ties prefer
//! the left child, so queries return leftmost minima). Values are never
//! stored; queries re-fetch the O(log n) candidate values through a
//! caller-supplied accessor.

use crate::bits::BitVec;

#[derive(Debug, Clone, Default)]
pub struct Rmq {
    n: u64,
    /// Leaf count rounded up to a power of two.
    size: u64,
    /// Heap-ordered choice bits for internal nodes `1..size`; a set bit
    /// means the minimum comes from the right child.
    bits: BitVec,
}

impl Rmq {
    pub fn new(values: &[u64]) -> Self {
        let n = values.len() as u64;
        if n == 0 {
            return Rmq { n: 0, size: 0, bits: BitVec::from_bools(&[]) };
        }
        let size = n.next_power_of_two();
        // Minimum position per subtree; u32::MAX marks padding.
        let mut mp = vec![u32::MAX; 2 * size as usize];
        for i in 0..n as usize {
            mp[size as usize + i] = i as u32;
        }
        let mut bits = vec![false; size as usize];
        for v in (1..size as usize).rev() {
            let (l, r) = (mp[2 * v], mp[2 * v + 1]);
            let take_right = l == u32::MAX
                || (r != u32::MAX && values[r as usize] < values[l as usize]);
            bits[v] = take_right;
            mp[v] = if take_right { r } else { l };
        }
        Rmq { n, size, bits: BitVec::from_bools(&bits) }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Leaf index of the subtree minimum under heap node `v`.
    fn min_pos(&self, mut v: u64) -> u64 {
        while v < self.size {
            v = 2 * v + self.bits.get(v as usize) as u64;
        }
        v - self.size
    }

    /// Index of the leftmost minimum of `A[l..=r]`; `fetch(i)` must return
    /// `A[i]`.
    pub fn rmq<F: FnMut(u64) -> u64>(&self, l: u64, r: u64, mut fetch: F) -> u64 {
        debug_assert!(l <= r && r < self.n);
        let mut best: Option<(u64, u64)> = None;
        self.walk(1, 0, self.size - 1, l, r, &mut best, &mut fetch);
        best.expect("non-empty query range").1
    }

    fn walk<F: FnMut(u64) -> u64>(
        &self,
        v: u64,
        lo: u64,
        hi: u64,
        l: u64,
        r: u64,
        best: &mut Option<(u64, u64)>,
        fetch: &mut F,
    ) {
        if hi < l || r < lo {
            return;
        }
        if l <= lo && hi <= r {
            let pos = self.min_pos(v);
            let val = fetch(pos);
            // Strict comparison keeps the earlier (leftmost) candidate on
            // ties; canonical nodes are visited left to right.
            if best.map_or(true, |(bv, _)| val < bv) {
                *best = Some((val, pos));
            }
            return;
        }
        let mid = (lo + hi) / 2;
        self.walk(2 * v, lo, mid, l, r, best, fetch);
        self.walk(2 * v + 1, mid + 1, hi, l, r, best, fetch);
    }

    /// Measured bits including directory overhead.
    pub fn size_bits(&self) -> u64 {
        self.bits.size_bits() + 128
    }

    pub(crate) fn parts(&self) -> (u64, u64, &BitVec) {
        (self.n, self.size, &self.bits)
    }

    pub(crate) fn from_parts(n: u64, size: u64, bits: BitVec) -> Self {
        Rmq { n, size, bits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(values: &[u64], l: usize, r: usize) -> usize {
        let mut best = l;
        for i in l..=r {
            if values[i] < values[best] {
                best = i;
            }
        }
        best
    }

    fn check_all(values: &[u64]) {
        let r = Rmq::new(values);
        for l in 0..values.len() {
            for h in l..values.len() {
                assert_eq!(
                    r.rmq(l as u64, h as u64, |i| values[i as usize]) as usize,
                    oracle(values, l, h),
                    "A={values:?} [{l}, {h}]"
                );
            }
        }
    }

    #[test]
    fn exhaustive_small_arrays() {
        // Every array of length <= 7 over {0, 1, 2}.
        for n in 1..=7usize {
            let mut a = vec![0u64; n];
            loop {
                check_all(&a);
                let mut i = 0;
                while i < n {
                    a[i] += 1;
                    if a[i] < 3 {
                        break;
                    }
                    a[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    #[test]
    fn random_against_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x04a6_1e);
        for round in 0..60 {
            let n = rng.gen_range(1..=1500);
            // Narrow value ranges force long runs of ties.
            let vmax = if round % 3 == 0 { 4u64 } else { 1 << 30 };
            let values: Vec<u64> = (0..n).map(|_| rng.gen_range(0..vmax)).collect();
            let r = Rmq::new(&values);
            for _ in 0..60 {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(a..n);
                assert_eq!(
                    r.rmq(a as u64, b as u64, |i| values[i as usize]) as usize,
                    oracle(&values, a, b)
                );
            }
        }
    }

    #[test]
    fn monotone_and_adversarial_shapes() {
        let asc: Vec<u64> = (0..600).collect();
        let desc: Vec<u64> = (0..600).rev().collect();
        let vee: Vec<u64> = (0..300).rev().chain(0..300).collect();
        let flat = vec![7u64; 600];
        for values in [asc, desc, vee, flat] {
            let r = Rmq::new(&values);
            for l in (0..values.len()).step_by(37) {
                for w in [0, 1, 63, 64, 65, 400] {
                    let rr = (l + w).min(values.len() - 1);
                    assert_eq!(
                        r.rmq(l as u64, rr as u64, |i| values[i as usize]) as usize,
                        oracle(&values, l, rr)
                    );
                }
            }
        }
    }

    #[test]
    fn space_is_small() {
        let values: Vec<u64> = (0..10_000u64).map(|i| i * 2654435761 % 997).collect();
        let r = Rmq::new(&values);
        // One bit per node, doubled by power-of-two rounding at worst.
        assert!((r.size_bits() as f64) <= 2.2 * values.len() as f64 + 1024.0);
    }
}
