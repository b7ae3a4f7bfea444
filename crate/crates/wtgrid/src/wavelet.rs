//! Balanced wavelet tree over a sequence `S[0,n)` on alphabet `[0, sigma)`.
//!
//! One bitmap per level (node bitmaps concatenated left to right), so a node
//! is identified by its depth, offset and length; child offsets are derived
//! with rank, never stored.

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// A node of the wavelet tree: a half-open slice of one level bitmap plus
/// the (padded) symbol interval it covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRef {
    pub depth: u32,
    pub sym_lo: u64,
    pub sym_hi: u64,
    pub offset: u64,
    pub len: u64,
}

impl NodeRef {
    pub fn is_leaf_of(&self, wt: &WaveletTree) -> bool {
        self.depth == wt.depth
    }

    pub fn symbol(&self) -> u64 {
        debug_assert_eq!(self.sym_lo, self.sym_hi);
        self.sym_lo
    }
}

#[derive(Debug, Clone, Default)]
pub struct WaveletTree {
    sigma: u64,
    n: u64,
    depth: u32,
    /// `levels[d]` holds the concatenated node bitmaps of depth `d`.
    levels: Vec<BitVec>,
}

/// Build artifact: the tree plus, per level `0..=depth`, the original index
/// of the element stored at each slot. Payload modules consume the
/// permutations and drop them.
pub struct WaveletBuild {
    pub tree: WaveletTree,
    pub level_positions: Vec<Vec<u32>>,
}

pub fn depth_for(sigma: u64) -> u32 {
    if sigma <= 1 {
        0
    } else {
        64 - (sigma - 1).leading_zeros()
    }
}

/// All nodes at depth `d`, left to right (including empty ones).
pub(crate) fn nodes_at_depth(wt: &WaveletTree, d: u32) -> Vec<NodeRef> {
    let mut cur = vec![wt.root()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for v in cur {
            next.push(wt.child(&v, false));
            next.push(wt.child(&v, true));
        }
        cur = next;
    }
    cur
}

impl WaveletTree {
    pub fn new(seq: &[u64], sigma: u64) -> Self {
        Self::build(seq, sigma).tree
    }

    pub fn build(seq: &[u64], sigma: u64) -> WaveletBuild {
        let n = seq.len() as u64;
        debug_assert!(seq.iter().all(|&c| c < sigma.max(1)));
        let depth = depth_for(sigma);
        let mut levels = Vec::with_capacity(depth as usize);
        let mut level_positions = Vec::with_capacity(depth as usize + 1);
        let mut order: Vec<u32> = (0..seq.len() as u32).collect();
        for d in 0..depth {
            level_positions.push(order.clone());
            let shift = depth - 1 - d;
            let bits: Vec<bool> =
                order.iter().map(|&i| (seq[i as usize] >> shift) & 1 == 1).collect();
            levels.push(BitVec::from_bools(&bits));
            // Stable partition each node's slice by the emitted bit. Because
            // the order is already grouped by the top `d` bits, a global
            // stable sort on the top `d+1` bits does the same thing.
            let mut zeros = Vec::with_capacity(order.len());
            let mut ones = Vec::with_capacity(order.len());
            let mut out = Vec::with_capacity(order.len());
            let mut prev_prefix = u64::MAX;
            for (slot, &i) in order.iter().enumerate() {
                let prefix = seq[i as usize] >> (shift + 1);
                if prefix != prev_prefix && !(zeros.is_empty() && ones.is_empty()) {
                    out.extend_from_slice(&zeros);
                    out.extend_from_slice(&ones);
                    zeros.clear();
                    ones.clear();
                }
                prev_prefix = prefix;
                if bits[slot] {
                    ones.push(i);
                } else {
                    zeros.push(i);
                }
            }
            out.extend_from_slice(&zeros);
            out.extend_from_slice(&ones);
            order = out;
        }
        level_positions.push(order);
        WaveletBuild { tree: WaveletTree { sigma, n, depth, levels }, level_positions }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn level(&self, d: u32) -> &BitVec {
        &self.levels[d as usize]
    }

    pub fn root(&self) -> NodeRef {
        NodeRef {
            depth: 0,
            sym_lo: 0,
            sym_hi: (1u64 << self.depth) - 1,
            offset: 0,
            len: self.n,
        }
    }

    /// Number of zero bits in `node`'s bitmap slice before local position
    /// `end` (exclusive).
    fn zeros_before(&self, node: &NodeRef, end: u64) -> u64 {
        let lv = &self.levels[node.depth as usize];
        lv.rank_prefix(false, (node.offset + end) as usize)
            - lv.rank_prefix(false, node.offset as usize)
    }

    pub fn child(&self, node: &NodeRef, bit: bool) -> NodeRef {
        debug_assert!(node.depth < self.depth);
        let zeros = self.zeros_before(node, node.len);
        let mid = (node.sym_lo + node.sym_hi) / 2;
        if !bit {
            NodeRef {
                depth: node.depth + 1,
                sym_lo: node.sym_lo,
                sym_hi: mid,
                offset: node.offset,
                len: zeros,
            }
        } else {
            NodeRef {
                depth: node.depth + 1,
                sym_lo: mid + 1,
                sym_hi: node.sym_hi,
                offset: node.offset + zeros,
                len: node.len - zeros,
            }
        }
    }

    /// One reduction step: maps local position `i` (interval form, `-1`
    /// allowed) into the `bit`-child.
    pub fn reduce_step(&self, node: &NodeRef, bit: bool, i: i64) -> i64 {
        if i < 0 {
            return -1;
        }
        debug_assert!((i as u64) < node.len);
        let lv = &self.levels[node.depth as usize];
        let before = lv.rank_prefix(bit, node.offset as usize);
        lv.rank_prefix(bit, (node.offset + i as u64 + 1) as usize) as i64 - before as i64 - 1
    }

    /// Iterated reduction along a bit string.
    pub fn reduce(&self, node: &NodeRef, bits: &[bool], i: i64) -> i64 {
        let mut cur = *node;
        let mut pos = i;
        for &b in bits {
            pos = self.reduce_step(&cur, b, pos);
            cur = self.child(&cur, b);
        }
        pos
    }

    /// Inverse of one reduction step: `i` is a position in the `bit`-child
    /// of `node`; returns the corresponding position in `node`.
    pub fn unreduce_step(&self, node: &NodeRef, bit: bool, i: u64) -> u64 {
        let lv = &self.levels[node.depth as usize];
        let before = lv.rank_prefix(bit, node.offset as usize);
        lv.select_unchecked(bit, before + i + 1) as u64 - node.offset
    }

    /// Maps a local position up along a recorded root-to-node path; entry
    /// `(parent, bit)` means the walk took `bit` out of `parent`.
    pub fn unreduce_path(&self, path: &[(NodeRef, bool)], mut i: u64) -> u64 {
        for (parent, bit) in path.iter().rev() {
            i = self.unreduce_step(parent, *bit, i);
        }
        i
    }

    pub fn access(&self, i: u64) -> Result<u64> {
        if i >= self.n {
            return Err(Error::OutOfRange { index: i as i64, len: self.n });
        }
        let mut node = self.root();
        let mut pos = i;
        let mut sym = 0u64;
        for _ in 0..self.depth {
            let bit = self.levels[node.depth as usize].get((node.offset + pos) as usize);
            sym = (sym << 1) | bit as u64;
            pos = self.reduce_step(&node, bit, pos as i64) as u64;
            node = self.child(&node, bit);
        }
        Ok(sym)
    }

    /// Occurrences of symbol `c` in `S[0, i]`; `i = -1` gives 0.
    pub fn seq_rank(&self, c: u64, i: i64) -> Result<u64> {
        if c >= self.sigma.max(1) {
            return Err(Error::OutOfRange { index: c as i64, len: self.sigma });
        }
        if i < -1 || i >= self.n as i64 {
            if i == -1 {
                return Ok(0);
            }
            return Err(Error::OutOfRange { index: i, len: self.n });
        }
        if self.depth == 0 {
            return Ok((i + 1) as u64);
        }
        let mut node = self.root();
        let mut pos = i;
        for d in 0..self.depth {
            let bit = (c >> (self.depth - 1 - d)) & 1 == 1;
            pos = self.reduce_step(&node, bit, pos);
            node = self.child(&node, bit);
        }
        Ok((pos + 1) as u64)
    }

    /// Position of the `k`-th occurrence of `c` (1-based).
    pub fn seq_select(&self, c: u64, k: u64) -> Result<i64> {
        if c >= self.sigma.max(1) {
            return Err(Error::OutOfRange { index: c as i64, len: self.sigma });
        }
        if k == 0 {
            return Ok(-1);
        }
        let mut node = self.root();
        let mut path = Vec::with_capacity(self.depth as usize);
        for d in 0..self.depth {
            let bit = (c >> (self.depth - 1 - d)) & 1 == 1;
            path.push((node, bit));
            node = self.child(&node, bit);
        }
        if k > node.len {
            return Err(Error::SelectNotFound { bit: 0, k, total: node.len });
        }
        Ok(self.unreduce_path(&path, k - 1) as i64)
    }

    /// Maximal nodes whose symbol intervals exactly tile `[y0, y1]`,
    /// left to right.
    pub fn decompose(&self, y0: u64, y1: u64) -> Result<Vec<NodeRef>> {
        Ok(self.decompose_tracked(y0, y1, -1, -1)?.into_iter().map(|(v, _, _)| v).collect())
    }

    /// Decomposition of `[y0, y1]` carrying the reductions of two root
    /// positions `a` and `b` (interval form, `-1` allowed) to each node.
    pub fn decompose_tracked(
        &self,
        y0: u64,
        y1: u64,
        a: i64,
        b: i64,
    ) -> Result<Vec<(NodeRef, i64, i64)>> {
        if y0 > y1 {
            return Err(Error::EmptyRange(format!("symbol range [{y0}, {y1}]")));
        }
        if y0 >= self.sigma.max(1) || y1 >= (1u64 << self.depth).max(1) {
            return Err(Error::OutOfRange { index: y1 as i64, len: self.sigma });
        }
        let mut out = Vec::new();
        self.cover(&self.root(), y0, y1, a, b, &mut out);
        Ok(out)
    }

    fn cover(
        &self,
        node: &NodeRef,
        y0: u64,
        y1: u64,
        a: i64,
        b: i64,
        out: &mut Vec<(NodeRef, i64, i64)>,
    ) {
        if y0 <= node.sym_lo && node.sym_hi <= y1 {
            out.push((*node, a, b));
            return;
        }
        let mid = (node.sym_lo + node.sym_hi) / 2;
        if y0 <= mid {
            let a0 = self.reduce_step(node, false, a);
            let b0 = self.reduce_step(node, false, b);
            self.cover(&self.child(node, false), y0, y1, a0, b0, out);
        }
        if y1 > mid {
            let a1 = self.reduce_step(node, true, a);
            let b1 = self.reduce_step(node, true, b);
            self.cover(&self.child(node, true), y0, y1, a1, b1, out);
        }
    }

    /// Measured bits of all level bitmaps, directories included.
    pub fn size_bits(&self) -> u64 {
        self.levels.iter().map(|l| l.size_bits()).sum::<u64>() + 192
    }

    pub(crate) fn parts(&self) -> (u64, u64, u32, &[BitVec]) {
        (self.sigma, self.n, self.depth, &self.levels)
    }

    pub(crate) fn from_parts(sigma: u64, n: u64, depth: u32, levels: Vec<BitVec>) -> Self {
        WaveletTree { sigma, n, depth, levels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn documented_examples() {
        let wt = WaveletTree::new(&[3, 1, 0, 2], 4);
        assert_eq!(wt.access(2).unwrap(), 0);
        assert_eq!(wt.access(0).unwrap(), 3);
        assert_eq!(wt.seq_rank(1, 3).unwrap(), 1);
        assert_eq!(wt.seq_rank(1, -1).unwrap(), 0);
        assert_eq!(wt.seq_select(0, 1).unwrap(), 2);

        let uniform = WaveletTree::new(&[2, 2, 2], 3);
        assert_eq!(uniform.seq_rank(2, 2).unwrap(), 3);
        assert_eq!(uniform.seq_select(2, 3).unwrap(), 2);

        // reduce on the root bitmap of S = [3,1,0,2]: top bits 1,0,0,1.
        let root = wt.root();
        assert_eq!(wt.reduce(&root, &[false], 3), 1);
        assert_eq!(wt.reduce(&root, &[], 3), 3);
        assert_eq!(wt.reduce(&root, &[true], -1), -1);
    }

    #[test]
    fn decompose_examples() {
        let wt = WaveletTree::new(&[3, 1, 0, 2], 4);
        let full = wt.decompose(0, 3).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!((full[0].sym_lo, full[0].sym_hi), (0, 3));

        let part = wt.decompose(0, 2).unwrap();
        let ranges: Vec<(u64, u64)> = part.iter().map(|v| (v.sym_lo, v.sym_hi)).collect();
        assert_eq!(ranges, vec![(0, 1), (2, 2)]);

        let single = wt.decompose(2, 2).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!((single[0].sym_lo, single[0].sym_hi), (2, 2));

        assert!(wt.decompose_tracked(2, 1, -1, -1).is_err());
    }

    #[test]
    fn decompose_tiling_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x71e_11);
        for _ in 0..500 {
            let sigma = rng.gen_range(1..=300u64);
            let wt = WaveletTree::new(&[], sigma);
            let y0 = rng.gen_range(0..sigma);
            let y1 = rng.gen_range(y0..sigma);
            let cover = wt.decompose(y0, y1).unwrap();
            assert!(cover.len() as u64 <= 2 * depth_for(sigma).max(1) as u64);
            let mut expect = y0;
            for v in &cover {
                assert_eq!(v.sym_lo, expect, "gap or overlap at {expect}");
                expect = v.sym_hi + 1;
            }
            assert_eq!(expect, y1 + 1);
        }
    }

    #[test]
    fn random_against_sequence_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a7e_57);
        for _ in 0..200 {
            let sigma = rng.gen_range(1..=1024u64);
            let n = rng.gen_range(0..=512usize);
            let seq: Vec<u64> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let wt = WaveletTree::new(&seq, sigma);
            for i in 0..n {
                assert_eq!(wt.access(i as u64).unwrap(), seq[i]);
            }
            for _ in 0..20 {
                let c = rng.gen_range(0..sigma);
                let i = if n == 0 { -1 } else { rng.gen_range(0..n) as i64 };
                let expect = seq.iter().take((i + 1) as usize).filter(|&&x| x == c).count() as u64;
                assert_eq!(wt.seq_rank(c, i).unwrap(), expect);
                let total = seq.iter().filter(|&&x| x == c).count() as u64;
                if total > 0 {
                    let k = rng.gen_range(1..=total);
                    let pos = seq
                        .iter()
                        .enumerate()
                        .filter(|(_, &x)| x == c)
                        .nth(k as usize - 1)
                        .unwrap()
                        .0;
                    assert_eq!(wt.seq_select(c, k).unwrap(), pos as i64);
                }
                assert!(wt.seq_select(c, total + 1).is_err());
            }
        }
    }

    #[test]
    fn reduce_unreduce_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xd00d);
        for _ in 0..100 {
            let sigma = rng.gen_range(2..=64u64);
            let n = rng.gen_range(1..=256usize);
            let seq: Vec<u64> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let wt = WaveletTree::new(&seq, sigma);
            for i in 0..n as u64 {
                // Follow the element's own bits down, then invert the path.
                let mut node = wt.root();
                let mut path = Vec::new();
                let mut pos = i as i64;
                for _ in 0..wt.depth() {
                    let bit = wt.level(node.depth).get((node.offset + pos as u64) as usize);
                    let down = wt.reduce_step(&node, bit, pos);
                    path.push((node, bit));
                    node = wt.child(&node, bit);
                    assert_eq!(wt.unreduce_step(&path.last().unwrap().0, bit, down as u64), pos as u64);
                    pos = down;
                }
                assert_eq!(wt.unreduce_path(&path, pos as u64), i);
            }
        }
    }

    #[test]
    fn empty_and_singleton() {
        let wt = WaveletTree::new(&[], 8);
        assert!(wt.is_empty());
        assert_eq!(wt.seq_rank(3, -1).unwrap(), 0);
        let one = WaveletTree::new(&[5], 8);
        assert_eq!(one.access(0).unwrap(), 5);
        assert_eq!(one.seq_select(5, 1).unwrap(), 0);
    }
}
