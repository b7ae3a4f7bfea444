//! Wavelet tree over the value domain with per-node grids: quantile,
//! value-range counting, query-time-alpha majority, successor/predecessor,
//! mode and top-k most frequent.
//!
//! Values are first mapped to value-rank space `[0, m)` through the `V`
//! bitmap of occurring weights. Each tree node owns the points whose
//! value rank lies in its range; membership bitmaps in x-order and
//! y-order (one wavelet tree each) remap a query rectangle downward one
//! level at a time, and local grids stored every `ceil(log2 ell)` levels
//! (plus all leaves, minus the root) answer counts.

use crate::error::{Error, Result};
use crate::grid::{RankGrid, RankRect, RectQuery};
use crate::sparse::SparseBits;
use crate::wavelet::{depth_for, nodes_at_depth, NodeRef, WaveletTree};
use crate::work::Work;

#[derive(Debug, Clone, Default)]
pub struct ValueWaveletTree {
    /// Distinct weights present.
    m: u64,
    ell: u64,
    /// Levels between stored grids: `ceil(log2 ell)`.
    step: u32,
    depth: u32,
    /// Occurring weights, marked over `[0, W)`.
    v_bits: SparseBits,
    /// Value ranks in x-rank order.
    x_tree: WaveletTree,
    /// Value ranks in y-rank order.
    y_tree: WaveletTree,
    /// `grids[d]`: at sampled depths and the leaf depth, one wavelet tree
    /// over the concatenation of every node's local permutation; `None`
    /// at unsampled depths.
    grids: Vec<Option<WaveletTree>>,
}

/// A value-tree node with the query rectangle remapped into its local
/// coordinates (interval form; empty when `x0 > x1` or `y0 > y1`).
#[derive(Debug, Clone, Copy)]
struct VState {
    xn: NodeRef,
    yn: NodeRef,
    x0: i64,
    x1: i64,
    y0: i64,
    y1: i64,
}

impl VState {
    fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }
}

impl ValueWaveletTree {
    pub fn build(grid: &RankGrid, ell: u64) -> Self {
        let ell = ell.max(2);
        let n = grid.len();
        let mut distinct: Vec<u64> = grid.weights().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let m = distinct.len() as u64;
        let v_bits = SparseBits::from_positions(&distinct, grid.weight_bound().max(1));
        let vrank = |w: u64| distinct.partition_point(|&d| d < w) as u64;
        let ranks_x: Vec<u64> = grid.weights().iter().map(|&w| vrank(w)).collect();
        let ranks_y: Vec<u64> =
            (0..n).map(|ry| vrank(grid.weight_of_yrank(ry))).collect();
        let x_build = WaveletTree::build(&ranks_x, m.max(1));
        let y_tree = WaveletTree::new(&ranks_y, m.max(1));
        let x_tree = x_build.tree;
        let depth = x_tree.depth();
        let step = depth_for(ell).max(1);
        // y-rank of the point with x-rank i, for local grid construction.
        let ys_of_x: Vec<u64> =
            (0..n).map(|rx| grid.wavelet().access(rx).expect("x-rank in range")).collect();
        let mut grids: Vec<Option<WaveletTree>> = vec![None; depth as usize + 1];
        for d in 1..=depth {
            if !(d % step == 0 || d == depth) {
                continue;
            }
            // One concatenated sequence per sampled depth: slot
            // `offset + i` holds the local y-rank of the node's i-th
            // element in local x-order. Counting restricted to a node's
            // slot range recovers the per-node grid.
            let mut sv = vec![0u64; n as usize];
            let mut sigma = 1u64;
            for node in nodes_at_depth(&x_tree, d) {
                if node.len == 0 {
                    continue;
                }
                sigma = sigma.max(node.len);
                let slots = &x_build.level_positions[d as usize]
                    [node.offset as usize..(node.offset + node.len) as usize];
                // Local y = rank of the global y-rank within the node.
                let mut order: Vec<usize> = (0..slots.len()).collect();
                order.sort_by_key(|&i| ys_of_x[slots[i] as usize]);
                for (local_y, &i) in order.iter().enumerate() {
                    sv[node.offset as usize + i] = local_y as u64;
                }
            }
            grids[d as usize] = Some(WaveletTree::new(&sv, sigma));
        }
        ValueWaveletTree { m, ell, step, depth, v_bits, x_tree, y_tree, grids }
    }

    pub fn distinct_values(&self) -> u64 {
        self.m
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Bits consumed per level step; `2^step` is the effective fan-out
    /// (`ell` rounded up to a power of two).
    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn v_bits(&self) -> &SparseBits {
        &self.v_bits
    }

    /// Measured bits of the whole section (membership trees, V, grids).
    pub fn size_bits(&self) -> u64 {
        let grids: u64 = self
            .grids
            .iter()
            .flatten()
            .map(|g| g.size_bits() + 64)
            .sum();
        self.x_tree.size_bits() + self.y_tree.size_bits() + self.v_bits.size_bits() + grids + 128
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn parts(
        &self,
    ) -> (u64, u64, u32, u32, &SparseBits, &WaveletTree, &WaveletTree, &[Option<WaveletTree>]) {
        (
            self.m,
            self.ell,
            self.step,
            self.depth,
            &self.v_bits,
            &self.x_tree,
            &self.y_tree,
            &self.grids,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        m: u64,
        ell: u64,
        step: u32,
        depth: u32,
        v_bits: SparseBits,
        x_tree: WaveletTree,
        y_tree: WaveletTree,
        grids: Vec<Option<WaveletTree>>,
    ) -> Self {
        ValueWaveletTree { m, ell, step, depth, v_bits, x_tree, y_tree, grids }
    }

    fn value_of(&self, sym: u64) -> u64 {
        self.v_bits.position(sym)
    }

    fn root_state(&self, rr: &RankRect) -> VState {
        VState {
            xn: self.x_tree.root(),
            yn: self.y_tree.root(),
            x0: rr.x0 as i64,
            x1: rr.x1 as i64,
            y0: rr.y0 as i64,
            y1: rr.y1 as i64,
        }
    }

    /// Remaps a non-empty state into one child: bounds move by rank on the
    /// membership bitmaps (`x0 -> rank(X(v), b, x0-1)`, `x1 -> rank(X(v),
    /// b, x1) - 1`).
    fn child(&self, st: &VState, bit: bool) -> VState {
        VState {
            xn: self.x_tree.child(&st.xn, bit),
            yn: self.y_tree.child(&st.yn, bit),
            x0: self.x_tree.reduce_step(&st.xn, bit, st.x0 - 1) + 1,
            x1: self.x_tree.reduce_step(&st.xn, bit, st.x1),
            y0: self.y_tree.reduce_step(&st.yn, bit, st.y0 - 1) + 1,
            y1: self.y_tree.reduce_step(&st.yn, bit, st.y1),
        }
    }

    fn grid_at(&self, depth: u32) -> Option<&WaveletTree> {
        self.grids[depth as usize].as_ref()
    }

    /// Points of the node inside the (remapped) rectangle. Bumps
    /// `work.grid_counts` once per grid probe.
    fn node_count(&self, grid: &RankGrid, st: &VState, work: &mut Work) -> u64 {
        if st.is_empty() {
            return 0;
        }
        if st.xn.depth == 0 {
            // The root has no local grid; the main index counts for it.
            work.grid_counts += 1;
            return grid.count_rank(&RankRect {
                x0: st.x0 as u64,
                x1: st.x1 as u64,
                y0: st.y0 as u64,
                y1: st.y1 as u64,
            });
        }
        if let Some(g) = self.grid_at(st.xn.depth) {
            work.grid_counts += 1;
            return perm_count(g, st.xn.offset, st.x0, st.x1, st.y0, st.y1);
        }
        self.node_count(grid, &self.child(st, false), work)
            + self.node_count(grid, &self.child(st, true), work)
    }

    /// All non-empty descendant states at `target` depth, left to right.
    fn expand(&self, st: &VState, target: u32, out: &mut Vec<VState>) {
        if st.is_empty() {
            return;
        }
        if st.xn.depth == target {
            out.push(*st);
            return;
        }
        self.expand(&self.child(st, false), target, out);
        self.expand(&self.child(st, true), target, out);
    }

    /// The `k`-th smallest weight in `Q` (1-based, duplicates counted)
    /// together with its frequency in `Q`.
    pub fn quantile(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        k: u64,
        work: &mut Work,
    ) -> Result<(u64, u64)> {
        let total = grid.count(q);
        if k == 0 || k > total {
            return Err(Error::RankOutOfRange { k, max: total });
        }
        let rr = grid.map_rect(q).expect("count > 0");
        if self.depth == 0 {
            return Ok((self.value_of(0), total));
        }
        let mut st = self.root_state(&rr);
        let mut k = k;
        loop {
            let target = (st.xn.depth + self.step).min(self.depth);
            let mut states = Vec::new();
            self.expand(&st, target, &mut states);
            let mut chosen = None;
            for cst in states {
                let c = self.node_count(grid, &cst, work);
                if k <= c {
                    chosen = Some((cst, c));
                    break;
                }
                k -= c;
            }
            let (cst, c) = chosen.expect("k was validated against the total");
            if target == self.depth {
                return Ok((self.value_of(cst.xn.symbol()), c));
            }
            st = cst;
        }
    }

    /// Occurrences of the exact weight `w` inside `Q`.
    pub fn count_value(&self, grid: &RankGrid, q: &RectQuery, w: u64, work: &mut Work) -> u64 {
        if !self.v_bits.contains(w) {
            return 0;
        }
        let Some(rr) = grid.map_rect(q) else { return 0 };
        let sym = self.v_bits.count_lt(w);
        let mut st = self.root_state(&rr);
        for d in 0..self.depth {
            if st.is_empty() {
                return 0;
            }
            st = self.child(&st, (sym >> (self.depth - 1 - d)) & 1 == 1);
        }
        self.node_count(grid, &st, work)
    }

    /// Members with weight in `[w0, w1]`.
    pub fn count_value_range(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        w0: u64,
        w1: u64,
        work: &mut Work,
    ) -> u64 {
        if w0 > w1 || self.m == 0 {
            return 0;
        }
        let r0 = self.v_bits.count_lt(w0);
        let r1 = match self.v_bits.count_lt(w1.saturating_add(1)) {
            0 => return 0,
            c => c - 1,
        };
        if r0 > r1 {
            return 0;
        }
        let Some(rr) = grid.map_rect(q) else { return 0 };
        self.cvr(grid, &self.root_state(&rr), r0, r1, work)
    }

    fn cvr(&self, grid: &RankGrid, st: &VState, r0: u64, r1: u64, work: &mut Work) -> u64 {
        if st.is_empty() || st.xn.sym_hi < r0 || st.xn.sym_lo > r1 {
            return 0;
        }
        if r0 <= st.xn.sym_lo && st.xn.sym_hi <= r1 {
            return self.node_count(grid, st, work);
        }
        self.cvr(grid, &self.child(st, false), r0, r1, work)
            + self.cvr(grid, &self.child(st, true), r0, r1, work)
    }

    /// Exact alpha-majorities for a query-time alpha: quantile probes at
    /// positions `ceil(i * alpha * Count(Q))`, then leaf verification.
    /// Bumps `work.probes` once per quantile probe and `work.candidates`
    /// per verified candidate.
    pub fn majority_alpha(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        alpha: f64,
        work: &mut Work,
    ) -> Vec<(u64, u64)> {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        let cnt = grid.count(q);
        if cnt == 0 {
            return Vec::new();
        }
        let mut candidates: Vec<u64> = Vec::new();
        let rounds = (1.0 / alpha).ceil() as u64;
        for i in 1..=rounds {
            let pos = (i as f64 * alpha * cnt as f64).ceil() as u64;
            if pos == 0 || pos > cnt {
                continue;
            }
            work.probes += 1;
            let (value, _) = self.quantile(grid, q, pos, work).expect("position within count");
            candidates.push(value);
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut out = Vec::new();
        for value in candidates {
            work.candidates += 1;
            let f = self.count_value(grid, q, value, work);
            if (f as f64) > alpha * cnt as f64 {
                out.push((value, f));
            }
        }
        out
    }

    /// Smallest member weight `>= w`, or `None`.
    pub fn successor(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        w: u64,
        work: &mut Work,
    ) -> Option<u64> {
        let Some(rr) = grid.map_rect(q) else { return None };
        let r0 = self.v_bits.count_lt(w);
        if r0 >= self.m {
            return None;
        }
        self.scan_first(grid, &self.root_state(&rr), r0, true, work)
            .map(|sym| self.value_of(sym))
    }

    /// Largest member weight `<= w`, or `None`.
    pub fn predecessor(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        w: u64,
        work: &mut Work,
    ) -> Option<u64> {
        let Some(rr) = grid.map_rect(q) else { return None };
        let below = self.v_bits.count_lt(w.saturating_add(1));
        if below == 0 {
            return None;
        }
        self.scan_first(grid, &self.root_state(&rr), below - 1, false, work)
            .map(|sym| self.value_of(sym))
    }

    /// Leftmost (ascending) or rightmost (descending) leaf with a member,
    /// restricted to symbols `>= bound` (ascending) or `<= bound`.
    fn scan_first(
        &self,
        grid: &RankGrid,
        st: &VState,
        bound: u64,
        ascending: bool,
        work: &mut Work,
    ) -> Option<u64> {
        if st.is_empty() {
            return None;
        }
        if ascending && st.xn.sym_hi < bound || !ascending && st.xn.sym_lo > bound {
            return None;
        }
        let prunable = st.xn.depth == 0 || self.grid_at(st.xn.depth).is_some();
        if prunable && self.node_count(grid, st, work) == 0 {
            return None;
        }
        if st.xn.depth == self.depth {
            return Some(st.xn.symbol());
        }
        let order = if ascending { [false, true] } else { [true, false] };
        order.into_iter().find_map(|bit| {
            self.scan_first(grid, &self.child(st, bit), bound, ascending, work)
        })
    }

    /// The `k` most frequent weights in `Q`, count descending then value
    /// ascending. Interval splitting over sorted positions, driven by a
    /// max-queue on interval length. Bumps `work.probes` per quantile
    /// probe.
    pub fn top_k_frequent(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        k: usize,
        work: &mut Work,
    ) -> Vec<(u64, u64)> {
        let cnt = grid.count(q);
        if cnt == 0 || k == 0 {
            return Vec::new();
        }
        use std::cmp::Reverse;
        let mut heap: std::collections::BinaryHeap<(u64, Reverse<u64>, u64)> =
            std::collections::BinaryHeap::new();
        heap.push((cnt, Reverse(1), cnt));
        let mut results: Vec<(u64, u64)> = Vec::new();
        while let Some(&(len, Reverse(start), end)) = heap.peek() {
            let threshold = if results.len() < k {
                0
            } else {
                let mut fs: Vec<u64> = results.iter().map(|&(_, f)| f).collect();
                fs.sort_unstable_by_key(|&f| Reverse(f));
                fs[k - 1]
            };
            // No unexplored interval can beat or tie the current k-th
            // frequency; ties must still be probed so the smallest value
            // wins among equal counts.
            if len < threshold.max(1) {
                break;
            }
            heap.pop();
            let mid = (start + end) / 2;
            work.probes += 1;
            let (value, freq) =
                self.quantile(grid, q, mid, work).expect("position within count");
            // The value's full positional run [lo, hi] inside the sorted
            // multiset of Q.
            let lo = if value == 0 {
                1
            } else {
                self.count_value_range(grid, q, 0, value - 1, work) + 1
            };
            let hi = lo + freq - 1;
            results.push((value, freq));
            if lo > start {
                heap.push((lo - start, Reverse(start), lo - 1));
            }
            if end > hi {
                heap.push((end - hi, Reverse(hi + 1), end));
            }
        }
        results.sort_by_key(|&(v, f)| (Reverse(f), v));
        results.truncate(k);
        results
    }

    /// Most frequent weight with its count (smallest value on ties).
    pub fn mode(&self, grid: &RankGrid, q: &RectQuery, work: &mut Work) -> Option<(u64, u64)> {
        self.top_k_frequent(grid, q, 1, work).first().copied()
    }
}

/// Points of a node's local permutation inside `[x0, x1] x [y0, y1]`,
/// where the node occupies slots `[offset, offset + len)` of the
/// level-concatenated sequence `wt`.
fn perm_count(wt: &WaveletTree, offset: u64, x0: i64, x1: i64, y0: i64, y1: i64) -> u64 {
    if x0 > x1 || y0 > y1 {
        return 0;
    }
    let off = offset as i64;
    wt.decompose_tracked(y0 as u64, y1 as u64, off + x0 - 1, off + x1)
        .expect("local rect validated by remapping")
        .iter()
        .map(|(_, a, b)| (b - a) as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Point, WeightedPointSet};
    use crate::oracle::Oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(ell: u64) -> (RankGrid, ValueWaveletTree, Oracle) {
        let pts = vec![
            Point::new(10, 30, 5),
            Point::new(25, 12, 2),
            Point::new(40, 5, 7),
            Point::new(60, 20, 2),
        ];
        let grid = RankGrid::build(&WeightedPointSet::from_points(pts.clone()));
        let vwt = ValueWaveletTree::build(&grid, ell);
        (grid, vwt, Oracle::new(pts))
    }

    #[test]
    fn toy_examples() {
        for ell in [2, 4, 16] {
            let (g, v, _) = toy(ell);
            let full = RectQuery::new(0, 100, 0, 100);
            let mut w = Work::new();
            assert_eq!(v.quantile(&g, &full, 1, &mut w).unwrap(), (2, 2));
            assert_eq!(v.quantile(&g, &full, 3, &mut w).unwrap().0, 5);
            assert_eq!(v.quantile(&g, &full, 4, &mut w).unwrap().0, 7);
            assert!(v.quantile(&g, &full, 0, &mut w).is_err());
            assert!(v.quantile(&g, &full, 5, &mut w).is_err());
            assert_eq!(v.count_value(&g, &full, 2, &mut w), 2);
            assert_eq!(v.count_value(&g, &full, 3, &mut w), 0);
            assert_eq!(v.count_value_range(&g, &full, 2, 5, &mut w), 3);
            assert_eq!(v.count_value_range(&g, &full, 0, 1 << 20, &mut w), 4);
            assert_eq!(v.count_value_range(&g, &full, 6, 3, &mut w), 0);
            assert_eq!(v.majority_alpha(&g, &full, 0.4, &mut w), vec![(2, 2)]);
            assert!(v.majority_alpha(&g, &full, 0.5, &mut w).is_empty());
            assert_eq!(v.successor(&g, &full, 3, &mut w), Some(5));
            assert_eq!(v.successor(&g, &full, 5, &mut w), Some(5));
            assert_eq!(v.successor(&g, &full, 8, &mut w), None);
            assert_eq!(v.predecessor(&g, &full, 6, &mut w), Some(5));
            assert_eq!(v.predecessor(&g, &full, 1, &mut w), None);
            assert_eq!(v.top_k_frequent(&g, &full, 1, &mut w), vec![(2, 2)]);
            assert_eq!(
                v.top_k_frequent(&g, &full, 5, &mut w),
                vec![(2, 2), (5, 1), (7, 1)]
            );
            assert_eq!(v.mode(&g, &full, &mut w), Some((2, 2)));
        }
    }

    #[test]
    fn random_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a13_37);
        for round in 0..30 {
            let ell = [2u64, 4, 16][round % 3];
            let wmax = if round % 2 == 0 { 8 } else { 1 << 12 };
            let n = 1 + (round as u64 * 11) % 260;
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::new(rng.gen_range(0..128), rng.gen_range(0..128), rng.gen_range(0..wmax))
                })
                .collect();
            let grid = RankGrid::build(&WeightedPointSet::from_points(pts.clone()));
            let vwt = ValueWaveletTree::build(&grid, ell);
            let o = Oracle::new(pts);
            let mut w = Work::new();
            for _ in 0..6 {
                let (a, b) = (rng.gen_range(0..128u64), rng.gen_range(0..128u64));
                let (c, d) = (rng.gen_range(0..128u64), rng.gen_range(0..128u64));
                let q = RectQuery::new(a.min(b), a.max(b), c.min(d), c.max(d));
                let total = o.count(&q);
                let mut prev = 0u64;
                for k in 1..=total {
                    let (val, f) = vwt.quantile(&grid, &q, k, &mut w).unwrap();
                    assert_eq!(Some(val), o.quantile(&q, k));
                    assert_eq!(f, o.count_value(&q, val));
                    assert!(val >= prev, "quantile must be monotone in k");
                    prev = val;
                }
                let (w0, w1) = (rng.gen_range(0..wmax), rng.gen_range(0..wmax));
                assert_eq!(
                    vwt.count_value_range(&grid, &q, w0.min(w1), w0.max(w1), &mut w),
                    o.count_value_range(&q, w0.min(w1), w0.max(w1))
                );
                for alpha in [0.6, 0.34, 0.11] {
                    assert_eq!(
                        vwt.majority_alpha(&grid, &q, alpha, &mut w),
                        o.majority(&q, alpha),
                        "alpha {alpha}"
                    );
                }
                for _ in 0..4 {
                    let probe = rng.gen_range(0..wmax + 2);
                    assert_eq!(
                        vwt.successor(&grid, &q, probe, &mut w),
                        o.successor(&q, probe).map(|(v, _)| v)
                    );
                    assert_eq!(
                        vwt.predecessor(&grid, &q, probe, &mut w),
                        o.predecessor(&q, probe).map(|(v, _)| v)
                    );
                }
                if total > 0 {
                    assert_eq!(
                        vwt.successor(&grid, &q, 0, &mut w),
                        Some(vwt.quantile(&grid, &q, 1, &mut w).unwrap().0)
                    );
                }
                for k in [1usize, 2, 5] {
                    assert_eq!(
                        vwt.top_k_frequent(&grid, &q, k, &mut w),
                        o.top_k_frequent(&q, k)
                    );
                }
                assert_eq!(vwt.mode(&grid, &q, &mut w), o.mode(&q));
            }
        }
    }

    #[test]
    fn probe_counters_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a13_38);
        let n = 2048u64;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(rng.gen_range(0..4096), rng.gen_range(0..4096), rng.gen_range(0..256))
            })
            .collect();
        let grid = RankGrid::build(&WeightedPointSet::from_points(pts.clone()));
        let o = Oracle::new(pts);
        for ell in [2u64, 4, 16] {
            let vwt = ValueWaveletTree::build(&grid, ell);
            let m = vwt.distinct_values() as f64;
            let branching = 1u64 << vwt.step;
            for _ in 0..12 {
                let (a, b) = (rng.gen_range(0..4096u64), rng.gen_range(0..4096u64));
                let q = RectQuery::new(a.min(b), a.max(b), 0, 4095);
                let total = grid.count(&q);
                if total == 0 {
                    continue;
                }
                // Quantile: at most ell counts per sampled level, each
                // expanding to a handful of grid probes.
                let mut w = Work::new();
                vwt.quantile(&grid, &q, 1 + total / 2, &mut w).unwrap();
                let levels = (m.log2() / (vwt.step as f64)).ceil().max(1.0);
                assert!(
                    (w.grid_counts as f64) <= 3.0 * branching as f64 * levels,
                    "quantile grid counts {} (ell {ell})",
                    w.grid_counts
                );
                // Variable-alpha probes.
                for alpha in [0.6, 0.34, 0.11] {
                    let mut w = Work::new();
                    vwt.majority_alpha(&grid, &q, alpha, &mut w);
                    assert!(w.probes <= (1.0 / alpha).ceil() as u64 + 1);
                }
                // Top-k frequent: probes bounded by the k-th frequency.
                for k in [1usize, 3] {
                    let mut w = Work::new();
                    let got = vwt.top_k_frequent(&grid, &q, k, &mut w);
                    if let Some(&(_, fk)) = got.last() {
                        let alpha_k = fk as f64 / total as f64;
                        assert!(
                            (w.probes as f64) <= 6.0 * (4.0 / alpha_k) + 8.0,
                            "topfreq probes {} for alpha_k {alpha_k} (k {k})",
                            w.probes
                        );
                    }
                    assert_eq!(got, o.top_k_frequent(&q, k));
                }
            }
        }
    }

    #[test]
    fn section_space_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a13_39);
        let n = 4096u64;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(
                    rng.gen_range(0..1 << 14),
                    rng.gen_range(0..1 << 14),
                    rng.gen_range(0..1 << 10),
                )
            })
            .collect();
        let grid = RankGrid::build(&WeightedPointSet::from_points(pts));
        for ell in [2u64, 4, 16] {
            let vwt = ValueWaveletTree::build(&grid, ell);
            let m = vwt.distinct_values() as f64;
            let per_point = vwt.size_bits() as f64 / n as f64;
            let bound = (n as f64).log2() * (m.log2() / (ell as f64).log2()).ceil()
                + 8.0 * m.log2();
            assert!(per_point <= bound, "ell {ell}: {per_point} > {bound}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut w = Work::new();
        // Empty set.
        let g0 = RankGrid::build(&WeightedPointSet::from_points(vec![]));
        let v0 = ValueWaveletTree::build(&g0, 4);
        let q = RectQuery::new(0, 10, 0, 10);
        assert!(v0.quantile(&g0, &q, 1, &mut w).is_err());
        assert_eq!(v0.successor(&g0, &q, 0, &mut w), None);
        assert!(v0.top_k_frequent(&g0, &q, 3, &mut w).is_empty());
        // Single distinct value.
        let pts = vec![Point::new(1, 2, 9), Point::new(3, 4, 9)];
        let g1 = RankGrid::build(&WeightedPointSet::from_points(pts));
        let v1 = ValueWaveletTree::build(&g1, 2);
        let full = RectQuery::new(0, 10, 0, 10);
        assert_eq!(v1.quantile(&g1, &full, 2, &mut w).unwrap(), (9, 2));
        assert_eq!(v1.majority_alpha(&g1, &full, 0.9, &mut w), vec![(9, 2)]);
        assert_eq!(v1.mode(&g1, &full, &mut w), Some((9, 2)));
        assert_eq!(v1.predecessor(&g1, &full, 8, &mut w), None);
    }
}
