//! Fixed-alpha range majorities: candidate lists precomputed over block
//! trees of every wavelet node, verified with per-value grids.
//!
//! The threshold `alpha` is fixed at build time. For each node `v` of the
//! main permutation wavelet, the node's element sequence is cut into
//! blocks of `b = ceil(s / alpha)` elements (`s = t * ceil(log2 m)`), and
//! a balanced tree over the blocks stores the at most `floor(1/alpha)`
//! exact alpha-majorities of every canonical block range. A query
//! decomposes its y-range into wavelet nodes, reads the lists covering
//! the block-aligned part of each remapped x-interval, picks up the at
//! most `2b - 2` boundary elements individually, and verifies every
//! candidate by exact counting on a per-value grid.

use crate::grid::{RankGrid, RectQuery};
use crate::sparse::SparseBits;
use crate::stats::weight_at;
use crate::wavelet::{depth_for, nodes_at_depth, WaveletBuild, WaveletTree};
use crate::work::Work;

/// Occurrences of one distinct weight: its x-ranks and y-ranks in the
/// main grid plus the local permutation between them.
#[derive(Debug, Clone)]
pub(crate) struct ValueGrid {
    pub(crate) xs: SparseBits,
    pub(crate) ys: SparseBits,
    pub(crate) perm: WaveletTree,
}

/// Balanced tree over the blocks of one wavelet node; `lists` is laid
/// out in heap order over `size` (a power of two) leaves, each entry the
/// exact alpha-majorities (as value ranks) of the node's element range.
#[derive(Debug, Clone, Default)]
pub(crate) struct CandTree {
    pub(crate) nb: u64,
    pub(crate) size: u64,
    pub(crate) lists: Vec<Vec<u32>>,
}

impl CandTree {
    /// Lists of the canonical nodes covering blocks `[l, r)`.
    fn collect<'a>(&'a self, l: u64, r: u64, out: &mut Vec<&'a [u32]>) {
        self.walk(1, 0, self.size, l, r.min(self.nb), out);
    }

    fn walk<'a>(&'a self, id: u64, lo: u64, hi: u64, l: u64, r: u64, out: &mut Vec<&'a [u32]>) {
        if r <= lo || hi <= l {
            return;
        }
        if l <= lo && hi <= r {
            out.push(&self.lists[id as usize]);
            return;
        }
        let mid = (lo + hi) / 2;
        self.walk(2 * id, lo, mid, l, r, out);
        self.walk(2 * id + 1, mid, hi, l, r, out);
    }
}

#[derive(Debug, Clone)]
pub struct FixedMajorityIndex {
    alpha: f64,
    t: u32,
    /// Block length in elements.
    block: u64,
    m: u64,
    /// Occurring weights, marked over `[0, W)`.
    v_bits: SparseBits,
    per_value: Vec<ValueGrid>,
    /// `trees[d]` holds, per non-empty node at depth `d` (sorted by
    /// offset), that node's candidate tree.
    trees: Vec<Vec<(u64, CandTree)>>,
}

impl FixedMajorityIndex {
    pub fn build(grid: &RankGrid, wb: &WaveletBuild, t: u32, alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        let n = grid.len();
        let mut distinct: Vec<u64> = grid.weights().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let m = distinct.len() as u64;
        let v_bits = SparseBits::from_positions(&distinct, grid.weight_bound().max(1));
        let vrank = |w: u64| distinct.partition_point(|&d| d < w) as u64;
        let s = (t as u64 * depth_for(m.max(2)) as u64).max(1);
        let block = ((s as f64 / alpha).ceil() as u64).max(1);
        let cap = (1.0 / alpha).floor() as usize;

        // Per-value grids: x-ranks, y-ranks, and the local permutation.
        let mut per_value: Vec<(Vec<u64>, Vec<u64>)> = vec![(Vec::new(), Vec::new()); m as usize];
        for rx in 0..n {
            per_value[vrank(grid.weight_at_xrank(rx)) as usize].0.push(rx);
        }
        for ry in 0..n {
            per_value[vrank(grid.weight_of_yrank(ry)) as usize].1.push(ry);
        }
        let per_value: Vec<ValueGrid> = per_value
            .into_iter()
            .map(|(xs, ys)| {
                // Local y of the i-th occurrence in x-order.
                let sv: Vec<u64> = xs
                    .iter()
                    .map(|&rx| {
                        let ry = grid.wavelet().access(rx).expect("x-rank in range");
                        ys.partition_point(|&p| p < ry) as u64
                    })
                    .collect();
                ValueGrid {
                    perm: WaveletTree::new(&sv, (xs.len() as u64).max(1)),
                    xs: SparseBits::from_positions(&xs, n.max(1)),
                    ys: SparseBits::from_positions(&ys, n.max(1)),
                }
            })
            .collect();

        // Candidate trees for every non-empty wavelet node.
        let wt = grid.wavelet();
        let mut trees: Vec<Vec<(u64, CandTree)>> = Vec::with_capacity(wt.depth() as usize + 1);
        for d in 0..=wt.depth() {
            let ranks: Vec<u32> = wb.level_positions[d as usize]
                .iter()
                .map(|&i| vrank(grid.weights()[i as usize]) as u32)
                .collect();
            let mut level = Vec::new();
            for node in nodes_at_depth(wt, d) {
                if node.len == 0 {
                    continue;
                }
                let elems = &ranks[node.offset as usize..(node.offset + node.len) as usize];
                level.push((node.offset, build_cand_tree(elems, block, alpha, cap)));
            }
            trees.push(level);
        }
        FixedMajorityIndex { alpha, t, block, m, v_bits, per_value, trees }
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn parts(
        &self,
    ) -> (f64, u32, u64, u64, &SparseBits, &[ValueGrid], &[Vec<(u64, CandTree)>]) {
        (self.alpha, self.t, self.block, self.m, &self.v_bits, &self.per_value, &self.trees)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        alpha: f64,
        t: u32,
        block: u64,
        m: u64,
        v_bits: SparseBits,
        per_value: Vec<ValueGrid>,
        trees: Vec<Vec<(u64, CandTree)>>,
    ) -> Self {
        FixedMajorityIndex { alpha, t, block, m, v_bits, per_value, trees }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    /// Measured bits: candidate lists at `ceil(log2 m)` bits per entry
    /// plus per-node overhead, per-value grids, and the V bitmap.
    pub fn size_bits(&self) -> u64 {
        let entry_bits = depth_for(self.m.max(2)) as u64;
        let lists: u64 = self
            .trees
            .iter()
            .flatten()
            .map(|(_, t)| {
                64 + t.lists.iter().map(|l| 16 + l.len() as u64 * entry_bits).sum::<u64>()
            })
            .sum();
        let grids: u64 = self
            .per_value
            .iter()
            .map(|g| g.xs.size_bits() + g.ys.size_bits() + g.perm.size_bits())
            .sum();
        lists + grids + self.v_bits.size_bits() + 128
    }

    /// Bits held by the candidate lists alone (the part the block
    /// parameter trades off).
    pub fn candidate_list_bits(&self) -> u64 {
        let entry_bits = depth_for(self.m.max(2)) as u64;
        self.trees
            .iter()
            .flatten()
            .flat_map(|(_, t)| t.lists.iter())
            .map(|l| l.len() as u64 * entry_bits)
            .sum()
    }

    /// Occurrences of the exact weight `w` inside `q`, by rank-remapping
    /// into the weight's per-value grid.
    pub fn count_value(&self, grid: &RankGrid, q: &RectQuery, w: u64) -> u64 {
        if !self.v_bits.contains(w) {
            return 0;
        }
        let Some(rr) = grid.map_rect(q) else { return 0 };
        let vg = &self.per_value[self.v_bits.count_lt(w) as usize];
        let x0 = vg.xs.count_lt(rr.x0);
        let x1 = match vg.xs.count_lt(rr.x1 + 1) {
            0 => return 0,
            c => c - 1,
        };
        let y0 = vg.ys.count_lt(rr.y0);
        let y1 = match vg.ys.count_lt(rr.y1 + 1) {
            0 => return 0,
            c => c - 1,
        };
        if x0 > x1 || y0 > y1 {
            return 0;
        }
        vg.perm
            .decompose_tracked(y0, y1, x0 as i64 - 1, x1 as i64)
            .expect("local rect in range")
            .iter()
            .map(|(_, a, b)| (b - a) as u64)
            .sum()
    }

    /// All weights occurring more than `alpha * Count(q)` times in `q`,
    /// with their counts, value-ascending. Bumps `work.nodes` per
    /// decomposition node and `work.candidates` per verification.
    pub fn majority(
        &self,
        grid: &RankGrid,
        q: &RectQuery,
        work: &mut Work,
    ) -> Vec<(u64, u64)> {
        let Some(rr) = grid.map_rect(q) else { return Vec::new() };
        let wt = grid.wavelet();
        let pieces = wt
            .decompose_tracked(rr.y0, rr.y1, rr.x0 as i64 - 1, rr.x1 as i64)
            .expect("rank rect in range");
        let cnt: u64 = pieces.iter().map(|(_, a, b)| (b - a) as u64).sum();
        if cnt == 0 {
            return Vec::new();
        }
        let mut cand_ranks: Vec<u32> = Vec::new();
        let mut lists: Vec<&[u32]> = Vec::new();
        for (node, a, b) in &pieces {
            work.nodes += 1;
            if b <= a {
                continue;
            }
            // Local inclusive element range of the piece.
            let (lo, hi) = ((a + 1) as u64, *b as u64);
            let tree = self.tree_of(node.depth, node.offset);
            // Longest block-aligned range inside [lo, hi].
            let bs = lo.div_ceil(self.block);
            let be = (hi + 1) / self.block;
            if bs < be {
                lists.clear();
                tree.collect(bs, be, &mut lists);
                for l in &lists {
                    cand_ranks.extend_from_slice(l);
                }
            }
            // Boundary elements, resolved to weights via the leaves.
            let aligned = if bs < be { (bs * self.block, be * self.block) } else { (hi + 1, 0) };
            for g in lo..hi + 1 {
                if bs < be && (aligned.0..aligned.1).contains(&g) {
                    continue;
                }
                let w = weight_at(grid, node, node.offset + g);
                cand_ranks.push(self.v_bits.count_lt(w) as u32);
            }
        }
        cand_ranks.sort_unstable();
        cand_ranks.dedup();
        let mut out = Vec::new();
        for r in cand_ranks {
            work.candidates += 1;
            let w = self.v_bits.position(r as u64);
            let f = self.count_value(grid, q, w);
            if (f as f64) > self.alpha * cnt as f64 {
                out.push((w, f));
            }
        }
        out
    }

    fn tree_of(&self, depth: u32, offset: u64) -> &CandTree {
        let level = &self.trees[depth as usize];
        let i = level.partition_point(|&(o, _)| o < offset);
        debug_assert!(i < level.len() && level[i].0 == offset);
        &level[i].1
    }
}

/// Exact alpha-majorities of every canonical block range, by frequency
/// counting over the covered elements.
fn build_cand_tree(elems: &[u32], block: u64, alpha: f64, cap: usize) -> CandTree {
    let nb = (elems.len() as u64).div_ceil(block).max(1);
    let size = nb.next_power_of_two();
    let mut lists = vec![Vec::new(); 2 * size as usize];
    fill_lists(elems, block, alpha, cap, &mut lists, 1, 0, size, nb);
    CandTree { nb, size, lists }
}

#[allow(clippy::too_many_arguments)]
fn fill_lists(
    elems: &[u32],
    block: u64,
    alpha: f64,
    cap: usize,
    lists: &mut [Vec<u32>],
    id: u64,
    lo: u64,
    hi: u64,
    nb: u64,
) {
    if lo >= nb {
        return;
    }
    let el = (lo * block) as usize;
    let er = ((hi * block) as usize).min(elems.len());
    let mut slice: Vec<u32> = elems[el..er].to_vec();
    slice.sort_unstable();
    let total = slice.len() as f64;
    let mut majors = Vec::new();
    let mut i = 0;
    while i < slice.len() {
        let j = slice[i..].partition_point(|&v| v == slice[i]) + i;
        if (j - i) as f64 > alpha * total {
            majors.push(slice[i]);
        }
        i = j;
    }
    debug_assert!(majors.len() <= cap);
    lists[id as usize] = majors;
    if hi - lo > 1 {
        let mid = (lo + hi) / 2;
        fill_lists(elems, block, alpha, cap, lists, 2 * id, lo, mid, nb);
        fill_lists(elems, block, alpha, cap, lists, 2 * id + 1, mid, hi, nb);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Point, WeightedPointSet};
    use crate::oracle::Oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build_all(pts: Vec<Point>, t: u32, alpha: f64) -> (RankGrid, FixedMajorityIndex, Oracle) {
        let (grid, wb) = RankGrid::build_full(&WeightedPointSet::from_points(pts.clone()));
        let idx = FixedMajorityIndex::build(&grid, &wb, t, alpha);
        (grid, idx, Oracle::new(pts))
    }

    #[test]
    fn toy_majorities() {
        let pts = vec![
            Point::new(10, 30, 5),
            Point::new(25, 12, 2),
            Point::new(40, 5, 7),
            Point::new(60, 20, 2),
        ];
        let (g, idx, _) = build_all(pts, 1, 0.4);
        let mut w = Work::new();
        let full = RectQuery::new(0, 100, 0, 100);
        assert_eq!(idx.majority(&g, &full, &mut w), vec![(2, 2)]);
        assert_eq!(idx.count_value(&g, &full, 2), 2);
        assert_eq!(idx.count_value(&g, &full, 3), 0);
        let (g5, idx5, _) = build_all(
            vec![
                Point::new(10, 30, 5),
                Point::new(25, 12, 2),
                Point::new(40, 5, 7),
                Point::new(60, 20, 2),
            ],
            1,
            0.5,
        );
        assert!(idx5.majority(&g5, &full, &mut w).is_empty());
    }

    #[test]
    fn random_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa150_11);
        for round in 0..24 {
            let alpha = [0.5, 0.25, 0.125][round % 3];
            let t = [1u32, 2, 4][round / 8];
            let n = 1 + (round as u64 * 83) % 600;
            let wmax = [4u64, 64, 1 << 12][round % 3];
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::new(rng.gen_range(0..256), rng.gen_range(0..256), rng.gen_range(0..wmax))
                })
                .collect();
            let (g, idx, o) = build_all(pts, t, alpha);
            for _ in 0..12 {
                let (a, b) = (rng.gen_range(0..256u64), rng.gen_range(0..256u64));
                let (c, d) = (rng.gen_range(0..256u64), rng.gen_range(0..256u64));
                let q = RectQuery::new(a.min(b), a.max(b), c.min(d), c.max(d));
                let mut w = Work::new();
                assert_eq!(idx.majority(&g, &q, &mut w), o.majority(&q, alpha));
                let probe = rng.gen_range(0..wmax);
                assert_eq!(idx.count_value(&g, &q, probe), o.count_value(&q, probe));
            }
        }
    }

    #[test]
    fn candidate_work_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa150_12);
        let n = 2048u64;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(rng.gen_range(0..4096), rng.gen_range(0..4096), rng.gen_range(0..64))
            })
            .collect();
        let logn = (n as f64).log2();
        for alpha in [0.5, 0.25, 0.125] {
            let (g, idx, _) = build_all(pts.clone(), 1, alpha);
            let b = idx.block() as f64;
            for _ in 0..16 {
                let (a, bb) = (rng.gen_range(0..4096u64), rng.gen_range(0..4096u64));
                let q = RectQuery::new(a.min(bb), a.max(bb), 0, 4095);
                let mut w = Work::new();
                idx.majority(&g, &q, &mut w);
                // Per decomposition node: O(log) lists of <= 1/alpha
                // entries plus < 2b boundary elements.
                let bound = 4.0 * ((1.0 / alpha) * logn * logn + b * logn);
                assert!(
                    (w.candidates as f64) <= bound,
                    "alpha {alpha}: {} candidates > {bound}",
                    w.candidates
                );
            }
        }
    }

    #[test]
    fn list_space_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa150_13);
        let n = 2048u64;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(rng.gen_range(0..8192), rng.gen_range(0..8192), rng.gen_range(0..256))
            })
            .collect();
        for alpha in [0.5, 0.25, 0.125] {
            let (_, idx, _) = build_all(pts.clone(), 1, alpha);
            let m = 256f64;
            let logn = (n as f64).log2();
            let b = idx.block() as f64;
            // Lists: one level of blocks per wavelet level, doubled by
            // the block tree, 1/alpha entries of log2 m bits each.
            let bound = (4.0 * n as f64 * logn / b) * (1.0 / alpha) * m.log2()
                + 8.0 * n as f64;
            assert!(
                (idx.candidate_list_bits() as f64) <= bound,
                "alpha {alpha}: {} list bits > {bound}",
                idx.candidate_list_bits()
            );
        }
    }
}
