//! Rank-space point grid: coordinate mapping, counting, reporting and
//! space accounting.
//!
//! Points `(x, y, w)` from `[0,U) x [0,U)` are mapped to a permutation of
//! `[0,n) x [0,n)`; ties in `y` are ranked by increasing `x`, ties in `x`
//! by increasing `y`, and remaining ties by input order. The permutation is
//! a wavelet tree over y-ranks in x-rank order; the sorted coordinate maps
//! are sparse bitmaps with a bit at `i + X(i)`.

use crate::error::{Error, Result};
use crate::sparse::SparseBits;
use crate::wavelet::{NodeRef, WaveletBuild, WaveletTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: u64,
    pub y: u64,
    pub w: u64,
}

impl Point {
    pub fn new(x: u64, y: u64, w: u64) -> Self {
        Point { x, y, w }
    }
}

/// Raw input: weighted points over `[0,U) x [0,U)` with weights in `[0,W)`.
#[derive(Debug, Clone, Default)]
pub struct WeightedPointSet {
    pub points: Vec<Point>,
    pub universe: u64,
    pub weight_bound: u64,
}

impl WeightedPointSet {
    pub fn new(points: Vec<Point>, universe: u64, weight_bound: u64) -> Result<Self> {
        for p in &points {
            if p.x >= universe || p.y >= universe {
                return Err(Error::UniverseExceeded { value: p.x.max(p.y), bound: universe });
            }
            if p.w >= weight_bound {
                return Err(Error::UniverseExceeded { value: p.w, bound: weight_bound });
            }
        }
        Ok(WeightedPointSet { points, universe, weight_bound })
    }

    /// Infers `U` and `W` as max + 1.
    pub fn from_points(points: Vec<Point>) -> Self {
        let universe = points.iter().map(|p| p.x.max(p.y)).max().map_or(1, |m| m + 1);
        let weight_bound = points.iter().map(|p| p.w).max().map_or(1, |m| m + 1);
        WeightedPointSet { points, universe, weight_bound }
    }
}

/// Rectangle query in universe coordinates, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RectQuery {
    pub x0: u64,
    pub x1: u64,
    pub y0: u64,
    pub y1: u64,
}

impl RectQuery {
    pub fn new(x0: u64, x1: u64, y0: u64, y1: u64) -> Self {
        RectQuery { x0, x1, y0, y1 }
    }

    pub fn full(universe: u64) -> Self {
        RectQuery { x0: 0, x1: universe.saturating_sub(1), y0: 0, y1: universe.saturating_sub(1) }
    }

    pub fn is_degenerate(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }
}

/// Non-empty rectangle in rank space, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRect {
    pub x0: u64,
    pub x1: u64,
    pub y0: u64,
    pub y1: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RankGrid {
    n: u64,
    universe: u64,
    weight_bound: u64,
    /// y-ranks in x-rank order (a permutation of `[0,n)`).
    wt: WaveletTree,
    xmap: SparseBits,
    ymap: SparseBits,
    /// Weights in x-rank order ("bare values", excluded from index space).
    weights: Vec<u64>,
}

/// Rank assignment shared with the brute-force oracle: returns
/// `(x_rank, y_rank)` per input point.
pub fn rank_coordinates(points: &[Point]) -> Vec<(u64, u64)> {
    let n = points.len();
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by_key(|&i| (points[i].x, points[i].y, i));
    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by_key(|&i| (points[i].y, points[i].x, i));
    let mut out = vec![(0u64, 0u64); n];
    for (r, &i) in by_x.iter().enumerate() {
        out[i].0 = r as u64;
    }
    for (r, &i) in by_y.iter().enumerate() {
        out[i].1 = r as u64;
    }
    out
}

impl RankGrid {
    pub fn build(ps: &WeightedPointSet) -> Self {
        Self::build_full(ps).0
    }

    /// Also returns the wavelet build artifact (per-level element orders)
    /// for payload construction.
    pub fn build_full(ps: &WeightedPointSet) -> (Self, WaveletBuild) {
        let n = ps.points.len() as u64;
        let ranks = rank_coordinates(&ps.points);
        let mut seq = vec![0u64; n as usize];
        let mut weights = vec![0u64; n as usize];
        for (i, p) in ps.points.iter().enumerate() {
            let (rx, ry) = ranks[i];
            seq[rx as usize] = ry;
            weights[rx as usize] = p.w;
        }
        let mut xs: Vec<u64> = ps.points.iter().map(|p| p.x).collect();
        xs.sort_unstable();
        let mut ys: Vec<u64> = ps.points.iter().map(|p| p.y).collect();
        ys.sort_unstable();
        let xpos: Vec<u64> = xs.iter().enumerate().map(|(i, &v)| i as u64 + v).collect();
        let ypos: Vec<u64> = ys.iter().enumerate().map(|(i, &v)| i as u64 + v).collect();
        let build = WaveletTree::build(&seq, n.max(1));
        let grid = RankGrid {
            n,
            universe: ps.universe,
            weight_bound: ps.weight_bound,
            wt: build.tree.clone(),
            xmap: SparseBits::from_positions(&xpos, ps.universe + n),
            ymap: SparseBits::from_positions(&ypos, ps.universe + n),
            weights,
        };
        (grid, build)
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn weight_bound(&self) -> u64 {
        self.weight_bound
    }

    pub fn wavelet(&self) -> &WaveletTree {
        &self.wt
    }

    pub fn weight_at_xrank(&self, rx: u64) -> u64 {
        self.weights[rx as usize]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// The universe x-coordinate of the point with x-rank `i`.
    pub fn x_coord(&self, i: u64) -> u64 {
        self.xmap.position(i) - i
    }

    pub fn y_coord(&self, i: u64) -> u64 {
        self.ymap.position(i) - i
    }

    /// Number of points whose x-coordinate is `< x`.
    pub fn x_count_lt(&self, x: u64) -> u64 {
        coord_count_lt(&self.xmap, self.n, x)
    }

    pub fn y_count_lt(&self, y: u64) -> u64 {
        coord_count_lt(&self.ymap, self.n, y)
    }

    /// x-rank of the point with y-rank `ry` (permutation inverse).
    pub fn xrank_of_yrank(&self, ry: u64) -> u64 {
        self.wt.seq_select(ry, 1).expect("permutation is total") as u64
    }

    pub fn weight_of_yrank(&self, ry: u64) -> u64 {
        self.weights[self.xrank_of_yrank(ry) as usize]
    }

    pub fn point_of_yrank(&self, ry: u64) -> Point {
        self.to_universe(self.xrank_of_yrank(ry), ry)
    }

    /// Universe point for a rank-space pair.
    pub fn to_universe(&self, rx: u64, ry: u64) -> Point {
        Point { x: self.x_coord(rx), y: self.y_coord(ry), w: self.weights[rx as usize] }
    }

    /// Maps a universe rectangle to rank space, inclusively; `None` marks
    /// an empty query.
    pub fn map_rect(&self, q: &RectQuery) -> Option<RankRect> {
        if self.n == 0 || q.is_degenerate() {
            return None;
        }
        let x0 = self.x_count_lt(q.x0);
        let x1 = self.x_count_lt(q.x1.saturating_add(1));
        let y0 = self.y_count_lt(q.y0);
        let y1 = self.y_count_lt(q.y1.saturating_add(1));
        if x0 >= x1 || y0 >= y1 {
            return None;
        }
        Some(RankRect { x0, x1: x1 - 1, y0, y1: y1 - 1 })
    }

    /// `|P ∩ Q|` by summing interval lengths over the y-decomposition.
    pub fn count(&self, q: &RectQuery) -> u64 {
        self.map_rect(q).map_or(0, |rr| self.count_rank(&rr))
    }

    pub fn count_rank(&self, rr: &RankRect) -> u64 {
        if self.n == 0 {
            return 0;
        }
        let cover = self
            .wt
            .decompose_tracked(rr.y0, rr.y1, rr.x0 as i64 - 1, rr.x1 as i64)
            .expect("rank rect is validated");
        cover.iter().map(|(_, a, b)| (b - a) as u64).sum()
    }

    /// All points of `Q` in descending y-rank order, universe coordinates
    /// restored.
    pub fn report(&self, q: &RectQuery) -> Vec<Point> {
        let mut out = Vec::new();
        self.report_rank(q, |rx, _ry| out.push(self.to_universe(rx, _ry)));
        out
    }

    /// Calls `emit(x_rank, y_rank)` per point, descending y-rank.
    pub fn report_rank<F: FnMut(u64, u64)>(&self, q: &RectQuery, mut emit: F) {
        let Some(rr) = self.map_rect(q) else { return };
        let mut path: Vec<(NodeRef, bool)> = Vec::new();
        self.report_dfs(&self.wt.root(), &rr, rr.x0 as i64 - 1, rr.x1 as i64, &mut path, &mut emit);
    }

    fn report_dfs<F: FnMut(u64, u64)>(
        &self,
        node: &NodeRef,
        rr: &RankRect,
        a: i64,
        b: i64,
        path: &mut Vec<(NodeRef, bool)>,
        emit: &mut F,
    ) {
        if b <= a || node.sym_hi < rr.y0 || node.sym_lo > rr.y1 {
            return;
        }
        if node.is_leaf_of(&self.wt) {
            // Descending local position keeps the global order N to S.
            for pos in ((a + 1)..=b).rev() {
                let rx = self.wt.unreduce_path(path, pos as u64);
                emit(rx, node.symbol());
            }
            return;
        }
        for bit in [true, false] {
            let a2 = self.wt.reduce_step(node, bit, a);
            let b2 = self.wt.reduce_step(node, bit, b);
            path.push((*node, bit));
            self.report_dfs(&self.wt.child(node, bit), rr, a2, b2, path, emit);
            path.pop();
        }
    }

    pub fn xmap(&self) -> &SparseBits {
        &self.xmap
    }

    pub fn ymap(&self) -> &SparseBits {
        &self.ymap
    }

    /// Measured and analytic space accounting.
    pub fn space_report(&self) -> GridSpace {
        let n = self.n;
        let u = self.universe;
        let weight_width = crate::wavelet::depth_for(self.weight_bound.max(1)).max(1) as u64;
        GridSpace {
            n,
            universe: u,
            xmap_bits: self.xmap.size_bits(),
            ymap_bits: self.ymap.size_bits(),
            wavelet_bits: self.wt.size_bits(),
            weight_bits: n * weight_width,
            analytic_perm_bits: log2_factorial(n),
            analytic_map_bits: 2.0 * log2_binomial(u + n, n),
            analytic_distinct_bits: log2_binomial(u.saturating_mul(u), n) + 2.0 * n as f64,
        }
    }

    pub(crate) fn parts(
        &self,
    ) -> (u64, u64, u64, &WaveletTree, &SparseBits, &SparseBits, &[u64]) {
        (self.n, self.universe, self.weight_bound, &self.wt, &self.xmap, &self.ymap, &self.weights)
    }

    pub(crate) fn from_parts(
        n: u64,
        universe: u64,
        weight_bound: u64,
        wt: WaveletTree,
        xmap: SparseBits,
        ymap: SparseBits,
        weights: Vec<u64>,
    ) -> Self {
        RankGrid { n, universe, weight_bound, wt, xmap, ymap, weights }
    }
}

fn coord_count_lt(map: &SparseBits, n: u64, x: u64) -> u64 {
    // Binary search the sorted coordinates via select on the map.
    let (mut lo, mut hi) = (0u64, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if map.position(mid) - mid < x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Space accounting record for the static grid, in bits.
#[derive(Debug, Clone, Default)]
pub struct GridSpace {
    pub n: u64,
    pub universe: u64,
    pub xmap_bits: u64,
    pub ymap_bits: u64,
    pub wavelet_bits: u64,
    pub weight_bits: u64,
    /// `log2 n!` — the permutation's information content.
    pub analytic_perm_bits: f64,
    /// `2 log2 C(U+n, n)` — the two coordinate maps.
    pub analytic_map_bits: f64,
    /// `log2 C(U^2, n) + n log2 4` — distinct-point configurations.
    pub analytic_distinct_bits: f64,
}

impl GridSpace {
    pub fn index_total_bits(&self) -> u64 {
        self.xmap_bits + self.ymap_bits + self.wavelet_bits
    }
}

/// `log2(x!)`, exact summation below 10^6, Stirling above.
pub fn log2_factorial(x: u64) -> f64 {
    if x < 2 {
        return 0.0;
    }
    if x <= 1_000_000 {
        (2..=x).map(|i| (i as f64).log2()).sum()
    } else {
        let z = x as f64;
        let ln = (z + 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + 1.0 / (12.0 * z);
        ln / std::f64::consts::LN_2
    }
}

pub fn log2_binomial(a: u64, b: u64) -> f64 {
    if b > a {
        return 0.0;
    }
    log2_factorial(a) - log2_factorial(b) - log2_factorial(a - b)
}
