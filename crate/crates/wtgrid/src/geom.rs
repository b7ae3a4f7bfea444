//! Geometric staircase queries on the rank grid: dominance maxima and
//! four-direction corner visibility.
//!
//! Both are a single wavelet-tree traversal over the y-decomposition with
//! a moving x bound: each reported point tightens the bound, and the
//! tightened bound is carried back up the recursion (one select per level)
//! before descending into the next sibling.

use crate::grid::{Point, RankGrid, RectQuery};
use crate::wavelet::{NodeRef, WaveletTree};
use crate::work::Work;

/// One corner direction for visibility queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    SouthWest,
    NorthEast,
    NorthWest,
    SouthEast,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::SouthWest,
        Corner::NorthEast,
        Corner::NorthWest,
        Corner::SouthEast,
    ];
}

impl std::str::FromStr for Corner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sw" | "southwest" => Ok(Corner::SouthWest),
            "ne" | "northeast" => Ok(Corner::NorthEast),
            "nw" | "northwest" => Ok(Corner::NorthWest),
            "se" | "southeast" => Ok(Corner::SouthEast),
            other => Err(format!("unknown direction `{other}` (sw, ne, nw, se)")),
        }
    }
}

/// Maximal points of `Q` under rank-space dominance, in descending y-rank
/// order (north-west to south-east). Bumps `work.nodes`.
pub fn dominance(grid: &RankGrid, q: &RectQuery, work: &mut Work) -> Vec<Point> {
    dominance_rank(grid, q, work)
        .into_iter()
        .map(|(rx, ry)| grid.to_universe(rx, ry))
        .collect()
}

/// Dominance maxima as `(x_rank, y_rank)` pairs, descending y-rank.
pub fn dominance_rank(grid: &RankGrid, q: &RectQuery, work: &mut Work) -> Vec<(u64, u64)> {
    let Some(rr) = grid.map_rect(q) else { return Vec::new() };
    let mut st = Staircase {
        wt: grid.wavelet(),
        y0: rr.y0,
        y1: rr.y1,
        ascending: false,
        upper: false,
        out: Vec::new(),
        work,
    };
    let mut path = Vec::new();
    st.dfs(&st.wt.root(), rr.x0 as i64 - 1, rr.x1 as i64, &mut path);
    st.out
}

/// Points visible from the corner `(qx, qy)` looking towards `dir`: members
/// of the corner quadrant whose closed rectangle against the corner holds
/// no other point. Universe-coordinate semantics; duplicates at one
/// coordinate pair occlude each other. Sorted by `(x, y, w)`.
/// Bumps `work.nodes` (traversal) and `work.candidates` (verifications).
pub fn visibility(
    grid: &RankGrid,
    qx: u64,
    qy: u64,
    dir: Corner,
    work: &mut Work,
) -> Vec<Point> {
    if grid.is_empty() {
        return Vec::new();
    }
    let hi = grid.universe() - 1;
    let (quad, ascending, upper) = match dir {
        Corner::SouthWest => (RectQuery::new(0, qx, 0, qy), false, false),
        Corner::NorthEast => (RectQuery::new(qx, hi, qy, hi), true, true),
        Corner::NorthWest => (RectQuery::new(0, qx, qy, hi), true, false),
        Corner::SouthEast => (RectQuery::new(qx, hi, 0, qy), false, true),
    };
    let Some(rr) = grid.map_rect(&quad) else { return Vec::new() };
    let mut st = Staircase {
        wt: grid.wavelet(),
        y0: rr.y0,
        y1: rr.y1,
        ascending,
        upper,
        out: Vec::new(),
        work,
    };
    let mut path = Vec::new();
    st.dfs(&st.wt.root(), rr.x0 as i64 - 1, rr.x1 as i64, &mut path);
    let candidates = std::mem::take(&mut st.out);
    let mut out: Vec<Point> = Vec::with_capacity(candidates.len());
    for (rx, ry) in candidates {
        work.candidates += 1;
        let p = grid.to_universe(rx, ry);
        let (vx0, vx1) = if p.x <= qx { (p.x, qx) } else { (qx, p.x) };
        let (vy0, vy1) = if p.y <= qy { (p.y, qy) } else { (qy, p.y) };
        if grid.count(&RectQuery::new(vx0, vx1, vy0, vy1)) == 1 {
            out.push(p);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Shared traversal: visits the symbols of `[y0, y1]` in `ascending` (or
/// descending) order while one end of the x interval `(a, b]` tightens
/// after every report. `upper` selects which end moves.
struct Staircase<'a, 'w> {
    wt: &'a WaveletTree,
    y0: u64,
    y1: u64,
    ascending: bool,
    upper: bool,
    /// Reported `(x_rank, y_rank)` in visit order.
    out: Vec<(u64, u64)>,
    work: &'w mut Work,
}

impl Staircase<'_, '_> {
    /// Returns the local position (in `node`) of the last reported element
    /// of this subtree, which encodes the tightened bound for the caller.
    fn dfs(
        &mut self,
        node: &NodeRef,
        mut a: i64,
        mut b: i64,
        path: &mut Vec<(NodeRef, bool)>,
    ) -> Option<u64> {
        if b <= a || node.sym_hi < self.y0 || node.sym_lo > self.y1 {
            return None;
        }
        self.work.nodes += 1;
        if node.is_leaf_of(self.wt) {
            // A leaf holds one y-rank, hence at most one element; a
            // non-empty interval pins it at local position `b`.
            let pos = b as u64;
            let rx = self.wt.unreduce_path(path, pos);
            self.out.push((rx, node.symbol()));
            return Some(pos);
        }
        let order = if self.ascending { [false, true] } else { [true, false] };
        let mut last: Option<u64> = None;
        for bit in order {
            let a_c = self.wt.reduce_step(node, bit, a);
            let b_c = self.wt.reduce_step(node, bit, b);
            path.push((*node, bit));
            let reported = self.dfs(&self.wt.child(node, bit), a_c, b_c, path);
            path.pop();
            if let Some(pos_child) = reported {
                let pos = self.wt.unreduce_step(node, bit, pos_child);
                if self.upper {
                    b = pos as i64 - 1;
                } else {
                    a = pos as i64;
                }
                last = Some(pos);
            }
        }
        last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WeightedPointSet;
    use crate::oracle::Oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build(pts: Vec<Point>) -> (RankGrid, Oracle) {
        let grid = RankGrid::build(&WeightedPointSet::from_points(pts.clone()));
        (grid, Oracle::new(pts))
    }

    #[test]
    fn dominance_toy() {
        let (g, o) = build(vec![
            Point::new(10, 30, 5),
            Point::new(25, 12, 2),
            Point::new(40, 5, 7),
            Point::new(60, 20, 2),
        ]);
        let full = RectQuery::new(0, 100, 0, 100);
        let mut w = Work::new();
        assert_eq!(dominance(&g, &full, &mut w), o.dominance(&full));
        assert_eq!(
            dominance(&g, &RectQuery::new(0, 40, 0, 40), &mut w),
            vec![Point::new(10, 30, 5), Point::new(25, 12, 2), Point::new(40, 5, 7)]
        );
        assert!(dominance(&g, &RectQuery::new(41, 59, 0, 63), &mut w).is_empty());
    }

    #[test]
    fn visibility_toy() {
        let (g, o) = build(vec![
            Point::new(2, 2, 0),
            Point::new(5, 5, 1),
            Point::new(3, 7, 2),
            Point::new(8, 1, 3),
        ]);
        let mut w = Work::new();
        for dir in Corner::ALL {
            for &(qx, qy) in &[(10u64, 10u64), (0, 0), (4, 6), (8, 1)] {
                assert_eq!(
                    visibility(&g, qx, qy, dir, &mut w),
                    o.visibility(qx, qy, dir),
                    "dir {dir:?} corner ({qx}, {qy})"
                );
            }
        }
    }

    #[test]
    fn random_against_oracle_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e03_77);
        for round in 0..60 {
            let n = rng.gen_range(1..=120);
            // Small coordinate range forces duplicate rows, columns and points.
            let span = if round % 2 == 0 { 16 } else { 1 << 12 };
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    Point::new(rng.gen_range(0..span), rng.gen_range(0..span), rng.gen_range(0..8))
                })
                .collect();
            let (g, o) = build(pts);
            let mut w = Work::new();
            for _ in 0..6 {
                let (x0, x1) = (rng.gen_range(0..span), rng.gen_range(0..span));
                let (y0, y1) = (rng.gen_range(0..span), rng.gen_range(0..span));
                let q = RectQuery::new(x0.min(x1), x0.max(x1), y0.min(y1), y0.max(y1));
                assert_eq!(dominance(&g, &q, &mut w), o.dominance(&q));
                let (qx, qy) = (rng.gen_range(0..span), rng.gen_range(0..span));
                for dir in Corner::ALL {
                    assert_eq!(
                        visibility(&g, qx, qy, dir, &mut w),
                        o.visibility(qx, qy, dir),
                        "dir {dir:?} corner ({qx}, {qy})"
                    );
                }
            }
        }
    }

    #[test]
    fn traversal_work_is_polylogarithmic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e03_78);
        let n = 4096u64;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(rng.gen_range(0..1 << 16), rng.gen_range(0..1 << 16), rng.gen_range(0..64))
            })
            .collect();
        let (g, _) = build(pts);
        let log_n = (n as f64).log2();
        for _ in 0..40 {
            let q = RectQuery::new(0, rng.gen_range(0..1 << 16), 0, rng.gen_range(0..1 << 16));
            let mut w = Work::new();
            let d = dominance(&g, &q, &mut w).len() as f64;
            assert!(
                (w.nodes as f64) <= 4.0 * (d + 1.0) * log_n * log_n,
                "nodes {} for {d} maxima",
                w.nodes
            );
        }
    }
}
