//! Brute-force reference implementations for every query family.
//!
//! Each answer is produced by a direct scan over the point list, with tie
//! rules identical to the indexed structures (rank assignment shared via
//! [`crate::grid::rank_coordinates`]). Everything here is O(n) or O(n^2)
//! per query and exists solely for cross-checking.

use crate::geom::Corner;
use crate::grid::{rank_coordinates, Point, RectQuery};

#[derive(Debug, Clone)]
pub struct Oracle {
    points: Vec<Point>,
    /// `(x_rank, y_rank)` per input point, same tie rules as the grid.
    ranks: Vec<(u64, u64)>,
}

impl Oracle {
    pub fn new(points: Vec<Point>) -> Self {
        let ranks = rank_coordinates(&points);
        Oracle { points, ranks }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn in_rect(p: &Point, q: &RectQuery) -> bool {
        q.x0 <= p.x && p.x <= q.x1 && q.y0 <= p.y && p.y <= q.y1
    }

    /// Indices of points inside `q`.
    fn members(&self, q: &RectQuery) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| Self::in_rect(&self.points[i], q)).collect()
    }

    /// Weights of points inside `q`, unsorted.
    pub fn weights_in(&self, q: &RectQuery) -> Vec<u64> {
        self.members(q).into_iter().map(|i| self.points[i].w).collect()
    }

    pub fn count(&self, q: &RectQuery) -> u64 {
        self.members(q).len() as u64
    }

    /// Points of `q` in descending y-rank order.
    pub fn report(&self, q: &RectQuery) -> Vec<Point> {
        let mut idx = self.members(q);
        idx.sort_by_key(|&i| std::cmp::Reverse(self.ranks[i].1));
        idx.into_iter().map(|i| self.points[i]).collect()
    }

    /// Maximal points of `q` under rank-space dominance (no other member
    /// has both ranks at least as large), in descending y-rank order.
    pub fn dominance(&self, q: &RectQuery) -> Vec<Point> {
        let members = self.members(q);
        let mut keep: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| {
                !members.iter().any(|&j| {
                    j != i && self.ranks[j].0 >= self.ranks[i].0 && self.ranks[j].1 >= self.ranks[i].1
                })
            })
            .collect();
        keep.sort_by_key(|&i| std::cmp::Reverse(self.ranks[i].1));
        keep.into_iter().map(|i| self.points[i]).collect()
    }

    /// Points visible from corner `(qx, qy)` towards `dir`: members of the
    /// corner quadrant whose closed rectangle against the corner contains
    /// exactly one point. Returned sorted by `(x, y, w)`; duplicates at the
    /// same coordinates occlude each other and never appear.
    pub fn visibility(&self, qx: u64, qy: u64, dir: Corner) -> Vec<Point> {
        let quadrant = |p: &Point| match dir {
            Corner::SouthWest => p.x <= qx && p.y <= qy,
            Corner::NorthEast => p.x >= qx && p.y >= qy,
            Corner::NorthWest => p.x <= qx && p.y >= qy,
            Corner::SouthEast => p.x >= qx && p.y <= qy,
        };
        let between = |p: &Point, o: &Point| {
            // `o` lies in the closed rectangle spanned by `p` and the corner.
            let x_ok = match dir {
                Corner::SouthWest | Corner::NorthWest => p.x <= o.x && o.x <= qx,
                _ => qx <= o.x && o.x <= p.x,
            };
            let y_ok = match dir {
                Corner::SouthWest | Corner::SouthEast => p.y <= o.y && o.y <= qy,
                _ => qy <= o.y && o.y <= p.y,
            };
            x_ok && y_ok
        };
        let mut out: Vec<Point> = self
            .points
            .iter()
            .filter(|p| {
                quadrant(p)
                    && self.points.iter().filter(|o| quadrant(o) && between(p, o)).count() == 1
            })
            .copied()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn sum(&self, q: &RectQuery) -> u128 {
        self.weights_in(q).iter().map(|&w| w as u128).sum()
    }

    pub fn sum_sq(&self, q: &RectQuery) -> u128 {
        self.weights_in(q).iter().map(|&w| (w as u128) * (w as u128)).sum()
    }

    /// Minimum weight with its witness: the member of minimum weight with
    /// the smallest x-rank.
    pub fn min(&self, q: &RectQuery) -> Option<(u64, Point)> {
        self.extreme(q, false)
    }

    pub fn max(&self, q: &RectQuery) -> Option<(u64, Point)> {
        self.extreme(q, true)
    }

    fn extreme(&self, q: &RectQuery, largest: bool) -> Option<(u64, Point)> {
        let members = self.members(q);
        let best = *members.iter().max_by_key(|&&i| {
            let v = if largest { self.points[i].w as i128 } else { -(self.points[i].w as i128) };
            // Prefer smaller x-rank on equal weight.
            (v, -(self.ranks[i].0 as i128))
        })?;
        Some((self.points[best].w, self.points[best]))
    }

    /// The `k` smallest weights of `q`, ascending, with multiplicity.
    pub fn top_k_smallest(&self, q: &RectQuery, k: usize) -> Vec<u64> {
        let mut ws = self.weights_in(q);
        ws.sort_unstable();
        ws.truncate(k);
        ws
    }

    pub fn top_k_largest(&self, q: &RectQuery, k: usize) -> Vec<u64> {
        let mut ws = self.weights_in(q);
        ws.sort_unstable_by_key(|&w| std::cmp::Reverse(w));
        ws.truncate(k);
        ws
    }

    /// The `k`-th smallest weight (1-based) by sorting.
    pub fn quantile(&self, q: &RectQuery, k: u64) -> Option<u64> {
        if k == 0 {
            return None;
        }
        let mut ws = self.weights_in(q);
        ws.sort_unstable();
        ws.get(k as usize - 1).copied()
    }

    /// Independent quantile strategy: counting passes, no sorting.
    pub fn quantile_by_counting(&self, q: &RectQuery, k: u64) -> Option<u64> {
        let ws = self.weights_in(q);
        if k == 0 || (ws.len() as u64) < k {
            return None;
        }
        let mut candidates: Vec<u64> = ws.clone();
        candidates.sort_unstable();
        candidates.dedup();
        for c in candidates {
            let below_or_eq = ws.iter().filter(|&&w| w <= c).count() as u64;
            if below_or_eq >= k {
                return Some(c);
            }
        }
        unreachable!("k was validated against the member count");
    }

    /// Occurrences of weight `c` inside `q`.
    pub fn count_value(&self, q: &RectQuery, c: u64) -> u64 {
        self.weights_in(q).iter().filter(|&&w| w == c).count() as u64
    }

    /// Members with weight in `[w0, w1]`.
    pub fn count_value_range(&self, q: &RectQuery, w0: u64, w1: u64) -> u64 {
        self.weights_in(q).iter().filter(|&&w| w0 <= w && w <= w1).count() as u64
    }

    /// All `(value, count)` pairs with `count > alpha * |Q|`, value
    /// ascending.
    pub fn majority(&self, q: &RectQuery, alpha: f64) -> Vec<(u64, u64)> {
        let total = self.count(q);
        let mut out: Vec<(u64, u64)> = self
            .frequencies(q)
            .into_iter()
            .filter(|&(_, cnt)| (cnt as f64) > alpha * total as f64)
            .collect();
        out.sort_unstable();
        out
    }

    /// Smallest member weight `>= w` with its leftmost-x-rank witness.
    pub fn successor(&self, q: &RectQuery, w: u64) -> Option<(u64, Point)> {
        self.members(q)
            .into_iter()
            .filter(|&i| self.points[i].w >= w)
            .min_by_key(|&i| (self.points[i].w, self.ranks[i].0))
            .map(|i| (self.points[i].w, self.points[i]))
    }

    /// Largest member weight `<= w` with its leftmost-x-rank witness.
    pub fn predecessor(&self, q: &RectQuery, w: u64) -> Option<(u64, Point)> {
        self.members(q)
            .into_iter()
            .filter(|&i| self.points[i].w <= w)
            .max_by_key(|&i| (self.points[i].w, std::cmp::Reverse(self.ranks[i].0)))
            .map(|i| (self.points[i].w, self.points[i]))
    }

    /// `(value, count)` per distinct member weight, value ascending.
    pub fn frequencies(&self, q: &RectQuery) -> Vec<(u64, u64)> {
        let mut ws = self.weights_in(q);
        ws.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::new();
        for w in ws {
            match out.last_mut() {
                Some((v, c)) if *v == w => *c += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }

    /// The `k` most frequent weights: count descending, value ascending on
    /// ties.
    pub fn top_k_frequent(&self, q: &RectQuery, k: usize) -> Vec<(u64, u64)> {
        let mut freqs = self.frequencies(q);
        freqs.sort_by_key(|&(v, c)| (std::cmp::Reverse(c), v));
        freqs.truncate(k);
        freqs
    }

    /// Most frequent weight, smallest value on ties.
    pub fn mode(&self, q: &RectQuery) -> Option<(u64, u64)> {
        self.top_k_frequent(q, 1).first().copied()
    }
}
