//! Sums, averages, variances (exact and numerically stable), and sums under
//! arbitrary commutative groups.
//!
//! Run with: `cargo run --example range_statistics`

use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};
use wtgrid::stats::{
    group_sum, range_avg, range_sum, range_var, range_var_stable, Centering, GroupSums,
    ModAddGroup, SumAugmentation, XorGroup,
};

fn main() {
    let points: Vec<Point> = (0..64)
        .map(|i| Point::new(i * 3 % 97, i * 7 % 97, 1_000_000 + i % 10))
        .collect();
    let ps = WeightedPointSet::from_points(points);
    let (grid, build) = RankGrid::build_full(&ps);
    let t = 2; // sampling parameter: larger t = less space, more probes
    let sums = SumAugmentation::build(&build, grid.weights(), t);

    let q = RectQuery::new(10, 80, 10, 80);
    println!("count  = {}", grid.count(&q));
    println!("sum    = {}", range_sum(&grid, &sums, &q));
    println!("avg    = {}", range_avg(&grid, &sums, &q).unwrap());
    println!("var    = {}", range_var(&grid, &sums, &q).unwrap());

    // The weights above are adversarial for naive E[X^2] - E[X]^2 in f64:
    // huge mean, tiny spread. The stable path centers each band first.
    let naive = range_var(&grid, &sums, &q).unwrap().to_f64();
    let stable = range_var_stable(&grid, &sums, &q, Centering::PerBand).unwrap();
    println!("var (exact rational -> f64) = {naive}");
    println!("var (stable merge)          = {stable}");

    // Group sums: the same traversal works for any commutative group.
    let xor = GroupSums::build(&build, grid.weights(), t, XorGroup);
    let mod7 = GroupSums::build(&build, grid.weights(), t, ModAddGroup { modulus: 7 });
    println!("xor of weights   = {}", group_sum(&grid, &xor, &q));
    println!("sum of weights mod 7 = {}", group_sum(&grid, &mod7, &q));
}
