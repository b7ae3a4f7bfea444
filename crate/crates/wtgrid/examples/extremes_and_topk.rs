//! Range minimum / maximum with witnesses, and the k smallest or largest
//! weights in a rectangle.
//!
//! Run with: `cargo run --example extremes_and_topk`

use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};
use wtgrid::stats::{range_max, range_min, top_k_largest, top_k_smallest, MinMaxAugmentation};
use wtgrid::work::Work;

fn main() {
    let points = vec![
        Point::new(10, 30, 5),
        Point::new(25, 12, 2),
        Point::new(40, 5, 7),
        Point::new(60, 20, 2),
        Point::new(61, 44, 9),
        Point::new(72, 8, 1),
    ];
    let ps = WeightedPointSet::from_points(points);
    let (grid, build) = RankGrid::build_full(&ps);
    let minmax = MinMaxAugmentation::build(&build, grid.weights(), 1);

    let q = RectQuery::new(0, 65, 0, 45);
    let (lo, lp) = range_min(&grid, &minmax, &q).unwrap();
    let (hi, hp) = range_max(&grid, &minmax, &q).unwrap();
    println!("min weight {lo} at ({}, {})", lp.x, lp.y);
    println!("max weight {hi} at ({}, {})", hp.x, hp.y);

    let mut work = Work::new();
    println!("3 cheapest:");
    for (w, p) in top_k_smallest(&grid, &minmax, &q, 3, &mut work) {
        println!("  weight {w} at ({}, {})", p.x, p.y);
    }
    println!("3 dearest:");
    for (w, p) in top_k_largest(&grid, &minmax, &q, 3, &mut work) {
        println!("  weight {w} at ({}, {})", p.x, p.y);
    }
    println!("priority-queue operations: {}", work.queue_ops);

    // Empty windows simply yield `None` / empty lists.
    assert!(range_min(&grid, &minmax, &RectQuery::new(90, 99, 90, 99)).is_none());
}
