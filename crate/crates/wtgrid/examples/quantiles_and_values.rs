//! Value-domain queries: quantiles, value-range counting, and
//! successor/predecessor over the weights inside a rectangle.
//!
//! Run with: `cargo run --example quantiles_and_values`

use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};
use wtgrid::valuewt::ValueWaveletTree;
use wtgrid::work::Work;

fn main() {
    let points = vec![
        Point::new(10, 30, 5),
        Point::new(25, 12, 2),
        Point::new(40, 5, 7),
        Point::new(60, 20, 2),
    ];
    let grid = RankGrid::build(&WeightedPointSet::from_points(points));
    // ell is the fan-out of the sampled value tree: larger ell trades a
    // shallower tree (fewer levels of space) for wider scans per level.
    let values = ValueWaveletTree::build(&grid, 2);
    let mut work = Work::new();

    let q = RectQuery::full(grid.universe());
    // Weights inside q, sorted: [2, 2, 5, 7].
    for k in 1..=4 {
        let (v, freq) = values.quantile(&grid, &q, k, &mut work).unwrap();
        println!("k={k}: value {v} (occurs {freq}x)");
    }
    println!("grid-count invocations so far: {}", work.grid_counts);

    println!(
        "points with weight in [2, 5]: {}",
        values.count_value_range(&grid, &q, 2, 5, &mut work)
    );
    println!("successor of 3:   {:?}", values.successor(&grid, &q, 3, &mut work));
    println!("predecessor of 6: {:?}", values.predecessor(&grid, &q, 6, &mut work));
    println!("successor of 8:   {:?}", values.successor(&grid, &q, 8, &mut work));

    // Quantiles are per-rectangle: restrict to x <= 30 and the multiset
    // becomes [2, 5].
    let left = RectQuery::new(0, 30, 0, 99);
    let (v, _) = values.quantile(&grid, &left, 2, &mut work).unwrap();
    println!("2nd smallest weight with x <= 30: {v}");
}
