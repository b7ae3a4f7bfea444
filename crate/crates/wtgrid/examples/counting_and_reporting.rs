//! Range counting and reporting on the rank-space grid.
//!
//! Run with: `cargo run --example counting_and_reporting`

use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};

fn main() {
    // A small store-locations dataset: (x, y) position, w = daily revenue.
    let points = vec![
        Point::new(10, 30, 5),
        Point::new(25, 12, 2),
        Point::new(40, 5, 7),
        Point::new(60, 20, 2),
        Point::new(60, 44, 9),
        Point::new(72, 8, 1),
    ];
    let grid = RankGrid::build(&WeightedPointSet::from_points(points));

    let q = RectQuery::new(20, 65, 0, 25); // x in [20,65], y in [0,25]
    println!("points in {q:?}: {}", grid.count(&q));
    for p in grid.report(&q) {
        println!("  ({}, {}) weight {}", p.x, p.y, p.w);
    }

    // Degenerate rectangles are fine: empty, line, and single-cell queries.
    println!("empty rect count: {}", grid.count(&RectQuery::new(5, 4, 0, 99)));
    println!("column x=60 count: {}", grid.count(&RectQuery::new(60, 60, 0, 99)));
    println!("full count: {}", grid.count(&RectQuery::full(grid.universe())));
}
