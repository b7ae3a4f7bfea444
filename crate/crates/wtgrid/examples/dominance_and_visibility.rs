//! Dominant (maximal) points of a rectangle and corner visibility.
//!
//! Run with: `cargo run --example dominance_and_visibility`

use wtgrid::geom::{dominance, visibility, Corner};
use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};
use wtgrid::work::Work;

fn main() {
    let points = vec![
        Point::new(5, 50, 1),
        Point::new(20, 40, 1),
        Point::new(35, 45, 1),
        Point::new(50, 30, 1),
        Point::new(65, 10, 1),
        Point::new(80, 25, 1),
        Point::new(30, 20, 1),
        Point::new(70, 40, 1),
    ];
    let grid = RankGrid::build(&WeightedPointSet::from_points(points));
    let mut work = Work::new();

    // The staircase of points not dominated by any other inside the window.
    let q = RectQuery::full(grid.universe());
    println!("dominant points (north-west to south-east):");
    for p in dominance(&grid, &q, &mut work) {
        println!("  ({}, {})", p.x, p.y);
    }
    println!("DFS nodes visited: {}", work.nodes);

    // Points visible from an observer: the closed rectangle spanned by the
    // observer and a visible point contains no third point.
    let (ox, oy) = (45, 35);
    for dir in Corner::ALL {
        let seen = visibility(&grid, ox, oy, dir, &mut work);
        let names: Vec<String> =
            seen.iter().map(|p| format!("({}, {})", p.x, p.y)).collect();
        println!("visible from ({ox}, {oy}) toward {dir:?}: {}", names.join(" "));
    }
}
