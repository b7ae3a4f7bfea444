//! The dynamic variant: insertions, deletions, and in-place weight updates
//! with every query family still available.
//!
//! Run with: `cargo run --example dynamic_updates`

use wtgrid::dynamic::DynamicIndex;
use wtgrid::geom::Corner;
use wtgrid::grid::{Point, RectQuery};

fn main() {
    // universe 128, weight bound 64, t and ell as in the static build.
    let mut idx = DynamicIndex::new(128, 64, 1, 2);

    for (x, y, w) in [(10, 30, 5), (25, 12, 2), (40, 5, 7), (60, 20, 2), (61, 44, 9)] {
        idx.insert(Point::new(x, y, w)).unwrap();
    }
    let q = RectQuery::full(128);
    println!("count={} sum={}", idx.count(&q), idx.sum(&q));
    println!("median (k=3): {:?}", idx.quantile(&q, 3).unwrap());

    idx.delete(40, 5).unwrap();
    println!("after delete: count={} sum={}", idx.count(&q), idx.sum(&q));

    idx.update(60, 20, 50).unwrap(); // re-weight an existing point
    println!("max after update: {:?}", idx.max(&q));

    println!("majority alpha=0.4: {:?}", idx.majority_alpha(&q, 0.4));
    println!("successor of 6: {:?}", idx.successor(&q, 6));
    for p in idx.dominance(&q) {
        println!("dominant: ({}, {})", p.x, p.y);
    }
    println!("visible NE of (20, 20): {:?}", idx.visibility(20, 20, Corner::NorthEast));

    // Structural work per update stays polylogarithmic in the universe.
    idx.insert(Point::new(99, 99, 1)).unwrap();
    println!("tree nodes touched by last insert: {}", idx.last_touched());
}
