//! Frequency queries: variable-threshold majorities, the fixed-threshold
//! index, mode, and top-k most frequent weights.
//!
//! Run with: `cargo run --example majorities_and_modes`

use wtgrid::grid::{Point, RankGrid, RectQuery, WeightedPointSet};
use wtgrid::majority::FixedMajorityIndex;
use wtgrid::valuewt::ValueWaveletTree;
use wtgrid::work::Work;

fn main() {
    // Weights: 2 appears twice out of four points in the full window.
    let points = vec![
        Point::new(10, 30, 5),
        Point::new(25, 12, 2),
        Point::new(40, 5, 7),
        Point::new(60, 20, 2),
    ];
    let ps = WeightedPointSet::from_points(points);
    let (grid, build) = RankGrid::build_full(&ps);
    let values = ValueWaveletTree::build(&grid, 2);
    let mut work = Work::new();
    let q = RectQuery::full(grid.universe());

    // Variable threshold, chosen at query time. Strictly more than
    // alpha * count occurrences are required, so 2/4 passes alpha = 0.4
    // but not alpha = 0.5.
    for alpha in [0.4, 0.5] {
        let out = values.majority_alpha(&grid, &q, alpha, &mut work);
        println!("alpha={alpha}: {out:?}");
    }
    println!("probes spent: {}", work.probes);

    // Fixed threshold, baked in at build time: candidates are precomputed
    // per aligned block, so queries only verify a short list.
    let fixed = FixedMajorityIndex::build(&grid, &build, 1, 0.4);
    println!("fixed alpha=0.4: {:?}", fixed.majority(&grid, &q, &mut work));
    println!("candidates verified: {}", work.candidates);

    println!("mode: {:?}", values.mode(&grid, &q, &mut work));
    println!("top-2 frequent: {:?}", values.top_k_frequent(&grid, &q, 2, &mut work));
}
