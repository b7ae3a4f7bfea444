//! Serializing the full static index to a versioned, checksummed container
//! and loading it back.
//!
//! Run with: `cargo run --example save_and_load`

use wtgrid::container::StaticIndex;
use wtgrid::grid::{Point, RectQuery};
use wtgrid::work::Work;

fn main() {
    let points = vec![
        Point::new(10, 30, 5),
        Point::new(25, 12, 2),
        Point::new(40, 5, 7),
        Point::new(60, 20, 2),
    ];
    // t=1, ell=2, and a fixed-threshold majority section for alpha=0.25.
    let idx = StaticIndex::build(points, 1, 2, Some(0.25), None, None).unwrap();

    let bytes = idx.save();
    println!("container: {} bytes, n={}", bytes.len(), idx.params.n);

    // Builds are byte-deterministic: same points + flags, same bytes.
    assert_eq!(bytes, idx.save());

    let loaded = StaticIndex::load(&bytes).unwrap();
    let q = RectQuery::full(loaded.params.universe);
    let mut work = Work::new();
    println!("count after reload: {}", loaded.grid.count(&q));
    println!(
        "quantile k=3 after reload: {:?}",
        loaded.values.quantile(&loaded.grid, &q, 3, &mut work).unwrap()
    );

    // Every section is covered by a 64-bit checksum; corruption is refused.
    let mut bad = bytes.clone();
    *bad.last_mut().unwrap() ^= 0x40;
    match StaticIndex::load(&bad) {
        Err(e) => println!("corrupted container rejected: {e}"),
        Ok(_) => unreachable!("corruption must not load"),
    }
}
