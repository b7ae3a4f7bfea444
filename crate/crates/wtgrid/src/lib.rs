//! Succinct two-dimensional range analytics.
//!
//! Indexes `n` weighted points with enriched wavelet trees and answers
//! rectangle queries (count, report, dominance, visibility, sum, average,
//! variance, min/max, top-k, quantile, majorities, successor/predecessor,
//! mode) in polylogarithmic time within near-information-theoretic space.
//! Static and dynamic variants are provided, together with brute-force
//! reference implementations used for verification.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod bits;
pub mod container;
pub mod dynamic;
pub mod error;
pub mod geom;
pub mod grid;
pub mod majority;
pub mod oracle;
pub mod rmq;
pub mod sparse;
pub mod stats;
pub mod valuewt;
pub mod wavelet;
pub mod work;

pub use error::{Error, Result};
