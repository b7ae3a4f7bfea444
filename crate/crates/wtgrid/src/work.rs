//! Instrumentation counters for complexity assertions in tests and the
//! verification CLI. Queries accept an optional counter and bump it as
//! they touch structure.

/// Per-query work tally. Which fields a query bumps is documented on the
/// query itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Work {
    /// Wavelet / value-tree nodes visited.
    pub nodes: u64,
    /// Priority-queue operations (top-k queries).
    pub queue_ops: u64,
    /// Quantile probes issued by value-domain drivers (variable-alpha
    /// majority, top-k frequent).
    pub probes: u64,
    /// Candidates checked (majority queries).
    pub candidates: u64,
    /// Grid count invocations inside value-tree descents.
    pub grid_counts: u64,
}

impl Work {
    pub fn new() -> Self {
        Self::default()
    }
}
