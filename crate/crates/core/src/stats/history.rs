use alloc::vec;
use alloc::vec::Vec;

use crate::events::Event;

/// Event times per directed dyad, in arrival order.
///
/// Used for the inner search of the triadic statistics, which looks at the
/// whole history regardless of the horizon.
#[derive(Debug, Clone)]
pub(crate) struct DyadHistory {
    n: usize,
    times: Vec<Vec<f64>>,
}

impl DyadHistory {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            times: vec![Vec::new(); n * n],
        }
    }

    pub(crate) fn push(&mut self, e: &Event) {
        self.times[e.sender as usize * self.n + e.receiver as usize].push(e.time);
    }

    /// Number of `(sender, receiver)` events with time in `[lo, hi)`.
    pub(crate) fn count_in(&self, sender: usize, receiver: usize, lo: f64, hi: f64) -> usize {
        let list = &self.times[sender * self.n + receiver];
        let upper = list.partition_point(|&t| t < hi);
        let lower = list[..upper].partition_point(|&t| t < lo);
        upper - lower
    }
}
