//! Endogenous network statistics evaluated on the event-time grid.
//!
//! Row `m` of a [`StatTensor`] holds, for every risk-set dyad, the statistics
//! computed from events strictly before `t_m`. Columns are the intercept
//! followed by one block per statistic kind: `K` interval columns for the
//! stepwise form, or a single weighted column for the continuous form.

mod history;
mod stepwise;
mod weighted;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use history::DyadHistory;
pub use stepwise::compute_stepwise_stats;
pub(crate) use weighted::{WeightedAccumulator, Weighting};
pub use weighted::compute_continuous_stats;

/// First- and second-order endogenous statistics for a directed dyad `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Past `(i, j)` events.
    Inertia,
    /// Past `(j, i)` events.
    Reciprocity,
    /// Past events received by `i`.
    IndegreeSender,
    /// Past events sent by `i`.
    OutdegreeSender,
    /// Past events received by `j`.
    IndegreeReceiver,
    /// Past events sent by `j`.
    OutdegreeReceiver,
    /// Time-ordered two-paths `i → l → j`.
    TransitivityClosure,
    /// Time-ordered two-paths `j → l → i`.
    CyclicClosure,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 8] = [
        Self::Inertia,
        Self::Reciprocity,
        Self::IndegreeSender,
        Self::OutdegreeSender,
        Self::IndegreeReceiver,
        Self::OutdegreeReceiver,
        Self::TransitivityClosure,
        Self::CyclicClosure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Inertia => "inertia",
            Self::Reciprocity => "reciprocity",
            Self::IndegreeSender => "indegree_sender",
            Self::OutdegreeSender => "outdegree_sender",
            Self::IndegreeReceiver => "indegree_receiver",
            Self::OutdegreeReceiver => "outdegree_receiver",
            Self::TransitivityClosure => "transitivity_closure",
            Self::CyclicClosure => "cyclic_closure",
        }
    }

    pub fn is_triadic(self) -> bool {
        matches!(self, Self::TransitivityClosure | Self::CyclicClosure)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown statistic kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for StatisticKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("risk set has {risk_set} actors but the sequence has {sequence}")]
    ActorMismatch { risk_set: usize, sequence: usize },
    #[error("statistic kind {0} listed more than once")]
    DuplicateKind(StatisticKind),
    #[error("decay for {kind} is {value} at transpired time {gamma}; weights must be nonnegative")]
    NegativeDecay {
        kind: StatisticKind,
        gamma: f64,
        value: f64,
    },
    #[error("horizon must be positive, got {0}")]
    Horizon(f64),
}

pub(crate) fn check_inputs(
    n_sequence: usize,
    n_risk: usize,
    kinds: impl IntoIterator<Item = StatisticKind>,
) -> Result<(), StatsError> {
    if n_sequence != n_risk {
        return Err(StatsError::ActorMismatch {
            risk_set: n_risk,
            sequence: n_sequence,
        });
    }
    let mut seen: Vec<StatisticKind> = Vec::new();
    for k in kinds {
        if seen.contains(&k) {
            return Err(StatsError::DuplicateKind(k));
        }
        seen.push(k);
    }
    Ok(())
}

/// Dense design array indexed `[event m][dyad d][column p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTensor {
    n_events: usize,
    n_dyads: usize,
    n_cols: usize,
    values: Vec<f64>,
    labels: Vec<String>,
}

impl StatTensor {
    pub fn new(n_events: usize, n_dyads: usize, labels: Vec<String>, values: Vec<f64>) -> Self {
        let n_cols = labels.len();
        assert_eq!(values.len(), n_events * n_dyads * n_cols, "tensor shape");
        Self {
            n_events,
            n_dyads,
            n_cols,
            values,
            labels,
        }
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    pub fn n_dyads(&self) -> usize {
        self.n_dyads
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, m: usize, d: usize, p: usize) -> f64 {
        self.values[(m * self.n_dyads + d) * self.n_cols + p]
    }

    /// All dyads' statistics at event `m`, dyad-major.
    pub fn row(&self, m: usize) -> &[f64] {
        let w = self.n_dyads * self.n_cols;
        &self.values[m * w..(m + 1) * w]
    }

    pub fn dyad(&self, m: usize, d: usize) -> &[f64] {
        let start = (m * self.n_dyads + d) * self.n_cols;
        &self.values[start..start + self.n_cols]
    }

    /// Append a column computed from existing entries (used to build
    /// degenerate designs in tests and diagnostics).
    pub fn with_extra_column(&self, label: &str, f: impl Fn(usize, usize) -> f64) -> Self {
        let n_cols = self.n_cols + 1;
        let mut values = Vec::with_capacity(self.n_events * self.n_dyads * n_cols);
        for m in 0..self.n_events {
            for d in 0..self.n_dyads {
                values.extend_from_slice(self.dyad(m, d));
                values.push(f(m, d));
            }
        }
        let mut labels = self.labels.clone();
        labels.push(label.into());
        Self::new(self.n_events, self.n_dyads, labels, values)
    }
}

pub const INTERCEPT_LABEL: &str = "intercept";

/// Column label for interval `k` (zero-based) of `kind`, e.g. `inertia_k2`.
pub fn interval_label(kind: StatisticKind, k: usize) -> String {
    format!("{}_k{}", kind.name(), k + 1)
}

/// Labels for the intercept plus `kinds × n_intervals` stepwise columns.
pub fn stepwise_labels(kinds: &[StatisticKind], n_intervals: usize) -> Vec<String> {
    let mut labels = Vec::with_capacity(1 + kinds.len() * n_intervals);
    labels.push(INTERCEPT_LABEL.into());
    for &kind in kinds {
        for k in 0..n_intervals {
            labels.push(interval_label(kind, k));
        }
    }
    labels
}

/// Column index of interval `k` of the `kind_index`-th kind.
pub fn stepwise_column(kind_index: usize, k: usize, n_intervals: usize) -> usize {
    1 + kind_index * n_intervals + k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_roundtrip() {
        for k in StatisticKind::ALL {
            assert_eq!(k.name().parse::<StatisticKind>().unwrap(), k);
        }
        assert!("reciprocal".parse::<StatisticKind>().is_err());
    }

    #[test]
    fn labels_layout() {
        let labels = stepwise_labels(&[StatisticKind::Inertia, StatisticKind::Reciprocity], 2);
        assert_eq!(
            labels,
            ["intercept", "inertia_k1", "inertia_k2", "reciprocity_k1", "reciprocity_k2"]
        );
        assert_eq!(stepwise_column(1, 0, 2), 3);
    }
}
