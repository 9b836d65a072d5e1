//! Transpired-time partitions and the randomized bag of stepwise models.
//!
//! An [`IntervalSpec`] holds the right boundaries `γ_1 < … < γ_K` of the
//! intervals `(γ_{k-1}, γ_k]` (with `γ_0 = 0`). Events whose transpired time
//! exceeds the horizon `γ_K` fall outside every interval.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Increasing,
    Decreasing,
    Equal,
}

impl IntervalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval boundaries are empty")]
    Empty,
    #[error("boundary {index} ({value}) is not positive, finite and above the previous one")]
    NotIncreasing { index: usize, value: f64 },
    #[error("number of steps must be at least 2, got {0}")]
    TooFewSteps(usize),
    #[error("min_size {min_size} must lie in (0, 1/K) for K = {k}")]
    MinSize { min_size: f64, k: usize },
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
}

/// Boundaries of one stepwise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub kind: IntervalKind,
    pub gamma: Vec<f64>,
}

impl IntervalSpec {
    pub fn new(kind: IntervalKind, gamma: Vec<f64>) -> Result<Self, IntervalError> {
        if gamma.is_empty() {
            return Err(IntervalError::Empty);
        }
        let mut prev = 0.0;
        for (index, &value) in gamma.iter().enumerate() {
            if !(value.is_finite() && value > prev) {
                return Err(IntervalError::NotIncreasing { index, value });
            }
            prev = value;
        }
        Ok(Self { kind, gamma })
    }

    /// `k` intervals of equal width ending at `horizon`.
    pub fn equal(k: usize, horizon: f64) -> Result<Self, IntervalError> {
        if k == 0 {
            return Err(IntervalError::Empty);
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(IntervalError::Horizon(horizon));
        }
        let mut gamma: Vec<f64> = (1..=k).map(|i| horizon * i as f64 / k as f64).collect();
        gamma[k - 1] = horizon;
        Self::new(IntervalKind::Equal, gamma)
    }

    /// Single interval `(0, horizon]`.
    pub fn single(horizon: f64) -> Result<Self, IntervalError> {
        Self::equal(1, horizon)
    }

    pub fn k(&self) -> usize {
        self.gamma.len()
    }

    pub fn horizon(&self) -> f64 {
        self.gamma[self.gamma.len() - 1]
    }

    pub fn widths(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.gamma
            .iter()
            .map(|&g| {
                let w = g - prev;
                prev = g;
                w
            })
            .collect()
    }

    /// Zero-based index `k` with `γ ∈ (γ_{k-1}, γ_k]`; `γ = 0` maps to the
    /// first interval and anything past the horizon to `None`.
    pub fn locate(&self, gamma: f64) -> Option<usize> {
        let k = self.gamma.partition_point(|&b| b < gamma);
        (k < self.gamma.len()).then_some(k)
    }
}

/// Free-function form of [`IntervalSpec::locate`].
pub fn locate_interval(spec: &IntervalSpec, gamma: f64) -> Option<usize> {
    spec.locate(gamma)
}

/// Parameters of the interval bag generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagConfig {
    pub k_values: Vec<usize>,
    /// Number of increasing-width (and, separately, decreasing-width) specs per K.
    pub per_kind_count: usize,
    /// Minimum width as a fraction of the horizon, checked on the simplex draw.
    pub min_size: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl Default for BagConfig {
    fn default() -> Self {
        Self {
            k_values: alloc::vec![3, 4, 5],
            per_kind_count: 250,
            min_size: 0.05,
            horizon: 180.0,
            seed: 0,
        }
    }
}

impl BagConfig {
    pub fn validate(&self) -> Result<(), IntervalError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(IntervalError::Horizon(self.horizon));
        }
        for &k in &self.k_values {
            if k < 2 {
                return Err(IntervalError::TooFewSteps(k));
            }
            if !(self.min_size > 0.0 && self.min_size * (k as f64) < 1.0) {
                return Err(IntervalError::MinSize {
                    min_size: self.min_size,
                    k,
                });
            }
        }
        Ok(())
    }

    pub fn bag_size(&self) -> usize {
        self.k_values.len() * (2 * self.per_kind_count + 1)
    }
}

/// Generate the bag: for each K, `per_kind_count` increasing-width specs,
/// `per_kind_count` decreasing-width specs, then one equal-width spec.
///
/// Each K draws from its own seed stream, so adding a K value does not
/// perturb the specs generated for the others.
pub fn generate_interval_bag(cfg: &BagConfig) -> Result<Vec<IntervalSpec>, IntervalError> {
    cfg.validate()?;
    let mut bag = Vec::with_capacity(cfg.bag_size());
    for (idx, &k) in cfg.k_values.iter().enumerate() {
        let mut rng = rng::stream(cfg.seed, purpose::INTERVALS, idx as u64);
        let mut xi = alloc::vec![0.0; k];
        for kind in [IntervalKind::Increasing, IntervalKind::Decreasing] {
            for _ in 0..cfg.per_kind_count {
                loop {
                    rng::flat_dirichlet(&mut rng, &mut xi);
                    xi.sort_by(f64::total_cmp);
                    if xi[0] >= cfg.min_size {
                        break;
                    }
                }
                if kind == IntervalKind::Decreasing {
                    xi.reverse();
                }
                bag.push(spec_from_simplex(kind, &xi, cfg.horizon));
            }
        }
        bag.push(IntervalSpec::equal(k, cfg.horizon)?);
    }
    Ok(bag)
}

fn spec_from_simplex(kind: IntervalKind, xi: &[f64], horizon: f64) -> IntervalSpec {
    let mut acc = 0.0;
    let mut gamma: Vec<f64> = xi
        .iter()
        .map(|&x| {
            acc += x;
            acc * horizon
        })
        .collect();
    let last = gamma.len() - 1;
    gamma[last] = horizon;
    IntervalSpec { kind, gamma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn equal_partition() {
        let spec = IntervalSpec::equal(4, 180.0).unwrap();
        assert_eq!(spec.gamma, vec![45.0, 90.0, 135.0, 180.0]);
        assert_eq!(spec.widths(), vec![45.0; 4]);
    }

    #[test]
    fn locate_is_right_closed() {
        let spec = IntervalSpec::equal(4, 180.0).unwrap();
        assert_eq!(spec.locate(0.0), Some(0));
        assert_eq!(spec.locate(45.0), Some(0));
        assert_eq!(spec.locate(45.0001), Some(1));
        assert_eq!(spec.locate(180.0), Some(3));
        assert_eq!(spec.locate(181.0), None);
    }

    #[test]
    fn rejects_bad_boundaries() {
        assert!(IntervalSpec::new(IntervalKind::Equal, vec![]).is_err());
        assert!(IntervalSpec::new(IntervalKind::Equal, vec![2.0, 2.0]).is_err());
        assert!(IntervalSpec::new(IntervalKind::Equal, vec![0.0, 2.0]).is_err());
    }

    #[test]
    fn bag_size_matches_recipe() {
        let cfg = BagConfig {
            k_values: vec![3, 4, 5],
            per_kind_count: 250,
            min_size: 0.05,
            horizon: 180.0,
            seed: 11,
        };
        let bag = generate_interval_bag(&cfg).unwrap();
        assert_eq!(bag.len(), 1503);
        assert_eq!(cfg.bag_size(), 1503);
        assert!(bag.iter().all(|s| s.horizon() == 180.0));
        let equal = bag.iter().filter(|s| s.kind == IntervalKind::Equal).count();
        assert_eq!(equal, 3);
    }

    #[test]
    fn min_size_checked_up_front() {
        let cfg = BagConfig {
            k_values: vec![4],
            min_size: 0.25,
            ..BagConfig::default()
        };
        assert!(matches!(
            generate_interval_bag(&cfg),
            Err(IntervalError::MinSize { k: 4, .. })
        ));
        let cfg = BagConfig {
            k_values: vec![1],
            ..BagConfig::default()
        };
        assert!(matches!(
            generate_interval_bag(&cfg),
            Err(IntervalError::TooFewSteps(1))
        ));
    }
}
