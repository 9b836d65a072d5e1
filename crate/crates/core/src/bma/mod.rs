//! Bayesian model averaging over a bag of fitted stepwise models.
//!
//! Each fit is approximated by `N(β̂_q, Σ̂_q)`. Models are weighted either by
//! BIC or by WAIC, draws from the mixture are generated by first choosing a
//! model, and the decay trend is read off the draws on a grid of transpired
//! times.

mod sample;
mod trend;
mod waic;
mod weights;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::likelihood::{LikelihoodError, ModelFit};
use crate::linalg::{self, LinalgError};

pub use sample::{sample_posterior, PosteriorDraws};
pub use trend::{
    extract_trend, hpd_interval, kde_mode, silverman_bandwidth, summarize, EffectTrend,
    PosteriorTrend, Summary,
};
pub use waic::{model_waic, normal_draws, waic_from_draws, waic_weights, WaicConfig, WaicResult};
pub use weights::{bic_weights, softmax, weights_from_waic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingKind {
    Bic,
    Waic,
}

impl WeightingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bic => "bic",
            Self::Waic => "waic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BmaError {
    #[error("the model bag is empty")]
    EmptyBag,
    #[error("no converged model in the bag")]
    NoConvergedModels,
    #[error("model {0} has no WAIC value")]
    MissingWaic(usize),
    #[error("invalid WAIC settings: {0}")]
    WaicConfig(String),
    #[error("{got} weights for {expected} models")]
    WeightCount { got: usize, expected: usize },
    #[error("weights must be nonnegative and sum to 1")]
    InvalidWeights,
    #[error("grid size must be at least 2, got {0}")]
    GridSize(usize),
    #[error("HPD level must lie in (0, 1), got {0}")]
    Level(f64),
    #[error("only {n} draws available at gamma = {gamma}; need at least 10")]
    TooFewDraws { gamma: f64, n: usize },
    #[error("model {model}: {source}")]
    Likelihood {
        model: usize,
        #[source]
        source: LikelihoodError,
    },
    #[error("model {model}: covariance cannot be factored: {source}")]
    Covariance {
        model: usize,
        #[source]
        source: LinalgError,
    },
}

/// Fitted models with their averaging weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBag {
    pub fits: Vec<ModelFit>,
    pub weights: Vec<f64>,
    pub weighting: WeightingKind,
}

impl ModelBag {
    /// Weight `fits` by the stored BIC or WAIC values. Non-converged fits
    /// get weight 0.
    pub fn new(fits: Vec<ModelFit>, weighting: WeightingKind) -> Result<Self, BmaError> {
        let weights = match weighting {
            WeightingKind::Bic => bic_weights(&fits)?,
            WeightingKind::Waic => weights_from_waic(&fits)?,
        };
        Ok(Self {
            fits,
            weights,
            weighting,
        })
    }

    /// Bag with caller-supplied weights (checked to lie on the simplex).
    pub fn with_weights(
        fits: Vec<ModelFit>,
        weights: Vec<f64>,
        weighting: WeightingKind,
    ) -> Result<Self, BmaError> {
        if weights.len() != fits.len() {
            return Err(BmaError::WeightCount {
                got: weights.len(),
                expected: fits.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(BmaError::InvalidWeights);
        }
        Ok(Self {
            fits,
            weights,
            weighting,
        })
    }

    pub fn len(&self) -> usize {
        self.fits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fits.is_empty()
    }
}

/// Lower factor of a fit's covariance for normal sampling, with the ridge
/// retry used for the information matrix when the covariance is indefinite.
/// Returns whether the retry was needed.
pub(crate) fn covariance_factor(fit: &ModelFit, model: usize) -> Result<(Vec<f64>, bool), BmaError> {
    let p = fit.n_params;
    match linalg::psd_factor(&fit.cov, p) {
        Ok(l) => Ok((l, false)),
        Err(_) => {
            let mut jittered = fit.cov.clone();
            linalg::add_diagonal(&mut jittered, p, crate::likelihood::RETRY_RIDGE);
            linalg::psd_factor(&jittered, p)
                .map(|l| (l, true))
                .map_err(|source| BmaError::Covariance { model, source })
        }
    }
}
