use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{covariance_factor, weights_from_waic, BmaError};
use crate::likelihood::{Design, ModelFit};
use crate::linalg;
use crate::rng::{self, purpose};

/// Settings of the predictive WAIC computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaicConfig {
    /// Events used only as conditioning history (`L`).
    pub burn_in: usize,
    /// Events predicted jointly at each point (`A`).
    pub steps_ahead: usize,
    /// Normal draws per model (`B`).
    pub draws: usize,
    pub seed: u64,
}

impl WaicConfig {
    /// `L = max(100, ⌈M/10⌉)`, `A = 1`, `B = 500`.
    pub fn default_for(n_events: usize, seed: u64) -> Self {
        Self {
            burn_in: 100.max(n_events.div_ceil(10)),
            steps_ahead: 1,
            draws: 500,
            seed,
        }
    }

    pub fn validate(&self, n_events: usize) -> Result<(), BmaError> {
        let bad = |msg: String| Err(BmaError::WaicConfig(msg));
        if self.steps_ahead < 1 {
            return bad("steps_ahead must be at least 1".into());
        }
        if self.draws < 2 {
            return bad(format!("need at least 2 draws for a variance, got {}", self.draws));
        }
        if self.burn_in < 1 || self.burn_in + self.steps_ahead >= n_events {
            return bad(format!(
                "burn_in must satisfy 1 <= L < M - A (L = {}, A = {}, M = {n_events})",
                self.burn_in, self.steps_ahead
            ));
        }
        Ok(())
    }

    /// Number of prediction points `i = L..=M-A`.
    pub fn n_points(&self, n_events: usize) -> usize {
        n_events - self.steps_ahead - self.burn_in + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicResult {
    pub lpd: f64,
    pub p_waic: f64,
    pub elpd: f64,
    /// `-2 · elpd`.
    pub waic: f64,
    pub warnings: Vec<String>,
}

/// WAIC from explicit coefficient draws.
///
/// Point `i` (for `i = L..=M-A`) is the log density of events
/// `i+1..=i+A` (one-based) given the history up to event `i`: the sum of
/// those events' log-likelihood terms, each already conditioned on the
/// realized history through the precomputed statistics.
pub fn waic_from_draws(
    design: &Design<'_>,
    draws: &[Vec<f64>],
    cfg: &WaicConfig,
) -> Result<WaicResult, BmaError> {
    let m_total = design.n_events();
    cfg.validate(m_total)?;
    if draws.len() < 2 {
        return Err(BmaError::WaicConfig("need at least 2 draws".into()));
    }
    let a = cfg.steps_ahead;
    let n_points = cfg.n_points(m_total);
    let b = draws.len();

    // terms[b][r]: log-likelihood term of event row r = L + j for draw b
    let first = cfg.burn_in;
    let mut eta = vec![0.0; design.stats().n_dyads()];
    let mut terms = vec![0.0; b * (m_total - first)];
    // rows outer so each compressed row stays in cache across draws
    for r in first..m_total {
        for (k, beta) in draws.iter().enumerate() {
            let v = design.event_term(r, beta, &mut eta);
            if !v.is_finite() {
                return Err(BmaError::Likelihood {
                    model: 0,
                    source: crate::likelihood::LikelihoodError::NonFinite { m: r },
                });
            }
            terms[k * (m_total - first) + (r - first)] = v;
        }
    }

    let mut lpd = 0.0;
    let mut p_waic = 0.0;
    let mut logp = vec![0.0; b];
    for j in 0..n_points {
        for (k, slot) in logp.iter_mut().enumerate() {
            let row = &terms[k * (m_total - first)..(k + 1) * (m_total - first)];
            *slot = row[j..j + a].iter().sum();
        }
        let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean_exp = logp.iter().map(|&x| libm::exp(x - max)).sum::<f64>() / b as f64;
        lpd += max + libm::log(mean_exp);
        let mean = logp.iter().sum::<f64>() / b as f64;
        p_waic += logp.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1) as f64;
    }
    let elpd = lpd - p_waic;
    Ok(WaicResult {
        lpd,
        p_waic,
        elpd,
        waic: -2.0 * elpd,
        warnings: Vec::new(),
    })
}

/// `cfg.draws` normal draws around a fit, from the stream for `model_index`.
pub fn normal_draws(
    fit: &ModelFit,
    n: usize,
    seed: u64,
    model_index: usize,
) -> Result<(Vec<Vec<f64>>, bool), BmaError> {
    let (l, jittered) = covariance_factor(fit, model_index)?;
    let p = fit.n_params;
    let mut rng = rng::stream(seed, purpose::WAIC_DRAWS, model_index as u64);
    let mut z = vec![0.0; p];
    let draws = (0..n)
        .map(|_| {
            z.iter_mut().for_each(|x| *x = rng::standard_normal(&mut rng));
            let shift = linalg::lower_mul(&l, p, &z);
            fit.beta.iter().zip(shift).map(|(b, s)| b + s).collect()
        })
        .collect();
    Ok((draws, jittered))
}

/// WAIC of one model with draws from the seed stream of `model_index`.
/// Two identical fits given the same index produce identical results.
pub fn model_waic(
    design: &Design<'_>,
    fit: &ModelFit,
    cfg: &WaicConfig,
    model_index: usize,
) -> Result<WaicResult, BmaError> {
    cfg.validate(design.n_events())?;
    let (draws, jittered) = normal_draws(fit, cfg.draws, cfg.seed, model_index)?;
    let mut res = waic_from_draws(design, &draws, cfg).map_err(|e| match e {
        BmaError::Likelihood { source, .. } => BmaError::Likelihood {
            model: model_index,
            source,
        },
        other => other,
    })?;
    if jittered {
        res.warnings.push(format!(
            "covariance not positive semidefinite; draws use ridge {:e}",
            crate::likelihood::RETRY_RIDGE
        ));
    }
    Ok(res)
}

/// Compute and store WAIC for every converged fit, then return
/// `softmax(elpd)` weights.
pub fn waic_weights(
    designs: &[Design<'_>],
    fits: &mut [ModelFit],
    cfg: &WaicConfig,
) -> Result<Vec<f64>, BmaError> {
    if designs.len() != fits.len() {
        return Err(BmaError::WeightCount {
            got: designs.len(),
            expected: fits.len(),
        });
    }
    for (q, (design, fit)) in designs.iter().zip(fits.iter_mut()).enumerate() {
        if fit.converged {
            let res = model_waic(design, fit, cfg, q)?;
            fit.waic = Some(res.waic);
            fit.warnings.extend(res.warnings);
        }
    }
    weights_from_waic(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_event_count() {
        assert_eq!(WaicConfig::default_for(500, 0).burn_in, 100);
        assert_eq!(WaicConfig::default_for(2001, 0).burn_in, 201);
        let cfg = WaicConfig::default_for(12, 0);
        assert!(cfg.validate(12).is_err());
        let ok = WaicConfig {
            burn_in: 5,
            steps_ahead: 1,
            draws: 3,
            seed: 0,
        };
        assert!(ok.validate(12).is_ok());
        assert_eq!(ok.n_points(12), 7);
    }
}
