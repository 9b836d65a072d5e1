use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{covariance_factor, BmaError, ModelBag};
use crate::linalg;
use crate::rng::{self, purpose};

/// Draws generated per seed stream.
pub const CHUNK: usize = 1024;

/// Mixture draws: model index and coefficient vector per draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub models: Vec<usize>,
    pub betas: Vec<Vec<f64>>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Draw `n_draws` times: pick model `q` with probability `w_q`, then
/// `β ~ N(β̂_q, Σ̂_q)`. Draw `c·CHUNK + k` comes from stream `c`, so the
/// result does not depend on how chunks are scheduled.
pub fn sample_posterior(bag: &ModelBag, n_draws: usize, seed: u64) -> Result<PosteriorDraws, BmaError> {
    if bag.is_empty() {
        return Err(BmaError::EmptyBag);
    }
    if bag.weights.len() != bag.fits.len() {
        return Err(BmaError::WeightCount {
            got: bag.weights.len(),
            expected: bag.fits.len(),
        });
    }
    let mut cum = Vec::with_capacity(bag.weights.len());
    let mut acc = 0.0;
    for &w in &bag.weights {
        acc += w;
        cum.push(acc);
    }
    let last_positive = bag
        .weights
        .iter()
        .rposition(|&w| w > 0.0)
        .ok_or(BmaError::InvalidWeights)?;

    let mut factors: Vec<Option<Vec<f64>>> = vec![None; bag.len()];
    let mut models = Vec::with_capacity(n_draws);
    let mut betas = Vec::with_capacity(n_draws);
    for chunk in 0..n_draws.div_ceil(CHUNK) {
        let mut rng = rng::stream(seed, purpose::POSTERIOR, chunk as u64);
        let count = CHUNK.min(n_draws - chunk * CHUNK);
        for _ in 0..count {
            let u = rng::uniform(&mut rng) * acc;
            let q = cum.partition_point(|&c| c <= u).min(last_positive);
            let fit = &bag.fits[q];
            if factors[q].is_none() {
                factors[q] = Some(covariance_factor(fit, q)?.0);
            }
            let l = factors[q].as_deref().unwrap_or_default();
            let p = fit.n_params;
            let z: Vec<f64> = (0..p).map(|_| rng::standard_normal(&mut rng)).collect();
            let shift = linalg::lower_mul(l, p, &z);
            models.push(q);
            betas.push(fit.beta.iter().zip(shift).map(|(b, s)| b + s).collect());
        }
    }
    Ok(PosteriorDraws { models, betas })
}
