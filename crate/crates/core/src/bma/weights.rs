use alloc::vec;
use alloc::vec::Vec;

use super::BmaError;
use crate::likelihood::ModelFit;

/// `exp(x_i - max x) / Σ_j exp(x_j - max x)`; `-∞` entries get weight 0.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![0.0; scores.len()];
    }
    let mut w: Vec<f64> = scores.iter().map(|&s| libm::exp(s - max)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn weights_from(
    fits: &[ModelFit],
    score: impl Fn(usize, &ModelFit) -> Result<f64, BmaError>,
) -> Result<Vec<f64>, BmaError> {
    if fits.is_empty() {
        return Err(BmaError::EmptyBag);
    }
    let scores = fits
        .iter()
        .enumerate()
        .map(|(q, f)| {
            if f.converged {
                score(q, f)
            } else {
                Ok(f64::NEG_INFINITY)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(BmaError::NoConvergedModels);
    }
    Ok(softmax(&scores))
}

/// `w_q ∝ exp(-BIC_q / 2)` under a uniform model prior. Non-converged fits
/// are excluded (weight 0) and the rest renormalized.
pub fn bic_weights(fits: &[ModelFit]) -> Result<Vec<f64>, BmaError> {
    weights_from(fits, |_, f| Ok(-0.5 * f.bic))
}

/// `w_q ∝ exp(elpd_q)` from the stored deviance-scale WAIC (`-2 · elpd`).
pub fn weights_from_waic(fits: &[ModelFit]) -> Result<Vec<f64>, BmaError> {
    weights_from(fits, |q, f| f.waic.map(|w| -0.5 * w).ok_or(BmaError::MissingWaic(q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_basics() {
        assert_eq!(softmax(&[3.0]), [1.0]);
        assert_eq!(softmax(&[1.0; 4]), [0.25; 4]);
        let w = softmax(&[-50.0, -51.0]);
        let e = core::f64::consts::E;
        assert!((w[0] - e / (e + 1.0)).abs() < 1e-15);
        assert_eq!(softmax(&[f64::NEG_INFINITY, 0.0]), [0.0, 1.0]);
    }
}
