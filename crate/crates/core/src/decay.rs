//! Memory decay shapes `β(γ)`: the effect of a past event as a function of
//! the time transpired since it happened.
//!
//! These are value objects. They serve as ground truth for simulation and
//! as weights for continuously weighted statistics; nothing here is fitted.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::IntervalSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error("parameter {name} = {value} must be positive and finite")]
    NonPositive { name: &'static str, value: f64 },
    #[error("stepwise decay has {levels} levels for {intervals} intervals")]
    LevelCount { levels: usize, intervals: usize },
    #[error("stepwise level {index} = {value} is not finite")]
    NonFiniteLevel { index: usize, value: f64 },
    #[error("composite offset {0} must be finite and nonnegative")]
    Offset(f64),
    #[error("half-life is only defined for shape 1, got {0}")]
    ShapeNotOne(f64),
    #[error("half-life needs a Weibull-type decay")]
    NotWeibull,
}

/// `θ3 · exp{-(γ/θ1)^θ2}`: exponential for `θ2 = 1`, a smoothed step at
/// `γ ≈ θ1` for large `θ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullType {
    pub scale: f64,
    pub shape: f64,
    pub max_value: f64,
}

impl WeibullType {
    pub fn new(scale: f64, shape: f64, max_value: f64) -> Result<Self, DecayError> {
        positive("scale", scale)?;
        positive("shape", shape)?;
        positive("max_value", max_value)?;
        Ok(Self {
            scale,
            shape,
            max_value,
        })
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        let z = gamma.max(0.0) / self.scale;
        let p = if self.shape == 1.0 {
            z
        } else {
            libm::pow(z, self.shape)
        };
        self.max_value * libm::exp(-p)
    }

    /// `θ1 ln 2`, the transpired time at which the weight halves.
    pub fn half_life(&self) -> Result<f64, DecayError> {
        if self.shape != 1.0 {
            return Err(DecayError::ShapeNotOne(self.shape));
        }
        Ok(self.scale * core::f64::consts::LN_2)
    }
}

/// One term of a multi-step decay, shifted right by `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedStep {
    pub offset: f64,
    pub step: WeibullType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum DecayFn {
    /// Constant `levels[k]` on interval `k` of `spec`, zero past the horizon.
    Stepwise {
        spec: IntervalSpec,
        levels: Vec<f64>,
    },
    /// `max_value - (max_value / cutoff) γ` below `cutoff`, zero after.
    Linear { cutoff: f64, max_value: f64 },
    WeibullType(WeibullType),
    /// Sum of shifted Weibull-type terms; a term's argument is clamped at zero
    /// before its offset.
    Composite(Vec<ShiftedStep>),
}

fn positive(name: &'static str, value: f64) -> Result<(), DecayError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DecayError::NonPositive { name, value })
    }
}

impl DecayFn {
    pub fn stepwise(spec: IntervalSpec, levels: Vec<f64>) -> Result<Self, DecayError> {
        let f = Self::Stepwise { spec, levels };
        f.validate()?;
        Ok(f)
    }

    pub fn linear(cutoff: f64, max_value: f64) -> Result<Self, DecayError> {
        let f = Self::Linear { cutoff, max_value };
        f.validate()?;
        Ok(f)
    }

    pub fn weibull(scale: f64, shape: f64, max_value: f64) -> Result<Self, DecayError> {
        Ok(Self::WeibullType(WeibullType::new(scale, shape, max_value)?))
    }

    /// `max_value · exp(-γ / scale)`.
    pub fn exponential(scale: f64, max_value: f64) -> Result<Self, DecayError> {
        Self::weibull(scale, 1.0, max_value)
    }

    pub fn validate(&self) -> Result<(), DecayError> {
        match self {
            Self::Stepwise { spec, levels } => {
                if levels.len() != spec.k() {
                    return Err(DecayError::LevelCount {
                        levels: levels.len(),
                        intervals: spec.k(),
                    });
                }
                if let Some((index, &value)) =
                    levels.iter().enumerate().find(|(_, v)| !v.is_finite())
                {
                    return Err(DecayError::NonFiniteLevel { index, value });
                }
                Ok(())
            }
            Self::Linear { cutoff, max_value } => {
                positive("cutoff", *cutoff)?;
                positive("max_value", *max_value)
            }
            Self::WeibullType(w) => WeibullType::new(w.scale, w.shape, w.max_value).map(|_| ()),
            Self::Composite(terms) => {
                for t in terms {
                    if !(t.offset.is_finite() && t.offset >= 0.0) {
                        return Err(DecayError::Offset(t.offset));
                    }
                    WeibullType::new(t.step.scale, t.step.shape, t.step.max_value)?;
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        match self {
            Self::Stepwise { spec, levels } => spec.locate(gamma).map_or(0.0, |k| levels[k]),
            Self::Linear { cutoff, max_value } => {
                if gamma < *cutoff {
                    max_value - (max_value / cutoff) * gamma
                } else {
                    0.0
                }
            }
            Self::WeibullType(w) => w.eval(gamma),
            Self::Composite(terms) => terms.iter().map(|t| t.step.eval(gamma - t.offset)).sum(),
        }
    }

    /// `sup_{γ' ≥ γ} β(γ')`, the tightest constant bound on the weight an
    /// event of age `γ` can carry from now on.
    ///
    /// Equal to [`eval`](Self::eval) for the nonincreasing variants; stepwise
    /// levels need not be monotone, so they take the running maximum.
    pub fn sup_from(&self, gamma: f64) -> f64 {
        match self {
            Self::Stepwise { spec, levels } => match spec.locate(gamma) {
                Some(k) => levels[k..].iter().copied().fold(0.0, f64::max),
                None => 0.0,
            },
            _ => self.eval(gamma),
        }
    }

    /// Largest transpired time with a possibly nonzero weight, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Self::Stepwise { spec, .. } => Some(spec.horizon()),
            Self::Linear { cutoff, .. } => Some(*cutoff),
            _ => None,
        }
    }

    pub fn half_life(&self) -> Result<f64, DecayError> {
        match self {
            Self::WeibullType(w) => w.half_life(),
            _ => Err(DecayError::NotWeibull),
        }
    }
}

/// Half-life of a Weibull-type decay with unit shape.
pub fn half_life(f: &DecayFn) -> Result<f64, DecayError> {
    f.half_life()
}
