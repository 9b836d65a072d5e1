//! Relational event models with interval-partitioned memory statistics.
//!
//! The crate covers the full estimation path for learning how the influence
//! of past interactions decays with transpired time:
//!
//! * [`events`]: validated event sequences and the dyadic risk set.
//! * [`intervals`]: interval boundary sequences and the randomized bag generator.
//! * [`stats`]: stepwise and continuously weighted endogenous statistics.
//! * [`likelihood`]: the point-process log-likelihood and Newton MLE.
//! * [`decay`]: parametric decay shapes used as ground truth.
//! * [`simulate`]: exact thinning simulation of decaying-memory processes.
//! * [`bma`]: BIC/WAIC model weights, posterior sampling and trend extraction.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, the command
//! line front-end and parallel orchestration live in the `remdecay` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bma;
pub mod decay;
pub mod events;
pub mod intervals;
pub mod likelihood;
pub mod linalg;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use bma::{
    bic_weights, extract_trend, sample_posterior, waic_weights, ModelBag, PosteriorDraws,
    PosteriorTrend, WaicConfig, WeightingKind,
};
pub use decay::DecayFn;
pub use events::{ActorId, Event, EventSequence, RiskSet};
pub use intervals::{generate_interval_bag, BagConfig, IntervalKind, IntervalSpec};
pub use likelihood::{fit_mle, Design, FitOptions, ModelFit};
pub use simulate::{simulate, SimConfig, StopRule};
pub use stats::{compute_continuous_stats, compute_stepwise_stats, StatTensor, StatisticKind};
