//! Exact simulation of relational event sequences whose endogenous effects
//! decay continuously with transpired time.
//!
//! Dyad `(i, j)` has intensity `exp(β0 + Σ_p s_p(i, j, t))` where `s_p` is
//! the decay-weighted statistic of effect `p` (see
//! [`compute_continuous_stats`](crate::stats::compute_continuous_stats)).
//! Events are drawn by Ogata thinning. Between events every statistic can
//! only shrink when decays are nonincreasing, so the current total rate
//! dominates; for non-monotone stepwise decays and for the closure kinds
//! (whose inner window widens as time passes) the bound uses the running
//! maximum of the decay and the widest reachable inner window instead.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decay::{DecayError, DecayFn};
use crate::events::{Event, EventError, EventSequence, RiskSet};
use crate::rng::{self, purpose};
use crate::stats::{check_inputs, StatisticKind, StatsError, WeightedAccumulator, Weighting};

/// One endogenous effect of the generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub kind: StatisticKind,
    pub decay: DecayFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop after this many events.
    Events(usize),
    /// Stop at the first proposal past this time.
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_actors: usize,
    pub beta0: f64,
    pub effects: Vec<Effect>,
    /// Events older than this carry no weight.
    pub horizon: f64,
    pub stop: StopRule,
    pub seed: u64,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("need at least 2 actors, got {0}")]
    TooFewActors(usize),
    #[error("baseline log-rate must be finite, got {0}")]
    Beta0(f64),
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("invalid stop rule: {0}")]
    Stop(&'static str),
    #[error("decay for {kind}: {source}")]
    Decay {
        kind: StatisticKind,
        #[source]
        source: DecayError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("total rate vanished at t = {time}; the process stalls")]
    Stalled { time: f64 },
    #[error("the process explodes at t = {time} (total rate {rate})")]
    Explosive { time: f64, rate: f64 },
    #[error(transparent)]
    Events(#[from] EventError),
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_actors < 2 {
            return Err(SimError::TooFewActors(self.n_actors));
        }
        if !self.beta0.is_finite() {
            return Err(SimError::Beta0(self.beta0));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Horizon(self.horizon));
        }
        match self.stop {
            StopRule::Events(0) => return Err(SimError::Stop("event count must be positive")),
            StopRule::Time(t) if !(t.is_finite() && t > self.t0) => {
                return Err(SimError::Stop("end time must be finite and after t0"))
            }
            _ => {}
        }
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            return Err(SimError::Stop("t0 must be finite and nonnegative"));
        }
        check_inputs(self.n_actors, self.n_actors, self.effects.iter().map(|e| e.kind))?;
        for e in &self.effects {
            e.decay.validate().map_err(|source| SimError::Decay {
                kind: e.kind,
                source,
            })?;
        }
        Ok(())
    }

    pub fn effect_pairs(&self) -> Vec<(StatisticKind, DecayFn)> {
        self.effects
            .iter()
            .map(|e| (e.kind, e.decay.clone()))
            .collect()
    }
}

/// Draw one sequence; deterministic in `cfg.seed`.
pub fn simulate(cfg: &SimConfig) -> Result<EventSequence, SimError> {
    cfg.validate()?;
    let n = cfg.n_actors;
    let rs = RiskSet::new(n)?;
    let dyads: Vec<(usize, usize)> = rs
        .dyads()
        .iter()
        .map(|&(s, r)| (s as usize, r as usize))
        .collect();
    let p = cfg.effects.len();
    let mut acc = WeightedAccumulator::new(n, &cfg.effect_pairs(), cfg.horizon);
    let mut rng = rng::stream(cfg.seed, purpose::SIMULATION, 0);
    let mut stats = vec![0.0; dyads.len() * p];
    let mut rates = vec![0.0; dyads.len()];
    let mut events = Vec::new();

    let total_rate = |stats: &[f64], rates: &mut [f64], time: f64| -> Result<f64, SimError> {
        let mut total = 0.0;
        for (d, r) in rates.iter_mut().enumerate() {
            let s: f64 = stats[d * p..(d + 1) * p].iter().sum();
            *r = libm::exp(cfg.beta0 + s);
            total += *r;
        }
        if !total.is_finite() {
            return Err(SimError::Explosive { time, rate: total });
        }
        Ok(total)
    };

    let mut t = cfg.t0;
    loop {
        if let StopRule::Events(target) = cfg.stop {
            if events.len() >= target {
                break;
            }
        }
        acc.evaluate(t, &dyads, Weighting::Bound, &mut stats)?;
        let bound = total_rate(&stats, &mut rates, t)?;
        if !(bound > 0.0) {
            return Err(SimError::Stalled { time: t });
        }
        let proposal = t + rng::standard_exponential(&mut rng) / bound;
        if let StopRule::Time(end) = cfg.stop {
            if proposal > end {
                break;
            }
        }
        if proposal <= t {
            // gap below floating-point resolution at this time scale
            return Err(SimError::Explosive { time: t, rate: bound });
        }
        t = proposal;
        acc.evaluate(t, &dyads, Weighting::Exact, &mut stats)?;
        let total = total_rate(&stats, &mut rates, t)?;
        debug_assert!(total <= bound * (1.0 + 1e-9), "thinning bound violated");
        if rng::uniform(&mut rng) * bound > total {
            continue;
        }
        let target = rng::uniform(&mut rng) * total;
        let mut cum = 0.0;
        let mut pick = dyads.len() - 1;
        for (d, &r) in rates.iter().enumerate() {
            cum += r;
            if target < cum {
                pick = d;
                break;
            }
        }
        let (s, r) = dyads[pick];
        let e = Event::new(s as u32, r as u32, t);
        acc.push(e);
        events.push(e);
    }
    Ok(EventSequence::new(events, n, cfg.t0)?)
}
