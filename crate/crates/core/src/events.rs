//! Relational event sequences and the dyadic risk set.
//!
//! Actors are dense integer ids `0..n_actors`. Loading from external files
//! (and keeping the original labels) is handled by the `remdecay` crate; this
//! module only enforces the structural invariants the estimators rely on.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense actor index.
pub type ActorId = u32;

/// One directed, timestamped interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub sender: ActorId,
    pub receiver: ActorId,
    pub time: f64,
}

impl Event {
    pub fn new(sender: ActorId, receiver: ActorId, time: f64) -> Self {
        Self {
            sender,
            receiver,
            time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EventError {
    #[error("event {index}: sender and receiver are both actor {actor}")]
    SelfLoop { index: usize, actor: ActorId },
    #[error("event {index}: time {time} is negative or not finite")]
    InvalidTime { index: usize, time: f64 },
    #[error("event {index}: time {time} is earlier than the previous time {previous}")]
    Unsorted {
        index: usize,
        time: f64,
        previous: f64,
    },
    #[error("event {index}: time {time} ties with the previous event")]
    Tie { index: usize, time: f64 },
    #[error("event {index}: actor {actor} is outside 0..{n_actors}")]
    UnknownActor {
        index: usize,
        actor: ActorId,
        n_actors: usize,
    },
    #[error("start time {t0} is after the first event time {first}")]
    StartAfterFirst { t0: f64, first: f64 },
    #[error("spreading {count} tied events at {time} with unit {unit} reaches the next timestamp {next}")]
    SpreadOverlap {
        time: f64,
        count: usize,
        unit: f64,
        next: f64,
    },
    #[error("time unit must be positive and finite, got {0}")]
    InvalidUnit(f64),
    #[error("at least two actors are required, got {0}")]
    TooFewActors(usize),
    #[error("dyad order is not a permutation of the full risk set")]
    InvalidDyadOrder,
}

/// A time-ordered relational event history.
///
/// Times are strictly increasing, every actor id is below `n_actors`, and
/// `t0` (the origin of the first survival interval) is not after the first
/// event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    events: Vec<Event>,
    n_actors: usize,
    t0: f64,
}

impl EventSequence {
    pub fn new(events: Vec<Event>, n_actors: usize, t0: f64) -> Result<Self, EventError> {
        if n_actors < 2 {
            return Err(EventError::TooFewActors(n_actors));
        }
        if !t0.is_finite() {
            return Err(EventError::InvalidTime { index: 0, time: t0 });
        }
        let mut previous: Option<f64> = None;
        for (index, e) in events.iter().enumerate() {
            validate_event(index, e, n_actors)?;
            if let Some(p) = previous {
                if e.time < p {
                    return Err(EventError::Unsorted {
                        index,
                        time: e.time,
                        previous: p,
                    });
                }
                if e.time == p {
                    return Err(EventError::Tie {
                        index,
                        time: e.time,
                    });
                }
            }
            previous = Some(e.time);
        }
        if let Some(first) = events.first() {
            if t0 > first.time {
                return Err(EventError::StartAfterFirst {
                    t0,
                    first: first.time,
                });
            }
        }
        Ok(Self {
            events,
            n_actors,
            t0,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Time of the last event, or `t0` for an empty sequence.
    pub fn end_time(&self) -> f64 {
        self.events.last().map_or(self.t0, |e| e.time)
    }

    /// Inter-event gaps `t_m - t_{m-1}` with `t_{-1} = t0`.
    pub fn gaps(&self) -> Vec<f64> {
        let mut prev = self.t0;
        self.events
            .iter()
            .map(|e| {
                let dt = e.time - prev;
                prev = e.time;
                dt
            })
            .collect()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

fn validate_event(index: usize, e: &Event, n_actors: usize) -> Result<(), EventError> {
    if !(e.time.is_finite() && e.time >= 0.0) {
        return Err(EventError::InvalidTime {
            index,
            time: e.time,
        });
    }
    if e.sender == e.receiver {
        return Err(EventError::SelfLoop {
            index,
            actor: e.sender,
        });
    }
    for actor in [e.sender, e.receiver] {
        if actor as usize >= n_actors {
            return Err(EventError::UnknownActor {
                index,
                actor,
                n_actors,
            });
        }
    }
    Ok(())
}

/// Resolve tied timestamps by spreading each block evenly across one time unit.
///
/// A block of `n >= 2` events sharing time `d` is moved to
/// `d + k * unit / (n + 1)` for `k = 1..=n`, keeping input order. Singleton
/// timestamps are left untouched. Input must be nondecreasing in time.
pub fn spread_ties(mut events: Vec<Event>, unit: f64) -> Result<Vec<Event>, EventError> {
    if !(unit.is_finite() && unit > 0.0) {
        return Err(EventError::InvalidUnit(unit));
    }
    for index in 1..events.len() {
        if events[index].time < events[index - 1].time {
            return Err(EventError::Unsorted {
                index,
                time: events[index].time,
                previous: events[index - 1].time,
            });
        }
    }

    let mut start = 0;
    while start < events.len() {
        let day = events[start].time;
        let mut end = start + 1;
        while end < events.len() && events[end].time == day {
            end += 1;
        }
        let count = end - start;
        if count > 1 {
            let slots = (count + 1) as f64;
            for (k, e) in events[start..end].iter_mut().enumerate() {
                e.time = day + (k + 1) as f64 * unit / slots;
            }
            if let Some(next) = events.get(end).map(|e| e.time) {
                if events[end - 1].time >= next {
                    return Err(EventError::SpreadOverlap {
                        time: day,
                        count,
                        unit,
                        next,
                    });
                }
            }
        }
        if start > 0 && events[start].time <= events[start - 1].time {
            // a spread block ran into this (singleton or block) timestamp
            return Err(EventError::SpreadOverlap {
                time: events[start - 1].time,
                count,
                unit,
                next: day,
            });
        }
        start = end;
    }
    Ok(events)
}

/// All ordered sender/receiver pairs without self-loops, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskSet {
    n_actors: usize,
    dyads: Vec<(ActorId, ActorId)>,
}

impl RiskSet {
    pub fn new(n_actors: usize) -> Result<Self, EventError> {
        if n_actors < 2 {
            return Err(EventError::TooFewActors(n_actors));
        }
        let mut dyads = Vec::with_capacity(n_actors * (n_actors - 1));
        for s in 0..n_actors as ActorId {
            for r in 0..n_actors as ActorId {
                if s != r {
                    dyads.push((s, r));
                }
            }
        }
        Ok(Self { n_actors, dyads })
    }

    /// A risk set over the same actors with a caller-supplied dyad order.
    ///
    /// The order must be a permutation of the lexicographic one; this exists
    /// so estimators can be checked for invariance under reordering.
    pub fn with_order(n_actors: usize, dyads: Vec<(ActorId, ActorId)>) -> Result<Self, EventError> {
        let canonical = Self::new(n_actors)?;
        let mut sorted = dyads.clone();
        sorted.sort_unstable();
        if sorted != canonical.dyads {
            return Err(EventError::InvalidDyadOrder);
        }
        Ok(Self { n_actors, dyads })
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    pub fn len(&self) -> usize {
        self.dyads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dyads.is_empty()
    }

    pub fn dyads(&self) -> &[(ActorId, ActorId)] {
        &self.dyads
    }

    /// Position of `(sender, receiver)` in this risk set.
    pub fn index_of(&self, sender: ActorId, receiver: ActorId) -> Option<usize> {
        let n = self.n_actors as ActorId;
        if sender == receiver || sender >= n || receiver >= n {
            return None;
        }
        let lex = sender as usize * (self.n_actors - 1)
            + if receiver < sender {
                receiver as usize
            } else {
                receiver as usize - 1
            };
        if self.dyads[lex] == (sender, receiver) {
            Some(lex)
        } else {
            self.dyads.iter().position(|&d| d == (sender, receiver))
        }
    }
}

/// Build the full risk set for `n_actors` actors.
pub fn build_risk_set(n_actors: usize) -> Result<RiskSet, EventError> {
    RiskSet::new(n_actors)
}
