//! Brute-force recounts and random instances shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use remdecay_core::decay::DecayFn;
use remdecay_core::events::{Event, EventSequence, RiskSet};
use remdecay_core::intervals::{IntervalKind, IntervalSpec};
use remdecay_core::stats::StatisticKind;

/// Interval index of `gamma` found by scanning the boundaries.
fn interval_of(gamma: &[f64], g: f64) -> Option<usize> {
    let mut prev = f64::NEG_INFINITY;
    for (k, &b) in gamma.iter().enumerate() {
        if g > prev && g <= b {
            return Some(k);
        }
        prev = b;
    }
    None
}

/// Weight given by `w(kind, transpired_time)` for every qualifying past
/// event, recomputed from scratch for one `(m, i, j)`.
pub fn rescan(
    events: &[Event],
    m: usize,
    i: u32,
    j: u32,
    kind: StatisticKind,
    mut w: impl FnMut(f64) -> f64,
) -> f64 {
    let tm = events[m].time;
    let past = &events[..m];
    let mut total = 0.0;
    for e in past {
        let g = tm - e.time;
        let hit = match kind {
            StatisticKind::Inertia => e.sender == i && e.receiver == j,
            StatisticKind::Reciprocity => e.sender == j && e.receiver == i,
            StatisticKind::IndegreeSender => e.receiver == i,
            StatisticKind::OutdegreeSender => e.sender == i,
            StatisticKind::IndegreeReceiver => e.receiver == j,
            StatisticKind::OutdegreeReceiver => e.sender == j,
            StatisticKind::TransitivityClosure | StatisticKind::CyclicClosure => false,
        };
        if hit {
            total += w(g);
            continue;
        }
        // outer event (l, j) for transitivity, (l, i) for cyclic closure
        let (target, first_sender) = match kind {
            StatisticKind::TransitivityClosure => (j, i),
            StatisticKind::CyclicClosure => (i, j),
            _ => continue,
        };
        let l = e.sender;
        if e.receiver != target || l == i || l == j {
            continue;
        }
        let lo = e.time - g;
        let inner = past
            .iter()
            .filter(|x| x.sender == first_sender && x.receiver == l && x.time >= lo && x.time < e.time)
            .count();
        if inner > 0 {
            total += inner as f64 * w(g);
        }
    }
    total
}

/// Interval count for one `(m, dyad, kind, k)`.
pub fn stepwise_count(events: &[Event], m: usize, i: u32, j: u32, kind: StatisticKind, spec: &IntervalSpec, k: usize) -> f64 {
    rescan(events, m, i, j, kind, |g| {
        if interval_of(&spec.gamma, g) == Some(k) {
            1.0
        } else {
            0.0
        }
    })
}

/// Decay-weighted value for one `(m, dyad, kind)`.
pub fn weighted_value(events: &[Event], m: usize, i: u32, j: u32, kind: StatisticKind, decay: &DecayFn, horizon: f64) -> f64 {
    rescan(events, m, i, j, kind, |g| if g <= horizon { decay.eval(g) } else { 0.0 })
}

/// Random sequence with integer-ish gaps so that boundary coincidences occur.
pub fn random_sequence(rng: &mut SmallRng, n: usize, m: usize) -> EventSequence {
    let mut t = 0.0;
    let events = (0..m)
        .map(|_| {
            t += if rng.random_bool(0.3) {
                rng.random_range(1..4) as f64
            } else {
                rng.random_range(0.01..3.0)
            };
            let s = rng.random_range(0..n as u32);
            let mut r = rng.random_range(0..n as u32 - 1);
            if r >= s {
                r += 1;
            }
            Event::new(s, r, t)
        })
        .collect();
    EventSequence::new(events, n, 0.0).unwrap()
}

/// Random boundaries, sometimes integers to hit the right-closed edge.
pub fn random_spec(rng: &mut SmallRng, max_k: usize, horizon: f64) -> IntervalSpec {
    let k = rng.random_range(1..=max_k);
    let mut cuts: Vec<f64> = (0..k - 1)
        .map(|_| {
            if rng.random_bool(0.5) {
                rng.random_range(1..horizon as u32) as f64
            } else {
                rng.random_range(0.1..horizon)
            }
        })
        .collect();
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    IntervalSpec::new(IntervalKind::Equal, cuts).unwrap()
}

pub fn rng(seed: u64) -> SmallRng {
    SmallRng::seed_from_u64(seed)
}

pub fn risk_set(n: usize) -> RiskSet {
    RiskSet::new(n).unwrap()
}
