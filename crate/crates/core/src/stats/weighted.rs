use alloc::vec;
use alloc::vec::Vec;

use super::{check_inputs, DyadHistory, StatTensor, StatisticKind, StatsError, INTERCEPT_LABEL};
use crate::decay::DecayFn;
use crate::events::{Event, EventSequence, RiskSet};

/// How past events are weighted when the accumulator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weighting {
    /// The decay value at the current transpired time.
    Exact,
    /// An upper bound valid from the evaluation time until the next event:
    /// `sup_from` of each decay, and for the closure kinds the widest inner
    /// window an outer event can reach before leaving the horizon.
    Bound,
}

/// Growing event history that evaluates decay-weighted statistics at any
/// time after its last event. Shared by the continuous tensor builder and
/// the simulator.
#[derive(Debug, Clone)]
pub(crate) struct WeightedAccumulator {
    n: usize,
    effects: Vec<(StatisticKind, DecayFn)>,
    horizon: f64,
    events: Vec<Event>,
    history: DyadHistory,
    // scratch, per kind: pair n*n, indeg n, outdeg n, closure n*n
    pair: Vec<f64>,
    indeg: Vec<f64>,
    outdeg: Vec<f64>,
    closure: Vec<f64>,
}

impl WeightedAccumulator {
    pub(crate) fn new(n: usize, effects: &[(StatisticKind, DecayFn)], horizon: f64) -> Self {
        let p = effects.len();
        Self {
            n,
            effects: effects.to_vec(),
            horizon,
            events: Vec::new(),
            history: DyadHistory::new(n),
            pair: vec![0.0; p * n * n],
            indeg: vec![0.0; p * n],
            outdeg: vec![0.0; p * n],
            closure: vec![0.0; p * n * n],
        }
    }

    pub(crate) fn push(&mut self, e: Event) {
        self.history.push(&e);
        self.events.push(e);
    }

    /// Fill `out` (dyad-major, one value per kind) with the statistics at
    /// time `t`, which must not precede the last pushed event.
    pub(crate) fn evaluate(
        &mut self,
        t: f64,
        dyads: &[(usize, usize)],
        mode: Weighting,
        out: &mut [f64],
    ) -> Result<(), StatsError> {
        let n = self.n;
        let nn = n * n;
        let p = self.effects.len();
        debug_assert_eq!(out.len(), dyads.len() * p);
        self.pair.iter_mut().for_each(|x| *x = 0.0);
        self.indeg.iter_mut().for_each(|x| *x = 0.0);
        self.outdeg.iter_mut().for_each(|x| *x = 0.0);
        self.closure.iter_mut().for_each(|x| *x = 0.0);

        let first = self.events.partition_point(|e| t - e.time > self.horizon);
        for e in &self.events[first..] {
            let gamma = t - e.time;
            let (a, c) = (e.sender as usize, e.receiver as usize);
            for (q, (kind, decay)) in self.effects.iter().enumerate() {
                let w = match mode {
                    Weighting::Exact => decay.eval(gamma),
                    Weighting::Bound => decay.sup_from(gamma),
                };
                if w < 0.0 || w.is_nan() {
                    return Err(StatsError::NegativeDecay {
                        kind: *kind,
                        gamma,
                        value: w,
                    });
                }
                if w == 0.0 {
                    continue;
                }
                if kind.is_triadic() {
                    let lo = match mode {
                        Weighting::Exact => e.time - gamma,
                        Weighting::Bound => e.time - self.horizon,
                    };
                    let block = &mut self.closure[q * nn..(q + 1) * nn];
                    for x in (0..n).filter(|&x| x != a && x != c) {
                        let cnt = self.history.count_in(x, a, lo, e.time);
                        if cnt > 0 {
                            let v = cnt as f64 * w;
                            // x -> a -> c closes (x, c) transitively and (c, x) cyclically
                            match kind {
                                StatisticKind::TransitivityClosure => block[x * n + c] += v,
                                _ => block[c * n + x] += v,
                            }
                        }
                    }
                } else {
                    self.pair[q * nn + a * n + c] += w;
                    self.outdeg[q * n + a] += w;
                    self.indeg[q * n + c] += w;
                }
            }
        }

        for (d, &(i, j)) in dyads.iter().enumerate() {
            for (q, (kind, _)) in self.effects.iter().enumerate() {
                out[d * p + q] = match kind {
                    StatisticKind::Inertia => self.pair[q * nn + i * n + j],
                    StatisticKind::Reciprocity => self.pair[q * nn + j * n + i],
                    StatisticKind::IndegreeSender => self.indeg[q * n + i],
                    StatisticKind::OutdegreeSender => self.outdeg[q * n + i],
                    StatisticKind::IndegreeReceiver => self.indeg[q * n + j],
                    StatisticKind::OutdegreeReceiver => self.outdeg[q * n + j],
                    StatisticKind::TransitivityClosure | StatisticKind::CyclicClosure => {
                        self.closure[q * nn + i * n + j]
                    }
                };
            }
        }
        Ok(())
    }
}

/// Decay-weighted statistics: one column per `(kind, decay)` pair holding the
/// sum of `decay(t_m - t_e)` over the qualifying past events, restricted to
/// events no older than `horizon`.
///
/// The combinatorics match [`compute_stepwise_stats`](super::compute_stepwise_stats)
/// with the interval indicator replaced by the weight, so a decay equal to 1
/// on `[0, horizon]` reproduces the single-interval counts.
pub fn compute_continuous_stats(
    seq: &EventSequence,
    rs: &RiskSet,
    effects: &[(StatisticKind, DecayFn)],
    horizon: f64,
) -> Result<StatTensor, StatsError> {
    check_inputs(seq.n_actors(), rs.n_actors(), effects.iter().map(|(k, _)| *k))?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(StatsError::Horizon(horizon));
    }
    let n_events = seq.len();
    let n_dyads = rs.len();
    let p = effects.len();
    let n_cols = 1 + p;
    let dyads: Vec<(usize, usize)> = rs
        .dyads()
        .iter()
        .map(|&(s, r)| (s as usize, r as usize))
        .collect();

    let mut labels = Vec::with_capacity(n_cols);
    labels.push(INTERCEPT_LABEL.into());
    labels.extend(effects.iter().map(|(k, _)| k.name().into()));

    let mut acc = WeightedAccumulator::new(seq.n_actors(), effects, horizon);
    let mut values = vec![0.0; n_events * n_dyads * n_cols];
    let mut scratch = vec![0.0; n_dyads * p];
    for (m, e) in seq.events().iter().enumerate() {
        acc.evaluate(e.time, &dyads, Weighting::Exact, &mut scratch)?;
        let row = &mut values[m * n_dyads * n_cols..(m + 1) * n_dyads * n_cols];
        for d in 0..n_dyads {
            row[d * n_cols] = 1.0;
            row[d * n_cols + 1..(d + 1) * n_cols].copy_from_slice(&scratch[d * p..(d + 1) * p]);
        }
        acc.push(*e);
    }
    Ok(StatTensor::new(n_events, n_dyads, labels, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::IntervalSpec;
    use crate::stats::compute_stepwise_stats;
    use alloc::vec;

    fn toy() -> (EventSequence, RiskSet) {
        let ev = vec![
            Event::new(0, 1, 1.0),
            Event::new(1, 0, 2.5),
            Event::new(0, 1, 4.0),
            Event::new(2, 0, 6.0),
        ];
        (EventSequence::new(ev, 3, 0.0).unwrap(), RiskSet::new(3).unwrap())
    }

    #[test]
    fn exponential_matches_hand_sum() {
        let (seq, rs) = toy();
        let decay = DecayFn::weibull(10.0, 1.0, 0.3).unwrap();
        let t = compute_continuous_stats(&seq, &rs, &[(StatisticKind::Inertia, decay)], 100.0).unwrap();
        let d01 = rs.index_of(0, 1).unwrap();
        let w = |g: f64| 0.3 * libm::exp(-g / 10.0);
        assert_eq!(t.get(0, d01, 1), 0.0);
        assert!((t.get(3, d01, 1) - (w(5.0) + w(2.0))).abs() < 1e-15);
        assert!((t.get(2, d01, 1) - w(3.0)).abs() < 1e-15);
    }

    #[test]
    fn unit_weights_equal_single_interval_counts() {
        let (seq, rs) = toy();
        let one = DecayFn::stepwise(IntervalSpec::single(3.0).unwrap(), vec![1.0]).unwrap();
        let effects: Vec<_> = StatisticKind::ALL.iter().map(|&k| (k, one.clone())).collect();
        let cont = compute_continuous_stats(&seq, &rs, &effects, 3.0).unwrap();
        let step =
            compute_stepwise_stats(&seq, &rs, &StatisticKind::ALL, &IntervalSpec::single(3.0).unwrap())
                .unwrap();
        assert_eq!(cont.values(), step.values());
    }

    #[test]
    fn rejects_negative_weights() {
        let (seq, rs) = toy();
        let neg = DecayFn::Linear {
            cutoff: 5.0,
            max_value: -1.0,
        };
        let err = compute_continuous_stats(&seq, &rs, &[(StatisticKind::Reciprocity, neg)], 10.0);
        assert!(matches!(err, Err(StatsError::NegativeDecay { .. })));
    }
}
