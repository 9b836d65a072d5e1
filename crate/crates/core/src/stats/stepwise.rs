use alloc::vec;
use alloc::vec::Vec;

use super::{check_inputs, stepwise_labels, DyadHistory, StatTensor, StatisticKind, StatsError};
use crate::events::{EventSequence, RiskSet};
use crate::intervals::IntervalSpec;

/// Interval-partitioned counts for every event time and dyad.
///
/// An event `e` counts towards interval `k` at `t_m` when its transpired time
/// `t_m - t_e` lies in `(γ_{k-1}, γ_k]`; events older than the horizon count
/// nowhere. For the closure statistics the outer event is placed by its
/// transpired time while the earlier leg is searched in
/// `[t_e - (t_m - t_e), t_e)` over the full history.
///
/// The sweep keeps one pointer per boundary. Because events are sorted, the
/// events older than `γ_k` at `t_m` form a prefix, and each pointer only moves
/// forward as `m` grows; dyadic and degree counts are moved between interval
/// buckets as events cross boundaries instead of being recounted.
pub fn compute_stepwise_stats(
    seq: &EventSequence,
    rs: &RiskSet,
    kinds: &[StatisticKind],
    spec: &IntervalSpec,
) -> Result<StatTensor, StatsError> {
    check_inputs(seq.n_actors(), rs.n_actors(), kinds.iter().copied())?;

    let n = seq.n_actors();
    let nn = n * n;
    let events = seq.events();
    let n_events = events.len();
    let n_dyads = rs.len();
    let n_int = spec.k();
    let gamma = &spec.gamma;
    let labels = stepwise_labels(kinds, n_int);
    let n_cols = labels.len();
    let triadic = kinds.iter().any(|k| k.is_triadic());
    let dyads: Vec<(usize, usize)> = rs
        .dyads()
        .iter()
        .map(|&(s, r)| (s as usize, r as usize))
        .collect();

    let mut values = vec![0.0; n_events * n_dyads * n_cols];

    let mut buckets = Buckets::new(n, n_int);
    let mut transitive = vec![0i64; n_int * nn];
    let mut cyclic = vec![0i64; n_int * nn];
    // older[b]: number of leading events with transpired time > γ_b
    let mut older = vec![0usize; n_int];
    let mut history = DyadHistory::new(n);

    for m in 0..n_events {
        let tm = events[m].time;
        if m > 0 {
            let e = &events[m - 1];
            buckets.shift(0, e.sender as usize, e.receiver as usize, 1);
            history.push(e);
        }
        for b in 0..n_int {
            while older[b] < m && tm - events[older[b]].time > gamma[b] {
                let e = &events[older[b]];
                let (s, r) = (e.sender as usize, e.receiver as usize);
                buckets.shift(b, s, r, -1);
                if b + 1 < n_int {
                    buckets.shift(b + 1, s, r, 1);
                }
                older[b] += 1;
            }
        }

        if triadic {
            transitive.iter_mut().for_each(|x| *x = 0);
            cyclic.iter_mut().for_each(|x| *x = 0);
            for b in 0..n_int {
                let newest = if b == 0 { m } else { older[b - 1] };
                for e in &events[older[b]..newest] {
                    let (a, c) = (e.sender as usize, e.receiver as usize);
                    let lo = e.time - (tm - e.time);
                    for x in (0..n).filter(|&x| x != a && x != c) {
                        let cnt = history.count_in(x, a, lo, e.time) as i64;
                        if cnt > 0 {
                            // x -> a -> c closes (x, c); c <- ... cyclic for (c, x)
                            transitive[b * nn + x * n + c] += cnt;
                            cyclic[b * nn + c * n + x] += cnt;
                        }
                    }
                }
            }
        }

        let Buckets {
            pair, indeg, outdeg, ..
        } = &buckets;
        let row = &mut values[m * n_dyads * n_cols..(m + 1) * n_dyads * n_cols];
        for (d, &(i, j)) in dyads.iter().enumerate() {
            let out = &mut row[d * n_cols..(d + 1) * n_cols];
            out[0] = 1.0;
            for (ci, kind) in kinds.iter().enumerate() {
                for b in 0..n_int {
                    let v = match kind {
                        StatisticKind::Inertia => pair[b * nn + i * n + j],
                        StatisticKind::Reciprocity => pair[b * nn + j * n + i],
                        StatisticKind::IndegreeSender => indeg[b * n + i],
                        StatisticKind::OutdegreeSender => outdeg[b * n + i],
                        StatisticKind::IndegreeReceiver => indeg[b * n + j],
                        StatisticKind::OutdegreeReceiver => outdeg[b * n + j],
                        StatisticKind::TransitivityClosure => transitive[b * nn + i * n + j],
                        StatisticKind::CyclicClosure => cyclic[b * nn + i * n + j],
                    };
                    out[1 + ci * n_int + b] = v as f64;
                }
            }
        }
    }

    Ok(StatTensor::new(n_events, n_dyads, labels, values))
}

/// Per-interval dyad and actor counts; bucket `b` holds the events currently
/// in interval `b`.
struct Buckets {
    n: usize,
    pair: Vec<i64>,
    indeg: Vec<i64>,
    outdeg: Vec<i64>,
}

impl Buckets {
    fn new(n: usize, n_int: usize) -> Self {
        Self {
            n,
            pair: vec![0; n_int * n * n],
            indeg: vec![0; n_int * n],
            outdeg: vec![0; n_int * n],
        }
    }

    fn shift(&mut self, bucket: usize, s: usize, r: usize, delta: i64) {
        let n = self.n;
        self.pair[bucket * n * n + s * n + r] += delta;
        self.outdeg[bucket * n + s] += delta;
        self.indeg[bucket * n + r] += delta;
    }
}
