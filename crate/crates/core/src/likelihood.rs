//! Relational event log-likelihood and its Newton maximizer.
//!
//! With `η_{m,d} = u_{m,d}ᵀβ`, event `m` contributes
//! `η_{m,obs} - Δt_m Σ_d exp(η_{m,d})`, where `Δt_m = t_m - t_{m-1}` and
//! `t_{-1}` is the sequence start. Rate sums factor out the row maximum of
//! `η` before exponentiating.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventSequence, RiskSet};
use crate::intervals::IntervalSpec;
use crate::linalg::{self, LinalgError};
use crate::stats::{StatTensor, StatisticKind};

/// Ridge used when the information matrix at the optimum fails to factor.
pub const RETRY_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LikelihoodError {
    #[error("tensor has {tensor} rows but the sequence has {sequence} events")]
    RowMismatch { tensor: usize, sequence: usize },
    #[error("tensor has {tensor} dyads but the risk set has {risk_set}")]
    DyadMismatch { tensor: usize, risk_set: usize },
    #[error("event {index} is on a dyad outside the risk set")]
    NotInRiskSet { index: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    BetaLength { got: usize, expected: usize },
    #[error("log-likelihood is not finite at event {m}")]
    NonFinite { m: usize },
    #[error("information matrix is singular at column `{label}`; add a ridge or drop the column")]
    RankDeficient { column: usize, label: String },
    #[error("sequence has no events")]
    Empty,
}

/// Everything the likelihood needs from one model: the statistics, the
/// observed dyad of each event, and the inter-event gaps.
///
/// Rows are stored compressed. Each row has a reference vector holding the
/// columns that are constant across dyads (zero elsewhere). Dyads are grouped
/// by their deviation from it, kept as sparse entries, so every distinct
/// statistic vector is evaluated once and weighted by its dyad count.
#[derive(Debug, Clone)]
pub struct Design<'a> {
    stats: &'a StatTensor,
    observed: Vec<usize>,
    dt: Vec<f64>,
    reference: Vec<f64>,
    row_start: Vec<usize>,
    group_size: Vec<f64>,
    entry_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// Group of the observed dyad, relative to its row.
    observed_group: Vec<usize>,
}

impl<'a> Design<'a> {
    pub fn new(
        stats: &'a StatTensor,
        seq: &EventSequence,
        rs: &RiskSet,
    ) -> Result<Self, LikelihoodError> {
        if stats.n_events() != seq.len() {
            return Err(LikelihoodError::RowMismatch {
                tensor: stats.n_events(),
                sequence: seq.len(),
            });
        }
        if stats.n_dyads() != rs.len() {
            return Err(LikelihoodError::DyadMismatch {
                tensor: stats.n_dyads(),
                risk_set: rs.len(),
            });
        }
        let observed = seq
            .events()
            .iter()
            .enumerate()
            .map(|(index, e)| {
                rs.index_of(e.sender, e.receiver)
                    .ok_or(LikelihoodError::NotInRiskSet { index })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let (n, p) = (stats.n_dyads(), stats.n_cols());
        let mut design = Self {
            stats,
            dt: seq.gaps(),
            reference: Vec::with_capacity(seq.len() * p),
            row_start: vec![0],
            group_size: Vec::new(),
            entry_start: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            observed_group: Vec::with_capacity(seq.len()),
            observed,
        };
        // per-row scratch: every dyad's deviation entries
        let mut start = vec![0; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        for m in 0..seq.len() {
            let row = stats.row(m);
            let first = &row[..p];
            let reference: Vec<f64> = (0..p)
                .map(|c| if (1..n).all(|d| row[d * p + c] == first[c]) { first[c] } else { 0.0 })
                .collect();
            cols.clear();
            vals.clear();
            for d in 0..n {
                for (c, (&u, &r)) in row[d * p..(d + 1) * p].iter().zip(&reference).enumerate() {
                    if u != r {
                        cols.push(c);
                        vals.push(u);
                    }
                }
                start[d + 1] = cols.len();
            }
            let key = |d: usize| (&cols[start[d]..start[d + 1]], &vals[start[d]..start[d + 1]]);
            order.sort_by(|&a, &b| {
                let ((ca, va), (cb, vb)) = (key(a), key(b));
                ca.cmp(cb).then_with(|| {
                    va.iter().zip(vb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
                })
            });
            let mut group = 0;
            for (i, &d) in order.iter().enumerate() {
                if i == 0 || key(d) != key(order[i - 1]) {
                    let (c, v) = key(d);
                    design.cols.extend_from_slice(c);
                    design.vals.extend_from_slice(v);
                    design.entry_start.push(design.cols.len());
                    design.group_size.push(0.0);
                    group = design.group_size.len() - 1 - design.row_start[m];
                }
                *design.group_size.last_mut().expect("group opened above") += 1.0;
                if d == design.observed[m] {
                    design.observed_group.push(group);
                }
            }
            design.reference.extend_from_slice(&reference);
            design.row_start.push(design.group_size.len());
        }
        Ok(design)
    }

    pub fn stats(&self) -> &StatTensor {
        self.stats
    }

    pub fn n_events(&self) -> usize {
        self.observed.len()
    }

    pub fn n_params(&self) -> usize {
        self.stats.n_cols()
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn gaps(&self) -> &[f64] {
        &self.dt
    }

    fn check_beta(&self, beta: &[f64]) -> Result<(), LikelihoodError> {
        if beta.len() != self.n_params() {
            return Err(LikelihoodError::BetaLength {
                got: beta.len(),
                expected: self.n_params(),
            });
        }
        Ok(())
    }

    fn reference(&self, m: usize) -> &[f64] {
        let p = self.n_params();
        &self.reference[m * p..(m + 1) * p]
    }

    /// Sparse deviation entries of group `g` (an index over all rows).
    fn entries(&self, g: usize) -> (&[usize], &[f64]) {
        let range = self.entry_start[g]..self.entry_start[g + 1];
        (&self.cols[range.clone()], &self.vals[range])
    }

    /// Linear predictors of the groups of event `m`, written to the front of
    /// `eta`. Returns the group count and their maximum.
    fn predictors(&self, m: usize, beta: &[f64], eta: &mut [f64]) -> (usize, f64) {
        let base = linalg::dot(self.reference(m), beta);
        let (lo, hi) = (self.row_start[m], self.row_start[m + 1]);
        let mut max = f64::NEG_INFINITY;
        for (out, g) in eta.iter_mut().zip(lo..hi) {
            let (cols, vals) = self.entries(g);
            *out = base + cols.iter().zip(vals).map(|(&c, v)| v * beta[c]).sum::<f64>();
            max = max.max(*out);
        }
        (hi - lo, max)
    }

    /// Log-likelihood contribution of event `m` alone. `eta` is scratch
    /// space with room for every dyad.
    pub fn event_term(&self, m: usize, beta: &[f64], eta: &mut [f64]) -> f64 {
        let (k, max) = self.predictors(m, beta, eta);
        let sizes = &self.group_size[self.row_start[m]..self.row_start[m + 1]];
        let sum: f64 = eta[..k].iter().zip(sizes).map(|(&x, &c)| c * libm::exp(x - max)).sum();
        eta[self.observed_group[m]] - self.dt[m] * libm::exp(max) * sum
    }

    /// Per-event contributions; their sum is the log-likelihood.
    pub fn event_terms(&self, beta: &[f64]) -> Result<Vec<f64>, LikelihoodError> {
        self.check_beta(beta)?;
        let mut eta = vec![0.0; self.stats.n_dyads()];
        (0..self.n_events())
            .map(|m| {
                let v = self.event_term(m, beta, &mut eta);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(LikelihoodError::NonFinite { m })
                }
            })
            .collect()
    }

    pub fn log_likelihood(&self, beta: &[f64]) -> Result<f64, LikelihoodError> {
        Ok(self.event_terms(beta)?.iter().sum())
    }

    /// Log-likelihood, gradient and Hessian (row-major) at `beta`.
    ///
    /// With `u = r + δ` per dyad and weights `w`, the rate-weighted sums are
    /// `W r + s` and `W r rᵀ + r sᵀ + s rᵀ + S`, where `W = Σ w`,
    /// `s = Σ w δ` and `S = Σ w δ δᵀ`.
    pub fn grad_and_hessian(
        &self,
        beta: &[f64],
    ) -> Result<(f64, Vec<f64>, Vec<f64>), LikelihoodError> {
        self.check_beta(beta)?;
        let p = self.n_params();
        let mut eta = vec![0.0; self.stats.n_dyads()];
        let mut ll = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        let mut s = vec![0.0; p];
        for m in 0..self.n_events() {
            let (k, max) = self.predictors(m, beta, &mut eta);
            let scale = self.dt[m] * libm::exp(max);
            let lo = self.row_start[m];
            let mut total = 0.0;
            s.iter_mut().for_each(|x| *x = 0.0);
            for (j, &e) in eta[..k].iter().enumerate() {
                let w = self.group_size[lo + j] * libm::exp(e - max);
                total += w;
                let (cols, vals) = self.entries(lo + j);
                for (a, (&ca, &va)) in cols.iter().zip(vals).enumerate() {
                    let wa = w * va;
                    s[ca] += wa;
                    for (&cb, &vb) in cols[..=a].iter().zip(vals) {
                        hess[ca * p + cb] -= scale * wa * vb;
                    }
                }
            }
            let obs = self.observed_group[m];
            let term = eta[obs] - scale * total;
            if !term.is_finite() {
                return Err(LikelihoodError::NonFinite { m });
            }
            ll += term;

            let r = self.reference(m);
            for a in 0..p {
                grad[a] += r[a] - scale * (total * r[a] + s[a]);
                for b in 0..=a {
                    hess[a * p + b] -= scale * (total * r[a] * r[b] + r[a] * s[b] + s[a] * r[b]);
                }
            }
            let (cols, vals) = self.entries(lo + obs);
            for (&c, &v) in cols.iter().zip(vals) {
                grad[c] += v;
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[b * p + a] = hess[a * p + b];
            }
        }
        Ok((ll, grad, hess))
    }
}

/// Newton solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Relative log-likelihood change below which iteration stops.
    pub tol: f64,
    /// Largest absolute gradient component accepted at convergence.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Added to the information matrix in every Newton step and in the
    /// covariance.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            grad_tol: 1e-6,
            max_iter: 100,
            ridge: 0.0,
        }
    }
}

/// Output of [`fit_mle`] before it is attached to a model description.
#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub beta: Vec<f64>,
    pub cov: Vec<f64>,
    pub loglik: f64,
    pub max_grad: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn information(hess: &[f64], p: usize, ridge: f64) -> Vec<f64> {
    let mut info: Vec<f64> = hess.iter().map(|h| -h).collect();
    linalg::add_diagonal(&mut info, p, ridge);
    info
}

/// Maximize the log-likelihood by Newton's method from `β = 0` with step
/// halving.
///
/// A singular information matrix during the iterations is reported as
/// [`LikelihoodError::RankDeficient`] unless `opts.ridge > 0`. A fit that
/// does not meet both stopping rules within `max_iter` steps is returned with
/// `converged = false`.
pub fn fit_mle(design: &Design<'_>, opts: &FitOptions) -> Result<MleResult, LikelihoodError> {
    if design.n_events() == 0 {
        return Err(LikelihoodError::Empty);
    }
    let p = design.n_params();
    let labels = design.stats().labels();
    let rank_error = |e: LinalgError| match e {
        LinalgError::NotPositiveDefinite { column, .. } => LikelihoodError::RankDeficient {
            column,
            label: labels[column].clone(),
        },
    };

    let mut beta = vec![0.0; p];
    let (mut ll, mut grad, mut hess) = design.grad_and_hessian(&beta)?;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let l = linalg::cholesky(&information(&hess, p, opts.ridge), p).map_err(rank_error)?;
        let step = linalg::cholesky_solve(&l, p, &grad);

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            if let Ok(v) = design.log_likelihood(&trial) {
                if v >= ll - 1e-12 * ll.abs() {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, ll_next)) = accepted else {
            break;
        };
        let change = (ll_next - ll).abs() / ll.abs().max(1.0);
        beta = next;
        (ll, grad, hess) = design.grad_and_hessian(&beta)?;
        if change < opts.tol && max_abs(&grad) < opts.grad_tol {
            converged = true;
            break;
        }
    }

    let mut warnings = Vec::new();
    let info = information(&hess, p, opts.ridge);
    let l = match linalg::cholesky(&info, p) {
        Ok(l) => l,
        Err(e) => {
            let mut jittered = info;
            linalg::add_diagonal(&mut jittered, p, RETRY_RIDGE);
            let l = linalg::cholesky(&jittered, p).map_err(rank_error)?;
            warnings.push(format!(
                "information matrix not positive definite ({e}); covariance uses ridge {RETRY_RIDGE:e}"
            ));
            l
        }
    };
    let cov = linalg::cholesky_inverse(&l, p);
    Ok(MleResult {
        max_grad: max_abs(&grad),
        beta,
        cov,
        loglik: ll,
        converged,
        iterations,
        warnings,
    })
}

/// `-2 logL + P ln M` with `M` the number of events.
pub fn bic(loglik: f64, n_params: usize, n_events: usize) -> f64 {
    -2.0 * loglik + n_params as f64 * libm::log(n_events as f64)
}

/// A fitted stepwise model with its normal posterior approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub spec: IntervalSpec,
    pub kinds: Vec<StatisticKind>,
    pub labels: Vec<String>,
    pub beta: Vec<f64>,
    /// Inverse observed information, row-major `n_params × n_params`.
    pub cov: Vec<f64>,
    pub loglik: f64,
    pub n_params: usize,
    pub n_events: usize,
    pub bic: f64,
    /// Deviance-scale WAIC, `-2 · elpd`, once computed.
    pub waic: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_grad: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ModelFit {
    pub fn from_mle(
        spec: IntervalSpec,
        kinds: Vec<StatisticKind>,
        labels: Vec<String>,
        mle: MleResult,
        n_events: usize,
    ) -> Self {
        let n_params = mle.beta.len();
        Self {
            spec,
            kinds,
            labels,
            bic: bic(mle.loglik, n_params, n_events),
            beta: mle.beta,
            cov: mle.cov,
            loglik: mle.loglik,
            n_params,
            n_events,
            waic: None,
            converged: mle.converged,
            iterations: mle.iterations,
            max_grad: mle.max_grad,
            warnings: mle.warnings,
        }
    }

    /// Standard errors from the diagonal of the covariance.
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.n_params)
            .map(|i| libm::sqrt(self.cov[i * self.n_params + i]))
            .collect()
    }
}
