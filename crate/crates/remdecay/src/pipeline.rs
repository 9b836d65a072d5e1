//! Bag fitting and trend extraction, independent of files.

use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use remdecay_core::bma::{extract_trend, model_waic, sample_posterior, ModelBag, PosteriorTrend, WaicConfig, WeightingKind};
use remdecay_core::events::{EventSequence, RiskSet};
use remdecay_core::intervals::IntervalSpec;
use remdecay_core::likelihood::{fit_mle, Design, FitOptions, ModelFit};
use remdecay_core::stats::{compute_stepwise_stats, StatisticKind};
use serde_json::json;

use crate::formats::ModelRecord;
use crate::log::Log;

#[derive(Debug, Clone)]
pub struct BagFitSettings {
    pub kinds: Vec<StatisticKind>,
    pub fit: FitOptions,
    pub weighting: WeightingKind,
    /// Required for WAIC weighting, ignored otherwise.
    pub waic: Option<WaicConfig>,
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct BagFit {
    /// Converged models in bag order.
    pub records: Vec<ModelRecord>,
    pub skipped: Vec<(usize, String)>,
    /// Weighted bag over `records`.
    pub bag: ModelBag,
}

enum Outcome {
    Fit(ModelFit),
    Skip(String),
}

fn fit_one(
    q: usize,
    spec: &IntervalSpec,
    seq: &EventSequence,
    rs: &RiskSet,
    settings: &BagFitSettings,
) -> anyhow::Result<Outcome> {
    let stats = compute_stepwise_stats(seq, rs, &settings.kinds, spec)?;
    let design = Design::new(&stats, seq, rs)?;
    let mle = match fit_mle(&design, &settings.fit) {
        Ok(m) => m,
        Err(e) => return Ok(Outcome::Skip(e.to_string())),
    };
    let mut fit = ModelFit::from_mle(spec.clone(), settings.kinds.clone(), stats.labels().to_vec(), mle, seq.len());
    if !fit.converged {
        return Ok(Outcome::Skip(format!("not converged after {} iterations", fit.iterations)));
    }
    if settings.weighting == WeightingKind::Waic {
        let cfg = settings.waic.context("WAIC weighting needs WAIC settings")?;
        let res = model_waic(&design, &fit, &cfg, q)?;
        fit.waic = Some(res.waic);
        fit.warnings.extend(res.warnings);
    }
    Ok(Outcome::Fit(fit))
}

/// Fit every spec of the bag on `jobs` worker threads, drop the ones that
/// fail or do not converge, and weight the rest. WAIC draws for model `q`
/// come from seed stream `q`, so results do not depend on scheduling.
pub fn fit_bag(
    seq: &EventSequence,
    rs: &RiskSet,
    specs: &[IntervalSpec],
    settings: &BagFitSettings,
    log: &Log,
) -> anyhow::Result<BagFit> {
    if specs.is_empty() {
        bail!("the interval bag is empty");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.jobs.max(1)).build()?;
    let start = Instant::now();
    let outcomes: Vec<anyhow::Result<Outcome>> = pool.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(q, spec)| {
                let t = Instant::now();
                let out = fit_one(q, spec, seq, rs, settings).with_context(|| format!("model {q}"));
                let seconds = t.elapsed().as_secs_f64();
                match &out {
                    Ok(Outcome::Fit(f)) => log.emit(json!({
                        "event": "model_fit", "model_id": q, "kind": spec.kind.as_str(), "K": spec.k(),
                        "loglik": f.loglik, "bic": f.bic, "waic": f.waic, "iterations": f.iterations,
                        "seconds": seconds,
                    })),
                    Ok(Outcome::Skip(reason)) => log.emit(json!({
                        "event": "model_skipped", "model_id": q, "reason": reason, "seconds": seconds,
                    })),
                    Err(e) => log.emit(json!({"event": "model_error", "model_id": q, "error": format!("{e:#}")})),
                }
                out
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (q, out) in outcomes.into_iter().enumerate() {
        match out? {
            Outcome::Fit(fit) => records.push(ModelRecord { model_id: q, fit }),
            Outcome::Skip(reason) => skipped.push((q, reason)),
        }
    }
    if records.is_empty() {
        bail!("none of the {} models converged", specs.len());
    }
    let bag = ModelBag::new(records.iter().map(|r| r.fit.clone()).collect(), settings.weighting)?;
    let seconds = start.elapsed().as_secs_f64();
    log.emit(json!({
        "event": "bag_done", "models": specs.len(), "converged": records.len(), "skipped": skipped.len(),
        "jobs": settings.jobs, "seconds": seconds, "models_per_second": specs.len() as f64 / seconds,
    }));
    Ok(BagFit { records, skipped, bag })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendSettings {
    pub n_draws: usize,
    pub grid_size: usize,
    pub gamma_max: f64,
    pub level: f64,
    pub seed: u64,
}

/// Sample the mixture posterior and read the decay trend off the draws.
pub fn trend(bag: &ModelBag, kinds: &[StatisticKind], settings: &TrendSettings) -> anyhow::Result<PosteriorTrend> {
    let draws = sample_posterior(bag, settings.n_draws, settings.seed)?;
    Ok(extract_trend(&draws, bag, kinds, settings.grid_size, settings.gamma_max, settings.level)?)
}
