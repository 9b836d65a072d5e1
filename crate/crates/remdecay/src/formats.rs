//! On-disk formats: `intervals.json`, `fits.json`, `weights.csv`,
//! `trend.csv`/`trend.json`, the statistics dump and `manifest.json`.

use std::io::{Read, Write};

use remdecay_core::bma::{ModelBag, PosteriorTrend, WaicConfig, WeightingKind};
use remdecay_core::events::{EventSequence, RiskSet};
use remdecay_core::intervals::IntervalSpec;
use remdecay_core::likelihood::ModelFit;
use remdecay_core::stats::{StatTensor, StatisticKind};
use serde::{Deserialize, Serialize};

/// One fitted model with its position in the interval bag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model_id: usize,
    #[serde(flatten)]
    pub fit: ModelFit,
}

/// Contents of `fits.json`. Only converged models are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub kinds: Vec<StatisticKind>,
    pub n_actors: usize,
    pub n_events: usize,
    pub weighting: WeightingKind,
    pub waic: Option<WaicConfig>,
    pub models: Vec<ModelRecord>,
    /// Bag ids that were dropped, with the reason.
    pub skipped: Vec<(usize, String)>,
}

impl FitsFile {
    pub fn fits(&self) -> Vec<ModelFit> {
        self.models.iter().map(|r| r.fit.clone()).collect()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> serde_json::Result<T> {
    serde_json::from_reader(r)
}

pub fn write_json<T: Serialize, W: Write>(mut w: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")
}

pub fn write_intervals<W: Write>(w: W, bag: &[IntervalSpec]) -> std::io::Result<()> {
    write_json(w, &bag)
}

pub fn read_intervals<R: Read>(r: R) -> anyhow::Result<Vec<IntervalSpec>> {
    let raw: Vec<IntervalSpec> = read_json(r)?;
    // re-validate: the file may have been edited by hand
    raw.into_iter()
        .enumerate()
        .map(|(i, s)| IntervalSpec::new(s.kind, s.gamma).map_err(|e| anyhow::anyhow!("interval spec {i}: {e}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub model_id: usize,
    pub kind_of_intervals: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub bic: f64,
    pub waic: Option<f64>,
    pub weight: f64,
}

pub fn weight_rows(records: &[ModelRecord], bag: &ModelBag) -> Vec<WeightRow> {
    records
        .iter()
        .zip(&bag.weights)
        .map(|(r, &weight)| WeightRow {
            model_id: r.model_id,
            kind_of_intervals: r.fit.spec.kind.as_str().into(),
            k: r.fit.spec.k(),
            bic: r.fit.bic,
            waic: r.fit.waic,
            weight,
        })
        .collect()
}

pub fn write_weights<W: Write>(w: W, rows: &[WeightRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_weights<R: Read>(r: R) -> csv::Result<Vec<WeightRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub kind: String,
    pub gamma: f64,
    pub mode: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
}

pub fn trend_rows(trend: &PosteriorTrend) -> Vec<TrendRow> {
    trend
        .effects
        .iter()
        .flat_map(|e| {
            trend.grid.iter().enumerate().map(move |(g, &gamma)| TrendRow {
                kind: e.kind.name().into(),
                gamma,
                mode: e.mode[g],
                hpd_low: e.hpd_low[g],
                hpd_high: e.hpd_high[g],
            })
        })
        .collect()
}

pub fn write_trend_csv<W: Write>(w: W, trend: &PosteriorTrend) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in trend_rows(trend) {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trend_csv<R: Read>(r: R) -> csv::Result<Vec<TrendRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// One row per (event, dyad): `m,sender,receiver` followed by the tensor
/// columns (`intercept`, `inertia_k1`, ...).
pub fn write_tensor_csv<W: Write>(
    w: W,
    tensor: &StatTensor,
    seq: &EventSequence,
    rs: &RiskSet,
    labels: &[String],
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["m".to_string(), "time".into(), "sender".into(), "receiver".into()];
    header.extend(tensor.labels().iter().cloned());
    out.write_record(&header)?;
    for m in 0..tensor.n_events() {
        for (d, &(i, j)) in rs.dyads().iter().enumerate() {
            let mut rec = vec![
                (m + 1).to_string(),
                seq.events()[m].time.to_string(),
                labels[i as usize].clone(),
                labels[j as usize].clone(),
            ];
            rec.extend(tensor.dyad(m, d).iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Record of one command's run inside `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub version: String,
    pub outputs: Vec<String>,
    pub details: serde_json::Value,
}
