//! Flat run configuration shared by every subcommand.
//!
//! A config file is one JSON object whose keys are the field names below.
//! Command-line flags use the same names (with dashes) and win over the file.

use std::path::PathBuf;

use anyhow::{bail, Context};
use remdecay_core::bma::{WaicConfig, WeightingKind};
use remdecay_core::decay::DecayFn;
use remdecay_core::intervals::BagConfig;
use remdecay_core::likelihood::FitOptions;
use remdecay_core::simulate::{Effect, SimConfig, StopRule};
use remdecay_core::stats::StatisticKind;
use serde::{Deserialize, Serialize};

use crate::io::{ColumnMap, TiePolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub force: bool,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,

    pub events: Option<PathBuf>,
    /// JSON array of actor labels; ids follow its order.
    pub labels: Option<PathBuf>,
    pub time_column: String,
    pub sender_column: String,
    pub receiver_column: String,
    /// `spread` or `reject`.
    pub ties: String,
    pub tie_unit: f64,

    pub kinds: Vec<String>,
    pub gamma_max: f64,
    pub k_values: Vec<usize>,
    pub per_kind_count: usize,
    pub min_size: f64,
    pub intervals_file: Option<PathBuf>,

    pub weighting: WeightingKind,
    pub max_iter: usize,
    pub ridge: f64,
    /// Defaults to `max(100, ⌈M/10⌉)`.
    pub waic_burn_in: Option<usize>,
    pub waic_steps_ahead: usize,
    pub waic_draws: usize,

    pub fits: Option<PathBuf>,
    pub n_draws: usize,
    pub grid_size: usize,
    pub hpd_level: f64,

    pub seed: u64,
    pub sim_seed: Option<u64>,
    pub interval_seed: Option<u64>,
    pub waic_seed: Option<u64>,
    pub posterior_seed: Option<u64>,

    pub n_actors: usize,
    pub n_events: Option<usize>,
    pub end_time: Option<f64>,
    pub beta0: f64,
    /// Generating effects, `[{"kind": ..., "decay": {"variant": ..., "params": ...}}]`.
    pub effects: Vec<Effect>,

    /// Bag id whose statistics are dumped to `tensor.csv` by `fit-bag`.
    pub dump_tensor: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bag = BagConfig::default();
        Self {
            out_dir: PathBuf::from("out"),
            force: false,
            jobs: 0,
            events: None,
            labels: None,
            time_column: "time".into(),
            sender_column: "sender".into(),
            receiver_column: "receiver".into(),
            ties: "spread".into(),
            tie_unit: 1.0,
            kinds: vec!["inertia".into(), "reciprocity".into()],
            gamma_max: bag.horizon,
            k_values: bag.k_values,
            per_kind_count: bag.per_kind_count,
            min_size: bag.min_size,
            intervals_file: None,
            weighting: WeightingKind::Bic,
            max_iter: FitOptions::default().max_iter,
            ridge: 0.0,
            waic_burn_in: None,
            waic_steps_ahead: 1,
            waic_draws: 500,
            fits: None,
            n_draws: 10_000,
            grid_size: 181,
            hpd_level: 0.95,
            seed: 0,
            sim_seed: None,
            interval_seed: None,
            waic_seed: None,
            posterior_seed: None,
            n_actors: 10,
            n_events: None,
            end_time: None,
            beta0: -4.5,
            effects: vec![Effect {
                kind: StatisticKind::Inertia,
                decay: DecayFn::exponential(5.0, 0.2).expect("valid default decay"),
            }],
            dump_tensor: None,
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid by the file at `path` (if any), overlaid by `overrides`.
    pub fn resolve(path: Option<&std::path::Path>, overrides: serde_json::Value) -> anyhow::Result<Self> {
        let mut doc = serde_json::to_value(Self::default())?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            let file: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
            merge(&mut doc, file, "config file")?;
        }
        merge(&mut doc, overrides, "command line")?;
        serde_json::from_value(doc).context("invalid configuration")
    }

    pub fn statistic_kinds(&self) -> anyhow::Result<Vec<StatisticKind>> {
        if self.kinds.is_empty() {
            bail!("`kinds` is empty");
        }
        let kinds: Vec<StatisticKind> = self.kinds.iter().map(|k| k.parse()).collect::<Result<_, _>>()?;
        let mut seen = kinds.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != kinds.len() {
            bail!("`kinds` lists a statistic twice");
        }
        Ok(kinds)
    }

    pub fn columns(&self) -> ColumnMap {
        ColumnMap {
            time: self.time_column.clone(),
            sender: self.sender_column.clone(),
            receiver: self.receiver_column.clone(),
        }
    }

    pub fn tie_policy(&self) -> anyhow::Result<TiePolicy> {
        match self.ties.as_str() {
            "spread" => Ok(TiePolicy::Spread { unit: self.tie_unit }),
            "reject" => Ok(TiePolicy::Reject),
            other => bail!("unknown tie policy `{other}` (expected spread or reject)"),
        }
    }

    pub fn bag_config(&self) -> BagConfig {
        BagConfig {
            k_values: self.k_values.clone(),
            per_kind_count: self.per_kind_count,
            min_size: self.min_size,
            horizon: self.gamma_max,
            seed: self.interval_seed.unwrap_or(self.seed),
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iter: self.max_iter,
            ridge: self.ridge,
            ..FitOptions::default()
        }
    }

    pub fn waic_config(&self, n_events: usize) -> WaicConfig {
        let base = WaicConfig::default_for(n_events, self.waic_seed.unwrap_or(self.seed));
        WaicConfig {
            burn_in: self.waic_burn_in.unwrap_or(base.burn_in),
            steps_ahead: self.waic_steps_ahead,
            draws: self.waic_draws,
            ..base
        }
    }

    pub fn posterior_seed(&self) -> u64 {
        self.posterior_seed.unwrap_or(self.seed)
    }

    pub fn sim_config(&self) -> anyhow::Result<SimConfig> {
        let stop = match (self.n_events, self.end_time) {
            (Some(n), None) => StopRule::Events(n),
            (None, Some(t)) => StopRule::Time(t),
            (None, None) => bail!("simulate needs `n_events` or `end_time`"),
            (Some(_), Some(_)) => bail!("set only one of `n_events` and `end_time`"),
        };
        let cfg = SimConfig {
            n_actors: self.n_actors,
            beta0: self.beta0,
            effects: self.effects.clone(),
            horizon: self.gamma_max,
            stop,
            seed: self.sim_seed.unwrap_or(self.seed),
            t0: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Worker count after resolving `0` to the machine's parallelism.
    pub fn workers(&self) -> usize {
        if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }
}

fn merge(doc: &mut serde_json::Value, layer: serde_json::Value, origin: &str) -> anyhow::Result<()> {
    let serde_json::Value::Object(fields) = layer else {
        bail!("{origin}: configuration must be a JSON object");
    };
    let target = doc.as_object_mut().expect("defaults serialize to an object");
    for (key, value) in fields {
        if !target.contains_key(&key) {
            bail!("{origin}: unknown configuration key `{key}`");
        }
        target.insert(key, value);
    }
    Ok(())
}
