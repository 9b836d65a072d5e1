//! Subcommands: `simulate`, `gen-intervals`, `fit-bag`, `trend`, `report`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use remdecay_core::bma::ModelBag;
use remdecay_core::events::RiskSet;
use remdecay_core::intervals::generate_interval_bag;
use remdecay_core::simulate::simulate;
use remdecay_core::stats::compute_stepwise_stats;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::formats::{self, FitsFile, ManifestEntry};
use crate::io::{self, LoadedEvents};
use crate::log::Log;
use crate::pipeline::{self, BagFitSettings, TrendSettings};

#[derive(Debug, Parser)]
#[command(name = "remdecay", version, about = "Memory decay in relational event sequences via averaged stepwise models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an event sequence with known decay; writes events.csv and labels.json.
    Simulate(Flags),
    /// Generate the randomized interval bag; writes intervals.json.
    GenIntervals(Flags),
    /// Fit every stepwise model of the bag; writes fits.json and weights.csv.
    FitBag(Flags),
    /// Average the fitted models into a decay trend; writes trend.csv and trend.json.
    Trend(Flags),
    /// Print a summary of the results in the output directory.
    Report(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::GenIntervals(_) => "gen-intervals",
            Self::FitBag(_) => "fit-bag",
            Self::Trend(_) => "trend",
            Self::Report(_) => "report",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Self::Simulate(f) | Self::GenIntervals(f) | Self::FitBag(f) | Self::Trend(f) | Self::Report(f) => f,
        }
    }
}

/// Every configuration field as an optional flag of the same name.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Flags {
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub force: bool,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_column: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sender_column: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver_column: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ties: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_unit: Option<f64>,

    /// Comma-separated statistic names, e.g. `inertia,reciprocity`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_kind_count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_size: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals_file: Option<PathBuf>,

    /// `bic` or `waic`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waic_burn_in: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waic_steps_ahead: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waic_draws: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_draws: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hpd_level: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waic_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_seed: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_actors: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_events: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_time: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    /// JSON array of `{"kind": ..., "decay": {"variant": ..., "params": ...}}`.
    #[arg(long)]
    #[serde(skip)]
    pub effects: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_tensor: Option<usize>,
}

impl Flags {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut overrides = serde_json::to_value(self)?;
        if let Some(text) = &self.effects {
            let effects: serde_json::Value = serde_json::from_str(text).context("--effects is not valid JSON")?;
            overrides["effects"] = effects;
        }
        RunConfig::resolve(self.config.as_deref(), overrides)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    run_with_log(cli, &Log::stderr())
}

pub fn run_with_log(cli: Cli, log: &Log) -> anyhow::Result<()> {
    let cfg = cli.command.flags().resolve()?;
    let name = cli.command.name();
    match &cli.command {
        Command::Simulate(_) => cmd_simulate(&cfg, name),
        Command::GenIntervals(_) => cmd_gen_intervals(&cfg, name),
        Command::FitBag(_) => cmd_fit_bag(&cfg, name, log),
        Command::Trend(_) => cmd_trend(&cfg, name),
        Command::Report(_) => cmd_report(&cfg, &mut std::io::stdout().lock()),
    }
}

/// Files a command is about to write, checked before any work is done.
struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn claim(cfg: &RunConfig, command: &str, names: &[&str]) -> anyhow::Result<Self> {
        let dir = cfg.out_dir.clone();
        let mut names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        names.push(config_echo_name(command));
        if !cfg.force {
            if let Some(n) = names.iter().find(|n| dir.join(n).exists()) {
                bail!("{} already exists; pass --force to overwrite", dir.join(n).display());
            }
        }
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, names })
    }

    fn create(&self, name: &str) -> anyhow::Result<BufWriter<File>> {
        debug_assert!(self.names.iter().any(|n| n == name));
        let path = self.dir.join(name);
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }

    /// Echo the config and record the run in `manifest.json`.
    fn finish(self, cfg: &RunConfig, command: &str, details: serde_json::Value) -> anyhow::Result<()> {
        let echo = RunConfig {
            force: false,
            ..cfg.clone()
        };
        let mut w = self.create(&config_echo_name(command))?;
        formats::write_json(&mut w, &echo)?;
        w.flush()?;

        let path = self.dir.join("manifest.json");
        let mut manifest: BTreeMap<String, ManifestEntry> = if path.exists() {
            formats::read_json(BufReader::new(File::open(&path)?)).with_context(|| format!("reading {}", path.display()))?
        } else {
            BTreeMap::new()
        };
        manifest.insert(
            command.into(),
            ManifestEntry {
                version: env!("CARGO_PKG_VERSION").into(),
                outputs: self.names.clone(),
                details,
            },
        );
        let mut w = BufWriter::new(File::create(&path)?);
        formats::write_json(&mut w, &manifest)?;
        w.flush()?;
        Ok(())
    }
}

fn config_echo_name(command: &str) -> String {
    format!("{command}.config.json")
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn cmd_simulate(cfg: &RunConfig, name: &str) -> anyhow::Result<()> {
    let sim = cfg.sim_config()?;
    let out = Outputs::claim(cfg, name, &["events.csv", "labels.json"])?;
    let seq = simulate(&sim)?;
    let labels = io::numeric_labels(sim.n_actors);
    let mut w = out.create("events.csv")?;
    io::write_events(&mut w, &seq, &labels)?;
    w.flush()?;
    let mut w = out.create("labels.json")?;
    formats::write_json(&mut w, &labels)?;
    w.flush()?;
    out.finish(cfg, name, json!({"sim_config": sim, "n_events": seq.len(), "end_time": seq.end_time()}))
}

fn cmd_gen_intervals(cfg: &RunConfig, name: &str) -> anyhow::Result<()> {
    let bag_cfg = cfg.bag_config();
    let out = Outputs::claim(cfg, name, &["intervals.json"])?;
    let bag = generate_interval_bag(&bag_cfg)?;
    let mut w = out.create("intervals.json")?;
    formats::write_intervals(&mut w, &bag)?;
    w.flush()?;
    out.finish(cfg, name, json!({"bag_config": bag_cfg, "n_specs": bag.len()}))
}

fn load(cfg: &RunConfig) -> anyhow::Result<LoadedEvents> {
    let path = cfg.events.as_deref().context("no `events` file given")?;
    let known: Option<Vec<String>> = match &cfg.labels {
        Some(p) => Some(formats::read_json(open(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    io::load_events(open(path)?, &cfg.columns(), cfg.tie_policy()?, known.as_deref())
        .with_context(|| format!("loading {}", path.display()))
}

fn cmd_fit_bag(cfg: &RunConfig, name: &str, log: &Log) -> anyhow::Result<()> {
    let kinds = cfg.statistic_kinds()?;
    let loaded = load(cfg)?;
    let seq = &loaded.sequence;
    let rs = RiskSet::new(seq.n_actors())?;

    let mut names = vec!["fits.json", "weights.csv"];
    if cfg.intervals_file.is_none() {
        names.push("intervals.json");
    }
    if cfg.dump_tensor.is_some() {
        names.push("tensor.csv");
    }
    let out = Outputs::claim(cfg, name, &names)?;
    let specs = match &cfg.intervals_file {
        Some(p) => formats::read_intervals(open(p)?).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let bag = generate_interval_bag(&cfg.bag_config())?;
            let mut w = out.create("intervals.json")?;
            formats::write_intervals(&mut w, &bag)?;
            w.flush()?;
            bag
        }
    };

    if let Some(q) = cfg.dump_tensor {
        let spec = specs.get(q).with_context(|| format!("dump_tensor: no model {q} in a bag of {}", specs.len()))?;
        let tensor = compute_stepwise_stats(seq, &rs, &kinds, spec)?;
        let mut w = out.create("tensor.csv")?;
        formats::write_tensor_csv(&mut w, &tensor, seq, &rs, &loaded.labels)?;
        w.flush()?;
    }

    let waic = cfg.waic_config(seq.len());
    let settings = BagFitSettings {
        kinds: kinds.clone(),
        fit: cfg.fit_options(),
        weighting: cfg.weighting,
        waic: (cfg.weighting == remdecay_core::WeightingKind::Waic).then_some(waic),
        jobs: cfg.workers(),
    };
    let fitted = pipeline::fit_bag(seq, &rs, &specs, &settings, log)?;

    let file = FitsFile {
        kinds,
        n_actors: seq.n_actors(),
        n_events: seq.len(),
        weighting: cfg.weighting,
        waic: settings.waic,
        models: fitted.records.clone(),
        skipped: fitted.skipped.clone(),
    };
    let mut w = out.create("fits.json")?;
    formats::write_json(&mut w, &file)?;
    w.flush()?;
    let mut w = out.create("weights.csv")?;
    formats::write_weights(&mut w, &formats::weight_rows(&fitted.records, &fitted.bag))?;
    w.flush()?;
    out.finish(
        cfg,
        name,
        json!({
            "n_events": seq.len(), "n_actors": seq.n_actors(), "models": specs.len(),
            "converged": fitted.records.len(), "skipped": fitted.skipped.len(),
        }),
    )
}

/// Fits plus the weights stored next to them in `weights.csv`.
pub fn read_bag(fits_path: &Path) -> anyhow::Result<(FitsFile, ModelBag)> {
    let file: FitsFile = formats::read_json(open(fits_path)?).with_context(|| format!("reading {}", fits_path.display()))?;
    let weights_path = fits_path.with_file_name("weights.csv");
    let rows = formats::read_weights(open(&weights_path)?).with_context(|| format!("reading {}", weights_path.display()))?;
    if rows.len() != file.models.len() || rows.iter().zip(&file.models).any(|(r, m)| r.model_id != m.model_id) {
        bail!("{} does not match the models in {}", weights_path.display(), fits_path.display());
    }
    let weights = rows.iter().map(|r| r.weight).collect();
    let bag = ModelBag::with_weights(file.fits(), weights, file.weighting)?;
    Ok((file, bag))
}

fn fits_path(cfg: &RunConfig) -> PathBuf {
    cfg.fits.clone().unwrap_or_else(|| cfg.out_dir.join("fits.json"))
}

fn cmd_trend(cfg: &RunConfig, name: &str) -> anyhow::Result<()> {
    let (file, bag) = read_bag(&fits_path(cfg))?;
    let out = Outputs::claim(cfg, name, &["trend.csv", "trend.json"])?;
    let settings = TrendSettings {
        n_draws: cfg.n_draws,
        grid_size: cfg.grid_size,
        gamma_max: cfg.gamma_max,
        level: cfg.hpd_level,
        seed: cfg.posterior_seed(),
    };
    let trend = pipeline::trend(&bag, &file.kinds, &settings)?;
    let mut w = out.create("trend.csv")?;
    formats::write_trend_csv(&mut w, &trend)?;
    w.flush()?;
    let mut w = out.create("trend.json")?;
    formats::write_json(&mut w, &trend)?;
    w.flush()?;
    out.finish(cfg, name, json!({"models": bag.len(), "weighting": bag.weighting, "n_draws": cfg.n_draws}))
}

/// Plain-text summary of whatever results the output directory holds.
pub fn cmd_report(cfg: &RunConfig, w: &mut impl Write) -> anyhow::Result<()> {
    let fits = fits_path(cfg);
    if !fits.exists() {
        bail!("no fits at {}; run fit-bag first", fits.display());
    }
    let (file, bag) = read_bag(&fits)?;
    writeln!(w, "events: {}  actors: {}  statistics: {}", file.n_events, file.n_actors,
        file.kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "))?;
    writeln!(w, "models: {} converged, {} skipped; weighting: {}", file.models.len(), file.skipped.len(), bag.weighting.as_str())?;
    let ess = 1.0 / bag.weights.iter().map(|x| x * x).sum::<f64>();
    writeln!(w, "effective number of models: {ess:.2}")?;

    let mut order: Vec<usize> = (0..bag.len()).collect();
    order.sort_by(|&a, &b| bag.weights[b].total_cmp(&bag.weights[a]));
    writeln!(w, "top models:")?;
    for &i in order.iter().take(5) {
        let r = &file.models[i];
        let gamma: Vec<String> = r.fit.spec.gamma.iter().map(|g| format!("{g:.3}")).collect();
        writeln!(w, "  #{:<5} w={:.4}  bic={:.2}  {} ({})", r.model_id, bag.weights[i], r.fit.bic,
            r.fit.spec.kind.as_str(), gamma.join(", "))?;
    }

    let trend_path = fits.with_file_name("trend.csv");
    if trend_path.exists() {
        let rows = formats::read_trend_csv(open(&trend_path)?)?;
        writeln!(w, "trend (mode [hpd]):")?;
        for kind in &file.kinds {
            let of_kind: Vec<_> = rows.iter().filter(|r| r.kind == kind.name()).collect();
            let step = (of_kind.len() / 6).max(1);
            for r in of_kind.iter().step_by(step) {
                writeln!(w, "  {:<22} gamma={:<9.3} {:+.4} [{:+.4}, {:+.4}]", r.kind, r.gamma, r.mode, r.hpd_low, r.hpd_high)?;
            }
        }
    }
    Ok(())
}
