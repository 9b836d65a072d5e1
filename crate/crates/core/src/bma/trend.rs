use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{BmaError, ModelBag, PosteriorDraws};
use crate::stats::{stepwise_column, StatisticKind};

/// Points of the density evaluation grid used for the mode.
pub const KDE_POINTS: usize = 512;

/// Point summary and HPD band of one set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTrend {
    pub kind: StatisticKind,
    pub mode: Vec<f64>,
    pub hpd_low: Vec<f64>,
    pub hpd_high: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Averaged decay of each effect on an even grid of transpired times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTrend {
    pub grid: Vec<f64>,
    pub level: f64,
    pub effects: Vec<EffectTrend>,
    pub intercept: Summary,
}

fn quantile7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, `0.9 · min(sd, IQR/1.34) · n^(-1/5)`, with the
/// usual fallbacks when the spread estimate is zero.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = libm::sqrt(sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0));
    let iqr = quantile7(sorted, 0.75) - quantile7(sorted, 0.25);
    let mut lo = sd.min(iqr / 1.34);
    if !(lo > 0.0) {
        lo = sd;
    }
    if !(lo > 0.0) {
        lo = sorted[0].abs();
    }
    if !(lo > 0.0) {
        lo = 1.0;
    }
    0.9 * lo * libm::pow(n, -0.2)
}

/// Argmax of a Gaussian kernel density over `KDE_POINTS` points spanning
/// the data. Values are linearly binned onto the grid before smoothing.
/// `sorted` must be ascending.
pub fn kde_mode(sorted: &[f64]) -> f64 {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if sorted.len() < 2 || lo == hi {
        return lo;
    }
    let bw = silverman_bandwidth(sorted);
    let g = KDE_POINTS;
    let step = (hi - lo) / (g - 1) as f64;
    let mut bins = vec![0.0; g];
    for &v in sorted {
        let pos = (v - lo) / step;
        let i = (libm::floor(pos) as usize).min(g - 1);
        let frac = pos - i as f64;
        bins[i] += 1.0 - frac;
        if i + 1 < g {
            bins[i + 1] += frac;
        }
    }
    let kernel: Vec<f64> = (0..g)
        .map(|d| {
            let z = d as f64 * step / bw;
            libm::exp(-0.5 * z * z)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for x in 0..g {
        let dens: f64 = bins
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(h, &b)| b * kernel[x.abs_diff(h)])
            .sum();
        if dens > best.0 {
            best = (dens, x);
        }
    }
    lo + best.1 as f64 * step
}

/// Shortest window of `⌈level · n⌉` consecutive sorted values; ties go to
/// the lowest window.
pub fn hpd_interval(sorted: &[f64], level: f64) -> (f64, f64) {
    let n = sorted.len();
    let k = (libm::ceil(level * n as f64 - 1e-9) as usize).clamp(1, n);
    let mut best = (f64::INFINITY, 0);
    for i in 0..=(n - k) {
        let width = sorted[i + k - 1] - sorted[i];
        if width < best.0 {
            best = (width, i);
        }
    }
    (sorted[best.1], sorted[best.1 + k - 1])
}

/// Mode, HPD band and mean of `values` (sorted in place). If the density
/// mode falls outside the shortest window, the band is widened to reach it.
pub fn summarize(values: &mut [f64], level: f64) -> Summary {
    values.sort_by(f64::total_cmp);
    let mode = kde_mode(values);
    let (lo, hi) = hpd_interval(values, level);
    Summary {
        mode,
        hpd_low: lo.min(mode),
        hpd_high: hi.max(mode),
        mean: values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Read each effect's decay off the draws on `grid_size` evenly spaced
/// points of `[0, gamma_max]`.
///
/// At transpired time `γ`, a draw contributes the coefficient of the
/// interval containing `γ` under its own model's boundaries, or 0 when `γ`
/// lies past that model's horizon or the model lacks the effect. The
/// intercept is summarized from the raw draws.
pub fn extract_trend(
    draws: &PosteriorDraws,
    bag: &ModelBag,
    kinds: &[StatisticKind],
    grid_size: usize,
    gamma_max: f64,
    level: f64,
) -> Result<PosteriorTrend, BmaError> {
    if grid_size < 2 {
        return Err(BmaError::GridSize(grid_size));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(BmaError::Level(level));
    }
    if draws.len() < 10 {
        return Err(BmaError::TooFewDraws {
            gamma: 0.0,
            n: draws.len(),
        });
    }
    let grid: Vec<f64> = (0..grid_size)
        .map(|g| gamma_max * g as f64 / (grid_size - 1) as f64)
        .collect();

    let mut values = vec![0.0; draws.len()];
    let mut effects = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut trend = EffectTrend {
            kind,
            mode: Vec::with_capacity(grid_size),
            hpd_low: Vec::with_capacity(grid_size),
            hpd_high: Vec::with_capacity(grid_size),
            mean: Vec::with_capacity(grid_size),
        };
        for &gamma in &grid {
            for (v, (&q, beta)) in values.iter_mut().zip(draws.models.iter().zip(&draws.betas)) {
                let fit = &bag.fits[q];
                *v = match (fit.kinds.iter().position(|&k| k == kind), fit.spec.locate(gamma)) {
                    (Some(ki), Some(k)) => beta[stepwise_column(ki, k, fit.spec.k())],
                    _ => 0.0,
                };
            }
            let s = summarize(&mut values, level);
            trend.mode.push(s.mode);
            trend.hpd_low.push(s.hpd_low);
            trend.hpd_high.push(s.hpd_high);
            trend.mean.push(s.mean);
        }
        effects.push(trend);
    }

    let mut intercepts: Vec<f64> = draws.betas.iter().map(|b| b[0]).collect();
    let intercept = summarize(&mut intercepts, level);
    Ok(PosteriorTrend {
        grid,
        level,
        effects,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hpd_picks_shortest_window() {
        let v = [0.0, 1.0, 1.1, 1.2, 1.3, 5.0];
        assert_eq!(hpd_interval(&v, 0.6), (1.0, 1.3));
        assert_eq!(hpd_interval(&v, 0.999), (0.0, 5.0));
    }

    #[test]
    fn constant_values_have_zero_width() {
        let mut v = vec![2.5; 40];
        let s = summarize(&mut v, 0.95);
        assert_eq!((s.mode, s.hpd_low, s.hpd_high), (2.5, 2.5, 2.5));
    }

    #[test]
    fn mode_finds_the_heavier_cluster() {
        let mut v: Vec<f64> = (0..300).map(|i| 1.0 + 0.001 * i as f64).collect();
        v.extend((0..100).map(|i| 4.0 + 0.001 * i as f64));
        v.sort_by(f64::total_cmp);
        let m = kde_mode(&v);
        assert!((m - 1.15).abs() < 0.2, "mode {m}");
    }

    #[test]
    fn bandwidth_matches_rule() {
        // sd = 1.2909944, IQR/1.34 = 1.1194; 0.9 · 1.1194 · 4^(-1/5)
        let bw = silverman_bandwidth(&[1.0, 2.0, 3.0, 4.0]);
        assert!((bw - 0.9 * (1.5 / 1.34) * libm::pow(4.0, -0.2)).abs() < 1e-12);
    }
}
