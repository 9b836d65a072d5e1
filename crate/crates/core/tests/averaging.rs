use remdecay_core::bma::{
    bic_weights, extract_trend, model_waic, sample_posterior, waic_from_draws, weights_from_waic,
    ModelBag, PosteriorDraws, WaicConfig, WeightingKind,
};
use remdecay_core::events::{Event, EventSequence, RiskSet};
use remdecay_core::intervals::{IntervalKind, IntervalSpec};
use remdecay_core::likelihood::{Design, ModelFit};
use remdecay_core::stats::{compute_stepwise_stats, StatTensor, StatisticKind};

fn fit_with(spec: IntervalSpec, beta: Vec<f64>, cov: Vec<f64>, bic: f64) -> ModelFit {
    let p = beta.len();
    ModelFit {
        kinds: vec![StatisticKind::Inertia],
        labels: (0..p).map(|i| format!("c{i}")).collect(),
        spec,
        beta,
        cov,
        loglik: -bic / 2.0,
        n_params: p,
        n_events: 100,
        bic,
        waic: None,
        converged: true,
        iterations: 1,
        max_grad: 0.0,
        warnings: vec![],
    }
}

fn bic_fit(bic: f64) -> ModelFit {
    fit_with(IntervalSpec::single(10.0).unwrap(), vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0], bic)
}

#[test]
fn bic_weight_examples() {
    assert_eq!(bic_weights(&[bic_fit(5.0)]).unwrap(), [1.0]);
    let w = bic_weights(&[bic_fit(3.0), bic_fit(3.0), bic_fit(3.0), bic_fit(3.0)]).unwrap();
    assert_eq!(w, [0.25; 4]);
    let w = bic_weights(&[bic_fit(100.0), bic_fit(102.0)]).unwrap();
    let e = std::f64::consts::E;
    assert!((w[0] - e / (e + 1.0)).abs() < 1e-12);
    assert!((w[1] - 1.0 / (e + 1.0)).abs() < 1e-12);
}

#[test]
fn bic_weights_sum_shift_and_order() {
    let bics = [1234.5, 1230.1, 1240.0, 1229.9, 1233.3];
    let fits: Vec<_> = bics.iter().map(|&b| bic_fit(b)).collect();
    let w = bic_weights(&fits).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let shifted: Vec<_> = bics.iter().map(|&b| bic_fit(b + 5000.0)).collect();
    for (a, b) in w.iter().zip(bic_weights(&shifted).unwrap()) {
        assert!((a - b).abs() < 1e-12);
    }
    let mut by_bic: Vec<usize> = (0..5).collect();
    by_bic.sort_by(|&a, &b| bics[a].total_cmp(&bics[b]));
    let mut by_weight: Vec<usize> = (0..5).collect();
    by_weight.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    assert_eq!(by_bic, by_weight);
}

#[test]
fn non_converged_fits_are_excluded() {
    let mut bad = bic_fit(1.0);
    bad.converged = false;
    let w = bic_weights(&[bad.clone(), bic_fit(10.0)]).unwrap();
    assert_eq!(w, [0.0, 1.0]);
    assert!(bic_weights(&[bad]).is_err());
}

#[test]
fn waic_weights_follow_elpd() {
    let mut fits: Vec<_> = (0..3).map(|_| bic_fit(0.0)).collect();
    for (f, elpd) in fits.iter_mut().zip([-10.0, -11.0, -10.5]) {
        f.waic = Some(-2.0 * elpd);
    }
    let w = weights_from_waic(&fits).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let z: f64 = [0.0, -1.0, -0.5f64].iter().map(|x| x.exp()).sum();
    assert!((w[1] - (-1.0f64).exp() / z).abs() < 1e-12);
    for f in &mut fits {
        f.waic = f.waic.map(|x| x + 777.0);
    }
    for (a, b) in w.iter().zip(weights_from_waic(&fits).unwrap()) {
        assert!((a - b).abs() < 1e-12);
    }
}

/// Twelve events among three actors with a two-interval inertia model.
fn micro() -> (EventSequence, RiskSet, StatTensor) {
    let raw = [
        (0, 1, 0.7), (1, 0, 1.1), (0, 1, 2.0), (2, 0, 2.4), (0, 2, 3.9), (0, 1, 4.2),
        (1, 2, 5.0), (2, 1, 5.3), (0, 1, 6.6), (1, 0, 7.0), (2, 0, 8.1), (0, 1, 8.5),
    ];
    let events = raw.iter().map(|&(s, r, t)| Event::new(s, r, t)).collect();
    let seq = EventSequence::new(events, 3, 0.0).unwrap();
    let rs = RiskSet::new(3).unwrap();
    let spec = IntervalSpec::new(IntervalKind::Equal, vec![1.5, 4.0]).unwrap();
    let stats = compute_stepwise_stats(&seq, &rs, &[StatisticKind::Inertia], &spec).unwrap();
    (seq, rs, stats)
}

/// Log density of event `m` computed directly from its definition.
fn event_log_density(seq: &EventSequence, rs: &RiskSet, stats: &StatTensor, m: usize, beta: &[f64]) -> f64 {
    let e = seq.events()[m];
    let prev = if m == 0 { seq.t0() } else { seq.events()[m - 1].time };
    let eta = |d: usize| -> f64 { (0..beta.len()).map(|p| stats.get(m, d, p) * beta[p]).sum() };
    let obs = rs.index_of(e.sender, e.receiver).unwrap();
    let total: f64 = (0..rs.len()).map(|d| eta(d).exp()).sum();
    eta(obs) - (e.time - prev) * total
}

fn hand_waic(seq: &EventSequence, rs: &RiskSet, stats: &StatTensor, draws: &[Vec<f64>], l: usize, a: usize) -> (f64, f64) {
    let m = seq.len();
    let b = draws.len() as f64;
    let mut lpd = 0.0;
    let mut pw = 0.0;
    for i in l..=(m - a) {
        let logp: Vec<f64> = draws
            .iter()
            .map(|beta| (i..i + a).map(|r| event_log_density(seq, rs, stats, r, beta)).sum())
            .collect();
        lpd += (logp.iter().map(|x| x.exp()).sum::<f64>() / b).ln();
        let mean = logp.iter().sum::<f64>() / b;
        pw += logp.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    }
    (lpd, pw)
}

#[test]
fn waic_matches_hand_enumeration() {
    let (seq, rs, stats) = micro();
    let d = Design::new(&stats, &seq, &rs).unwrap();
    let draws = vec![vec![-1.2, 0.4, 0.1], vec![-0.9, 0.8, -0.2], vec![-1.5, 0.1, 0.3]];
    for a in [1, 2] {
        let cfg = WaicConfig {
            burn_in: 5,
            steps_ahead: a,
            draws: 3,
            seed: 0,
        };
        let got = waic_from_draws(&d, &draws, &cfg).unwrap();
        let (lpd, pw) = hand_waic(&seq, &rs, &stats, &draws, 5, a);
        assert!((got.lpd - lpd).abs() < 1e-10, "A={a}: {} vs {lpd}", got.lpd);
        assert!((got.p_waic - pw).abs() < 1e-10);
        assert!((got.elpd - (lpd - pw)).abs() < 1e-10);
        assert_eq!(got.waic, -2.0 * got.elpd);
    }
}

#[test]
fn identical_draws_have_no_penalty() {
    let (seq, rs, stats) = micro();
    let d = Design::new(&stats, &seq, &rs).unwrap();
    let cfg = WaicConfig {
        burn_in: 5,
        steps_ahead: 1,
        draws: 4,
        seed: 9,
    };
    let spec = IntervalSpec::new(IntervalKind::Equal, vec![1.5, 4.0]).unwrap();
    let fit = fit_with(spec, vec![-1.0, 0.5, 0.2], vec![0.0; 9], 0.0);
    let res = model_waic(&d, &fit, &cfg, 0).unwrap();
    assert_eq!(res.p_waic, 0.0);
    let (lpd, _) = hand_waic(&seq, &rs, &stats, &[fit.beta.clone(), fit.beta.clone()], 5, 1);
    assert!((res.lpd - lpd).abs() < 1e-10);
}

#[test]
fn identical_models_get_equal_waic_weights() {
    let (seq, rs, stats) = micro();
    let d = Design::new(&stats, &seq, &rs).unwrap();
    let cfg = WaicConfig {
        burn_in: 5,
        steps_ahead: 1,
        draws: 50,
        seed: 4,
    };
    let spec = IntervalSpec::new(IntervalKind::Equal, vec![1.5, 4.0]).unwrap();
    let cov = vec![0.04, 0.0, 0.0, 0.0, 0.09, 0.01, 0.0, 0.01, 0.09];
    let mut fits = vec![fit_with(spec.clone(), vec![-1.0, 0.5, 0.2], cov.clone(), 0.0); 2];
    for f in &mut fits {
        // same draw stream for both
        f.waic = Some(model_waic(&d, f, &cfg, 0).unwrap().waic);
    }
    let w = weights_from_waic(&fits).unwrap();
    assert!((w[0] - 0.5).abs() < 1e-10 && (w[1] - 0.5).abs() < 1e-10);
}

#[test]
fn waic_config_validation() {
    let (seq, rs, stats) = micro();
    let d = Design::new(&stats, &seq, &rs).unwrap();
    let draws = vec![vec![0.0; 3]; 2];
    let bad = WaicConfig {
        burn_in: 11,
        steps_ahead: 1,
        draws: 2,
        seed: 0,
    };
    assert!(waic_from_draws(&d, &draws, &bad).is_err());
    let one_draw = WaicConfig {
        burn_in: 5,
        steps_ahead: 1,
        draws: 1,
        seed: 0,
    };
    assert!(waic_from_draws(&d, &draws[..1], &one_draw).is_err());
}

fn two_model_bag(weights: Vec<f64>) -> ModelBag {
    let a = fit_with(IntervalSpec::single(10.0).unwrap(), vec![0.0, 1.0], vec![0.01, 0.0, 0.0, 0.01], 0.0);
    let b = fit_with(IntervalSpec::single(10.0).unwrap(), vec![5.0, -1.0], vec![0.01, 0.0, 0.0, 0.01], 0.0);
    ModelBag::with_weights(vec![a, b], weights, WeightingKind::Bic).unwrap()
}

#[test]
fn zero_weight_model_never_drawn() {
    let draws = sample_posterior(&two_model_bag(vec![1.0, 0.0]), 100_000, 1).unwrap();
    assert!(draws.models.iter().all(|&q| q == 0));
}

#[test]
fn draw_frequencies_match_weights() {
    let n = 100_000;
    for w in [0.3, 0.5, 0.93] {
        let draws = sample_posterior(&two_model_bag(vec![w, 1.0 - w]), n, 2).unwrap();
        let freq = draws.models.iter().filter(|&&q| q == 0).count() as f64 / n as f64;
        assert!((freq - w).abs() < 4.0 * (w * (1.0 - w) / n as f64).sqrt(), "w={w}: {freq}");
    }
}

#[test]
fn sampling_is_deterministic() {
    let bag = two_model_bag(vec![0.4, 0.6]);
    assert_eq!(sample_posterior(&bag, 3000, 5).unwrap(), sample_posterior(&bag, 3000, 5).unwrap());
    assert_ne!(sample_posterior(&bag, 3000, 5).unwrap(), sample_posterior(&bag, 3000, 6).unwrap());
}

fn step_bag() -> ModelBag {
    let spec = IntervalSpec::new(IntervalKind::Increasing, vec![2.0, 5.0, 9.0]).unwrap();
    let fit = fit_with(spec, vec![-3.0, 0.9, 0.4, 0.1], vec![0.0; 16], 0.0);
    ModelBag::new(vec![fit], WeightingKind::Bic).unwrap()
}

#[test]
fn degenerate_bag_draws_equal_estimate_and_reproduce_steps() {
    let bag = step_bag();
    let draws = sample_posterior(&bag, 200, 3).unwrap();
    assert!(draws.betas.iter().all(|b| b == &bag.fits[0].beta));
    let trend = extract_trend(&draws, &bag, &[StatisticKind::Inertia], 23, 11.0, 0.95).unwrap();
    for (g, &gamma) in trend.grid.iter().enumerate() {
        let want = match gamma {
            x if x <= 2.0 => 0.9,
            x if x <= 5.0 => 0.4,
            x if x <= 9.0 => 0.1,
            _ => 0.0,
        };
        let e = &trend.effects[0];
        assert_eq!((e.mode[g], e.hpd_low[g], e.hpd_high[g]), (want, want, want), "gamma {gamma}");
    }
    assert_eq!(trend.intercept.mode, -3.0);
    assert_eq!(trend.grid.len(), 23);
    assert_eq!(trend.grid[22], 11.0);
}

#[test]
fn constant_coefficient_across_models() {
    let c = 0.35;
    let fits: Vec<_> = [vec![3.0, 10.0], vec![1.0, 4.0, 10.0]]
        .into_iter()
        .map(|g| {
            let k = g.len();
            let mut beta = vec![-2.0];
            beta.extend(std::iter::repeat(c).take(k));
            let p = beta.len();
            fit_with(IntervalSpec::new(IntervalKind::Equal, g).unwrap(), beta, vec![0.0; p * p], 0.0)
        })
        .collect();
    let bag = ModelBag::with_weights(fits, vec![0.5, 0.5], WeightingKind::Waic).unwrap();
    let draws = sample_posterior(&bag, 500, 8).unwrap();
    let trend = extract_trend(&draws, &bag, &[StatisticKind::Inertia], 50, 10.0, 0.95).unwrap();
    let e = &trend.effects[0];
    assert!(e.mode.iter().all(|&m| m == c));
    assert!(e.hpd_low.iter().zip(&e.hpd_high).all(|(l, h)| l == h));
}

fn noisy_bag() -> ModelBag {
    let a = fit_with(
        IntervalSpec::new(IntervalKind::Increasing, vec![1.0, 4.0, 10.0]).unwrap(),
        vec![-3.0, 0.8, 0.3, 0.05],
        vec![0.01, 0.0, 0.0, 0.0, 0.0, 0.02, 0.005, 0.0, 0.0, 0.005, 0.01, 0.0, 0.0, 0.0, 0.0, 0.004],
        0.0,
    );
    let b = fit_with(
        IntervalSpec::new(IntervalKind::Decreasing, vec![5.0, 8.0]).unwrap(),
        vec![-3.1, 0.6, 0.1],
        vec![0.01, 0.0, 0.0, 0.0, 0.03, 0.0, 0.0, 0.0, 0.01],
        0.0,
    );
    ModelBag::with_weights(vec![a, b], vec![0.6, 0.4], WeightingKind::Waic).unwrap()
}

#[test]
fn trend_invariants() {
    let bag = noisy_bag();
    let draws = sample_posterior(&bag, 4000, 11).unwrap();
    let trend = extract_trend(&draws, &bag, &[StatisticKind::Inertia], 40, 8.0, 0.95).unwrap();
    let e = &trend.effects[0];
    for g in 0..40 {
        assert!(e.hpd_low[g] <= e.mode[g] && e.mode[g] <= e.hpd_high[g]);
        let inside = draws
            .models
            .iter()
            .zip(&draws.betas)
            .filter(|(&q, beta)| {
                let fit = &bag.fits[q];
                let v = fit.spec.locate(trend.grid[g]).map_or(0.0, |k| beta[1 + k]);
                e.hpd_low[g] <= v && v <= e.hpd_high[g]
            })
            .count() as f64
            / draws.len() as f64;
        assert!((0.94..=0.96).contains(&inside), "gamma {}: {inside}", trend.grid[g]);
    }

    // reversing the draws changes nothing
    let reversed = PosteriorDraws {
        models: draws.models.iter().rev().copied().collect(),
        betas: draws.betas.iter().rev().cloned().collect(),
    };
    let again = extract_trend(&reversed, &bag, &[StatisticKind::Inertia], 40, 8.0, 0.95).unwrap();
    assert_eq!(trend, again);
}

#[test]
fn trend_rejects_bad_requests() {
    let bag = step_bag();
    let few = sample_posterior(&bag, 9, 0).unwrap();
    assert!(extract_trend(&few, &bag, &[StatisticKind::Inertia], 10, 5.0, 0.95).is_err());
    let ok = sample_posterior(&bag, 20, 0).unwrap();
    assert!(extract_trend(&ok, &bag, &[StatisticKind::Inertia], 1, 5.0, 0.95).is_err());
}
