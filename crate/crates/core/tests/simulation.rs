use remdecay_core::decay::DecayFn;
use remdecay_core::events::{EventSequence, RiskSet};
use remdecay_core::intervals::{IntervalKind, IntervalSpec};
use remdecay_core::likelihood::{fit_mle, Design, FitOptions};
use remdecay_core::simulate::{simulate, Effect, SimConfig, SimError, StopRule};
use remdecay_core::stats::{compute_stepwise_stats, StatisticKind};

fn config(n_actors: usize, beta0: f64, effects: Vec<Effect>, n_events: usize, seed: u64) -> SimConfig {
    SimConfig {
        n_actors,
        beta0,
        effects,
        horizon: 60.0,
        stop: StopRule::Events(n_events),
        seed,
        t0: 0.0,
    }
}

fn inertia(decay: DecayFn) -> Vec<Effect> {
    vec![Effect {
        kind: StatisticKind::Inertia,
        decay,
    }]
}

#[test]
fn intercept_only_is_homogeneous_poisson() {
    let zero = DecayFn::stepwise(IntervalSpec::single(60.0).unwrap(), vec![0.0]).unwrap();
    let cfg = config(10, 0.01f64.ln(), inertia(zero), 5000, 1);
    let seq = simulate(&cfg).unwrap();
    let mean_gap = seq.end_time() / seq.len() as f64;
    let expected = 1.0 / 0.9;
    let sd = expected / (seq.len() as f64).sqrt();
    assert!((mean_gap - expected).abs() < 3.0 * sd, "mean gap {mean_gap}");
}

#[test]
fn output_passes_validation() {
    let cfg = config(6, 0.03f64.ln(), inertia(DecayFn::exponential(5.0, 0.3).unwrap()), 800, 2);
    let seq = simulate(&cfg).unwrap();
    let again = EventSequence::new(seq.events().to_vec(), 6, 0.0).unwrap();
    assert_eq!(again, seq);
    assert!(seq.events().windows(2).all(|w| w[0].time < w[1].time));
    assert!(seq.events().iter().all(|e| e.sender != e.receiver));
}

#[test]
fn time_stop_respected() {
    let mut cfg = config(4, 0.1f64.ln(), vec![], 1, 3);
    cfg.stop = StopRule::Time(200.0);
    let seq = simulate(&cfg).unwrap();
    assert!(seq.end_time() <= 200.0);
    // 12 dyads at rate 0.1 for 200 time units: 240 expected
    assert!((seq.len() as f64 - 240.0).abs() < 5.0 * 240f64.sqrt());
}

#[test]
fn negative_decay_is_rejected() {
    let neg = DecayFn::stepwise(IntervalSpec::single(10.0).unwrap(), vec![-0.2]).unwrap();
    let cfg = config(4, -3.0, inertia(neg), 50, 4);
    assert!(matches!(simulate(&cfg), Err(SimError::Stats(_))));
}

fn fit_inertia(seq: &EventSequence, n: usize, spec: &IntervalSpec) -> (Vec<f64>, Vec<f64>) {
    let rs = RiskSet::new(n).unwrap();
    let stats = compute_stepwise_stats(seq, &rs, &[StatisticKind::Inertia], spec).unwrap();
    let d = Design::new(&stats, seq, &rs).unwrap();
    let mle = fit_mle(&d, &FitOptions::default()).unwrap();
    let p = mle.beta.len();
    let se = (0..p).map(|i| mle.cov[i * p + i].sqrt()).collect();
    (mle.beta, se)
}

#[test]
fn exponential_inertia_gives_decreasing_steps() {
    let spec = IntervalSpec::new(IntervalKind::Increasing, vec![5.0, 15.0, 40.0]).unwrap();
    let mut decreasing = 0;
    for seed in 0..20 {
        let mut cfg = config(5, 0.05f64.ln(), inertia(DecayFn::weibull(10.0, 1.0, 0.2).unwrap()), 1500, 100 + seed);
        cfg.horizon = 40.0;
        let seq = simulate(&cfg).unwrap();
        let (beta, _) = fit_inertia(&seq, 5, &spec);
        if beta[1] > beta[3] {
            decreasing += 1;
        }
    }
    assert!(decreasing >= 18, "{decreasing}/20");
}

#[test]
fn constant_decay_recovered_by_single_interval() {
    let c = 0.1;
    let spec = IntervalSpec::single(30.0).unwrap();
    let mut within = 0;
    for seed in 0..10 {
        let mut cfg = config(5, 0.03f64.ln(), inertia(DecayFn::stepwise(spec.clone(), vec![c]).unwrap()), 1500, 200 + seed);
        cfg.horizon = 30.0;
        let seq = simulate(&cfg).unwrap();
        let (beta, se) = fit_inertia(&seq, 5, &spec);
        if (beta[1] - c).abs() <= 3.0 * se[1] {
            within += 1;
        }
    }
    assert!(within > 5, "{within}/10");
}
