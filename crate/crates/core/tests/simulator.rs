use fbcap_core::feedback::sk_root;
use fbcap_core::simulator::{
    brute_force_conditioning, simulate_transmission, variance_recursion, MonteCarloPlan,
};
use fbcap_core::{PsdSpec, SchemeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recursion_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noises = [
        PsdSpec::white(1.0).unwrap(),
        PsdSpec::white(0.4).unwrap(),
        PsdSpec::first_order_ma(),
        PsdSpec::ma(vec![1.0, 1.0], 2.5).unwrap(),
    ];
    for _ in 0..5 {
        let p: f64 = rng.random_range(0.2..5.0);
        let cfg = SchemeConfig::new(p, 32, 0.5).unwrap();
        for noise in &noises {
            let fast = variance_recursion(&cfg, noise).unwrap();
            let slow = brute_force_conditioning(&cfg, noise, 32).unwrap();
            // the scheme is causal, so every prefix n <= 32 is covered
            for (a, b) in fast.steps.iter().zip(&slow.steps) {
                assert!((a.power - b.power).abs() < 1e-9);
                assert!(
                    (a.contraction - b.contraction).abs() < 1e-9,
                    "P = {p}, step {}",
                    a.step
                );
                assert!((a.error_variance - b.error_variance).abs() < 1e-9);
                assert!((a.log_error_variance - b.log_error_variance).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn power_is_exact() {
    for noise in [PsdSpec::first_order_ma(), PsdSpec::white(2.0).unwrap()] {
        let cfg = SchemeConfig::new(1.3, 200, 0.5).unwrap();
        let tr = variance_recursion(&cfg, &noise).unwrap();
        for s in &tr.steps {
            assert!((s.power - 1.3).abs() <= 4.0 * f64::EPSILON);
        }
    }
}

#[test]
fn contraction_tracks_root() {
    for p in [1.0, 3.0] {
        let cfg = SchemeConfig::new(p, 400, 0.5).unwrap().with_burn_in(100);
        let tr = variance_recursion(&cfg, &PsdSpec::first_order_ma()).unwrap();
        let x0 = sk_root(p).unwrap().x0;
        assert!((tr.contraction_estimate / x0 - 1.0).abs() < 0.01);
        for s in &tr.steps[100..] {
            assert!(s.contraction > 0.0 && s.contraction < 1.0);
        }
    }
    let cfg = SchemeConfig::new(1.0, 400, 0.5).unwrap().with_burn_in(100);
    let tr = variance_recursion(&cfg, &PsdSpec::first_order_ma()).unwrap();
    assert!(tr.rate_bits() > 1.0);
    assert!((tr.rate_bits() / sk_root(1.0).unwrap().rate_bits - 1.0).abs() < 0.01);
}

#[test]
fn monte_carlo_error_variance_matches_trace() {
    // n·R = 30 bits keeps the discrete prior variance within 1e-9 of 1/12
    let cfg = SchemeConfig::new(1.0, 10, 3.0).unwrap().with_seed(5);
    let trials = 10_000;
    let plan = MonteCarloPlan::new(&cfg, &PsdSpec::first_order_ma()).unwrap();
    let outcomes: Vec<_> = (0..trials).map(|t| plan.trial(t).unwrap()).collect();
    let terminal: Vec<f64> = outcomes
        .iter()
        .map(|o| *o.squared_errors.last().unwrap())
        .collect();
    let mean = terminal.iter().sum::<f64>() / trials as f64;
    let var = terminal.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    let predicted = plan.trace().terminal_error_variance();
    assert!(
        (mean - predicted).abs() < 3.0 * se,
        "{mean} vs {predicted} (se {se})"
    );
}

#[test]
fn monte_carlo_power() {
    // 1000 trials x 100 steps = 1e5 symbols
    let cfg = SchemeConfig::new(1.0, 100, 0.4).unwrap().with_seed(9);
    let r = simulate_transmission(&cfg, &PsdSpec::first_order_ma(), 1000).unwrap();
    assert!(
        (r.empirical_avg_power - 1.0).abs() < 0.02,
        "{}",
        r.empirical_avg_power
    );
}

#[test]
fn below_and_above_rate() {
    let rate = sk_root(1.0).unwrap().rate_bits;
    let below = SchemeConfig::new(1.0, 40, 0.9 * rate).unwrap().with_seed(7);
    let r = simulate_transmission(&below, &PsdSpec::first_order_ma(), 1000).unwrap();
    assert_eq!(r.decode_errors, 0);

    let above = SchemeConfig::new(1.0, 40, 1.2 * rate).unwrap().with_seed(7);
    let r = simulate_transmission(&above, &PsdSpec::first_order_ma(), 1000).unwrap();
    assert!(r.error_rate > 0.1, "{}", r.error_rate);
}

#[test]
fn seeded_reports_are_identical() {
    let cfg = SchemeConfig::new(1.0, 30, 1.0).unwrap().with_seed(123);
    let a = simulate_transmission(&cfg, &PsdSpec::first_order_ma(), 300).unwrap();
    let b = simulate_transmission(&cfg, &PsdSpec::first_order_ma(), 300).unwrap();
    assert_eq!(a, b);
    let c = simulate_transmission(&cfg.with_seed(124), &PsdSpec::first_order_ma(), 300).unwrap();
    assert_ne!(a.empirical_avg_power, c.empirical_avg_power);
}
