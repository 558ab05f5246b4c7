//! Acceptance criteria, one line each. Runs sequentially (no libtest
//! harness) so that the wall-clock limits measure one criterion at a time.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fbcap::cli::{Cli, Command, Format};
use fbcap::commands::{self, execute, render};
use fbcap::parallel::simulate_parallel;
use fbcap_core::feedback::{
    bound_report, chen_yanagi_bound, default_alpha_grid, log_grid, sk_poly, sk_root,
};
use fbcap_core::simulator::{brute_force_conditioning, simulate_transmission, variance_recursion};
use fbcap_core::spectrum::sample_noise_path;
use fbcap_core::waterfill::nonfeedback_capacity;
use fbcap_core::{PsdSpec, QuadratureConfig, SchemeConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn ma1() -> PsdSpec {
    PsdSpec::first_order_ma()
}

fn counterexample() -> Check {
    let outcome = commands::counterexample(None, &quad()).map_err(|e| e.to_string())?;
    let o = &outcome.report.outputs;
    let get = |k: &str| o[k].as_f64().ok_or_else(|| format!("{k} missing"));
    let (c2, x0, rate) = (get("c_2p")?, get("x0")?, get("sk_rate")?);
    ensure!((c2 - 1.0).abs() <= 1e-6, "C(2) = {c2}");
    ensure!(x0 > 0.0 && x0 < 0.5, "x0 = {x0}");
    let residual = sk_poly(1.0, x0).abs();
    ensure!(residual <= 1e-12, "|sk_poly(1, x0)| = {residual:e}");
    ensure!(rate > 1.0, "sk_rate = {rate}");
    ensure!(
        o["violated"].as_bool() == Some(true),
        "violated = {}",
        o["violated"]
    );
    ensure!(
        outcome.exit_code() == 0,
        "exit code {}",
        outcome.exit_code()
    );
    let text = render(&outcome, Format::Text).map_err(|e| e.to_string())?;
    let line = text
        .lines()
        .find(|l| l.starts_with("CONJECTURE VIOLATED"))
        .ok_or("verdict line missing")?;
    Ok(format!(
        "C(2) = {c2:.9}, x0 = {x0:.9}, |f(x0)| = {residual:.1e}, rate = {rate:.6}; \"{line}\""
    ))
}

fn water_level() -> Check {
    let sol = nonfeedback_capacity(&ma1(), 2.0, &quad()).map_err(|e| e.to_string())?;
    ensure!(
        (sol.water_level - 4.0).abs() <= 1e-6,
        "nu = {}",
        sol.water_level
    );
    let mut worst: f64 = 0.0;
    for [theta, _, sx, sy] in sol.spectra_grid(100) {
        let expected = 2.0 * (1.0 - theta.cos());
        worst = worst.max((sx - expected).abs()).max((sy - 4.0).abs());
    }
    ensure!(worst <= 1e-6, "max |S_X - 2(1 - cos)| = {worst:e}");
    Ok(format!(
        "nu = {:.12}, max S_X deviation over 100 points = {worst:.1e}",
        sol.water_level
    ))
}

fn polynomial_anchors() -> Check {
    let (a, b) = (sk_poly(1.0, 0.0), sk_poly(1.0, 0.5));
    ensure!(a == -1.0, "f(0) = {a}");
    ensure!(b == 1.0 / 16.0, "f(1/2) = {b}");
    Ok("f(0) = -1, f(1/2) = 1/16 exactly".into())
}

fn bound_consistency() -> Check {
    let psd = ma1();
    let r = bound_report(&psd, 1.0, &default_alpha_grid(), &quad()).map_err(|e| e.to_string())?;
    let rate = r.sk_rate().ok_or("no feedback rate")?;
    ensure!(
        rate <= r.cp_double && rate <= r.cp_plus_half,
        "rate {rate} above Cover-Pombra"
    );
    ensure!(
        r.cy_curve
            .iter()
            .all(|p| rate <= p.bound1 && rate <= p.bound2),
        "rate above a cy_curve entry"
    );
    ensure!(rate <= r.cy_min, "rate {rate} > cy_min {}", r.cy_min);
    ensure!(
        rate > r.c_2p && r.c_2p == r.conjecture_bound,
        "rate {rate} <= C(2) {}",
        r.c_2p
    );
    ensure!(r.failed_checks().is_empty(), "{:?}", r.failed_checks());

    // the sandwich is a property of every power, not just P = 1
    let grid = log_grid(0.1, 10.0, 12).map_err(|e| e.to_string())?;
    for p in log_grid(0.05, 8.0, 9).map_err(|e| e.to_string())? {
        let r = bound_report(&psd, p, &grid, &quad()).map_err(|e| e.to_string())?;
        ensure!(
            r.failed_checks().is_empty(),
            "P = {p}: {:?}",
            r.failed_checks()
        );
    }

    let (b1, b2) = chen_yanagi_bound(&psd, 1.0, 1.0, &quad()).map_err(|e| e.to_string())?;
    ensure!(
        (b1 - r_cp(&r).0).abs() <= 1e-12 && (b2 - r_cp(&r).1).abs() <= 1e-12,
        "alpha = 1 gives ({b1}, {b2})"
    );
    let (_, b2_at_2) = chen_yanagi_bound(&psd, 1.0, 2.0, &quad()).map_err(|e| e.to_string())?;
    let expected = 1.0 + 0.5 * 1.5f64.log2();
    ensure!(
        (b2_at_2 - expected).abs() <= 1e-6,
        "alpha = 2 bound2 = {b2_at_2}"
    );
    Ok(format!(
        "rate {rate:.6} <= cy_min {:.6} <= C(1)+1/2 {:.6}; rate > C(2) = {:.6}; alpha=2 bound2 = {b2_at_2:.9}",
        r.cy_min, r.cp_plus_half, r.c_2p
    ))
}

fn r_cp(r: &fbcap_core::BoundReport) -> (f64, f64) {
    (r.cp_double, r.cp_plus_half)
}

fn awgn() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p: f64 = rng.random_range(0.01..20.0);
        let n0: f64 = rng.random_range(0.05..10.0);
        let c = nonfeedback_capacity(&PsdSpec::white(n0).unwrap(), p, &quad())
            .map_err(|e| e.to_string())?;
        let expected = 0.5 * (1.0 + p / n0).log2();
        worst = worst.max((c.capacity_bits - expected).abs());
    }
    ensure!(worst <= 1e-9, "capacity error {worst:e}");
    let mut worst_k: f64 = 0.0;
    for p in [0.5, 1.0, 3.0, 10.0] {
        let cfg = SchemeConfig::new(p, 200, 0.5).unwrap();
        let tr =
            variance_recursion(&cfg, &PsdSpec::white(1.0).unwrap()).map_err(|e| e.to_string())?;
        let expected = (1.0 + p).powf(-0.5);
        worst_k = tr
            .steps
            .iter()
            .map(|s| (s.contraction - expected).abs())
            .fold(worst_k, f64::max);
        worst_k = worst_k.max((tr.contraction_estimate - expected).abs());
    }
    ensure!(worst_k <= 1e-6, "contraction error {worst_k:e}");
    Ok(format!(
        "max capacity error {worst:.1e} over 10 pairs, max contraction error {worst_k:.1e}"
    ))
}

fn simulator_theory() -> Check {
    let mut detail = Vec::new();
    for p in [1.0, 3.0] {
        let cfg = SchemeConfig::new(p, 400, 0.5).unwrap().with_burn_in(100);
        let tr = variance_recursion(&cfg, &ma1()).map_err(|e| e.to_string())?;
        let x0 = sk_root(p).map_err(|e| e.to_string())?.x0;
        let rel = (tr.contraction_estimate / x0 - 1.0).abs();
        ensure!(
            rel < 0.01,
            "P = {p}: contraction {} vs x0 {x0}",
            tr.contraction_estimate
        );
        detail.push(format!("P={p}: rel {rel:.1e}"));
    }
    let noises = [
        PsdSpec::white(1.0).unwrap(),
        ma1(),
        PsdSpec::ma(vec![0.7, 0.7], 2.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for p in [0.3, 1.0, 3.0] {
        for noise in &noises {
            for n in 2..=32 {
                let cfg = SchemeConfig::new(p, n, 0.5).unwrap();
                let fast = variance_recursion(&cfg, noise).map_err(|e| e.to_string())?;
                let slow = brute_force_conditioning(&cfg, noise, n).map_err(|e| e.to_string())?;
                ensure!(
                    fast.steps.len() == slow.steps.len(),
                    "length mismatch at n = {n}"
                );
                for (a, b) in fast.steps.iter().zip(&slow.steps) {
                    for d in [
                        a.power - b.power,
                        a.contraction - b.contraction,
                        a.error_variance - b.error_variance,
                        a.log_error_variance - b.log_error_variance,
                    ] {
                        worst = worst.max(d.abs());
                    }
                }
            }
        }
    }
    ensure!(worst <= 1e-9, "recursion vs brute force: {worst:e}");
    detail.push(format!(
        "recursion vs brute force max diff {worst:.1e} (n <= 32)"
    ));
    Ok(detail.join(", "))
}

fn monte_carlo() -> Check {
    let rate = 0.9 * sk_root(1.0).map_err(|e| e.to_string())?.rate_bits;
    let cfg = SchemeConfig::new(1.0, 40, rate).unwrap().with_seed(7);
    let r = simulate_parallel(&cfg, &ma1(), 1000).map_err(|e| e.to_string())?;
    ensure!(r.decode_errors == 0, "{} decoding errors", r.decode_errors);
    ensure!(
        (r.empirical_avg_power - 1.0).abs() <= 0.02,
        "power {}",
        r.empirical_avg_power
    );
    Ok(format!(
        "{} levels, 0/1000 errors, power {:.4}",
        r.pam_levels, r.empirical_avg_power
    ))
}

fn properties() -> Check {
    let psd = ma1();
    let powers: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
    let caps: Vec<f64> = powers
        .iter()
        .map(|&p| nonfeedback_capacity(&psd, p, &quad()).map(|s| s.capacity_bits))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure!(
        caps.windows(2).all(|w| w[1] > w[0]),
        "capacity not increasing"
    );
    let worst_second = caps
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::MIN, f64::max);
    ensure!(worst_second <= 1e-6, "second difference {worst_second:e}");

    let grid = log_grid(1e-3, 1e3, 100).map_err(|e| e.to_string())?;
    let roots: Vec<_> = grid
        .iter()
        .map(|&p| sk_root(p))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure!(
        roots.windows(2).all(|w| w[1].x0 < w[0].x0),
        "x0 not strictly decreasing"
    );
    ensure!(
        roots.windows(2).all(|w| w[1].rate_bits > w[0].rate_bits),
        "rate not strictly increasing"
    );

    let cfg = SchemeConfig::new(1.0, 40, 0.8).unwrap().with_seed(99);
    let a = simulate_transmission(&cfg, &psd, 200).map_err(|e| e.to_string())?;
    let b = simulate_transmission(&cfg, &psd, 200).map_err(|e| e.to_string())?;
    let c = simulate_parallel(&cfg, &psd, 200).map_err(|e| e.to_string())?;
    ensure!(
        format!("{a:?}") == format!("{b:?}") && a == c,
        "monte carlo not reproducible"
    );
    let z1 = sample_noise_path(&psd, 500, 3).map_err(|e| e.to_string())?;
    let z2 = sample_noise_path(&psd, 500, 3).map_err(|e| e.to_string())?;
    ensure!(
        z1.iter().zip(&z2).all(|(x, y)| x.to_bits() == y.to_bits()),
        "noise not reproducible"
    );
    let cli = Cli {
        format: Format::Json,
        tol: 1e-10,
        no_timing: true,
        command: Command::Simulate {
            psd: "paper".into(),
            power: 1.0,
            rate: None,
            horizon: 40,
            burn_in: None,
            trials: 300,
            seed: 7,
            trace_out: None,
        },
    };
    let run = || {
        execute(&cli)
            .and_then(|o| render(&o, Format::Json))
            .map_err(|e| e.to_string())
    };
    ensure!(run()? == run()?, "seeded JSON reports differ");
    Ok(format!("max second difference {worst_second:.1e}, 100-point monotonicity, seeded outputs identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("counterexample", Duration::from_secs(1), counterexample),
        ("water level", Duration::from_secs(1), water_level),
        ("polynomial anchors", Duration::MAX, polynomial_anchors),
        ("bound consistency", Duration::MAX, bound_consistency),
        ("AWGN oracles", Duration::MAX, awgn),
        (
            "simulator vs theory",
            Duration::from_secs(10),
            simulator_theory,
        ),
        ("Monte Carlo", Duration::from_secs(30), monte_carlo),
        ("property suites", Duration::MAX, properties),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|d| {
            if elapsed > *limit {
                Err(format!("took {elapsed:.2?}, limit {limit:?}; {d}"))
            } else {
                Ok(d)
            }
        });
        match result {
            Ok(detail) => println!("criterion {} {name}: PASS [{elapsed:.2?}] {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} {name}: FAIL [{elapsed:.2?}] {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
