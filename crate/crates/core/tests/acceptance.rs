//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use delayq::analysis::{self, conservation_check, ClassifyConfig, Regime, SimConfig};
use delayq::dde::{History, IntegrationConfig};
use delayq::models::{self, ModelKind, ModelParams};
use delayq::stability::{self, PerturbationQuery};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(kind: ModelKind, lambda: f64, mu: f64, delta: f64, horizon: f64) -> (analysis::StabilityVerdict, Duration) {
    let p = ModelParams::new(lambda, mu, delta).unwrap();
    let start = Instant::now();
    let traj = models::simulate(kind, &p, models::default_histories(&p), horizon, None).unwrap();
    let v = analysis::classify_stability(&traj, &ClassifyConfig::for_params(&p)).unwrap();
    (v, start.elapsed())
}

fn describe(delta: f64, v: &analysis::StabilityVerdict, took: Duration) -> String {
    format!("delta {delta}: {} (amplitude {:.3e}, {:.0?})", v.regime, v.amplitude, took)
}

/// Independent bisection oracle for the moving-average threshold: uniform
/// scan of `sin(d w) + 2 mu d w / lambda` on `(a, b)` and plain bisection.
fn ma_root_oracle(lambda: f64, mu: f64, a: f64, b: f64) -> Option<f64> {
    let f = |d: f64| {
        let w = (lambda / d - mu * mu).sqrt();
        (d * w).sin() + 2.0 * mu * d / lambda * w
    };
    let n = 20_000;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let i = xs.windows(2).position(|w| f(w[0]) * f(w[1]) < 0.0)?;
    let (mut lo, mut hi) = (xs[i], xs[i + 1]);
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if f(lo) * f(m) <= 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    Some(0.5 * (lo + hi))
}

fn c1_constant_threshold() -> Outcome {
    let start = Instant::now();
    let p = stability::critical_delay_constant(10.0, 1.0).unwrap().unwrap();
    let took = start.elapsed();
    let msg = format!("delta_cr(10, 1) = {:.6} in {:?}", p.delta_cr, took);
    if (0.3607..=0.3627).contains(&p.delta_cr) && took < Duration::from_millis(1) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_constant_regimes_moderate_load() -> Outcome {
    let (lo, t_lo) = verdict(ModelKind::ConstantDelay, 10.0, 1.0, 0.34, 200.0);
    let (hi, t_hi) = verdict(ModelKind::ConstantDelay, 10.0, 1.0, 0.40, 200.0);
    let msg = format!("{}; {}", describe(0.34, &lo, t_lo), describe(0.40, &hi, t_hi));
    let ok = lo.regime == Regime::Synchronized
        && hi.regime == Regime::Oscillatory
        && t_lo < Duration::from_secs(1)
        && t_hi < Duration::from_secs(1);
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_constant_regimes_heavy_load() -> Outcome {
    let (lo, t_lo) = verdict(ModelKind::ConstantDelay, 100.0, 5.0, 0.02, 100.0);
    let (hi, t_hi) = verdict(ModelKind::ConstantDelay, 100.0, 5.0, 0.05, 100.0);
    let th = stability::critical_delay_constant(100.0, 5.0).unwrap().unwrap().delta_cr;
    let msg = format!("{}; {}; delta_cr = {th:.6}", describe(0.02, &lo, t_lo), describe(0.05, &hi, t_hi));
    if lo.regime == Regime::Synchronized && hi.regime == Regime::Oscillatory && th > 0.02 && th < 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_ma_regimes() -> Outcome {
    let (lo, t_lo) = verdict(ModelKind::MovingAverage, 10.0, 1.0, 2.0, 300.0);
    let (hi, t_hi) = verdict(ModelKind::MovingAverage, 10.0, 1.0, 4.0, 300.0);
    let first = stability::critical_delay_ma(10.0, 1.0, None).unwrap()[0].delta_cr;
    let oracle = ma_root_oracle(10.0, 1.0, 2.0, 2.2).unwrap_or(f64::NAN);
    let msg = format!(
        "{} [growing: {}]; {}; first root {first:.6} (oracle {oracle:.6})",
        describe(2.0, &lo, t_lo),
        lo.growing,
        describe(4.0, &hi, t_hi)
    );
    let ok = lo.regime == Regime::Synchronized
        && hi.regime == Regime::Oscillatory
        && first > 2.0
        && first < 2.2
        && (first - oracle).abs() < 1e-9;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_extraneous_root() -> Outcome {
    let cands = stability::ma_candidates(10.0, 1.0, None).unwrap();
    let Some(c) = cands.iter().find(|c| (c.delta - 4.0).abs() < 0.1) else {
        return Err("no candidate near delta = 4".into());
    };
    let omitted = stability::critical_delay_ma(10.0, 1.0, None)
        .unwrap()
        .iter()
        .all(|p| (p.delta_cr - c.delta).abs() > 1e-6);
    let msg = format!(
        "candidate delta = {:.6}, cos gap {:.4}, sin gap {:.1e}, validated {}",
        c.delta, c.cos_gap, c.sin_gap, c.validated
    );
    if !c.validated && c.cos_gap > 0.3 && omitted {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for kind in [ModelKind::ConstantDelay, ModelKind::MovingAverage] {
        for _ in 0..10 {
            let lambda = rng.random_range(2.0..=100.0);
            let mu = rng.random_range(0.5..=5.0);
            let delta = rng.random_range(0.01..=2.0);
            let p = ModelParams::new(lambda, mu, delta).unwrap();
            let q = p.equilibrium();
            let phi = (q * rng.random_range(0.8..1.2), q * rng.random_range(0.8..1.2));
            let traj = models::simulate(kind, &p, phi, 50.0, None).unwrap();
            worst = worst.max(conservation_check(&traj, &p));
        }
    }
    let msg = format!("20 random scenarios, max |s - s_exact| = {worst:.3e}");
    if worst < 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_residuals() -> Outcome {
    let (mut worst_c, mut worst_ma, mut n_c, mut n_ma) = (0.0f64, 0.0f64, 0, 0);
    for mu in [0.5, 1.0] {
        for i in 0..20 {
            let lambda = 2.0 * mu + 0.5 + (100.0 - 2.0 * mu - 0.5) * i as f64 / 19.0;
            if let Some(p) = stability::critical_delay_constant(lambda, mu).unwrap() {
                let r = Complex64::new(0.0, p.omega);
                worst_c = worst_c.max(stability::characteristic_residual_constant(r, lambda, mu, p.delta_cr).norm());
                n_c += 1;
            }
            for p in stability::critical_delay_ma(lambda, mu, None).unwrap() {
                let r = Complex64::new(0.0, p.omega);
                worst_ma = worst_ma.max(stability::characteristic_residual_ma(r, lambda, mu, p.delta_cr).norm());
                n_ma += 1;
            }
        }
    }
    let msg = format!("constant: {n_c} points, max |R| {worst_c:.2e}; moving-average: {n_ma} points, max |R| {worst_ma:.2e}");
    if worst_c < 1e-9 && worst_ma < 1e-8 && n_c == 40 && n_ma > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_crossing_direction() -> Outcome {
    let eps = 1e-3;
    let mut parts = Vec::new();
    let mut ok = true;
    for (lambda, mu) in [(10.0, 1.0), (100.0, 5.0), (20.0, 2.0)] {
        let p = stability::critical_delay_constant(lambda, mu).unwrap().unwrap();
        let seed = Complex64::new(0.0, p.omega);
        for sign in [1.0, -1.0] {
            let root = match stability::root_track(ModelKind::ConstantDelay, lambda, mu, p.delta_cr + sign * eps, seed) {
                Ok(r) => r,
                Err(e) => return Err(format!("({lambda}, {mu}): {e}")),
            };
            let q = PerturbationQuery { delta0: p.delta_cr, delta1: sign * eps, omega: p.omega };
            let r2 = stability::r2_constant(&q, lambda, mu);
            ok &= root.re.signum() == r2.signum() && root.re.signum() == sign;
            parts.push(format!("({lambda},{mu},{:+}) Re r {:+.3e} r2 {:+.3e}", sign * eps, root.re, r2));
        }
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_monotone_curve() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for mu in [0.5, 1.0] {
        let curve = stability::hopf_curve(ModelKind::ConstantDelay, mu, 2.0 * mu * 1.01, 100.0, 50).unwrap();
        let decreasing = curve.windows(2).all(|w| w[1].delta_cr < w[0].delta_cr);
        ok &= curve.len() == 50 && decreasing;
        parts.push(format!(
            "mu {mu}: {} points, delta_cr {:.4} -> {:.4}, strictly decreasing {decreasing}",
            curve.len(),
            curve[0].delta_cr,
            curve[curve.len() - 1].delta_cr
        ));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_symmetry_and_order() -> Outcome {
    let mut manifold = 0.0f64;
    let mut swapped = true;
    for (kind, delta) in [(ModelKind::ConstantDelay, 0.4), (ModelKind::MovingAverage, 4.0)] {
        let p = ModelParams::new(10.0, 1.0, delta).unwrap();
        // identical, non-constant histories
        let hist = History::sampled(delta, vec![-delta, -delta / 3.0, 0.0], vec![vec![2.0, 2.0], vec![8.0, 8.0], vec![6.0, 6.0]]).unwrap();
        let traj = models::simulate_with_history(kind, &p, &hist, &IntegrationConfig::new(0.01, 100.0)).unwrap();
        manifold = manifold.max(traj.nodes().map(|(_, x)| (x[0] - x[1]).abs()).fold(0.0, f64::max));

        let a = models::simulate(kind, &p, (5.5, 4.5), 100.0, None).unwrap();
        let b = models::simulate(kind, &p, (4.5, 5.5), 100.0, None).unwrap();
        swapped &= a.nodes().zip(b.nodes()).all(|((_, x), (_, y))| x[0] == y[1] && x[1] == y[0]);
    }

    // symmetric constant histories: q(t) = 5 + (c - 5) e^{-t} exactly
    let p = ModelParams::new(10.0, 1.0, 0.4).unwrap();
    let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let traj = models::simulate(ModelKind::ConstantDelay, &p, (0.0, 0.0), 10.0, Some(h)).unwrap();
            traj.nodes().map(|(t, x)| (x[0] - 5.0 * (1.0 - (-t).exp())).abs()).fold(0.0, f64::max)
        })
        .collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let fourth = ratios.iter().all(|r| (13.0..=19.0).contains(r));
    let msg = format!("max |q1 - q2| {manifold:.1e}, swap exact {swapped}, error ratios {ratios:.2?}");
    if manifold < 1e-12 && swapped && fourth {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn note_ma_far_from_threshold() -> Outcome {
    let first = stability::critical_delay_ma(100.0, 1.0, None).unwrap()[0].delta_cr;
    let sim = SimConfig { horizon: 300.0, ..Default::default() };
    let lo = analysis::observe(ModelKind::MovingAverage, &ModelParams::new(100.0, 1.0, 0.05).unwrap(), &sim).unwrap();
    let hi = analysis::observe(ModelKind::MovingAverage, &ModelParams::new(100.0, 1.0, 0.15).unwrap(), &sim).unwrap();
    let msg = format!(
        "first root {first:.5}; delta 0.05: {} ({:.2e}); delta 0.15: {} ({:.3})",
        lo.regime, lo.amplitude, hi.regime, hi.amplitude
    );
    if lo.regime == Regime::Synchronized && hi.regime == Regime::Oscillatory && first > 0.05 && first < 0.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1  constant threshold (lambda 10, mu 1)", c1_constant_threshold),
        ("2  regimes, constant model, lambda 10 mu 1", c2_constant_regimes_moderate_load),
        ("3  regimes, constant model, lambda 100 mu 5", c3_constant_regimes_heavy_load),
        ("4  regimes, moving-average model, lambda 10 mu 1", c4_ma_regimes),
        ("5  extraneous root rejection", c5_extraneous_root),
        ("6  conservation of q1 + q2", c6_conservation),
        ("7  characteristic residuals", c7_residuals),
        ("8  crossing direction, constant model", c8_crossing_direction),
        ("9  monotone constant Hopf curve", c9_monotone_curve),
        ("10 symmetry, invariant manifold, 4th order", c10_symmetry_and_order),
        ("N  moving-average lambda 100 mu 1, away from threshold", note_ma_far_from_threshold),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} criteria, {failed} failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
