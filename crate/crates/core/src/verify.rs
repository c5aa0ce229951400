//! Built-in invariant suite behind the `verify` subcommand.

use num_complex::Complex64;

use crate::analysis::{self, ClassifyConfig, Regime, SimConfig};
use crate::dde::{History, IntegrationConfig};
use crate::error::Result;
use crate::models::{self, ModelKind, ModelParams};
use crate::stability::{self, PerturbationQuery};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Max node error of the symmetric constant-delay run
/// (`phi1 = phi2 = 0`, `lambda = 10`, `mu = 1`, `delta = 0.4`) against
/// `5 (1 - e^{-t})`, for each requested step.
pub fn symmetric_errors(steps: &[f64]) -> Result<Vec<f64>> {
    let p = ModelParams::new(10.0, 1.0, 0.4)?;
    steps
        .iter()
        .map(|&h| {
            let traj = models::simulate(ModelKind::ConstantDelay, &p, (0.0, 0.0), 10.0, Some(h))?;
            Ok(traj
                .nodes()
                .map(|(t, x)| (x[0] - 5.0 * (1.0 - (-t).exp())).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}

fn mnl_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut in_range = true;
    // gaps stay below ~36 so neither weight rounds to 0 or 1
    for i in -20..=20 {
        for j in -20..=20 {
            let (a, b) = (500.0 + i as f64 * 0.9, 500.0 + j as f64 * 0.8);
            let (w1, w2) = models::mnl_weights(a, b)?;
            worst = worst.max((w1 + w2 - 1.0).abs());
            in_range &= w1 > 0.0 && w1 < 1.0 && w2 > 0.0 && w2 < 1.0;
        }
    }
    Ok((worst <= 1e-15 && in_range, format!("max |w1 + w2 - 1| = {worst:e}")))
}

fn dense_check() -> Result<(bool, String)> {
    let p = ModelParams::new(10.0, 1.0, 0.4)?;
    let traj = models::simulate(ModelKind::ConstantDelay, &p, (5.5, 4.5), 5.0, None)?;
    let nodes_exact = (0..traj.node_count()).all(|k| traj.eval(traj.time(k)).is_ok_and(|x| x == traj.state(k)));
    let seam = traj.history().eval(0.0)? == traj.eval(0.0)?;
    Ok((nodes_exact && seam, format!("node identity {nodes_exact}, history seam {seam}")))
}

fn order_check() -> Result<(bool, String)> {
    let errs = symmetric_errors(&[0.2, 0.1, 0.05])?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    Ok((ok, format!("error ratios on halving h: {ratios:.2?}")))
}

fn conservation_check() -> Result<(bool, String)> {
    let cases = [
        (ModelKind::ConstantDelay, 10.0, 1.0, 0.4, (5.5, 4.5)),
        (ModelKind::ConstantDelay, 100.0, 5.0, 0.05, (12.0, 7.0)),
        (ModelKind::MovingAverage, 10.0, 1.0, 4.0, (6.0, 4.5)),
        (ModelKind::MovingAverage, 37.0, 2.0, 1.5, (9.0, 11.0)),
    ];
    let mut worst = 0.0f64;
    for (kind, lambda, mu, delta, phi) in cases {
        let p = ModelParams::new(lambda, mu, delta)?;
        let traj = models::simulate(kind, &p, phi, 100.0, None)?;
        worst = worst.max(analysis::conservation_check(&traj, &p));
    }
    Ok((worst < 1e-6, format!("max deviation {worst:e}")))
}

fn manifold_and_swap_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut swapped = true;
    for kind in [ModelKind::ConstantDelay, ModelKind::MovingAverage] {
        let p = ModelParams::new(10.0, 1.0, if kind == ModelKind::ConstantDelay { 0.4 } else { 4.0 })?;
        let same = History::sampled(p.delta, vec![-p.delta, 0.0], vec![vec![3.0, 3.0], vec![7.0, 7.0]])?;
        let traj = models::simulate_with_history(kind, &p, &same, &IntegrationConfig::new(0.01, 50.0))?;
        worst = worst.max(traj.nodes().map(|(_, x)| (x[0] - x[1]).abs()).fold(0.0, f64::max));

        let a = models::simulate(kind, &p, (5.5, 4.5), 50.0, None)?;
        let b = models::simulate(kind, &p, (4.5, 5.5), 50.0, None)?;
        swapped &= a.nodes().zip(b.nodes()).all(|((_, x), (_, y))| x[0] == y[1] && x[1] == y[0]);
    }
    Ok((worst < 1e-12 && swapped, format!("max |q1 - q2| = {worst:e}, swap exact {swapped}")))
}

fn ma_quadrature_check() -> Result<(bool, String)> {
    let p = ModelParams::new(10.0, 1.0, 2.0)?;
    let traj = models::simulate(ModelKind::MovingAverage, &p, (5.5, 4.5), 40.0, None)?;
    let mut worst = 0.0f64;
    for k in 0..traj.node_count() {
        let m = models::ma_from_trajectory(&traj, traj.time(k), p.delta)?;
        let x = traj.state(k);
        worst = worst.max((m[0] - x[2]).abs()).max((m[1] - x[3]).abs());
    }
    Ok((worst < 5e-4, format!("max |m - quadrature| = {worst:e}")))
}

fn lambda_grid(mu: f64) -> Vec<f64> {
    (0..20).map(|i| 2.0 * mu + 0.5 + (100.0 - 2.0 * mu - 0.5) * i as f64 / 19.0).collect()
}

fn residual_check() -> Result<(bool, String)> {
    let (mut worst_c, mut worst_ma, mut worst_trig) = (0.0f64, 0.0f64, 0.0f64);
    for mu in [0.5, 1.0] {
        for lambda in lambda_grid(mu) {
            if let Some(p) = stability::critical_delay_constant(lambda, mu)? {
                let r = Complex64::new(0.0, p.omega);
                worst_c = worst_c.max(stability::characteristic_residual_constant(r, lambda, mu, p.delta_cr).norm());
                let phase = p.omega * p.delta_cr;
                worst_trig = worst_trig
                    .max((phase.cos() + 2.0 * mu / lambda).abs())
                    .max((phase.sin() - 2.0 * p.omega / lambda).abs());
            }
            for p in stability::critical_delay_ma(lambda, mu, None)? {
                let r = Complex64::new(0.0, p.omega);
                worst_ma = worst_ma.max(stability::characteristic_residual_ma(r, lambda, mu, p.delta_cr).norm());
            }
        }
    }
    Ok((
        worst_c < 1e-9 && worst_ma < 1e-8 && worst_trig < 1e-9,
        format!("constant |R| {worst_c:e}, sin/cos {worst_trig:e}, moving-average |R| {worst_ma:e}"),
    ))
}

fn extraneous_check() -> Result<(bool, String)> {
    let cands = stability::ma_candidates(10.0, 1.0, None)?;
    let near = cands.iter().find(|c| (c.delta - 4.0).abs() < 0.1);
    Ok(match near {
        Some(c) => (
            !c.validated && c.cos_gap > 0.3,
            format!("candidate {:.6} cos gap {:.3}, validated {}", c.delta, c.cos_gap, c.validated),
        ),
        None => (false, "no candidate near delta = 4".to_string()),
    })
}

fn crossing_check() -> Result<(bool, String)> {
    let eps = 1e-3;
    let mut ok = true;
    for (lambda, mu) in [(10.0, 1.0), (100.0, 5.0), (20.0, 2.0), (3.0, 0.5), (50.0, 1.0)] {
        let p = stability::critical_delay_constant(lambda, mu)?.expect("lambda > 2 mu");
        let seed = Complex64::new(0.0, p.omega);
        for sign in [1.0, -1.0] {
            let root = stability::root_track(ModelKind::ConstantDelay, lambda, mu, p.delta_cr + sign * eps, seed)?;
            let q = PerturbationQuery { delta0: p.delta_cr, delta1: sign * eps, omega: p.omega };
            ok &= root.re.signum() == stability::r2_constant(&q, lambda, mu).signum();
        }
    }
    Ok((ok, "sign(Re r) matches sign(r2) at delta_cr +/- 1e-3".to_string()))
}

fn monotone_check() -> Result<(bool, String)> {
    let mut ok = true;
    for mu in [0.5, 1.0] {
        let curve = stability::hopf_curve(ModelKind::ConstantDelay, mu, 2.0 * mu + 0.5, 100.0, 50)?;
        ok &= curve.len() == 50 && curve.windows(2).all(|w| w[1].delta_cr < w[0].delta_cr);
    }
    Ok((ok, "constant Hopf curves strictly decreasing, mu in {0.5, 1}".to_string()))
}

fn regime_check() -> Result<(bool, String)> {
    let p_lo = ModelParams::new(10.0, 1.0, 0.34)?;
    let p_hi = ModelParams::new(10.0, 1.0, 0.40)?;
    let sim = SimConfig::default();
    let lo = analysis::observe(ModelKind::ConstantDelay, &p_lo, &sim)?;
    let hi = analysis::observe(ModelKind::ConstantDelay, &p_hi, &sim)?;
    Ok((
        lo.regime == Regime::Synchronized && hi.regime == Regime::Oscillatory,
        format!("delta 0.34: {} ({:.2e}), delta 0.40: {} ({:.3})", lo.regime, lo.amplitude, hi.regime, hi.amplitude),
    ))
}

fn threshold_agreement_check() -> Result<(bool, String)> {
    let rows = analysis::sweep(ModelKind::ConstantDelay, 1.0, &[10.0], &[0.2, 0.3, 0.34, 0.4, 0.5, 1.0], &SimConfig::default())?;
    let agree = rows.iter().filter(|r| r.agree()).count();
    Ok((agree == rows.len(), format!("{agree}/{} sweep rows agree with the threshold", rows.len())))
}

fn determinism_check() -> Result<(bool, String)> {
    let p = ModelParams::new(10.0, 1.0, 2.0)?;
    let a = models::simulate(ModelKind::MovingAverage, &p, (5.5, 4.5), 20.0, None)?;
    let b = models::simulate(ModelKind::MovingAverage, &p, (5.5, 4.5), 20.0, None)?;
    Ok((a == b, "repeated runs bit-identical".to_string()))
}

fn classify_check() -> Result<(bool, String)> {
    let p = ModelParams::new(10.0, 1.0, 0.4)?;
    let traj = models::simulate(ModelKind::ConstantDelay, &p, (5.0, 5.0), 40.0, None)?;
    let v = analysis::classify_stability(&traj, &ClassifyConfig::for_params(&p))?;
    Ok((v.regime == Regime::Synchronized && v.amplitude == 0.0, format!("equilibrium amplitude {}", v.amplitude)))
}

/// Runs every check. Each result carries a one-line detail.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("mnl weights sum to one", mnl_check()),
        check("dense output node identity", dense_check()),
        check("fourth-order convergence", order_check()),
        check("conservation of q1 + q2", conservation_check()),
        check("invariant manifold and swap symmetry", manifold_and_swap_check()),
        check("moving-average state vs quadrature", ma_quadrature_check()),
        check("characteristic residuals at Hopf points", residual_check()),
        check("extraneous root rejection", extraneous_check()),
        check("crossing direction (constant model)", crossing_check()),
        check("monotone Hopf curve", monotone_check()),
        check("equilibrium classification", classify_check()),
        check("regimes either side of threshold", regime_check()),
        check("sweep agrees with threshold", threshold_agreement_check()),
        check("determinism", determinism_check()),
    ]
}
