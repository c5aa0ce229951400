//! Simulation-side diagnostics: regime classification of trajectories, the
//! conservation check on total queue mass, and parameter sweeps that put the
//! analytic thresholds next to integrated runs.

use std::fmt;

use rayon::prelude::*;

use crate::dde::Trajectory;
use crate::error::{Error, Result};
use crate::models::{self, ModelKind, ModelParams};
use crate::stability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Synchronized,
    Oscillatory,
    Inconclusive,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Synchronized => "synchronized",
            Regime::Oscillatory => "oscillatory",
            Regime::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds for [`classify_stability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub burn_in_fraction: f64,
    /// Tail amplitude below this is `Synchronized`.
    pub eps_sync: f64,
    /// Tail amplitude above this is `Oscillatory`.
    pub eps_osc: f64,
}

impl ClassifyConfig {
    /// Burn-in of half the horizon, `eps_sync = 1e-3 q*`, `eps_osc = 1e-2 q*`.
    pub fn for_equilibrium(q_star: f64) -> Self {
        Self {
            burn_in_fraction: 0.5,
            eps_sync: 1e-3 * q_star,
            eps_osc: 1e-2 * q_star,
        }
    }

    pub fn for_params(p: &ModelParams) -> Self {
        Self::for_equilibrium(p.equilibrium())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub regime: Regime,
    /// `max - min` of `q1 - q2` over the nodes after burn-in.
    pub amplitude: f64,
    pub burn_in: f64,
    pub horizon: f64,
    /// The last quarter of the run has a larger `q1 - q2` range than the
    /// quarter before it.
    pub growing: bool,
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Classifies the tail of `q1 - q2` after the burn-in.
pub fn classify_stability(traj: &Trajectory, cfg: &ClassifyConfig) -> Result<StabilityVerdict> {
    if !(cfg.burn_in_fraction > 0.0 && cfg.burn_in_fraction < 1.0) {
        return Err(Error::precondition(format!(
            "burn-in fraction must lie in (0, 1), got {}",
            cfg.burn_in_fraction
        )));
    }
    if !(cfg.eps_sync >= 0.0 && cfg.eps_sync < cfg.eps_osc) {
        return Err(Error::precondition(format!(
            "need 0 <= eps_sync < eps_osc, got {} and {}",
            cfg.eps_sync, cfg.eps_osc
        )));
    }
    let n = traj.node_count();
    let start = ((n - 1) as f64 * cfg.burn_in_fraction).ceil() as usize;
    if n < 8 || n - start < 4 {
        return Err(Error::precondition(format!(
            "horizon too short for the burn-in: {n} nodes, tail of {}",
            n.saturating_sub(start)
        )));
    }
    let diff = |k: usize| {
        let x = traj.state(k);
        x[0] - x[1]
    };
    let amplitude = spread((start..n).map(diff));
    let q3 = n - (n - start) / 4;
    let q2 = q3 - (n - start) / 4;
    let growing = spread((q3..n).map(diff)) > spread((q2..q3).map(diff));
    let regime = if amplitude < cfg.eps_sync {
        Regime::Synchronized
    } else if amplitude > cfg.eps_osc {
        Regime::Oscillatory
    } else {
        Regime::Inconclusive
    };
    Ok(StabilityVerdict {
        regime,
        amplitude,
        burn_in: traj.time(start),
        horizon: traj.end_time(),
        growing,
    })
}

/// Largest deviation of `q1 + q2` from `lambda/mu + (s(0) - lambda/mu) e^{-mu t}`.
pub fn conservation_check(traj: &Trajectory, p: &ModelParams) -> f64 {
    let target = p.lambda / p.mu;
    let s0 = {
        let x = traj.state(0);
        x[0] + x[1]
    };
    traj.nodes()
        .map(|(t, x)| (x[0] + x[1] - (target + (s0 - target) * (-p.mu * t).exp())).abs())
        .fold(0.0, f64::max)
}

/// Stability of the equilibrium predicted from the first Hopf threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    Stable,
    Unstable,
    NotApplicable,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prediction::Stable => "stable",
            Prediction::Unstable => "unstable",
            Prediction::NotApplicable => "n/a",
        })
    }
}

/// Integration and classification settings for one sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    /// `None` uses the default step.
    pub step: Option<f64>,
    /// Constant histories as multiples of `q*`.
    pub phi_factors: (f64, f64),
    pub burn_in_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            step: None,
            phi_factors: (1.1, 0.9),
            burn_in_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub threshold: Option<f64>,
    pub predicted: Prediction,
    /// Integration or classification failures are kept per row.
    pub observed: std::result::Result<StabilityVerdict, String>,
}

impl SweepRow {
    pub fn amplitude(&self) -> Option<f64> {
        self.observed.as_ref().ok().map(|v| v.amplitude)
    }

    /// Prediction and observation concur, or there is nothing to predict.
    pub fn agree(&self) -> bool {
        match (self.predicted, &self.observed) {
            (Prediction::NotApplicable, _) => true,
            (Prediction::Stable, Ok(v)) => v.regime == Regime::Synchronized,
            (Prediction::Unstable, Ok(v)) => v.regime == Regime::Oscillatory,
            _ => false,
        }
    }
}

/// Integrates one scenario with constant histories and classifies it.
pub fn observe(kind: ModelKind, params: &ModelParams, sim: &SimConfig) -> Result<StabilityVerdict> {
    let q = params.equilibrium();
    let phi = (sim.phi_factors.0 * q, sim.phi_factors.1 * q);
    let traj = models::simulate(kind, params, phi, sim.horizon, sim.step)?;
    let cfg = ClassifyConfig {
        burn_in_fraction: sim.burn_in_fraction,
        ..ClassifyConfig::for_equilibrium(q)
    };
    classify_stability(&traj, &cfg)
}

/// Every `(lambda, delta)` pair in grid order, rows computed in parallel.
pub fn sweep(
    kind: ModelKind,
    mu: f64,
    lambdas: &[f64],
    deltas: &[f64],
    sim: &SimConfig,
) -> Result<Vec<SweepRow>> {
    if lambdas.is_empty() || deltas.is_empty() {
        return Err(Error::precondition("sweep grids must be non-empty"));
    }
    let thresholds = lambdas
        .iter()
        .map(|&l| Ok(stability::first_critical_delay(kind, l, mu)?.map(|p| p.delta_cr)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, Option<f64>, f64)> = lambdas
        .iter()
        .zip(&thresholds)
        .flat_map(|(&l, &th)| deltas.iter().map(move |&d| (l, th, d)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(lambda, threshold, delta)| {
            let predicted = match threshold {
                None => Prediction::NotApplicable,
                Some(th) if delta < th => Prediction::Stable,
                Some(_) => Prediction::Unstable,
            };
            let observed = ModelParams::new(lambda, mu, delta)
                .and_then(|p| observe(kind, &p, sim))
                .map_err(|e| e.to_string());
            SweepRow {
                lambda,
                mu,
                delta,
                threshold,
                predicted,
                observed,
            }
        })
        .collect())
}
