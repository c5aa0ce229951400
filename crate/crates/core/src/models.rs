//! Fluid models of two parallel infinite-server queues where arrivals split
//! by a multinomial logit rule on lagged queue information.
//!
//! * [`ConstantDelayModel`]: customers see `q_i(t - delta)`.
//! * [`MovingAverageModel`]: customers see the window average
//!   `m_i(t) = (1/delta) * integral_{t-delta}^{t} q_i(s) ds`, carried as two
//!   extra states driven by `m_i' = (q_i(t) - q_i(t - delta)) / delta`.

use std::fmt;
use std::str::FromStr;

use crate::dde::{self, DdeSystem, History, HistoryKind, IntegrationConfig, Trajectory};
use crate::error::{Error, Result};

/// Arrival rate, per-queue service rate and information delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, mu: f64, delta: f64) -> Result<Self> {
        let p = Self { lambda, mu, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::precondition(format!(
                "lambda must be finite and > 0, got {}",
                self.lambda
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::precondition(format!(
                "mu must be finite and > 0, got {}",
                self.mu
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::precondition(format!(
                "delta must be finite and >= 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// The symmetric equilibrium `lambda / (2 mu)`.
    pub fn equilibrium(&self) -> f64 {
        equilibrium(self)
    }
}

/// `lambda / (2 mu)`: each queue receives half the arrivals in steady state.
pub fn equilibrium(p: &ModelParams) -> f64 {
    p.lambda / (2.0 * p.mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    ConstantDelay,
    MovingAverage,
}

impl ModelKind {
    pub fn dimension(self) -> usize {
        match self {
            ModelKind::ConstantDelay => 2,
            ModelKind::MovingAverage => 4,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::ConstantDelay => "constant",
            ModelKind::MovingAverage => "moving-average",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" | "constant-delay" => Ok(ModelKind::ConstantDelay),
            "moving-average" | "ma" => Ok(ModelKind::MovingAverage),
            other => Err(Error::precondition(format!(
                "unknown model '{other}' (expected 'constant' or 'moving-average')"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueuePairState {
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaState {
    pub q1: f64,
    pub q2: f64,
    pub m1: f64,
    pub m2: f64,
}

/// Logit split `(e^-a, e^-b) / (e^-a + e^-b)`.
///
/// Exponents are shifted by `min(a, b)` so the larger weight's exponential is
/// exactly one; nothing overflows and the sum never underflows. For
/// `|a - b| > ~745` the smaller weight underflows to zero.
pub fn mnl_weights(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::precondition(format!(
            "logit inputs must be finite, got ({a}, {b})"
        )));
    }
    let shift = a.min(b);
    let ea = (-(a - shift)).exp();
    let eb = (-(b - shift)).exp();
    let total = ea + eb;
    Ok((ea / total, eb / total))
}

/// `(lambda w1 - mu q1, lambda w2 - mu q2)` with weights from the lagged queues.
pub fn constant_delay_rhs(
    state: QueuePairState,
    lagged: QueuePairState,
    p: &ModelParams,
) -> Result<(f64, f64)> {
    let (w1, w2) = mnl_weights(lagged.q1, lagged.q2)?;
    Ok((p.lambda * w1 - p.mu * state.q1, p.lambda * w2 - p.mu * state.q2))
}

/// Right-hand side of the four-state moving-average system. Only the queue
/// components of `lagged` are read.
pub fn ma_rhs(state: MaState, lagged: MaState, p: &ModelParams) -> Result<[f64; 4]> {
    if p.delta.is_nan() || p.delta <= 0.0 {
        return Err(Error::precondition(
            "moving average needs delta > 0; use the constant-delay model with delta = 0",
        ));
    }
    let (w1, w2) = mnl_weights(state.m1, state.m2)?;
    Ok([
        p.lambda * w1 - p.mu * state.q1,
        p.lambda * w2 - p.mu * state.q2,
        (state.q1 - lagged.q1) / p.delta,
        (state.q2 - lagged.q2) / p.delta,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDelayModel {
    pub params: ModelParams,
}

impl DdeSystem for ConstantDelayModel {
    fn dimension(&self) -> usize {
        2
    }

    fn lag(&self) -> f64 {
        self.params.delta
    }

    fn rhs(&self, _t: f64, x: &[f64], lagged: &[f64], out: &mut [f64]) -> Result<()> {
        let (d1, d2) = constant_delay_rhs(
            QueuePairState { q1: x[0], q2: x[1] },
            QueuePairState {
                q1: lagged[0],
                q2: lagged[1],
            },
            &self.params,
        )?;
        out[0] = d1;
        out[1] = d2;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingAverageModel {
    pub params: ModelParams,
}

impl DdeSystem for MovingAverageModel {
    fn dimension(&self) -> usize {
        4
    }

    fn lag(&self) -> f64 {
        self.params.delta
    }

    fn rhs(&self, _t: f64, x: &[f64], lagged: &[f64], out: &mut [f64]) -> Result<()> {
        let d = ma_rhs(
            MaState {
                q1: x[0],
                q2: x[1],
                m1: x[2],
                m2: x[3],
            },
            MaState {
                q1: lagged[0],
                q2: lagged[1],
                m1: lagged[2],
                m2: lagged[3],
            },
            &self.params,
        )?;
        out.copy_from_slice(&d);
        Ok(())
    }
}

/// Default experiment histories: `phi1 = 1.1 q*`, `phi2 = 0.9 q*`.
pub fn default_histories(p: &ModelParams) -> (f64, f64) {
    let q = equilibrium(p);
    (1.1 * q, 0.9 * q)
}

/// Builds the full-state history for a model from a two-component queue
/// history. For the moving-average model the average states are constant at
/// their window mean over `[-delta, 0]`, which is the initial `m(0)`.
pub fn model_history(kind: ModelKind, queues: &History) -> Result<History> {
    if queues.dimension() != 2 {
        return Err(Error::precondition(format!(
            "queue history must have 2 components, got {}",
            queues.dimension()
        )));
    }
    match kind {
        ModelKind::ConstantDelay => Ok(queues.clone()),
        ModelKind::MovingAverage => {
            let delta = queues.delta();
            if delta.is_nan() || delta <= 0.0 {
                return Err(Error::precondition(
                    "moving average needs delta > 0; use the constant-delay model with delta = 0",
                ));
            }
            let m = queues.window_mean();
            match queues.kind() {
                HistoryKind::Constant(v) => History::constant(delta, vec![v[0], v[1], m[0], m[1]]),
                HistoryKind::Sampled { times, values } => History::sampled(
                    delta,
                    times.clone(),
                    values
                        .iter()
                        .map(|row| vec![row[0], row[1], m[0], m[1]])
                        .collect(),
                ),
            }
        }
    }
}

/// Integrates either model from a two-component queue history.
pub fn simulate_with_history(
    kind: ModelKind,
    params: &ModelParams,
    queues: &History,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    params.validate()?;
    let history = model_history(kind, queues)?;
    match kind {
        ModelKind::ConstantDelay => dde::integrate(&ConstantDelayModel { params: *params }, &history, config),
        ModelKind::MovingAverage => dde::integrate(&MovingAverageModel { params: *params }, &history, config),
    }
}

/// Integrates either model from constant histories `(phi1, phi2)` on
/// `[0, horizon]`. `step = None` picks [`dde::default_step`].
pub fn simulate(
    kind: ModelKind,
    params: &ModelParams,
    phi: (f64, f64),
    horizon: f64,
    step: Option<f64>,
) -> Result<Trajectory> {
    params.validate()?;
    let queues = History::constant(params.delta, vec![phi.0, phi.1])?;
    let step = step.unwrap_or_else(|| dde::default_step(params.delta, params.mu));
    simulate_with_history(kind, params, &queues, &IntegrationConfig::new(step, horizon))
}

/// `(1/delta) * integral_{t-delta}^{t} q_i(s) ds` for the two queue
/// components, by composite trapezoid quadrature over dense evaluations at a
/// spacing no larger than the trajectory step. `delta == 0` returns `q(t)`.
pub fn ma_from_trajectory(traj: &Trajectory, t: f64, delta: f64) -> Result<[f64; 2]> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::precondition(format!(
            "window must be finite and >= 0, got {delta}"
        )));
    }
    let lo = -traj.lag();
    let hi = traj.end_time();
    let slack = 1e-9 * traj.step();
    if t - delta < lo - slack || t > hi + slack {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    let mut buf = vec![0.0; traj.dimension()];
    if delta == 0.0 {
        traj.eval_into(t, &mut buf)?;
        return Ok([buf[0], buf[1]]);
    }
    let n = (delta / traj.step() - 1e-9).ceil().max(1.0) as usize;
    let ds = delta / n as f64;
    let mut acc = [0.0; 2];
    for k in 0..=n {
        let s = t - delta + k as f64 * ds;
        traj.eval_into(s.clamp(lo, hi), &mut buf)?;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc[0] += w * buf[0];
        acc[1] += w * buf[1];
    }
    Ok([acc[0] * ds / delta, acc[1] * ds / delta])
}
