//! Fixed-lag delay differential equation integrator.
//!
//! Classical fourth-order Runge–Kutta driven by the method of steps. Every
//! accepted node stores both the state and the right-hand side evaluated
//! there, so the solution can be evaluated anywhere on the computed window
//! with a cubic Hermite interpolant. Lagged values needed by the Runge–Kutta
//! stages are read from the history for `t - lag < 0` and from that dense
//! output otherwise.
//!
//! With lag alignment (the default) the step is shrunk so that the lag is an
//! integer number of steps. Lagged reads at node times then land exactly on
//! stored nodes and only the half-step stage reads are interpolated.

use crate::error::{Error, Result};

/// Relative slack used when snapping a time onto the node grid.
const GRID_SNAP: f64 = 1e-9;

/// A system `x'(t) = f(t, x(t), x(t - lag))` with a single constant lag.
pub trait DdeSystem {
    fn dimension(&self) -> usize;

    /// The constant lag. Zero turns the system into an ODE.
    fn lag(&self) -> f64;

    /// Writes `f(t, state, lagged)` into `out`. Must be deterministic and
    /// free of side effects.
    fn rhs(&self, t: f64, state: &[f64], lagged: &[f64], out: &mut [f64]) -> Result<()>;
}

impl<S: DdeSystem + ?Sized> DdeSystem for &S {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn lag(&self) -> f64 {
        (**self).lag()
    }
    fn rhs(&self, t: f64, state: &[f64], lagged: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).rhs(t, state, lagged, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryKind {
    /// One constant value per component.
    Constant(Vec<f64>),
    /// Table on `[-delta, 0]`, linearly interpolated. `values[k]` is the
    /// full state at `times[k]`.
    Sampled { times: Vec<f64>, values: Vec<Vec<f64>> },
}

/// Initial function on `[-delta, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    delta: f64,
    kind: HistoryKind,
}

impl History {
    pub fn constant(delta: f64, values: Vec<f64>) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::precondition(format!(
                "history delta must be finite and >= 0, got {delta}"
            )));
        }
        if values.is_empty() {
            return Err(Error::precondition("history needs at least one component"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("history values must be finite"));
        }
        Ok(Self {
            delta,
            kind: HistoryKind::Constant(values),
        })
    }

    /// A sampled table. Times must be strictly increasing and span exactly
    /// `[-delta, 0]`; endpoints within `1e-12 * delta` are snapped.
    pub fn sampled(delta: f64, mut times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::precondition(
                "a sampled history needs a finite delta > 0",
            ));
        }
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::precondition(
                "sampled history needs >= 2 rows and one value row per time",
            ));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|row| row.len() != dim) {
            return Err(Error::precondition(
                "sampled history rows must share a non-zero dimension",
            ));
        }
        if values.iter().flatten().chain(times.iter()).any(|v| !v.is_finite()) {
            return Err(Error::precondition("sampled history must be finite"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::precondition(
                "sampled history times must be strictly increasing",
            ));
        }
        let tol = 1e-12 * delta.max(1.0);
        let last = times.len() - 1;
        if (times[0] + delta).abs() > tol || times[last].abs() > tol {
            return Err(Error::precondition(format!(
                "sampled history must span [-{delta}, 0], got [{}, {}]",
                times[0], times[last]
            )));
        }
        times[0] = -delta;
        times[last] = 0.0;
        Ok(Self {
            delta,
            kind: HistoryKind::Sampled { times, values },
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> &HistoryKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            HistoryKind::Constant(v) => v.len(),
            HistoryKind::Sampled { values, .. } => values[0].len(),
        }
    }

    /// Value at `t = 0`, which is the integrator's initial state.
    pub fn initial_state(&self) -> Vec<f64> {
        match &self.kind {
            HistoryKind::Constant(v) => v.clone(),
            HistoryKind::Sampled { values, .. } => values[values.len() - 1].clone(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dimension()];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let tol = GRID_SNAP * self.delta.max(f64::MIN_POSITIVE);
        if !(t >= -self.delta - tol && t <= tol) {
            return Err(Error::OutOfRange {
                t,
                lo: -self.delta,
                hi: 0.0,
            });
        }
        match &self.kind {
            HistoryKind::Constant(v) => out.copy_from_slice(v),
            HistoryKind::Sampled { times, values } => {
                let t = t.clamp(-self.delta, 0.0);
                // index of the last knot <= t
                let j = times.partition_point(|&s| s <= t).saturating_sub(1);
                if j + 1 >= times.len() {
                    out.copy_from_slice(&values[times.len() - 1]);
                } else {
                    let w = (t - times[j]) / (times[j + 1] - times[j]);
                    for (o, (a, b)) in out.iter_mut().zip(values[j].iter().zip(&values[j + 1])) {
                        *o = a + w * (b - a);
                    }
                }
            }
        }
        Ok(())
    }

    /// Window average `(1/delta) * integral_{-delta}^{0} phi(s) ds` per
    /// component, by the trapezoid rule on the table knots (exact for the
    /// piecewise-linear interpolant). For `delta == 0` this is `phi(0)`.
    pub fn window_mean(&self) -> Vec<f64> {
        match &self.kind {
            HistoryKind::Constant(v) => v.clone(),
            HistoryKind::Sampled { times, values } => {
                let mut acc = vec![0.0; values[0].len()];
                for k in 0..times.len() - 1 {
                    let dt = times[k + 1] - times[k];
                    for (a, (x, y)) in acc.iter_mut().zip(values[k].iter().zip(&values[k + 1])) {
                        *a += 0.5 * dt * (x + y);
                    }
                }
                acc.iter().map(|a| a / self.delta).collect()
            }
        }
    }
}

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    /// Requested step; the effective step never exceeds it.
    pub step: f64,
    /// Integration runs on `[0, horizon]`.
    pub horizon: f64,
    /// Shrink the step so that `lag / step` is an integer.
    pub align_lag: bool,
}

impl IntegrationConfig {
    pub fn new(step: f64, horizon: f64) -> Self {
        Self {
            step,
            horizon,
            align_lag: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::precondition(format!(
                "step must be finite and > 0, got {}",
                self.step
            )));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::precondition(format!(
                "horizon must be finite and > 0, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Step actually used for a system with the given lag.
    pub fn effective_step(&self, lag: f64) -> f64 {
        if self.align_lag && lag > 0.0 {
            let per_lag = (lag / self.step - GRID_SNAP).ceil().max(1.0);
            lag / per_lag
        } else {
            self.step
        }
    }
}

/// `min(delta / 20, 1 / (10 mu), 0.01)`, skipping the lag term for `delta == 0`.
pub fn default_step(delta: f64, mu: f64) -> f64 {
    let mut h = (0.1 / mu).min(0.01);
    if delta > 0.0 {
        h = h.min(delta / 20.0);
    }
    h
}

/// Uniform-grid solution with per-node derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    step: f64,
    dim: usize,
    len: usize,
    states: Vec<f64>,
    derivatives: Vec<f64>,
    history: History,
}

impl Trajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn lag(&self) -> f64 {
        self.history.delta()
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn node_count(&self) -> usize {
        self.len
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    /// Time of the last node.
    pub fn end_time(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.derivatives[k * self.dim..(k + 1) * self.dim]
    }

    /// `(t_k, x_k)` pairs in time order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.states
            .chunks_exact(self.dim)
            .enumerate()
            .map(move |(k, x)| (self.time(k), x))
    }

    /// Dense evaluation on `[-lag, end_time]`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        self.dense(t, self.len - 1, out)
    }

    /// Dense evaluation using only nodes `0..=front`, whose derivatives must
    /// already be stored.
    fn dense(&self, t: f64, front: usize, out: &mut [f64]) -> Result<()> {
        let h = self.step;
        let hi = front as f64 * h;
        if !(t >= -self.lag() - GRID_SNAP * h && t <= hi + GRID_SNAP * h) {
            return Err(Error::OutOfRange {
                t,
                lo: -self.lag(),
                hi,
            });
        }
        let s = t / h;
        let nearest = s.round();
        if (s - nearest).abs() <= GRID_SNAP && nearest >= 0.0 {
            let k = (nearest as usize).min(front);
            out.copy_from_slice(self.state(k));
            return Ok(());
        }
        if t < 0.0 {
            return self.history.eval_into(t, out);
        }
        let j = (s.floor() as usize).min(front.saturating_sub(1));
        let theta = s - j as f64;
        let theta2 = theta * theta;
        let theta3 = theta2 * theta;
        let h00 = 2.0 * theta3 - 3.0 * theta2 + 1.0;
        let h10 = theta3 - 2.0 * theta2 + theta;
        let h01 = -2.0 * theta3 + 3.0 * theta2;
        let h11 = theta3 - theta2;
        let (x0, x1) = (self.state(j), self.state(j + 1));
        let (f0, f1) = (self.derivative(j), self.derivative(j + 1));
        for i in 0..self.dim {
            out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
        }
        Ok(())
    }
}

/// Integrates `system` from its history over `[0, config.horizon]`.
pub fn integrate<S: DdeSystem>(
    system: &S,
    history: &History,
    config: &IntegrationConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let dim = system.dimension();
    let lag = system.lag();
    if dim == 0 {
        return Err(Error::precondition("system dimension must be positive"));
    }
    if !(lag.is_finite() && lag >= 0.0) {
        return Err(Error::precondition(format!("lag must be finite and >= 0, got {lag}")));
    }
    if history.delta() != lag {
        return Err(Error::precondition(format!(
            "history delta {} does not match system lag {lag}",
            history.delta()
        )));
    }
    if history.dimension() != dim {
        return Err(Error::precondition(format!(
            "history dimension {} does not match system dimension {dim}",
            history.dimension()
        )));
    }

    let h = config.effective_step(lag);
    if lag > 0.0 && lag < h * (1.0 - GRID_SNAP) {
        return Err(Error::precondition(format!(
            "lag {lag} is shorter than the step {h}; enable lag alignment or reduce the step"
        )));
    }
    let len = (config.horizon / h + GRID_SNAP).floor() as usize + 1;

    let mut traj = Trajectory {
        step: h,
        dim,
        len,
        states: Vec::with_capacity(len * dim),
        derivatives: Vec::with_capacity(len * dim),
        history: history.clone(),
    };
    traj.states.extend(history.initial_state());
    // Fill so that `state`/`derivative` slicing works while the front advances.
    traj.states.resize(len * dim, 0.0);
    traj.derivatives.resize(len * dim, 0.0);

    let mut lagged = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];

    for k in 0..len {
        let t = traj.time(k);
        let x: Vec<f64> = traj.state(k).to_vec();

        // k1 doubles as the stored node derivative.
        if lag == 0.0 {
            system.rhs(t, &x, &x, &mut k1)?;
        } else {
            traj.dense(t - lag, k.saturating_sub(1), &mut lagged)?;
            system.rhs(t, &x, &lagged, &mut k1)?;
        }
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { time: t });
        }
        traj.derivatives[k * dim..(k + 1) * dim].copy_from_slice(&k1);
        if k + 1 == len {
            break;
        }

        let t_mid = t + 0.5 * h;
        let t_end = t + h;

        axpy(&x, 0.5 * h, &k1, &mut stage);
        if lag == 0.0 {
            system.rhs(t_mid, &stage, &stage, &mut k2)?;
        } else {
            traj.dense(t_mid - lag, k, &mut lagged)?;
            system.rhs(t_mid, &stage, &lagged, &mut k2)?;
        }

        axpy(&x, 0.5 * h, &k2, &mut stage);
        if lag == 0.0 {
            system.rhs(t_mid, &stage, &stage, &mut k3)?;
        } else {
            // same lagged point as k2
            system.rhs(t_mid, &stage, &lagged, &mut k3)?;
        }

        axpy(&x, h, &k3, &mut stage);
        if lag == 0.0 {
            system.rhs(t_end, &stage, &stage, &mut k4)?;
        } else {
            traj.dense(t_end - lag, k, &mut lagged)?;
            system.rhs(t_end, &stage, &lagged, &mut k4)?;
        }

        let next = &mut traj.states[(k + 1) * dim..(k + 2) * dim];
        for i in 0..dim {
            next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { time: t_end });
        }
    }
    Ok(traj)
}

fn axpy(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}
