//! Hopf thresholds for the two queue models.
//!
//! Linearizing either model about `q* = lambda / (2 mu)` and passing to the
//! difference `q1 - q2` leaves one scalar characteristic equation:
//!
//! * constant delay: `r + (lambda/2) e^{-r delta} + mu = 0`
//! * moving average (pole at `r = 0` cleared):
//!   `r^2 + mu r - (lambda / (2 delta)) (e^{-r delta} - 1) = 0`
//!
//! Setting `r = i omega` gives closed forms for the constant model and a
//! transcendental equation in `delta` for the moving-average model. The
//! latter is obtained by squaring the sine/cosine pair, so its roots are only
//! candidates and each one is checked against the unsquared conditions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::ModelKind;

/// Number of geometric grid points scanned for sign changes.
pub const MA_SCAN_POINTS: usize = 2000;
/// Lower end of the default scan, as a fraction of `lambda / mu^2`.
pub const MA_SCAN_LOWER_FRACTION: f64 = 1e-4;
/// Maximum disagreement in either unsquared condition for a candidate to count.
pub const MA_VALIDATION_TOL: f64 = 5e-3;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;

/// A point on a Hopf curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub lambda: f64,
    pub mu: f64,
    pub delta_cr: f64,
    pub omega: f64,
    /// 0 for the smallest positive critical delay.
    pub branch: usize,
    /// Both unsquared conditions hold. Always true for the constant model.
    pub validated: bool,
}

/// Perturbation `delta = delta0 + delta1` about a Hopf point with frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationQuery {
    pub delta0: f64,
    pub delta1: f64,
    pub omega: f64,
}

fn check_rates(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0 && mu.is_finite() && mu > 0.0) {
        return Err(Error::precondition(format!(
            "rates must be finite and > 0, got lambda = {lambda}, mu = {mu}"
        )));
    }
    Ok(())
}

/// Critical delay `2 acos(-2 mu / lambda) / sqrt(lambda^2 - 4 mu^2)` with
/// `omega = sqrt(lambda^2 - 4 mu^2) / 2`. `None` when `lambda <= 2 mu`: no
/// root reaches the imaginary axis and the equilibrium is stable for every
/// delay.
pub fn critical_delay_constant(lambda: f64, mu: f64) -> Result<Option<HopfPoint>> {
    check_rates(lambda, mu)?;
    if lambda <= 2.0 * mu {
        return Ok(None);
    }
    let root = (lambda * lambda - 4.0 * mu * mu).sqrt();
    let omega = 0.5 * root;
    let delta_cr = 2.0 * (-2.0 * mu / lambda).acos() / root;
    Ok(Some(HopfPoint {
        lambda,
        mu,
        delta_cr,
        omega,
        branch: 0,
        validated: true,
    }))
}

/// `r + (lambda/2) e^{-r delta} + mu`.
pub fn characteristic_residual_constant(r: Complex64, lambda: f64, mu: f64, delta: f64) -> Complex64 {
    r + 0.5 * lambda * (-r * delta).exp() + mu
}

/// `r^2 + mu r - (lambda / (2 delta)) (e^{-r delta} - 1)`. Has the trivial
/// root `r = 0`, which is not a Hopf point.
pub fn characteristic_residual_ma(r: Complex64, lambda: f64, mu: f64, delta: f64) -> Complex64 {
    r * r + mu * r - lambda / (2.0 * delta) * ((-r * delta).exp() - 1.0)
}

/// `sqrt(lambda / delta - mu^2)`.
pub fn hopf_frequency_ma(lambda: f64, mu: f64, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::precondition(format!("delta must be > 0, got {delta}")));
    }
    let w2 = lambda / delta - mu * mu;
    if w2.is_nan() || w2 <= 0.0 {
        return Err(Error::Domain(format!(
            "lambda / delta = {} does not exceed mu^2 = {}",
            lambda / delta,
            mu * mu
        )));
    }
    Ok(w2.sqrt())
}

/// `sin(delta omega) + (2 mu delta / lambda) omega` with
/// `omega = sqrt(lambda / delta - mu^2)`; `None` outside the domain.
pub fn ma_threshold_fn(lambda: f64, mu: f64, delta: f64) -> Option<f64> {
    let w2 = lambda / delta - mu * mu;
    if !(delta > 0.0 && w2 > 0.0) {
        return None;
    }
    let w = w2.sqrt();
    Some((delta * w).sin() + 2.0 * mu * delta / lambda * w)
}

/// A root of the squared moving-average threshold equation together with its
/// disagreement in each unsquared condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaCandidate {
    pub delta: f64,
    pub omega: f64,
    /// `|cos(omega delta) - (1 - 2 delta omega^2 / lambda)|`
    pub cos_gap: f64,
    /// `|sin(omega delta) + 2 delta mu omega / lambda|`
    pub sin_gap: f64,
    pub validated: bool,
}

/// All sign changes of [`ma_threshold_fn`] on the scan grid, refined by
/// bisection and checked against the unsquared conditions.
///
/// The scan covers `bracket` (default `(1e-4, 1) * lambda / mu^2`) clipped to
/// the domain `lambda / delta > mu^2`; the `omega = 0` endpoint is excluded.
pub fn ma_candidates(lambda: f64, mu: f64, bracket: Option<(f64, f64)>) -> Result<Vec<MaCandidate>> {
    check_rates(lambda, mu)?;
    let edge = lambda / (mu * mu);
    let (mut lo, mut hi) = bracket.unwrap_or((MA_SCAN_LOWER_FRACTION * edge, edge));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::precondition(format!("invalid bracket ({lo}, {hi})")));
    }
    lo = lo.max(f64::MIN_POSITIVE);
    hi = hi.min(edge);
    if lo >= hi {
        return Ok(Vec::new());
    }

    let ratio = (hi / lo).powf(1.0 / (MA_SCAN_POINTS - 1) as f64);
    let grid: Vec<(f64, f64)> = (0..MA_SCAN_POINTS)
        .map(|i| if i + 1 == MA_SCAN_POINTS { hi } else { lo * ratio.powi(i as i32) })
        .filter_map(|d| ma_threshold_fn(lambda, mu, d).map(|f| (d, f)))
        .collect();

    let mut roots = Vec::new();
    for (i, &(d, f)) in grid.iter().enumerate() {
        if f == 0.0 {
            roots.push(d);
        } else if let Some(&(d_next, f_next)) = grid.get(i + 1) {
            if f_next != 0.0 && f.signum() != f_next.signum() {
                roots.push(bisect(|x| ma_threshold_fn(lambda, mu, x).unwrap_or(0.0), d, d_next, f));
            }
        }
    }

    Ok(roots
        .into_iter()
        .map(|delta| {
            let omega = (lambda / delta - mu * mu).sqrt();
            let cos_gap = ((omega * delta).cos() - (1.0 - 2.0 * delta * omega * omega / lambda)).abs();
            let sin_gap = ((omega * delta).sin() + 2.0 * delta * mu * omega / lambda).abs();
            MaCandidate {
                delta,
                omega,
                cos_gap,
                sin_gap,
                validated: cos_gap <= MA_VALIDATION_TOL && sin_gap <= MA_VALIDATION_TOL,
            }
        })
        .collect())
}

/// Bisection to the resolution of `f64` (interval width far below `1e-10`).
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Validated critical delays of the moving-average model, sorted by delay
/// and indexed by branch. Empty when no validated root is in range.
pub fn critical_delay_ma(lambda: f64, mu: f64, bracket: Option<(f64, f64)>) -> Result<Vec<HopfPoint>> {
    Ok(ma_candidates(lambda, mu, bracket)?
        .into_iter()
        .filter(|c| c.validated)
        .enumerate()
        .map(|(branch, c)| HopfPoint {
            lambda,
            mu,
            delta_cr: c.delta,
            omega: c.omega,
            branch,
            validated: true,
        })
        .collect())
}

/// First-order real part of the root at `delta0 + delta1` near a Hopf point
/// of the constant-delay model:
/// `4 omega^2 delta1 / (8 delta0 mu + delta0^2 lambda^2 + 4)`.
pub fn r2_constant(q: &PerturbationQuery, lambda: f64, mu: f64) -> f64 {
    let d0 = q.delta0;
    4.0 * q.omega * q.omega * q.delta1 / (8.0 * d0 * mu + d0 * d0 * lambda * lambda + 4.0)
}

/// First-order real part of the root near a moving-average Hopf point:
/// `2 delta1 omega^2 (2 delta0 omega^2 - 2 mu lambda) /
///  (8 delta0^2 mu omega^2 + 12 delta0 omega^2 + 4 delta0 lambda mu + delta0 lambda^2 + 4 lambda)`.
///
/// Its sign disagrees with [`root_track`] on the first moving-average branch
/// (see the crate README); prefer the tracked root for crossing direction.
pub fn r2_ma(q: &PerturbationQuery, lambda: f64, mu: f64) -> f64 {
    let (d0, w2) = (q.delta0, q.omega * q.omega);
    let num = 2.0 * q.delta1 * w2 * (2.0 * d0 * w2 - 2.0 * mu * lambda);
    let den = 8.0 * d0 * d0 * mu * w2
        + 12.0 * d0 * w2
        + 4.0 * d0 * lambda * mu
        + d0 * lambda * lambda
        + 4.0 * lambda;
    num / den
}

/// Newton iteration on the model's characteristic residual from `seed`.
///
/// Converges when `|R| < 1e-12`, or when the iterate has stopped moving at
/// round-off level and `|R|` is below `1e-12` relative to the size of the
/// residual's terms.
pub fn root_track(model: ModelKind, lambda: f64, mu: f64, delta: f64, seed: Complex64) -> Result<Complex64> {
    check_rates(lambda, mu)?;
    if !(seed.re.is_finite() && seed.im.is_finite()) {
        return Err(Error::precondition("seed must be finite"));
    }
    match model {
        ModelKind::ConstantDelay if !(delta.is_finite() && delta >= 0.0) => {
            return Err(Error::precondition(format!("delta must be >= 0, got {delta}")))
        }
        ModelKind::MovingAverage if !(delta.is_finite() && delta > 0.0) => {
            return Err(Error::precondition(format!("delta must be > 0, got {delta}")))
        }
        _ => {}
    }

    // (residual, derivative, magnitude scale of the residual's terms,
    //  magnitude scale of the derivative's terms)
    let eval = |r: Complex64| -> (Complex64, Complex64, f64, f64) {
        let e = (-r * delta).exp();
        match model {
            ModelKind::ConstantDelay => (
                r + 0.5 * lambda * e + mu,
                1.0 - 0.5 * lambda * delta * e,
                r.norm() + 0.5 * lambda * e.norm() + mu,
                1.0 + 0.5 * lambda * delta * e.norm(),
            ),
            ModelKind::MovingAverage => {
                let c = lambda / (2.0 * delta);
                (
                    r * r + mu * r - c * (e - 1.0),
                    2.0 * r + mu + 0.5 * lambda * e,
                    r.norm_sqr() + mu * r.norm() + c * (e.norm() + 1.0),
                    2.0 * r.norm() + mu + 0.5 * lambda * e.norm(),
                )
            }
        }
    };

    let mut r = seed;
    let (mut res, mut der, _, mut dscale) = eval(r);
    for _ in 0..NEWTON_MAX_ITER {
        if res.norm() < NEWTON_TOL {
            return Ok(r);
        }
        if der.norm() <= 16.0 * f64::EPSILON * dscale || !der.norm().is_finite() {
            return Err(Error::SingularDerivative { re: r.re, im: r.im });
        }
        let step = res / der;
        r -= step;
        if !(r.re.is_finite() && r.im.is_finite()) {
            break;
        }
        let scale;
        (res, der, scale, dscale) = eval(r);
        if step.norm() <= 4.0 * f64::EPSILON * r.norm().max(1.0) && res.norm() <= NEWTON_TOL * scale.max(1.0) {
            return Ok(r);
        }
    }
    if res.norm() < NEWTON_TOL {
        return Ok(r);
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITER,
        residual: res.norm(),
    })
}

/// Branch-0 critical delays on a linear `lambda` grid. Grid points without a
/// Hopf point (constant model with `lambda <= 2 mu`, or no validated
/// moving-average root) are skipped.
pub fn hopf_curve(
    model: ModelKind,
    mu: f64,
    lambda_min: f64,
    lambda_max: f64,
    n_points: usize,
) -> Result<Vec<HopfPoint>> {
    if n_points == 0 {
        return Err(Error::precondition("need at least one grid point"));
    }
    if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min > 0.0 && lambda_min <= lambda_max) {
        return Err(Error::precondition(format!(
            "invalid lambda range [{lambda_min}, {lambda_max}]"
        )));
    }
    check_rates(lambda_min, mu)?;
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let lambda = if n_points == 1 {
            lambda_min
        } else {
            lambda_min + (lambda_max - lambda_min) * i as f64 / (n_points - 1) as f64
        };
        let point = match model {
            ModelKind::ConstantDelay => critical_delay_constant(lambda, mu)?,
            ModelKind::MovingAverage => critical_delay_ma(lambda, mu, None)?.into_iter().next(),
        };
        out.extend(point);
    }
    Ok(out)
}

/// Smallest critical delay for the model, if one exists.
pub fn first_critical_delay(model: ModelKind, lambda: f64, mu: f64) -> Result<Option<HopfPoint>> {
    match model {
        ModelKind::ConstantDelay => critical_delay_constant(lambda, mu),
        ModelKind::MovingAverage => Ok(critical_delay_ma(lambda, mu, None)?.into_iter().next()),
    }
}
