//! CSV writers. Numbers are printed with 9 significant digits in `%g` style,
//! independent of locale.

use std::io::Write;

use crate::analysis::SweepRow;
use crate::dde::Trajectory;
use crate::error::Result;
use crate::models::ModelKind;
use crate::stability::HopfPoint;

const SIG_DIGITS: usize = 9;

/// `%.9g`-style formatting: fixed notation for exponents in `[-5, 9)`,
/// scientific otherwise, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// `t,q1,q2` for the constant model, `t,q1,q2,m1,m2` for the moving average.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, kind: ModelKind, out: W) -> Result<()> {
    let mut w = writer(out);
    let cols = kind.dimension();
    match kind {
        ModelKind::ConstantDelay => w.write_record(["t", "q1", "q2"])?,
        ModelKind::MovingAverage => w.write_record(["t", "q1", "q2", "m1", "m2"])?,
    }
    for (t, x) in traj.nodes() {
        let row = std::iter::once(t).chain(x.iter().take(cols).copied()).map(format_sig);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_hopf_curve_csv<W: Write>(points: &[HopfPoint], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["lambda", "delta_cr", "omega", "branch", "validated"])?;
    for p in points {
        w.write_record([
            format_sig(p.lambda),
            format_sig(p.delta_cr),
            format_sig(p.omega),
            p.branch.to_string(),
            p.validated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `observed` is the regime name, or `error` when the row failed.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["lambda", "mu", "delta", "predicted", "observed", "amplitude", "agree"])?;
    for r in rows {
        w.write_record([
            format_sig(r.lambda),
            format_sig(r.mu),
            format_sig(r.delta),
            r.predicted.to_string(),
            r.observed.as_ref().map_or("error".to_string(), |v| v.regime.to_string()),
            r.amplitude().map_or(String::new(), format_sig),
            r.agree().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{simulate, ModelParams};
    use proptest::prelude::*;

    #[test]
    fn formatting_examples() {
        assert_eq!(format_sig(5.0), "5");
        assert_eq!(format_sig(0.361739471007), "0.361739471");
        assert_eq!(format_sig(-2.310585786300049), "-2.31058579");
        assert_eq!(format_sig(1234567890.0), "1.23456789e9");
        assert_eq!(format_sig(99999999.99), "100000000");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(0.0), "0");
    }

    proptest! {
        #[test]
        fn printed_values_round_trip(x in -1e12f64..1e12) {
            let s = format_sig(x);
            let y: f64 = s.parse().unwrap();
            prop_assert!((y - x).abs() <= 5.000001e-9 * x.abs());
            prop_assert_eq!(format_sig(y), s);
        }
    }

    #[test]
    fn equilibrium_csv_shape() {
        let p = ModelParams::new(10.0, 1.0, 0.0).unwrap();
        let traj = simulate(ModelKind::ConstantDelay, &p, (5.0, 5.0), 0.02, Some(0.01)).unwrap();
        assert_eq!(traj.node_count(), 3);
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, ModelKind::ConstantDelay, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,q1,q2\n0,5,5\n0.01,5,5\n0.02,5,5\n");
    }

    #[test]
    fn ma_csv_has_five_columns() {
        let p = ModelParams::new(10.0, 1.0, 1.0).unwrap();
        let traj = simulate(ModelKind::MovingAverage, &p, (5.5, 4.5), 2.0, None).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, ModelKind::MovingAverage, &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rdr.headers().unwrap(), vec!["t", "q1", "q2", "m1", "m2"]);
        let mut count = 0;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            assert_eq!(rec.len(), 5);
            let k = count;
            let parsed: Vec<f64> = rec.iter().map(|v| v.parse().unwrap()).collect();
            for (a, b) in parsed[1..].iter().zip(traj.state(k)) {
                assert!((a - b).abs() <= 5e-9 * b.abs());
            }
            count += 1;
        }
        assert_eq!(count, traj.node_count());
    }
}
