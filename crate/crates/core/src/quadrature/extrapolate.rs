//! Richardson-style extrapolation of regulator-dependent values to the
//! regulator-free limit h → 0.
//!
//! Cutoff-regularized quantities in this crate approach their limits with
//! residuals c·h^p whose exponents p are small integers but are not always
//! consecutive (a cubic leading term with no linear or quadratic piece is
//! common).  A fixed-degree polynomial fit wastes its orders on absent
//! powers, so for geometrically spaced samples the exponent of the current
//! leading residual is measured from successive differences, snapped to the
//! nearest integer when unambiguous, and eliminated; the process repeats on
//! the shortened sequence.  Non-geometric spacings fall back to classical
//! Neville polynomial extrapolation in h.

use crate::error::{Error, Result};

/// Limit value with a conservative error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub value: f64,
    pub error_estimate: f64,
}

/// Extrapolate (h, v(h)) samples to h = 0.
///
/// `samples` must be ordered by strictly decreasing h > 0 with finite
/// values; at least `order + 1` samples are required.  `order` caps the
/// number of eliminated residual orders (or the polynomial degree on the
/// Neville fallback).
pub fn extrapolate_to_zero(samples: &[(f64, f64)], order: usize) -> Result<Extrapolated> {
    if order == 0 {
        return Err(Error::InvalidInput(
            "extrapolation order must be at least 1".into(),
        ));
    }
    if samples.len() < order + 1 {
        return Err(Error::InvalidInput(format!(
            "extrapolation of order {order} needs at least {} samples, got {}",
            order + 1,
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if !(w[0].0 > w[1].0) {
            return Err(Error::InvalidInput(
                "extrapolation samples must have strictly decreasing h".into(),
            ));
        }
    }
    for &(h, v) in samples {
        if !(h.is_finite() && h > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(
                "extrapolation samples must be finite with h > 0".into(),
            ));
        }
    }

    let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let v: Vec<f64> = samples.iter().map(|s| s.1).collect();

    let ratio0 = h[0] / h[1];
    let geometric = h
        .windows(2)
        .all(|w| ((w[0] / w[1]) / ratio0 - 1.0).abs() <= 1e-8);

    if geometric {
        Ok(staged_geometric(&v, ratio0, order))
    } else {
        Ok(neville_at_zero(&h, &v, order))
    }
}

/// Measure-and-eliminate loop for samples at h, h/ρ, h/ρ², …
fn staged_geometric(values: &[f64], rho: f64, order: usize) -> Extrapolated {
    let scale = values
        .iter()
        .fold(0.0_f64, |m, &x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let noise = 40.0 * f64::EPSILON * scale;
    let log_rho = rho.ln();

    let mut v = values.to_vec();
    let mut stages = 0usize;
    while stages < order && v.len() >= 3 {
        let m = v.len();
        let d_fine = v[m - 1] - v[m - 2];
        let d_coarse = v[m - 2] - v[m - 3];
        if d_fine.abs() <= noise {
            break; // differences at rounding level: nothing left to remove
        }
        let ratio = d_coarse / d_fine;
        if !(ratio.is_finite() && ratio > 1.02) {
            break; // residual not decaying geometrically; stop honestly
        }
        let mut p = ratio.ln() / log_rho;
        let snapped = p.round();
        if (p - snapped).abs() <= 0.25 && snapped >= 1.0 {
            p = snapped;
        } else if p < 0.5 {
            break;
        }
        let factor = rho.powf(p) - 1.0;
        let mut next = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            next.push(v[i + 1] + (v[i + 1] - v[i]) / factor);
        }
        v = next;
        stages += 1;
    }

    let value = *v.last().expect("non-empty sample vector");
    let error_estimate = if stages == 0 {
        // no structure detected: the finest raw difference bounds what is
        // left
        (values[values.len() - 1] - values[values.len() - 2])
            .abs()
            .max(noise)
    } else {
        // residuals of the surviving entries still scale geometrically, so
        // their spread overestimates the residual of the finest one
        let spread = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        (spread.1 - spread.0).max(noise)
    };
    Extrapolated {
        value,
        error_estimate,
    }
}

/// Neville's scheme evaluated at h = 0, degree ≤ order, preferring the
/// finest samples.
fn neville_at_zero(h: &[f64], v: &[f64], order: usize) -> Extrapolated {
    let n = h.len();
    let take = (order + 1).min(n);
    let h = &h[n - take..];
    let mut t: Vec<f64> = v[n - take..].to_vec();
    let mut last = t[take - 1];
    let mut err = f64::INFINITY;
    for m in 1..take {
        for i in 0..take - m {
            t[i] = (h[i] * t[i + 1] - h[i + m] * t[i]) / (h[i] - h[i + m]);
        }
        let cur = t[0];
        err = (cur - last).abs();
        last = cur;
    }
    Extrapolated {
        value: last,
        error_estimate: err.max(4.0 * f64::EPSILON * last.abs()),
    }
}
