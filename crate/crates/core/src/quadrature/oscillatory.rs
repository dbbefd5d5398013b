//! Series acceleration for oscillatory tails.
//!
//! Semi-infinite integrals whose integrand eventually oscillates with a
//! fixed period (Bessel factors j0(kr), j1(kr) have asymptotic half-period
//! π/r in k) are summed panel by panel over consecutive half-periods.  The
//! resulting sequence of partial sums converges like an alternating series
//! and is accelerated with Wynn's ε-algorithm, which turns the slow
//! O(k⁻¹)-tail convergence into a handful of panels.

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod::{adaptive, Compensated};
use crate::quadrature::{QuadratureConfig, QuadratureResult};

/// Maximum number of trailing partial sums fed to the ε-table; keeps the
/// table away from early-panel transients and bounds its cost.
const WYNN_WINDOW: usize = 48;

/// Wynn ε-algorithm on a sequence of partial sums.
///
/// Returns the accelerated limit and an error estimate taken from the
/// stabilization of successive even ε-columns, floored at the rounding
/// noise of the sequence.  Robust to sequences that have already converged
/// (the raw last difference is then returned) and to degenerate table
/// entries (the build stops before dividing by a vanishing difference).
pub(crate) fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n == 1 {
        return (s[0], f64::INFINITY);
    }
    let scale = s
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let noise = 4.0 * f64::EPSILON * scale;
    let last_diff = (s[n - 1] - s[n - 2]).abs();
    if last_diff <= noise {
        return (s[n - 1], last_diff + noise);
    }

    let mut prev: Vec<f64> = vec![0.0; n + 1]; // ε_{-1} column (all zero)
    let mut cur: Vec<f64> = s.to_vec(); // ε_0 column
    let mut best = s[n - 1];
    let mut best_err = f64::INFINITY;
    let mut prev_even = s[n - 1];
    let mut col = 0usize;

    'build: while cur.len() >= 2 {
        let mut next: Vec<f64> = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.abs() < 1e-300 {
                break 'build;
            }
            let e = prev[i + 1] + 1.0 / d;
            if !e.is_finite() {
                break 'build;
            }
            next.push(e);
        }
        prev = std::mem::replace(&mut cur, next);
        col += 1;
        if col % 2 == 0 {
            let cand = *cur.last().expect("non-empty even column");
            let err = (cand - prev_even).abs().max(noise);
            if err <= best_err {
                best = cand;
                best_err = err;
            }
            prev_even = cand;
        }
    }
    (best, best_err)
}

/// Sum a semi-infinite integral over panels of one half-period each,
/// accelerating the partial sums.  The panel layout starts at 0; callers
/// with a different lower bound shift their integrand.
pub(crate) fn half_period_sum<F: Fn(f64) -> f64>(
    f: &F,
    half_period: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if !(half_period.is_finite() && half_period > 0.0) {
        return Err(Error::Domain(format!(
            "half period must be finite and positive, got {half_period}"
        )));
    }
    let panel_cfg = QuadratureConfig {
        abs_tol: (cfg.abs_tol * 0.02).max(1e-280),
        rel_tol: (cfg.rel_tol * 0.1).max(5e-15),
        max_evaluations: cfg.max_evaluations,
        subdivision_limit: 64,
    };
    let tolerance = |v: f64| cfg.abs_tol.max(cfg.rel_tol * v.abs());

    let mut partials: Vec<f64> = Vec::new();
    let mut acc = Compensated::default();
    let mut panel_err = Compensated::default();
    let mut evaluations: u64 = 0;
    let mut scale = 0.0_f64;
    let mut negligible_run = 0u32;
    let mut best_value = 0.0_f64;
    let mut best_err = f64::INFINITY;
    let mut prev_accel: Option<f64> = None;
    let mut last_abs = 0.0_f64;
    let mut tail_resolved = false;

    for n in 0..4096u64 {
        if evaluations + 15 > cfg.max_evaluations {
            break;
        }
        let lo = n as f64 * half_period;
        let hi = lo + half_period;
        let seg = adaptive(f, lo, hi, &panel_cfg)?;
        evaluations += seg.evaluations;
        acc.add(seg.value);
        panel_err.add(seg.abs_error_estimate);
        partials.push(acc.total());
        scale = scale.max(acc.total().abs());
        last_abs = seg.value.abs();

        if partials.len() >= 5 {
            let w0 = partials.len().saturating_sub(WYNN_WINDOW);
            let (v, e) = wynn_epsilon(&partials[w0..]);
            let total_e = e + panel_err.total();
            if total_e < best_err {
                best_value = v;
                best_err = total_e;
            }
            // demand two consecutive accelerated values inside tolerance:
            // a single ε-table can stabilize spuriously on a pre-asymptotic
            // window, and one more panel is cheap insurance against that
            let stable = prev_accel.is_some_and(|p| (v - p).abs() <= tolerance(v));
            prev_accel = Some(v);
            if total_e <= tolerance(v) && stable {
                return Ok(QuadratureResult {
                    value: v,
                    abs_error_estimate: total_e,
                    evaluations,
                    converged: true,
                });
            }
        }

        // an already-decayed tail: stop once several consecutive panels are
        // at rounding level
        if seg.value.abs() <= 4.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            negligible_run += 1;
            if negligible_run >= 3 {
                tail_resolved = true;
                break;
            }
        } else {
            negligible_run = 0;
        }
    }

    if partials.is_empty() {
        return Err(Error::Domain(
            "oscillatory summation could not evaluate a single panel within budget".into(),
        ));
    }
    let fallback = *partials.last().expect("at least one panel");
    let fallback_err = panel_err.total()
        + if partials.len() >= 2 {
            (partials[partials.len() - 1] - partials[partials.len() - 2]).abs()
        } else {
            f64::INFINITY
        };
    if fallback_err < best_err {
        best_value = fallback;
        best_err = fallback_err;
    }
    if !tail_resolved {
        // the sum stopped with live panels left; charge the unsummed tail so
        // a truncated answer cannot carry a confident estimate
        best_err += last_abs;
    }
    Ok(QuadratureResult {
        value: best_value,
        abs_error_estimate: best_err,
        evaluations,
        converged: best_err <= tolerance(best_value),
    })
}

/// Scan for a persistent oscillation in f over [0, 96] and estimate its
/// half-period from the mean spacing of sign changes.  Used as a rescue
/// when the rational-map route stalls.  Costs 512 evaluations.
pub(crate) fn detect_half_period<F: Fn(f64) -> f64>(f: &F) -> Option<f64> {
    const N: usize = 512;
    const SPAN: f64 = 96.0;
    let mut crossings: Vec<f64> = Vec::new();
    let mut prev_x = 0.0_f64;
    let mut prev_v = 0.0_f64;
    let mut have_prev = false;
    for i in 0..N {
        let x = SPAN * (i as f64 + 0.5) / N as f64;
        let v = f(x);
        if !v.is_finite() {
            return None;
        }
        if have_prev && prev_v != 0.0 && v != 0.0 && (prev_v < 0.0) != (v < 0.0) {
            crossings.push(0.5 * (prev_x + x));
        }
        if v != 0.0 {
            prev_x = x;
            prev_v = v;
            have_prev = true;
        }
    }
    if crossings.len() < 6 {
        return None;
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if !(mean > 0.0) {
        return None;
    }
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
    if var.sqrt() <= 0.35 * mean {
        Some(mean)
    } else {
        None
    }
}
