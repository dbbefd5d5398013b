//! Spherical Bessel kernels and damped-transform building blocks.
//!
//! Two field modes with wavenumbers k and k' couple at distance r through
//! angular kernels built from j0 and j1:
//!
//! ```text
//! Q_E(k,k',r) = j0(kr) j0(k'r) - j0(kr) j1(k'r)/(k'r)
//!               - j1(kr)/(kr) j0(k'r) + 3 j1(kr) j1(k'r)/(k k' r^2)
//! Q_M(k,k',r) = 2 j1(kr) j1(k'r)
//! ```
//!
//! At r = 0 the electric kernel has the finite limit 2/3 (independent of k
//! and k') and the magnetic kernel vanishes.  The closed-form exponential
//! transforms of k^3 j0, k^3 j1 and k^2 j1 collected here are what make the
//! double-k energy integrals reducible to one-dimensional ones; every
//! quadrature route in this crate is cross-checked against them.

use crate::error::{Error, Result};

/// Power series kick in below this |x|; the trigonometric forms lose relative
/// accuracy like eps/x^2 for j1, so the switch sits well above the naive
/// rounding threshold.
const SERIES_CUTOFF: f64 = 0.25;

/// Spherical Bessel function j0(x) = sin(x)/x, with j0(0) = 1.
///
/// Relative error is a few ulps over the whole real line.
pub fn sph_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_CUTOFF {
        // 1 - x^2/3! + x^4/5! - x^6/7! + x^8/9! - x^10/11!
        let x2 = x * x;
        1.0 - x2 / 6.0
            + x2 * x2 / 120.0
            - x2 * x2 * x2 / 5040.0
            + x2 * x2 * x2 * x2 / 362_880.0
            - x2 * x2 * x2 * x2 * x2 / 39_916_800.0
    } else {
        x.sin() / x
    }
}

/// Spherical Bessel function j1(x) = sin(x)/x^2 - cos(x)/x, with j1(0) = 0.
pub fn sph_j1(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        x * sph_j1_over_x(x)
    } else {
        (x.sin() / x - x.cos()) / x
    }
}

/// j1(x)/x with its finite limit 1/3 at x = 0.
///
/// The kernels only ever need j1 through this ratio, which keeps the r -> 0
/// limits of Q_E exact instead of 0/0.
pub fn sph_j1_over_x(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        // 1/3 - x^2/30 + x^4/840 - x^6/45360 + x^8/3991680 - x^10/518918400
        let x2 = x * x;
        1.0 / 3.0 - x2 / 30.0
            + x2 * x2 / 840.0
            - x2 * x2 * x2 / 45_360.0
            + x2 * x2 * x2 * x2 / 3_991_680.0
            - x2 * x2 * x2 * x2 * x2 / 518_918_400.0
    } else {
        (x.sin() / x - x.cos()) / (x * x)
    }
}

/// Wavenumber pair and observation distance for a kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub k: f64,
    pub k_prime: f64,
    pub r: f64,
}

impl KernelArgs {
    /// All three arguments must be finite and non-negative.
    pub fn new(k: f64, k_prime: f64, r: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("k_prime", k_prime), ("r", r)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "kernel argument {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self { k, k_prime, r })
    }
}

/// Electric coupling kernel Q_E(k, k', r).  Symmetric in k <-> k';
/// Q_E(k, k', 0) = 2/3 exactly.
pub fn kernel_qe(args: &KernelArgs) -> f64 {
    qe(args.k, args.k_prime, args.r)
}

/// Magnetic coupling kernel Q_M(k, k', r) = 2 j1(kr) j1(k'r).
pub fn kernel_qm(args: &KernelArgs) -> f64 {
    qm(args.k, args.k_prime, args.r)
}

pub(crate) fn qe(k: f64, kp: f64, r: f64) -> f64 {
    let x = k * r;
    let y = kp * r;
    let j0x = sph_j0(x);
    let j0y = sph_j0(y);
    let hx = sph_j1_over_x(x);
    let hy = sph_j1_over_x(y);
    j0x * j0y - j0x * hy - hx * j0y + 3.0 * hx * hy
}

pub(crate) fn qm(k: f64, kp: f64, r: f64) -> f64 {
    2.0 * sph_j1(k * r) * sph_j1(kp * r)
}

fn check_transform_args(s: f64, r: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!(
            "damping parameter must be finite and positive, got {s}"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!(
            "radial argument must be finite and positive, got {r}"
        )));
    }
    Ok(())
}

/// int_0^inf k^3 j1(kr) e^(-sk) dk = 8 r s / (r^2 + s^2)^3.
pub fn laplace_k3_j1(s: f64, r: f64) -> Result<f64> {
    check_transform_args(s, r)?;
    let d = r * r + s * s;
    Ok(8.0 * r * s / (d * d * d))
}

/// int_0^inf k^3 j0(kr) e^(-sk) dk = 2 (3 s^2 - r^2) / (s^2 + r^2)^3.
pub fn laplace_k3_j0(s: f64, r: f64) -> Result<f64> {
    check_transform_args(s, r)?;
    let d = r * r + s * s;
    Ok(2.0 * (3.0 * s * s - r * r) / (d * d * d))
}

/// int_0^inf k^2 j1(kr) e^(-sk) dk = 2 r / (s^2 + r^2)^2.
///
/// Finite at s -> 0+ (the k^2 j1 tail is conditionally convergent), so the
/// closed form is the s -> 0 continuation as well.
pub fn laplace_k2_j1(s: f64, r: f64) -> Result<f64> {
    check_transform_args(s, r)?;
    let d = r * r + s * s;
    Ok(2.0 * r / (d * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j0_special_values() {
        assert_eq!(sph_j0(0.0), 1.0);
        assert!(sph_j0(std::f64::consts::PI).abs() < 1e-15);
        assert_relative_eq!(sph_j0(1.0), 1.0_f64.sin(), max_relative = 1e-15);
    }

    #[test]
    fn j1_special_values() {
        assert_eq!(sph_j1(0.0), 0.0);
        // leading series term x/3 - x^3/30
        assert_relative_eq!(sph_j1(1e-3), 3.333333e-4, epsilon = 1e-11);
        assert_relative_eq!(
            sph_j1(std::f64::consts::PI),
            1.0 / std::f64::consts::PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn series_and_trig_branches_agree_at_the_seam() {
        // both branches are valid in a band around the cutoff
        for &x in &[0.18_f64, 0.22, 0.2499, 0.2501, 0.3, 0.4] {
            let trig_j0 = x.sin() / x;
            let trig_j1 = (x.sin() / x - x.cos()) / x;
            assert_relative_eq!(sph_j0(x), trig_j0, max_relative = 1e-14);
            assert_relative_eq!(sph_j1(x), trig_j1, max_relative = 1e-12);
            assert_relative_eq!(sph_j1_over_x(x), trig_j1 / x, max_relative = 1e-12);
        }
    }

    #[test]
    fn j1_recurrence_against_j0() {
        // j1(x) = j0(x)/x - cos(x)/x over a wide grid
        for i in 1..200 {
            let x = 0.1 * i as f64;
            let expect = sph_j0(x) / x - x.cos() / x;
            assert_relative_eq!(sph_j1(x), expect, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn bessel_bounds() {
        for i in 0..2000 {
            let x = 0.05 * i as f64;
            assert!(sph_j0(x).abs() <= 1.0 + 1e-15);
            assert!(sph_j1(x).abs() <= 0.44);
            assert!(sph_j1_over_x(x).abs() <= 1.0 / 3.0 + 1e-15);
        }
    }

    #[test]
    fn qe_analytic_limit_at_origin() {
        let args = KernelArgs::new(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(kernel_qe(&args), 2.0 / 3.0, max_relative = 1e-15);
        // the limit is independent of the wavenumbers
        let args = KernelArgs::new(7.3, 0.2, 0.0).unwrap();
        assert_relative_eq!(kernel_qe(&args), 2.0 / 3.0, max_relative = 1e-15);
        let args = KernelArgs::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(kernel_qm(&args), 0.0);
    }

    #[test]
    fn kernel_values_at_pi() {
        // at k = k' = 1, r = pi: j0(pi) = 0, j1(pi) = 1/pi, so
        // Q_E = 3/pi^4 and Q_M = 2/pi^2
        let pi = std::f64::consts::PI;
        let args = KernelArgs::new(1.0, 1.0, pi).unwrap();
        assert_relative_eq!(kernel_qe(&args), 3.0 / pi.powi(4), max_relative = 1e-13);
        assert_relative_eq!(kernel_qm(&args), 2.0 / (pi * pi), max_relative = 1e-13);
    }

    #[test]
    fn kernels_are_symmetric_in_the_wavenumbers() {
        for i in 1..=12 {
            for j in 1..=12 {
                for &r in &[0.0, 0.3, 1.0, 2.7, 9.0] {
                    let k = 0.4 * i as f64;
                    let kp = 0.55 * j as f64;
                    assert_relative_eq!(qe(k, kp, r), qe(kp, k, r), max_relative = 1e-14, epsilon = 1e-16);
                    assert_relative_eq!(qm(k, kp, r), qm(kp, k, r), max_relative = 1e-14, epsilon = 1e-16);
                }
            }
        }
    }

    #[test]
    fn kernel_bounds() {
        // |Q_E| <= 4 (loose) and |Q_M| <= 2 sup j1^2; Q_M >= 0 on the diagonal
        let sup_j1 = 0.4362;
        for i in 0..60 {
            for j in 0..60 {
                let k = 0.25 * (i + 1) as f64;
                let kp = 0.3 * (j + 1) as f64;
                for &r in &[0.1, 0.9, 3.3, 12.0] {
                    assert!(qe(k, kp, r).abs() <= 4.0);
                    assert!(qm(k, kp, r).abs() <= 2.0 * sup_j1 * sup_j1);
                }
                assert!(qm(k, k, 1.7) >= 0.0);
            }
        }
    }

    #[test]
    fn laplace_spot_values() {
        assert_relative_eq!(laplace_k3_j1(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(laplace_k3_j1(2.0, 1.0).unwrap(), 0.128, max_relative = 1e-15);
        assert_relative_eq!(laplace_k3_j0(1.0, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(laplace_k3_j0(3.0, 1.0).unwrap(), 0.052, max_relative = 1e-15);
        // zero crossing of the j0 transform at s = r/sqrt(3)
        let s = 1.0 / 3.0_f64.sqrt();
        assert!(laplace_k3_j0(s, 1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(laplace_k2_j1(1.0, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(laplace_k2_j1(1.0, 2.0).unwrap(), 0.16, max_relative = 1e-15);
        // s -> 0+ continuation of the k^2 j1 transform
        assert_relative_eq!(laplace_k2_j1(1e-12, 1.0).unwrap(), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn electric_composition_identity() {
        // the factorized electric integrand collapses to
        // 8 (3 s^4 - 2 s^2 r^2 + 3 r^4) / (s^2 + r^2)^6
        for i in 0..20 {
            for j in 0..20 {
                let s = 0.05 * 10f64.powf(i as f64 * 0.14);
                let r = 0.07 * 10f64.powf(j as f64 * 0.13);
                let l30 = laplace_k3_j0(s, r).unwrap();
                let l21 = laplace_k2_j1(s, r).unwrap();
                let lhs = l30 * l30 - 2.0 * l30 * l21 / r + 3.0 * l21 * l21 / (r * r);
                let d = s * s + r * r;
                let rhs = 8.0 * (3.0 * s.powi(4) - 2.0 * s * s * r * r + 3.0 * r.powi(4))
                    / d.powi(6);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn magnetic_composition_identity() {
        // 2 [int k^3 j1 e^(-sk)]^2 = 128 r^2 s^2 / (s^2 + r^2)^6
        for i in 0..20 {
            for j in 0..20 {
                let s = 0.04 * 10f64.powf(i as f64 * 0.15);
                let r = 0.06 * 10f64.powf(j as f64 * 0.14);
                let l31 = laplace_k3_j1(s, r).unwrap();
                let lhs = 2.0 * l31 * l31;
                let d = s * s + r * r;
                let rhs = 128.0 * r * r * s * s / d.powi(6);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(KernelArgs::new(-1.0, 1.0, 1.0).is_err());
        assert!(KernelArgs::new(1.0, f64::NAN, 1.0).is_err());
        assert!(laplace_k3_j1(0.0, 1.0).is_err());
        assert!(laplace_k3_j1(1.0, -2.0).is_err());
        assert!(laplace_k3_j0(f64::INFINITY, 1.0).is_err());
    }
}
