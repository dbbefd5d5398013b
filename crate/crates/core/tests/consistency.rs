//! Cross-route consistency on parameter values the unit tests do not touch:
//! every quantity that can be computed two ways is computed two ways, and
//! reported error estimates are held to what they claim.

use std::f64::consts::PI;

use vacuum_energy::extsource::{extended_density, ExtendedSource, FormFactor, Polarizability};
use vacuum_energy::pointlike::{self, Component, CutoffParams};
use vacuum_energy::quadrature::{self, QuadratureConfig};

#[test]
fn library_results_are_deterministic() {
    let cfg = QuadratureConfig::default();
    let a = pointlike::eta_repr_density(1.3, Component::Electric, &cfg).unwrap();
    let b = pointlike::eta_repr_density(1.3, Component::Magnetic, &cfg).unwrap();
    let a2 = pointlike::eta_repr_density(1.3, Component::Electric, &cfg).unwrap();
    let b2 = pointlike::eta_repr_density(1.3, Component::Magnetic, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), a2.value.to_bits());
    assert_eq!(a.abs_error_estimate.to_bits(), a2.abs_error_estimate.to_bits());
    assert_eq!(b.value.to_bits(), b2.value.to_bits());
    assert_eq!(a.evaluations, a2.evaluations);

    let source = ExtendedSource::new(
        FormFactor::gaussian(0.4).unwrap(),
        Polarizability::constant(1.0).unwrap(),
    )
    .unwrap();
    let d = extended_density(&source, 0.7, Component::Electric, &cfg).unwrap();
    let d2 = extended_density(&source, 0.7, Component::Electric, &cfg).unwrap();
    assert_eq!(d.value.to_bits(), d2.value.to_bits());
    assert_eq!(d.abs_error_estimate.to_bits(), d2.abs_error_estimate.to_bits());
}

#[test]
fn quadrature_tracks_the_closed_densities_off_grid() {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0_f64;
    for i in 0..12 {
        let r = 0.3 * (6.0_f64 / 0.3).powf(i as f64 / 11.0);
        for (component, closed) in [
            (Component::Electric, pointlike::closed_electric_density(r).unwrap()),
            (Component::Magnetic, pointlike::closed_magnetic_density(r).unwrap()),
        ] {
            let q = pointlike::eta_repr_density(r, component, &cfg).unwrap();
            assert!(q.converged, "r={r} {component} did not converge");
            worst = worst.max((q.value / closed - 1.0).abs());
        }
    }
    assert!(worst <= 1e-9, "worst relative deviation {worst:.3e}");
}

#[test]
fn regularized_integral_scales_as_the_inverse_seventh_power() {
    // A single length scale means I(r, γ) must equal r⁻⁷ I(1, γ/r) exactly
    // up to rounding, for any cutoff.
    for (r, gamma) in [(0.5, 0.3), (2.0, 0.08), (3.7, 1.4), (1.9, 0.62)] {
        let direct = pointlike::regularized_i(r, gamma).unwrap();
        let rescaled = pointlike::regularized_i(1.0, gamma / r).unwrap() / r.powi(7);
        let dev = (direct / rescaled - 1.0).abs();
        assert!(dev <= 1e-12, "(r={r}, gamma={gamma}): deviation {dev:.3e}");
    }
}

#[test]
fn point_form_factor_reproduces_the_closed_profile() {
    let cfg = QuadratureConfig::default();
    let alpha0 = 1.7;
    let source = ExtendedSource::new(
        FormFactor::point(),
        Polarizability::constant(alpha0).unwrap(),
    )
    .unwrap();
    for r in [0.6, 1.0, 2.3] {
        let e = extended_density(&source, r, Component::Electric, &cfg).unwrap();
        let m = extended_density(&source, r, Component::Magnetic, &cfg).unwrap();
        let e_dev = (e.value / (alpha0 * pointlike::closed_electric_density(r).unwrap()) - 1.0).abs();
        let m_dev = (m.value / (alpha0 * pointlike::closed_magnetic_density(r).unwrap()) - 1.0).abs();
        assert!(e_dev <= 1e-9, "electric r={r}: deviation {e_dev:.3e}");
        assert!(m_dev <= 1e-9, "magnetic r={r}: deviation {m_dev:.3e}");
    }
}

#[test]
fn global_balance_tracks_the_regulator() {
    let cfg = QuadratureConfig::default();
    let e1 = pointlike::global_energy(&CutoffParams::new(0.0, 1.0).unwrap()).unwrap();
    let e_half = pointlike::global_energy(&CutoffParams::new(0.0, 0.5).unwrap()).unwrap();
    assert_eq!(e_half.electric_total, 16.0 * e1.electric_total);
    assert_eq!(e1.sum_total, 0.0);
    for eta_m in [0.7_f64, 1.3] {
        let closed = 3.0 / (16.0 * PI * eta_m.powi(4));
        let e = pointlike::global_energy_quadrature(Component::Electric, eta_m, &cfg).unwrap();
        let m = pointlike::global_energy_quadrature(Component::Magnetic, eta_m, &cfg).unwrap();
        assert!(e.converged && m.converged);
        let dev = (e.value / closed - 1.0).abs();
        assert!(dev <= 1e-8, "eta_m={eta_m}: electric deviation {dev:.3e}");
        let balance = (e.value + m.value).abs() / closed;
        assert!(balance <= 1e-8, "eta_m={eta_m}: residual balance {balance:.3e}");
    }
}

#[test]
fn reported_errors_bound_true_errors_off_grid() {
    let cfg = QuadratureConfig::default();
    for r in [0.7, 1.3, 2.6] {
        for (component, closed) in [
            (Component::Electric, pointlike::closed_electric_density(r).unwrap()),
            (Component::Magnetic, pointlike::closed_magnetic_density(r).unwrap()),
        ] {
            let q = pointlike::eta_repr_density(r, component, &cfg).unwrap();
            assert!(q.converged);
            assert!(q.abs_error_estimate > 0.0);
            let true_err = (q.value - closed).abs();
            assert!(
                true_err <= 10.0 * q.abs_error_estimate,
                "r={r} {component}: true error {true_err:.3e} vs estimate {:.3e}",
                q.abs_error_estimate
            );
        }
    }
}

#[test]
fn cutoff_extrapolation_reports_an_honest_error() {
    let samples: Vec<(f64, f64)> = [0.16, 0.08, 0.04, 0.02]
        .iter()
        .map(|&g| (g, pointlike::regularized_i(1.0, g).unwrap()))
        .collect();
    let ex = quadrature::extrapolate_to_zero(&samples, 3).unwrap();
    let target = 7.0 * PI / 8.0;
    let true_err = (ex.value - target).abs();
    assert!(
        true_err <= 10.0 * ex.error_estimate.max(f64::EPSILON),
        "true error {true_err:.3e} vs reported {:.3e}",
        ex.error_estimate
    );
    assert!((ex.value / target - 1.0).abs() <= 1e-6);
}
