//! 15-point Gauss–Kronrod rule and the globally adaptive driver.
//!
//! The panel rule follows the classical QUADPACK construction: a 7-point
//! Gauss rule embedded in a 15-point Kronrod extension, with the error
//! rescaling heuristic `resasc·min(1, (200·err/resasc)^{3/2})` and a
//! 50·eps·resabs rounding floor.  The driver keeps a max-heap of panels
//! keyed by error estimate (ties broken by interval position so runs are
//! reproducible bit for bit) and always bisects the worst panel.  The final
//! value re-sums all panels in ascending interval order with compensated
//! summation, so the result does not depend on the order in which the heap
//! happened to refine.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureConfig, QuadratureResult};

/// Abscissae of the 15-point Kronrod rule on [-1, 1]; positive half, the
/// odd-indexed entries are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// Weights of the embedded 7-point Gauss rule (nodes XGK[1], XGK[3],
/// XGK[5] and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_97,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

/// Result of one 15-point panel evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

/// QUADPACK error rescaling: sharpen the raw Gauss/Kronrod difference
/// against the scale of variation, then floor at the rounding level.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * result_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// The abscissae [`eval_panel`] visits on [a, b]: center first, then the
/// Gauss-shared pairs, then the Kronrod-only pairs.
pub(crate) fn panel_nodes(a: f64, b: f64) -> [f64; 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = [0.0_f64; 15];
    nodes[0] = center;
    let mut idx = 1;
    for j in 0..3 {
        let abscissa = half * XGK[2 * j + 1];
        nodes[idx] = center - abscissa;
        nodes[idx + 1] = center + abscissa;
        idx += 2;
    }
    for j in 0..4 {
        let abscissa = half * XGK[2 * j];
        nodes[idx] = center - abscissa;
        nodes[idx + 1] = center + abscissa;
        idx += 2;
    }
    nodes
}

/// The 15-point rule applied to integrand values sampled at
/// [`panel_nodes`] order.  Split out from [`eval_panel`] so callers that
/// cache integrand samples can re-weight them without re-evaluating.
pub(crate) fn panel_from_values(a: f64, b: f64, fv: &[f64; 15]) -> Result<Panel> {
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = fv[0];
    let mut fv1 = [0.0_f64; 8];
    let mut fv2 = [0.0_f64; 8];
    let mut result_gauss = f_center * WG[3];
    let mut result_kronrod = f_center * WGK[7];
    let mut result_abs = result_kronrod.abs();

    let mut idx = 1;
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let fval1 = fv[idx];
        let fval2 = fv[idx + 1];
        idx += 2;
        fv1[jtw] = fval1;
        fv2[jtw] = fval2;
        result_gauss += WG[j] * (fval1 + fval2);
        result_kronrod += WGK[jtw] * (fval1 + fval2);
        result_abs += WGK[jtw] * (fval1.abs() + fval2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let fval1 = fv[idx];
        let fval2 = fv[idx + 1];
        idx += 2;
        fv1[jtwm1] = fval1;
        fv2[jtwm1] = fval2;
        result_kronrod += WGK[jtwm1] * (fval1 + fval2);
        result_abs += WGK[jtwm1] * (fval1.abs() + fval2.abs());
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (result_kronrod - result_gauss) * half;
    let value = result_kronrod * half;
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "integrand produced a non-finite value on [{a}, {b}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value,
        error: rescale_error(err, result_abs * abs_half, result_asc * abs_half),
    })
}

/// Apply the 15-point rule to one panel.  15 integrand evaluations.
pub(crate) fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let nodes = panel_nodes(a, b);
    let mut fv = [0.0_f64; 15];
    for (slot, x) in fv.iter_mut().zip(nodes.iter()) {
        *slot = f(*x);
    }
    panel_from_values(a, b, &fv)
}

/// All N components of a vector integrand on one panel, sharing abscissae.
/// Returns per-component (values, error estimates); 15 evaluations of f.
pub(crate) fn eval_panel_vec<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    a: f64,
    b: f64,
) -> Result<([f64; N], [f64; N])> {
    let nodes = panel_nodes(a, b);
    let mut columns = [[0.0_f64; 15]; N];
    for (i, x) in nodes.iter().enumerate() {
        let y = f(*x);
        for (c, column) in columns.iter_mut().enumerate() {
            column[i] = y[c];
        }
    }
    let mut values = [0.0_f64; N];
    let mut errors = [0.0_f64; N];
    for c in 0..N {
        let p = panel_from_values(a, b, &columns[c])?;
        values[c] = p.value;
        errors[c] = p.error;
    }
    Ok((values, errors))
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Heap key: worst error first; ties resolved by interval start so the
/// refinement sequence is identical from run to run.
#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    error: f64,
    start_key: u64,
    idx: usize,
}

/// Order-preserving bit pattern for possibly-negative interval starts.
fn sortable_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if x >= 0.0 {
        b | (1 << 63)
    } else {
        !b
    }
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.start_key.cmp(&self.start_key))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Globally adaptive bisection over [a, b].
pub(crate) fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
            converged: true,
        });
    }
    let first = eval_panel(f, a, b)?;
    let mut evaluations: u64 = 15;
    let mut panels: Vec<Panel> = vec![first];
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    heap.push(HeapEntry {
        error: first.error,
        start_key: sortable_bits(first.a),
        idx: 0,
    });
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut splits: usize = 0;

    let tolerance =
        |value: f64| -> f64 { cfg.abs_tol.max(cfg.rel_tol * value.abs()) };

    while total_error > tolerance(total_value) {
        if evaluations + 30 > cfg.max_evaluations || splits >= cfg.subdivision_limit {
            break;
        }
        let Some(top) = heap.pop() else { break };
        let parent = panels[top.idx];
        let mid = 0.5 * (parent.a + parent.b);
        if !(mid > parent.a && mid < parent.b) {
            // interval too narrow to split; leave it out of the heap but
            // keep its contribution
            continue;
        }
        let left = eval_panel(f, parent.a, mid)?;
        let right = eval_panel(f, mid, parent.b)?;
        evaluations += 30;
        splits += 1;
        total_value += left.value + right.value - parent.value;
        total_error += left.error + right.error - parent.error;
        panels[top.idx] = left;
        heap.push(HeapEntry {
            error: left.error,
            start_key: sortable_bits(left.a),
            idx: top.idx,
        });
        let ridx = panels.len();
        panels.push(right);
        heap.push(HeapEntry {
            error: right.error,
            start_key: sortable_bits(right.a),
            idx: ridx,
        });
    }

    // canonical order-independent resummation
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = Compensated::default();
    let mut error = Compensated::default();
    for p in &panels {
        value.add(p.value);
        error.add(p.error);
    }
    let value = value.total();
    let error = error.total();
    Ok(QuadratureResult {
        value,
        abs_error_estimate: error,
        evaluations,
        converged: error <= tolerance(value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tight() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        // K15 integrates degree ≤ 22 exactly
        let r = adaptive(&|x: f64| x.powi(8) - 3.0 * x.powi(3) + 1.0, 0.0, 2.0, &tight()).unwrap();
        let exact = 2.0f64.powi(9) / 9.0 - 3.0 * 16.0 / 4.0 + 2.0;
        assert_relative_eq!(r.value, exact, max_relative = 1e-14);
        assert!(r.converged);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn smooth_transcendental() {
        let r = adaptive(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, &tight()).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-13);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() <= 10.0 * r.abs_error_estimate.max(1e-16));
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = adaptive(&|x: f64| x.sqrt().recip(), 1e-300, 1.0, &tight()).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_reported_not_hidden() {
        let cfg = QuadratureConfig {
            max_evaluations: 60,
            ..QuadratureConfig::default()
        };
        let r = adaptive(&|x: f64| (50.0 * x).sin() * (30.0 * x).cos(), 0.0, 20.0, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.evaluations <= 60);
    }

    #[test]
    fn nan_integrand_is_a_domain_error() {
        let r = adaptive(&|x: f64| (x - 0.31).ln(), 0.0, 1.0, &tight());
        assert!(r.is_err());
    }

    #[test]
    fn deterministic_replay() {
        let run = || {
            adaptive(
                &|x: f64| (x * x).sin() / (1.0 + x),
                0.0,
                30.0,
                &tight(),
            )
            .unwrap()
        };
        let r1 = run();
        let r2 = run();
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
        assert_eq!(r1.abs_error_estimate.to_bits(), r2.abs_error_estimate.to_bits());
        assert_eq!(r1.evaluations, r2.evaluations);
    }
}
