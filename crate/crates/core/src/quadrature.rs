//! Numerical integration used by the identity checks and the continuous
//! Gramian.
//!
//! `integrate` is a globally adaptive 7/15-point Gauss-Kronrod scheme.
//! `integrate_half_line` maps `(0, ∞)` onto `(0, 1)` with `θ = tan(πs/2)`.
//! `GradedRule` is a fixed composite Gauss-Legendre rule with panels
//! refined geometrically toward the left endpoint, for integrands that are
//! evaluated once per node and then combined many times.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand at {c}")));
    }
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::Quadrature(format!(
                "non-finite integrand near {}",
                c + x
            )));
        }
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate falls below
/// `max(abs_tol, rel_tol·|value|)`; fails after `max_segments` bisections
/// without reaching that target.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_limit(&mut f, a, b, abs_tol, rel_tol, 2000)
}

pub fn integrate_with_limit<F>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = kronrod(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_segments {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {max_segments} segments (error {total_err:.3e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(f, worst.a, mid)?;
        let (v2, e2) = kronrod(f, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `(0, ∞)` through `θ = tan(πs/2)`.
pub fn integrate_half_line<F>(mut f: F, abs_tol: f64, rel_tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let half_pi = std::f64::consts::FRAC_PI_2;
    let g = move |s: f64| {
        let theta = (half_pi * s).tan();
        let c = (half_pi * s).cos();
        let jac = half_pi / (c * c);
        let v = f(theta);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate(g, 0.0, 1.0, abs_tol, rel_tol)
}

/// Composite Gauss-Legendre rule on `[a, b]` whose panels shrink
/// geometrically (ratio 1/2) toward `a`.
#[derive(Debug, Clone)]
pub struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GradedRule {
    /// `panels` geometric panels, each carrying an `order`-point rule; the
    /// innermost panel is `[a, a + (b−a)·2^{−(panels−1)}]`.
    pub fn new(a: f64, b: f64, order: usize, panels: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).expect("order is positive");
        let rule = GaussLegendre::new(order);
        let pairs = rule.as_node_weight_pairs();
        let mut edges = Vec::with_capacity(panels + 1);
        edges.push(a);
        let len = b - a;
        for p in (0..panels.max(1)).rev() {
            edges.push(a + len * 0.5f64.powi(p as i32));
        }
        let mut nodes = Vec::with_capacity(edges.len() * pairs.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for &(x, wt) in pairs {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        GradedRule { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite trapezoid weights for `n` uniform samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Composite trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    trapezoid_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        let est = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert_relative_eq!(est.value, exact, max_relative = 1e-14);
    }

    #[test]
    fn adapts_to_endpoint_singularity() {
        let est = integrate(|x| x.powf(-0.6), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(est.value, 2.5, max_relative = 1e-9);
    }

    #[test]
    fn half_line_gamma() {
        let est = integrate_half_line(|t| t.powi(3) * (-t).exp(), 1e-13, 1e-13).unwrap();
        assert_relative_eq!(est.value, 6.0, max_relative = 1e-11);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, 1e-10, 1e-10);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }

    #[test]
    fn graded_rule_handles_weak_singularity() {
        let rule = GradedRule::new(0.0, 2.0, 16, 64);
        let v = rule.integrate(|t| t.powf(-0.5));
        assert_relative_eq!(v, 2.0 * 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn trapezoid_of_line_is_exact() {
        let v: Vec<f64> = (0..11).map(|k| 0.1 * k as f64).collect();
        assert_relative_eq!(trapezoid(&v, 0.1), 0.5, max_relative = 1e-14);
    }
}
