//! Composite Gauss–Legendre quadrature with interval halving.
//!
//! Two drivers are provided. [`integrate`] refines uniformly (all panels are
//! halved together) and stops once two successive estimates agree to `tol`;
//! this suits smooth periodic integrands such as `|F_N|^p`. [`adaptive`]
//! bisects locally and is used for peaked integrands like the Poisson kernel
//! at small heights.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel estimate of `∫_a^b f`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn composite<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.apply(f, lo, hi)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 10-point rule.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Controls for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub start_panels: usize,
    pub max_panels: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { start_panels: 4, max_panels: 1 << 16 }
    }
}

/// Estimate with its final refinement change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub change: f64,
    pub panels: usize,
}

/// Uniform panel doubling until successive estimates differ by less than
/// `tol`. Exceeding `budget.max_panels` is an error, never a silent result.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, budget: Budget) -> Result<Estimate> {
    let rule = gl10();
    let mut panels = budget.start_panels.max(1);
    let mut prev = rule.composite(&mut f, a, b, panels);
    let mut last_change = f64::INFINITY;
    while panels * 2 <= budget.max_panels {
        panels *= 2;
        let next = rule.composite(&mut f, a, b, panels);
        last_change = (next - prev).abs();
        if last_change < tol {
            return Ok(Estimate { value: next, change: last_change, panels });
        }
        prev = next;
    }
    Err(Error::QuadratureBudget { tol, budget: budget.max_panels, last_change })
}

/// Recursive bisection: a panel is accepted once its one-panel estimate and
/// the sum over its two halves agree to the panel's share of `tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    let rule = gl10();
    let whole = rule.apply(&mut f, a, b);
    let mut unresolved = 0.0_f64;
    let value = adaptive_step(&mut f, rule, a, b, whole, tol, max_depth, &mut unresolved);
    if value.is_finite() && unresolved <= tol {
        Ok(value)
    } else {
        Err(Error::QuadratureBudget { tol, budget: 1usize << max_depth.min(62), last_change: unresolved })
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.apply(f, a, mid);
    let right = rule.apply(f, mid, b);
    let diff = (left + right - whole).abs();
    // Below a few ulps of the panel value the comparison is pure rounding.
    if diff <= tol.max(16.0 * f64::EPSILON * (left + right).abs()) {
        return left + right;
    }
    if depth == 0 {
        *unresolved += diff;
        return left + right;
    }
    adaptive_step(f, rule, a, mid, left, 0.5 * tol, depth - 1, unresolved)
        + adaptive_step(f, rule, mid, b, right, 0.5 * tol, depth - 1, unresolved)
}

/// [`adaptive`] over consecutive subintervals given by sorted `breaks`;
/// integrands with kinks or jumps at known points converge much faster.
pub fn adaptive_piecewise<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: f64, max_depth: u32) -> Result<f64> {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive(&mut f, w[0], w[1], tol / pieces, max_depth))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..20 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let got = rule.apply(&mut |x: f64| x.powi(k), -1.0, 1.0);
            assert!((got - exact).abs() < 1e-13, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn small_rules() {
        let r1 = GaussLegendre::new(1);
        assert_eq!(r1.nodes(), &[0.0]);
        let r2 = GaussLegendre::new(2);
        assert!((r2.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn doubling_converges_on_periodic() {
        let est = integrate(|t| (3.0 * t).cos().powi(2), -PI, PI, 1e-12, Budget::default()).unwrap();
        assert!((est.value - PI).abs() < 1e-11);
    }

    #[test]
    fn budget_breach_is_an_error() {
        let err = integrate(|t| (1000.0 * t).sin().abs(), 0.0, 1.0, 1e-15, Budget { start_panels: 1, max_panels: 8 });
        assert!(matches!(err, Err(Error::QuadratureBudget { .. })));
    }

    #[test]
    fn adaptive_handles_peaks() {
        let y = 1e-6;
        let got = adaptive(|t| y / (PI * (t * t + y * y)), -1.0, 1.0, 1e-11, 60).unwrap();
        let exact = 2.0 * (1.0 / y).atan() / PI;
        assert!((got - exact).abs() < 1e-10);
    }
}
