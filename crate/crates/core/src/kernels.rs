//! Dirichlet, Fejér and Poisson kernels.
//!
//! Trigonometric kernels use the `e^{imx}` convention:
//! `D_N(x) = Σ_{|m|≤N} e^{imx} = sin((N+½)x) / sin(x/2)` and
//! `F_N(x) = (1/(N+1)) (sin((N+1)x/2) / sin(x/2))²`. Point values are
//! doubles; coefficient objects are exact.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::{self, ratio};
use crate::quadrature::{self, Budget};
use crate::trig::{ExactComplex, TrigPoly};

/// Below this `|sin(x/2)|` the closed forms are replaced by the finite sums.
pub const SINGULAR_CUTOFF: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Dirichlet(u64),
    Fejer(u64),
    Poisson(f64),
}

impl Kernel {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match *self {
            Kernel::Dirichlet(n) => Ok(dirichlet_eval(n, x)),
            Kernel::Fejer(n) => Ok(fejer_eval(n, x)),
            Kernel::Poisson(y) => poisson_eval(y, x),
        }
    }
}

pub fn dirichlet_eval(n: u64, x: f64) -> f64 {
    let s = (0.5 * x).sin();
    if s.abs() < SINGULAR_CUTOFF {
        1.0 + 2.0 * (1..=n).map(|m| (m as f64 * x).cos()).sum::<f64>()
    } else {
        ((n as f64 + 0.5) * x).sin() / s
    }
}

pub fn fejer_eval(n: u64, x: f64) -> f64 {
    let s = (0.5 * x).sin();
    let np1 = n as f64 + 1.0;
    if s.abs() < SINGULAR_CUTOFF {
        1.0 + 2.0 * (1..=n).map(|m| (1.0 - m as f64 / np1) * (m as f64 * x).cos()).sum::<f64>()
    } else {
        let r = (0.5 * np1 * x).sin() / s;
        r * r / np1
    }
}

/// The pointwise lower bound `(4/π²)(N+1)` valid on `|x| ≤ π/(N+1)`.
pub fn fejer_lower_bound(n: u64) -> f64 {
    4.0 / (PI * PI) * (n as f64 + 1.0)
}

/// Exact Fejér coefficients: `1 − |k|/(N+1)` for `|k| ≤ N`.
pub fn fejer_coeffs(n: u64) -> TrigPoly {
    let np1 = n as i64 + 1;
    TrigPoly::from_exact((-(n as i64)..=n as i64).map(|k| (k, ExactComplex::real(ratio(np1 - k.abs(), np1)))))
}

/// Exact Dirichlet coefficients: all ones on `|k| ≤ N`.
pub fn dirichlet_coeffs(n: u64) -> TrigPoly {
    TrigPoly::from_exact((-(n as i64)..=n as i64).map(|k| (k, ExactComplex::real(exact::int(1)))))
}

fn check_height(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveHeight(y))
    }
}

/// `P_y(x) = (1/π) · y / (x² + y²)`.
pub fn poisson_eval(y: f64, x: f64) -> Result<f64> {
    check_height(y)?;
    Ok(y / (PI * (x * x + y * y)))
}

/// `arctan(u) − arctan(v)`, using `arctan((u−v)/(1+uv))` when `u` and `v`
/// share a sign so that far-off intervals do not cancel catastrophically.
pub fn atan_diff(u: f64, v: f64) -> f64 {
    if u.is_finite() && v.is_finite() && u * v > 0.0 {
        ((u - v) / (1.0 + u * v)).atan()
    } else {
        u.atan() - v.atan()
    }
}

/// `∫_a^b P_y(x) dx = (1/π)(arctan(b/y) − arctan(a/y))`; infinite ends allowed.
pub fn poisson_interval_mass(y: f64, a: f64, b: f64) -> Result<f64> {
    check_height(y)?;
    if a > b {
        return Err(Error::InvalidParameter { field: "a", reason: format!("need a <= b, got [{a}, {b}]") });
    }
    Ok(atan_diff(b / y, a / y) / PI)
}

/// `‖F_N‖_p / (N+1)^{1−1/p}` over `[-π, π]`.
///
/// The integral of `F_N^p` is refined by panel doubling until successive
/// estimates differ by less than `tol` (relative to the leading-order size
/// `(N+1)^{p−1}`); exceeding the panel budget is reported as an error.
pub fn fejer_lp_ratio(n: u64, p: f64, tol: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter { field: "p", reason: format!("need finite p > 1, got {p}") });
    }
    let np1 = n as f64 + 1.0;
    let scale = np1.powf(p - 1.0);
    let start = (2 * (n as usize + 1)).max(4);
    let est = quadrature::integrate(
        |x| fejer_eval(n, x).powf(p),
        -PI,
        PI,
        tol * scale,
        Budget { start_panels: start, max_panels: start << 10 },
    )?;
    Ok(est.value.powf(1.0 / p) / np1.powf(1.0 - 1.0 / p))
}

/// Measured norm-equivalence constant: the smallest `A ≥ 1` with
/// `A^{-1} ≤ fejer_lp_ratio(N, p) ≤ A` for every `N` in `0..=n_max`.
pub fn measured_fejer_constant(p: f64, n_max: u64, tol: f64) -> Result<f64> {
    (0..=n_max).try_fold(1.0_f64, |acc, n| {
        let r = fejer_lp_ratio(n, p, tol)?;
        Ok(acc.max(r).max(1.0 / r))
    })
}
