//! Poisson integrals on the upper half-plane for step and piecewise-linear
//! boundary data: radial traces, maximal-operator estimates and level-set
//! scans.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::{BoundaryData, PiecewiseLinear, PoissonForm, StepFunction};
use crate::kernels;

fn check_height(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveHeight(y))
    }
}

/// `P[f](x, y) = ∫ P_y(x − t) f(t) dt`.
pub fn poisson_integral<F: BoundaryData>(f: &F, x: f64, y: f64) -> Result<f64> {
    check_height(y)?;
    Ok(f.poisson_integral(x, y))
}

pub fn poisson_integral_step(f: &StepFunction, x: f64, y: f64) -> Result<f64> {
    poisson_integral(f, x, y)
}

pub fn poisson_integral_pl(f: &PiecewiseLinear, x: f64, y: f64) -> Result<f64> {
    poisson_integral(f, x, y)
}

/// `y_j = 2^{-j}` for `j = 0..=30`.
pub fn default_y_sequence() -> Vec<f64> {
    (0..=30).map(|j| (-(j as f64)).exp2()).collect()
}

/// `2^{j/2}` for `j = -24..=12`, used wherever a supremum over heights is
/// approximated from below.
pub fn default_y_grid() -> Vec<f64> {
    (-24..=12).map(|j| (j as f64 / 2.0).exp2()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialEntry {
    pub y: f64,
    pub value: f64,
    /// A lower bound the value is expected to respect, when one applies.
    pub lower_bound: Option<f64>,
    /// Whether the lower bound is in force at this height.
    pub bound_active: bool,
    /// `P_y(y/2) ≥ 4/(5πy)`, evaluated numerically at this height.
    pub kernel_certificate: bool,
}

/// `P[f](x, y)` along a decreasing sequence of heights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialTrace {
    pub x: f64,
    pub entries: Vec<RadialEntry>,
    pub reference_value: Option<f64>,
}

impl RadialTrace {
    /// Attaches `bound(y)`; `None` leaves the entry without a bound.
    pub fn with_lower_bound(mut self, bound: impl Fn(f64) -> Option<f64>) -> Self {
        for e in &mut self.entries {
            e.lower_bound = bound(e.y);
            e.bound_active = e.lower_bound.is_some();
        }
        self
    }

    /// Entries whose active bound is violated.
    pub fn violations(&self) -> Vec<&RadialEntry> {
        self.entries
            .iter()
            .filter(|e| e.bound_active && e.lower_bound.is_some_and(|b| e.value < b))
            .collect()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.entries.last().map(|e| e.value)
    }

    /// CSV with columns `y,value,lower_bound,bound_active`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,value,lower_bound,bound_active\n");
        for e in &self.entries {
            let lb = e.lower_bound.map(|b| format!("{b:e}")).unwrap_or_default();
            out.push_str(&format!("{:e},{:e},{},{}\n", e.y, e.value, lb, e.bound_active));
        }
        out
    }
}

/// Four fifths of the kernel peak is attained on `|s| ≤ y/2`.
pub fn kernel_certificate(y: f64) -> bool {
    kernels::poisson_eval(y, 0.5 * y).is_ok_and(|v| v >= 4.0 / (5.0 * PI * y) * (1.0 - 1e-15))
}

pub fn radial_trace<F: BoundaryData>(f: &F, x: f64, ys: &[f64]) -> Result<RadialTrace> {
    if ys.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter { field: "y_seq", reason: "heights must decrease strictly".into() });
    }
    let entries = ys
        .iter()
        .map(|&y| {
            Ok(RadialEntry {
                y,
                value: poisson_integral(f, x, y)?,
                lower_bound: None,
                bound_active: false,
                kernel_certificate: kernel_certificate(y),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialTrace { x, entries, reference_value: Some(f.eval(x)) })
}

/// `max_{y ∈ grid} P[|f|](x, y)`, a lower bound for `P*f(x)`.
pub fn maximal_estimate<F: BoundaryData>(f: &F, x: f64, y_grid: &[f64]) -> Result<f64> {
    if y_grid.is_empty() {
        return Err(Error::InvalidParameter { field: "y_grid", reason: "empty height grid".into() });
    }
    max_over_grid(&f.abs().poisson_form(), x, y_grid)
}

fn max_over_grid(g: &PoissonForm, x: f64, y_grid: &[f64]) -> Result<f64> {
    y_grid.iter().try_fold(0.0_f64, |m, &y| {
        check_height(y)?;
        Ok(m.max(g.eval(x, y)))
    })
}

/// `(lo, hi, sup|f| on [lo, hi])` blocks covering the support of `f`.
pub(crate) fn envelope<F: BoundaryData>(f: &F) -> Vec<(f64, f64, f64)> {
    let cuts = f.breakpoints();
    cuts.windows(2)
        .filter_map(|w| {
            let sup = f.value_at(&w[0]).abs_f64().max(f.value_at(&w[1]).abs_f64()).max(
                f.value_at(&exact::midpoint(&w[0], &w[1])).abs_f64(),
            );
            (sup > 0.0).then(|| (exact::to_f64(&w[0]), exact::to_f64(&w[1]), sup))
        })
        .collect()
}

trait AbsF64 {
    fn abs_f64(&self) -> f64;
}

impl AbsF64 for Rational {
    fn abs_f64(&self) -> f64 {
        exact::to_f64(self).abs()
    }
}

/// Upper bound for `sup_{y>0} P[|f|](x, y)` from an [`envelope`]: each block
/// contributes its sup times the largest fraction of kernel mass it can
/// capture, which is the angle it subtends at the optimal height.
pub(crate) fn sup_upper_bound(env: &[(f64, f64, f64)], x: f64) -> f64 {
    env.iter()
        .map(|&(a, b, sup)| {
            if a <= x && x <= b {
                return sup;
            }
            let (near, far) = if x < a { (a - x, b - x) } else { (x - b, x - a) };
            sup * ((far - near) / (2.0 * (near * far).sqrt())).atan() / PI
        })
        .sum()
}

/// Sampling of the real line used for level-set measurements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSpec {
    /// Grid spacing; default `2^{-12}`.
    pub spacing: f64,
    pub y_grid: Vec<f64>,
    /// Refuse scans with more grid points than this.
    pub max_points: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { spacing: (-12f64).exp2(), y_grid: default_y_grid(), max_points: 1 << 24 }
    }
}

/// Range outside which `sup_y P[|f|] ≤ level` is guaranteed:
/// `P[|f|](x, y) ≤ ‖f‖₁ / (2π·dist(x, supp f))`.
fn scan_window<F: BoundaryData>(f: &F, level: f64) -> Option<(f64, f64)> {
    let (a, b) = f.support()?;
    let reach = exact::to_f64(&f.l1_norm()) / (2.0 * PI * level);
    Some((exact::to_f64(&a) - reach, exact::to_f64(&b) + reach))
}

/// Grid maximal estimate on the cell centres of a scan. Where the envelope
/// bound already rules out exceeding `floor`, the bound is stored instead.
struct Scan {
    lo: f64,
    spacing: f64,
    values: Vec<f64>,
}

impl Scan {
    fn above(&self, level: f64) -> impl Iterator<Item = bool> + '_ {
        self.values.iter().map(move |v| *v > level)
    }
}

fn scan_values<F: BoundaryData>(g_abs: &F, floor: f64, spec: &ScanSpec) -> Result<Option<Scan>> {
    let Some((lo, hi)) = scan_window(g_abs, floor) else { return Ok(None) };
    let count = ((hi - lo) / spec.spacing).ceil() as usize;
    if count > spec.max_points {
        return Err(Error::InvalidParameter {
            field: "scan",
            reason: format!("scan needs {count} points, limit is {}", spec.max_points),
        });
    }
    let env = envelope(g_abs);
    let form = g_abs.poisson_form();
    let values = (0..count)
        .map(|j| {
            let x = lo + (j as f64 + 0.5) * spec.spacing;
            let cheap = sup_upper_bound(&env, x);
            if cheap > floor {
                max_over_grid(&form, x, &spec.y_grid)
            } else {
                Ok(cheap)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Scan { lo, spacing: spec.spacing, values }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakTypeReport {
    pub alpha: f64,
    /// Grid measure of `{x : maximal_estimate(x) > alpha}`.
    pub measured: f64,
    /// One cell per boundary of the measured set.
    pub slack: f64,
    /// `(3/α)‖f‖₁`.
    pub bound: f64,
    pub holds: bool,
}

/// Grid measurement of `λ{P*f > α}` against `(3/α)‖f‖₁`.
pub fn weak_type_check<F: BoundaryData>(f: &F, alpha: f64, spec: &ScanSpec) -> Result<WeakTypeReport> {
    Ok(weak_type_sweep(f, &[alpha], spec)?.remove(0))
}

/// [`weak_type_check`] for several levels sharing one scan.
pub fn weak_type_sweep<F: BoundaryData>(f: &F, alphas: &[f64], spec: &ScanSpec) -> Result<Vec<WeakTypeReport>> {
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::InvalidParameter { field: "alpha", reason: format!("need alpha > 0, got {bad}") });
    }
    let Some(&floor) = alphas.iter().min_by(|a, b| a.total_cmp(b)) else { return Ok(Vec::new()) };
    let g = f.abs();
    let l1 = exact::to_f64(&f.l1_norm());
    let scan = scan_values(&g, floor, spec)?;
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let (measured, slack) = match &scan {
                None => (0.0, 0.0),
                Some(scan) => {
                    let above: Vec<bool> = scan.above(alpha).collect();
                    let hits = above.iter().filter(|a| **a).count();
                    let edges = above.windows(2).filter(|w| w[0] != w[1]).count() + 2;
                    (hits as f64 * scan.spacing, edges as f64 * scan.spacing)
                }
            };
            let bound = 3.0 / alpha * l1;
            WeakTypeReport { alpha, measured, slack, bound, holds: measured <= bound + slack }
        })
        .collect())
}

/// The open set `{x : max_{y∈grid} P[|g|](x, y) > level}` located by a
/// uniform scan and refined by bisection to `1e-9`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superlevel {
    pub components: Vec<(f64, f64)>,
    pub grid_slack: f64,
}

impl Superlevel {
    pub fn measure(&self) -> f64 {
        self.components.iter().map(|(a, b)| b - a).sum()
    }

    pub fn to_union(&self) -> crate::interval_sets::RationalIntervalUnion {
        crate::interval_sets::normalize(
            self.components
                .iter()
                .map(|&(a, b)| crate::interval_sets::RationalInterval::open(exact::from_f64(a), exact::from_f64(b))),
        )
    }
}

pub fn maximal_superlevel<F: BoundaryData>(f: &F, level: f64, spec: &ScanSpec) -> Result<Superlevel> {
    let g = f.abs();
    let Some(scan) = scan_values(&g, level, spec)? else {
        return Ok(Superlevel { components: Vec::new(), grid_slack: 0.0 });
    };
    let above: Vec<bool> = scan.above(level).collect();
    let form = g.poisson_form();
    let excess = |x: f64| -> Result<f64> { Ok(max_over_grid(&form, x, &spec.y_grid)? - level) };
    let centre = |j: usize| scan.lo + (j as f64 + 0.5) * scan.spacing;
    let refine = |inside: f64, outside: f64| -> Result<f64> {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..200 {
            if (b - a).abs() <= 1e-9 {
                return Ok(0.5 * (a + b));
            }
            let m = 0.5 * (a + b);
            let e = excess(m)?;
            if e.is_nan() {
                return Err(Error::Bisection(m));
            }
            if e > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Err(Error::Bisection(0.5 * (a + b)))
    };

    let mut components = Vec::new();
    let n = above.len();
    let mut j = 0;
    while j < n {
        if !above[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j < n && above[j] {
            j += 1;
        }
        // The scan window guarantees both neighbours lie outside the set.
        let left = if start == 0 { scan.lo } else { centre(start - 1) };
        let right = if j == n { scan.lo + n as f64 * scan.spacing } else { centre(j) };
        let a = refine(centre(start), left)?;
        let b = refine(centre(j - 1), right)?;
        components.push((a, b));
    }
    let grid_slack = scan.spacing * (2 * components.len() + 1) as f64;
    Ok(Superlevel { components, grid_slack })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionGap {
    pub deepest_stage: usize,
    pub n: usize,
    pub gap: f64,
    /// `(1/(πy))‖f_m − f_n‖₁`.
    pub bound: f64,
    pub l1_distance: String,
    pub holds: bool,
}

/// `|P[f_m](x,y) − P[f_n](x,y)|` for the deepest stage `m`, against
/// `‖f_m − f_n‖₁ / (πy)`.
pub fn contraction_gap<F: BoundaryData>(stages: &[F], x: f64, y: f64, n: usize) -> Result<ContractionGap> {
    check_height(y)?;
    let m = stages.len().checked_sub(1).ok_or(Error::StageShortfall { available: 0, needed: 1 })?;
    if n > m {
        return Err(Error::StageShortfall { available: stages.len(), needed: n + 1 });
    }
    let gap = (stages[m].poisson_integral(x, y) - stages[n].poisson_integral(x, y)).abs();
    let dist = stages[m].difference(&stages[n]).l1_norm();
    let bound = exact::to_f64(&dist) / (PI * y);
    Ok(ContractionGap { deepest_stage: m, n, gap, bound, l1_distance: exact::format(&dist), holds: gap <= bound + 1e-9 })
}
