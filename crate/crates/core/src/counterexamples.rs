//! The three explicit constructions: a function whose Fourier series
//! diverges on a test's core, a step-function sequence whose Poisson integral
//! stays large on a Schnorr null set, and a tent sequence that is weakly
//! computable yet has vanishing Poisson integrals.

use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::{BoundaryData, PiecewiseLinear, StepFunction};
use crate::interval_sets::{RationalInterval, RationalIntervalUnion};
use crate::kernels;
use crate::quadrature::{self, Budget};
use crate::randomness_tests::{enumerate_intervals, TestFamily};
use crate::trig::{self, ConvergenceTrace, TrigPoly};

// ---------------------------------------------------------------------------
// Fourier divergence

/// `⌊(n+1)^{2p+2}⌋`, exact when `p` is an integer.
pub fn fourier_degree(n: usize, p: f64) -> Result<u64> {
    let base = n as u64 + 1;
    if p.fract() == 0.0 && p > 0.0 && p < 64.0 {
        return base
            .checked_pow(2 * p as u32 + 2)
            .ok_or(Error::InvalidParameter { field: "n_max", reason: format!("N_{n} overflows u64") });
    }
    let v = (base as f64).powf(2.0 * p + 2.0).floor();
    if v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::InvalidParameter { field: "n_max", reason: format!("N_{n} overflows u64") })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierOptions {
    pub p: f64,
    pub c: u32,
    pub n_max: usize,
    /// Point the test family is meant to cover.
    pub target: Rational,
    /// Relative tolerance for the `L^p` quadratures.
    pub norm_tol: f64,
    /// `N` range over which the norm-equivalence constant is measured.
    pub a_p_range: u64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { p: 2.0, c: 1, n_max: 3, target: exact::int(0), norm_tol: 1e-10, a_p_range: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct FourierStage {
    pub n: usize,
    pub big_n: u64,
    pub intervals: Vec<RationalInterval>,
    pub g: TrigPoly,
    pub g_norm: f64,
    /// `‖g_n‖₂` from the coefficients; only for `p = 2`.
    pub g_norm_parseval: Option<f64>,
    /// `C·A_p·(2n+1)/(n+1)^{2+2/p}`.
    pub norm_bound: f64,
    pub g_at_target: f64,
    /// `2^{-n-1} ≤ π/(N_n+1)`.
    pub qualifies: bool,
    /// Some listed interval contains the target within `π/(N_n+1)` of its
    /// centre.
    pub covered: bool,
}

#[derive(Clone, Debug)]
pub struct FourierConstruction {
    pub options: FourierOptions,
    pub a_p: f64,
    pub stages: Vec<FourierStage>,
    /// `f_0, f_1, …, f_{2 n_max + 1}`.
    pub partial: Vec<TrigPoly>,
}

/// `(C/(N+1)) Σ_I F_N(θ − c(I))` evaluated pointwise.
fn g_closed_form(c: u32, big_n: u64, centres: &[f64], theta: f64) -> f64 {
    let s: f64 = centres.iter().map(|ci| kernels::fejer_eval(big_n, theta - ci)).sum();
    c as f64 / (big_n as f64 + 1.0) * s
}

fn lp_norm_closed_form(c: u32, big_n: u64, centres: &[f64], p: f64, rel_tol: f64) -> Result<f64> {
    let start = (2 * (big_n as usize + 1)).max(8);
    let f = |t: f64| g_closed_form(c, big_n, centres, t).abs().powf(p);
    let first = quadrature::gl10().composite(&mut |t| f(t), -PI, PI, start);
    let est = quadrature::integrate(
        f,
        -PI,
        PI,
        rel_tol * first.abs().max(f64::MIN_POSITIVE),
        Budget { start_panels: start, max_panels: start << 6 },
    )?;
    Ok(est.value.powf(1.0 / p))
}

pub fn build_fourier_divergent(t: &TestFamily, opts: &FourierOptions) -> Result<FourierConstruction> {
    if !(opts.p > 1.0) || !opts.p.is_finite() {
        return Err(Error::InvalidParameter { field: "p", reason: format!("need p > 1, got {}", opts.p) });
    }
    if opts.c == 0 {
        return Err(Error::InvalidParameter { field: "C", reason: "must be a positive integer".into() });
    }
    if t.depth() <= opts.n_max {
        return Err(Error::StageShortfall { available: t.depth(), needed: opts.n_max + 1 });
    }
    let a_p = kernels::measured_fejer_constant(opts.p, opts.a_p_range, opts.norm_tol)?;
    let target = exact::to_f64(&opts.target);
    let mut stages = Vec::with_capacity(opts.n_max + 1);
    let mut partial = vec![TrigPoly::zero()];
    for n in 0..=opts.n_max {
        let big_n = fourier_degree(n, opts.p)?;
        let intervals = enumerate_intervals(t, n, 2 * n + 1)?;
        let kernel = kernels::fejer_coeffs(big_n);
        let scale = Rational::new(opts.c.into(), (big_n + 1).into());
        let g = intervals
            .iter()
            .fold(TrigPoly::zero(), |acc, i| acc.add(&kernel.translate_rational(&i.center())))
            .scale(&scale);
        let centres: Vec<f64> = intervals.iter().map(|i| exact::to_f64(&i.center())).collect();
        let g_norm = lp_norm_closed_form(opts.c, big_n, &centres, opts.p, opts.norm_tol)?;
        let g_norm_parseval = (opts.p == 2.0).then(|| g.l2_norm_parseval());
        let norm_bound =
            opts.c as f64 * a_p * (2 * n + 1) as f64 / ((n + 1) as f64).powf(2.0 + 2.0 / opts.p);
        let reach = PI / (big_n as f64 + 1.0);
        let covered = intervals.iter().any(|i| {
            i.contains(&opts.target) && (exact::to_f64(&i.center()) - target).abs() <= reach
        });
        let qualifies = (-(n as f64) - 1.0).exp2() <= reach;
        let f_even = partial.last().cloned().unwrap_or_else(TrigPoly::zero);
        let f_odd = f_even.add(&g);
        partial.push(f_odd.clone());
        partial.push(f_odd);
        stages.push(FourierStage {
            n,
            big_n,
            g_at_target: g_closed_form(opts.c, big_n, &centres, target),
            intervals,
            g,
            g_norm,
            g_norm_parseval,
            norm_bound,
            qualifies,
            covered,
        });
    }
    // The loop pushes f_{2n+1} and f_{2n+2}; drop the trailing even stage.
    partial.pop();
    Ok(FourierConstruction { options: opts.clone(), a_p, stages, partial })
}

impl FourierConstruction {
    /// `β = 4C/π²`.
    pub fn beta(&self) -> f64 {
        4.0 * self.options.c as f64 / (PI * PI)
    }

    pub fn f_even(&self, n: usize) -> &TrigPoly {
        &self.partial[2 * n]
    }

    pub fn f_odd(&self, n: usize) -> &TrigPoly {
        &self.partial[2 * n + 1]
    }

    /// `true` iff no coefficient of `g_n` lies outside `[−N_n, N_n]`.
    pub fn spectrum_contained(&self, n: usize) -> bool {
        let s = &self.stages[n];
        s.g.degree() <= s.big_n
    }

    /// `C·A_p·Σ_{j≤n}(2j+1)/(j+1)^{2+2/p}` for each `n`.
    pub fn majorant_partial_sums(&self) -> Vec<f64> {
        self.stages
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.norm_bound;
                Some(*acc)
            })
            .collect()
    }

    /// `Σ_{j≤n} ‖g_j‖_p` for each `n`.
    pub fn norm_partial_sums(&self) -> Vec<f64> {
        self.stages
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.g_norm;
                Some(*acc)
            })
            .collect()
    }

    /// Integral-test partial sums `T_N(t)` over the stages `f_0, f_1, …`.
    pub fn integral_test(&self, t: f64) -> Vec<f64> {
        crate::randomness_tests::integral_test_partial_sums(&self.partial, t)
    }

    /// `T_{2n+2}(t) − T_{2n}(t)` for every construction stage `n`.
    pub fn integral_test_increments(&self, t: f64) -> Vec<f64> {
        let sums = self.integral_test(t);
        let at = |n: usize| if n == 0 { 0.0 } else { sums[(n - 1).min(sums.len() - 1)] };
        (0..self.stages.len()).map(|n| at(2 * n + 2) - at(2 * n)).collect()
    }

    /// `S_{N_n}(f)(t)` for the deepest stage at the checkpoints `N_0 < N_1 < …`.
    pub fn fourier_trace(&self, t: f64) -> Result<ConvergenceTrace> {
        let f = self.partial.last().expect("at least one stage");
        let checkpoints: Vec<u64> = self.stages.iter().map(|s| s.big_n).collect();
        trig::convergence_trace(f, t, &checkpoints)
    }

    /// Per-checkpoint `jump_n − g_n(t)`; nonzero because later `g_j` also
    /// have spectrum inside `[−N_n, N_n]`.
    pub fn jump_discrepancies(&self, t: f64) -> Result<Vec<f64>> {
        let trace = self.fourier_trace(t)?;
        Ok(trace
            .entries
            .iter()
            .zip(&self.stages)
            .map(|(e, s)| e.jump - g_closed_form(self.options.c, s.big_n, &centres(s), t))
            .collect())
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                json!({
                    "n": s.n,
                    "N": s.big_n,
                    "intervals": s.intervals,
                    "degree": s.g.degree(),
                    "coefficients_exact": s.g.is_exact(),
                    "coefficient_error_bound": s.g.error_bound(),
                    "g_norm": s.g_norm,
                    "g_norm_parseval": s.g_norm_parseval,
                    "norm_bound": s.norm_bound,
                    "g_at_target": s.g_at_target,
                    "qualifies": s.qualifies,
                    "covered": s.covered,
                })
            })
            .collect();
        json!({
            "construction": "fourier",
            "p": self.options.p,
            "C": self.options.c,
            "target": exact::format(&self.options.target),
            "A_p": self.a_p,
            "beta": self.beta(),
            "stages": stages,
        })
    }
}

fn centres(s: &FourierStage) -> Vec<f64> {
    s.intervals.iter().map(|i| exact::to_f64(&i.center())).collect()
}

// ---------------------------------------------------------------------------
// Schnorr Poisson counterexample

#[derive(Clone, Debug, PartialEq)]
pub struct StepStage {
    pub m: usize,
    pub v: RationalIntervalUnion,
    pub f: StepFunction,
    pub integral: Rational,
    /// `‖f_{m+1} − f_m‖₁`.
    pub step_norm: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepConstruction {
    pub stages: Vec<StepStage>,
    /// The tail family `V`, kept for membership queries.
    pub tail: TestFamily,
}

fn centred_interval(k: usize) -> RationalIntervalUnion {
    let r = exact::int(k as i64);
    RationalIntervalUnion::from(RationalInterval::closed(-r.clone(), r))
}

fn step_stage_function(v: &RationalIntervalUnion, m: usize) -> StepFunction {
    let sets: Vec<RationalIntervalUnion> = (0..=m).map(|k| centred_interval(k + 1).difference(v)).collect();
    StepFunction::weighted_sum(sets.iter().enumerate().map(|(k, s)| (exact::pow2(-(k as i64)), s)))
}

/// `f_m = Σ_{k=0}^m 2^{-k} χ_{[−(k+1), k+1] \ V_m}` for `m = 0..=m_max`.
pub fn build_schnorr_poisson(v: &TestFamily, m_max: usize) -> Result<StepConstruction> {
    if !v.is_nested() {
        let k = v.stages().windows(2).position(|w| !w[1].is_subset_of(&w[0])).unwrap_or(0);
        return Err(Error::NotNested(k + 1));
    }
    if v.depth() < m_max + 2 {
        return Err(Error::StageShortfall { available: v.depth(), needed: m_max + 2 });
    }
    for (n, s) in v.stages().iter().enumerate() {
        if s.measure() > exact::pow2(-(n as i64 + 1)) {
            return Err(Error::InvalidParameter { field: "T", reason: format!("stage {n} exceeds 2^-(n+1)") });
        }
    }
    let fs: Vec<StepFunction> = (0..=m_max + 1).map(|m| step_stage_function(&v.stages()[m], m)).collect();
    let stages = (0..=m_max)
        .map(|m| StepStage {
            m,
            v: v.stages()[m].clone(),
            integral: fs[m].integral(),
            step_norm: fs[m + 1].difference(&fs[m]).l1_norm(),
            f: fs[m].clone(),
        })
        .collect();
    Ok(StepConstruction { stages, tail: v.clone() })
}

/// Outcome of the exact per-stage checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepStageChecks {
    pub m: usize,
    pub integral_bound: bool,
    pub step_bound: bool,
    pub monotone: bool,
    pub nonnegative: bool,
    pub vanishes_on_v: bool,
}

impl StepStageChecks {
    pub fn all(&self) -> bool {
        self.integral_bound && self.step_bound && self.monotone && self.nonnegative && self.vanishes_on_v
    }
}

impl StepConstruction {
    pub fn functions(&self) -> Vec<StepFunction> {
        self.stages.iter().map(|s| s.f.clone()).collect()
    }

    /// `(2^{m+2} − m − 3)/2^{m−1}`.
    pub fn integral_bound(m: usize) -> Rational {
        (exact::pow2(m as i64 + 2) - exact::int(m as i64 + 3)) * exact::pow2(1 - m as i64)
    }

    /// `(2m+5)/2^{m+1}`.
    pub fn step_bound(m: usize) -> Rational {
        exact::int(2 * m as i64 + 5) * exact::pow2(-(m as i64 + 1))
    }

    pub fn check_stage(&self, m: usize) -> StepStageChecks {
        let s = &self.stages[m];
        let next = self.stages.get(m + 1).map(|n| n.f.clone()).unwrap_or_else(|| {
            step_stage_function(&self.tail.stages()[m + 1], m + 1)
        });
        let mut cuts = s.f.breakpoints();
        cuts.extend(s.v.parts().iter().flat_map(|p| [p.lo.clone(), p.hi.clone()]));
        cuts.sort();
        cuts.dedup();
        let vanishes_on_v = crate::interval_sets::elementary_cells(&cuts)
            .filter(|c| s.v.contains(&c.representative))
            .all(|c| s.f.value_at(&c.representative).is_zero());
        StepStageChecks {
            m,
            integral_bound: s.integral <= Self::integral_bound(m),
            step_bound: s.step_norm < Self::step_bound(m),
            monotone: s.f.le_everywhere(&next),
            nonnegative: StepFunction::zero().le_everywhere(&s.f),
            vanishes_on_v,
        }
    }

    /// Limit value `lim_m f_m(t)` over the implemented stages: `0` on the
    /// deepest stage of `V`, otherwise `Σ_{k ≥ k₀} 2^{-k} = 2^{1−k₀}` with
    /// `k₀ = max(0, ⌈|t|⌉ − 1)`.
    pub fn limit_value(&self, t: &Rational) -> Rational {
        if self.tail.stages().last().is_some_and(|v| v.contains(t)) {
            return Rational::zero();
        }
        let k0: num_bigint::BigInt = t.abs().ceil().to_integer() - 1;
        let k0 = i64::try_from(k0).unwrap_or(i64::MAX / 2).max(0);
        exact::pow2(1 - k0)
    }

    /// `∫ lim f_m = Σ_k 2^{-k}·λ([−(k+1), k+1] \ ⋂V) ≤ Σ_k 2^{-k}·2(k+1) = 8`.
    pub fn limit_mass_bound() -> Rational {
        exact::int(8)
    }

    /// Smallest implemented `m` with `λ(V_m) ≤ y/4`.
    pub fn stage_for_height(&self, y: &Rational) -> Option<usize> {
        let quarter = y / exact::int(4);
        self.stages.iter().position(|s| s.v.measure() <= quarter)
    }

    /// `3(2 − 2^{-K})/(5π)` with `K = ⌊|x|⌋ + 1`.
    pub fn radial_lower_bound(x: f64) -> f64 {
        let k = x.abs().floor() + 1.0;
        3.0 * (2.0 - (-k).exp2()) / (5.0 * PI)
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                json!({
                    "m": s.m,
                    "V_measure": exact::format(&s.v.measure()),
                    "V": s.v,
                    "integral": exact::format(&s.integral),
                    "integral_bound": exact::format(&Self::integral_bound(s.m)),
                    "step_norm": exact::format(&s.step_norm),
                    "step_bound": exact::format(&Self::step_bound(s.m)),
                    "pieces": s.f.pieces().len(),
                })
            })
            .collect();
        json!({ "construction": "schnorr_poisson", "stages": stages })
    }
}

// ---------------------------------------------------------------------------
// ML Poisson counterexample

/// Tent on `[a, b]`: zero at the ends, equal to one on the middle half.
pub fn tent(i: &RationalInterval) -> Result<PiecewiseLinear> {
    if i.lo >= i.hi {
        return Err(Error::DegenerateInterval { lo: exact::format(&i.lo), hi: exact::format(&i.hi) });
    }
    let (a, b) = (&i.lo, &i.hi);
    let four = exact::int(4);
    let three = exact::int(3);
    PiecewiseLinear::new(vec![
        (a.clone(), Rational::zero()),
        ((&three * a + b) / &four, exact::int(1)),
        ((a + &three * b) / &four, exact::int(1)),
        (b.clone(), Rational::zero()),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct TentStage {
    pub s: usize,
    pub intervals: Vec<RationalInterval>,
    pub f: PiecewiseLinear,
    pub l1_norm: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TentConstruction {
    pub stages: Vec<TentStage>,
    pub test: TestFamily,
}

/// `f_{2n+1} = Σ_{I ∈ 𝓘_n[2n+1]} tent(I)`, `f_{2n} = 0`, for `s ≤ s_max`.
pub fn build_ml_poisson(t: &TestFamily, s_max: usize) -> Result<TentConstruction> {
    let n_needed = if s_max == 0 { 0 } else { (s_max - 1) / 2 + 1 };
    if t.depth() < n_needed {
        return Err(Error::StageShortfall { available: t.depth(), needed: n_needed });
    }
    let stages = (0..=s_max)
        .map(|s| {
            if s % 2 == 0 {
                return Ok(TentStage { s, intervals: Vec::new(), f: PiecewiseLinear::zero(), l1_norm: Rational::zero() });
            }
            let n = (s - 1) / 2;
            let intervals = enumerate_intervals(t, n, s)?;
            let f = intervals.iter().try_fold(PiecewiseLinear::zero(), |acc, i| Ok::<_, Error>(acc.add(&tent(i)?)))?;
            Ok(TentStage { s, l1_norm: f.l1_norm(), intervals, f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TentConstruction { stages, test: t.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TentStageChecks {
    pub s: usize,
    /// `‖f_s‖₁ ≤ (2n+1)·λ(U_n)`.
    pub measure_bound: bool,
    /// `‖f_s‖₁ ≤ (2n+1)/2^n`.
    pub norm_bound: bool,
    /// Every tent lies inside stage `n`.
    pub support_contained: bool,
}

impl TentStageChecks {
    pub fn all(&self) -> bool {
        self.measure_bound && self.norm_bound && self.support_contained
    }
}

impl TentConstruction {
    pub fn functions(&self) -> Vec<PiecewiseLinear> {
        self.stages.iter().map(|s| s.f.clone()).collect()
    }

    /// `(2n+1)/2^n` for the odd stage `s = 2n+1`; zero for even `s`.
    pub fn norm_bound(s: usize) -> Rational {
        if s % 2 == 0 {
            return Rational::zero();
        }
        let n = (s - 1) / 2;
        exact::int(2 * n as i64 + 1) * exact::pow2(-(n as i64))
    }

    pub fn check_stage(&self, s: usize) -> Result<TentStageChecks> {
        let st = &self.stages[s];
        if s % 2 == 0 {
            let zero = st.f.vertices().is_empty();
            return Ok(TentStageChecks { s, measure_bound: zero, norm_bound: zero, support_contained: zero });
        }
        let n = (s - 1) / 2;
        let stage = self.test.stage(n)?;
        let k = exact::int(2 * n as i64 + 1);
        Ok(TentStageChecks {
            s,
            measure_bound: st.l1_norm <= &k * stage.measure(),
            norm_bound: st.l1_norm <= Self::norm_bound(s),
            support_contained: st
                .intervals
                .iter()
                .all(|i| RationalIntervalUnion::from(i.clone()).is_subset_of(stage)),
        })
    }

    /// Exact partial sums `Σ_{s<S} ‖f_s − f_{s+1}‖₁` for `S = 1..=s_max`.
    pub fn variation_partial_sums(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.stages
            .windows(2)
            .map(|w| {
                acc += w[0].f.difference(&w[1].f).l1_norm();
                acc.clone()
            })
            .collect()
    }

    /// `Σ (2n+1)/2^{n−1}` over odd stages `2n+1` touched by the first `S`
    /// transitions, for `S = 1..=s_max`.
    pub fn variation_bounds(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut acc = Rational::zero();
        for big_s in 1..self.stages.len() {
            // Transition s → s+1 with s = big_s − 1 touches odd stage s or s+1;
            // charge each odd stage once, when it is first touched.
            let s = big_s - 1;
            if s % 2 == 0 {
                let n = s / 2;
                acc += exact::int(2 * n as i64 + 1) * exact::pow2(1 - n as i64);
            }
            out.push(acc.clone());
        }
        out
    }

    /// Whether `x` lies in the open interior of some interval of stage `s`.
    pub fn covers(&self, s: usize, x: &Rational) -> bool {
        self.stages[s].intervals.iter().any(|i| &i.lo < x && x < &i.hi)
    }

    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                json!({
                    "s": s.s,
                    "intervals": s.intervals.len(),
                    "l1_norm": exact::format(&s.l1_norm),
                    "norm_bound": exact::format(&Self::norm_bound(s.s)),
                    "vertices": s.f.vertices().len(),
                })
            })
            .collect();
        json!({ "construction": "ml_poisson", "stages": stages })
    }
}
