//! Self-verification of every bound the constructions rely on, collected
//! into one machine-readable report.

use std::f64::consts::PI;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counterexamples::{
    build_fourier_divergent, build_ml_poisson, build_schnorr_poisson, tent, FourierOptions, StepConstruction,
    TentConstruction,
};
use crate::error::Result;
use crate::exact::{self, Rational};
use crate::functions::{BoundaryData, BoundaryFunction, PiecewiseLinear, StepFunction};
use crate::interval_sets::{RationalInterval, RationalIntervalUnion};
use crate::kernels;
use crate::poisson::{self, ScanSpec};
use crate::randomness_tests::{self as rt, covering_test, nest_tail};
use crate::trig::{self, ExactComplex, TrigPoly};

/// Size limits for [`verify_all`]. A zero count skips the checks that use it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Fejér identities for `N < fejer_degrees`.
    pub fejer_degrees: u64,
    /// Fejér lower bound for `1 ≤ N ≤ fejer_bound_degrees`.
    pub fejer_bound_degrees: u64,
    /// Degree range over which `A_p` is measured.
    pub a_p_range: u64,
    /// Fourier construction stages `n < fourier_stages`.
    pub fourier_stages: usize,
    /// Step construction stages `m < schnorr_stages`.
    pub schnorr_stages: usize,
    /// Tent construction stages `s < ml_stages`.
    pub ml_stages: usize,
    /// Derived-test stages `k < derived_stages`.
    pub derived_stages: usize,
    /// Length of the approximating sequence the derived tests are built from.
    pub derived_sequence: usize,
    pub weak_type_functions: usize,
    /// Random samples for pointwise inequalities.
    pub samples: usize,
    pub seed: u64,
    /// Negative control: perturbs one Fejér coefficient before checking.
    pub corrupt_fejer: bool,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            fejer_degrees: 65,
            fejer_bound_degrees: 200,
            a_p_range: 64,
            fourier_stages: 4,
            schnorr_stages: 25,
            ml_stages: 42,
            derived_stages: 9,
            derived_sequence: 31,
            weak_type_functions: 20,
            samples: 1000,
            seed: 0x5eed,
            corrupt_fejer: false,
        }
    }
}

impl Caps {
    pub fn zero() -> Self {
        Self {
            fejer_degrees: 0,
            fejer_bound_degrees: 0,
            a_p_range: 0,
            fourier_stages: 0,
            schnorr_stages: 0,
            ml_stages: 0,
            derived_stages: 0,
            derived_sequence: 0,
            weak_type_functions: 0,
            samples: 0,
            seed: 0,
            corrupt_fejer: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub module: String,
    pub bound: String,
    /// Decided in exact rational arithmetic.
    pub exact: bool,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub caps: Caps,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn entry(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

struct Report {
    entries: Vec<CheckEntry>,
}

impl Report {
    fn push(&mut self, id: &str, module: &str, bound: &str, exact: bool, outcome: Option<Result<(bool, String)>>) {
        let (status, detail) = match outcome {
            None => (Status::Skipped, "cap is zero".to_owned()),
            Some(Ok((true, d))) => (Status::Pass, d),
            Some(Ok((false, d))) => (Status::Fail, d),
            Some(Err(e)) => (Status::Fail, format!("error: {e}")),
        };
        self.entries.push(CheckEntry {
            id: id.to_owned(),
            module: module.to_owned(),
            bound: bound.to_owned(),
            exact,
            status,
            detail,
        });
    }
}

fn when<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Option<Result<T>> {
    enabled.then(f)
}

/// Random boundary data with small rational breakpoints: tents, sums of
/// tents and signed step functions, all supported in `[-4, 4]`.
pub fn sample_functions(seed: u64, count: usize) -> Vec<BoundaryFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| exact::ratio(rng.gen_range(-32..=32), 8);
    (0..count)
        .map(|j| {
            if j % 2 == 0 {
                let mut f = PiecewiseLinear::zero();
                for _ in 0..rng.gen_range(1..=3) {
                    let (a, b) = ordered(point(&mut rng), point(&mut rng));
                    let h = exact::ratio(rng.gen_range(-8..=8), 4);
                    f = f.add(&tent(&RationalInterval::closed(a, b)).expect("nondegenerate").scale(&h));
                }
                BoundaryFunction::Linear { vertices: f }
            } else {
                let sets: Vec<(Rational, RationalIntervalUnion)> = (0..rng.gen_range(1..=4))
                    .map(|_| {
                        let (a, b) = ordered(point(&mut rng), point(&mut rng));
                        let w = exact::ratio(rng.gen_range(-8..=8), 4);
                        (w, RationalIntervalUnion::from(RationalInterval::closed(a, b)))
                    })
                    .collect();
                BoundaryFunction::Step { pieces: StepFunction::weighted_sum(sets.iter().map(|(w, s)| (w.clone(), s))) }
            }
        })
        .collect()
}

fn ordered(a: Rational, b: Rational) -> (Rational, Rational) {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => (a, b),
        std::cmp::Ordering::Greater => (b, a),
        std::cmp::Ordering::Equal => (a.clone(), a + exact::ratio(1, 8)),
    }
}

/// `(‖f‖₁, P[f](x,y))` for either representation.
fn poisson_of(f: &BoundaryFunction, x: f64, y: f64) -> (f64, f64) {
    match f {
        BoundaryFunction::Step { pieces } => (exact::to_f64(&pieces.l1_norm()), pieces.poisson_integral(x, y)),
        BoundaryFunction::Linear { vertices } => (exact::to_f64(&vertices.l1_norm()), vertices.poisson_integral(x, y)),
    }
}

fn weak_type_of(f: &BoundaryFunction, alphas: &[f64], spec: &ScanSpec) -> Result<Vec<poisson::WeakTypeReport>> {
    match f {
        BoundaryFunction::Step { pieces } => poisson::weak_type_sweep(pieces, alphas, spec),
        BoundaryFunction::Linear { vertices } => poisson::weak_type_sweep(vertices, alphas, spec),
    }
}

fn fejer_coefficients_check(n_count: u64, corrupt: bool) -> Result<(bool, String)> {
    for n in 0..n_count {
        let mut poly = kernels::fejer_coeffs(n);
        if corrupt && n == n_count / 2 {
            poly = poly.add(&TrigPoly::monomial(0, ExactComplex::real(exact::ratio(1, 1 << 20))));
        }
        if poly.degree() > n {
            return Ok((false, format!("N={n}: degree {} exceeds N", poly.degree())));
        }
        for k in -(n as i64)..=(n as i64) {
            let want = exact::int(1) - exact::ratio(k.abs(), n as i64 + 1);
            if poly.exact_coefficient(k) != Some(ExactComplex::real(want.clone())) {
                return Ok((false, format!("N={n}, k={k}: coefficient differs from 1-|k|/(N+1) = {want}")));
            }
        }
    }
    Ok((true, format!("N in 0..{n_count}")))
}

/// Runs every check within `caps`.
pub fn verify_all(caps: &Caps) -> VerificationReport {
    let mut r = Report { entries: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(caps.seed);

    // -- kernels --------------------------------------------------------------
    r.push(
        "fejer.coefficients",
        "kernels",
        "F_N has coefficients 1-|k|/(N+1) on |k|<=N",
        true,
        when(caps.fejer_degrees > 0, || fejer_coefficients_check(caps.fejer_degrees, caps.corrupt_fejer)),
    );
    r.push(
        "fejer.closed_form",
        "kernels",
        "closed form of F_N equals its coefficient sum (1e-9)",
        false,
        when(caps.fejer_degrees > 0, || {
            let mut worst = 0.0_f64;
            for n in 0..caps.fejer_degrees {
                let poly = kernels::fejer_coeffs(n);
                for j in 0..200 {
                    let x = -PI + 2.0 * PI * (j as f64 + 0.5) / 200.0;
                    worst = worst.max((kernels::fejer_eval(n, x) - poly.eval(x).re).abs());
                }
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:e}")))
        }),
    );
    r.push(
        "fejer.lower_bound",
        "kernels",
        "F_N(x) >= 4(N+1)/pi^2 for |x| <= pi/(N+1)",
        false,
        when(caps.fejer_bound_degrees > 0, || {
            for n in 1..=caps.fejer_bound_degrees {
                let reach = PI / (n as f64 + 1.0);
                for j in 0..100 {
                    let x = -reach + 2.0 * reach * j as f64 / 99.0;
                    if kernels::fejer_eval(n, x) < kernels::fejer_lower_bound(n) {
                        return Ok((false, format!("N={n}, x={x}")));
                    }
                }
            }
            Ok((true, format!("N in 1..={}", caps.fejer_bound_degrees)))
        }),
    );
    r.push(
        "fejer.norm_equivalence",
        "kernels",
        "A_p^-1 <= ||F_N||_p/(N+1)^(1-1/p) <= A_p, A_p measured then tested on larger N",
        false,
        when(caps.a_p_range > 0, || {
            let a = kernels::measured_fejer_constant(2.0, caps.a_p_range, 1e-10)?;
            let probe = [2 * caps.a_p_range, 4 * caps.a_p_range];
            for n in probe {
                let ratio = kernels::fejer_lp_ratio(n, 2.0, 1e-10)?;
                if ratio > a || ratio < 1.0 / a {
                    return Ok((false, format!("N={n}: ratio {ratio} outside A_2={a}")));
                }
            }
            Ok((true, format!("A_2 = {a:.12} over N in 0..={}", caps.a_p_range)))
        }),
    );
    r.push(
        "poisson.kernel_bounds",
        "kernels",
        "0 < P_y(x) <= 1/(pi y)",
        false,
        when(caps.samples > 0, || {
            for _ in 0..caps.samples {
                let y = (rng.gen_range(-20.0..6.0f64)).exp2();
                let x = rng.gen_range(-50.0..50.0);
                let v = kernels::poisson_eval(y, x)?;
                if !(v > 0.0 && v <= 1.0 / (PI * y)) {
                    return Ok((false, format!("x={x}, y={y}: {v}")));
                }
            }
            Ok((true, format!("{} samples", caps.samples)))
        }),
    );
    r.push(
        "poisson.unit_mass",
        "kernels",
        "integral of P_y over R equals 1",
        false,
        when(caps.samples > 0, || {
            let mut worst = 0.0_f64;
            for _ in 0..caps.samples.min(200) {
                let y = (rng.gen_range(-30.0..10.0f64)).exp2();
                let total = kernels::poisson_interval_mass(y, f64::NEG_INFINITY, f64::INFINITY)?;
                if total != 1.0 {
                    return Ok((false, format!("y={y}: total mass {total}")));
                }
                let c = rng.gen_range(-3.0..3.0);
                let split = kernels::poisson_interval_mass(y, f64::NEG_INFINITY, c)?
                    + kernels::poisson_interval_mass(y, c, f64::INFINITY)?;
                worst = worst.max((split - 1.0).abs());
            }
            Ok((worst <= 1e-14, format!("max split deviation {worst:e}")))
        }),
    );

    // -- poisson ---------------------------------------------------------------
    let functions = sample_functions(caps.seed, caps.weak_type_functions.max(if caps.samples > 0 { 10 } else { 0 }));
    r.push(
        "poisson.mass_contraction",
        "poisson",
        "|P[f](x,y)| <= ||f||_1/(pi y)",
        false,
        when(caps.samples > 0 && !functions.is_empty(), || {
            for _ in 0..caps.samples {
                let f = &functions[rng.gen_range(0..functions.len())];
                let y = (rng.gen_range(-12.0..4.0f64)).exp2();
                let x = rng.gen_range(-8.0..8.0);
                let (l1, v) = poisson_of(f, x, y);
                if v.abs() > l1 / (PI * y) * (1.0 + 1e-12) {
                    return Ok((false, format!("x={x}, y={y}: {v} > {}", l1 / (PI * y))));
                }
            }
            Ok((true, format!("{} samples", caps.samples)))
        }),
    );
    r.push(
        "poisson.weak_type",
        "poisson",
        "lambda{P*f > a} <= (3/a)||f||_1 (grid measure + slack)",
        false,
        when(caps.weak_type_functions > 0, || {
            let alphas: Vec<f64> = (-3..=3).map(|e| (e as f64).exp2()).collect();
            let spec = ScanSpec::default();
            let mut worst = 0.0_f64;
            for (j, f) in functions.iter().take(caps.weak_type_functions).enumerate() {
                for rep in weak_type_of(f, &alphas, &spec)? {
                    if !rep.holds {
                        return Ok((false, format!("function {j}, alpha={}: {} > {}", rep.alpha, rep.measured, rep.bound)));
                    }
                    if rep.bound > 0.0 {
                        worst = worst.max(rep.measured / rep.bound);
                    }
                }
            }
            Ok((true, format!("largest measured/bound ratio {worst:.4}")))
        }),
    );

    // -- Fourier construction ------------------------------------------------
    let fourier = when(caps.fourier_stages > 0 && caps.a_p_range > 0, || {
        let t = covering_test(&exact::int(0), caps.fourier_stages, 2)?;
        build_fourier_divergent(
            &t,
            &FourierOptions { n_max: caps.fourier_stages - 1, a_p_range: caps.a_p_range, ..FourierOptions::default() },
        )
    });
    let on_fourier = |f: &dyn Fn(&crate::counterexamples::FourierConstruction) -> Result<(bool, String)>| match &fourier {
        None => None,
        Some(Ok(c)) => Some(f(c)),
        Some(Err(e)) => Some(Err(crate::Error::InvalidParameter { field: "fourier", reason: e.to_string() })),
    };
    r.push(
        "fourier.spectral_containment",
        "counterexamples",
        "spectrum of g_n inside [-N_n, N_n], N_n = floor((n+1)^(2p+2))",
        true,
        on_fourier(&|c| {
            let bad: Vec<usize> = (0..c.stages.len()).filter(|&n| !c.spectrum_contained(n)).collect();
            Ok((bad.is_empty(), format!("N = {:?}, violations at {bad:?}", c.stages.iter().map(|s| s.big_n).collect::<Vec<_>>())))
        }),
    );
    r.push(
        "fourier.g_lower_bound",
        "counterexamples",
        "g_n(t) >= 4C/pi^2 when 2^(-n-1) <= pi/(N_n+1)",
        false,
        on_fourier(&|c| {
            let beta = c.beta();
            let q: Vec<&crate::counterexamples::FourierStage> = c.stages.iter().filter(|s| s.qualifies).collect();
            let ok = q.iter().all(|s| s.g_at_target >= beta - 1e-9);
            let covered_ok = c.stages.iter().filter(|s| s.covered).all(|s| s.g_at_target >= beta - 1e-9);
            Ok((
                ok && covered_ok,
                format!(
                    "qualifying n = {:?}; centre-distance condition holds at n = {:?}",
                    q.iter().map(|s| s.n).collect::<Vec<_>>(),
                    c.stages.iter().filter(|s| s.covered).map(|s| s.n).collect::<Vec<_>>()
                ),
            ))
        }),
    );
    r.push(
        "fourier.summability",
        "counterexamples",
        "sum ||g_n||_p <= C A_p sum (2n+1)/(n+1)^(2+2/p)",
        false,
        on_fourier(&|c| {
            let norms = c.norm_partial_sums();
            let bounds = c.majorant_partial_sums();
            let per_stage = c.stages.iter().all(|s| s.g_norm <= s.norm_bound);
            let parseval = c
                .stages
                .iter()
                .filter_map(|s| s.g_norm_parseval.map(|p| (p - s.g_norm).abs() / p))
                .fold(0.0_f64, f64::max);
            let ok = per_stage && norms.iter().zip(&bounds).all(|(a, b)| a <= b) && parseval < 1e-8;
            Ok((ok, format!("partial sums {norms:?} vs {bounds:?}; Parseval rel. dev. {parseval:e}")))
        }),
    );
    r.push(
        "integral_test.growth",
        "randomness_tests",
        "T_(2n+2)(t) - T_(2n)(t) >= 4C/pi^2 at the covered point",
        false,
        on_fourier(&|c| {
            let inc = c.integral_test_increments(exact::to_f64(&c.options.target));
            let first = c.stages.iter().position(|s| s.qualifies || s.covered).unwrap_or(0);
            let ok = inc[first..].iter().all(|d| *d >= c.beta() - 1e-9);
            Ok((ok, format!("increments {inc:?}")))
        }),
    );
    r.push(
        "integral_test.integrability",
        "randomness_tests",
        "integral of |tau_N - tau_(N+1)| <= (2 pi)^((p-1)/p) ||tau_N - tau_(N+1)||_p",
        false,
        on_fourier(&|c| {
            // g_n >= 0, so its L1 norm is 2π times its mean coefficient.
            for s in &c.stages {
                let l1 = 2.0 * PI * s.g.coefficient(0).re;
                let p = c.options.p;
                let rhs = (2.0 * PI).powf((p - 1.0) / p) * s.g_norm;
                if l1 > rhs * (1.0 + 1e-9) {
                    return Ok((false, format!("n={}: {l1} > {rhs}", s.n)));
                }
            }
            Ok((true, format!("{} stages", c.stages.len())))
        }),
    );

    // -- Schnorr construction ------------------------------------------------
    let schnorr_depth = caps.schnorr_stages.max(caps.derived_sequence);
    let schnorr = when(schnorr_depth > 0, || {
        let v = nest_tail(&covering_test(&exact::int(0), schnorr_depth + 1, 2)?)?;
        Ok((v.clone(), build_schnorr_poisson(&v, schnorr_depth - 1)?))
    });
    let on_schnorr = |enabled: bool, f: &dyn Fn(&crate::randomness_tests::TestFamily, &StepConstruction) -> Result<(bool, String)>| {
        if !enabled {
            return None;
        }
        match &schnorr {
            None => None,
            Some(Ok((v, c))) => Some(f(v, c)),
            Some(Err(e)) => Some(Err(crate::Error::InvalidParameter { field: "schnorr", reason: e.to_string() })),
        }
    };
    let sch_on = caps.schnorr_stages > 0;
    let m_range = 0..caps.schnorr_stages;
    r.push(
        "nest_tail.measure",
        "randomness_tests",
        "lambda(V_n) <= 2^-(n+1)",
        true,
        on_schnorr(sch_on, &|v, _| {
            let bad = (0..v.depth()).find(|&n| v.stages()[n].measure() > exact::pow2(-(n as i64 + 1)));
            Ok((bad.is_none() && v.is_nested(), format!("{} stages, first violation {bad:?}", v.depth())))
        }),
    );
    let stage_check = |name: &'static str, pick: fn(&crate::counterexamples::StepStageChecks) -> bool| {
        let m_range = m_range.clone();
        move |_: &crate::randomness_tests::TestFamily, c: &StepConstruction| -> Result<(bool, String)> {
            let bad: Vec<usize> = m_range.clone().filter(|&m| !pick(&c.check_stage(m))).collect();
            Ok((bad.is_empty(), format!("{name}: m in {m_range:?}, violations {bad:?}")))
        }
    };
    r.push(
        "schnorr_poisson.integral_bound",
        "counterexamples",
        "integral f_m <= (2^(m+2) - m - 3)/2^(m-1)",
        true,
        on_schnorr(sch_on, &stage_check("integral", |s| s.integral_bound)),
    );
    r.push(
        "schnorr_poisson.step_bound",
        "counterexamples",
        "||f_(m+1) - f_m||_1 < (2m+5)/2^(m+1)",
        true,
        on_schnorr(sch_on, &stage_check("step", |s| s.step_bound)),
    );
    r.push(
        "schnorr_poisson.monotone",
        "counterexamples",
        "0 <= f_m <= f_(m+1)",
        true,
        on_schnorr(sch_on, &stage_check("monotone", |s| s.monotone && s.nonnegative)),
    );
    r.push(
        "schnorr_poisson.vanishing",
        "counterexamples",
        "f_m = 0 on V_m",
        true,
        on_schnorr(sch_on, &stage_check("vanishing", |s| s.vanishes_on_v)),
    );
    r.push(
        "schnorr_poisson.limit_mass",
        "counterexamples",
        "integral of the limit <= 8",
        true,
        on_schnorr(sch_on, &|_, c| {
            let bound = StepConstruction::limit_mass_bound();
            let last = &c.stages[caps.schnorr_stages - 1];
            // Σ_k 2^{-k}·2(k+1) summed in closed form: 8 − (2m + 8)/2^m after m+1 terms.
            let m = last.m as i64;
            let partial_series = exact::int(8) - exact::int(2 * m + 8) * exact::pow2(-m);
            let ok = c.stages.iter().all(|s| s.integral <= bound) && partial_series <= bound;
            Ok((ok, format!("integral f_{m} = {}", exact::format(&last.integral))))
        }),
    );
    r.push(
        "schnorr_poisson.radial_lower_bound",
        "poisson",
        "P[f_m](x,y) >= 3(2-2^-K)/(5 pi), K = floor|x|+1, when lambda(V_m) <= y/4; P_y(y/2) >= 4/(5 pi y)",
        false,
        on_schnorr(sch_on, &|_, c| {
            let mut checked = Vec::new();
            for j in 1..=30 {
                let y = exact::pow2(-j);
                let Some(m) = c.stage_for_height(&y) else { continue };
                if m >= caps.schnorr_stages {
                    continue;
                }
                let yf = exact::to_f64(&y);
                let v = poisson::poisson_integral(&c.stages[m].f, 0.0, yf)?;
                let bound = StepConstruction::radial_lower_bound(0.0);
                if v < bound - 1e-6 || !poisson::kernel_certificate(yf) {
                    return Ok((false, format!("y=2^-{j}, m={m}: {v} < {bound}")));
                }
                checked.push(j);
            }
            Ok((!checked.is_empty(), format!("heights 2^-j for j in {checked:?}")))
        }),
    );

    // -- ML construction -----------------------------------------------------
    let ml = when(caps.ml_stages > 0, || {
        let s_max = caps.ml_stages - 1;
        let t = covering_test(&exact::ratio(1, 3), s_max / 2 + 1, 0)?;
        build_ml_poisson(&t, s_max)
    });
    let on_ml = |f: &dyn Fn(&TentConstruction) -> Result<(bool, String)>| match &ml {
        None => None,
        Some(Ok(c)) => Some(f(c)),
        Some(Err(e)) => Some(Err(crate::Error::InvalidParameter { field: "ml", reason: e.to_string() })),
    };
    r.push(
        "ml_poisson.norm_bound",
        "counterexamples",
        "||f_(2n+1)||_1 <= (2n+1) lambda(U_n) <= (2n+1)/2^n",
        true,
        on_ml(&|c| {
            for s in 0..c.stages.len() {
                let ch = c.check_stage(s)?;
                if !(ch.measure_bound && ch.norm_bound) {
                    return Ok((false, format!("s={s}: norm {}", exact::format(&c.stages[s].l1_norm))));
                }
            }
            Ok((true, format!("s in 0..{}", c.stages.len())))
        }),
    );
    r.push(
        "ml_poisson.support",
        "counterexamples",
        "supp f_(2n+1) inside stage n",
        true,
        on_ml(&|c| {
            for s in 0..c.stages.len() {
                if !c.check_stage(s)?.support_contained {
                    return Ok((false, format!("s={s}")));
                }
            }
            Ok((true, format!("s in 0..{}", c.stages.len())))
        }),
    );
    r.push(
        "ml_poisson.variation",
        "counterexamples",
        "sum ||f_s - f_(s+1)||_1 <= sum (2n+1)/2^(n-1)",
        true,
        on_ml(&|c| {
            let sums = c.variation_partial_sums();
            let bounds = c.variation_bounds();
            let ok = sums.iter().zip(&bounds).all(|(a, b)| a <= b);
            let last = sums.last().map(exact::format).unwrap_or_default();
            Ok((ok, format!("total variation {last}")))
        }),
    );
    r.push(
        "ml_poisson.stage_pattern",
        "counterexamples",
        "f_s(x) > 0 at covering odd stages, f_s = 0 at even stages",
        true,
        on_ml(&|c| {
            let x = exact::ratio(1, 3);
            for (s, st) in c.stages.iter().enumerate() {
                let v = st.f.value_at(&x);
                let ok = if s % 2 == 0 { st.f.vertices().is_empty() } else { !c.covers(s, &x) || v > Rational::zero() };
                if !ok {
                    return Ok((false, format!("s={s}: f_s(x) = {v}")));
                }
            }
            Ok((true, "x = 1/3".to_owned()))
        }),
    );
    r.push(
        "ml_poisson.poisson_shadow",
        "poisson",
        "P[f_s](x,y) <= ||f_s||_1/(pi y)",
        false,
        on_ml(&|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(caps.seed ^ 0xa11);
            for _ in 0..caps.samples.clamp(20, 200) {
                let s = rng.gen_range(0..c.stages.len());
                let x = rng.gen_range(-1.0..2.0);
                let y = (rng.gen_range(-10.0..2.0f64)).exp2();
                let v = poisson::poisson_integral(&c.stages[s].f, x, y)?;
                let b = exact::to_f64(&c.stages[s].l1_norm) / (PI * y);
                if v > b * (1.0 + 1e-12) + 1e-300 {
                    return Ok((false, format!("s={s}, x={x}, y={y}: {v} > {b}")));
                }
            }
            Ok((true, "sampled stages and heights".to_owned()))
        }),
    );
    r.push(
        "ml_poisson.contraction",
        "poisson",
        "|P[f_m](x,y) - P[f_n](x,y)| <= ||f_m - f_n||_1/(pi y)",
        false,
        on_ml(&|c| {
            let fs = c.functions();
            let mut rng = ChaCha8Rng::seed_from_u64(caps.seed ^ 0xc0);
            for _ in 0..20 {
                let n = rng.gen_range(0..fs.len());
                let y = (rng.gen_range(-10.0..2.0f64)).exp2();
                let g = poisson::contraction_gap(&fs, 1.0 / 3.0, y, n)?;
                if !g.holds {
                    return Ok((false, format!("n={n}, y={y}: {} > {}", g.gap, g.bound)));
                }
            }
            Ok((true, "20 (y, n) pairs".to_owned()))
        }),
    );

    // -- derived tests ----------------------------------------------------------
    let derived_on = caps.derived_stages > 0 && caps.derived_sequence > 0;
    let derived_fs: Vec<StepFunction> = match &schnorr {
        Some(Ok((_, c))) if derived_on => c.stages.iter().take(caps.derived_sequence).map(|s| s.f.clone()).collect(),
        _ => Vec::new(),
    };
    let k_max = caps.derived_stages.min(derived_fs.len() / 2).saturating_sub(1);
    r.push(
        "derived.simple_measure",
        "randomness_tests",
        "lambda(V_k) <= (2+sqrt 2)/2^(k-1)",
        true,
        when(derived_on, || {
            for k in 0..=k_max {
                let st = rt::simple_test_from_approx(&derived_fs, k)?;
                if !st.bound_holds {
                    return Ok((false, format!("k={k}: measure {}", st.measure)));
                }
            }
            Ok((true, format!("k in 0..={k_max} over {} stages", derived_fs.len())))
        }),
    );
    r.push(
        "derived.simple_condition",
        "randomness_tests",
        "x outside V_k, n >= k, i >= 2n: |f_i(x) - f_(2n)(x)| <= (2+sqrt 2)/2^n",
        true,
        when(derived_on, || {
            let samples: Vec<Rational> = (-96..=96).map(|j| exact::ratio(j, 32)).chain((1..=40).map(|j| exact::pow2(-j))).collect();
            for k in 0..=k_max {
                let st = rt::simple_test_from_approx(&derived_fs, k)?;
                if let Some((x, n, i)) = rt::simple_condition_violation(&derived_fs, &st, &samples) {
                    return Ok((false, format!("k={k}, x={x}, n={n}, i={i}")));
                }
            }
            Ok((true, format!("{} sample points, implemented i < {}", samples.len(), derived_fs.len())))
        }),
    );
    let spec = ScanSpec::default();
    let sets = when(derived_on, || rt::poisson_exceedance_sets(&derived_fs, 0, &spec));
    r.push(
        "derived.schnorr_measure",
        "randomness_tests",
        "lambda(U_k) <= 3(sqrt 2 + 2)/2^k (grid slack reported)",
        false,
        sets.as_ref().map(|sets| {
            let sets = sets.as_ref().map_err(|e| crate::Error::InvalidParameter { field: "derived", reason: e.to_string() })?;
            let mut detail = Vec::new();
            for k in 0..=k_max {
                let st = rt::schnorr_stage_from_sets(sets, k)?;
                if !st.bound_holds {
                    return Ok((false, format!("k={k}: {} > {} + {}", st.measure, st.bound, st.grid_slack)));
                }
                detail.push(format!("k={k}: {:.3e}", st.measure));
            }
            Ok((true, detail.join(", ")))
        }),
    );
    r.push(
        "derived.schnorr_condition",
        "randomness_tests",
        "x outside U_k, n >= k: P[|f_i - f_(2n)|](x,y) <= (2+sqrt 2)/2^n on the height grid",
        false,
        sets.as_ref().map(|sets| {
            let sets = sets.as_ref().map_err(|e| crate::Error::InvalidParameter { field: "derived", reason: e.to_string() })?;
            let xs: Vec<f64> = (-300..=300).map(|j| j as f64 / 64.0 + 1.0 / 4096.0).collect();
            let last = derived_fs.len() - 1;
            let stages: Vec<rt::SchnorrTestStage> =
                (0..=k_max).map(|k| rt::schnorr_stage_from_sets(sets, k)).collect::<Result<_>>()?;
            let gaps: Vec<StepFunction> = (0..=last / 2).map(|n| derived_fs[last].difference(&derived_fs[2 * n]).abs()).collect();
            // U_k shrinks with k, so (k, n) with k ≤ n is covered by k = min(n, k_max).
            for &x in &xs {
                for (n, g) in gaps.iter().enumerate() {
                    if stages[n.min(k_max)].contains(x) {
                        continue;
                    }
                    let bound = (2.0 + 2f64.sqrt()) * (-(n as f64)).exp2();
                    let m = poisson::maximal_estimate(g, x, &spec.y_grid)?;
                    if m > bound + 1e-9 {
                        return Ok((false, format!("x={x}, n={n}: {m} > {bound}")));
                    }
                }
            }
            Ok((true, format!("{} sample points, deepest stage i = {last}", xs.len())))
        }),
    );

    // -- trig ------------------------------------------------------------------
    r.push(
        "trig.step_coefficients",
        "trig",
        "closed-form Fourier coefficients of step functions vs quadrature (1e-9)",
        false,
        when(caps.samples > 0, || {
            let mut rng = ChaCha8Rng::seed_from_u64(caps.seed ^ 0xf0);
            let mut worst = 0.0_f64;
            for _ in 0..20 {
                let a = exact::ratio(rng.gen_range(-25..25), 8);
                let b = &a + exact::ratio(rng.gen_range(1..8), 8);
                let f = StepFunction::indicator(&RationalIntervalUnion::from(RationalInterval::closed(a.clone(), b.clone())));
                let n = rng.gen_range(-12..=12i64);
                let got = trig::step_fourier_coefficient(&f, n);
                let (af, bf) = (exact::to_f64(&a), exact::to_f64(&b));
                let re = crate::quadrature::adaptive(|t| (n as f64 * t).cos() / (2.0 * PI), af, bf, 1e-13, 40)?;
                let im = crate::quadrature::adaptive(|t| -(n as f64 * t).sin() / (2.0 * PI), af, bf, 1e-13, 40)?;
                worst = worst.max((got.re - re).abs().max((got.im - im).abs()));
            }
            Ok((worst <= 1e-9, format!("max deviation {worst:e}")))
        }),
    );

    let passed = r.entries.iter().all(|e| e.status != Status::Fail);
    VerificationReport { passed, caps: caps.clone(), entries: r.entries }
}

/// Identifiers of every check, in report order.
pub fn check_ids() -> Vec<String> {
    verify_all(&Caps::zero()).entries.into_iter().map(|e| e.id).collect()
}
