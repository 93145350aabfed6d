//! Trigonometric polynomials `Σ c_n e^{int}` on `[-π, π]`.
//!
//! Coefficients are exact complex rationals until an operation needs a
//! transcendental factor (translation by a nonzero shift); from then on the
//! polynomial carries float coefficients plus an ℓ¹ bound on the coefficient
//! error accumulated so far. The analysis integral uses `e^{-int}`, so that
//! `S_d(p) = p` for `d = degree(p)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::StepFunction;
use crate::quadrature::{self, Budget};

/// Complex number with rational real and imaginary parts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: Rational,
    pub im: Rational,
}

impl ExactComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(exact::to_f64(&self.re), exact::to_f64(&self.im))
    }

    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn scale(&self, s: &Rational) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Coefficients {
    Exact(BTreeMap<i64, ExactComplex>),
    Approx(BTreeMap<i64, Complex64>),
}

/// A finite trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    coeffs: Coefficients,
    /// ℓ¹ bound on coefficient error; zero in exact mode.
    error_bound: f64,
}

impl Default for TrigPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self { coeffs: Coefficients::Exact(BTreeMap::new()), error_bound: 0.0 }
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, ExactComplex::real(c))
    }

    /// `c · e^{int}`.
    pub fn monomial(n: i64, c: ExactComplex) -> Self {
        Self::from_exact([(n, c)])
    }

    pub fn from_exact(terms: impl IntoIterator<Item = (i64, ExactComplex)>) -> Self {
        let mut map = BTreeMap::new();
        for (n, c) in terms {
            let slot: &mut ExactComplex = map.entry(n).or_default();
            *slot = slot.add(&c);
        }
        map.retain(|_, c: &mut ExactComplex| !c.is_zero());
        Self { coeffs: Coefficients::Exact(map), error_bound: 0.0 }
    }

    pub fn from_approx(terms: impl IntoIterator<Item = (i64, Complex64)>, error_bound: f64) -> Self {
        let mut map = BTreeMap::new();
        for (n, c) in terms {
            *map.entry(n).or_insert(Complex64::zero()) += c;
        }
        map.retain(|_, c: &mut Complex64| !c.is_zero());
        Self { coeffs: Coefficients::Approx(map), error_bound }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.coeffs, Coefficients::Exact(_))
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// Smallest `d` with `S_d(p) = p`; the zero polynomial has degree 0.
    pub fn degree(&self) -> u64 {
        let max_abs = |keys: &mut dyn Iterator<Item = i64>| keys.map(i64::unsigned_abs).max().unwrap_or(0);
        match &self.coeffs {
            Coefficients::Exact(m) => max_abs(&mut m.keys().copied()),
            Coefficients::Approx(m) => max_abs(&mut m.keys().copied()),
        }
    }

    pub fn len(&self) -> usize {
        match &self.coeffs {
            Coefficients::Exact(m) => m.len(),
            Coefficients::Approx(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequencies carrying a nonzero coefficient, ascending.
    pub fn frequencies(&self) -> Vec<i64> {
        match &self.coeffs {
            Coefficients::Exact(m) => m.keys().copied().collect(),
            Coefficients::Approx(m) => m.keys().copied().collect(),
        }
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        match &self.coeffs {
            Coefficients::Exact(m) => m.get(&n).map_or(Complex64::zero(), ExactComplex::to_complex),
            Coefficients::Approx(m) => m.get(&n).copied().unwrap_or_default(),
        }
    }

    /// `None` when the polynomial is in float mode.
    pub fn exact_coefficient(&self, n: i64) -> Option<ExactComplex> {
        match &self.coeffs {
            Coefficients::Exact(m) => Some(m.get(&n).cloned().unwrap_or_default()),
            Coefficients::Approx(_) => None,
        }
    }

    pub fn terms(&self) -> Vec<(i64, Complex64)> {
        match &self.coeffs {
            Coefficients::Exact(m) => m.iter().map(|(n, c)| (*n, c.to_complex())).collect(),
            Coefficients::Approx(m) => m.iter().map(|(n, c)| (*n, *c)).collect(),
        }
    }

    fn abs_coeff_sum(&self) -> f64 {
        self.terms().iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.eval_partial(t, u64::MAX)
    }

    /// `S_N(f)(t)` without materialising the truncation.
    pub fn eval_partial(&self, t: f64, n_max: u64) -> Complex64 {
        let term = |n: i64, c: Complex64| c * Complex64::cis(n as f64 * t);
        match &self.coeffs {
            Coefficients::Exact(m) => m
                .iter()
                .filter(|(n, _)| n.unsigned_abs() <= n_max)
                .map(|(n, c)| term(*n, c.to_complex()))
                .sum(),
            Coefficients::Approx(m) => m
                .iter()
                .filter(|(n, _)| n.unsigned_abs() <= n_max)
                .map(|(n, c)| term(*n, *c))
                .sum(),
        }
    }

    /// Bound on `|eval(t) − true value|`: stored coefficient error plus
    /// rounding in the phase `n·t` and the summation.
    pub fn eval_error_bound(&self, t: f64) -> f64 {
        let rounding: f64 = self
            .terms()
            .iter()
            .map(|(n, c)| c.norm() * (4.0 + (*n as f64 * t).abs()) * f64::EPSILON)
            .sum();
        self.error_bound + rounding + self.len() as f64 * f64::EPSILON * self.abs_coeff_sum()
    }

    /// `S_N(f)`: restriction of the spectrum to `|n| ≤ N`.
    pub fn partial_sum(&self, n_max: u64) -> TrigPoly {
        let keep = |n: &i64| n.unsigned_abs() <= n_max;
        let coeffs = match &self.coeffs {
            Coefficients::Exact(m) => Coefficients::Exact(m.iter().filter(|(n, _)| keep(n)).map(|(n, c)| (*n, c.clone())).collect()),
            Coefficients::Approx(m) => Coefficients::Approx(m.iter().filter(|(n, _)| keep(n)).map(|(n, c)| (*n, *c)).collect()),
        };
        TrigPoly { coeffs, error_bound: self.error_bound }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        match (&self.coeffs, &other.coeffs) {
            (Coefficients::Exact(a), Coefficients::Exact(b)) => {
                TrigPoly::from_exact(a.iter().chain(b.iter()).map(|(n, c)| (*n, c.clone())))
            }
            _ => {
                let terms = self.terms().into_iter().chain(other.terms());
                let rounding = f64::EPSILON * (self.abs_coeff_sum() + other.abs_coeff_sum());
                TrigPoly::from_approx(terms, self.error_bound + other.error_bound + rounding)
            }
        }
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(&exact::int(-1)))
    }

    pub fn scale(&self, s: &Rational) -> TrigPoly {
        match &self.coeffs {
            Coefficients::Exact(m) => TrigPoly::from_exact(m.iter().map(|(n, c)| (*n, c.scale(s)))),
            Coefficients::Approx(m) => {
                let f = exact::to_f64(s);
                let rounding = f64::EPSILON * f.abs() * self.abs_coeff_sum();
                TrigPoly::from_approx(m.iter().map(|(n, c)| (*n, c * f)), self.error_bound * f.abs() + rounding)
            }
        }
    }

    /// `t ↦ f(t − c)`: the coefficient at `n` is multiplied by `e^{-inc}`.
    pub fn translate(&self, c: f64) -> TrigPoly {
        if c == 0.0 {
            return self.clone();
        }
        let mut added = 0.0;
        let terms: Vec<(i64, Complex64)> = self
            .terms()
            .into_iter()
            .map(|(n, a)| {
                let phase = -(n as f64) * c;
                added += a.norm() * (phase.abs() + 4.0) * f64::EPSILON;
                (n, a * Complex64::cis(phase))
            })
            .collect();
        TrigPoly::from_approx(terms, self.error_bound + added)
    }

    /// Translation by a rational shift; the zero shift stays exact.
    pub fn translate_rational(&self, c: &Rational) -> TrigPoly {
        if c.is_zero() {
            self.clone()
        } else {
            // Converting c to a float perturbs each phase by |n|·|c|·ε/2 more.
            let cf = exact::to_f64(c);
            let mut shifted = self.translate(cf);
            shifted.error_bound += self
                .terms()
                .iter()
                .map(|(n, a)| a.norm() * (*n as f64).abs() * cf.abs() * f64::EPSILON)
                .sum::<f64>();
            shifted
        }
    }

    /// `Σ |c_n|²` exactly, when in exact mode.
    pub fn exact_energy(&self) -> Option<Rational> {
        match &self.coeffs {
            Coefficients::Exact(m) => Some(m.values().map(ExactComplex::norm_sqr).sum()),
            Coefficients::Approx(_) => None,
        }
    }

    /// `‖f‖₂` from Parseval: `sqrt(2π Σ |c_n|²)`.
    pub fn l2_norm_parseval(&self) -> f64 {
        let energy: f64 = match self.exact_energy() {
            Some(e) => exact::to_f64(&e),
            None => self.terms().iter().map(|(_, c)| c.norm_sqr()).sum(),
        };
        (2.0 * PI * energy).sqrt()
    }

    /// `(∫_{-π}^{π} |f|^p)^{1/p}` by controlled-error quadrature.
    ///
    /// `tol` bounds the change between successive refinements of the
    /// integral of `|f|^p`.
    pub fn lp_norm(&self, p: f64, tol: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter { field: "p", reason: format!("need p >= 1, got {p}") });
        }
        let terms = self.terms();
        let start = (2 * self.degree() as usize + 2).max(4);
        let budget = Budget { start_panels: start, max_panels: start.max(4) << 8 };
        let est = quadrature::integrate(
            |t| terms.iter().map(|(n, c)| c * Complex64::cis(*n as f64 * t)).sum::<Complex64>().norm().powf(p),
            -PI,
            PI,
            tol,
            budget,
        )?;
        Ok(est.value.powf(1.0 / p))
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = match &self.coeffs {
            Coefficients::Exact(m) => m
                .iter()
                .map(|(n, c)| (n.to_string(), Value::from(vec![exact::format(&c.re), exact::format(&c.im)])))
                .collect(),
            Coefficients::Approx(m) => m.iter().map(|(n, c)| (n.to_string(), Value::from(vec![c.re, c.im]))).collect(),
        };
        Value::Object(map)
    }

    /// Accepts the output of [`TrigPoly::to_json`]: string pairs read as
    /// exact rationals, numeric pairs as floats.
    pub fn from_json(v: &Value) -> Result<TrigPoly> {
        let bad = |why: &str| Error::InvalidParameter { field: "trig_poly", reason: why.to_owned() };
        let obj = v.as_object().ok_or_else(|| bad("expected a JSON object"))?;
        let mut exact_terms = Vec::new();
        let mut approx_terms = Vec::new();
        for (k, pair) in obj {
            let n: i64 = k.parse().map_err(|_| bad("frequency keys must be integers"))?;
            let arr = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("coefficients are [re, im] pairs"))?;
            match (&arr[0], &arr[1]) {
                (Value::String(re), Value::String(im)) => {
                    exact_terms.push((n, ExactComplex::new(exact::parse(re)?, exact::parse(im)?)))
                }
                (re, im) => {
                    let (re, im) = (re.as_f64(), im.as_f64());
                    let (re, im) = re.zip(im).ok_or_else(|| bad("mixed or non-numeric coefficient"))?;
                    approx_terms.push((n, Complex64::new(re, im)));
                }
            }
        }
        match (exact_terms.is_empty(), approx_terms.is_empty()) {
            (_, true) => Ok(TrigPoly::from_exact(exact_terms)),
            (true, false) => Ok(TrigPoly::from_approx(approx_terms, 0.0)),
            (false, false) => Err(bad("exact and float coefficients cannot be mixed")),
        }
    }
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        TrigPoly::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `c_n(f) = (1/2π) ∫ f(t) e^{-int} dt` of a step function supported in
/// `[-π, π]`, in closed form.
pub fn step_fourier_coefficient(f: &StepFunction, n: i64) -> Complex64 {
    let mut total = Complex64::zero();
    for (piece, value) in f.pieces() {
        let (a, b) = (exact::to_f64(&piece.lo), exact::to_f64(&piece.hi));
        let v = exact::to_f64(value);
        if n == 0 {
            total += v * (b - a);
        } else {
            let nf = n as f64;
            // ∫_a^b e^{-int} dt = (e^{-inb} − e^{-ina}) / (−in)
            let diff = Complex64::cis(-nf * b) - Complex64::cis(-nf * a);
            total += v * diff / Complex64::new(0.0, -nf);
        }
    }
    total / (2.0 * PI)
}

/// Step functions must live inside `[-π, π]` to be read as periodic data.
pub fn check_supported_in_period(f: &StepFunction) -> Result<()> {
    let inside = f
        .pieces()
        .iter()
        .all(|(p, _)| exact::to_f64(&p.lo) >= -PI && exact::to_f64(&p.hi) <= PI);
    if inside {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field: "f", reason: "step function leaves [-pi, pi]".into() })
    }
}

/// One recorded partial-sum value.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub n: u64,
    pub value: Complex64,
    /// `|value − previous value|`; the first entry is measured from the
    /// empty sum `0`.
    pub jump: f64,
}

/// `S_N(f)(t)` sampled at increasing `N`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub t: f64,
    pub entries: Vec<TraceEntry>,
}

impl ConvergenceTrace {
    pub fn from_values(t: f64, values: impl IntoIterator<Item = (u64, Complex64)>) -> Result<Self> {
        let mut entries: Vec<TraceEntry> = Vec::new();
        for (n, value) in values {
            let jump = match entries.last() {
                Some(prev) if prev.n >= n => {
                    return Err(Error::InvalidParameter {
                        field: "checkpoints",
                        reason: format!("checkpoints must increase strictly ({} then {n})", prev.n),
                    })
                }
                Some(prev) => (value - prev.value).norm(),
                None => value.norm(),
            };
            entries.push(TraceEntry { n, value, jump });
        }
        Ok(Self { t, entries })
    }

    /// CSV with columns `n,value_re,value_im,jump`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value_re,value_im,jump\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", e.n, e.value.re, e.value.im, e.jump));
        }
        out
    }
}

/// Records `S_N(f)(t)` at each checkpoint.
pub fn convergence_trace(f: &TrigPoly, t: f64, checkpoints: &[u64]) -> Result<ConvergenceTrace> {
    ConvergenceTrace::from_values(t, checkpoints.iter().map(|&n| (n, f.eval_partial(t, n))))
}

/// Same as [`convergence_trace`] for a source that yields `S_N(f)(t)` on
/// demand (e.g. a construction that never materialises `f`).
pub fn convergence_trace_with<F: FnMut(u64) -> Complex64>(mut partial: F, t: f64, checkpoints: &[u64]) -> Result<ConvergenceTrace> {
    ConvergenceTrace::from_values(t, checkpoints.iter().map(|&n| (n, partial(n))))
}

/// Relative agreement helper used by checks that compare closed forms.
pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::kernels;
    use proptest::prelude::*;

    fn e(n: i64) -> TrigPoly {
        TrigPoly::monomial(n, ExactComplex::real(int(1)))
    }

    #[test]
    fn constant_and_monomials() {
        let one = TrigPoly::constant(int(1));
        assert!(close(one.eval(0.7), Complex64::new(1.0, 0.0), 1e-15));
        assert_eq!(one.degree(), 0);
        assert_eq!(TrigPoly::zero().degree(), 0);
        let e3 = e(3);
        assert_eq!(e3.exact_coefficient(3), Some(ExactComplex::real(int(1))));
        assert_eq!(e3.exact_coefficient(2), Some(ExactComplex::default()));
        assert_eq!(e3.degree(), 3);
    }

    #[test]
    fn partial_sum_examples() {
        let c = TrigPoly::constant(ratio(5, 7));
        assert_eq!(c.partial_sum(0), c);
        let f2 = kernels::fejer_coeffs(2);
        assert_eq!(f2.partial_sum(2), f2);
        assert_eq!(f2.partial_sum(7), f2);
        let s1 = f2.partial_sum(1);
        let expected = TrigPoly::from_exact([
            (-1, ExactComplex::real(ratio(2, 3))),
            (0, ExactComplex::real(int(1))),
            (1, ExactComplex::real(ratio(2, 3))),
        ]);
        assert_eq!(s1, expected);
    }

    #[test]
    fn fejer_poly_matches_closed_form() {
        let f5 = kernels::fejer_coeffs(5);
        assert!((f5.eval(0.0).re - 6.0).abs() < 1e-12);
        assert!((f5.eval(1.3).re - kernels::fejer_eval(5, 1.3)).abs() < 1e-9);
    }

    #[test]
    fn translation_moves_the_peak() {
        let f = kernels::fejer_coeffs(9);
        assert_eq!(f.translate(0.0), f);
        let c = 0.37;
        let g = f.translate(c);
        assert!(!g.is_exact());
        assert!((g.eval(c).re - 10.0).abs() < 1e-12);
        for t in [-2.0, -0.1, 0.5, 3.0] {
            assert!(close(g.eval(t), f.eval(t - c), 1e-9));
        }
        assert!((g.l2_norm_parseval() - f.l2_norm_parseval()).abs() < 1e-12);
        assert!(g.eval_error_bound(c) > 0.0 && g.eval_error_bound(c) < 1e-10);
    }

    #[test]
    fn lp_norm_examples() {
        let one = TrigPoly::constant(int(1));
        for p in [1.0, 1.5, 2.0, 3.0] {
            let got = one.lp_norm(p, 1e-12).unwrap();
            assert!((got - (2.0 * PI).powf(1.0 / p)).abs() < 1e-10);
        }
        // Parseval oracle built from the triangular coefficients.
        for n in [1u64, 4, 10] {
            let energy: f64 = (-(n as i64)..=n as i64).map(|k| (1.0 - k.abs() as f64 / (n as f64 + 1.0)).powi(2)).sum();
            let got = kernels::fejer_coeffs(n).lp_norm(2.0, 1e-12).unwrap();
            assert!((got * got - 2.0 * PI * energy).abs() < 1e-9);
        }
        assert!(one.lp_norm(0.5, 1e-9).is_err());
    }

    #[test]
    fn residual_norm_decreases_to_zero() {
        let f = kernels::fejer_coeffs(6);
        let norms: Vec<f64> = (0..=6).map(|n| f.sub(&f.partial_sum(n)).l2_norm_parseval()).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(norms[6], 0.0);
    }

    #[test]
    fn step_coefficients() {
        let full = StepFunction::indicator(&crate::interval_sets::RationalIntervalUnion::from(
            crate::interval_sets::RationalInterval::closed(exact::from_f64(-PI), exact::from_f64(PI)),
        ));
        assert!(close(step_fourier_coefficient(&full, 0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(check_supported_in_period(&full).is_ok());
    }

    #[test]
    fn json_roundtrip_both_modes() {
        let f = kernels::fejer_coeffs(2);
        let v = f.to_json();
        assert_eq!(v["2"], serde_json::json!(["1/3", "0"]));
        assert_eq!(TrigPoly::from_json(&v).unwrap(), f);
        let g = f.translate(0.5);
        let back = TrigPoly::from_json(&g.to_json()).unwrap();
        for n in -2..=2 {
            assert_eq!(back.coefficient(n), g.coefficient(n));
        }
        assert!(TrigPoly::from_json(&serde_json::json!({"x": [1, 2]})).is_err());
    }

    #[test]
    fn trace_examples() {
        let f = kernels::fejer_coeffs(3);
        let tr = convergence_trace(&f, 0.4, &[0, 3, 5, 9]).unwrap();
        assert!((tr.entries[0].value.re - 1.0).abs() < 1e-15);
        assert_eq!(tr.entries[2].jump, 0.0);
        assert_eq!(tr.entries[3].jump, 0.0);
        assert!(convergence_trace(&f, 0.0, &[2, 2]).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = TrigPoly> {
        proptest::collection::vec((-8i64..=8, -20i64..20, -20i64..20), 0..10).prop_map(|terms| {
            TrigPoly::from_exact(terms.into_iter().map(|(n, a, b)| (n, ExactComplex::new(ratio(a, 4), ratio(b, 3)))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn linearity_exact(f in arb_poly(), g in arb_poly(), a in -5i64..5, b in -5i64..5, n in -9i64..9) {
            let h = f.scale(&int(a)).add(&g.scale(&int(b)));
            let lhs = h.exact_coefficient(n).unwrap();
            let (cf, cg) = (f.exact_coefficient(n).unwrap(), g.exact_coefficient(n).unwrap());
            prop_assert_eq!(lhs.re, int(a) * cf.re + int(b) * cg.re);
            prop_assert_eq!(lhs.im, int(a) * cf.im + int(b) * cg.im);
        }

        #[test]
        fn parseval_consistency(f in arb_poly()) {
            let quad = f.lp_norm(2.0, 1e-11).unwrap();
            let exact_norm = f.l2_norm_parseval();
            prop_assert!((quad * quad - exact_norm * exact_norm).abs() <= 1e-8 * (1.0 + exact_norm * exact_norm));
        }

        #[test]
        fn translation_composes(f in arb_poly(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let twice = f.translate(a).translate(b);
            let once = f.translate(a + b);
            for n in -8..=8 {
                prop_assert!((twice.coefficient(n) - once.coefficient(n)).norm() < 1e-12 * (1.0 + f.coefficient(n).norm()) * 10.0);
            }
        }

        #[test]
        fn degree_property(f in arb_poly()) {
            prop_assert_eq!(f.partial_sum(f.degree()), f.clone());
        }

        #[test]
        fn convolution_identity(f in arb_poly(), n in 0u64..=8, t in -3.0f64..3.0) {
            // (1/2π) ∫ D_N(t − s) f(s) ds = S_N(f)(t)
            let conv = quadrature::integrate(
                |s| kernels::dirichlet_eval(n, t - s) * f.eval(s).re,
                -PI, PI, 1e-11, Budget { start_panels: 32, max_panels: 1 << 12 },
            ).unwrap().value / (2.0 * PI);
            let conv_im = quadrature::integrate(
                |s| kernels::dirichlet_eval(n, t - s) * f.eval(s).im,
                -PI, PI, 1e-11, Budget { start_panels: 32, max_panels: 1 << 12 },
            ).unwrap().value / (2.0 * PI);
            let direct = f.partial_sum(n).eval(t);
            prop_assert!((Complex64::new(conv, conv_im) - direct).norm() < 1e-8);
        }
    }
}
