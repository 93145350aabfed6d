//! Martin-Löf and Schnorr tests as explicit families of rational interval
//! unions, the interval enumerations fed to the constructions, integral tests
//! and the two families produced from fast-converging sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::functions::BoundaryData;
use crate::interval_sets::{RationalInterval, RationalIntervalUnion};
use crate::poisson::{self, ScanSpec, Superlevel};
use crate::trig::TrigPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "ml")]
    MartinLof,
    #[serde(rename = "schnorr")]
    Schnorr,
}

/// Stages `U_0, U_1, …` with `λ(U_k) ≤ 2^{-(k + bound_exponent)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr")]
pub struct TestFamily {
    pub kind: TestKind,
    pub bound_exponent: i64,
    stages: Vec<RationalIntervalUnion>,
    nested: bool,
}

#[derive(Deserialize)]
struct FamilyRepr {
    kind: TestKind,
    bound_exponent: i64,
    stages: Vec<RationalIntervalUnion>,
}

impl TryFrom<FamilyRepr> for TestFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        TestFamily::new(r.kind, r.bound_exponent, r.stages)
    }
}

impl TestFamily {
    /// Validates the measure bound of every stage exactly.
    pub fn new(kind: TestKind, bound_exponent: i64, stages: Vec<RationalIntervalUnion>) -> Result<Self> {
        for (k, s) in stages.iter().enumerate() {
            if s.measure() > exact::pow2(-(k as i64 + bound_exponent)) {
                return Err(Error::InvalidParameter {
                    field: "stages",
                    reason: format!("stage {k} has measure {} > 2^-{}", s.measure(), k as i64 + bound_exponent),
                });
            }
        }
        let nested = stages.windows(2).all(|w| w[1].is_subset_of(&w[0]));
        Ok(Self { kind, bound_exponent, stages, nested })
    }

    pub fn stages(&self) -> &[RationalIntervalUnion] {
        &self.stages
    }

    pub fn stage(&self, k: usize) -> Result<&RationalIntervalUnion> {
        self.stages.get(k).ok_or(Error::StageShortfall { available: self.stages.len(), needed: k + 1 })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn is_nested(&self) -> bool {
        self.nested
    }

    /// Exact bound `2^{-(k + bound_exponent)}`.
    pub fn stage_bound(&self, k: usize) -> Rational {
        exact::pow2(-(k as i64 + self.bound_exponent))
    }

    /// `true` iff every implemented stage contains `x`.
    pub fn captures(&self, x: &Rational) -> bool {
        self.stages.iter().all(|s| s.contains(x))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Stages `U_k = (x − r_k, x + r_k)`, `2r_k = 2^{-(k + offset)}`, for
/// `k = 0..=depth`. Every stage contains `x`.
pub fn covering_test(x: &Rational, depth: usize, offset: i64) -> Result<TestFamily> {
    let stages = (0..=depth)
        .map(|k| {
            let r = exact::pow2(-(k as i64 + offset + 1));
            RationalIntervalUnion::from(RationalInterval::open(x - &r, x + &r))
        })
        .collect();
    TestFamily::new(TestKind::Schnorr, offset, stages)
}

/// `V_n = ⋃_{k ≥ n} U_k` over the implemented stages. The result is nested
/// with bound exponent one less than the input's.
pub fn nest_tail(t: &TestFamily) -> Result<TestFamily> {
    let mut stages = Vec::with_capacity(t.depth());
    let mut acc = RationalIntervalUnion::empty();
    for s in t.stages().iter().rev() {
        acc = acc.union(s);
        stages.push(acc.clone());
    }
    stages.reverse();
    TestFamily::new(t.kind, t.bound_exponent - 1, stages)
}

/// The first `s` closed rational intervals of a fixed enumeration of closed
/// intervals contained in stage `n`.
///
/// Round `j = 1, 2, …` visits the nondegenerate parts of the stage from left
/// to right and emits each part shrunk by `len·2^{-(j+1)}` at both ends. The
/// intervals of one part are therefore nested around its centre and exhaust
/// it; any closed subinterval of a part is contained in some emitted interval.
pub fn enumerate_intervals(t: &TestFamily, n: usize, s: usize) -> Result<Vec<RationalInterval>> {
    let stage = t.stage(n)?;
    let parts: Vec<&RationalInterval> = stage.parts().iter().filter(|p| p.lo < p.hi).collect();
    if parts.is_empty() {
        return Err(Error::EmptyStage(n));
    }
    let mut out = Vec::with_capacity(s);
    let mut j = 1i64;
    while out.len() < s {
        for p in &parts {
            if out.len() == s {
                break;
            }
            let trim = p.length() * exact::pow2(-(j + 1));
            out.push(RationalInterval::closed(&p.lo + &trim, &p.hi - &trim));
        }
        j += 1;
    }
    Ok(out)
}

/// Per-stage lists of enumerated intervals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalEnumeration {
    pub stages: Vec<Vec<RationalInterval>>,
}

impl IntervalEnumeration {
    /// `count(n)` intervals from each stage `n < stages`.
    pub fn first(t: &TestFamily, stages: usize, count: impl Fn(usize) -> usize) -> Result<Self> {
        let stages = (0..stages).map(|n| enumerate_intervals(t, n, count(n))).collect::<Result<_>>()?;
        Ok(Self { stages })
    }
}

/// `T_N(t) = Σ_{i<N} |τ_i(t) − τ_{i+1}(t)|` for `N = 1..taus.len()`;
/// element `N − 1` is `T_N(t)`.
pub fn integral_test_partial_sums(taus: &[TrigPoly], t: f64) -> Vec<f64> {
    let values: Vec<_> = taus.iter().map(|p| p.eval(t)).collect();
    values
        .windows(2)
        .scan(0.0, |acc, w| {
            *acc += (w[0] - w[1]).norm();
            Some(*acc)
        })
        .collect()
}

/// `T_N(t)` for one `N ≥ 1`.
pub fn integral_test_partial(taus: &[TrigPoly], t: f64, n: usize) -> Result<f64> {
    if n == 0 || n >= taus.len() {
        return Err(Error::StageShortfall { available: taus.len(), needed: n + 1 });
    }
    Ok(integral_test_partial_sums(&taus[..=n], t)[n - 1])
}

/// Rational threshold `q_i ≤ 2^{-i/2}` used in place of the irrational level.
pub fn stage_threshold(i: usize) -> Rational {
    exact::dyadic_floor_pow2_half(i as u32, 48)
}

/// One stage of the simple test built from `(f_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpleTestStage {
    pub k: usize,
    pub set: RationalIntervalUnion,
    pub measure: String,
    /// `λ(V_k) ≤ (2 + √2)/2^{k−1}`, decided exactly.
    pub bound_holds: bool,
    /// Stages `i` with `2k ≤ i < len − 1` that were unioned.
    pub indices: (usize, usize),
}

/// `V_k = ⋃_{i ≥ 2k} {|f_i − f_{i+1}| > q_i}` over the implemented stages,
/// with `q_i` from [`stage_threshold`]. Since `q_i ≤ 2^{-i/2}` the result
/// contains the set with irrational thresholds.
pub fn simple_test_from_approx<F: BoundaryData>(fs: &[F], k: usize) -> Result<SimpleTestStage> {
    if fs.len() < 2 * k + 2 {
        return Err(Error::StageShortfall { available: fs.len(), needed: 2 * k + 2 });
    }
    let mut set = RationalIntervalUnion::empty();
    for i in 2 * k..fs.len() - 1 {
        set = set.union(&fs[i].difference(&fs[i + 1]).exceedance(&stage_threshold(i)));
    }
    let measure = set.measure();
    let scaled = &measure * exact::pow2(k as i64 - 1);
    let bound_holds = exact::le_affine_sqrt2(&scaled, &exact::int(2), &exact::int(1));
    Ok(SimpleTestStage { k, measure: exact::format(&measure), set, bound_holds, indices: (2 * k, fs.len() - 2) })
}

/// For `x ∉ V_k` and `k ≤ n`, `2n ≤ i`: `|f_i(x) − f_{2n}(x)| ≤ (2+√2)/2^n`.
/// Returns the first violating `(x, n, i)`, checked exactly.
pub fn simple_condition_violation<F: BoundaryData>(
    fs: &[F],
    stage: &SimpleTestStage,
    samples: &[Rational],
) -> Option<(Rational, usize, usize)> {
    for x in samples.iter().filter(|x| !stage.set.contains(x)) {
        let vals: Vec<Rational> = fs.iter().map(|f| f.value_at(x)).collect();
        for n in stage.k..=((fs.len() - 1) / 2) {
            for i in 2 * n..fs.len() {
                let d = num_traits::Signed::abs(&(&vals[i] - &vals[2 * n])) * exact::pow2(n as i64);
                if !exact::le_affine_sqrt2(&d, &exact::int(2), &exact::int(1)) {
                    return Some((x.clone(), n, i));
                }
            }
        }
    }
    None
}

/// Sets `S_i = {x : max_{y∈grid} P[|f_i − f_{i+1}|](x, y) > 2^{-i/2}}` for
/// `from ≤ i < len − 1`, tagged with `i`.
pub fn poisson_exceedance_sets<F: BoundaryData>(
    fs: &[F],
    from: usize,
    spec: &ScanSpec,
) -> Result<Vec<(usize, Superlevel)>> {
    (from..fs.len().saturating_sub(1))
        .map(|i| {
            let g = fs[i].difference(&fs[i + 1]);
            Ok((i, poisson::maximal_superlevel(&g, exact::pow2_half(i as i64), spec)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchnorrTestStage {
    pub k: usize,
    pub components: Vec<(f64, f64)>,
    pub measure: f64,
    /// `3(√2 + 2)/2^k`.
    pub bound: f64,
    pub grid_slack: f64,
    pub bound_holds: bool,
}

impl SchnorrTestStage {
    pub fn contains(&self, x: f64) -> bool {
        self.components.iter().any(|&(a, b)| a < x && x < b)
    }
}

/// `U_k = ⋃_{i ≥ 2k} S_i` from precomputed [`poisson_exceedance_sets`].
pub fn schnorr_stage_from_sets(sets: &[(usize, Superlevel)], k: usize) -> Result<SchnorrTestStage> {
    let tail: Vec<&Superlevel> = sets.iter().filter(|(i, _)| *i >= 2 * k).map(|(_, s)| s).collect();
    if tail.is_empty() {
        return Err(Error::StageShortfall { available: sets.len() + 1, needed: 2 * k + 2 });
    }
    let mut union = RationalIntervalUnion::empty();
    let mut grid_slack = 0.0;
    for s in tail {
        union = union.union(&s.to_union());
        grid_slack += s.grid_slack;
    }
    let components: Vec<(f64, f64)> =
        union.parts().iter().map(|p| (exact::to_f64(&p.lo), exact::to_f64(&p.hi))).collect();
    let measure = exact::to_f64(&union.measure());
    let bound = 3.0 * (2f64.sqrt() + 2.0) * (-(k as f64)).exp2();
    Ok(SchnorrTestStage { k, components, measure, bound, grid_slack, bound_holds: measure <= bound + grid_slack })
}

/// Stage `k` of the Schnorr test built from Poisson integrals of `(f_i)`.
pub fn schnorr_test_from_poisson<F: BoundaryData>(fs: &[F], k: usize, spec: &ScanSpec) -> Result<SchnorrTestStage> {
    if fs.len() < 2 * k + 2 {
        return Err(Error::StageShortfall { available: fs.len(), needed: 2 * k + 2 });
    }
    schnorr_stage_from_sets(&poisson_exceedance_sets(fs, 2 * k, spec)?, k)
}

/// Markov-type bound `λ(S_i) ≤ (3/ε_i)‖f_i − f_{i+1}‖₁` with `ε_i = 2^{-i/2}`.
pub fn exceedance_markov_bound<F: BoundaryData>(fs: &[F], i: usize) -> f64 {
    3.0 / exact::pow2_half(i as i64) * exact::to_f64(&fs[i].difference(&fs[i + 1]).l1_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{build_schnorr_poisson, tent};
    use crate::exact::{int, ratio};
    use crate::functions::PiecewiseLinear;
    use proptest::prelude::*;

    #[test]
    fn covering_stage_shapes() {
        let t = covering_test(&int(0), 4, 2).unwrap();
        assert_eq!(t.depth(), 5);
        assert!(t.is_nested());
        assert_eq!(t.stages()[1], RationalIntervalUnion::from(RationalInterval::open(ratio(-1, 16), ratio(1, 16))));
        for k in 0..5 {
            assert_eq!(t.stages()[k].measure(), t.stage_bound(k));
        }
        assert!(t.captures(&int(0)));
        assert!(!t.captures(&ratio(1, 16)));
    }

    #[test]
    fn family_rejects_oversized_stage() {
        let big = RationalIntervalUnion::from(RationalInterval::open(int(0), int(1)));
        assert!(TestFamily::new(TestKind::MartinLof, 1, vec![big]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = covering_test(&ratio(1, 3), 3, 1).unwrap();
        let s = t.to_json().unwrap();
        assert!(s.contains("\"kind\": \"schnorr\""));
        assert_eq!(TestFamily::from_json(&s).unwrap(), t);
        assert_eq!(t.to_json().unwrap(), s);
        let bad = s.replace("\"bound_exponent\": 1", "\"bound_exponent\": 4");
        assert!(TestFamily::from_json(&bad).is_err());
    }

    #[test]
    fn nest_tail_unions_later_stages() {
        let stages = vec![
            RationalIntervalUnion::from(RationalInterval::open(int(0), ratio(1, 4))),
            RationalIntervalUnion::from(RationalInterval::open(int(1), ratio(9, 8))),
            RationalIntervalUnion::from(RationalInterval::open(int(2), ratio(33, 16))),
        ];
        let t = TestFamily::new(TestKind::MartinLof, 2, stages.clone()).unwrap();
        assert!(!t.is_nested());
        let v = nest_tail(&t).unwrap();
        assert!(v.is_nested());
        assert_eq!(v.bound_exponent, 1);
        assert_eq!(v.stages()[2], stages[2]);
        assert_eq!(v.stages()[0], stages[0].union(&stages[1]).union(&stages[2]));
    }

    #[test]
    fn enumeration_is_nested_and_covering() {
        let t = covering_test(&ratio(1, 3), 5, 0).unwrap();
        for n in 0..5 {
            let list = enumerate_intervals(&t, n, 2 * n + 1).unwrap();
            assert_eq!(list.len(), 2 * n + 1);
            assert!(list.iter().all(|i| i.contains(&ratio(1, 3)) && i.center() == ratio(1, 3)));
            assert!(list.windows(2).all(|w| w[0].is_subset_of(&w[1])));
            let stage = &t.stages()[n];
            assert!(list.iter().all(|i| RationalIntervalUnion::from(i.clone()).is_subset_of(stage)));
        }
        let two = TestFamily::new(
            TestKind::MartinLof,
            0,
            vec![RationalIntervalUnion::from(vec![
                RationalInterval::open(int(0), ratio(1, 4)),
                RationalInterval::closed(ratio(1, 2), ratio(3, 4)),
            ])],
        )
        .unwrap();
        let list = enumerate_intervals(&two, 0, 3).unwrap();
        assert!(list[0].hi <= ratio(1, 4) && list[1].lo >= ratio(1, 2) && list[2].hi <= ratio(1, 4));
        let empty = TestFamily::new(TestKind::MartinLof, 0, vec![RationalIntervalUnion::empty()]).unwrap();
        assert!(matches!(enumerate_intervals(&empty, 0, 1), Err(Error::EmptyStage(0))));
        assert!(matches!(enumerate_intervals(&empty, 3, 1), Err(Error::StageShortfall { .. })));
        let e = IntervalEnumeration::first(&t, 3, |n| n + 1).unwrap();
        assert_eq!(e.stages.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn integral_test_sums() {
        let taus = vec![TrigPoly::zero(), TrigPoly::constant(int(2)), TrigPoly::constant(int(-1))];
        assert_eq!(integral_test_partial_sums(&taus, 0.3), vec![2.0, 5.0]);
        assert_eq!(integral_test_partial(&taus, 0.3, 2).unwrap(), 5.0);
        assert!(integral_test_partial(&taus, 0.3, 0).is_err());
        assert!(integral_test_partial(&taus, 0.3, 3).is_err());
    }

    #[test]
    fn thresholds_below_irrational_level() {
        for i in 0..40 {
            let q = exact::to_f64(&stage_threshold(i));
            assert!(q <= exact::pow2_half(i as i64) && q > 0.999_999 * exact::pow2_half(i as i64));
        }
    }

    #[test]
    fn derived_tests_on_step_construction() {
        let v = nest_tail(&covering_test(&int(0), 14, 2).unwrap()).unwrap();
        let fs: Vec<_> = build_schnorr_poisson(&v, 12).unwrap().stages.into_iter().map(|s| s.f).collect();
        let samples: Vec<Rational> = (-40..=40).map(|j| ratio(j, 8)).collect();
        for k in 0..=4 {
            let st = simple_test_from_approx(&fs, k).unwrap();
            assert!(st.bound_holds);
            assert!(simple_condition_violation(&fs, &st, &samples).is_none());
        }
        assert!(simple_test_from_approx(&fs, 7).is_err());
        let spec = ScanSpec { spacing: 1.0 / 512.0, ..ScanSpec::default() };
        let st = schnorr_test_from_poisson(&fs, 2, &spec).unwrap();
        assert!(st.bound_holds);
        assert!(st.contains(0.0));
    }

    #[test]
    fn simple_test_detects_large_jumps() {
        let a = PiecewiseLinear::zero();
        let b = tent(&RationalInterval::closed(int(0), int(16))).unwrap().scale(&int(4));
        let st = simple_test_from_approx(&[a.clone(), b, a], 0).unwrap();
        // 4·tent exceeds 1 on (1, 15), already longer than 2(2 + √2).
        assert!(!st.set.contains(&ratio(1, 2)));
        assert!(st.set.contains(&int(8)));
        assert!(st.set.measure() > int(14));
        assert!(!st.bound_holds);
    }

    proptest! {
        #[test]
        fn enumeration_prefix_stable(num in -50i64..50, s in 1usize..12) {
            let t = covering_test(&ratio(num, 7), 2, 1).unwrap();
            let long = enumerate_intervals(&t, 1, s + 3).unwrap();
            let short = enumerate_intervals(&t, 1, s).unwrap();
            prop_assert_eq!(&long[..s], &short[..]);
        }
    }
}
