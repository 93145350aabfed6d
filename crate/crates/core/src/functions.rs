//! Compactly supported real functions with rational breakpoints.
//!
//! [`StepFunction`] holds finite sums of weighted indicators of interval
//! unions; [`PiecewiseLinear`] holds continuous functions with rational
//! vertices. Both expose exact values, norms and level sets, and closed-form
//! Poisson integrals through the [`BoundaryData`] trait.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::interval_sets::{elementary_cells, normalize, RationalInterval, RationalIntervalUnion};
use crate::kernels::atan_diff;

/// Boundary data on the real line understood by the Poisson machinery.
pub trait BoundaryData: Clone {
    /// Exact point value.
    fn value_at(&self, x: &Rational) -> Rational;
    fn eval(&self, x: f64) -> f64;
    /// Float segments for repeated Poisson evaluation.
    fn poisson_form(&self) -> PoissonForm;
    /// `P[f](x, y)` in closed form; callers guarantee `y > 0`.
    fn poisson_integral(&self, x: f64, y: f64) -> f64 {
        self.poisson_form().eval(x, y)
    }
    fn l1_norm(&self) -> Rational;
    /// `self − other`.
    fn difference(&self, other: &Self) -> Self;
    fn abs(&self) -> Self;
    /// `{x : |f(x)| > level}` as an exact union.
    fn exceedance(&self, level: &Rational) -> RationalIntervalUnion;
    /// Closed hull of the support, `None` for the zero function.
    fn support(&self) -> Option<(Rational, Rational)>;
    fn breakpoints(&self) -> Vec<Rational>;
    fn sup_abs(&self) -> Rational;
}

/// Linear pieces `f(a) = fa`, `f(b) = fb` on `[a, b]` in floats, with the
/// exact width kept for pieces too narrow for their endpoints to resolve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoissonForm {
    segments: Vec<Segment>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    a: f64,
    b: f64,
    width: f64,
    thin: bool,
    fa: f64,
    fb: f64,
}

impl PoissonForm {
    fn new<'a>(pieces: impl Iterator<Item = (&'a Rational, &'a Rational, &'a Rational, &'a Rational)>) -> Self {
        let segments = pieces
            .filter_map(|(ra, rb, fa, fb)| {
                let (fa, fb) = (exact::to_f64(fa), exact::to_f64(fb));
                if fa == 0.0 && fb == 0.0 {
                    return None;
                }
                let (a, b) = (exact::to_f64(ra), exact::to_f64(rb));
                let thin = b - a <= 1e-12 * a.abs().max(b.abs());
                let width = if thin { exact::to_f64(&(rb - ra)) } else { b - a };
                Some(Segment { a, b, width, thin, fa, fb })
            })
            .collect();
        Self { segments }
    }

    /// `P[f](x, y)`; callers guarantee `y > 0`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for s in &self.segments {
            let (ua, ub) = (s.a - x, s.b - x);
            let um = 0.5 * (ua + ub);
            let fm = 0.5 * (s.fa + s.fb);
            if s.thin {
                // Expand the kernel around the midpoint.
                let w = s.width;
                let dtheta = (w * y).atan2(y * y + ua * ub);
                let q = um * um + y * y;
                total += fm * dtheta - (s.fb - s.fa) * um * y * w * w / (6.0 * q * q);
                continue;
            }
            // f(x + u) = fm + slope (u − um) on [ua, ub]:
            //   ∫ y/(u²+y²) du = atan(u/y),  ∫ y u/(u²+y²) du = (y/2) ln(u²+y²)
            let dtheta = atan_diff(ub / y, ua / y);
            if s.fa == s.fb {
                total += fm * dtheta;
                continue;
            }
            let slope = (s.fb - s.fa) / s.width;
            let log_ratio = ((ub - ua) * (ub + ua) / (ua * ua + y * y)).ln_1p();
            total += fm * dtheta + slope * (0.5 * y * log_ratio - um * dtheta);
        }
        total / PI
    }
}

/// Finite sum of constants on disjoint rational intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<StepPiece>", into = "Vec<StepPiece>")]
pub struct StepFunction {
    pieces: Vec<(RationalInterval, Rational)>,
}

/// Serialized piece: an interval plus the value `"p/q"` taken on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct StepPiece {
    #[serde(flatten)]
    interval: RationalInterval,
    value: String,
}

impl TryFrom<Vec<StepPiece>> for StepFunction {
    type Error = Error;

    /// Overlapping pieces add up.
    fn try_from(v: Vec<StepPiece>) -> Result<Self> {
        let terms = v
            .into_iter()
            .map(|p| Ok((exact::parse(&p.value)?, RationalIntervalUnion::from(p.interval))))
            .collect::<Result<Vec<_>>>()?;
        Ok(StepFunction::weighted_sum(terms.iter().map(|(w, s)| (w.clone(), s))))
    }
}

impl From<StepFunction> for Vec<StepPiece> {
    fn from(f: StepFunction) -> Self {
        f.pieces.into_iter().map(|(interval, v)| StepPiece { interval, value: exact::format(&v) }).collect()
    }
}

/// Either representation, tagged for file formats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryFunction {
    Step { pieces: StepFunction },
    Linear { vertices: PiecewiseLinear },
}

impl StepFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn indicator(set: &RationalIntervalUnion) -> Self {
        Self::weighted_sum([(exact::int(1), set)])
    }

    /// `Σ w_j · χ_{A_j}` as a canonical step function.
    pub fn weighted_sum<'a>(terms: impl IntoIterator<Item = (Rational, &'a RationalIntervalUnion)>) -> Self {
        let terms: Vec<(Rational, &RationalIntervalUnion)> = terms.into_iter().collect();
        let mut cuts: Vec<Rational> = terms
            .iter()
            .flat_map(|(_, s)| s.parts().iter().flat_map(|p| [p.lo.clone(), p.hi.clone()]))
            .collect();
        cuts.sort();
        cuts.dedup();
        Self::from_cells(&cuts, |x| {
            terms
                .iter()
                .filter(|(_, s)| s.contains(x))
                .map(|(w, _)| w.clone())
                .sum()
        })
    }

    /// Builds from a value oracle that is constant on every elementary cell
    /// of `cuts`; consecutive equal-valued cells are merged.
    fn from_cells(cuts: &[Rational], value: impl Fn(&Rational) -> Rational) -> Self {
        let mut pieces: Vec<(RationalInterval, Rational)> = Vec::new();
        for cell in elementary_cells(cuts) {
            let v = value(&cell.representative);
            if v.is_zero() {
                continue;
            }
            if let Some((last, lv)) = pieces.last_mut() {
                let touching = last.hi == cell.interval.lo && (last.hi_closed || cell.interval.lo_closed);
                if touching && *lv == v {
                    last.hi = cell.interval.hi.clone();
                    last.hi_closed = cell.interval.hi_closed;
                    continue;
                }
            }
            pieces.push((cell.interval, v));
        }
        StepFunction { pieces }
    }

    pub fn pieces(&self) -> &[(RationalInterval, Rational)] {
        &self.pieces
    }

    fn cuts_with(&self, other: &StepFunction) -> Vec<Rational> {
        let mut cuts = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort();
        cuts.dedup();
        cuts
    }

    /// Pointwise combination `op(self, other)`.
    pub fn combine(&self, other: &StepFunction, op: impl Fn(Rational, Rational) -> Rational) -> StepFunction {
        let cuts = self.cuts_with(other);
        Self::from_cells(&cuts, |x| op(self.value_at(x), other.value_at(x)))
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a + b)
    }

    pub fn scale(&self, s: &Rational) -> StepFunction {
        let cuts = self.breakpoints();
        Self::from_cells(&cuts, |x| self.value_at(x) * s)
    }

    pub fn integral(&self) -> Rational {
        self.pieces.iter().map(|(i, v)| i.length() * v).sum()
    }

    /// `self ≤ other` at every point, decided on the common refinement.
    /// Outside the hull of all breakpoints both functions vanish.
    pub fn le_everywhere(&self, other: &StepFunction) -> bool {
        let cuts = self.cuts_with(other);
        let ok = elementary_cells(&cuts).all(|c| self.value_at(&c.representative) <= other.value_at(&c.representative));
        ok
    }

    /// Representatives of every cell of the partition (points and gaps).
    pub fn cell_representatives(&self) -> Vec<Rational> {
        let cuts = self.breakpoints();
        elementary_cells(&cuts).map(|c| c.representative).collect()
    }
}

impl BoundaryData for StepFunction {
    fn value_at(&self, x: &Rational) -> Rational {
        // First piece not lying entirely to the left of x.
        let idx = self.pieces.partition_point(|(p, _)| p.hi < *x || (p.hi == *x && !p.hi_closed));
        match self.pieces.get(idx) {
            Some((p, v)) if p.contains(x) => v.clone(),
            _ => Rational::zero(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        // Interior semantics: endpoint values of pieces are ignored.
        self.pieces
            .iter()
            .find(|(p, _)| exact::to_f64(&p.lo) < x && x < exact::to_f64(&p.hi))
            .map_or(0.0, |(_, v)| exact::to_f64(v))
    }

    fn poisson_form(&self) -> PoissonForm {
        PoissonForm::new(self.pieces.iter().map(|(p, v)| (&p.lo, &p.hi, v, v)))
    }

    fn l1_norm(&self) -> Rational {
        self.pieces.iter().map(|(i, v)| i.length() * v.abs()).sum()
    }

    fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn abs(&self) -> Self {
        StepFunction { pieces: self.pieces.iter().map(|(i, v)| (i.clone(), v.abs())).collect() }
    }

    fn exceedance(&self, level: &Rational) -> RationalIntervalUnion {
        normalize(self.pieces.iter().filter(|(_, v)| v.abs() > *level).map(|(i, _)| i.clone()))
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        Some((self.pieces.first()?.0.lo.clone(), self.pieces.last()?.0.hi.clone()))
    }

    fn breakpoints(&self) -> Vec<Rational> {
        let mut cuts: Vec<Rational> = self.pieces.iter().flat_map(|(p, _)| [p.lo.clone(), p.hi.clone()]).collect();
        cuts.dedup();
        cuts
    }

    fn sup_abs(&self) -> Rational {
        self.pieces.iter().map(|(_, v)| v.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// Continuous, compactly supported, piecewise linear with rational vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, String)>", into = "Vec<(String, String)>")]
pub struct PiecewiseLinear {
    vertices: Vec<(Rational, Rational)>,
}

impl TryFrom<Vec<(String, String)>> for PiecewiseLinear {
    type Error = Error;

    fn try_from(v: Vec<(String, String)>) -> Result<Self> {
        let vertices = v
            .iter()
            .map(|(x, y)| Ok((exact::parse(x)?, exact::parse(y)?)))
            .collect::<Result<Vec<_>>>()?;
        PiecewiseLinear::new(vertices)
    }
}

impl From<PiecewiseLinear> for Vec<(String, String)> {
    fn from(f: PiecewiseLinear) -> Self {
        f.vertices.iter().map(|(x, y)| (exact::format(x), exact::format(y))).collect()
    }
}

impl PiecewiseLinear {
    /// Validates strictly increasing abscissae and zero end values.
    pub fn new(vertices: Vec<(Rational, Rational)>) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidParameter { field: "vertices", reason: reason.to_owned() };
        if vertices.is_empty() {
            return Ok(Self::zero());
        }
        if vertices.len() == 1 {
            return Err(invalid("a nonzero function needs at least two vertices"));
        }
        if vertices.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid("abscissae must increase strictly"));
        }
        if !vertices[0].1.is_zero() || !vertices[vertices.len() - 1].1.is_zero() {
            return Err(invalid("first and last vertex must have value 0"));
        }
        Ok(Self { vertices })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    fn segments(&self) -> impl Iterator<Item = (&(Rational, Rational), &(Rational, Rational))> {
        self.vertices.iter().zip(self.vertices.iter().skip(1))
    }

    /// Combination on the union of both vertex grids; exact because both
    /// functions are linear between consecutive grid points.
    pub fn combine(&self, other: &Self, op: impl Fn(Rational, Rational) -> Rational) -> Self {
        let mut xs: Vec<Rational> = self.vertices.iter().chain(&other.vertices).map(|(x, _)| x.clone()).collect();
        xs.sort();
        xs.dedup();
        let vertices: Vec<(Rational, Rational)> = xs
            .into_iter()
            .map(|x| {
                let y = op(self.value_at(&x), other.value_at(&x));
                (x, y)
            })
            .collect();
        Self::from_vertices_trimmed(vertices)
    }

    /// Drops zero runs at the ends and redundant collinear vertices.
    fn from_vertices_trimmed(mut v: Vec<(Rational, Rational)>) -> Self {
        while v.len() >= 2 && v[0].1.is_zero() && v[1].1.is_zero() {
            v.remove(0);
        }
        while v.len() >= 2 && v[v.len() - 1].1.is_zero() && v[v.len() - 2].1.is_zero() {
            v.pop();
        }
        if v.iter().all(|(_, y)| y.is_zero()) {
            return Self::zero();
        }
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(v.len());
        for p in v {
            if out.len() >= 2 {
                let (x0, y0) = &out[out.len() - 2];
                let (x1, y1) = &out[out.len() - 1];
                if (y1 - y0) * (&p.0 - x1) == (&p.1 - y1) * (x1 - x0) {
                    out.pop();
                }
            }
            out.push(p);
        }
        Self { vertices: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_vertices_trimmed(self.vertices.iter().map(|(x, y)| (x.clone(), y * s)).collect())
    }

    /// Vertex list with every sign change turned into an explicit vertex.
    fn split_at_zeros(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(self.vertices.len() * 2);
        for ((x0, y0), (x1, y1)) in self.segments() {
            out.push((x0.clone(), y0.clone()));
            if (y0.is_positive() && y1.is_negative()) || (y0.is_negative() && y1.is_positive()) {
                let xz = x0 + (x1 - x0) * y0 / (y0 - y1);
                out.push((xz, Rational::zero()));
            }
        }
        if let Some(last) = self.vertices.last() {
            out.push(last.clone());
        }
        out
    }

    pub fn integral(&self) -> Rational {
        self.segments()
            .map(|((x0, y0), (x1, y1))| (x1 - x0) * (y0 + y1) / exact::int(2))
            .sum()
    }

    /// Abscissa where the segment through the two vertices meets `level`.
    fn crossing(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational, level: &Rational) -> Rational {
        x0 + (x1 - x0) * (level - y0) / (y1 - y0)
    }

    /// `{x : f(x) > level}` for the signed function.
    fn superlevel(&self, level: &Rational) -> Vec<RationalInterval> {
        let mut out = Vec::new();
        for ((x0, y0), (x1, y1)) in self.segments() {
            let above0 = y0 > level;
            let above1 = y1 > level;
            let lo = match (above0, above1) {
                (true, _) => x0.clone(),
                (false, true) => Self::crossing(x0, y0, x1, y1, level),
                (false, false) => continue,
            };
            let hi = if above1 { x1.clone() } else { Self::crossing(x0, y0, x1, y1, level) };
            out.push(RationalInterval::new(lo, hi, above0, above1));
        }
        out
    }
}

impl BoundaryData for PiecewiseLinear {
    fn value_at(&self, x: &Rational) -> Rational {
        let idx = self.vertices.partition_point(|(vx, _)| vx <= x);
        if idx == 0 {
            return Rational::zero();
        }
        let (x0, y0) = &self.vertices[idx - 1];
        if x0 == x {
            return y0.clone();
        }
        match self.vertices.get(idx) {
            Some((x1, y1)) => y0 + (y1 - y0) * (x - x0) / (x1 - x0),
            None => Rational::zero(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let idx = self.vertices.partition_point(|(vx, _)| exact::to_f64(vx) <= x);
        if idx == 0 || idx == self.vertices.len() {
            return 0.0;
        }
        let (x0, y0) = (exact::to_f64(&self.vertices[idx - 1].0), exact::to_f64(&self.vertices[idx - 1].1));
        let (x1, y1) = (exact::to_f64(&self.vertices[idx].0), exact::to_f64(&self.vertices[idx].1));
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn poisson_form(&self) -> PoissonForm {
        PoissonForm::new(self.segments().map(|((a, fa), (b, fb))| (a, b, fa, fb)))
    }

    fn l1_norm(&self) -> Rational {
        self.split_at_zeros()
            .windows(2)
            .map(|w| ((&w[1].0 - &w[0].0) * (&w[0].1 + &w[1].1) / exact::int(2)).abs())
            .sum()
    }

    fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn abs(&self) -> Self {
        Self::from_vertices_trimmed(self.split_at_zeros().into_iter().map(|(x, y)| (x, y.abs())).collect())
    }

    fn exceedance(&self, level: &Rational) -> RationalIntervalUnion {
        if level.is_negative() {
            // |f| > negative level everywhere; callers only use levels ≥ 0.
            return normalize(self.support().map(|(a, b)| RationalInterval::closed(a, b)));
        }
        let neg = self.scale(&exact::int(-1));
        let mut parts = self.superlevel(level);
        parts.extend(neg.superlevel(level));
        normalize(parts)
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        Some((self.vertices.first()?.0.clone(), self.vertices.last()?.0.clone()))
    }

    fn breakpoints(&self) -> Vec<Rational> {
        self.vertices.iter().map(|(x, _)| x.clone()).collect()
    }

    fn sup_abs(&self) -> Rational {
        self.vertices.iter().map(|(_, y)| y.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// Ordering helper for sorting float sample points.
pub fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.total_cmp(b)
}
