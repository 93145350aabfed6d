//! Finite unions of rational intervals with exact Lebesgue measure.
//!
//! Every stage of an effectively open set handled by this crate is a
//! [`RationalIntervalUnion`]. Unions are kept in canonical form: parts are
//! sorted, pairwise disjoint, and no two parts could be merged into a single
//! interval. Endpoint closedness is tracked exactly, so membership of an
//! endpoint is meaningful even though it never changes a measure.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "IntervalRepr", try_from = "IntervalRepr")]
pub struct RationalInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        Self { lo, hi, lo_closed, hi_closed }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: Rational) -> Self {
        Self::closed(x.clone(), x)
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    pub fn length(&self) -> Rational {
        if self.is_empty() {
            Rational::zero()
        } else {
            &self.hi - &self.lo
        }
    }

    /// The midpoint `(lo + hi) / 2`.
    pub fn center(&self) -> Rational {
        exact::midpoint(&self.lo, &self.hi)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match x.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match x.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// Whether `self ⊆ other`, closedness included.
    pub fn is_subset_of(&self, other: &RationalInterval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = match self.lo.cmp(&other.lo) {
            Ordering::Greater => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Less => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct IntervalRepr {
    lo: String,
    hi: String,
    lo_closed: bool,
    hi_closed: bool,
}

impl From<RationalInterval> for IntervalRepr {
    fn from(i: RationalInterval) -> Self {
        IntervalRepr {
            lo: exact::format(&i.lo),
            hi: exact::format(&i.hi),
            lo_closed: i.lo_closed,
            hi_closed: i.hi_closed,
        }
    }
}

impl TryFrom<IntervalRepr> for RationalInterval {
    type Error = Error;

    fn try_from(r: IntervalRepr) -> Result<Self> {
        let lo = exact::parse(&r.lo)?;
        let hi = exact::parse(&r.hi)?;
        if lo > hi {
            return Err(Error::DegenerateInterval { lo: r.lo, hi: r.hi });
        }
        Ok(RationalInterval::new(lo, hi, r.lo_closed, r.hi_closed))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
}

/// A canonical finite union of rational intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<RationalInterval>", from = "Vec<RationalInterval>")]
pub struct RationalIntervalUnion {
    parts: Vec<RationalInterval>,
}

impl From<Vec<RationalInterval>> for RationalIntervalUnion {
    fn from(parts: Vec<RationalInterval>) -> Self {
        normalize(parts)
    }
}

impl From<RationalIntervalUnion> for Vec<RationalInterval> {
    fn from(u: RationalIntervalUnion) -> Self {
        u.parts
    }
}

impl From<RationalInterval> for RationalIntervalUnion {
    fn from(i: RationalInterval) -> Self {
        normalize(vec![i])
    }
}

/// Canonical form of an arbitrary list of intervals.
pub fn normalize(intervals: impl IntoIterator<Item = RationalInterval>) -> RationalIntervalUnion {
    let mut items: Vec<RationalInterval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
    // Closed left endpoints sort first so that merging sees the widest start.
    items.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));

    let mut parts: Vec<RationalInterval> = Vec::with_capacity(items.len());
    for next in items {
        if let Some(last) = parts.last_mut() {
            let joins = match last.hi.cmp(&next.lo) {
                Ordering::Greater => true,
                Ordering::Equal => last.hi_closed || next.lo_closed,
                Ordering::Less => false,
            };
            if joins {
                match next.hi.cmp(&last.hi) {
                    Ordering::Greater => {
                        last.hi = next.hi;
                        last.hi_closed = next.hi_closed;
                    }
                    Ordering::Equal => last.hi_closed |= next.hi_closed,
                    Ordering::Less => {}
                }
                continue;
            }
        }
        parts.push(next);
    }
    RationalIntervalUnion { parts }
}

impl RationalIntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[RationalInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Exact Lebesgue measure.
    pub fn measure(&self) -> Rational {
        self.parts.iter().map(RationalInterval::length).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        // First part whose lower end lies strictly above x; only its
        // predecessor can hold x.
        let idx = self.parts.partition_point(|p| p.lo <= *x);
        idx > 0 && self.parts[idx - 1].contains(x)
    }

    pub fn hull(&self) -> Option<(Rational, Rational)> {
        Some((self.parts.first()?.lo.clone(), self.parts.last()?.hi.clone()))
    }

    pub fn union(&self, other: &Self) -> Self {
        normalize(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.apply(other, SetOp::Intersection)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.apply(other, SetOp::Difference)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    /// Generic Boolean combination by sweeping the merged endpoint list.
    ///
    /// The line is cut into elementary cells (each endpoint as a point and
    /// each open gap between consecutive endpoints). Membership is constant
    /// on a cell, so evaluating one representative per cell is exact.
    pub fn apply(&self, other: &Self, op: SetOp) -> Self {
        if op == SetOp::Union {
            return self.union(other);
        }
        let cuts = merged_endpoints([self, other]);
        let keep = |x: &Rational| {
            let (a, b) = (self.contains(x), other.contains(x));
            match op {
                SetOp::Union => a || b,
                SetOp::Intersection => a && b,
                SetOp::Difference => a && !b,
            }
        };
        normalize(elementary_cells(&cuts).filter(|c| keep(&c.representative)).map(|c| c.interval))
    }

    /// Every part widened into an open interval of the same span; used when
    /// an open superset is required.
    pub fn interior(&self) -> Self {
        normalize(self.parts.iter().map(|p| RationalInterval::open(p.lo.clone(), p.hi.clone())))
    }
}

impl fmt::Display for RationalIntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        f.write_str("{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

pub fn set_op(u: &RationalIntervalUnion, v: &RationalIntervalUnion, op: SetOp) -> RationalIntervalUnion {
    u.apply(v, op)
}

pub(crate) fn merged_endpoints<'a>(sets: impl IntoIterator<Item = &'a RationalIntervalUnion>) -> Vec<Rational> {
    let mut cuts: Vec<Rational> = sets
        .into_iter()
        .flat_map(|s| s.parts.iter().flat_map(|p| [p.lo.clone(), p.hi.clone()]))
        .collect();
    cuts.sort();
    cuts.dedup();
    cuts
}

/// One piece of the partition induced by a sorted endpoint list.
pub(crate) struct Cell {
    pub interval: RationalInterval,
    pub representative: Rational,
}

/// Points and open gaps between sorted, deduplicated cut points, in order.
pub(crate) fn elementary_cells(cuts: &[Rational]) -> impl Iterator<Item = Cell> + '_ {
    cuts.iter().enumerate().flat_map(move |(i, c)| {
        let point = Cell { interval: RationalInterval::point(c.clone()), representative: c.clone() };
        let gap = cuts.get(i + 1).map(|next| Cell {
            interval: RationalInterval::open(c.clone(), next.clone()),
            representative: exact::midpoint(c, next),
        });
        std::iter::once(point).chain(gap)
    })
}

/// Measure of a union restricted to `[lo, hi]`.
pub fn measure_within(u: &RationalIntervalUnion, lo: &Rational, hi: &Rational) -> Rational {
    let window = RationalIntervalUnion::from(RationalInterval::closed(lo.clone(), hi.clone()));
    u.intersection(&window).measure()
}

/// True when `x` is strictly inside some part (not on any endpoint).
pub fn contains_interior(u: &RationalIntervalUnion, x: &Rational) -> bool {
    u.parts.iter().any(|p| p.lo < *x && *x < p.hi)
}
