//! Arbitrary-precision rational helpers shared by every exact computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow of both parts.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

/// Formats as `p/q`, or `p` for integers.
pub fn format(q: &Rational) -> String {
    q.to_string()
}

pub fn parse(s: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(s.to_owned());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

/// Decides `q <= a + b·√2` exactly.
pub fn le_affine_sqrt2(q: &Rational, a: &Rational, b: &Rational) -> bool {
    let d = q - a;
    let two_b2 = int(2) * b * b;
    if !b.is_negative() {
        !d.is_positive() || d.clone() * d <= two_b2
    } else {
        d.is_negative() && d.clone() * d >= two_b2
    }
}

/// Largest dyadic `k / 2^bits` not exceeding `2^{-i/2}`; exact for even `i`.
pub fn dyadic_floor_pow2_half(i: u32, bits: u32) -> Rational {
    if i % 2 == 0 {
        return pow2(-(i as i64 / 2));
    }
    // 2^{-i/2} = 2^{-(i+1)/2}·√2; floor √2·2^bits by integer square root.
    let scaled = BigInt::from(2u8) << (2 * bits as usize);
    let root = scaled.sqrt();
    Rational::new(root, BigInt::one() << bits as usize) * pow2(-((i as i64 + 1) / 2))
}

/// `2^{-i/2}` as a float.
pub fn pow2_half(i: i64) -> f64 {
    (-(i as f64) / 2.0).exp2()
}
