//! Scalar types used as measure weights.
//!
//! Two modes are supported throughout: double precision floats for long
//! horizons and exact rationals (`BigRational`) for verification runs. The
//! Doob transform of nearest-neighbour walks on free abelian groups also runs
//! over a real quadratic field, see [`crate::surd::QuadSurd`].

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, WalkError};

pub trait Weight:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    /// Slack allowed when checking that a total mass does not exceed one.
    fn mass_tolerance() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            1e-12
        }
    }

    fn as_f64(&self) -> f64;

    fn from_ratio(r: &BigRational) -> Self;

    /// Text form used in reports: shortest round-trip decimal for floats,
    /// `p/q` for rationals.
    fn render(&self) -> String;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn powi(&self, n: usize) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        format!("{self:?}")
    }

    fn powi(&self, n: usize) -> Self {
        match i32::try_from(n) {
            Ok(k) => f64::powi(*self, k),
            Err(_) => f64::powf(*self, n as f64),
        }
    }
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_ratio(r: &BigRational) -> Self {
        r.clone()
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Converts a rational to the nearest-ish float, also when numerator and
/// denominator individually overflow `f64`.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let n = r.numer().abs();
    let d = r.denom().clone();
    let shift = n.bits() as i64 - d.bits() as i64;
    // scale so that the quotient has ~60 significant bits
    let (n2, d2) = if shift > 60 {
        (n, d << (shift - 60) as usize)
    } else {
        (n << (60 - shift) as usize, d)
    };
    let q = (n2 / d2).to_f64().unwrap_or(f64::NAN);
    let v = q * 2f64.powi((shift - 60).clamp(i32::MIN as i64, i32::MAX as i64) as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Parses a probability written as a decimal (`0.25`, `1e-3`) or as a
/// rational (`1/4`). Returns the exact value and whether the rational form
/// was used.
pub fn parse_probability(text: &str) -> Result<(BigRational, bool)> {
    let t = text.trim();
    let bad = |m: &str| WalkError::InvalidMeasure(format!("cannot parse probability {t:?}: {m}"));
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad("numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| bad("denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok((BigRational::new(n, d), true));
    }
    Ok((parse_decimal(t).ok_or_else(|| bad("not a decimal"))?, false))
}

/// Exact value of a decimal literal with optional exponent.
pub fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}
