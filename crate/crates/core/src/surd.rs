//! Exact arithmetic in a real quadratic field `Q(sqrt(D))`.
//!
//! The spectral radius of a nearest-neighbour walk on the integers,
//! `r + 2 sqrt(pq)`, and the base `sqrt(q/p)` of its minimizing exponential
//! both live in `Q(sqrt(pq))`. Working in that field keeps the Doob transform
//! exact in rational mode.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::weight::{ratio_to_f64, Weight};

/// `rational + coeff * sqrt(radicand)` with a squarefree radicand > 1.
/// Pure rationals carry `radicand = 0` and combine with any field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    rational: BigRational,
    coeff: BigRational,
    radicand: BigInt,
}

impl QuadSurd {
    pub fn from_rational(r: BigRational) -> Self {
        Self {
            rational: r,
            coeff: BigRational::zero(),
            radicand: BigInt::zero(),
        }
    }

    /// Exact square root of a nonnegative rational, or `None` when the
    /// squarefree part of its numerator times denominator cannot be
    /// determined by trial division up to 10^6.
    pub fn sqrt_of(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Self::zero());
        }
        // sqrt(n/d) = sqrt(n*d)/d
        let nd = r.numer() * r.denom();
        let (square_root, squarefree) = split_square(&nd)?;
        let coeff = BigRational::new(square_root, r.denom().clone());
        if squarefree.is_one() {
            Some(Self::from_rational(coeff))
        } else {
            Some(Self {
                rational: BigRational::zero(),
                coeff,
                radicand: squarefree,
            })
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_part(&self) -> (&BigRational, &BigInt) {
        (&self.coeff, &self.radicand)
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() {
            self.radicand = BigInt::zero();
        }
        self
    }

    fn common_radicand(&self, other: &Self) -> BigInt {
        match (self.radicand.is_zero(), other.radicand.is_zero()) {
            (true, _) => other.radicand.clone(),
            (_, true) => self.radicand.clone(),
            _ => {
                assert_eq!(
                    self.radicand, other.radicand,
                    "arithmetic across different quadratic fields"
                );
                self.radicand.clone()
            }
        }
    }

    fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&BigRational::zero());
        let b = self.coeff.cmp(&BigRational::zero());
        match (a, b) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, _) => {
                // opposite signs: the larger square wins
                let lhs = &self.rational * &self.rational;
                let rhs = &self.coeff * &self.coeff * BigRational::from_integer(self.radicand.clone());
                match lhs.cmp(&rhs) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    fn conjugate(&self) -> Self {
        Self {
            rational: self.rational.clone(),
            coeff: -self.coeff.clone(),
            radicand: self.radicand.clone(),
        }
    }

    /// Field norm `a^2 - b^2 D`.
    fn norm(&self) -> BigRational {
        &self.rational * &self.rational
            - &self.coeff * &self.coeff * BigRational::from_integer(self.radicand.clone())
    }
}

/// Writes `n = s^2 * f` with `f` squarefree.
fn split_square(n: &BigInt) -> Option<(BigInt, BigInt)> {
    const TRIAL_LIMIT: u64 = 1_000_000;
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut count = 0u32;
        while rest.is_multiple_of(&bp) {
            rest /= &bp;
            count += 1;
        }
        if count > 0 {
            square *= num_traits::pow(bp.clone(), (count / 2) as usize);
            if count % 2 == 1 {
                free *= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        let r = rest.sqrt();
        if &r * &r == rest {
            square *= r;
        } else if rest.bits() <= 40 || {
            // no factor below the trial limit: rest is prime if < limit^2
            let lim = BigInt::from(TRIAL_LIMIT);
            rest < &lim * &lim
        } {
            free *= rest;
        } else {
            return None;
        }
    }
    Some((square, free))
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rational.render();
        if self.coeff.is_zero() {
            return f.write_str(&r);
        }
        let c = self.coeff.render();
        if self.rational.is_zero() {
            write!(f, "{c}*sqrt({})", self.radicand)
        } else {
            write!(f, "{r}+{c}*sqrt({})", self.radicand)
        }
    }
}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum())
    }
}

impl Neg for QuadSurd {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            rational: -self.rational,
            coeff: -self.coeff,
            radicand: self.radicand,
        }
    }
}

impl Add for QuadSurd {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let radicand = self.common_radicand(&rhs);
        Self {
            rational: self.rational + rhs.rational,
            coeff: self.coeff + rhs.coeff,
            radicand,
        }
        .normalized()
    }
}

impl<'a> AddAssign<&'a QuadSurd> for QuadSurd {
    fn add_assign(&mut self, rhs: &'a QuadSurd) {
        let radicand = self.common_radicand(rhs);
        self.rational += &rhs.rational;
        self.coeff += &rhs.coeff;
        self.radicand = radicand;
        if self.coeff.is_zero() {
            self.radicand = BigInt::zero();
        }
    }
}

impl Sub for QuadSurd {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for QuadSurd {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let radicand = self.common_radicand(&rhs);
        let d = BigRational::from_integer(radicand.clone());
        Self {
            rational: &self.rational * &rhs.rational + &self.coeff * &rhs.coeff * d,
            coeff: &self.rational * &rhs.coeff + &self.coeff * &rhs.rational,
            radicand,
        }
        .normalized()
    }
}

impl Div for QuadSurd {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let norm = rhs.norm();
        assert!(!norm.is_zero(), "division by zero in quadratic field");
        let num = self * rhs.conjugate();
        Self {
            rational: num.rational / &norm,
            coeff: num.coeff / norm,
            radicand: num.radicand,
        }
        .normalized()
    }
}

impl Zero for QuadSurd {
    fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.coeff.is_zero()
    }
}

impl One for QuadSurd {
    fn one() -> Self {
        Self::from_rational(BigRational::one())
    }
}

impl Weight for QuadSurd {
    const EXACT: bool = true;

    fn as_f64(&self) -> f64 {
        let root = self.radicand.to_f64().unwrap_or(0.0).sqrt();
        ratio_to_f64(&self.rational) + ratio_to_f64(&self.coeff) * root
    }

    fn from_ratio(r: &BigRational) -> Self {
        Self::from_rational(r.clone())
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl From<BigRational> for QuadSurd {
    fn from(r: BigRational) -> Self {
        Self::from_rational(r)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn square_roots_reduce_to_squarefree_radicands() {
        let s = QuadSurd::sqrt_of(&q(21, 100)).unwrap();
        assert_eq!(s.surd_part(), (&q(1, 10), &BigInt::from(21)));
        let s = QuadSurd::sqrt_of(&q(9, 4)).unwrap();
        assert!(s.is_rational());
        assert_eq!(s.rational_part(), &q(3, 2));
        let s = QuadSurd::sqrt_of(&q(7, 3)).unwrap();
        assert_eq!(s.surd_part(), (&q(1, 3), &BigInt::from(21)));
    }

    #[test]
    fn field_operations() {
        let t = QuadSurd::sqrt_of(&q(7, 3)).unwrap();
        let rho = QuadSurd::sqrt_of(&q(84, 100)).unwrap();
        // 0.3 * sqrt(7/3) / (2 sqrt(0.21)) = 1/2
        let p = QuadSurd::from_rational(q(3, 10));
        assert_eq!(p * t.clone() / rho, QuadSurd::from_rational(q(1, 2)));
        let sq = t.clone() * t.clone();
        assert_eq!(sq, QuadSurd::from_rational(q(7, 3)));
        let inv = QuadSurd::one() / t.clone();
        assert_eq!(inv * t, QuadSurd::one());
    }

    #[test]
    fn ordering_matches_floats() {
        let s = QuadSurd::sqrt_of(&q(2, 1)).unwrap();
        let a = QuadSurd::from_rational(q(141, 100)) - s.clone();
        assert!(a < QuadSurd::zero());
        let b = QuadSurd::from_rational(q(142, 100)) - s.clone();
        assert!(b > QuadSurd::zero());
        assert!((s.as_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(format!("{}", QuadSurd::from_rational(q(1, 2)) + s), "1/2+1*sqrt(2)");
    }
}
