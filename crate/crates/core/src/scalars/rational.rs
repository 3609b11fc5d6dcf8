//! Arbitrary-precision rationals, always stored in lowest terms.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ScalarError;

/// An exact rational number. The denominator is positive and coprime to the
/// numerator, so derived equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> Ordering {
        self.0.numer().sign_cmp()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Exact square root, if this rational is the square of one.
    /// The non-negative root is returned.
    pub fn sqrt(&self) -> Option<Self> {
        if self.0.is_negative() {
            return None;
        }
        let n = exact_isqrt(self.numer())?;
        let d = exact_isqrt(self.denom())?;
        Some(Rational(BigRational::new(n, d)))
    }

    /// Canonical file encoding: always `p/q`.
    pub fn to_exact_string(&self) -> String {
        alloc::format!("{}/{}", self.numer(), self.denom())
    }

    /// The rational with the smallest denominator (then smallest numerator in
    /// absolute value) lying strictly between `lo` and `hi`, found by walking
    /// the Stern-Brocot tree. Bounds are supplied as comparison oracles so that
    /// irrational endpoints can be used.
    pub fn simplest_between(
        below_lo: impl Fn(&Rational) -> bool,
        above_hi: impl Fn(&Rational) -> bool,
    ) -> Rational {
        // Only positive intervals are needed by the gadget builders.
        let inside = |q: &Rational| !below_lo(q) && !above_hi(q);
        let mut left = (BigInt::zero(), BigInt::one());
        let mut right = (BigInt::one(), BigInt::zero());
        loop {
            let mediant = (&left.0 + &right.0, &left.1 + &right.1);
            let q = Rational(BigRational::new(mediant.0.clone(), mediant.1.clone()));
            if inside(&q) {
                return q;
            }
            if below_lo(&q) {
                // Step right as far as possible with exponential search.
                let mut k = BigInt::one();
                loop {
                    let cand = (&left.0 + &right.0 * &k * 2u32, &left.1 + &right.1 * &k * 2u32);
                    let c = Rational(BigRational::new(cand.0.clone(), cand.1.clone()));
                    if !below_lo(&c) {
                        break;
                    }
                    k *= 2u32;
                }
                let mut hi = &k * 2u32;
                let mut lo = BigInt::one();
                while lo < hi {
                    let mid: BigInt = (&lo + &hi + 1u32) / 2u32;
                    let c = Rational(BigRational::new(
                        &left.0 + &right.0 * &mid,
                        &left.1 + &right.1 * &mid,
                    ));
                    if below_lo(&c) {
                        lo = mid;
                    } else {
                        hi = mid - 1u32;
                    }
                }
                left = (&left.0 + &right.0 * &lo, &left.1 + &right.1 * &lo);
            } else {
                let mut k = BigInt::one();
                loop {
                    let cand = (&right.0 + &left.0 * &k * 2u32, &right.1 + &left.1 * &k * 2u32);
                    let c = Rational(BigRational::new(cand.0.clone(), cand.1.clone()));
                    if !above_hi(&c) {
                        break;
                    }
                    k *= 2u32;
                }
                let mut hi = &k * 2u32;
                let mut lo = BigInt::one();
                while lo < hi {
                    let mid: BigInt = (&lo + &hi + 1u32) / 2u32;
                    let c = Rational(BigRational::new(
                        &right.0 + &left.0 * &mid,
                        &right.1 + &left.1 * &mid,
                    ));
                    if above_hi(&c) {
                        lo = mid;
                    } else {
                        hi = mid - 1u32;
                    }
                }
                right = (&right.0 + &left.0 * &lo, &right.1 + &left.1 * &lo);
            }
        }
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Accepts `p` or `p/q` with decimal integers; anything else (including
    /// decimal fractions such as `0.5`) is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScalarError::Parse(String::from(s));
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let valid = |t: &str, signed: bool| {
            let digits = if signed { t.strip_prefix('-').unwrap_or(t) } else { t };
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !valid(n, true) || !valid(d, false) {
            return Err(bad());
        }
        let num: BigInt = n.parse().map_err(|_| bad())?;
        let den: BigInt = d.parse().map_err(|_| bad())?;
        Rational::from_bigints(num, den)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    /// Panics on division by zero; use [`Rational::inv`] for a checked path.
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}
