//! Exact scalar carriers: ℚ, quadratic towers over ℚ, and K(ε) over a tower.

mod funfield;
mod rational;
pub mod tower;

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

pub use funfield::FunElem;
pub use rational::Rational;
pub use tower::{Tower, TowerElem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("radicand is not strictly positive")]
    NonPositiveRadicand,
    #[error("generator index {0} is out of range")]
    BadGeneratorIndex(usize),
    #[error("conjugating generator {0} does not extend to the whole tower")]
    NonExtendableConjugation(usize),
    #[error("malformed tower description")]
    MalformedTower,
    #[error("element does not lie in the requested tower")]
    OutOfTower,
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

/// Commutative ring operations shared by every carrier, including the
/// symbolic polynomials used to check determinant identities.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::integer(n))
    }

    fn square(&self) -> Self {
        self.mul(self)
    }

    fn scale(&self, r: &Rational) -> Self {
        self.mul(&Self::from_rational(r))
    }
}

pub trait Field: Ring {
    fn inv(&self) -> Result<Self, ScalarError>;

    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }
}

/// Rings where a known-exact quotient can be computed (needed by
/// fraction-free elimination).
pub trait ExactDiv: Ring {
    /// `self / other`, or `None` if `other` does not divide `self`.
    fn div_exact(&self, other: &Self) -> Option<Self>;
}

impl<F: Field> ExactDiv for F {
    fn div_exact(&self, other: &Self) -> Option<Self> {
        self.div(other).ok()
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl Field for Rational {
    fn inv(&self) -> Result<Self, ScalarError> {
        Rational::inv(self)
    }
}

impl Ring for TowerElem {
    fn zero() -> Self {
        TowerElem::from_rational(Rational::zero())
    }
    fn one() -> Self {
        TowerElem::from_rational(Rational::one())
    }
    fn from_rational(r: &Rational) -> Self {
        TowerElem::from_rational(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        TowerElem::is_zero(self)
    }
}

impl Field for TowerElem {
    fn inv(&self) -> Result<Self, ScalarError> {
        TowerElem::inv(self)
    }
}

impl Ring for FunElem {
    fn zero() -> Self {
        FunElem::from_rational(Rational::zero())
    }
    fn one() -> Self {
        FunElem::from_rational(Rational::one())
    }
    fn from_rational(r: &Rational) -> Self {
        FunElem::from_rational(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        FunElem::is_zero(self)
    }
}

impl Field for FunElem {
    fn inv(&self) -> Result<Self, ScalarError> {
        FunElem::inv(self)
    }
}

/// A value in any of the supported carriers. Mixed operations promote to the
/// larger carrier: ℚ ⊂ tower ⊂ K(ε).
#[derive(Clone)]
pub enum Scalar {
    Rat(Rational),
    Tower(TowerElem),
    Fun(FunElem),
}

impl Scalar {
    fn rank(&self) -> u8 {
        match self {
            Scalar::Rat(_) => 0,
            Scalar::Tower(_) => 1,
            Scalar::Fun(_) => 2,
        }
    }

    pub fn to_tower(&self) -> Option<TowerElem> {
        match self {
            Scalar::Rat(r) => Some(TowerElem::from_rational(r.clone())),
            Scalar::Tower(t) => Some(t.clone()),
            Scalar::Fun(f) => f.as_constant(),
        }
    }

    pub fn to_fun(&self) -> FunElem {
        match self {
            Scalar::Rat(r) => FunElem::from_rational(r.clone()),
            Scalar::Tower(t) => FunElem::constant(t.clone()),
            Scalar::Fun(f) => f.clone(),
        }
    }

    /// The rational value, if the scalar is one.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Scalar::Rat(r) => Some(r.clone()),
            Scalar::Tower(t) => t.as_rational(),
            Scalar::Fun(f) => f.as_constant().and_then(|t| t.as_rational()),
        }
    }

    /// Sign under the real embedding; `None` for the unordered carrier.
    pub fn sign(&self) -> Option<Ordering> {
        match self {
            Scalar::Rat(r) => Some(r.signum()),
            Scalar::Tower(t) => Some(t.sign()),
            Scalar::Fun(_) => None,
        }
    }

    fn binop(
        &self,
        other: &Self,
        rat: impl Fn(&Rational, &Rational) -> Rational,
        tow: impl Fn(&TowerElem, &TowerElem) -> TowerElem,
        fun: impl Fn(&FunElem, &FunElem) -> FunElem,
    ) -> Scalar {
        match self.rank().max(other.rank()) {
            0 => match (self, other) {
                (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(rat(a, b)),
                _ => unreachable!(),
            },
            1 => Scalar::Tower(tow(&self.to_tower().unwrap(), &other.to_tower().unwrap())),
            _ => Scalar::Fun(fun(&self.to_fun(), &other.to_fun())),
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<TowerElem> for Scalar {
    fn from(t: TowerElem) -> Self {
        Scalar::Tower(t)
    }
}

impl From<FunElem> for Scalar {
    fn from(f: FunElem) -> Self {
        Scalar::Fun(f)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Tower(t) => write!(f, "{t}"),
            Scalar::Fun(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }
    fn one() -> Self {
        Scalar::Rat(Rational::one())
    }
    fn from_rational(r: &Rational) -> Self {
        Scalar::Rat(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a + b, |a, b| a + b, |a, b| a + b)
    }
    fn sub(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a - b, |a, b| a - b, |a, b| a - b)
    }
    fn mul(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a * b, |a, b| a * b, |a, b| a * b)
    }
    fn neg(&self) -> Self {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Tower(t) => Scalar::Tower(-t),
            Scalar::Fun(x) => Scalar::Fun(-x),
        }
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Tower(t) => t.is_zero(),
            Scalar::Fun(x) => x.is_zero(),
        }
    }
}

impl Field for Scalar {
    fn inv(&self) -> Result<Self, ScalarError> {
        Ok(match self {
            Scalar::Rat(r) => Scalar::Rat(r.inv()?),
            Scalar::Tower(t) => Scalar::Tower(t.inv()?),
            Scalar::Fun(x) => Scalar::Fun(x.inv()?),
        })
    }
}
