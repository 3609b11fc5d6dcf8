//! Points, squared distances, Cayley-Menger determinants and the two
//! coordinate lemmas (collinear distance ratios, equal-distance rhombi).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::poly::{det_bareiss, Matrix};
use crate::scalars::{ExactDiv, Field, Rational, Ring, TowerElem};

/// A point of the plane over some carrier.
#[derive(Clone, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: fmt::Debug> fmt::Debug for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl<S: Ring> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    pub fn origin() -> Self {
        Point { x: S::zero(), y: S::zero() }
    }

    pub fn from_rationals(x: Rational, y: Rational) -> Self {
        Point { x: S::from_rational(&x), y: S::from_rational(&y) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Point { x: self.x.add(&o.x), y: self.y.add(&o.y) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Point { x: self.x.sub(&o.x), y: self.y.sub(&o.y) }
    }

    pub fn scale(&self, s: &S) -> Self {
        Point { x: self.x.mul(s), y: self.y.mul(s) }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&S::from_rational(r))
    }

    pub fn neg(&self) -> Self {
        Point { x: self.x.neg(), y: self.y.neg() }
    }

    pub fn dot(&self, o: &Self) -> S {
        self.x.mul(&o.x).add(&self.y.mul(&o.y))
    }

    pub fn cross(&self, o: &Self) -> S {
        self.x.mul(&o.y).sub(&self.y.mul(&o.x))
    }

    /// Quarter turn: `(x, y) -> (-y, x)`.
    pub fn perp(&self) -> Self {
        Point { x: self.y.neg(), y: self.x.clone() }
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Point<T> {
        Point { x: f(&self.x), y: f(&self.y) }
    }
}

/// `(x1 - y1)^2 + (x2 - y2)^2`, over any carrier. This is not a metric in
/// general (it can vanish for distinct points of a non-real field).
pub fn sqdist<S: Ring>(p: &Point<S>, q: &Point<S>) -> S {
    p.sub(q).norm_sq()
}

/// Bordered Cayley-Menger matrix from the strictly upper-triangular squared
/// distances listed row by row: `d12, d13, ..., d1n, d23, ...`.
#[allow(clippy::needless_range_loop)]
pub fn bordered_matrix<R: Ring>(n: usize, upper: &[R]) -> Matrix<R> {
    assert_eq!(upper.len(), n * (n - 1) / 2, "need n(n-1)/2 squared distances");
    let mut m = vec![vec![R::zero(); n + 1]; n + 1];
    for i in 1..=n {
        m[0][i] = R::one();
        m[i][0] = R::one();
    }
    let mut it = upper.iter();
    for i in 0..n {
        for j in i + 1..n {
            let d = it.next().unwrap();
            m[i + 1][j + 1] = d.clone();
            m[j + 1][i + 1] = d.clone();
        }
    }
    m
}

/// Cayley-Menger determinant of three points, from their squared distances.
pub fn cm3<R: ExactDiv>(d12: &R, d13: &R, d23: &R) -> R {
    det_bareiss(&bordered_matrix(3, &[d12.clone(), d13.clone(), d23.clone()]))
}

/// Cayley-Menger determinant of four points, from their squared distances.
pub fn cm4<R: ExactDiv>(d12: &R, d13: &R, d14: &R, d23: &R, d24: &R, d34: &R) -> R {
    det_bareiss(&bordered_matrix(
        4,
        &[d12.clone(), d13.clone(), d14.clone(), d23.clone(), d24.clone(), d34.clone()],
    ))
}

pub fn cm3_points<S: Field>(p: [&Point<S>; 3]) -> S {
    cm3(&sqdist(p[0], p[1]), &sqdist(p[0], p[2]), &sqdist(p[1], p[2]))
}

pub fn cm4_points<S: Field>(p: [&Point<S>; 4]) -> S {
    cm4(
        &sqdist(p[0], p[1]),
        &sqdist(p[0], p[2]),
        &sqdist(p[0], p[3]),
        &sqdist(p[1], p[2]),
        &sqdist(p[1], p[3]),
        &sqdist(p[2], p[3]),
    )
}

/// Three points of a real tower are affinely dependent iff their
/// Cayley-Menger determinant vanishes.
pub fn affinely_dependent3(p1: &Point<TowerElem>, p2: &Point<TowerElem>, p3: &Point<TowerElem>) -> bool {
    cm3_points([p1, p2, p3]).is_zero()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precondition {
    /// `phi(z, x) = a^2` fails.
    FirstDistance,
    /// `phi(x, x~) = b^2` fails.
    SecondDistance,
    /// `phi(z, x~) = (a + b)^2` fails.
    TotalDistance,
    /// `phi(E, F)` is zero.
    ZeroBase,
    /// `C = D`.
    CoincidentApexes,
    /// The four distances from `E`, `F` to `C`, `D` are not all equal.
    UnequalSides,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CmError {
    #[error("precondition violated: {0:?}")]
    PreconditionViolated(Precondition),
    #[error("a + b = 0")]
    DegenerateSum,
    /// Only reachable if the arithmetic itself is wrong.
    #[error("preconditions hold but the conclusion failed")]
    ConclusionFailed,
}

/// `x - z = ratio * (x~ - z)`, checked on coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioCertificate<S> {
    pub ratio: S,
    pub zx: Point<S>,
    pub zxt: Point<S>,
}

/// Checks the distance-ratio lemma on concrete points: from
/// `phi(z,x) = a^2`, `phi(x,x~) = b^2`, `phi(z,x~) = (a+b)^2` and `a + b != 0`,
/// the vector `x - z` is `a/(a+b)` times `x~ - z`.
pub fn prop3_verify<S: Field>(
    z: &Point<S>,
    x: &Point<S>,
    xt: &Point<S>,
    a: &S,
    b: &S,
) -> Result<RatioCertificate<S>, CmError> {
    let sum = a.add(b);
    if sum.is_zero() {
        return Err(CmError::DegenerateSum);
    }
    if sqdist(z, x) != a.square() {
        return Err(CmError::PreconditionViolated(Precondition::FirstDistance));
    }
    if sqdist(x, xt) != b.square() {
        return Err(CmError::PreconditionViolated(Precondition::SecondDistance));
    }
    if sqdist(z, xt) != sum.square() {
        return Err(CmError::PreconditionViolated(Precondition::TotalDistance));
    }
    let ratio = a.div(&sum).map_err(|_| CmError::DegenerateSum)?;
    let zx = x.sub(z);
    let zxt = xt.sub(z);
    if zx != zxt.scale(&ratio) {
        return Err(CmError::ConclusionFailed);
    }
    Ok(RatioCertificate { ratio, zx, zxt })
}

/// `C - E = F - D` and `C - F = E - D`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhombusCertificate<S> {
    pub ec: Point<S>,
    pub fc: Point<S>,
}

/// Checks the equal-distance lemma on concrete points: if `phi(E,F) != 0`,
/// `C != D` and `C`, `D` are equidistant from both `E` and `F`, then `EFCD`
/// closes up as `C - E = F - D`, `C - F = E - D`.
pub fn prop4_verify<S: Field>(
    e: &Point<S>,
    f: &Point<S>,
    c: &Point<S>,
    d: &Point<S>,
) -> Result<RhombusCertificate<S>, CmError> {
    if sqdist(e, f).is_zero() {
        return Err(CmError::PreconditionViolated(Precondition::ZeroBase));
    }
    if c == d {
        return Err(CmError::PreconditionViolated(Precondition::CoincidentApexes));
    }
    let ec2 = sqdist(e, c);
    if [sqdist(f, c), sqdist(e, d), sqdist(f, d)].iter().any(|v| v != &ec2) {
        return Err(CmError::PreconditionViolated(Precondition::UnequalSides));
    }
    let ec = c.sub(e);
    let fc = c.sub(f);
    if ec != f.sub(d) || fc != e.sub(d) {
        return Err(CmError::ConclusionFailed);
    }
    Ok(RhombusCertificate { ec, fc })
}

/// All pairwise squared distances of a point list, upper-triangular order.
pub fn pairwise_sqdists<S: Ring>(points: &[Point<S>]) -> Vec<S> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(sqdist(&points[i], &points[j]));
        }
    }
    out
}
