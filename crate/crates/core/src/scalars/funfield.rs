//! The rational-function field K(ε) over a tower K.
//!
//! This field extends a subfield of ℝ but carries no order: there is no sign
//! or comparison here, only the field operations and zero test.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::tower::merge_towers;
use super::{Rational, ScalarError, Tower, TowerElem};

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
type Coeffs = Vec<TowerElem>;

/// A fraction `num(ε)/den(ε)` with a monic denominator.
///
/// Arithmetic does not cancel common factors; [`FunElem::reduced`] does.
#[derive(Clone)]
pub struct FunElem {
    tower: Arc<Tower>,
    num: Coeffs,
    den: Coeffs,
}

fn trim(mut p: Coeffs) -> Coeffs {
    while p.last().is_some_and(TowerElem::is_zero) {
        p.pop();
    }
    p
}

fn padd(a: &[TowerElem], b: &[TowerElem]) -> Coeffs {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(out)
}

fn pneg(a: &[TowerElem]) -> Coeffs {
    a.iter().map(|x| -x).collect()
}

fn pmul(a: &[TowerElem], b: &[TowerElem]) -> Coeffs {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let zero = TowerElem::from_rational_in(a[0].tower(), Rational::zero());
    let mut out = vec![zero; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(out)
}

fn pscale(a: &[TowerElem], s: &TowerElem) -> Coeffs {
    trim(a.iter().map(|x| x * s).collect())
}

/// Quotient and remainder; `b` must be nonzero.
fn pdivrem(a: &[TowerElem], b: &[TowerElem]) -> (Coeffs, Coeffs) {
    let lc_inv = b.last().expect("nonzero divisor").inv().expect("trimmed");
    let mut rem: Coeffs = a.to_vec();
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let zero = TowerElem::from_rational_in(b[0].tower(), Rational::zero());
    let mut quot = vec![zero; rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() * &lc_inv;
        for (j, y) in b.iter().enumerate() {
            rem[shift + j] = &rem[shift + j] - &(&c * y);
        }
        quot[shift] = c;
        // Leading term cancels exactly.
        rem.pop();
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn pmonic(a: &[TowerElem]) -> Coeffs {
    match a.last() {
        None => Vec::new(),
        Some(lc) => pscale(a, &lc.inv().expect("trimmed")),
    }
}

fn pgcd(a: &[TowerElem], b: &[TowerElem]) -> Coeffs {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        let (_, r) = pdivrem(&x, &y);
        x = y;
        y = r;
    }
    pmonic(&x)
}

impl FunElem {
    fn lift_all(p: &[TowerElem], t: &Arc<Tower>) -> Coeffs {
        p.iter().map(|c| c.lift_to(t).expect("merged tower")).collect()
    }

    fn build(tower: Arc<Tower>, num: Coeffs, den: Coeffs) -> Result<Self, ScalarError> {
        let num = trim(num);
        let den = trim(den);
        if den.is_empty() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_empty() {
            return Ok(FunElem::zero_in(&tower));
        }
        let lc = den.last().unwrap();
        if lc.as_rational().is_some_and(|r| r == Rational::one()) {
            return Ok(FunElem { num, den, tower });
        }
        let lc_inv = lc.inv().expect("trimmed");
        Ok(FunElem { num: pscale(&num, &lc_inv), den: pscale(&den, &lc_inv), tower })
    }

    /// The same function in lowest terms, which is a canonical form.
    pub fn reduced(&self) -> FunElem {
        if self.num.is_empty() || self.den.len() == 1 {
            return self.clone();
        }
        let g = pgcd(&self.num, &self.den);
        if g.len() == 1 {
            return self.clone();
        }
        let (num, _) = pdivrem(&self.num, &g);
        let (den, _) = pdivrem(&self.den, &g);
        FunElem::build(self.tower.clone(), num, den).expect("nonzero denominator")
    }

    pub fn zero_in(tower: &Arc<Tower>) -> Self {
        FunElem {
            tower: tower.clone(),
            num: Vec::new(),
            den: vec![TowerElem::from_rational_in(tower, Rational::one())],
        }
    }

    pub fn constant(c: TowerElem) -> Self {
        let tower = c.tower().clone();
        FunElem::build(tower.clone(), vec![c], vec![TowerElem::from_rational_in(&tower, Rational::one())])
            .expect("unit denominator")
    }

    pub fn from_rational(r: Rational) -> Self {
        FunElem::constant(TowerElem::from_rational(r))
    }

    /// The indeterminate ε.
    pub fn epsilon() -> Self {
        let t = Tower::rationals();
        FunElem {
            num: vec![TowerElem::from_rational_in(&t, Rational::zero()), TowerElem::from_rational_in(&t, Rational::one())],
            den: vec![TowerElem::from_rational_in(&t, Rational::one())],
            tower: t,
        }
    }

    /// Builds and reduces `num/den` from coefficient lists (lowest degree first).
    pub fn from_parts(num: Vec<TowerElem>, den: Vec<TowerElem>) -> Result<Self, ScalarError> {
        let mut tower = Tower::rationals();
        for c in num.iter().chain(den.iter()) {
            tower = merge_towers(&tower, c.tower()).0;
        }
        let num = FunElem::lift_all(&num, &tower);
        let den = FunElem::lift_all(&den, &tower);
        FunElem::build(tower, num, den)
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn numerator(&self) -> &[TowerElem] {
        &self.num
    }

    pub fn denominator(&self) -> &[TowerElem] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// The constant value, when the function does not depend on ε.
    pub fn as_constant(&self) -> Option<TowerElem> {
        let Some(lc) = self.num.last() else {
            return Some(TowerElem::from_rational_in(&self.tower, Rational::zero()));
        };
        // The denominator is monic, so a constant numerator is exactly lc * den.
        (self.num.len() == self.den.len() && self.num == pscale(&self.den, lc)).then(|| lc.clone())
    }

    fn aligned(&self, other: &FunElem) -> (Arc<Tower>, [Coeffs; 4]) {
        let t = if Arc::ptr_eq(&self.tower, &other.tower) || self.tower == other.tower {
            self.tower.clone()
        } else {
            merge_towers(&self.tower, &other.tower).0
        };
        let parts = [
            FunElem::lift_all(&self.num, &t),
            FunElem::lift_all(&self.den, &t),
            FunElem::lift_all(&other.num, &t),
            FunElem::lift_all(&other.den, &t),
        ];
        (t, parts)
    }

    pub fn inv(&self) -> Result<FunElem, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        FunElem::build(self.tower.clone(), self.den.clone(), self.num.clone())
    }

    /// Applies a map to every coefficient (e.g. a tower conjugation).
    pub fn map_coeffs(&self, f: impl Fn(&TowerElem) -> TowerElem) -> Result<FunElem, ScalarError> {
        FunElem::from_parts(self.num.iter().map(&f).collect(), self.den.iter().map(&f).collect())
    }
}

impl PartialEq for FunElem {
    fn eq(&self, other: &Self) -> bool {
        let (_, [n1, d1, n2, d2]) = self.aligned(other);
        if d1 == d2 {
            return n1 == n2;
        }
        pmul(&n1, &d2) == pmul(&n2, &d1)
    }
}

impl Eq for FunElem {}

impl<'a> core::ops::Add<&'a FunElem> for &'a FunElem {
    type Output = FunElem;
    fn add(self, rhs: &'a FunElem) -> FunElem {
        let (t, [n1, d1, n2, d2]) = self.aligned(rhs);
        if d1 == d2 {
            return FunElem::build(t, padd(&n1, &n2), d1).expect("nonzero denominator");
        }
        // Monic denominators divide without inverting anything.
        if d2.len() < d1.len() {
            let (q, r) = pdivrem(&d1, &d2);
            if r.is_empty() {
                return FunElem::build(t, padd(&n1, &pmul(&n2, &q)), d1).expect("nonzero denominator");
            }
        } else if d1.len() < d2.len() {
            let (q, r) = pdivrem(&d2, &d1);
            if r.is_empty() {
                return FunElem::build(t, padd(&pmul(&n1, &q), &n2), d2).expect("nonzero denominator");
            }
        }
        let num = padd(&pmul(&n1, &d2), &pmul(&n2, &d1));
        FunElem::build(t, num, pmul(&d1, &d2)).expect("nonzero denominator")
    }
}

impl<'a> core::ops::Sub<&'a FunElem> for &'a FunElem {
    type Output = FunElem;
    fn sub(self, rhs: &'a FunElem) -> FunElem {
        self + &(-rhs)
    }
}

impl<'a> core::ops::Mul<&'a FunElem> for &'a FunElem {
    type Output = FunElem;
    fn mul(self, rhs: &'a FunElem) -> FunElem {
        let (t, [n1, d1, n2, d2]) = self.aligned(rhs);
        FunElem::build(t, pmul(&n1, &n2), pmul(&d1, &d2)).expect("nonzero denominator")
    }
}

impl core::ops::Neg for &FunElem {
    type Output = FunElem;
    fn neg(self) -> FunElem {
        FunElem { tower: self.tower.clone(), num: pneg(&self.num), den: self.den.clone() }
    }
}

impl fmt::Display for FunElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn poly(f: &mut fmt::Formatter<'_>, p: &[TowerElem]) -> fmt::Result {
            if p.is_empty() {
                return write!(f, "0");
            }
            let mut first = true;
            for (i, c) in p.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                match i {
                    0 => write!(f, "({c})")?,
                    1 => write!(f, "({c})*ε")?,
                    _ => write!(f, "({c})*ε^{i}")?,
                }
            }
            Ok(())
        }
        write!(f, "[")?;
        poly(f, &self.num)?;
        write!(f, "] / [")?;
        poly(f, &self.den)?;
        write!(f, "]")
    }
}

impl fmt::Debug for FunElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
