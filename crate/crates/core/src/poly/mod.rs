//! Multivariate polynomials over ℚ in named indeterminates.

mod det;
pub mod identities;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use det::{det_bareiss, det_cofactor, Matrix};

use crate::scalars::{ExactDiv, Rational, Ring};

/// A power product, stored as `(variable, exponent)` pairs sorted by name,
/// exponents strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Monomial(alloc::vec![(name.to_string(), 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: BTreeMap<&str, u32> = BTreeMap::new();
        for (v, e) in self.0.iter().chain(other.0.iter()) {
            *out.entry(v.as_str()).or_insert(0) += e;
        }
        Monomial(out.into_iter().map(|(v, e)| (v.to_string(), e)).collect())
    }

    /// `self / other` if `other` divides `self`.
    fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out: BTreeMap<&str, i64> = self.0.iter().map(|(v, e)| (v.as_str(), *e as i64)).collect();
        for (v, e) in &other.0 {
            let slot = out.get_mut(v.as_str())?;
            *slot -= *e as i64;
            if *slot < 0 {
                return None;
            }
        }
        Some(Monomial(
            out.into_iter().filter(|(_, e)| *e > 0).map(|(v, e)| (v.to_string(), e as u32)).collect(),
        ))
    }

    fn exponent(&self, var: &str) -> u32 {
        self.0.iter().find(|(v, _)| v == var).map_or(0, |(_, e)| *e)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order; earlier variable names are more significant.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut vars: Vec<&str> = self.0.iter().chain(other.0.iter()).map(|(v, _)| v.as_str()).collect();
            vars.sort_unstable();
            vars.dedup();
            for v in vars {
                match self.exponent(v).cmp(&other.exponent(v)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial with rational coefficients. No zero coefficients are stored,
/// so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Polynomial { terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(name), Rational::one());
        Polynomial { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::default();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    /// Terms in descending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut vs: Vec<String> = self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(Rational::one());
        for _ in 0..e {
            acc = Ring::mul(&acc, self);
        }
        acc
    }

    /// Replaces each bound variable by its polynomial value.
    pub fn substitute(&self, bindings: &BTreeMap<String, Polynomial>) -> Polynomial {
        self.eval_with(|v| bindings.get(v).cloned().unwrap_or_else(|| Polynomial::var(v)))
    }

    /// Evaluates in any ring, given a value for every variable that occurs.
    pub fn eval_with<R: Ring>(&self, mut value: impl FnMut(&str) -> R) -> R {
        let mut total = R::zero();
        for (m, c) in &self.terms {
            let mut t = R::from_rational(c);
            for (v, e) in &m.0 {
                let x = value(v);
                for _ in 0..*e {
                    t = t.mul(&x);
                }
            }
            total = total.add(&t);
        }
        total
    }

    /// Rational value when every occurring variable is bound.
    pub fn eval_rational(&self, bindings: &BTreeMap<String, Rational>) -> Option<Rational> {
        let p = self.substitute(&bindings.iter().map(|(k, v)| (k.clone(), Polynomial::constant(v.clone()))).collect());
        p.as_constant()
    }
}

impl Ring for Polynomial {
    fn zero() -> Self {
        Polynomial::default()
    }
    fn one() -> Self {
        Polynomial::constant(Rational::one())
    }
    fn from_rational(r: &Rational) -> Self {
        Polynomial::constant(r.clone())
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = Polynomial::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
    fn neg(&self) -> Self {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl ExactDiv for Polynomial {
    /// Multivariate division by leading terms; an exact quotient exists iff
    /// every step's leading term is divisible and the remainder vanishes.
    fn div_exact(&self, other: &Self) -> Option<Self> {
        let (lm, lc) = other.leading_term()?;
        let mut rem = self.clone();
        let mut quot = Polynomial::default();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(lm)?;
            let qc = c / lc;
            let step = Polynomial::from_terms([(qm.clone(), qc.clone())]);
            rem = rem.sub(&step.mul(other));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }
}

impl From<Rational> for Polynomial {
    fn from(r: Rational) -> Self {
        Polynomial::constant(r)
    }
}

impl fmt::Display for Polynomial {
    /// Sorted terms with explicit `^` exponents, e.g. `9*c^2 + 6*c*e - 32*e + 256`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.signum() == Ordering::Less;
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.0.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A product `constant * prod factor_i^{e_i}` as claimed by a hand derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct Factored {
    pub constant: Rational,
    pub factors: Vec<(Polynomial, u32)>,
}

impl Factored {
    pub fn new(constant: Rational, factors: Vec<(Polynomial, u32)>) -> Self {
        Factored { constant, factors }
    }

    pub fn expand(&self) -> Polynomial {
        self.factors
            .iter()
            .fold(Polynomial::constant(self.constant.clone()), |acc, (p, e)| acc.mul(&p.pow(*e)))
    }
}

impl fmt::Display for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (p, e) in &self.factors {
            if *e == 1 {
                write!(f, "*({p})")?;
            } else {
                write!(f, "*({p})^{e}")?;
            }
        }
        Ok(())
    }
}

/// True iff `lhs` equals the expansion of the factored form. No factoring is
/// attempted; the factors are taken as given.
pub fn identity_holds(lhs: &Polynomial, rhs: &Factored) -> bool {
    lhs == &rhs.expand()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Polynomial {
        Polynomial::var(n)
    }

    fn k(n: i64) -> Polynomial {
        Polynomial::constant(Rational::integer(n))
    }

    #[test]
    fn square_expansion_matches_hand_oracle() {
        let p = v("e").sub(&k(16)).add(&k(3).mul(&v("c")));
        let sq = p.mul(&p);
        // Hand expansion: e^2 + 6ce - 32e + 9c^2 - 96c + 256.
        let hand = v("e")
            .pow(2)
            .add(&k(6).mul(&v("c")).mul(&v("e")))
            .sub(&k(32).mul(&v("e")))
            .add(&k(9).mul(&v("c").pow(2)))
            .sub(&k(96).mul(&v("c")))
            .add(&k(256));
        assert_eq!(sq, hand);
        assert_eq!(sq.to_string(), "9*c^2 + 6*c*e + e^2 - 96*c - 32*e + 256");
    }

    #[test]
    fn trivial_identities() {
        let x = v("x");
        assert!(x.sub(&x).is_zero());
        let lhs = x.add(&k(1)).mul(&x.sub(&k(1)));
        assert_eq!(lhs, x.pow(2).sub(&k(1)));
        assert!(identity_holds(
            &x.pow(2).sub(&k(1)),
            &Factored::new(Rational::one(), alloc::vec![(x.sub(&k(1)), 1), (x.add(&k(1)), 1)])
        ));
        assert!(!identity_holds(&x.pow(2).add(&k(1)), &Factored::new(Rational::one(), alloc::vec![(x.sub(&k(1)), 2)])));
    }

    #[test]
    fn substitution() {
        let mut b = BTreeMap::new();
        b.insert("e".to_string(), k(16).sub(&k(3).mul(&v("c"))));
        let p = v("e").add(&k(3).mul(&v("c")));
        assert_eq!(p.substitute(&b), k(16));
        // c*d = -(d^2 - 10d + 9) at d = 5, c = 16/5.
        let rel = v("c").mul(&v("d")).add(&v("d").pow(2).sub(&k(10).mul(&v("d"))).add(&k(9)));
        let mut vals = BTreeMap::new();
        vals.insert("c".to_string(), Rational::new(16, 5));
        vals.insert("d".to_string(), Rational::integer(5));
        assert_eq!(rel.eval_rational(&vals), Some(Rational::zero()));
    }

    #[test]
    fn exact_division() {
        let x = v("x");
        let y = v("y");
        let p = x.add(&y).mul(&x.sub(&k(2).mul(&y)));
        assert_eq!(p.div_exact(&x.add(&y)), Some(x.sub(&k(2).mul(&y))));
        assert_eq!(p.div_exact(&x.add(&k(1))), None);
    }
}
