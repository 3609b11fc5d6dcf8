//! Vector relations between images of named points, shared by gadget goals
//! and engine facts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cm::Point;
use crate::scalars::{Field, Rational};

/// A relation between `f(p)` for named points `p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `f(b) - f(a) = f(d) - f(c)`.
    VecEq { a: String, b: String, c: String, d: String },
    /// `f(b) - f(a) = r (f(d) - f(c))`.
    VecScale { a: String, b: String, c: String, d: String, r: Rational },
    /// `f(c) = t f(a) + (1 - t) f(b)`.
    AffineComb { c: String, a: String, b: String, t: Rational },
    /// `(f(b) - f(a)) . (f(d) - f(c)) = 0`.
    DotZero { a: String, b: String, c: String, d: String },
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::VecEq { a, b, c, d } => write!(f, "VecEq({a},{b}; {c},{d})"),
            Relation::VecScale { a, b, c, d, r } => write!(f, "VecScale({a},{b}; {c},{d}; {r})"),
            Relation::AffineComb { c, a, b, t } => write!(f, "AffineComb({c}; {a},{b}; {t})"),
            Relation::DotZero { a, b, c, d } => write!(f, "DotZero({a},{b}; {c},{d})"),
        }
    }
}

/// `sum coeff_p * f(p) = 0`, zero coefficients dropped.
pub type LinearForm = BTreeMap<String, Rational>;

fn accumulate(form: &mut LinearForm, name: &str, c: Rational) {
    if c.is_zero() {
        return;
    }
    let sum = match form.remove(name) {
        Some(old) => &old + &c,
        None => c,
    };
    if !sum.is_zero() {
        form.insert(String::from(name), sum);
    }
}

pub fn form_add_scaled(form: &mut LinearForm, other: &LinearForm, k: &Rational) {
    for (n, c) in other {
        accumulate(form, n, c * k);
    }
}

impl Relation {
    /// The vector identity `sum coeff_p f(p) = 0` this relation asserts, for
    /// the linear kinds. `DotZero` is bilinear and has none.
    pub fn linear_form(&self) -> Option<LinearForm> {
        let mut form = LinearForm::new();
        let one = Rational::one();
        match self {
            Relation::VecEq { a, b, c, d } => {
                accumulate(&mut form, b, one.clone());
                accumulate(&mut form, a, -&one);
                accumulate(&mut form, d, -&one);
                accumulate(&mut form, c, one);
            }
            Relation::VecScale { a, b, c, d, r } => {
                accumulate(&mut form, b, one.clone());
                accumulate(&mut form, a, -&one);
                accumulate(&mut form, d, -r);
                accumulate(&mut form, c, r.clone());
            }
            Relation::AffineComb { c, a, b, t } => {
                accumulate(&mut form, c, one.clone());
                accumulate(&mut form, a, -t);
                accumulate(&mut form, b, -(&one - t));
            }
            Relation::DotZero { .. } => return None,
        }
        Some(form)
    }

    pub fn points(&self) -> Vec<&str> {
        match self {
            Relation::VecEq { a, b, c, d }
            | Relation::VecScale { a, b, c, d, .. }
            | Relation::DotZero { a, b, c, d } => vec![a, b, c, d],
            Relation::AffineComb { c, a, b, .. } => vec![c, a, b],
        }
        .into_iter()
        .map(String::as_str)
        .collect()
    }

    pub fn rename(&self, map: &impl Fn(&str) -> String) -> Relation {
        match self {
            Relation::VecEq { a, b, c, d } => Relation::VecEq { a: map(a), b: map(b), c: map(c), d: map(d) },
            Relation::VecScale { a, b, c, d, r } => {
                Relation::VecScale { a: map(a), b: map(b), c: map(c), d: map(d), r: r.clone() }
            }
            Relation::AffineComb { c, a, b, t } => {
                Relation::AffineComb { c: map(c), a: map(a), b: map(b), t: t.clone() }
            }
            Relation::DotZero { a, b, c, d } => Relation::DotZero { a: map(a), b: map(b), c: map(c), d: map(d) },
        }
    }

    /// Evaluates the relation at concrete images. Returns `Err(name)` for the
    /// first point the lookup cannot place.
    pub fn holds<S: Field>(&self, at: &impl Fn(&str) -> Option<Point<S>>) -> Result<bool, String> {
        let get = |n: &str| at(n).ok_or_else(|| String::from(n));
        if let Relation::DotZero { a, b, c, d } = self {
            let u = get(b)?.sub(&get(a)?);
            let w = get(d)?.sub(&get(c)?);
            return Ok(u.dot(&w).is_zero());
        }
        let form = self.linear_form().expect("linear kinds");
        let mut acc: Point<S> = Point::origin();
        for (n, c) in &form {
            acc = acc.add(&get(n)?.scale_rational(c));
        }
        // Names that cancel out still have to exist.
        for n in self.points() {
            get(n)?;
        }
        Ok(acc.is_zero())
    }
}

/// Solves `target = sum_i k_i premise_i` for rational multipliers `k_i`.
#[allow(clippy::needless_range_loop)]
pub fn solve_combination(premises: &[LinearForm], target: &LinearForm) -> Option<Vec<Rational>> {
    let mut names: Vec<&String> = premises.iter().flat_map(|p| p.keys()).chain(target.keys()).collect();
    names.sort();
    names.dedup();
    let rows = names.len();
    let cols = premises.len();
    // Augmented matrix: one row per point name.
    let mut m: Vec<Vec<Rational>> = names
        .iter()
        .map(|n| {
            let mut row: Vec<Rational> =
                premises.iter().map(|p| p.get(*n).cloned().unwrap_or_else(Rational::zero)).collect();
            row.push(target.get(*n).cloned().unwrap_or_else(Rational::zero));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot");
        for j in c..=cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let k = m[i][c].clone();
                for j in c..=cols {
                    let v = &m[r][j] * &k;
                    m[i][j] = &m[i][j] - &v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut out = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        out[c] = m[i][cols].clone();
    }
    Some(out)
}

/// Checks `target = sum k_i premise_i` exactly.
pub fn combination_matches(premises: &[LinearForm], multipliers: &[Rational], target: &LinearForm) -> bool {
    if premises.len() != multipliers.len() {
        return false;
    }
    let mut acc = LinearForm::new();
    for (p, k) in premises.iter().zip(multipliers) {
        form_add_scaled(&mut acc, p, k);
    }
    &acc == target
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn division_closure_is_a_combination() {
        let half = Rational::new(1, 2);
        let p1 = Relation::VecScale { a: s("A"), b: s("E"), c: s("A"), d: s("D"), r: half.clone() };
        let p2 = Relation::VecScale { a: s("B"), b: s("F"), c: s("B"), d: s("D"), r: half.clone() };
        let p3 = Relation::VecEq { a: s("E"), b: s("C"), c: s("D"), d: s("F") };
        let target = Relation::AffineComb { c: s("C"), a: s("A"), b: s("B"), t: half };
        let forms: Vec<_> = [p1, p2, p3].iter().map(|r| r.linear_form().unwrap()).collect();
        let k = solve_combination(&forms, &target.linear_form().unwrap()).unwrap();
        assert!(combination_matches(&forms, &k, &target.linear_form().unwrap()));
        let bogus = Relation::VecEq { a: s("A"), b: s("C"), c: s("A"), d: s("B") };
        assert!(solve_combination(&forms, &bogus.linear_form().unwrap()).is_none());
    }

    #[test]
    fn trivial_forms() {
        let r = Relation::VecEq { a: s("A"), b: s("B"), c: s("A"), d: s("B") };
        assert!(r.linear_form().unwrap().is_empty());
        assert_eq!(solve_combination(&[], &LinearForm::new()), Some(vec![]));
    }
}
