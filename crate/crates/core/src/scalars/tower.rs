//! Iterated quadratic extensions of ℚ with a fixed real embedding.
//!
//! A tower with generators `g_0, ..., g_{k-1}` has `g_i = +sqrt(d_i)` where the
//! radicand `d_i` is a positive element of the tower on `g_0..g_{i-1}` that is
//! not a square there. Elements are stored over the multiplicative basis
//! `prod_{i in S} g_i`, indexed by the bitmask of `S`; bit `i` selects `g_i`.
//! Writing an element as `a + b*g_{k-1}` with `a, b` in the sub-tower is the
//! split into the low and high halves of the coordinate vector.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use super::{Rational, ScalarError};

/// The generator list of a tower. Radicand `i` holds `2^i` coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Tower {
    radicands: Vec<Vec<Rational>>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.radicands.iter()).finish()
    }
}

impl Tower {
    pub fn rationals() -> Arc<Tower> {
        Arc::new(Tower::default())
    }

    /// Rebuilds a tower from raw radicand coordinates, checking every
    /// invariant (sizes, positivity, non-squareness).
    pub fn from_radicands(radicands: Vec<Vec<Rational>>) -> Result<Arc<Tower>, ScalarError> {
        let mut built = Tower::default();
        for (i, r) in radicands.into_iter().enumerate() {
            if r.len() != 1 << i {
                return Err(ScalarError::MalformedTower);
            }
            if sign_raw(&built.radicands, i, &r) != Ordering::Greater {
                return Err(ScalarError::NonPositiveRadicand);
            }
            if sqrt_raw(&built.radicands, i, &r).is_some() {
                return Err(ScalarError::MalformedTower);
            }
            built.radicands.push(r);
        }
        Ok(Arc::new(built))
    }

    pub fn depth(&self) -> usize {
        self.radicands.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.radicands.len()
    }

    pub fn radicands(&self) -> &[Vec<Rational>] {
        &self.radicands
    }

    /// Radicand of generator `i`, as an element of this tower.
    pub fn radicand(self: &Arc<Self>, i: usize) -> Result<TowerElem, ScalarError> {
        let r = self.radicands.get(i).ok_or(ScalarError::BadGeneratorIndex(i))?;
        let mut coords = r.clone();
        coords.resize(self.dim(), Rational::zero());
        Ok(TowerElem { tower: self.clone(), coords })
    }

    pub fn generator(self: &Arc<Self>, i: usize) -> Result<TowerElem, ScalarError> {
        if i >= self.depth() {
            return Err(ScalarError::BadGeneratorIndex(i));
        }
        let mut coords = vec![Rational::zero(); self.dim()];
        coords[1 << i] = Rational::one();
        Ok(TowerElem { tower: self.clone(), coords })
    }

    pub fn is_prefix_of(&self, other: &Tower) -> bool {
        self.radicands.len() <= other.radicands.len()
            && self.radicands.iter().zip(&other.radicands).all(|(a, b)| a == b)
    }

    /// Adjoins `+sqrt(radicand)`. When the radicand already has a square root
    /// in the tower the tower is returned unchanged together with that root.
    pub fn adjoin_sqrt(
        self: &Arc<Self>,
        radicand: &TowerElem,
    ) -> Result<(Arc<Tower>, TowerElem), ScalarError> {
        let (tower, _) = merge_towers(self, &radicand.tower);
        let tower = if tower.radicands == self.radicands { self.clone() } else { tower };
        let r = radicand.lift_to(&tower)?;
        if r.sign() != Ordering::Greater {
            return Err(ScalarError::NonPositiveRadicand);
        }
        if let Some(root) = r.sqrt() {
            return Ok((tower, root));
        }
        let mut next = (*tower).clone();
        next.radicands.push(r.coords);
        let next = Arc::new(next);
        let g = next.generator(next.depth() - 1)?;
        Ok((next, g))
    }

    /// Removes generators that no listed element (and no remaining radicand)
    /// depends on. Returns the smaller tower and the re-expressed elements.
    pub fn minimize(elems: &[TowerElem]) -> (Arc<Tower>, Vec<TowerElem>) {
        let Some(first) = elems.first() else {
            return (Tower::rationals(), Vec::new());
        };
        let mut tower = first.tower.clone();
        for e in &elems[1..] {
            tower = merge_towers(&tower, &e.tower).0;
        }
        let mut coords: Vec<Vec<Rational>> = elems
            .iter()
            .map(|e| e.lift_to(&tower).expect("merged tower contains all").coords)
            .collect();
        let mut rads = tower.radicands.clone();
        let mut j = rads.len();
        while j > 0 {
            j -= 1;
            let bit = 1usize << j;
            let used_by_elems = coords
                .iter()
                .any(|c| c.iter().enumerate().any(|(idx, v)| idx & bit != 0 && !v.is_zero()));
            let used_by_rads = rads[j + 1..]
                .iter()
                .any(|c| c.iter().enumerate().any(|(idx, v)| idx & bit != 0 && !v.is_zero()));
            if used_by_elems || used_by_rads {
                continue;
            }
            let drop_bit = |c: &Vec<Rational>| -> Vec<Rational> {
                c.iter()
                    .enumerate()
                    .filter(|(idx, _)| idx & bit == 0)
                    .map(|(_, v)| v.clone())
                    .collect()
            };
            for c in coords.iter_mut() {
                *c = drop_bit(c);
            }
            for r in rads[j + 1..].iter_mut() {
                *r = drop_bit(r);
            }
            rads.remove(j);
        }
        let tower = Arc::new(Tower { radicands: rads });
        let elems = coords
            .into_iter()
            .map(|c| TowerElem { tower: tower.clone(), coords: c })
            .collect();
        (tower, elems)
    }
}

/// Smallest common extension of two towers. The result extends `a`; the
/// second component lists where each generator of `b` lands.
pub fn merge_towers(a: &Arc<Tower>, b: &Arc<Tower>) -> (Arc<Tower>, Vec<TowerElem>) {
    if b.is_prefix_of(a) {
        let images = (0..b.depth()).map(|i| a.generator(i).unwrap()).collect();
        return (a.clone(), images);
    }
    if a.is_prefix_of(b) {
        let images = (0..b.depth()).map(|i| b.generator(i).unwrap()).collect();
        return (b.clone(), images);
    }
    let mut tower = a.clone();
    let mut images: Vec<TowerElem> = Vec::new();
    for i in 0..b.depth() {
        let rad = eval_with_images(&b.radicands[i], i, &images, &tower);
        let (t, root) = tower
            .adjoin_sqrt(&rad)
            .expect("radicands of a valid tower stay positive under real embeddings");
        tower = t;
        images = images.into_iter().map(|e| e.lift_to(&tower).unwrap()).collect();
        images.push(root);
    }
    (tower, images)
}

fn eval_with_images(coords: &[Rational], k: usize, images: &[TowerElem], target: &Arc<Tower>) -> TowerElem {
    if k == 0 {
        return TowerElem::from_rational_in(target, coords[0].clone());
    }
    let half = 1 << (k - 1);
    let lo = eval_with_images(&coords[..half], k - 1, images, target);
    let hi = eval_with_images(&coords[half..], k - 1, images, target);
    &lo + &(&hi * &images[k - 1].lift_to(target).unwrap())
}

/// An element of a [`Tower`].
#[derive(Clone)]
pub struct TowerElem {
    tower: Arc<Tower>,
    coords: Vec<Rational>,
}

impl TowerElem {
    pub fn from_rational(r: Rational) -> Self {
        TowerElem { tower: Tower::rationals(), coords: vec![r] }
    }

    pub fn from_rational_in(tower: &Arc<Tower>, r: Rational) -> Self {
        let mut coords = vec![Rational::zero(); tower.dim()];
        coords[0] = r;
        TowerElem { tower: tower.clone(), coords }
    }

    pub fn from_coords(tower: &Arc<Tower>, coords: Vec<Rational>) -> Result<Self, ScalarError> {
        if coords.len() != tower.dim() {
            return Err(ScalarError::MalformedTower);
        }
        Ok(TowerElem { tower: tower.clone(), coords })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Rational::is_zero)
    }

    /// The rational value, when the element lies in ℚ.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coords[1..].iter().all(Rational::is_zero) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn lift_to(&self, target: &Arc<Tower>) -> Result<TowerElem, ScalarError> {
        if Arc::ptr_eq(&self.tower, target) {
            return Ok(self.clone());
        }
        if self.tower.is_prefix_of(target) {
            let mut coords = self.coords.clone();
            coords.resize(target.dim(), Rational::zero());
            return Ok(TowerElem { tower: target.clone(), coords });
        }
        // Rational-valued elements embed anywhere.
        if let Some(r) = self.as_rational() {
            return Ok(TowerElem::from_rational_in(target, r));
        }
        let (merged, images) = merge_towers(target, &self.tower);
        if merged.depth() != target.depth() {
            return Err(ScalarError::OutOfTower);
        }
        Ok(eval_with_images(&self.coords, self.tower.depth(), &images, target))
    }

    fn aligned(&self, other: &TowerElem) -> (Arc<Tower>, Vec<Rational>, Vec<Rational>) {
        if Arc::ptr_eq(&self.tower, &other.tower) || self.tower == other.tower {
            return (self.tower.clone(), self.coords.clone(), other.coords.clone());
        }
        let (t, _) = merge_towers(&self.tower, &other.tower);
        let a = self.lift_to(&t).expect("merged tower");
        let b = other.lift_to(&t).expect("merged tower");
        (t, a.coords, b.coords)
    }

    pub fn sign(&self) -> Ordering {
        sign_raw(&self.tower.radicands, self.tower.depth(), &self.coords)
    }

    pub fn abs(&self) -> TowerElem {
        if self.sign() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Result<TowerElem, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let coords = inv_raw(&self.tower.radicands, self.tower.depth(), &self.coords);
        Ok(TowerElem { tower: self.tower.clone(), coords })
    }

    pub fn div(&self, other: &TowerElem) -> Result<TowerElem, ScalarError> {
        Ok(self * &other.inv()?)
    }

    /// The non-negative square root, when it exists in this element's tower.
    pub fn sqrt(&self) -> Option<TowerElem> {
        if self.sign() == Ordering::Less {
            return None;
        }
        let coords = sqrt_raw(&self.tower.radicands, self.tower.depth(), &self.coords)?;
        let root = TowerElem { tower: self.tower.clone(), coords };
        Some(root.abs())
    }

    pub fn square(&self) -> TowerElem {
        self * self
    }

    /// Image under the embedding with `g_which -> -g_which`. Generators above
    /// `which` go to the positive root of their conjugated radicand, adjoined
    /// to the target tower when it is missing; a negative conjugated radicand
    /// has no real root and is an error.
    pub fn conjugate(&self, which: usize) -> Result<TowerElem, ScalarError> {
        let (target, images) = conjugation_images(&self.tower, which)?;
        Ok(eval_with_images(&self.coords, self.tower.depth(), &images, &target))
    }

    /// Evaluates this element with generator `i` replaced by `images[i]`.
    pub fn substitute_generators(&self, images: &[TowerElem], target: &Arc<Tower>) -> TowerElem {
        eval_with_images(&self.coords, self.tower.depth(), images, target)
    }
}

/// Target tower and generator images of the conjugation flipping generator
/// `which`. The target extends `tower` by any roots the images need.
pub fn conjugation_images(tower: &Arc<Tower>, which: usize) -> Result<(Arc<Tower>, Vec<TowerElem>), ScalarError> {
    if which >= tower.depth() {
        return Err(ScalarError::BadGeneratorIndex(which));
    }
    let mut target = tower.clone();
    let mut images: Vec<TowerElem> = Vec::with_capacity(tower.depth());
    for i in 0..tower.depth() {
        let g = tower.generator(i)?;
        if i < which {
            images.push(g);
        } else if i == which {
            images.push(-&g);
        } else {
            let rad = eval_with_images(&tower.radicands[i], i, &images, &target);
            if rad.sign() != Ordering::Greater {
                return Err(ScalarError::NonExtendableConjugation(which));
            }
            let (next, root) = target.adjoin_sqrt(&rad)?;
            if !Arc::ptr_eq(&next, &target) {
                images = images.iter().map(|x| x.lift_to(&next)).collect::<Result<_, _>>()?;
                target = next;
            }
            images.push(root.lift_to(&target)?);
        }
    }
    Ok((target, images))
}

fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

fn add_raw(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn sub_raw(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn neg_raw(x: &[Rational]) -> Vec<Rational> {
    x.iter().map(|a| -a).collect()
}

fn scale_raw(x: &[Rational], s: &Rational) -> Vec<Rational> {
    x.iter().map(|a| a * s).collect()
}

fn concat(lo: Vec<Rational>, hi: Vec<Rational>) -> Vec<Rational> {
    let mut v = lo;
    v.extend(hi);
    v
}

fn mul_raw(rads: &[Vec<Rational>], k: usize, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    if k == 0 {
        return vec![&x[0] * &y[0]];
    }
    let half = 1 << (k - 1);
    let (a1, b1) = x.split_at(half);
    let (a2, b2) = y.split_at(half);
    let b1_zero = b1.iter().all(Rational::is_zero);
    let b2_zero = b2.iter().all(Rational::is_zero);
    match (b1_zero, b2_zero) {
        (true, true) => return concat(mul_raw(rads, k - 1, a1, a2), zeros(half)),
        (true, false) => return concat(mul_raw(rads, k - 1, a1, a2), mul_raw(rads, k - 1, a1, b2)),
        (false, true) => return concat(mul_raw(rads, k - 1, a1, a2), mul_raw(rads, k - 1, b1, a2)),
        (false, false) => {}
    }
    let aa = mul_raw(rads, k - 1, a1, a2);
    let bb = mul_raw(rads, k - 1, b1, b2);
    let bbd = mul_raw(rads, k - 1, &bb, &rads[k - 1]);
    // (a1 + b1)(a2 + b2) - aa - bb = a1 b2 + b1 a2
    let cross = mul_raw(rads, k - 1, &add_raw(a1, b1), &add_raw(a2, b2));
    let mixed = sub_raw(&sub_raw(&cross, &aa), &bb);
    concat(add_raw(&aa, &bbd), mixed)
}

fn inv_raw(rads: &[Vec<Rational>], k: usize, x: &[Rational]) -> Vec<Rational> {
    if k == 0 {
        return vec![x[0].inv().expect("nonzero checked by caller")];
    }
    let half = 1 << (k - 1);
    let (a, b) = x.split_at(half);
    if b.iter().all(Rational::is_zero) {
        return concat(inv_raw(rads, k - 1, a), zeros(half));
    }
    let aa = mul_raw(rads, k - 1, a, a);
    let bb = mul_raw(rads, k - 1, b, b);
    let norm = sub_raw(&aa, &mul_raw(rads, k - 1, &bb, &rads[k - 1]));
    let ninv = inv_raw(rads, k - 1, &norm);
    concat(mul_raw(rads, k - 1, a, &ninv), neg_raw(&mul_raw(rads, k - 1, b, &ninv)))
}

/// Exact sign under the real embedding: for `a + b*sqrt(d)` with `a`, `b` of
/// opposite signs the sign is decided by the sign of the norm `a^2 - b^2 d`.
fn sign_raw(rads: &[Vec<Rational>], k: usize, x: &[Rational]) -> Ordering {
    if k == 0 {
        return x[0].signum();
    }
    let half = 1 << (k - 1);
    let (a, b) = x.split_at(half);
    let sb = sign_raw(rads, k - 1, b);
    let sa = sign_raw(rads, k - 1, a);
    if sb == Ordering::Equal || sa == sb {
        return sa;
    }
    if sa == Ordering::Equal {
        return sb;
    }
    let aa = mul_raw(rads, k - 1, a, a);
    let bb = mul_raw(rads, k - 1, b, b);
    let norm = sub_raw(&aa, &mul_raw(rads, k - 1, &bb, &rads[k - 1]));
    if sign_raw(rads, k - 1, &norm) == Ordering::Greater {
        sa
    } else {
        sb
    }
}

/// Some square root in the tower (either sign), if one exists.
fn sqrt_raw(rads: &[Vec<Rational>], k: usize, x: &[Rational]) -> Option<Vec<Rational>> {
    if k == 0 {
        return x[0].sqrt().map(|r| vec![r]);
    }
    let half = 1 << (k - 1);
    let (a, b) = x.split_at(half);
    let d = &rads[k - 1];
    if b.iter().all(Rational::is_zero) {
        if let Some(s) = sqrt_raw(rads, k - 1, a) {
            return Some(concat(s, zeros(half)));
        }
        let a_over_d = mul_raw(rads, k - 1, a, &inv_raw(rads, k - 1, d));
        return sqrt_raw(rads, k - 1, &a_over_d).map(|s| concat(zeros(half), s));
    }
    let aa = mul_raw(rads, k - 1, a, a);
    let bb = mul_raw(rads, k - 1, b, b);
    let norm = sub_raw(&aa, &mul_raw(rads, k - 1, &bb, d));
    let n = sqrt_raw(rads, k - 1, &norm)?;
    let half_r = Rational::new(1, 2);
    for cand in [n.clone(), neg_raw(&n)] {
        let h = scale_raw(&add_raw(a, &cand), &half_r);
        if h.iter().all(Rational::is_zero) {
            continue;
        }
        if let Some(p) = sqrt_raw(rads, k - 1, &h) {
            let two_p = scale_raw(&p, &Rational::integer(2));
            let q = mul_raw(rads, k - 1, b, &inv_raw(rads, k - 1, &two_p));
            return Some(concat(p, q));
        }
    }
    None
}

impl PartialEq for TowerElem {
    fn eq(&self, other: &Self) -> bool {
        let (_, a, b) = self.aligned(other);
        a == b
    }
}

impl Eq for TowerElem {}

impl PartialOrd for TowerElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TowerElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign()
    }
}

impl From<Rational> for TowerElem {
    fn from(r: Rational) -> Self {
        TowerElem::from_rational(r)
    }
}

impl fmt::Debug for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TowerElem {
    /// Renders as a sum of `c*g0*g2`-style terms, where `gi` is the i-th
    /// generator of the element's tower.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.signum() == Ordering::Less;
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            if idx == 0 {
                write!(f, "{mag}")?;
                continue;
            }
            let mut wrote = false;
            if !mag.is_one() {
                write!(f, "{mag}")?;
                wrote = true;
            }
            for bit in 0..self.tower.depth() {
                if idx & (1 << bit) != 0 {
                    if wrote {
                        write!(f, "*")?;
                    }
                    write!(f, "g{bit}")?;
                    wrote = true;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

macro_rules! tower_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> core::ops::$tr<&'a TowerElem> for &'a TowerElem {
            type Output = TowerElem;
            fn $m(self, rhs: &'a TowerElem) -> TowerElem {
                let (tower, x, y) = self.aligned(rhs);
                let f: fn(&[Vec<Rational>], usize, &[Rational], &[Rational]) -> Vec<Rational> = $body;
                let coords = f(&tower.radicands, tower.depth(), &x, &y);
                TowerElem { tower, coords }
            }
        }
        impl core::ops::$tr for TowerElem {
            type Output = TowerElem;
            fn $m(self, rhs: TowerElem) -> TowerElem {
                (&self).$m(&rhs)
            }
        }
    };
}

tower_binop!(Add, add, |_, _, x, y| add_raw(x, y));
tower_binop!(Sub, sub, |_, _, x, y| sub_raw(x, y));
tower_binop!(Mul, mul, mul_raw);

impl core::ops::Neg for &TowerElem {
    type Output = TowerElem;
    fn neg(self) -> TowerElem {
        TowerElem { tower: self.tower.clone(), coords: neg_raw(&self.coords) }
    }
}

impl core::ops::Neg for TowerElem {
    type Output = TowerElem;
    fn neg(self) -> TowerElem {
        -&self
    }
}
