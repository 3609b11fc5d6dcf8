//! Explicit finite configurations with rational squared-distance certificates.
//!
//! Every builder returns a [`Gadget`]: named points with tower coordinates, the
//! pairs whose squared distances are rational (and hence preserved by any
//! unit-distance preserving map), the pairs that must stay distinct, and the
//! vector relation the configuration forces on images.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::cm::{sqdist, Point};
use crate::relations::Relation;
use crate::scalars::{Field, Rational, ScalarError, Tower, TowerElem};

pub type TPoint = Point<TowerElem>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GadgetError {
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("division parameter must lie strictly between 0 and 1")]
    TOutOfRange,
    #[error("radius {0} is outside the admissible interval")]
    RadiusOutOfRange(Rational),
    #[error("D - C is not equal to B - A")]
    NotATranslate,
    #[error("D - C is not the required rational multiple of B - A")]
    NotAScalarMultiple,
    #[error("|AC| is not a positive rational")]
    IrrationalSide,
    #[error("linkage parameter gives a tangent configuration")]
    DegenerateLinkage,
    #[error("segments are not perpendicular")]
    NotPerpendicular,
    #[error("segments are not parallel")]
    NotParallel,
    #[error("no exact linkage parameter within the supported radical depth")]
    UnreachableRatio,
    #[error("input points coincide")]
    CoincidentInputs,
    #[error("circles do not meet in two points")]
    NoIntersection,
    #[error("squared distance {0}{1} is not rational")]
    NonRationalDistance(String, String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("point {0} is duplicated")]
    DuplicatePoint(String),
    #[error("certificate entry {0}{1} does not match the coordinates")]
    InconsistentCertificate(String, String),
    #[error("side condition {0} != {1} is violated")]
    SideConditionViolated(String, String),
    #[error("goal does not hold for the identity map")]
    GoalFailsOnIdentity,
    #[error("sub-gadget point {0} disagrees with the enclosing gadget")]
    PartMismatch(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPoint {
    pub name: String,
    pub at: TPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertEntry {
    pub p: String,
    pub q: String,
    pub d2: Rational,
}

/// Structural data a replay needs, with names in the gadget's namespace.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    /// `C = tA + (1-t)B`, apex `D`, `E` on `AD`, `F` on `BD`.
    Division { a: String, b: String, c: String, d: String, e: String, f: String, t: Rational, r: Rational },
    /// Rhombi `A_i C_i C_{i+1} A_{i+1}` with common side `side`.
    RhombusChain { a_chain: Vec<String>, c_chain: Vec<String>, side: Rational },
    /// Parts are the chains `(A,B;E,F)` and `(E,F;C,D)`; none when `A = C`.
    Bridge { a: String, b: String, c: String, d: String, e: String, f: String },
    Kempe { a: String, b: String, c: String, d: String, e: String, f: String, t: TowerElem },
    /// `D - C = r (B - A)` via `G = A + r(B - A)`; parts are an optional
    /// division placing `G` and an optional bridge `(A,G;C,D)`.
    Scale { a: String, b: String, c: String, d: String, g: String, r: Rational },
    /// Parts: linkage, scale `(P,Q)` from the linkage's `(D,E)`, scale
    /// `(X,Y)` from the linkage's `(A,B)`.
    PerpTransfer { p: String, q: String, x: String, y: String, r: Rational, s: Rational },
    /// Parts: one perpendicularity transfer per nonzero segment.
    Parallel { a: String, b: String, c: String, d: String, x: String, y: String },
}

impl Construction {
    pub fn kind(&self) -> &'static str {
        match self {
            Construction::Division { .. } => "division",
            Construction::RhombusChain { .. } => "rhombus-chain",
            Construction::Bridge { .. } => "bridge",
            Construction::Kempe { .. } => "kempe",
            Construction::Scale { .. } => "scale",
            Construction::PerpTransfer { .. } => "perp",
            Construction::Parallel { .. } => "parallel",
        }
    }

    fn rename(&self, m: &impl Fn(&str) -> String) -> Construction {
        use Construction::*;
        match self {
            Division { a, b, c, d, e, f, t, r } => Division {
                a: m(a),
                b: m(b),
                c: m(c),
                d: m(d),
                e: m(e),
                f: m(f),
                t: t.clone(),
                r: r.clone(),
            },
            RhombusChain { a_chain, c_chain, side } => RhombusChain {
                a_chain: a_chain.iter().map(|n| m(n)).collect(),
                c_chain: c_chain.iter().map(|n| m(n)).collect(),
                side: side.clone(),
            },
            Bridge { a, b, c, d, e, f } => Bridge { a: m(a), b: m(b), c: m(c), d: m(d), e: m(e), f: m(f) },
            Kempe { a, b, c, d, e, f, t } => {
                Kempe { a: m(a), b: m(b), c: m(c), d: m(d), e: m(e), f: m(f), t: t.clone() }
            }
            Scale { a, b, c, d, g, r } => Scale { a: m(a), b: m(b), c: m(c), d: m(d), g: m(g), r: r.clone() },
            PerpTransfer { p, q, x, y, r, s } => {
                PerpTransfer { p: m(p), q: m(q), x: m(x), y: m(y), r: r.clone(), s: s.clone() }
            }
            Parallel { a, b, c, d, x, y } => Parallel { a: m(a), b: m(b), c: m(c), d: m(d), x: m(x), y: m(y) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub tower: Arc<Tower>,
    pub points: Vec<NamedPoint>,
    pub certificate: Vec<CertEntry>,
    pub side_conditions: Vec<(String, String)>,
    pub goal: Vec<Relation>,
    pub construction: Construction,
    pub parts: Vec<Gadget>,
}

impl Gadget {
    pub fn point(&self, name: &str) -> Option<&TPoint> {
        self.points.iter().find(|p| p.name == name).map(|p| &p.at)
    }

    pub fn certified(&self, p: &str, q: &str) -> Option<&Rational> {
        self.certificate.iter().find(|c| (c.p == p && c.q == q) || (c.p == q && c.q == p)).map(|c| &c.d2)
    }

    /// Re-checks every invariant against the stored coordinates.
    pub fn verify(&self) -> Result<(), GadgetError> {
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[..i] {
                if p.name == q.name || p.at == q.at {
                    return Err(GadgetError::DuplicatePoint(p.name.clone()));
                }
            }
        }
        let get = |n: &str| self.point(n).ok_or_else(|| GadgetError::UnknownPoint(n.to_string()));
        for c in &self.certificate {
            let d2 = sqdist(get(&c.p)?, get(&c.q)?);
            if d2 != TowerElem::from_rational(c.d2.clone()) {
                return Err(GadgetError::InconsistentCertificate(c.p.clone(), c.q.clone()));
            }
        }
        for (p, q) in &self.side_conditions {
            if get(p)? == get(q)? {
                return Err(GadgetError::SideConditionViolated(p.clone(), q.clone()));
            }
        }
        let lookup = |n: &str| self.point(n).cloned();
        for g in &self.goal {
            match g.holds(&lookup) {
                Ok(true) => {}
                Ok(false) => return Err(GadgetError::GoalFailsOnIdentity),
                Err(n) => return Err(GadgetError::UnknownPoint(n)),
            }
        }
        for part in &self.parts {
            part.verify()?;
            for np in &part.points {
                if self.point(&np.name) != Some(&np.at) {
                    return Err(GadgetError::PartMismatch(np.name.clone()));
                }
            }
        }
        Ok(())
    }

    fn rename(&self, m: &impl Fn(&str) -> String) -> Gadget {
        Gadget {
            tower: self.tower.clone(),
            points: self.points.iter().map(|p| NamedPoint { name: m(&p.name), at: p.at.clone() }).collect(),
            certificate: self
                .certificate
                .iter()
                .map(|c| CertEntry { p: m(&c.p), q: m(&c.q), d2: c.d2.clone() })
                .collect(),
            side_conditions: self.side_conditions.iter().map(|(p, q)| (m(p), m(q))).collect(),
            goal: self.goal.iter().map(|g| g.rename(m)).collect(),
            construction: self.construction.rename(m),
            parts: self.parts.iter().map(|g| g.rename(m)).collect(),
        }
    }
}

#[derive(Default)]
struct Builder {
    points: Vec<NamedPoint>,
    certificate: Vec<CertEntry>,
    sides: Vec<(String, String)>,
    parts: Vec<Gadget>,
}

impl Builder {
    /// Registers a point; a point whose coordinates are already present keeps
    /// the existing name.
    fn place(&mut self, name: &str, at: &TPoint) -> String {
        if let Some(p) = self.points.iter().find(|p| &p.at == at) {
            return p.name.clone();
        }
        let mut candidate = name.to_string();
        let mut n = 2;
        while self.points.iter().any(|p| p.name == candidate) {
            candidate = format!("{name}#{n}");
            n += 1;
        }
        self.points.push(NamedPoint { name: candidate.clone(), at: at.clone() });
        candidate
    }

    fn at(&self, name: &str) -> &TPoint {
        &self.points.iter().find(|p| p.name == name).expect("placed point").at
    }

    fn certify(&mut self, p: &str, q: &str) -> Result<(), GadgetError> {
        if p == q || self.certificate.iter().any(|c| (c.p == p && c.q == q) || (c.p == q && c.q == p)) {
            return Ok(());
        }
        let d2 = sqdist(self.at(p), self.at(q))
            .as_rational()
            .ok_or_else(|| GadgetError::NonRationalDistance(p.to_string(), q.to_string()))?;
        self.certificate.push(CertEntry { p: p.to_string(), q: q.to_string(), d2 });
        Ok(())
    }

    fn require_distinct(&mut self, p: &str, q: &str) -> Result<(), GadgetError> {
        if p == q {
            return Err(GadgetError::SideConditionViolated(p.to_string(), q.to_string()));
        }
        if !self.sides.iter().any(|(a, b)| (a == p && b == q) || (a == q && b == p)) {
            self.sides.push((p.to_string(), q.to_string()));
        }
        Ok(())
    }

    /// Merges a finished sub-gadget. Points not already present get `prefix`
    /// prepended to their names. Returns the renamed copy stored as a part.
    fn absorb(&mut self, part: &Gadget, prefix: &str) -> Result<Gadget, GadgetError> {
        let mut map = BTreeMap::new();
        for np in &part.points {
            let n = self.place(&format!("{prefix}{}", np.name), &np.at);
            map.insert(np.name.clone(), n);
        }
        let renamed = part.rename(&|n: &str| map[n].clone());
        for c in &renamed.certificate {
            self.certify(&c.p, &c.q)?;
        }
        for (p, q) in &renamed.side_conditions {
            self.require_distinct(p, q)?;
        }
        self.parts.push(renamed.clone());
        Ok(renamed)
    }

    /// Minimizes the ambient tower over all coordinates plus `extra`, which
    /// is returned re-expressed in the final tower.
    fn finish_with(
        self,
        goal: Vec<Relation>,
        construction: impl FnOnce(Vec<TowerElem>) -> Construction,
        extra: Vec<TowerElem>,
    ) -> Gadget {
        let mut flat: Vec<TowerElem> = Vec::with_capacity(self.points.len() * 2 + extra.len());
        for p in &self.points {
            flat.push(p.at.x.clone());
            flat.push(p.at.y.clone());
        }
        let n = flat.len();
        flat.extend(extra);
        let (tower, mut elems) = Tower::minimize(&flat);
        let extra = elems.split_off(n);
        let mut it = elems.into_iter();
        let points = self
            .points
            .into_iter()
            .map(|p| NamedPoint { name: p.name, at: Point::new(it.next().unwrap(), it.next().unwrap()) })
            .collect();
        Gadget {
            tower,
            points,
            certificate: self.certificate,
            side_conditions: self.sides,
            goal,
            construction: construction(extra),
            parts: self.parts,
        }
    }

    fn finish(self, goal: Vec<Relation>, construction: Construction) -> Gadget {
        self.finish_with(goal, |_| construction, Vec::new())
    }
}

fn q(n: i64) -> Rational {
    Rational::integer(n)
}

fn te(r: &Rational) -> TowerElem {
    TowerElem::from_rational(r.clone())
}

fn rational_point(x: Rational, y: Rational) -> TPoint {
    Point::new(te(&x), te(&y))
}

/// Positive square root, adjoining it when needed.
fn root(x: &TowerElem) -> Result<TowerElem, GadgetError> {
    if x.is_zero() {
        return Ok(x.clone());
    }
    Ok(x.tower().clone().adjoin_sqrt(x)?.1)
}

/// Smallest positive integer `n` with `n^2 > x` (or `>=` when `strict` is
/// false).
fn smallest_integer_above(x: &TowerElem, strict: bool) -> Rational {
    let ok = |n: &Rational| {
        let c = te(&n.square()).cmp(x);
        c == Ordering::Greater || (!strict && c == Ordering::Equal)
    };
    if ok(&q(1)) {
        return q(1);
    }
    let mut hi = q(2);
    while !ok(&hi) {
        hi = &hi * &q(2);
    }
    // !ok(lo) and ok(hi) throughout.
    let mut lo = &hi / &q(2);
    while &hi - &lo > q(1) {
        let mid = Rational::from_bigint((&hi + &lo).floor() / 2);
        if ok(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The point `W` left of the directed line `P -> Q` with `|PW|^2 = rp2` and
/// `|QW|^2 = rq2`.
fn apex(p: &TPoint, qp: &TPoint, rp2: &TowerElem, rq2: &TowerElem) -> Result<TPoint, GadgetError> {
    let u = qp.sub(p);
    let l2 = u.norm_sq();
    if l2.is_zero() {
        return Err(GadgetError::CoincidentInputs);
    }
    let two_l2 = &l2 * &te(&q(2));
    let alpha = (&(&l2 + rp2) - rq2).div(&two_l2)?;
    let beta2 = &rp2.div(&l2)? - &alpha.square();
    if beta2.sign() != Ordering::Greater {
        return Err(GadgetError::NoIntersection);
    }
    let beta = root(&beta2)?;
    Ok(p.add(&u.scale(&alpha)).add(&u.perp().scale(&beta)))
}

fn affine(a: &TPoint, b: &TPoint, t: &Rational) -> TPoint {
    a.scale_rational(t).add(&b.scale_rational(&(&q(1) - t)))
}

/// Division of `AB` in ratio `t : 1-t`, with the radius chosen as the
/// simplest admissible rational.
pub fn build_division(a: &TPoint, b: &TPoint, t: &Rational) -> Result<Gadget, GadgetError> {
    check_division_inputs(a, b, t)?;
    let l2 = sqdist(a, b);
    let k = (&q(1) - &(t * &q(2))).square();
    let r = if k.is_zero() {
        smallest_integer_above(&l2, true)
    } else {
        Rational::simplest_between(
            |x| x.signum() != Ordering::Greater || te(&x.square()) <= l2,
            |x| te(&(&x.square() * &k)) >= l2,
        )
    };
    division_with_radius(a, b, t, &r)
}

/// As [`build_division`] with an explicit radius, which must satisfy
/// `|AB| < r` and `r |1 - 2t| < |AB|`.
pub fn build_division_with_radius(a: &TPoint, b: &TPoint, t: &Rational, r: &Rational) -> Result<Gadget, GadgetError> {
    check_division_inputs(a, b, t)?;
    let l2 = sqdist(a, b);
    let k = (&q(1) - &(t * &q(2))).square();
    if r.signum() != Ordering::Greater || te(&r.square()) <= l2 || te(&(&r.square() * &k)) >= l2 {
        return Err(GadgetError::RadiusOutOfRange(r.clone()));
    }
    division_with_radius(a, b, t, r)
}

fn check_division_inputs(a: &TPoint, b: &TPoint, t: &Rational) -> Result<(), GadgetError> {
    if a == b {
        return Err(GadgetError::DegenerateSegment);
    }
    if t.signum() != Ordering::Greater || *t >= q(1) {
        return Err(GadgetError::TOutOfRange);
    }
    Ok(())
}

fn division_with_radius(a: &TPoint, b: &TPoint, t: &Rational, r: &Rational) -> Result<Gadget, GadgetError> {
    let s = &q(1) - t;
    let d = apex(a, b, &te(&(&s * r).square()), &te(&(t * r).square()))?;
    let e = affine(a, &d, t);
    let f = affine(b, &d, &s);
    let c = affine(a, b, t);
    let mut g = Builder::default();
    let na = g.place("A", a);
    let nb = g.place("B", b);
    let nc = g.place("C", &c);
    let nd = g.place("D", &d);
    let ne = g.place("E", &e);
    let nf = g.place("F", &f);
    for (p, q) in [(&na, &ne), (&ne, &nd), (&na, &nd), (&nb, &nf), (&nf, &nd), (&nb, &nd), (&ne, &nc), (&nf, &nc)] {
        g.certify(p, q)?;
    }
    g.require_distinct(&nc, &nd)?;
    g.require_distinct(&ne, &nf)?;
    let goal = Relation::AffineComb { c: nc.clone(), a: na.clone(), b: nb.clone(), t: t.clone() };
    Ok(g.finish(
        vec![goal],
        Construction::Division { a: na, b: nb, c: nc, d: nd, e: ne, f: nf, t: t.clone(), r: r.clone() },
    ))
}

/// Transports `B - A = D - C` along rhombi of side `|AC|`, which must be a
/// positive rational.
pub fn build_rhombus_chain(a: &TPoint, b: &TPoint, c: &TPoint, d: &TPoint) -> Result<Gadget, GadgetError> {
    let v = b.sub(a);
    if d.sub(c) != v {
        return Err(GadgetError::NotATranslate);
    }
    let w = c.sub(a);
    let side = w.norm_sq().as_rational().and_then(|s2| s2.sqrt()).ok_or(GadgetError::IrrationalSide)?;
    if side.is_zero() {
        return Err(GadgetError::IrrationalSide);
    }
    let steps = chain_steps(&v, &w, &side)?;
    let mut g = Builder::default();
    let mut a_chain = vec![g.place("A", a)];
    let mut c_chain = vec![g.place("C", c)];
    let mut cur = a.clone();
    let m = steps.len();
    for (i, step) in steps.iter().enumerate() {
        cur = cur.add(step);
        let (an, cn) = if i + 1 == m { ("B".to_string(), "D".to_string()) } else { (format!("A{}", i + 1), format!("C{}", i + 1)) };
        a_chain.push(g.place(&an, &cur));
        c_chain.push(g.place(&cn, &cur.add(&w)));
    }
    let na = a_chain[0].clone();
    let nc = c_chain[0].clone();
    let nb = if m == 0 { g.place("B", b) } else { a_chain[m].clone() };
    let nd = if m == 0 { g.place("D", d) } else { c_chain[m].clone() };
    for i in 0..=m {
        g.certify(&a_chain[i], &c_chain[i])?;
    }
    for i in 0..m {
        let (ai, ai1, ci, ci1) = (a_chain[i].clone(), a_chain[i + 1].clone(), c_chain[i].clone(), c_chain[i + 1].clone());
        g.certify(&ai, &ai1)?;
        g.certify(&ci, &ci1)?;
        g.require_distinct(&ai, &ci1)?;
        g.require_distinct(&ci, &ai1)?;
    }
    let goal = Relation::VecEq { a: na, b: nb, c: nc, d: nd };
    Ok(g.finish(vec![goal], Construction::RhombusChain { a_chain, c_chain, side }))
}

/// Step vectors of length `side` summing to `v`, none equal to `±w`.
fn chain_steps(v: &TPoint, w: &TPoint, side: &Rational) -> Result<Vec<TPoint>, GadgetError> {
    if v.is_zero() {
        return Ok(Vec::new());
    }
    let l2 = v.norm_sq();
    // Fewest chunks of length at most 2*side.
    let mut k = 1i64;
    while te(&(&q(2 * k) * side).square()) < l2 {
        k += 1;
    }
    let neg_w = w.neg();
    loop {
        let vc = v.scale_rational(&Rational::new(1, k));
        let lc2 = &l2 * &te(&Rational::new(1, k * k));
        let mu2 = &te(&side.square()).div(&lc2)? - &te(&Rational::new(1, 4));
        let mu = root(&mu2)?;
        let half = vc.scale_rational(&Rational::new(1, 2));
        let n = vc.perp().scale(&mu);
        let plus = half.add(&n);
        let minus = half.sub(&n);
        if [&plus, &minus].iter().all(|s| **s != *w && **s != neg_w) {
            let mut steps = Vec::with_capacity(2 * k as usize);
            for j in 0..k {
                if j % 2 == 0 {
                    steps.push(plus.clone());
                    steps.push(minus.clone());
                } else {
                    steps.push(minus.clone());
                    steps.push(plus.clone());
                }
            }
            return Ok(steps);
        }
        k += 1;
    }
}

/// Transports `B - A = D - C` for arbitrary `|AC|` through an auxiliary
/// segment `EF` at integer distance from both.
pub fn build_translation_bridge(a: &TPoint, b: &TPoint, c: &TPoint, d: &TPoint) -> Result<Gadget, GadgetError> {
    let v = b.sub(a);
    if d.sub(c) != v {
        return Err(GadgetError::NotATranslate);
    }
    let mut g = Builder::default();
    let na = g.place("A", a);
    let nb = g.place("B", b);
    let nc = g.place("C", c);
    let nd = g.place("D", d);
    let goal = vec![Relation::VecEq { a: na.clone(), b: nb.clone(), c: nc.clone(), d: nd.clone() }];
    if a == c {
        let construction =
            Construction::Bridge { a: na.clone(), b: nb.clone(), c: nc, d: nd, e: na, f: nb };
        return Ok(g.finish(goal, construction));
    }
    let l2 = sqdist(a, c);
    let qq = smallest_integer_above(&l2, false);
    let q2 = te(&qq.square());
    let e = apex(a, c, &q2, &q2)?;
    let f = e.add(&v);
    let ne = g.place("E", &e);
    let nf = g.place("F", &f);
    g.absorb(&build_rhombus_chain(a, b, &e, &f)?, "ab_")?;
    g.absorb(&build_rhombus_chain(&e, &f, c, d)?, "cd_")?;
    Ok(g.finish(goal, Construction::Bridge { a: na, b: nb, c: nc, d: nd, e: ne, f: nf }))
}

/// `D - C = r (B - A)` realized as a division followed by a translation.
pub fn build_scale(a: &TPoint, b: &TPoint, c: &TPoint, d: &TPoint, r: &Rational) -> Result<Gadget, GadgetError> {
    let v = b.sub(a);
    if d.sub(c) != v.scale_rational(r) {
        return Err(GadgetError::NotAScalarMultiple);
    }
    let gp = a.add(&v.scale_rational(r));
    let mut g = Builder::default();
    let na = g.place("A", a);
    let nb = g.place("B", b);
    let nc = g.place("C", c);
    let nd = g.place("D", d);
    let ng = g.place("G", &gp);
    let one = q(1);
    if !v.is_zero() && !r.is_zero() && *r != one {
        let div = if r.signum() == Ordering::Less {
            build_division(&gp, b, &(&one / &(&one - r)))?
        } else if *r < one {
            build_division(a, b, &(&one - r))?
        } else {
            build_division(a, &gp, &(&one - &(&one / r)))?
        };
        g.absorb(&div, "div_")?;
    }
    if a != c {
        g.absorb(&build_translation_bridge(a, &gp, c, d)?, "tr_")?;
    }
    let goal = Relation::VecScale { a: nc.clone(), b: nd.clone(), c: na.clone(), d: nb.clone(), r: r.clone() };
    Ok(g.finish(vec![goal], Construction::Scale { a: na, b: nb, c: nc, d: nd, g: ng, r: r.clone() }))
}

/// Coordinates `A..F` of the straight-line linkage at parameter `t`, in the
/// frame `A = 0`, `B = (4, 0)`. Works over any field, including `K(eps)`.
pub fn kempe_coordinates<S: Field>(t: &S) -> Result<[Point<S>; 6], ScalarError> {
    let one = S::one();
    let two = S::from_int(2);
    let tt = t.square();
    let den = one.add(&tt);
    let cos = one.sub(&tt).div(&den)?;
    let sin = two.mul(t).div(&den)?;
    let a = Point::<S>::origin();
    let b = Point::new(S::from_int(4), S::zero());
    let f = Point::new(S::from_int(3), S::zero());
    let c = b.add(&Point::new(cos, sin).scale(&two));
    let d = reflect(&b, &a, &c)?;
    let e = reflect(&b, &f, &c)?;
    Ok([a, b, c, d, e, f])
}

/// Mirror image of `p` in the line through `o` and `u`.
fn reflect<S: Field>(p: &Point<S>, o: &Point<S>, u: &Point<S>) -> Result<Point<S>, ScalarError> {
    let dir = u.sub(o);
    let rel = p.sub(o);
    let k = rel.dot(&dir).div(&dir.norm_sq())?;
    Ok(o.add(&dir.scale(&k.add(&k))).sub(&rel))
}

/// The six-point linkage forcing `DE ⊥ AB`, at parameter `t`.
pub fn build_kempe(t: &Rational) -> Result<Gadget, GadgetError> {
    let origin = rational_point(q(0), q(0));
    let e1 = rational_point(q(1), q(0));
    let e2 = rational_point(q(0), q(1));
    kempe_in_frame(&te(t), &origin, &e1, &e2)
}

/// The linkage placed at `origin` with orthonormal axes `e1`, `e2`.
fn kempe_in_frame(t: &TowerElem, origin: &TPoint, e1: &TPoint, e2: &TPoint) -> Result<Gadget, GadgetError> {
    if t.is_zero() {
        return Err(GadgetError::DegenerateLinkage);
    }
    let local = kempe_coordinates(t)?;
    if local[3] == local[1] || local[4] == local[1] {
        return Err(GadgetError::DegenerateLinkage);
    }
    let world = |p: &TPoint| origin.add(&e1.scale(&p.x)).add(&e2.scale(&p.y));
    let mut g = Builder::default();
    let names: Vec<String> =
        ["A", "B", "C", "D", "E", "F"].iter().zip(&local).map(|(n, p)| g.place(n, &world(p))).collect();
    let [a, b, c, d, e, f] = [0, 1, 2, 3, 4, 5].map(|i| names[i].clone());
    for (p, q) in [(&a, &b), (&a, &d), (&c, &b), (&c, &d), (&c, &e), (&a, &f), (&f, &b), (&f, &e)] {
        g.certify(p, q)?;
    }
    g.require_distinct(&b, &d)?;
    g.require_distinct(&b, &e)?;
    g.require_distinct(&c, &f)?;
    let goal = Relation::DotZero { a: d.clone(), b: e.clone(), c: a.clone(), d: b.clone() };
    Ok(g.finish_with(
        vec![goal],
        |extra| Construction::Kempe { a, b, c, d, e, f, t: extra.into_iter().next().unwrap() },
        vec![t.clone()],
    ))
}

/// Largest tower depth the linkage parameter may need.
pub const MAX_PARAMETER_DEPTH: usize = 3;

/// Transfers perpendicularity from a linkage to `PQ ⊥ XY`; `|XY|` must be
/// rational.
pub fn build_perp_transfer(p: &TPoint, qp: &TPoint, x: &TPoint, y: &TPoint) -> Result<Gadget, GadgetError> {
    if p == qp || x == y {
        return Err(GadgetError::DegenerateSegment);
    }
    let pq = qp.sub(p);
    let xy = y.sub(x);
    if !pq.dot(&xy).is_zero() {
        return Err(GadgetError::NotPerpendicular);
    }
    let len = xy.norm_sq().as_rational().and_then(|l2| l2.sqrt()).ok_or(GadgetError::IrrationalSide)?;
    let e1 = xy.scale_rational(&len.inv()?);
    let lambda = pq.dot(&e1.perp());
    // Orient the second axis so the ratio PQ : DE comes out positive.
    let e2 = if lambda.sign() == Ordering::Greater { e1.perp().neg() } else { e1.perp() };
    let abs_lambda = lambda.abs();
    // With rational |PQ| the parameter t = 1 already gives a rational ratio;
    // with irrational |PQ| no rational t can, so solve |DE(t)| = |PQ|/n.
    let t = match abs_lambda.as_rational() {
        Some(_) => te(&q(1)),
        None => {
            let n = smallest_integer_above(&(&abs_lambda.square() * &te(&Rational::new(1, 16))), true);
            let l = abs_lambda.div(&te(&n))?;
            let disc = &te(&q(144)) - &(&l.square() * &te(&q(9)));
            let t = (&te(&q(12)) - &root(&disc)?).div(&l)?;
            if Tower::minimize(core::slice::from_ref(&t)).0.depth() > MAX_PARAMETER_DEPTH {
                return Err(GadgetError::UnreachableRatio);
            }
            t
        }
    };
    let kempe = kempe_in_frame(&t, x, &e1, &e2)?;
    let at = |n: &str| kempe.point(n).unwrap().clone();
    let Construction::Kempe { a: ka, b: kb, d: kd, e: ke, .. } = &kempe.construction else { unreachable!() };
    let (ka, kb, kd, ke) = (at(ka), at(kb), at(kd), at(ke));
    let de = ke.sub(&kd);
    let r = pq.dot(&de).div(&de.norm_sq())?.as_rational().ok_or(GadgetError::UnreachableRatio)?;
    if de.scale_rational(&r) != pq {
        return Err(GadgetError::UnreachableRatio);
    }
    let s = &len / &q(4);
    let mut g = Builder::default();
    let np = g.place("P", p);
    let nq = g.place("Q", qp);
    let nx = g.place("X", x);
    let ny = g.place("Y", y);
    g.absorb(&kempe, "k")?;
    g.absorb(&build_scale(&kd, &ke, p, qp, &r)?, "pq_")?;
    g.absorb(&build_scale(&ka, &kb, x, y, &s)?, "xy_")?;
    let goal = Relation::DotZero { a: np.clone(), b: nq.clone(), c: nx.clone(), d: ny.clone() };
    Ok(g.finish(vec![goal], Construction::PerpTransfer { p: np, q: nq, x: nx, y: ny, r, s }))
}

/// Parallel segments certified through a common unit normal `XY`.
pub fn build_parallel(a: &TPoint, b: &TPoint, c: &TPoint, d: &TPoint) -> Result<Gadget, GadgetError> {
    let u = b.sub(a);
    let w = d.sub(c);
    if !u.cross(&w).is_zero() {
        return Err(GadgetError::NotParallel);
    }
    let x = rational_point(q(0), q(0));
    let dir = if !u.is_zero() { &u } else { &w };
    let y = if dir.is_zero() {
        rational_point(q(0), q(1))
    } else {
        let len = root(&dir.norm_sq())?;
        dir.perp().scale(&len.inv()?)
    };
    let mut g = Builder::default();
    let na = g.place("A", a);
    let nb = g.place("B", b);
    let nc = g.place("C", c);
    let nd = g.place("D", d);
    let nx = g.place("X", &x);
    let ny = g.place("Y", &y);
    g.certify(&nx, &ny)?;
    if !u.is_zero() {
        g.absorb(&build_perp_transfer(a, b, &x, &y)?, "ab_")?;
    }
    if !w.is_zero() {
        g.absorb(&build_perp_transfer(c, d, &x, &y)?, "cd_")?;
    }
    let goal = vec![
        Relation::DotZero { a: na.clone(), b: nb.clone(), c: nx.clone(), d: ny.clone() },
        Relation::DotZero { a: nc.clone(), b: nd.clone(), c: nx.clone(), d: ny.clone() },
    ];
    Ok(g.finish(goal, Construction::Parallel { a: na, b: nb, c: nc, d: nd, x: nx, y: ny }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BidistanceMode {
    DistinctDistances,
    EqualDistances,
}

/// A point `W` at rational distances `q1 = |P1 W|`, `q2 = |P2 W|` from two
/// distinct points.
pub fn find_rational_bidistance_point(
    p1: &TPoint,
    p2: &TPoint,
    mode: BidistanceMode,
) -> Result<(TPoint, Rational, Rational), GadgetError> {
    if p1 == p2 {
        return Err(GadgetError::CoincidentInputs);
    }
    let l2 = sqdist(p1, p2);
    let (q1, q2) = match mode {
        BidistanceMode::EqualDistances => {
            let k = smallest_integer_above(&(&l2 * &te(&Rational::new(1, 4))), true);
            (k.clone(), k)
        }
        BidistanceMode::DistinctDistances => {
            // 0 < q1 - q2 < |P1P2| < q1 + q2.
            let delta = Rational::simplest_between(|x| x.signum() != Ordering::Greater, |x| te(&x.square()) >= l2);
            let mut q2 = q(1);
            while te(&(&(&q2 * &q(2)) + &delta).square()) <= l2 {
                q2 = &q2 + &q(1);
            }
            (&q2 + &delta, q2)
        }
    };
    let w = apex(p1, p2, &te(&q1.square()), &te(&q2.square()))?;
    Ok((w, q1, q2))
}

/// Rational point convenience for callers and tests.
pub fn point(x: Rational, y: Rational) -> TPoint {
    rational_point(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::FunElem;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pt(x: &str, y: &str) -> TPoint {
        point(r(x), r(y))
    }

    fn sqrt_of(n: i64) -> TowerElem {
        root(&te(&q(n))).unwrap()
    }

    fn cert(g: &Gadget, p: &str, q: &str) -> Rational {
        g.certified(p, q).cloned().unwrap_or_else(|| panic!("no entry {p}{q}"))
    }

    #[test]
    fn division_unit_segment_half() {
        let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap();
        g.verify().unwrap();
        let Construction::Division { r: radius, .. } = &g.construction else { panic!() };
        assert_eq!(*radius, q(2));
        let s3 = sqrt_of(3);
        let half = te(&r("1/2"));
        let quarter = te(&r("1/4"));
        assert_eq!(g.point("D").unwrap(), &Point::new(half.clone(), &half * &s3));
        assert_eq!(g.point("E").unwrap(), &Point::new(quarter.clone(), &quarter * &s3));
        assert_eq!(g.point("F").unwrap(), &Point::new(te(&r("3/4")), &quarter * &s3));
        assert_eq!(g.point("C").unwrap(), &pt("1/2", "0"));
        for (p, q, v) in [
            ("A", "E", "1/4"),
            ("E", "D", "1/4"),
            ("A", "D", "1"),
            ("E", "C", "1/4"),
            ("F", "C", "1/4"),
            ("F", "D", "1/4"),
            ("B", "F", "1/4"),
            ("B", "D", "1"),
        ] {
            assert_eq!(cert(&g, p, q), r(v), "{p}{q}");
        }
        assert_eq!(g.certificate.len(), 8);
        assert_eq!(g.tower.depth(), 1);
    }

    #[test]
    fn division_irrational_base() {
        let b = Point::new(sqrt_of(2), te(&q(0)));
        let g = build_division(&pt("0", "0"), &b, &r("1/2")).unwrap();
        g.verify().unwrap();
        let Construction::Division { r: radius, .. } = &g.construction else { panic!() };
        assert_eq!(*radius, q(2));
        // Any rational radius above |AB| is accepted.
        build_division_with_radius(&pt("0", "0"), &b, &r("1/2"), &r("3/2")).unwrap().verify().unwrap();
        assert!(matches!(
            build_division_with_radius(&pt("0", "0"), &b, &r("1/2"), &r("7/5")),
            Err(GadgetError::RadiusOutOfRange(_))
        ));
    }

    #[test]
    fn division_radius_window() {
        // |AB| = 2, t = 1/3: r in (2, 6) -> 3.
        let g = build_division(&pt("0", "0"), &pt("2", "0"), &r("1/3")).unwrap();
        g.verify().unwrap();
        let Construction::Division { r: radius, .. } = &g.construction else { panic!() };
        assert_eq!(*radius, q(3));
        assert_eq!(cert(&g, "A", "D"), r("4"));
        assert_eq!(cert(&g, "B", "D"), r("1"));
    }

    #[test]
    fn division_errors() {
        assert_eq!(build_division(&pt("1", "1"), &pt("1", "1"), &r("1/2")), Err(GadgetError::DegenerateSegment));
        assert_eq!(build_division(&pt("0", "0"), &pt("1", "0"), &r("1")), Err(GadgetError::TOutOfRange));
        assert_eq!(build_division(&pt("0", "0"), &pt("1", "0"), &r("-1/2")), Err(GadgetError::TOutOfRange));
    }

    #[test]
    fn rhombus_chain_cases() {
        let g = build_rhombus_chain(&pt("0", "0"), &pt("0", "0"), &pt("1", "0"), &pt("1", "0")).unwrap();
        g.verify().unwrap();
        let Construction::RhombusChain { a_chain, .. } = &g.construction else { panic!() };
        assert_eq!(a_chain.len(), 1);

        let g = build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &pt("0", "1"), &pt("1", "1")).unwrap();
        g.verify().unwrap();
        let Construction::RhombusChain { a_chain, c_chain, side } = &g.construction else { panic!() };
        assert_eq!(a_chain.len(), 3);
        assert_eq!(*side, q(1));
        assert!(g.certificate.iter().all(|c| c.d2 == q(1)));
        assert_eq!(g.certificate.len(), 7);
        let h = te(&r("1/2")) * sqrt_of(3);
        assert_eq!(g.point(&a_chain[1]).unwrap(), &Point::new(te(&r("1/2")), h));
        assert_eq!(g.point(&c_chain[2]).unwrap(), &pt("1", "1"));

        let g = build_rhombus_chain(&pt("0", "0"), &pt("5", "0"), &pt("0", "1"), &pt("5", "1")).unwrap();
        g.verify().unwrap();
        let Construction::RhombusChain { a_chain, .. } = &g.construction else { panic!() };
        assert_eq!(a_chain.len(), 7);

        assert_eq!(
            build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &pt("0", "1"), &pt("2", "1")),
            Err(GadgetError::NotATranslate)
        );
        assert_eq!(
            build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &pt("1", "1"), &pt("2", "1")),
            Err(GadgetError::IrrationalSide)
        );
    }

    #[test]
    fn rhombus_chain_avoids_side_collisions() {
        // v = (1, 0), w = (1/2, sqrt(3)/2): the first split would step by w.
        let s3h = te(&r("1/2")) * sqrt_of(3);
        let c = Point::new(te(&r("1/2")), s3h.clone());
        let d = Point::new(te(&r("3/2")), s3h);
        let g = build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &c, &d).unwrap();
        g.verify().unwrap();
        let Construction::RhombusChain { a_chain, .. } = &g.construction else { panic!() };
        assert!(a_chain.len() > 3);
    }

    #[test]
    fn bridge_examples() {
        let s2 = sqrt_of(2);
        let c = Point::new(s2.clone(), s2.clone());
        let d = Point::new(&s2 + &te(&q(1)), s2);
        let g = build_translation_bridge(&pt("0", "0"), &pt("1", "0"), &c, &d).unwrap();
        g.verify().unwrap();
        assert_eq!(g.parts.len(), 2);
        assert_eq!(cert(&g, "A", "E"), q(4));
        assert_eq!(cert(&g, "E", "C"), q(4));

        let g = build_translation_bridge(&pt("0", "0"), &pt("1", "0"), &pt("0", "0"), &pt("1", "0")).unwrap();
        g.verify().unwrap();
        assert!(g.parts.is_empty());
    }

    #[test]
    fn scale_cases() {
        let (a, b) = (pt("0", "0"), pt("1", "0"));
        for (rr, c, d) in [
            ("1/2", pt("5", "5"), pt("11/2", "5")),
            ("1", pt("2", "3"), pt("3", "3")),
            ("-1", pt("0", "1"), pt("-1", "1")),
            ("3", pt("0", "0"), pt("3", "0")),
            ("0", pt("1", "2"), pt("1", "2")),
        ] {
            let g = build_scale(&a, &b, &c, &d, &r(rr)).unwrap();
            g.verify().unwrap();
        }
        assert_eq!(
            build_scale(&a, &b, &pt("0", "0"), &pt("2", "0"), &r("1/2")),
            Err(GadgetError::NotAScalarMultiple)
        );
    }

    #[test]
    fn kempe_unit_parameter() {
        let g = build_kempe(&q(1)).unwrap();
        g.verify().unwrap();
        assert_eq!(g.point("C").unwrap(), &pt("4", "2"));
        assert_eq!(g.point("D").unwrap(), &pt("12/5", "16/5"));
        assert_eq!(g.point("E").unwrap(), &pt("12/5", "4/5"));
        assert_eq!(g.certificate.len(), 8);
        assert_eq!(cert(&g, "A", "B"), q(16));
        assert_eq!(cert(&g, "F", "E"), q(1));
        assert_eq!(build_kempe(&q(0)), Err(GadgetError::DegenerateLinkage));
    }

    #[test]
    fn kempe_symbolic_alignment() {
        let pts = kempe_coordinates(&FunElem::epsilon()).unwrap();
        assert_eq!(pts[3].x, pts[4].x);
        let ab = pts[1].sub(&pts[0]);
        assert!(pts[4].sub(&pts[3]).dot(&ab).is_zero());
    }

    #[test]
    fn perp_transfer_examples() {
        let g = build_perp_transfer(&pt("0", "0"), &pt("0", "12/5"), &pt("0", "0"), &pt("4", "0")).unwrap();
        g.verify().unwrap();
        let Construction::PerpTransfer { r: ratio, s, .. } = &g.construction else { panic!() };
        assert_eq!((ratio.clone(), s.clone()), (q(1), q(1)));

        let g = build_perp_transfer(&pt("0", "0"), &pt("0", "24/5"), &pt("0", "0"), &pt("8", "0")).unwrap();
        g.verify().unwrap();
        let Construction::PerpTransfer { r: ratio, s, .. } = &g.construction else { panic!() };
        assert_eq!((ratio.clone(), s.clone()), (q(2), q(2)));

        assert_eq!(
            build_perp_transfer(&pt("0", "0"), &pt("1", "1"), &pt("0", "0"), &pt("1", "0")),
            Err(GadgetError::NotPerpendicular)
        );
    }

    #[test]
    fn perp_transfer_irrational_length() {
        let q2 = Point::new(te(&q(0)), sqrt_of(2));
        let g = build_perp_transfer(&pt("0", "0"), &q2, &pt("0", "0"), &pt("1", "0")).unwrap();
        g.verify().unwrap();
    }

    #[test]
    fn parallel_examples() {
        let g = build_parallel(&pt("0", "0"), &pt("1", "0"), &pt("2", "0"), &pt("5", "0")).unwrap();
        g.verify().unwrap();
        assert_eq!(g.point("Y").unwrap(), &pt("0", "1"));
        assert_eq!(g.parts.len(), 2);
        let g = build_parallel(&pt("0", "0"), &pt("0", "0"), &pt("2", "0"), &pt("5", "0")).unwrap();
        assert_eq!(g.parts.len(), 1);
        assert_eq!(
            build_parallel(&pt("0", "0"), &pt("1", "0"), &pt("0", "0"), &pt("0", "1")),
            Err(GadgetError::NotParallel)
        );
    }

    #[test]
    fn bidistance_points() {
        let (w, q1, q2) =
            find_rational_bidistance_point(&pt("0", "0"), &pt("1", "0"), BidistanceMode::EqualDistances).unwrap();
        assert_eq!((q1, q2), (q(1), q(1)));
        assert_eq!(w, Point::new(te(&r("1/2")), te(&r("1/2")) * sqrt_of(3)));

        let p2 = Point::new(sqrt_of(2), te(&q(0)));
        let (w, q1, q2) =
            find_rational_bidistance_point(&pt("0", "0"), &p2, BidistanceMode::DistinctDistances).unwrap();
        assert_eq!((q1.clone(), q2.clone()), (q(2), q(1)));
        assert_eq!(sqdist(&w, &pt("0", "0")), te(&q1.square()));
        assert_eq!(sqdist(&w, &p2), te(&q2.square()));

        assert_eq!(
            find_rational_bidistance_point(&pt("0", "0"), &pt("0", "0"), BidistanceMode::EqualDistances),
            Err(GadgetError::CoincidentInputs)
        );
    }

    #[test]
    fn tampering_is_detected() {
        let mut g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap();
        g.certificate[0].d2 = r("1/3");
        assert!(matches!(g.verify(), Err(GadgetError::InconsistentCertificate(..))));
    }
}
