//! Concrete unit-distance preserving maps `I ∘ (ρ, ρ)`: a field embedding ρ
//! applied coordinatewise, followed by an affine map with orthonormal columns.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cm::{sqdist, Point};
use crate::engine::PointMap;
use crate::gadgets::TPoint;
use crate::scalars::tower::{conjugation_images, merge_towers};
use crate::scalars::{Field, FunElem, Rational, Ring, Scalar, ScalarError, Tower, TowerElem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("columns are not orthonormal")]
    NotOrthogonal,
    #[error("1 + t^2 vanishes")]
    DegenerateParameter,
    #[error("point outside the embedding's domain: {0}")]
    OutOfDomain(ScalarError),
    #[error("no automorphism of the tower negates sqrt({0})")]
    NoConjugation(Rational),
    #[error("only maps with an identity embedding on the outside compose")]
    NotComposable,
}

impl From<ScalarError> for ModelError {
    fn from(e: ScalarError) -> Self {
        ModelError::OutOfDomain(e)
    }
}

/// Which square root a conjugation negates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConjugationTarget {
    /// The tower generator with this index.
    Generator(usize),
    /// `sqrt(r)`, located in whatever tower the input lives in. Where the
    /// tower does not contain it the map is the identity there.
    Radicand(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingSpec {
    Identity,
    Conjugation(ConjugationTarget),
    /// Inclusion of the tower into `K(eps)`, optionally after a conjugation.
    FunctionField(Option<ConjugationTarget>),
}

impl EmbeddingSpec {
    fn conjugation(&self) -> Option<&ConjugationTarget> {
        match self {
            EmbeddingSpec::Identity | EmbeddingSpec::FunctionField(None) => None,
            EmbeddingSpec::Conjugation(c) | EmbeddingSpec::FunctionField(Some(c)) => Some(c),
        }
    }

    /// ρ on one tower element.
    pub fn apply(&self, x: &TowerElem) -> Result<Scalar, ModelError> {
        self.resolve(x.tower())?.apply(x)
    }

    /// Fixes ρ on one tower, so that many elements can share the work.
    pub fn resolve(&self, tower: &Arc<Tower>) -> Result<ResolvedEmbedding, ModelError> {
        let images = match self.conjugation() {
            None => None,
            Some(c) => conjugation_in(tower, c)?.map(|j| conjugation_images(tower, j)).transpose()?,
        };
        Ok(ResolvedEmbedding { tower: tower.clone(), images, over_eps: matches!(self, EmbeddingSpec::FunctionField(_)) })
    }

    pub fn is_identity(&self) -> bool {
        *self == EmbeddingSpec::Identity
    }
}

/// The generator to flip, or `None` where the conjugation acts trivially.
fn conjugation_in(tower: &Arc<Tower>, target: &ConjugationTarget) -> Result<Option<usize>, ModelError> {
    match target {
        ConjugationTarget::Generator(j) => {
            if *j >= tower.depth() {
                return Err(ScalarError::BadGeneratorIndex(*j).into());
            }
            Ok(Some(*j))
        }
        ConjugationTarget::Radicand(r) => {
            let Some(root) = TowerElem::from_rational_in(tower, r.clone()).sqrt() else {
                return Ok(None);
            };
            if root.as_rational().is_some() {
                return Err(ModelError::NoConjugation(r.clone()));
            }
            for j in 0..tower.depth() {
                if let Ok(img) = root.conjugate(j) {
                    if img == -&root {
                        return Ok(Some(j));
                    }
                }
            }
            Err(ModelError::NoConjugation(r.clone()))
        }
    }
}

/// An embedding fixed on one tower: generator images into a target tower.
#[derive(Debug, Clone)]
pub struct ResolvedEmbedding {
    tower: Arc<Tower>,
    images: Option<(Arc<Tower>, Vec<TowerElem>)>,
    over_eps: bool,
}

impl ResolvedEmbedding {
    pub fn apply(&self, x: &TowerElem) -> Result<Scalar, ModelError> {
        let x = x.lift_to(&self.tower)?;
        let y = match &self.images {
            None => x,
            Some((target, images)) => x.substitute_generators(images, target),
        };
        Ok(if self.over_eps { Scalar::Fun(FunElem::constant(y)) } else { Scalar::Tower(y) })
    }
}

/// `p -> M p + b` with `M` having φ₂-orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoAffine {
    m: [[Scalar; 2]; 2],
    translation: Point<Scalar>,
}

impl OrthoAffine {
    pub fn new(m: [[Scalar; 2]; 2], translation: Point<Scalar>) -> Result<Self, ModelError> {
        let u = Point::new(m[0][0].clone(), m[1][0].clone());
        let v = Point::new(m[0][1].clone(), m[1][1].clone());
        let one = Scalar::one();
        if u.norm_sq() != one || v.norm_sq() != one || !u.dot(&v).is_zero() {
            return Err(ModelError::NotOrthogonal);
        }
        Ok(OrthoAffine { m, translation })
    }

    pub fn identity() -> Self {
        let (o, l) = (Scalar::zero(), Scalar::one());
        OrthoAffine { m: [[l.clone(), o.clone()], [o.clone(), l]], translation: Point::origin() }
    }

    pub fn matrix(&self) -> &[[Scalar; 2]; 2] {
        &self.m
    }

    pub fn translation(&self) -> &Point<Scalar> {
        &self.translation
    }

    pub fn with_translation(mut self, b: Point<Scalar>) -> Self {
        self.translation = b;
        self
    }

    pub fn apply(&self, p: &Point<Scalar>) -> Point<Scalar> {
        let m = &self.m;
        Point::new(
            m[0][0].mul(&p.x).add(&m[0][1].mul(&p.y)).add(&self.translation.x),
            m[1][0].mul(&p.x).add(&m[1][1].mul(&p.y)).add(&self.translation.y),
        )
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &OrthoAffine) -> OrthoAffine {
        let (a, b) = (&self.m, &inner.m);
        let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
        OrthoAffine { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]], translation: self.apply(&inner.translation) }
    }
}

fn pythagorean(t: &Scalar) -> Result<(Scalar, Scalar), ModelError> {
    let one = Scalar::one();
    let den = one.add(&t.square());
    if den.is_zero() {
        return Err(ModelError::DegenerateParameter);
    }
    let a = one.sub(&t.square()).div(&den).map_err(|_| ModelError::DegenerateParameter)?;
    let b = t.add(t).div(&den).map_err(|_| ModelError::DegenerateParameter)?;
    Ok((a, b))
}

/// `[[a, -b], [b, a]]` with `a = (1-t²)/(1+t²)`, `b = 2t/(1+t²)`.
pub fn make_pythagorean_rotation(t: &Scalar) -> Result<OrthoAffine, ModelError> {
    let (a, b) = pythagorean(t)?;
    OrthoAffine::new([[a.clone(), b.neg()], [b, a]], Point::origin())
}

/// `[[a, b], [b, -a]]`, the determinant `-1` family.
pub fn make_pythagorean_reflection(t: &Scalar) -> Result<OrthoAffine, ModelError> {
    let (a, b) = pythagorean(t)?;
    OrthoAffine::new([[a.clone(), b.clone()], [b, a.neg()]], Point::origin())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMap {
    pub embedding: EmbeddingSpec,
    pub frame: OrthoAffine,
}

impl ModelMap {
    pub fn new(embedding: EmbeddingSpec, frame: OrthoAffine) -> Self {
        ModelMap { embedding, frame }
    }

    pub fn identity() -> Self {
        ModelMap::new(EmbeddingSpec::Identity, OrthoAffine::identity())
    }

    /// `I((ρ(x), ρ(y)))`.
    pub fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ModelError> {
        // Generator indices refer to the point's tower, so both coordinates
        // have to live in it.
        self.apply_all(&[p]).map(|mut v| v.remove(0))
    }

    /// Applies the map to points sharing one embedding of their common tower.
    pub fn apply_all(&self, ps: &[&TPoint]) -> Result<Vec<Point<Scalar>>, ModelError> {
        let rho = self.embedding.resolve(&common_tower(ps, &[]))?;
        self.apply_resolved(&rho, ps)
    }

    fn apply_resolved(&self, rho: &ResolvedEmbedding, ps: &[&TPoint]) -> Result<Vec<Point<Scalar>>, ModelError> {
        ps.iter().map(|p| Ok(self.frame.apply(&Point::new(rho.apply(&p.x)?, rho.apply(&p.y)?)))).collect()
    }

    pub fn rho(&self, x: &TowerElem) -> Result<Scalar, ModelError> {
        self.embedding.apply(x)
    }

    /// `outer ∘ inner`, defined when `outer` has the identity embedding.
    pub fn compose(outer: &ModelMap, inner: &ModelMap) -> Result<ModelMap, ModelError> {
        if !outer.embedding.is_identity() {
            return Err(ModelError::NotComposable);
        }
        Ok(ModelMap::new(inner.embedding.clone(), outer.frame.after(&inner.frame)))
    }
}

fn to_scalar_error(e: ModelError) -> ScalarError {
    match e {
        ModelError::OutOfDomain(s) => s,
        _ => ScalarError::OutOfTower,
    }
}

impl PointMap for ModelMap {
    fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ScalarError> {
        ModelMap::apply(self, p).map_err(to_scalar_error)
    }

    fn apply_all(&self, ps: &[&TPoint]) -> Result<Vec<Point<Scalar>>, ScalarError> {
        ModelMap::apply_all(self, ps).map_err(to_scalar_error)
    }
}

/// Uniform scaling about the origin. Not distance preserving; used as a
/// negative control.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation(pub Rational);

impl PointMap for Dilation {
    fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ScalarError> {
        let k = TowerElem::from_rational(self.0.clone());
        Ok(p.map(|c| Scalar::Tower(c * &k)))
    }
}

/// Lifts every coordinate into one common tower so that a per-tower
/// embedding acts consistently on all of them.
pub fn common_tower(points: &[&TPoint], scalars: &[&TowerElem]) -> Arc<Tower> {
    let mut t = Tower::rationals();
    for e in points.iter().flat_map(|p| [&p.x, &p.y]).chain(scalars.iter().copied()) {
        t = merge_towers(&t, e.tower()).0;
    }
    t
}

fn lift_point(p: &TPoint, t: &Arc<Tower>) -> Result<TPoint, ModelError> {
    Ok(Point::new(p.x.lift_to(t)?, p.y.lift_to(t)?))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreservationReport {
    pub checked: usize,
    pub rational_pairs: usize,
    /// Indices of pairs where `φ₂(m p, m q) != ρ(φ₂(p, q))`.
    pub failures: Vec<usize>,
}

impl PreservationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `φ₂(m(p), m(q)) = ρ(φ₂(p, q))` for each pair, and equality with the
/// rational value itself when `φ₂(p, q)` is rational.
pub fn verify_preservation(m: &ModelMap, pairs: &[(TPoint, TPoint)]) -> Result<PreservationReport, ModelError> {
    let refs: Vec<&TPoint> = pairs.iter().flat_map(|(p, q)| [p, q]).collect();
    let t = common_tower(&refs, &[]);
    let rho = m.embedding.resolve(&t)?;
    let mut report = PreservationReport::default();
    for (i, (p, q)) in pairs.iter().enumerate() {
        let (p, q) = (lift_point(p, &t)?, lift_point(q, &t)?);
        let d = sqdist(&p, &q);
        let image = m.apply_resolved(&rho, &[&p, &q])?;
        let image = sqdist(&image[0], &image[1]);
        let mut ok = image == rho.apply(&d)?;
        if let Some(r) = d.as_rational() {
            report.rational_pairs += 1;
            ok &= image == Scalar::Rat(r);
        }
        if !ok {
            report.failures.push(i);
        }
        report.checked += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructureReport {
    pub additive_pairs: usize,
    /// `(λ, θ(λ, ·))` for every sampled λ whose θ was constant across all
    /// sampled `u`.
    pub theta: Vec<(TowerElem, Scalar)>,
    pub failures: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// With `φ(u) = m(u) - m(0)`, checks additivity of φ, that `φ(λu) = θ φ(u)`
/// for a single θ across all `u` and that θ equals ρ(λ), and that ρ is
/// additive and multiplicative on the samples.
pub fn verify_structure(m: &ModelMap, lambdas: &[TowerElem], us: &[TPoint]) -> Result<StructureReport, ModelError> {
    let t = common_tower(&us.iter().collect::<Vec<_>>(), &lambdas.iter().collect::<Vec<_>>());
    let lambdas: Vec<TowerElem> = lambdas.iter().map(|l| l.lift_to(&t)).collect::<Result<_, _>>()?;
    let us: Vec<TPoint> = us.iter().map(|u| lift_point(u, &t)).collect::<Result<_, _>>()?;
    let zero = Point::new(TowerElem::from_rational_in(&t, Rational::zero()), TowerElem::from_rational_in(&t, Rational::zero()));
    let rho_t = m.embedding.resolve(&t)?;
    let apply = |u: &TPoint| m.apply_resolved(&rho_t, &[u]).map(|mut v| v.remove(0));
    let m0 = apply(&zero)?;
    let phi = |u: &TPoint| -> Result<Point<Scalar>, ModelError> { Ok(apply(u)?.sub(&m0)) };
    let mut report = StructureReport::default();

    let images: Vec<Point<Scalar>> = us.iter().map(&phi).collect::<Result<_, _>>()?;
    for i in 0..us.len() {
        for j in i..us.len() {
            let sum = phi(&us[i].add(&us[j]))?;
            if sum != images[i].add(&images[j]) {
                report.failures.push(format!("phi(u{i} + u{j}) != phi(u{i}) + phi(u{j})"));
            }
            report.additive_pairs += 1;
        }
    }

    for lam in &lambdas {
        let rho = rho_t.apply(lam)?;
        let mut theta: Option<Scalar> = None;
        let mut consistent = true;
        for (u, fu) in us.iter().zip(&images) {
            if fu.is_zero() {
                continue;
            }
            let scaled = phi(&u.scale(lam))?;
            // θ from whichever coordinate of φ(u) is nonzero.
            let this = if !fu.x.is_zero() { scaled.x.div(&fu.x) } else { scaled.y.div(&fu.y) }
                .map_err(ModelError::OutOfDomain)?;
            if scaled != fu.scale(&this) {
                report.failures.push(format!("phi(lambda u) is not a multiple of phi(u) for lambda = {lam}"));
                consistent = false;
            }
            match &theta {
                None => theta = Some(this),
                Some(prev) if *prev != this => {
                    report.failures.push(format!("theta({lam}, u) depends on u"));
                    consistent = false;
                }
                _ => {}
            }
        }
        if let Some(th) = theta {
            if th != rho {
                report.failures.push(format!("theta({lam}) != rho({lam})"));
            } else if consistent {
                report.theta.push((lam.clone(), th));
            }
        }
    }

    let one = TowerElem::from_rational_in(&t, Rational::one());
    if rho_t.apply(&one)? != Scalar::one() {
        report.failures.push(String::from("rho(1) != 1"));
    }
    for a in &lambdas {
        for b in &lambdas {
            let (ra, rb) = (rho_t.apply(a)?, rho_t.apply(b)?);
            if rho_t.apply(&(a + b))? != ra.add(&rb) {
                report.failures.push(format!("rho({a} + {b}) is not additive"));
            }
            if rho_t.apply(&(a * b))? != ra.mul(&rb) {
                report.failures.push(format!("rho({a} * {b}) is not multiplicative"));
            }
        }
    }
    Ok(report)
}

/// The models every gadget and derivation is checked against: identity,
/// two conjugations, rotations and reflections over `Q(eps)`, a conjugation
/// followed by an `eps`-rotation, and a rational rigid motion.
pub fn standard_models() -> Vec<(String, ModelMap)> {
    let eps = Scalar::Fun(FunElem::epsilon());
    let rot = make_pythagorean_rotation(&eps).expect("1 + eps^2 != 0");
    let refl = make_pythagorean_reflection(&eps).expect("1 + eps^2 != 0");
    let shift = Point::new(Scalar::Rat(Rational::new(1, 3)), Scalar::Fun(FunElem::epsilon()));
    let rigid = make_pythagorean_rotation(&Scalar::Rat(Rational::new(1, 2)))
        .expect("rational parameter")
        .with_translation(Point::new(Scalar::Rat(Rational::integer(2)), Scalar::Rat(Rational::new(-5, 7))));
    let conj = |r: i64| EmbeddingSpec::Conjugation(ConjugationTarget::Radicand(Rational::integer(r)));
    vec![
        (String::from("identity"), ModelMap::identity()),
        (String::from("conj:3"), ModelMap::new(conj(3), OrthoAffine::identity())),
        (String::from("conj:2"), ModelMap::new(conj(2), OrthoAffine::identity())),
        (String::from("eps-rotation"), ModelMap::new(EmbeddingSpec::FunctionField(None), rot.clone().with_translation(shift))),
        (String::from("eps-reflection"), ModelMap::new(EmbeddingSpec::FunctionField(None), refl)),
        (
            String::from("conj:3+eps-rotation"),
            ModelMap::new(EmbeddingSpec::FunctionField(Some(ConjugationTarget::Radicand(Rational::integer(3)))), rot),
        ),
        (String::from("rigid:1/2"), ModelMap::new(EmbeddingSpec::Identity, rigid)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_division, point};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn sqrt_of(n: i64) -> TowerElem {
        let x = TowerElem::from_rational(Rational::integer(n));
        Tower::rationals().adjoin_sqrt(&x).unwrap().1
    }

    fn rat(s: &str) -> Scalar {
        Scalar::Rat(r(s))
    }

    #[test]
    fn rotations() {
        let id = make_pythagorean_rotation(&rat("0")).unwrap();
        assert_eq!(id, OrthoAffine::identity());
        let q = make_pythagorean_rotation(&rat("1")).unwrap();
        assert_eq!(q.matrix(), &[[rat("0"), rat("-1")], [rat("1"), rat("0")]]);
        let eps = Scalar::Fun(FunElem::epsilon());
        let m = make_pythagorean_rotation(&eps).unwrap();
        let col = m.apply(&Point::new(rat("1"), rat("0")));
        let one = Scalar::one();
        let den = one.add(&eps.square());
        assert_eq!(col.x, one.sub(&eps.square()).div(&den).unwrap());
        assert_eq!(col.y, eps.add(&eps).div(&den).unwrap());
        assert_eq!(col.norm_sq(), one);
    }

    #[test]
    fn non_orthogonal_rejected() {
        let m = [[rat("2"), rat("0")], [rat("0"), rat("2")]];
        assert_eq!(OrthoAffine::new(m, Point::origin()), Err(ModelError::NotOrthogonal));
    }

    #[test]
    fn conjugation_examples() {
        let s3 = sqrt_of(3);
        let conj = ModelMap::new(
            EmbeddingSpec::Conjugation(ConjugationTarget::Radicand(q(3))),
            OrthoAffine::identity(),
        );
        let half = TowerElem::from_rational(r("1/2"));
        let p = Point::new(half.clone(), &half * &s3);
        let img = conj.apply(&p).unwrap();
        assert_eq!(img, Point::new(Scalar::Tower(half.clone()), Scalar::Tower(-(&half * &s3))));
        let by_index = ModelMap::new(EmbeddingSpec::Conjugation(ConjugationTarget::Generator(0)), OrthoAffine::identity());
        assert_eq!(by_index.apply(&p).unwrap(), img);
        let bad = ModelMap::new(EmbeddingSpec::Conjugation(ConjugationTarget::Generator(4)), OrthoAffine::identity());
        assert!(matches!(bad.apply(&p), Err(ModelError::OutOfDomain(_))));
    }

    fn q(n: i64) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn preservation_on_division_gadget() {
        let g = build_division(&point(q(0), q(0)), &point(q(1), q(0)), &r("1/2")).unwrap();
        let pairs: Vec<(TPoint, TPoint)> = g
            .certificate
            .iter()
            .map(|c| (g.point(&c.p).unwrap().clone(), g.point(&c.q).unwrap().clone()))
            .collect();
        for (name, m) in standard_models() {
            let rep = verify_preservation(&m, &pairs).unwrap();
            assert!(rep.passed(), "{name}");
            assert_eq!(rep.rational_pairs, 8);
        }
        let all: Vec<(TPoint, TPoint)> = g
            .points
            .iter()
            .flat_map(|a| g.points.iter().map(move |b| (a.at.clone(), b.at.clone())))
            .collect();
        for (name, m) in standard_models() {
            assert!(verify_preservation(&m, &all).unwrap().passed(), "{name}");
        }
    }

    #[test]
    fn theta_of_sqrt2_under_conjugation() {
        let m = ModelMap::new(EmbeddingSpec::Conjugation(ConjugationTarget::Radicand(q(2))), OrthoAffine::identity());
        let us: Vec<TPoint> = (1..=10).map(|k| point(q(k), q(3 - k))).collect();
        let s2 = sqrt_of(2);
        let rep = verify_structure(&m, &[s2.clone(), TowerElem::from_rational(r("3/5"))], &us).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.theta[0].1, Scalar::Tower(-s2));
    }

    #[test]
    fn structure_on_standard_models() {
        let s2 = sqrt_of(2);
        let s3 = sqrt_of(3);
        let us: Vec<TPoint> = (1..=10)
            .map(|k| Point::new(&s2 * &TowerElem::from_rational(q(k)), &s3 + &TowerElem::from_rational(q(k * k))))
            .collect();
        let lambdas = [s2.clone(), s3.clone(), &s2 + &s3, TowerElem::from_rational(r("-7/3"))];
        for (name, m) in standard_models() {
            let rep = verify_structure(&m, &lambdas, &us).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.failures);
            assert_eq!(rep.theta.len(), lambdas.len());
        }
    }

    #[test]
    fn composition_closure() {
        let a = make_pythagorean_rotation(&rat("1/2")).unwrap().with_translation(Point::new(rat("1"), rat("2")));
        let b = make_pythagorean_reflection(&rat("3")).unwrap();
        let ma = ModelMap::new(EmbeddingSpec::Identity, a);
        let mb = ModelMap::new(EmbeddingSpec::Identity, b);
        let c = ModelMap::compose(&ma, &mb).unwrap();
        assert!(c.embedding.is_identity());
        let m = c.frame.matrix().clone();
        assert!(OrthoAffine::new(m, c.frame.translation().clone()).is_ok());
        let p = point(r("2/3"), r("-1"));
        let direct = ma.frame.apply(&mb.apply(&p).unwrap());
        assert_eq!(c.apply(&p).unwrap(), direct);
    }
}
