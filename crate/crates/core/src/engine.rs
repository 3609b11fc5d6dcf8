//! Image-space facts about an arbitrary unit-distance preserving map and the
//! rules that derive them from a gadget's certificate.
//!
//! A [`Derivation`] never mentions image coordinates: facts name domain points
//! and say what must hold between their images. [`check_derivation`] evaluates
//! a derivation against a concrete map.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cm::{prop3_verify, prop4_verify, sqdist, Point};
use crate::gadgets::{
    build_parallel, build_scale, find_rational_bidistance_point, BidistanceMode, Construction, Gadget,
    GadgetError, TPoint,
};
use crate::poly::identities::{kempe_relations, verify_kempe_identities, KempeIdentityCertificate};
use crate::relations::{combination_matches, solve_combination, LinearForm, Relation};
use crate::scalars::{Field, Rational, Scalar, ScalarError, TowerElem};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    /// `phi(f(p), f(q)) = v`.
    SqDistKnown { p: String, q: String, v: Rational },
    /// `f(p) != f(q)`.
    Distinct { p: String, q: String },
    /// `phi(f(p), f(q)) != 0`.
    NonzeroDist { p: String, q: String },
    Rel(Relation),
}

fn ordered(p: &str, q: &str) -> (String, String) {
    if p <= q {
        (p.to_string(), q.to_string())
    } else {
        (q.to_string(), p.to_string())
    }
}

impl Fact {
    pub fn sq_dist(p: &str, q: &str, v: Rational) -> Fact {
        let (p, q) = ordered(p, q);
        Fact::SqDistKnown { p, q, v }
    }

    pub fn distinct(p: &str, q: &str) -> Fact {
        let (p, q) = ordered(p, q);
        Fact::Distinct { p, q }
    }

    pub fn nonzero(p: &str, q: &str) -> Fact {
        let (p, q) = ordered(p, q);
        Fact::NonzeroDist { p, q }
    }

    pub fn relation(&self) -> Option<&Relation> {
        match self {
            Fact::Rel(r) => Some(r),
            _ => None,
        }
    }

    pub fn points(&self) -> Vec<&str> {
        match self {
            Fact::SqDistKnown { p, q, .. } | Fact::Distinct { p, q } | Fact::NonzeroDist { p, q } => {
                vec![p.as_str(), q.as_str()]
            }
            Fact::Rel(r) => r.points(),
        }
    }

    /// Evaluates the fact at concrete images; `Err(name)` if a point is
    /// missing from the lookup.
    pub fn holds<S: Field>(&self, at: &impl Fn(&str) -> Option<Point<S>>) -> Result<bool, String> {
        let get = |n: &str| at(n).ok_or_else(|| n.to_string());
        match self {
            Fact::SqDistKnown { p, q, v } => Ok(sqdist(&get(p)?, &get(q)?) == S::from_rational(v)),
            Fact::Distinct { p, q } => Ok(get(p)? != get(q)?),
            Fact::NonzeroDist { p, q } => Ok(!sqdist(&get(p)?, &get(q)?).is_zero()),
            Fact::Rel(r) => r.holds(at),
        }
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::SqDistKnown { p, q, v } => write!(f, "SqDistKnown({p},{q}; {v})"),
            Fact::Distinct { p, q } => write!(f, "Distinct({p},{q})"),
            Fact::NonzeroDist { p, q } => write!(f, "NonzeroDist({p},{q})"),
            Fact::Rel(r) => write!(f, "{r:?}"),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    RationalDistanceAxiom,
    Injectivity,
    NonzeroDistance,
    Prop3,
    Prop4,
    VecAlgebra,
    KempeChain,
    Composition,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::RationalDistanceAxiom,
        Rule::Injectivity,
        Rule::NonzeroDistance,
        Rule::Prop3,
        Rule::Prop4,
        Rule::VecAlgebra,
        Rule::KempeChain,
        Rule::Composition,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Rule::RationalDistanceAxiom => "RationalDistanceAxiom",
            Rule::Injectivity => "Injectivity",
            Rule::NonzeroDistance => "NonzeroDistance",
            Rule::Prop3 => "Prop3",
            Rule::Prop4 => "Prop4",
            Rule::VecAlgebra => "VecAlgebra",
            Rule::KempeChain => "KempeChain",
            Rule::Composition => "Composition",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.tag() == tag)
    }
}

/// A point at rational distances from both points of a distinctness fact.
/// Documentation only; the rules do not consult it.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub w: TPoint,
    pub q1: Rational,
    pub q2: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Justification {
    pub rule: Rule,
    /// Indices of earlier steps.
    pub premises: Vec<usize>,
    /// `[a, b]` for the ratio rule; one multiplier per premise for linear
    /// combinations; empty otherwise.
    pub coefficients: Vec<Rational>,
    /// The relation chain behind a linkage step.
    pub relations: Vec<String>,
    pub witness: Option<Witness>,
}

impl Justification {
    pub fn new(rule: Rule, premises: Vec<usize>) -> Self {
        Justification { rule, premises, coefficients: Vec::new(), relations: Vec::new(), witness: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub fact: Fact,
    pub justification: Justification,
}

/// A justified fact list about one gadget. The last `gadget.goal.len()`
/// facts are the goal relations, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub gadget: Gadget,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn conclusions(&self) -> &[Step] {
        &self.steps[self.steps.len() - self.gadget.goal.len().min(self.steps.len())..]
    }

    /// Steps derived by rules other than the axioms.
    pub fn derived_steps(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| {
            !matches!(s.justification.rule, Rule::RationalDistanceAxiom | Rule::Injectivity | Rule::NonzeroDistance)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("certificate entry {0}{1} does not match the coordinates")]
    InconsistentCertificate(String, String),
    #[error("premises do not match the rule: {0}")]
    PatternMismatch(String),
    #[error("no rational decomposition of the squared distances {0}")]
    NonRationalPattern(String),
    #[error("replay failed: {0}")]
    ReplayFailed(String),
    #[error("linkage rule used without verified determinant identities")]
    SoundnessCertificateMissing,
    #[error("step {0} is not justified: {1}")]
    Unjustified(usize, String),
    #[error("map is undefined at point {0}")]
    ModelUndefinedAtPoint(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn replay_failed(what: impl fmt::Display) -> EngineError {
    EngineError::ReplayFailed(what.to_string())
}

/// Facts about one gadget, each with its justification. Structurally equal
/// facts are stored once, with the first justification.
pub struct FactStore<'g> {
    gadget: &'g Gadget,
    steps: Vec<Step>,
    index: BTreeMap<Fact, usize>,
    sqdists: BTreeMap<(String, String), (usize, Rational)>,
}

/// Seeds a store with the certificate and the distinctness axioms for every
/// pair of distinct domain points.
pub fn assert_certificate(g: &Gadget) -> Result<FactStore<'_>, EngineError> {
    let mut store = FactStore { gadget: g, steps: Vec::new(), index: BTreeMap::new(), sqdists: BTreeMap::new() };
    for c in &g.certificate {
        let (p, q) = match (g.point(&c.p), g.point(&c.q)) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(EngineError::InconsistentCertificate(c.p.clone(), c.q.clone())),
        };
        if sqdist(p, q) != TowerElem::from_rational(c.d2.clone()) {
            return Err(EngineError::InconsistentCertificate(c.p.clone(), c.q.clone()));
        }
        store.add(Fact::sq_dist(&c.p, &c.q, c.d2.clone()), Justification::new(Rule::RationalDistanceAxiom, vec![]));
    }
    for (i, p) in g.points.iter().enumerate() {
        for q in &g.points[i + 1..] {
            if p.at == q.at {
                return Err(EngineError::Gadget(GadgetError::DuplicatePoint(q.name.clone())));
            }
            store.add(Fact::distinct(&p.name, &q.name), Justification::new(Rule::Injectivity, vec![]));
            store.add(Fact::nonzero(&p.name, &q.name), Justification::new(Rule::NonzeroDistance, vec![]));
        }
    }
    Ok(store)
}

/// Signed rational square roots `(a, b)` with `a^2 = d_zx`, `b^2 = d_xxt`,
/// `(a + b)^2 = d_zxt`, `a + b != 0`.
pub fn ratio_decomposition(d_zx: &Rational, d_xxt: &Rational, d_zxt: &Rational) -> Result<(Rational, Rational), EngineError> {
    let pattern = || format!("{d_zx}, {d_xxt}, {d_zxt}");
    let (Some(a), Some(b)) = (d_zx.sqrt(), d_xxt.sqrt()) else {
        return Err(EngineError::NonRationalPattern(pattern()));
    };
    for b in [b.clone(), -&b] {
        let sum = &a + &b;
        if !sum.is_zero() && sum.square() == *d_zxt {
            return Ok((a, b));
        }
    }
    Err(EngineError::PatternMismatch(format!("no a, b with a + b != 0 fit {}", pattern())))
}

impl<'g> FactStore<'g> {
    pub fn gadget(&self) -> &'g Gadget {
        self.gadget
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn find(&self, fact: &Fact) -> Option<usize> {
        self.index.get(fact).copied()
    }

    fn add(&mut self, fact: Fact, justification: Justification) -> usize {
        if let Some(&i) = self.index.get(&fact) {
            return i;
        }
        let i = self.steps.len();
        if let Fact::SqDistKnown { p, q, v } = &fact {
            self.sqdists.entry((p.clone(), q.clone())).or_insert((i, v.clone()));
        }
        self.index.insert(fact.clone(), i);
        self.steps.push(Step { fact, justification });
        i
    }

    fn require(&self, fact: &Fact) -> Result<usize, EngineError> {
        self.find(fact).ok_or_else(|| replay_failed(format!("missing premise {fact}")))
    }

    fn known_sqdist(&self, p: &str, q: &str) -> Result<(usize, Rational), EngineError> {
        self.sqdists
            .get(&ordered(p, q))
            .cloned()
            .ok_or_else(|| replay_failed(format!("no known squared distance {p}{q}")))
    }

    fn domain(&self, name: &str) -> Result<&'g TPoint, EngineError> {
        self.gadget.point(name).ok_or_else(|| replay_failed(format!("unknown point {name}")))
    }

    /// Ratio rule: from `phi(z,x) = a^2`, `phi(x,x~) = b^2`,
    /// `phi(z,x~) = (a+b)^2` derive `VecScale(z,x; z,x~; a/(a+b))`.
    pub fn prop3(&mut self, z: &str, x: &str, xt: &str) -> Result<usize, EngineError> {
        let (i1, d1) = self.known_sqdist(z, x)?;
        let (i2, d2) = self.known_sqdist(x, xt)?;
        let (i3, d3) = self.known_sqdist(z, xt)?;
        let (a, b) = ratio_decomposition(&d1, &d2, &d3)?;
        let ratio = &a / &(&a + &b);
        // The same lemma on the domain coordinates.
        let shadow = prop3_verify(
            self.domain(z)?,
            self.domain(x)?,
            self.domain(xt)?,
            &TowerElem::from_rational(a.clone()),
            &TowerElem::from_rational(b.clone()),
        )
        .map_err(|e| replay_failed(format!("domain check of ratio rule at {z},{x},{xt}: {e}")))?;
        if shadow.ratio != TowerElem::from_rational(ratio.clone()) {
            return Err(replay_failed("domain ratio disagrees"));
        }
        let fact = Fact::Rel(Relation::VecScale {
            a: z.to_string(),
            b: x.to_string(),
            c: z.to_string(),
            d: xt.to_string(),
            r: ratio,
        });
        let mut j = Justification::new(Rule::Prop3, vec![i1, i2, i3]);
        j.coefficients = vec![a, b];
        Ok(self.add(fact, j))
    }

    /// Rhombus rule: `C`, `D` equidistant from `E` and `F`, with
    /// `phi(f(E), f(F)) != 0` and `f(C) != f(D)`, give `f(C) - f(E) = f(F) - f(D)`
    /// and `f(C) - f(F) = f(E) - f(D)`.
    pub fn prop4(&mut self, e: &str, f: &str, c: &str, d: &str) -> Result<[usize; 2], EngineError> {
        let sides = [(e, c), (f, c), (e, d), (f, d)];
        let mut premises = Vec::with_capacity(6);
        let mut value = None;
        for (p, q) in sides {
            let (i, v) = self.known_sqdist(p, q)?;
            match &value {
                None => value = Some(v),
                Some(w) if *w != v => {
                    return Err(EngineError::PatternMismatch(format!("unequal sides around {e},{f},{c},{d}")))
                }
                _ => {}
            }
            premises.push(i);
        }
        premises.push(self.require(&Fact::nonzero(e, f))?);
        premises.push(self.require(&Fact::distinct(c, d))?);
        prop4_verify(self.domain(e)?, self.domain(f)?, self.domain(c)?, self.domain(d)?)
            .map_err(|err| replay_failed(format!("domain check of rhombus rule at {e},{f},{c},{d}: {err}")))?;
        let s = |x: &str| x.to_string();
        let first = Fact::Rel(Relation::VecEq { a: s(e), b: s(c), c: s(d), d: s(f) });
        let second = Fact::Rel(Relation::VecEq { a: s(f), b: s(c), c: s(d), d: s(e) });
        let i = self.add(first, Justification::new(Rule::Prop4, premises.clone()));
        let k = self.add(second, Justification::new(Rule::Prop4, premises));
        Ok([i, k])
    }

    /// Derives a linear relation as a rational combination of earlier linear
    /// facts.
    pub fn combine(&mut self, rule: Rule, premises: &[usize], target: Relation) -> Result<usize, EngineError> {
        let forms = self.linear_forms(premises)?;
        let target_form =
            target.linear_form().ok_or_else(|| EngineError::PatternMismatch("target is not linear".to_string()))?;
        let k = solve_combination(&forms, &target_form)
            .ok_or_else(|| EngineError::PatternMismatch(format!("{target:?} is not a combination of the premises")))?;
        let mut j = Justification::new(rule, premises.to_vec());
        j.coefficients = k;
        Ok(self.add(Fact::Rel(target), j))
    }

    fn linear_forms(&self, premises: &[usize]) -> Result<Vec<LinearForm>, EngineError> {
        premises
            .iter()
            .map(|&i| {
                self.steps
                    .get(i)
                    .and_then(|s| s.fact.relation())
                    .and_then(Relation::linear_form)
                    .ok_or_else(|| EngineError::PatternMismatch(format!("premise {i} is not a linear relation")))
            })
            .collect()
    }

    /// Linkage rule: the eight certified distances and three nonzero
    /// distances force `DotZero(D,E; A,B)`.
    pub fn kempe(
        &mut self,
        identities: Option<&KempeIdentityCertificate>,
        names: [&str; 6],
    ) -> Result<usize, EngineError> {
        if identities.is_none() {
            return Err(EngineError::SoundnessCertificateMissing);
        }
        let [a, b, c, d, e, f] = names;
        let mut premises = Vec::with_capacity(11);
        for (p, q, v) in kempe_pattern(names) {
            let fact = Fact::sq_dist(p, q, Rational::integer(v));
            premises.push(self.require(&fact)?);
        }
        for (p, q) in [(b, d), (b, e), (c, f)] {
            premises.push(self.require(&Fact::nonzero(p, q))?);
        }
        let s = |x: &str| x.to_string();
        let fact = Fact::Rel(Relation::DotZero { a: s(d), b: s(e), c: s(a), d: s(b) });
        let mut j = Justification::new(Rule::KempeChain, premises);
        j.relations = kempe_relations().iter().map(|(n, _)| n.to_string()).collect();
        Ok(self.add(fact, j))
    }

    /// From `DotZero(a,b; c,d)`, `VecScale(p,q; a,b; r)` and
    /// `VecScale(x,y; c,d; s)` derive `DotZero(p,q; x,y)`.
    pub fn transfer_dot(&mut self, dot: usize, left: usize, right: usize) -> Result<usize, EngineError> {
        let fact = dot_transfer_conclusion(&self.steps, dot, left, right)?;
        Ok(self.add(Fact::Rel(fact), Justification::new(Rule::Composition, vec![dot, left, right])))
    }

    /// `DotZero` with a zero vector on one side.
    pub fn trivial_dot(&mut self, rel: Relation) -> Result<usize, EngineError> {
        if !trivially_zero_dot(&rel) {
            return Err(EngineError::PatternMismatch(format!("{rel:?} is not trivial")));
        }
        Ok(self.add(Fact::Rel(rel), Justification::new(Rule::Composition, vec![])))
    }

    /// One bounded round of forward chaining with the ratio and rhombus rules
    /// over all certified triples and quadruples. Returns the number of new
    /// facts.
    pub fn saturate(&mut self, depth: usize) -> usize {
        let start = self.steps.len();
        let names: Vec<String> = self.gadget.points.iter().map(|p| p.name.clone()).collect();
        for _ in 0..depth.min(4) {
            let before = self.steps.len();
            for z in &names {
                for x in &names {
                    for xt in &names {
                        if z != x && x != xt && z != xt {
                            let _ = self.prop3(z, x, xt);
                        }
                    }
                }
            }
            for (i, e) in names.iter().enumerate() {
                for f in &names[i + 1..] {
                    for (k, c) in names.iter().enumerate() {
                        for d in &names[k + 1..] {
                            if ![e, f].contains(&c) && ![e, f].contains(&d) {
                                let _ = self.prop4(e, f, c, d);
                            }
                        }
                    }
                }
            }
            if self.steps.len() == before {
                break;
            }
        }
        self.steps.len() - start
    }

    /// Keeps the facts the goal depends on, with the goal facts last.
    fn into_derivation(self, extra_roots: &[usize], witnesses: bool) -> Result<Derivation, EngineError> {
        let goal: Vec<usize> = self
            .gadget
            .goal
            .iter()
            .map(|g| self.require(&Fact::Rel(g.clone())))
            .collect::<Result<_, _>>()?;
        let mut keep = BTreeSet::new();
        let mut stack: Vec<usize> = goal.iter().chain(extra_roots).copied().collect();
        while let Some(i) = stack.pop() {
            if keep.insert(i) {
                stack.extend(self.steps[i].justification.premises.iter().copied());
            }
        }
        let order: Vec<usize> =
            keep.iter().copied().filter(|i| !goal.contains(i)).chain(goal.iter().copied()).collect();
        let mut new_index = BTreeMap::new();
        let mut steps = Vec::with_capacity(order.len());
        for (pos, &old) in order.iter().enumerate() {
            let mut step = self.steps[old].clone();
            for p in step.justification.premises.iter_mut() {
                *p = *new_index.get(p).ok_or_else(|| replay_failed("goal facts depend on each other"))?;
            }
            if witnesses {
                step.justification.witness = self.witness_for(&step.fact)?;
            }
            new_index.insert(old, pos);
            steps.push(step);
        }
        Ok(Derivation { gadget: self.gadget.clone(), steps })
    }

    fn witness_for(&self, fact: &Fact) -> Result<Option<Witness>, EngineError> {
        let (p, q, mode) = match fact {
            Fact::Distinct { p, q } => (p, q, BidistanceMode::DistinctDistances),
            Fact::NonzeroDist { p, q } => (p, q, BidistanceMode::EqualDistances),
            _ => return Ok(None),
        };
        let (w, q1, q2) = find_rational_bidistance_point(self.domain(p)?, self.domain(q)?, mode)?;
        Ok(Some(Witness { w, q1, q2 }))
    }
}

fn kempe_pattern(names: [&str; 6]) -> [(&str, &str, i64); 8] {
    let [a, b, c, d, e, f] = names;
    [(a, b, 16), (a, d, 16), (c, b, 4), (c, d, 4), (c, e, 4), (a, f, 9), (f, b, 1), (f, e, 1)]
}

fn trivially_zero_dot(rel: &Relation) -> bool {
    matches!(rel, Relation::DotZero { a, b, c, d } if a == b || c == d)
}

fn dot_transfer_conclusion(steps: &[Step], dot: usize, left: usize, right: usize) -> Result<Relation, EngineError> {
    let get = |i: usize| steps.get(i).and_then(|s| s.fact.relation());
    let mismatch = || EngineError::PatternMismatch("dot-product transfer".to_string());
    let Some(Relation::DotZero { a, b, c, d }) = get(dot) else { return Err(mismatch()) };
    let Some(Relation::VecScale { a: p, b: q, c: la, d: lb, .. }) = get(left) else { return Err(mismatch()) };
    let Some(Relation::VecScale { a: x, b: y, c: rc, d: rd, .. }) = get(right) else { return Err(mismatch()) };
    if (la, lb) != (a, b) || (rc, rd) != (c, d) {
        return Err(mismatch());
    }
    Ok(Relation::DotZero { a: p.clone(), b: q.clone(), c: x.clone(), d: y.clone() })
}

/// Deduction driver: runs the proof script matching a gadget's construction.
#[derive(Clone)]
pub struct Engine {
    identities: Option<KempeIdentityCertificate>,
    witnesses: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    /// Expands the linkage determinant identities; the linkage rule is
    /// available only if all four hold.
    pub fn new() -> Self {
        Engine { identities: verify_kempe_identities().ok(), witnesses: false }
    }

    /// An engine whose linkage rule is disabled.
    pub fn without_identities() -> Self {
        Engine { identities: None, witnesses: false }
    }

    /// Attach bidistance witnesses to the distinctness axioms kept in each
    /// derivation.
    pub fn with_witnesses(mut self) -> Self {
        self.witnesses = true;
        self
    }

    pub fn identities(&self) -> Option<&KempeIdentityCertificate> {
        self.identities.as_ref()
    }

    /// Dispatches on the gadget's construction.
    pub fn replay(&self, g: &Gadget) -> Result<Derivation, EngineError> {
        let mut store = assert_certificate(g)?;
        let mut extra = Vec::new();
        self.derive(&mut store, g)?;
        if let Construction::Parallel { x, y, .. } = &g.construction {
            extra.push(store.known_sqdist(x, y)?.0);
        }
        store.into_derivation(&extra, self.witnesses)
    }

    pub fn replay_division(&self, g: &Gadget) -> Result<Derivation, EngineError> {
        self.replay_kind(g, &["division"])
    }

    pub fn replay_translation(&self, g: &Gadget) -> Result<Derivation, EngineError> {
        self.replay_kind(g, &["rhombus-chain", "bridge"])
    }

    pub fn replay_perp(&self, g: &Gadget) -> Result<Derivation, EngineError> {
        self.replay_kind(g, &["kempe", "perp"])
    }

    /// `VecScale(C,D; A,B; r)` for domain points with `D - C = r (B - A)`.
    pub fn replay_scale(
        &self,
        a: &TPoint,
        b: &TPoint,
        c: &TPoint,
        d: &TPoint,
        r: &Rational,
    ) -> Result<Derivation, EngineError> {
        self.replay(&build_scale(a, b, c, d, r)?)
    }

    /// Both segments perpendicular to a common unit segment `XY`.
    pub fn replay_parallel(&self, a: &TPoint, b: &TPoint, c: &TPoint, d: &TPoint) -> Result<Derivation, EngineError> {
        self.replay(&build_parallel(a, b, c, d)?)
    }

    fn replay_kind(&self, g: &Gadget, kinds: &[&str]) -> Result<Derivation, EngineError> {
        let kind = g.construction.kind();
        if !kinds.contains(&kind) {
            return Err(replay_failed(format!("expected a {} gadget, got {kind}", kinds.join(" or "))));
        }
        self.replay(g)
    }

    /// Derives the goal facts of `g` (a gadget or one of its parts) inside
    /// `store` and returns their indices.
    fn derive(&self, store: &mut FactStore<'_>, g: &Gadget) -> Result<Vec<usize>, EngineError> {
        let s = |x: &str| x.to_string();
        let out = match &g.construction {
            Construction::Division { a, b, c, d, e, f, t, .. } => {
                let one = Rational::one();
                let p1 = store.prop3(a, e, d)?;
                let p2 = store.prop3(b, f, d)?;
                let [p3, p4] = store.prop4(e, f, c, d)?;
                let df = Relation::VecScale { a: s(d), b: s(f), c: s(d), d: s(b), r: &one - t };
                let p5 = store.combine(Rule::VecAlgebra, &[p2], df)?;
                vec![store.combine(Rule::VecAlgebra, &[p1, p3, p4, p5], g.goal[0].clone())?]
            }
            Construction::RhombusChain { a_chain, c_chain, .. } => {
                let mut links = Vec::new();
                for i in 0..a_chain.len() - 1 {
                    let [first, _] = store.prop4(&a_chain[i], &c_chain[i + 1], &c_chain[i], &a_chain[i + 1])?;
                    links.push(first);
                }
                vec![store.combine(Rule::Composition, &links, g.goal[0].clone())?]
            }
            Construction::Bridge { .. } | Construction::Scale { .. } => {
                let mut subs = Vec::new();
                for part in &g.parts {
                    subs.extend(self.derive(store, part)?);
                }
                vec![store.combine(Rule::Composition, &subs, g.goal[0].clone())?]
            }
            Construction::Kempe { a, b, c, d, e, f, .. } => {
                vec![store.kempe(self.identities.as_ref(), [a, b, c, d, e, f])?]
            }
            Construction::PerpTransfer { .. } => {
                let [kempe, left, right] = &g.parts[..] else {
                    return Err(replay_failed("perpendicularity transfer needs three parts"));
                };
                let dot = self.derive(store, kempe)?[0];
                let l = self.derive(store, left)?[0];
                let r = self.derive(store, right)?[0];
                vec![store.transfer_dot(dot, l, r)?]
            }
            Construction::Parallel { .. } => {
                let mut concl = Vec::new();
                let mut parts = g.parts.iter();
                for goal in &g.goal {
                    if trivially_zero_dot(goal) {
                        concl.push(store.trivial_dot(goal.clone())?);
                    } else {
                        let part = parts.next().ok_or_else(|| replay_failed("missing perpendicularity part"))?;
                        concl.push(self.derive(store, part)?[0]);
                    }
                }
                concl
            }
        };
        for (i, goal) in out.iter().zip(&g.goal) {
            if store.steps[*i].fact != Fact::Rel(goal.clone()) {
                return Err(replay_failed(format!("derived {} instead of {goal:?}", store.steps[*i].fact)));
            }
        }
        Ok(out)
    }
}

/// Re-checks every justification of a derivation from its gadget alone.
pub fn verify_justifications(d: &Derivation, identities: Option<&KempeIdentityCertificate>) -> Result<(), EngineError> {
    let g = &d.gadget;
    let bad = |i: usize, why: &str| EngineError::Unjustified(i, why.to_string());
    for (i, step) in d.steps.iter().enumerate() {
        let j = &step.justification;
        if j.premises.iter().any(|&p| p >= i) {
            return Err(bad(i, "premise does not precede the step"));
        }
        let premise = |k: usize| &d.steps[j.premises[k]].fact;
        let pt = |n: &str| g.point(n).ok_or_else(|| bad(i, "unknown point"));
        match (j.rule, &step.fact) {
            (Rule::RationalDistanceAxiom, Fact::SqDistKnown { p, q, v }) => {
                if g.certified(p, q) != Some(v) || !j.premises.is_empty() {
                    return Err(bad(i, "not a certificate entry"));
                }
            }
            (Rule::Injectivity, Fact::Distinct { p, q }) | (Rule::NonzeroDistance, Fact::NonzeroDist { p, q }) => {
                if pt(p)? == pt(q)? || !j.premises.is_empty() {
                    return Err(bad(i, "points coincide in the domain"));
                }
            }
            (Rule::Prop3, Fact::Rel(Relation::VecScale { a: z, b: x, c: z2, d: xt, r })) => {
                let [a, b] = &j.coefficients[..] else { return Err(bad(i, "missing a, b")) };
                if z != z2 || j.premises.len() != 3 {
                    return Err(bad(i, "malformed ratio step"));
                }
                let sum = a + b;
                let expect = [
                    Fact::sq_dist(z, x, a.square()),
                    Fact::sq_dist(x, xt, b.square()),
                    Fact::sq_dist(z, xt, sum.square()),
                ];
                if sum.is_zero() || (0..3).any(|k| *premise(k) != expect[k]) || *r != a / &sum {
                    return Err(bad(i, "ratio pattern mismatch"));
                }
            }
            (Rule::Prop4, Fact::Rel(Relation::VecEq { a: e, b: c, c: d, d: f })) => {
                if j.premises.len() != 6 {
                    return Err(bad(i, "malformed rhombus step"));
                }
                // Either conclusion shape: (E,C; D,F) or (F,C; D,E).
                let ok = |e: &str, f: &str| {
                    let Fact::SqDistKnown { v, .. } = premise(0) else { return false };
                    let sides = [(e, c.as_str()), (f, c.as_str()), (e, d.as_str()), (f, d.as_str())];
                    (0..4).all(|k| *premise(k) == Fact::sq_dist(sides[k].0, sides[k].1, v.clone()))
                        && *premise(4) == Fact::nonzero(e, f)
                        && *premise(5) == Fact::distinct(c, d)
                };
                if !ok(e, f) && !ok(f, e) {
                    return Err(bad(i, "rhombus pattern mismatch"));
                }
            }
            (Rule::VecAlgebra | Rule::Composition, Fact::Rel(rel)) => {
                if let Some(target) = rel.linear_form() {
                    let forms: Option<Vec<LinearForm>> = j
                        .premises
                        .iter()
                        .map(|&p| d.steps[p].fact.relation().and_then(Relation::linear_form))
                        .collect();
                    let forms = forms.ok_or_else(|| bad(i, "non-linear premise"))?;
                    if !combination_matches(&forms, &j.coefficients, &target) {
                        return Err(bad(i, "combination does not reproduce the conclusion"));
                    }
                } else if j.premises.is_empty() {
                    if !trivially_zero_dot(rel) {
                        return Err(bad(i, "unsupported trivial step"));
                    }
                } else {
                    let [dot, l, r] = j.premises[..] else { return Err(bad(i, "malformed transfer")) };
                    if dot_transfer_conclusion(&d.steps, dot, l, r)? != *rel {
                        return Err(bad(i, "transfer pattern mismatch"));
                    }
                }
            }
            (Rule::KempeChain, Fact::Rel(Relation::DotZero { a: d_, b: e, c: a, d: b })) => {
                if identities.is_none() {
                    return Err(EngineError::SoundnessCertificateMissing);
                }
                if j.premises.len() != 11 {
                    return Err(bad(i, "malformed linkage step"));
                }
                let Fact::SqDistKnown { p, q, .. } = premise(5) else { return Err(bad(i, "linkage premises")) };
                // F is the partner of A in the |AF| = 3 entry.
                let f = if p == a { q } else { p };
                let Fact::SqDistKnown { p, q, .. } = premise(2) else { return Err(bad(i, "linkage premises")) };
                let c = if p == b { q } else { p };
                let names = [a.as_str(), b.as_str(), c.as_str(), d_.as_str(), e.as_str(), f.as_str()];
                let expect = kempe_pattern(names);
                let nonzero = [(b, d_), (b, e), (c, f)];
                if (0..8).any(|k| *premise(k) != Fact::sq_dist(expect[k].0, expect[k].1, Rational::integer(expect[k].2)))
                    || (0..3).any(|k| *premise(8 + k) != Fact::nonzero(nonzero[k].0, nonzero[k].1))
                {
                    return Err(bad(i, "linkage pattern mismatch"));
                }
            }
            _ => return Err(bad(i, "rule does not produce this kind of fact")),
        }
    }
    let concl = d.conclusions();
    if concl.len() != g.goal.len() || concl.iter().zip(&g.goal).any(|(s, goal)| s.fact != Fact::Rel(goal.clone())) {
        return Err(EngineError::Unjustified(d.steps.len(), "derivation does not end in the goal".to_string()));
    }
    Ok(())
}

/// A concrete map on domain points.
pub trait PointMap {
    fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ScalarError>;

    /// Images of several points under one consistent map.
    fn apply_all(&self, ps: &[&TPoint]) -> Result<Vec<Point<Scalar>>, ScalarError> {
        ps.iter().map(|p| self.apply(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    AllTrue,
    Violated { index: usize, fact: Fact },
}

impl Verdict {
    pub fn is_all_true(&self) -> bool {
        *self == Verdict::AllTrue
    }
}

/// Evaluates every fact at the map's images, in order.
pub fn check_derivation(d: &Derivation, m: &impl PointMap) -> Result<Verdict, EngineError> {
    let pts: Vec<&TPoint> = d.gadget.points.iter().map(|np| &np.at).collect();
    let images: BTreeMap<&str, Point<Scalar>> = match m.apply_all(&pts) {
        Ok(imgs) => d.gadget.points.iter().map(|np| np.name.as_str()).zip(imgs).collect(),
        Err(_) => {
            // Name the first point the map is undefined at.
            let bad = d.gadget.points.iter().find(|np| m.apply(&np.at).is_err()).unwrap_or(&d.gadget.points[0]);
            return Err(EngineError::ModelUndefinedAtPoint(bad.name.clone()));
        }
    };
    let at = |n: &str| images.get(n).cloned();
    for (index, step) in d.steps.iter().enumerate() {
        match step.fact.holds(&at) {
            Ok(true) => {}
            Ok(false) => return Ok(Verdict::Violated { index, fact: step.fact.clone() }),
            Err(n) => return Err(EngineError::ModelUndefinedAtPoint(n)),
        }
    }
    Ok(Verdict::AllTrue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_division, build_kempe, build_perp_transfer, build_rhombus_chain, build_translation_bridge, point};

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pt(x: &str, y: &str) -> TPoint {
        point(r(x), r(y))
    }

    struct Identity;

    impl PointMap for Identity {
        fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ScalarError> {
            Ok(p.map(|c| Scalar::from(c.clone())))
        }
    }

    struct Dilate2;

    impl PointMap for Dilate2 {
        fn apply(&self, p: &TPoint) -> Result<Point<Scalar>, ScalarError> {
            Ok(p.map(|c| Scalar::from(c * &TowerElem::from_rational(Rational::integer(2)))))
        }
    }

    fn half_division() -> Gadget {
        build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap()
    }

    #[test]
    fn seeding_counts() {
        let g = half_division();
        let store = assert_certificate(&g).unwrap();
        let sq = store.steps().iter().filter(|s| matches!(s.fact, Fact::SqDistKnown { .. })).count();
        assert_eq!(sq, 8);
        assert_eq!(store.len(), 8 + 2 * 15);
    }

    #[test]
    fn tampered_certificate() {
        let mut g = half_division();
        let i = g.certificate.iter().position(|c| c.p == "A" && c.q == "E").unwrap();
        g.certificate[i].d2 = r("1/3");
        assert!(matches!(assert_certificate(&g), Err(EngineError::InconsistentCertificate(..))));
    }

    #[test]
    fn rule_examples() {
        let g = half_division();
        let mut store = assert_certificate(&g).unwrap();
        let i = store.prop3("A", "E", "D").unwrap();
        let expect = Relation::VecScale { a: "A".into(), b: "E".into(), c: "A".into(), d: "D".into(), r: r("1/2") };
        assert_eq!(store.steps()[i].fact, Fact::Rel(expect));
        let [i, _] = store.prop4("E", "F", "C", "D").unwrap();
        let expect = Relation::VecEq { a: "E".into(), b: "C".into(), c: "D".into(), d: "F".into() };
        assert_eq!(store.steps()[i].fact, Fact::Rel(expect));
        assert!(matches!(ratio_decomposition(&r("1"), &r("1"), &r("0")), Err(EngineError::PatternMismatch(_))));
        assert!(matches!(ratio_decomposition(&r("2"), &r("1"), &r("9")), Err(EngineError::NonRationalPattern(_))));
    }

    #[test]
    fn division_replay() {
        let engine = Engine::new();
        let d = engine.replay_division(&half_division()).unwrap();
        assert_eq!(d.derived_steps().count(), 6);
        verify_justifications(&d, engine.identities()).unwrap();
        assert!(check_derivation(&d, &Identity).unwrap().is_all_true());
        match check_derivation(&d, &Dilate2).unwrap() {
            Verdict::Violated { index, fact } => {
                assert_eq!(index, 0);
                assert!(matches!(fact, Fact::SqDistKnown { .. }));
            }
            v => panic!("{v:?}"),
        }
        let g = build_division(&pt("0", "0"), &pt("2", "0"), &r("1/3")).unwrap();
        let d = engine.replay_division(&g).unwrap();
        let last = &d.steps.last().unwrap().fact;
        assert_eq!(*last, Fact::Rel(Relation::AffineComb { c: "C".into(), a: "A".into(), b: "B".into(), t: r("1/3") }));
    }

    #[test]
    fn wrong_kind_is_refused() {
        let g = build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &pt("0", "1"), &pt("1", "1")).unwrap();
        assert!(matches!(Engine::new().replay_division(&g), Err(EngineError::ReplayFailed(_))));
    }

    #[test]
    fn translation_replays() {
        let engine = Engine::new();
        let g = build_rhombus_chain(&pt("0", "0"), &pt("1", "0"), &pt("0", "1"), &pt("1", "1")).unwrap();
        let d = engine.replay_translation(&g).unwrap();
        let prop4 = d.derived_steps().filter(|s| s.justification.rule == Rule::Prop4).count();
        let comp = d.derived_steps().filter(|s| s.justification.rule == Rule::Composition).count();
        assert_eq!((prop4, comp), (2, 1));
        verify_justifications(&d, engine.identities()).unwrap();

        let g = build_rhombus_chain(&pt("0", "0"), &pt("0", "0"), &pt("1", "0"), &pt("1", "0")).unwrap();
        let d = engine.replay_translation(&g).unwrap();
        assert_eq!(d.derived_steps().count(), 1);
        verify_justifications(&d, engine.identities()).unwrap();

        let g = build_translation_bridge(&pt("0", "0"), &pt("1", "0"), &pt("3", "1"), &pt("4", "1")).unwrap();
        let d = engine.replay_translation(&g).unwrap();
        verify_justifications(&d, engine.identities()).unwrap();
        assert!(check_derivation(&d, &Identity).unwrap().is_all_true());
    }

    #[test]
    fn scale_replays() {
        let engine = Engine::new();
        for (rr, c, dd) in [("1/2", ("5", "5"), ("11/2", "5")), ("-1", ("0", "1"), ("-1", "1")), ("1", ("2", "2"), ("3", "2"))] {
            let d = engine.replay_scale(&pt("0", "0"), &pt("1", "0"), &pt(c.0, c.1), &pt(dd.0, dd.1), &r(rr)).unwrap();
            verify_justifications(&d, engine.identities()).unwrap();
            assert!(check_derivation(&d, &Identity).unwrap().is_all_true());
        }
    }

    #[test]
    fn perp_replays() {
        let engine = Engine::new();
        let d = engine.replay_perp(&build_kempe(&Rational::one()).unwrap()).unwrap();
        verify_justifications(&d, engine.identities()).unwrap();
        let g = build_perp_transfer(&pt("0", "0"), &pt("0", "24/5"), &pt("0", "0"), &pt("8", "0")).unwrap();
        let d = engine.replay_perp(&g).unwrap();
        verify_justifications(&d, engine.identities()).unwrap();
        assert!(check_derivation(&d, &Identity).unwrap().is_all_true());
        let last = &d.steps.last().unwrap().fact;
        assert_eq!(*last, Fact::Rel(g.goal[0].clone()));
    }

    #[test]
    fn linkage_rule_is_gated() {
        let g = build_kempe(&Rational::one()).unwrap();
        assert_eq!(Engine::without_identities().replay_perp(&g), Err(EngineError::SoundnessCertificateMissing));
        let mut g = g;
        g.certificate.retain(|c| !(c.p == "F" && c.q == "E"));
        assert!(matches!(Engine::new().replay_perp(&g), Err(EngineError::ReplayFailed(_))));
    }

    #[test]
    fn parallel_replays() {
        let engine = Engine::new();
        let d = engine.replay_parallel(&pt("0", "0"), &pt("1", "0"), &pt("2", "0"), &pt("5", "0")).unwrap();
        verify_justifications(&d, engine.identities()).unwrap();
        assert_eq!(d.conclusions().len(), 2);
        let Construction::Parallel { x, y, .. } = &d.gadget.construction else { panic!() };
        assert!(d.steps.iter().any(|s| s.fact == Fact::sq_dist(x, y, Rational::one())));
        let d = engine.replay_parallel(&pt("0", "0"), &pt("0", "0"), &pt("2", "0"), &pt("5", "0")).unwrap();
        verify_justifications(&d, engine.identities()).unwrap();
        assert!(matches!(
            engine.replay_parallel(&pt("0", "0"), &pt("1", "0"), &pt("0", "0"), &pt("0", "1")),
            Err(EngineError::Gadget(GadgetError::NotParallel))
        ));
    }

    #[test]
    fn tampered_derivation_is_rejected() {
        let engine = Engine::new();
        let mut d = engine.replay_division(&half_division()).unwrap();
        let last = d.steps.len() - 1;
        d.steps[last].justification.coefficients[0] = r("2");
        assert!(matches!(verify_justifications(&d, engine.identities()), Err(EngineError::Unjustified(..))));
    }

    #[test]
    fn saturation_finds_division_facts() {
        let g = half_division();
        let mut store = assert_certificate(&g).unwrap();
        let new = store.saturate(2);
        assert!(new > 0);
        let target = Fact::Rel(Relation::VecScale { a: "A".into(), b: "E".into(), c: "A".into(), d: "D".into(), r: r("1/2") });
        assert!(store.find(&target).is_some());
    }

    #[test]
    fn witnesses_attach_to_distinctness() {
        let d = Engine::new().with_witnesses().replay_division(&half_division()).unwrap();
        let with = d.steps.iter().filter(|s| s.justification.witness.is_some()).count();
        let distinct = d.steps.iter().filter(|s| matches!(s.fact, Fact::Distinct { .. } | Fact::NonzeroDist { .. })).count();
        assert_eq!(with, distinct);
        assert!(distinct > 0);
    }
}
