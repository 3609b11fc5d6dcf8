//! The acceptance criteria as one deterministic, seeded run.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigidity_forge_core::cm::{affinely_dependent3, cm3, cm4, cm4_points, sqdist};
use rigidity_forge_core::engine::{
    assert_certificate, check_derivation, verify_justifications, Derivation, Engine, EngineError, Fact, Verdict,
};
use rigidity_forge_core::gadgets::{build_division, build_kempe, build_rhombus_chain, point, Gadget, TPoint};
use rigidity_forge_core::models::{
    standard_models, verify_preservation, verify_structure, Dilation, ModelError, ModelMap, OrthoAffine,
};
use rigidity_forge_core::poly::identities::kempe_identities;
use rigidity_forge_core::relations::Relation;
use rigidity_forge_core::{Point, Rational, Ring, Scalar, Tower, TowerElem};
use serde_json::json;

use crate::cli::verify_document;
use crate::codec::{self, Document, File};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}. {}: {} ({} ms)", self.id, self.title, self.detail, self.elapsed.as_millis())
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

type Check = Result<String, String>;

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn rng_for(seed: u64, id: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-60..=60), rng.gen_range(1..=24))
}

fn random_point(rng: &mut ChaCha8Rng) -> TPoint {
    point(random_rational(rng), random_rational(rng))
}

fn r(s: &str) -> Rational {
    s.parse().expect("literal")
}

fn pt(x: &str, y: &str) -> TPoint {
    point(r(x), r(y))
}

fn identity_suite() -> Check {
    let mut shown = Vec::new();
    for id in kempe_identities() {
        ensure(id.holds(), || format!("{} does not expand to {}", id.name, id.claimed))?;
        shown.push(id.name);
    }
    Ok(format!("{} exact matches: {}", shown.len(), shown.join("; ")))
}

fn triangle_determinants(rng: &mut ChaCha8Rng) -> Check {
    let one = Rational::one();
    let eq = cm3(&one, &one, &one);
    ensure(eq == Rational::integer(-3), || format!("cm3(1,1,1) = {eq}"))?;
    let mut n = 0;
    while n < 50 {
        let (a, b) = (random_rational(rng), random_rational(rng));
        if (&a + &b).is_zero() {
            continue;
        }
        let v = cm3(&a.square(), &(&a + &b).square(), &b.square());
        ensure(v.is_zero(), || format!("cm3 at a={a}, b={b} is {v}"))?;
        n += 1;
    }
    Ok(format!("cm3(1,1,1) = {eq}; {n} degenerate triangles vanish"))
}

fn planar_quadruples(rng: &mut ChaCha8Rng) -> Check {
    for i in 0..500 {
        let p: Vec<TPoint> = (0..4).map(|_| random_point(rng)).collect();
        let v = cm4_points([&p[0], &p[1], &p[2], &p[3]]);
        ensure(v.is_zero(), || format!("set {i} gives cm4 = {v}"))?;
    }
    Ok("500 random planar 4-point sets give cm4 = 0".into())
}

/// The other common point of the circles about `o1` and `o2` that both pass
/// through `known`. The common chord is perpendicular to the line of centres,
/// so `known + s n` with `n ⊥ (o2 - o1)` meets circle `o1` again at the
/// nonzero root of `s (2 (known - o1)·n + s |n|²) = 0`.
fn second_intersection(o1: &TPoint, o2: &TPoint, known: &TPoint) -> Result<TPoint, String> {
    let n = o2.sub(o1).perp();
    let two = TowerElem::from(Rational::integer(-2));
    let s = known.sub(o1).dot(&n).mul(&two).div(&n.norm_sq()).map_err(|e| e.to_string())?;
    Ok(known.add(&n.scale(&s)))
}

fn kempe_instance() -> Check {
    let g = build_kempe(&Rational::one()).map_err(|e| e.to_string())?;
    let get = |n: &str| g.point(n).cloned().ok_or_else(|| format!("gadget has no point {n}"));
    let (a, b, c, d, e, f) = (get("A")?, get("B")?, get("C")?, get("D")?, get("E")?, get("F")?);
    // Oracle: C at angle 90 degrees on circle(B, 2), then the circle intersections.
    let c_oracle = b.add(&pt("0", "2"));
    let d_oracle = second_intersection(&a, &c_oracle, &b)?;
    let e_oracle = second_intersection(&f, &c_oracle, &b)?;
    ensure(c == c_oracle && d == d_oracle && e == e_oracle, || format!("gadget C={c:?} D={d:?} E={e:?} disagree with oracle"))?;
    ensure(c == pt("4", "2") && d == pt("12/5", "16/5") && e == pt("12/5", "4/5"), || "coordinates differ from the published values".into())?;
    let d2 = |p: &TPoint, q: &TPoint| sqdist(p, q).as_rational().ok_or_else(|| "irrational squared distance".to_string());
    let (va, vb, vc, vd, ve) = (d2(&b, &d)?, d2(&a, &c)?, d2(&b, &e)?, d2(&c, &f)?, d2(&a, &e)?);
    let expected = [r("64/5"), r("20"), r("16/5"), r("5"), r("32/5")];
    ensure([&va, &vb, &vc, &vd, &ve] == expected.each_ref(), || format!("a..e = {va}, {vb}, {vc}, {vd}, {ve}"))?;
    ensure(ve == &r("16") - &(&r("3") * &vc), || "e != 16 - 3c".into())?;
    ensure(vb == &r("4") * &vd, || "b != 4d".into())?;
    ensure(va == &r("4") * &vc, || "a != 4c".into())?;
    let quad = &(&vd.square() - &(&r("10") * &vd)) + &r("9");
    ensure(&vc * &vd == -quad, || "c d != -(d^2 - 10 d + 9)".into())?;
    let dot = d.sub(&e).dot(&b.sub(&a));
    ensure(dot.is_zero(), || format!("(D-E).(B-A) = {dot}"))?;
    Ok("C=(4,2), D=(12/5,16/5), E=(12/5,4/5); a=64/5 b=20 c=16/5 d=5 e=32/5; (D-E).(B-A)=0".into())
}

/// Every gadget and derivation the replay criterion produces.
pub struct ReplayCorpus {
    pub derivations: Vec<(String, Derivation)>,
}

fn replay_corpus() -> Result<ReplayCorpus, String> {
    let engine = Engine::new();
    let ids = engine.identities();
    let mut out = Vec::new();
    let checked = |label: &str, g: &Gadget, d: Result<Derivation, EngineError>| -> Result<Derivation, String> {
        g.verify().map_err(|e| format!("{label}: {e}"))?;
        let d = d.map_err(|e| format!("{label}: {e}"))?;
        verify_justifications(&d, ids).map_err(|e| format!("{label}: {e}"))?;
        Ok(d)
    };
    let bases = [("|AB|=1", pt("0", "0"), pt("1", "0")), ("|AB|=sqrt2", pt("0", "0"), pt("1", "1"))];
    for t in ["1/2", "1/3", "2/5", "7/9"] {
        for (base, a, b) in &bases {
            let g = build_division(a, b, &r(t)).map_err(|e| e.to_string())?;
            let label = format!("division t={t} {base}");
            let d = checked(&label, &g, engine.replay_division(&g))?;
            let ok = matches!(&d.conclusions()[0].fact, Fact::Rel(Relation::AffineComb { t: tt, .. }) if *tt == r(t));
            ensure(ok, || format!("{label} concludes {:?}", d.conclusions()[0].fact))?;
            out.push((label, d));
        }
    }
    // Side 2, so |v| = 2 * ratio.
    for (ratio, len) in [("0", "0"), ("1", "2"), ("5/2", "5"), ("5", "10")] {
        let (a, c, v) = (pt("0", "0"), pt("0", "2"), pt(len, "0"));
        let g = build_rhombus_chain(&a, &a.add(&v), &c, &c.add(&v)).map_err(|e| e.to_string())?;
        let label = format!("chain |v|/s={ratio}");
        let d = checked(&label, &g, engine.replay_translation(&g))?;
        ensure(matches!(d.conclusions()[0].fact, Fact::Rel(Relation::VecEq { .. })), || format!("{label} lacks VecEq"))?;
        out.push((label, d));
    }
    for t in ["1", "1/2", "2", "3/4"] {
        let g = build_kempe(&r(t)).map_err(|e| e.to_string())?;
        let label = format!("linkage t={t}");
        let d = checked(&label, &g, engine.replay_perp(&g))?;
        ensure(matches!(d.conclusions()[0].fact, Fact::Rel(Relation::DotZero { .. })), || format!("{label} lacks DotZero"))?;
        out.push((label, d));
    }
    Ok(ReplayCorpus { derivations: out })
}

fn soundness(corpus: &ReplayCorpus) -> Check {
    let models = standard_models();
    let mut facts = 0;
    for (label, d) in &corpus.derivations {
        let pairs: Vec<(TPoint, TPoint)> = d
            .gadget
            .certificate
            .iter()
            .map(|c| (d.gadget.point(&c.p).unwrap().clone(), d.gadget.point(&c.q).unwrap().clone()))
            .collect();
        for (name, m) in &models {
            match check_derivation(d, m).map_err(|e| format!("{label} under {name}: {e}"))? {
                Verdict::AllTrue => {}
                Verdict::Violated { index, fact } => return Err(format!("{label} under {name}: fact {index} {fact:?} fails")),
            }
            let rep = verify_preservation(m, &pairs).map_err(|e| format!("{label} under {name}: {e}"))?;
            ensure(rep.passed(), || format!("{label} under {name}: certificate pairs {:?} not preserved", rep.failures))?;
            facts += d.steps.len();
        }
    }
    Ok(format!("{} derivations x {} models, {facts} fact checks all true", corpus.derivations.len(), models.len()))
}

fn negative_controls() -> Check {
    let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).map_err(|e| e.to_string())?;
    let first = assert_certificate(&g).map_err(|e| e.to_string())?.steps()[0].fact.clone();
    let d = Engine::new().replay(&g).map_err(|e| e.to_string())?;
    match check_derivation(&d, &Dilation(Rational::integer(2))).map_err(|e| e.to_string())? {
        Verdict::Violated { index: 0, fact } if fact == first && matches!(fact, Fact::SqDistKnown { .. }) => {}
        v => return Err(format!("scale-by-2 map gave {v:?}")),
    }
    let two = Scalar::Rat(Rational::integer(2));
    let zero = Scalar::Rat(Rational::zero());
    let diag = OrthoAffine::new([[two.clone(), zero.clone()], [zero, two]], Point::origin());
    ensure(diag == Err(ModelError::NotOrthogonal), || format!("diag(2,2) gave {diag:?}"))?;
    let file = File { seed: None, document: Document::Gadget(g.clone()) };
    let encoded = codec::encode_file(&file);
    let n = g.certificate.len();
    for i in 0..n {
        let mut v = encoded.clone();
        let d2 = &g.certificate[i].d2 + &Rational::new(1, 3);
        v["gadget"]["certificate"][i]["d2"] = json!(d2.to_exact_string());
        let tampered = codec::decode_file(&v).map_err(|e| e.to_string())?;
        ensure(verify_document(&tampered).is_err(), || format!("tampered entry {i} passed verification"))?;
    }
    ensure(verify_document(&codec::decode_file(&encoded).map_err(|e| e.to_string())?).is_ok(), || "untampered file rejected".into())?;
    Ok(format!("dilation fails at fact 0 ({first:?}); diag(2,2) rejected; {n}/{n} tampered entries detected"))
}

fn oracle_agreement(rng: &mut ChaCha8Rng) -> Check {
    let mut collinear = 0;
    for i in 0..1000 {
        let (p, q) = (random_point(rng), random_point(rng));
        let x = if i < 200 {
            p.add(&q.sub(&p).scale_rational(&random_rational(rng)))
        } else {
            random_point(rng)
        };
        let oracle = q.sub(&p).cross(&x.sub(&p)).is_zero();
        collinear += oracle as usize;
        ensure(affinely_dependent3(&p, &q, &x) == oracle, || format!("triple {i} disagrees"))?;
    }
    let ids = kempe_identities();
    let dets: Vec<_> = ids.iter().map(|id| id.determinant()).collect();
    for k in 0..100 {
        let base: BTreeMap<String, Rational> =
            ["a", "b", "c", "d", "e"].iter().map(|v| (v.to_string(), random_rational(rng))).collect();
        for (id, det) in ids.iter().zip(&dets) {
            let mut env = base.clone();
            for (var, p) in &id.substitutions {
                let val = p.eval_rational(&env).ok_or("unbound variable")?;
                env.insert(var.to_string(), val);
            }
            let e = |i: usize, j: usize| id.matrix[i][j].eval_rational(&env).ok_or("unbound variable");
            let numeric = cm4(&e(1, 2)?, &e(1, 3)?, &e(1, 4)?, &e(2, 3)?, &e(2, 4)?, &e(3, 4)?);
            let symbolic = det.eval_rational(&env).ok_or("unbound variable")?;
            ensure(symbolic == numeric, || format!("{} at sample {k}: {symbolic} != {numeric}", id.name))?;
        }
    }
    Ok(format!("1000 triples agree ({collinear} collinear); 4 determinants agree with cm4 at 100 points"))
}

fn structure_checks() -> Check {
    let two = TowerElem::from(Rational::integer(2));
    let (t2, s2) = Tower::rationals().adjoin_sqrt(&two).map_err(|e| e.to_string())?;
    let (_, s3) = t2.adjoin_sqrt(&TowerElem::from(Rational::integer(3))).map_err(|e| e.to_string())?;
    let k = |n: i64| TowerElem::from(Rational::integer(n));
    let us: Vec<TPoint> = (1..=12).map(|i| Point::new(&k(i) + &s3, &(&s2 * &k(i - 6)) + &k(i * i))).collect();
    let lambdas = [s2.clone(), s3.clone(), &s2 * &s3, &s2 + &k(3), TowerElem::from(r("-5/7"))];
    let models = standard_models();
    for (name, m) in &models {
        let rep = verify_structure(m, &lambdas, &us).map_err(|e| format!("{name}: {e}"))?;
        ensure(rep.passed(), || format!("{name}: {:?}", rep.failures))?;
        ensure(rep.theta.len() == lambdas.len(), || format!("{name}: theta missing for some lambda"))?;
    }
    let conj2: &ModelMap = &models.iter().find(|(n, _)| n == "conj:2").ok_or("no sqrt2 model")?.1;
    let rep = verify_structure(conj2, std::slice::from_ref(&s2), &us).map_err(|e| e.to_string())?;
    let want = Scalar::Tower(-&s2);
    ensure(rep.theta.first().map(|(_, t)| t) == Some(&want), || format!("theta(sqrt2) = {:?}", rep.theta))?;
    Ok(format!("{} models, {} lambdas x {} u; theta(sqrt2) = -sqrt2 under sqrt2-conjugation", models.len(), lambdas.len(), us.len()))
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let (passed, detail) = match res {
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    Outcome { id, title, passed, detail, elapsed }
}

/// Runs all criteria. Independent checks run on separate threads; the
/// soundness check consumes the replay corpus.
pub fn run(seed: u64) -> Report {
    let mut outcomes = std::thread::scope(|s| {
        let handles = vec![
            s.spawn(|| vec![timed(1, "symbolic identities", identity_suite)]),
            s.spawn(move || vec![timed(2, "triangle determinants", || triangle_determinants(&mut rng_for(seed, 2)))]),
            s.spawn(move || vec![timed(3, "planar quadruples", || planar_quadruples(&mut rng_for(seed, 3)))]),
            s.spawn(|| vec![timed(4, "linkage instance t=1", kempe_instance)]),
            s.spawn(|| {
                let mut corpus = None;
                let five = timed(5, "replay suite", || {
                    let c = replay_corpus()?;
                    let n = c.derivations.len();
                    corpus = Some(c);
                    Ok(format!("{n} gadgets replayed and re-checked"))
                });
                let six = match &corpus {
                    Some(c) => timed(6, "soundness across models", || soundness(c)),
                    None => timed(6, "soundness across models", || Err("no replay corpus".into())),
                };
                vec![five, six]
            }),
            s.spawn(|| vec![timed(7, "negative controls", negative_controls)]),
            s.spawn(move || vec![timed(8, "oracle agreement", || oracle_agreement(&mut rng_for(seed, 8)))]),
            s.spawn(|| vec![timed(9, "structural checks", structure_checks)]),
        ];
        handles.into_iter().flat_map(|h| h.join().expect("criterion thread panicked")).collect::<Vec<_>>()
    });
    outcomes.sort_by_key(|o| o.id);
    Report { seed, outcomes }
}
