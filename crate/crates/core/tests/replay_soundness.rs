use proptest::prelude::*;
use rigidity_forge_core::engine::{check_derivation, verify_justifications, Derivation, Engine, Fact, Rule, Verdict};
use rigidity_forge_core::gadgets::{
    build_division, build_kempe, build_perp_transfer, build_rhombus_chain, build_translation_bridge, point, Gadget,
    TPoint,
};
use rigidity_forge_core::models::{standard_models, verify_preservation, Dilation};
use rigidity_forge_core::relations::Relation;
use rigidity_forge_core::{Point, Rational, Ring, TowerElem};

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn pt(x: &str, y: &str) -> TPoint {
    point(r(x), r(y))
}

fn certificate_pairs(g: &Gadget) -> Vec<(TPoint, TPoint)> {
    g.certificate.iter().map(|c| (g.point(&c.p).unwrap().clone(), g.point(&c.q).unwrap().clone())).collect()
}

fn sound_everywhere(d: &Derivation) {
    verify_justifications(d, Engine::new().identities()).unwrap();
    for (name, m) in standard_models() {
        assert_eq!(check_derivation(d, &m).unwrap(), Verdict::AllTrue, "{name}");
        assert!(verify_preservation(&m, &certificate_pairs(&d.gadget)).unwrap().passed(), "{name}");
    }
}

/// Second intersection of the circles about `o1` (through `known`) and `o2`
/// (through `known`): the chord through `known` is perpendicular to the
/// line of centres, and its other end solves a quadratic with root 0.
fn other_intersection(o1: &TPoint, o2: &TPoint, known: &TPoint) -> TPoint {
    let n = o2.sub(o1).perp();
    let s = known.sub(o1).dot(&n).mul(&TowerElem::from(Rational::integer(-2))).div(&n.norm_sq()).unwrap();
    known.add(&n.scale(&s))
}

#[test]
fn linkage_at_one_matches_circle_oracle() {
    let g = build_kempe(&Rational::one()).unwrap();
    let get = |n: &str| g.point(n).unwrap().clone();
    let (a, b, c, d, e, f) = (get("A"), get("B"), get("C"), get("D"), get("E"), get("F"));
    assert_eq!((a.clone(), b.clone(), f.clone()), (pt("0", "0"), pt("4", "0"), pt("3", "0")));
    assert_eq!(c, pt("4", "2"));
    // D is on circle(A, 4) and circle(C, 2), away from B; E is on circle(C, 2)
    // and circle(F, 1), away from B.
    assert_eq!(d, other_intersection(&a, &c, &b));
    assert_eq!(e, other_intersection(&f, &c, &b));
    assert_eq!(d, pt("12/5", "16/5"));
    assert_eq!(e, pt("12/5", "4/5"));

    let d2 = |p: &TPoint, q: &TPoint| rigidity_forge_core::cm::sqdist(p, q).as_rational().unwrap();
    let (va, vb, vc, vd, ve) = (d2(&b, &d), d2(&a, &c), d2(&b, &e), d2(&c, &f), d2(&a, &e));
    assert_eq!([&va, &vb, &vc, &vd, &ve], [&r("64/5"), &r("20"), &r("16/5"), &r("5"), &r("32/5")]);
    assert_eq!(ve, &r("16") - &(&r("3") * &vc));
    assert_eq!(vb, &r("4") * &vd);
    assert_eq!(va, &r("4") * &vc);
    assert_eq!(&vc * &vd, -(&(&vd.square() - &(&r("10") * &vd)) + &r("9")));
    assert!(d.sub(&e).dot(&b.sub(&a)).is_zero());
}

#[test]
fn division_replays() {
    let engine = Engine::new();
    let bases = [(pt("0", "0"), pt("1", "0")), (pt("-1", "2"), pt("3", "-1")), (pt("0", "0"), pt("1", "1")), (pt("1/2", "0"), pt("2", "3"))];
    for t in ["1/2", "1/3", "2/5", "7/9"] {
        for (a, b) in &bases {
            let g = build_division(a, b, &r(t)).unwrap();
            g.verify().unwrap();
            let d = engine.replay_division(&g).unwrap();
            let last = &d.conclusions()[0].fact;
            assert!(matches!(last, Fact::Rel(Relation::AffineComb { t: tt, .. }) if *tt == r(t)), "{last:?}");
            sound_everywhere(&d);
        }
    }
}

#[test]
fn chains_replay() {
    let engine = Engine::new();
    let a = pt("0", "0");
    let c = pt("0", "2");
    for len in ["0", "2", "5", "10"] {
        let v = pt(len, "0");
        let g = build_rhombus_chain(&a, &a.add(&v), &c, &c.add(&v)).unwrap();
        g.verify().unwrap();
        let d = engine.replay_translation(&g).unwrap();
        assert!(matches!(d.conclusions()[0].fact, Fact::Rel(Relation::VecEq { .. })));
        sound_everywhere(&d);
    }
}

#[test]
fn bridge_replays() {
    let engine = Engine::new();
    let g = build_translation_bridge(&pt("0", "0"), &pt("1", "1"), &pt("3/2", "1/3"), &pt("5/2", "4/3")).unwrap();
    g.verify().unwrap();
    let d = engine.replay_translation(&g).unwrap();
    sound_everywhere(&d);
}

#[test]
fn perpendicularity_replays() {
    let engine = Engine::new();
    for t in ["1", "1/2", "2", "3/4"] {
        let g = build_kempe(&r(t)).unwrap();
        let d = engine.replay_perp(&g).unwrap();
        assert!(matches!(d.conclusions()[0].fact, Fact::Rel(Relation::DotZero { .. })));
        assert!(d.steps.iter().any(|s| s.justification.rule == Rule::KempeChain));
        sound_everywhere(&d);
    }
    let g = build_perp_transfer(&pt("0", "0"), &pt("0", "1"), &pt("1", "0"), &pt("2", "0")).unwrap();
    let d = engine.replay_perp(&g).unwrap();
    sound_everywhere(&d);
}

#[test]
fn linkage_rule_requires_identity_check() {
    let g = build_kempe(&Rational::one()).unwrap();
    assert!(Engine::without_identities().replay(&g).is_err());
}

#[test]
fn dilation_breaks_the_first_fact() {
    let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap();
    let d = Engine::new().replay(&g).unwrap();
    let v = check_derivation(&d, &Dilation(Rational::integer(2))).unwrap();
    assert!(matches!(v, Verdict::Violated { index: 0, fact: Fact::SqDistKnown { .. } }));
}

#[test]
fn tampered_certificate_detected() {
    let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/3")).unwrap();
    for i in 0..g.certificate.len() {
        let mut bad = g.clone();
        bad.certificate[i].d2 = &bad.certificate[i].d2 + &Rational::new(1, 7);
        assert!(bad.verify().is_err(), "entry {i}");
    }
}

#[test]
fn tampered_derivation_rejected() {
    let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap();
    let mut d = Engine::new().replay(&g).unwrap();
    let last = d.steps.len() - 1;
    if let Fact::Rel(Relation::AffineComb { t, .. }) = &mut d.steps[last].fact {
        *t = r("1/3");
    }
    assert!(verify_justifications(&d, Engine::new().identities()).is_err());
}

fn small_t() -> impl Strategy<Value = Rational> {
    (1i64..12, 2i64..13).prop_filter_map("t in (0,1)", |(n, d)| (n < d).then(|| Rational::new(n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn division_gadget_invariants(t in small_t(), bx in -3i64..4, by in 1i64..4) {
        let a = pt("0", "0");
        let b = point(Rational::integer(bx), Rational::integer(by));
        let g = build_division(&a, &b, &t).unwrap();
        prop_assert!(g.verify().is_ok());
        // Every certified value matches the coordinates.
        for c in &g.certificate {
            let d2 = rigidity_forge_core::cm::sqdist(g.point(&c.p).unwrap(), g.point(&c.q).unwrap());
            prop_assert_eq!(d2.as_rational(), Some(c.d2.clone()));
        }
        let want = a.scale_rational(&t).add(&b.scale_rational(&(&Rational::one() - &t)));
        prop_assert_eq!(g.point("C").unwrap(), &want);
        let d = Engine::new().replay(&g).unwrap();
        prop_assert!(check_derivation(&d, &standard_models()[1].1).unwrap().is_all_true());
    }

    #[test]
    fn linkage_is_perpendicular(n in 1i64..20, m in 1i64..20) {
        let t = Rational::new(n, m);
        prop_assume!(build_kempe(&t).is_ok());
        let g = build_kempe(&t).unwrap();
        let get = |s: &str| g.point(s).unwrap().clone();
        prop_assert!(get("D").sub(&get("E")).dot(&get("B").sub(&get("A"))).is_zero());
        prop_assert_eq!(get("D").x, get("E").x);
    }

    #[test]
    fn chain_transport(vx in -4i64..5, vy in -4i64..5) {
        let v: TPoint = Point::new(Rational::integer(vx).into(), Rational::integer(vy).into());
        let (a, c) = (pt("1", "1"), pt("4", "5"));
        let g = build_rhombus_chain(&a, &a.add(&v), &c, &c.add(&v)).unwrap();
        prop_assert!(g.verify().is_ok());
        let d = Engine::new().replay_translation(&g).unwrap();
        prop_assert!(check_derivation(&d, &standard_models()[3].1).unwrap().is_all_true());
    }
}
