use proptest::prelude::*;
use rigidity_forge::codec::{decode_file, encode_file, from_text, to_text, CodecError, Document, File};
use rigidity_forge::descriptor::parse_model;
use rigidity_forge_core::engine::Engine;
use rigidity_forge_core::gadgets::{
    build_division, build_kempe, build_parallel, build_perp_transfer, build_rhombus_chain, build_scale,
    build_translation_bridge, point, Gadget, TPoint,
};
use rigidity_forge_core::models::standard_models;
use rigidity_forge_core::{FunElem, Rational, Scalar};
use serde_json::json;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn pt(x: &str, y: &str) -> TPoint {
    point(r(x), r(y))
}

fn corpus() -> Vec<Gadget> {
    vec![
        build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap(),
        build_division(&pt("0", "0"), &pt("1", "1"), &r("7/9")).unwrap(),
        build_rhombus_chain(&pt("0", "0"), &pt("5", "0"), &pt("0", "2"), &pt("5", "2")).unwrap(),
        build_translation_bridge(&pt("0", "0"), &pt("1", "1"), &pt("1/2", "1/3"), &pt("3/2", "4/3")).unwrap(),
        build_scale(&pt("0", "0"), &pt("1", "0"), &pt("0", "1"), &pt("3", "1"), &r("3")).unwrap(),
        build_kempe(&r("1")).unwrap(),
        build_perp_transfer(&pt("0", "0"), &pt("0", "1"), &pt("1", "0"), &pt("2", "0")).unwrap(),
        build_parallel(&pt("0", "0"), &pt("1", "2"), &pt("1", "0"), &pt("2", "2")).unwrap(),
    ]
}

fn round_trip(doc: Document) {
    let file = File { seed: Some(99), document: doc };
    let text = to_text(&file);
    let back = from_text(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(to_text(&back), text);
}

#[test]
fn gadget_corpus_round_trips() {
    for g in corpus() {
        round_trip(Document::Gadget(g));
    }
}

#[test]
fn derivations_round_trip() {
    let engine = Engine::new().with_witnesses();
    for g in corpus() {
        round_trip(Document::Derivation(engine.replay(&g).unwrap()));
    }
}

#[test]
fn models_round_trip() {
    for (_, m) in standard_models() {
        round_trip(Document::Model(m));
    }
    round_trip(Document::Model(parse_model("conj-gen:1+reflection:3/7+shift:-1,1/2").unwrap()));
}

#[test]
fn scalar_encodings() {
    let eps = Scalar::Fun(FunElem::epsilon());
    let v = rigidity_forge::codec::encode_scalar(&eps);
    assert_eq!(v, json!({ "field": { "generators": [] }, "num": [["0/1"], ["1/1"]], "den": [["1/1"]] }));
    assert_eq!(rigidity_forge::codec::decode_scalar(&v, "$").unwrap(), eps);
    let third = rigidity_forge::codec::encode_scalar(&Scalar::Rat(r("1/3")));
    assert_eq!(third, json!("1/3"));
}

#[test]
fn violations_carry_locations() {
    let g = build_division(&pt("0", "0"), &pt("1", "0"), &r("1/2")).unwrap();
    let v = encode_file(&File { seed: None, document: Document::Gadget(g) });
    let loc = |e: CodecError| match e {
        CodecError::SchemaViolation { location, .. } => location,
        other => panic!("{other:?}"),
    };

    let mut bad = v.clone();
    bad["schema"] = json!("rigidity-forge/0");
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.schema");

    let mut bad = v.clone();
    bad["gadget"]["points"]["C"]["x"][0] = json!("0.5");
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.gadget.points.C.x[0]");

    let mut bad = v.clone();
    bad["gadget"]["certificate"][3]["d2"] = json!(2);
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.gadget.certificate[3].d2");

    let mut bad = v.clone();
    bad["gadget"]["goal"][0]["kind"] = json!("Collinear");
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.gadget.goal[0].kind");

    let mut bad = v.clone();
    bad["gadget"]["field"]["generators"] = json!([["4/1"]]);
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.gadget.field.generators");

    let mut bad = v;
    bad["gadget"].as_object_mut().unwrap().remove("parts");
    assert_eq!(loc(decode_file(&bad).unwrap_err()), "$.gadget");

    assert!(matches!(from_text("{ not json"), Err(CodecError::Json(_))));
}

#[test]
fn non_orthogonal_model_file_rejected() {
    let m = parse_model("identity").unwrap();
    let mut v = encode_file(&File { seed: None, document: Document::Model(m) });
    v["model"]["matrix"] = json!([["2/1", "0/1"], ["0/1", "2/1"]]);
    assert!(matches!(decode_file(&v), Err(CodecError::SchemaViolation { location, .. }) if location == "$.model.matrix"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn division_round_trip(n in 1i64..9, d in 2i64..10, bx in -3i64..4, by in 1i64..3) {
        prop_assume!(n < d);
        let g = build_division(&pt("0", "0"), &point(Rational::integer(bx), Rational::integer(by)), &Rational::new(n, d)).unwrap();
        let file = File { seed: None, document: Document::Gadget(g) };
        prop_assert_eq!(from_text(&to_text(&file)).unwrap(), file);
    }

    #[test]
    fn rational_strings_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        let q = Rational::new(n, d);
        let v = rigidity_forge::codec::encode_scalar(&Scalar::Rat(q.clone()));
        prop_assert_eq!(rigidity_forge::codec::decode_scalar(&v, "$").unwrap(), Scalar::Rat(q));
    }
}
