//! JSON encodings for gadgets, derivations and model descriptors.
//!
//! Every number is an exact string: rationals are `"p/q"`, tower elements are
//! coordinate lists over a field tagged by its generator radicands, and
//! function-field elements are numerator/denominator coefficient lists in ε.
//! Decoding reports the JSON path of the first offending value.

use std::sync::Arc;

use rigidity_forge_core::engine::{Derivation, Fact, Justification, Rule, Step, Witness};
use rigidity_forge_core::gadgets::{CertEntry, Construction, Gadget, NamedPoint, TPoint};
use rigidity_forge_core::models::{ConjugationTarget, EmbeddingSpec, ModelMap, OrthoAffine};
use rigidity_forge_core::relations::Relation;
use rigidity_forge_core::{FunElem, Point, Rational, Scalar, Tower, TowerElem};
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "rigidity-forge/1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("not valid JSON: {0}")]
    Json(String),
    #[error("schema violation at {location}: {message}")]
    SchemaViolation { location: String, message: String },
}

type Result<T> = std::result::Result<T, CodecError>;

fn violation(location: &str, message: impl Into<String>) -> CodecError {
    CodecError::SchemaViolation { location: location.to_string(), message: message.into() }
}

/// A decoded top-level file.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Gadget(Gadget),
    Derivation(Derivation),
    Model(ModelMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct File {
    pub seed: Option<u64>,
    pub document: Document,
}

impl File {
    pub fn kind(&self) -> &'static str {
        match self.document {
            Document::Gadget(_) => "gadget",
            Document::Derivation(_) => "derivation",
            Document::Model(_) => "model",
        }
    }
}

pub fn encode_file(file: &File) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("type".into(), json!(file.kind()));
    if let Some(seed) = file.seed {
        m.insert("seed".into(), json!(seed.to_string()));
    }
    let (key, body) = match &file.document {
        Document::Gadget(g) => ("gadget", encode_gadget(g)),
        Document::Derivation(d) => ("derivation", encode_derivation(d)),
        Document::Model(x) => ("model", encode_model(x)),
    };
    m.insert(key.into(), body);
    Value::Object(m)
}

pub fn to_text(file: &File) -> String {
    let mut s = serde_json::to_string_pretty(&encode_file(file)).expect("values are serializable");
    s.push('\n');
    s
}

pub fn from_text(text: &str) -> Result<File> {
    let v: Value = serde_json::from_str(text).map_err(|e| CodecError::Json(e.to_string()))?;
    decode_file(&v)
}

pub fn decode_file(v: &Value) -> Result<File> {
    let m = obj(v, "$")?;
    let schema = string(get(m, "schema", "$")?, "$.schema")?;
    if schema != SCHEMA {
        return Err(violation("$.schema", format!("expected {SCHEMA:?}, found {schema:?}")));
    }
    let seed = match m.get("seed") {
        None => None,
        Some(s) => Some(string(s, "$.seed")?.parse().map_err(|_| violation("$.seed", "seed must be a decimal u64 string"))?),
    };
    let kind = string(get(m, "type", "$")?, "$.type")?;
    let document = match kind {
        "gadget" => Document::Gadget(decode_gadget(get(m, "gadget", "$")?, "$.gadget")?),
        "derivation" => Document::Derivation(decode_derivation(get(m, "derivation", "$")?, "$.derivation")?),
        "model" => Document::Model(decode_model(get(m, "model", "$")?, "$.model")?),
        other => return Err(violation("$.type", format!("unknown document type {other:?}"))),
    };
    Ok(File { seed, document })
}

// ---- primitive helpers ----

fn obj<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| violation(loc, "expected an object"))
}

fn arr<'a>(v: &'a Value, loc: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| violation(loc, "expected an array"))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, loc: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| violation(loc, format!("missing field {key:?}")))
}

fn string<'a>(v: &'a Value, loc: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| violation(loc, "expected a string"))
}

fn name(m: &Map<String, Value>, key: &str, loc: &str) -> Result<String> {
    Ok(string(get(m, key, loc)?, &format!("{loc}.{key}"))?.to_string())
}

fn rational(v: &Value, loc: &str) -> Result<Rational> {
    if v.is_number() {
        return Err(violation(loc, format!("bare number {v}; numbers must be \"p/q\" strings")));
    }
    let s = string(v, loc)?;
    s.parse().map_err(|_| violation(loc, format!("{s:?} is not an exact rational \"p/q\"")))
}

fn rat_field(m: &Map<String, Value>, key: &str, loc: &str) -> Result<Rational> {
    rational(get(m, key, loc)?, &format!("{loc}.{key}"))
}

fn index(v: &Value, loc: &str) -> Result<usize> {
    v.as_u64().map(|i| i as usize).ok_or_else(|| violation(loc, "expected a non-negative integer index"))
}

fn enc_rat(r: &Rational) -> Value {
    Value::String(r.to_exact_string())
}

fn enc_coords(x: &TowerElem) -> Value {
    Value::Array(x.coords().iter().map(enc_rat).collect())
}

// ---- fields and scalars ----

fn encode_field(t: &Tower) -> Value {
    let gens: Vec<Value> = t.radicands().iter().map(|r| Value::Array(r.iter().map(enc_rat).collect())).collect();
    json!({ "generators": gens })
}

fn decode_field(v: &Value, loc: &str) -> Result<Arc<Tower>> {
    let m = obj(v, loc)?;
    let gloc = format!("{loc}.generators");
    let gens = arr(get(m, "generators", loc)?, &gloc)?;
    let mut radicands = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        let l = format!("{gloc}[{i}]");
        let coords = arr(g, &l)?;
        let r: Vec<Rational> =
            coords.iter().enumerate().map(|(j, c)| rational(c, &format!("{l}[{j}]"))).collect::<Result<_>>()?;
        radicands.push(r);
    }
    Tower::from_radicands(radicands).map_err(|e| violation(&gloc, e.to_string()))
}

fn decode_coords(v: &Value, tower: &Arc<Tower>, loc: &str) -> Result<TowerElem> {
    let a = arr(v, loc)?;
    if a.len() != tower.dim() {
        return Err(violation(loc, format!("expected {} coordinates, found {}", tower.dim(), a.len())));
    }
    let coords = a.iter().enumerate().map(|(i, c)| rational(c, &format!("{loc}[{i}]"))).collect::<Result<_>>()?;
    TowerElem::from_coords(tower, coords).map_err(|e| violation(loc, e.to_string()))
}

pub fn encode_scalar(s: &Scalar) -> Value {
    match s {
        Scalar::Rat(r) => enc_rat(r),
        Scalar::Tower(t) => json!({ "field": encode_field(t.tower()), "coords": enc_coords(t) }),
        Scalar::Fun(f) => {
            let r = f.reduced();
            let list = |p: &[TowerElem]| -> Value {
                Value::Array(p.iter().map(|c| enc_coords(&c.lift_to(f.tower()).expect("own tower"))).collect())
            };
            json!({ "field": encode_field(f.tower()), "num": list(r.numerator()), "den": list(r.denominator()) })
        }
    }
}

pub fn decode_scalar(v: &Value, loc: &str) -> Result<Scalar> {
    if v.is_string() || v.is_number() {
        return Ok(Scalar::Rat(rational(v, loc)?));
    }
    let m = obj(v, loc)?;
    let tower = decode_field(get(m, "field", loc)?, &format!("{loc}.field"))?;
    if let Some(c) = m.get("coords") {
        return Ok(Scalar::Tower(decode_coords(c, &tower, &format!("{loc}.coords"))?));
    }
    let poly = |key: &str| -> Result<Vec<TowerElem>> {
        let l = format!("{loc}.{key}");
        arr(get(m, key, loc)?, &l)?.iter().enumerate().map(|(i, c)| decode_coords(c, &tower, &format!("{l}[{i}]"))).collect()
    };
    let (num, den) = (poly("num")?, poly("den")?);
    FunElem::from_parts(num, den).map(Scalar::Fun).map_err(|e| violation(loc, e.to_string()))
}

fn encode_tpoint(p: &TPoint, tower: &Arc<Tower>) -> Value {
    let lift = |c: &TowerElem| enc_coords(&c.lift_to(tower).expect("point lies in the gadget field"));
    json!({ "x": lift(&p.x), "y": lift(&p.y) })
}

fn decode_tpoint(v: &Value, tower: &Arc<Tower>, loc: &str) -> Result<TPoint> {
    let m = obj(v, loc)?;
    Ok(Point::new(
        decode_coords(get(m, "x", loc)?, tower, &format!("{loc}.x"))?,
        decode_coords(get(m, "y", loc)?, tower, &format!("{loc}.y"))?,
    ))
}

/// A point carrying its own field tag.
fn encode_free_point(p: &TPoint) -> Value {
    let tower = merge_point_tower(p);
    let mut v = encode_tpoint(p, &tower);
    v.as_object_mut().unwrap().insert("field".into(), encode_field(&tower));
    v
}

fn merge_point_tower(p: &TPoint) -> Arc<Tower> {
    rigidity_forge_core::scalars::tower::merge_towers(p.x.tower(), p.y.tower()).0
}

fn decode_free_point(v: &Value, loc: &str) -> Result<TPoint> {
    let m = obj(v, loc)?;
    let tower = decode_field(get(m, "field", loc)?, &format!("{loc}.field"))?;
    decode_tpoint(v, &tower, loc)
}

// ---- relations and facts ----

fn encode_relation(r: &Relation) -> Value {
    match r {
        Relation::VecEq { a, b, c, d } => json!({ "kind": "VecEq", "a": a, "b": b, "c": c, "d": d }),
        Relation::VecScale { a, b, c, d, r } => {
            json!({ "kind": "VecScale", "a": a, "b": b, "c": c, "d": d, "r": enc_rat(r) })
        }
        Relation::AffineComb { c, a, b, t } => json!({ "kind": "AffineComb", "c": c, "a": a, "b": b, "t": enc_rat(t) }),
        Relation::DotZero { a, b, c, d } => json!({ "kind": "DotZero", "a": a, "b": b, "c": c, "d": d }),
    }
}

fn decode_relation(v: &Value, loc: &str) -> Result<Relation> {
    let m = obj(v, loc)?;
    let n = |k: &str| name(m, k, loc);
    Ok(match string(get(m, "kind", loc)?, &format!("{loc}.kind"))? {
        "VecEq" => Relation::VecEq { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")? },
        "VecScale" => Relation::VecScale { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, r: rat_field(m, "r", loc)? },
        "AffineComb" => Relation::AffineComb { c: n("c")?, a: n("a")?, b: n("b")?, t: rat_field(m, "t", loc)? },
        "DotZero" => Relation::DotZero { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")? },
        other => return Err(violation(&format!("{loc}.kind"), format!("unknown relation {other:?}"))),
    })
}

fn encode_fact(f: &Fact) -> Value {
    match f {
        Fact::SqDistKnown { p, q, v } => json!({ "kind": "SqDistKnown", "p": p, "q": q, "v": enc_rat(v) }),
        Fact::Distinct { p, q } => json!({ "kind": "Distinct", "p": p, "q": q }),
        Fact::NonzeroDist { p, q } => json!({ "kind": "NonzeroDist", "p": p, "q": q }),
        Fact::Rel(r) => encode_relation(r),
    }
}

fn decode_fact(v: &Value, loc: &str) -> Result<Fact> {
    let m = obj(v, loc)?;
    let n = |k: &str| name(m, k, loc);
    Ok(match string(get(m, "kind", loc)?, &format!("{loc}.kind"))? {
        "SqDistKnown" => Fact::SqDistKnown { p: n("p")?, q: n("q")?, v: rat_field(m, "v", loc)? },
        "Distinct" => Fact::Distinct { p: n("p")?, q: n("q")? },
        "NonzeroDist" => Fact::NonzeroDist { p: n("p")?, q: n("q")? },
        _ => Fact::Rel(decode_relation(v, loc)?),
    })
}

// ---- gadgets ----

fn names(v: &[String]) -> Value {
    Value::Array(v.iter().map(|s| json!(s)).collect())
}

fn encode_construction(c: &Construction, tower: &Arc<Tower>) -> Value {
    let mut v = match c {
        Construction::Division { a, b, c, d, e, f, t, r } => {
            json!({ "a": a, "b": b, "c": c, "d": d, "e": e, "f": f, "t": enc_rat(t), "r": enc_rat(r) })
        }
        Construction::RhombusChain { a_chain, c_chain, side } => {
            json!({ "a_chain": names(a_chain), "c_chain": names(c_chain), "side": enc_rat(side) })
        }
        Construction::Bridge { a, b, c, d, e, f } => json!({ "a": a, "b": b, "c": c, "d": d, "e": e, "f": f }),
        Construction::Kempe { a, b, c, d, e, f, t } => json!({
            "a": a, "b": b, "c": c, "d": d, "e": e, "f": f,
            "t": enc_coords(&t.lift_to(tower).expect("parameter lies in the gadget field")),
        }),
        Construction::Scale { a, b, c, d, g, r } => json!({ "a": a, "b": b, "c": c, "d": d, "g": g, "r": enc_rat(r) }),
        Construction::PerpTransfer { p, q, x, y, r, s } => {
            json!({ "p": p, "q": q, "x": x, "y": y, "r": enc_rat(r), "s": enc_rat(s) })
        }
        Construction::Parallel { a, b, c, d, x, y } => json!({ "a": a, "b": b, "c": c, "d": d, "x": x, "y": y }),
    };
    let m = v.as_object_mut().unwrap();
    m.shift_insert(0, "kind".into(), json!(c.kind()));
    v
}

fn decode_construction(v: &Value, tower: &Arc<Tower>, loc: &str) -> Result<Construction> {
    let m = obj(v, loc)?;
    let n = |k: &str| name(m, k, loc);
    let r = |k: &str| rat_field(m, k, loc);
    let list = |k: &str| -> Result<Vec<String>> {
        let l = format!("{loc}.{k}");
        arr(get(m, k, loc)?, &l)?.iter().enumerate().map(|(i, s)| Ok(string(s, &format!("{l}[{i}]"))?.to_string())).collect()
    };
    Ok(match string(get(m, "kind", loc)?, &format!("{loc}.kind"))? {
        "division" => Construction::Division {
            a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, e: n("e")?, f: n("f")?, t: r("t")?, r: r("r")?,
        },
        "rhombus-chain" => Construction::RhombusChain { a_chain: list("a_chain")?, c_chain: list("c_chain")?, side: r("side")? },
        "bridge" => Construction::Bridge { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, e: n("e")?, f: n("f")? },
        "kempe" => Construction::Kempe {
            a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, e: n("e")?, f: n("f")?,
            t: decode_coords(get(m, "t", loc)?, tower, &format!("{loc}.t"))?,
        },
        "scale" => Construction::Scale { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, g: n("g")?, r: r("r")? },
        "perp" => Construction::PerpTransfer { p: n("p")?, q: n("q")?, x: n("x")?, y: n("y")?, r: r("r")?, s: r("s")? },
        "parallel" => Construction::Parallel { a: n("a")?, b: n("b")?, c: n("c")?, d: n("d")?, x: n("x")?, y: n("y")? },
        other => return Err(violation(&format!("{loc}.kind"), format!("unknown construction {other:?}"))),
    })
}

pub fn encode_gadget(g: &Gadget) -> Value {
    let mut points = Map::new();
    for p in &g.points {
        points.insert(p.name.clone(), encode_tpoint(&p.at, &g.tower));
    }
    let cert: Vec<Value> =
        g.certificate.iter().map(|c| json!({ "p": c.p, "q": c.q, "d2": enc_rat(&c.d2) })).collect();
    let sides: Vec<Value> = g.side_conditions.iter().map(|(p, q)| json!([p, q])).collect();
    json!({
        "field": encode_field(&g.tower),
        "points": points,
        "certificate": cert,
        "side_conditions": sides,
        "goal": g.goal.iter().map(encode_relation).collect::<Vec<_>>(),
        "construction": encode_construction(&g.construction, &g.tower),
        "parts": g.parts.iter().map(encode_gadget).collect::<Vec<_>>(),
    })
}

pub fn decode_gadget(v: &Value, loc: &str) -> Result<Gadget> {
    let m = obj(v, loc)?;
    let tower = decode_field(get(m, "field", loc)?, &format!("{loc}.field"))?;
    let ploc = format!("{loc}.points");
    let points = obj(get(m, "points", loc)?, &ploc)?
        .iter()
        .map(|(n, p)| Ok(NamedPoint { name: n.clone(), at: decode_tpoint(p, &tower, &format!("{ploc}.{n}"))? }))
        .collect::<Result<Vec<_>>>()?;
    let cloc = format!("{loc}.certificate");
    let certificate = arr(get(m, "certificate", loc)?, &cloc)?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let l = format!("{cloc}[{i}]");
            let cm = obj(c, &l)?;
            Ok(CertEntry { p: name(cm, "p", &l)?, q: name(cm, "q", &l)?, d2: rat_field(cm, "d2", &l)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let sloc = format!("{loc}.side_conditions");
    let side_conditions = arr(get(m, "side_conditions", loc)?, &sloc)?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let l = format!("{sloc}[{i}]");
            match arr(s, &l)?.as_slice() {
                [p, q] => Ok((string(p, &format!("{l}[0]"))?.to_string(), string(q, &format!("{l}[1]"))?.to_string())),
                _ => Err(violation(&l, "expected a pair of point names")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let gloc = format!("{loc}.goal");
    let goal = arr(get(m, "goal", loc)?, &gloc)?
        .iter()
        .enumerate()
        .map(|(i, r)| decode_relation(r, &format!("{gloc}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let construction = decode_construction(get(m, "construction", loc)?, &tower, &format!("{loc}.construction"))?;
    let ploc = format!("{loc}.parts");
    let parts = arr(get(m, "parts", loc)?, &ploc)?
        .iter()
        .enumerate()
        .map(|(i, p)| decode_gadget(p, &format!("{ploc}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Gadget { tower, points, certificate, side_conditions, goal, construction, parts })
}

// ---- derivations ----

fn encode_step(s: &Step) -> Value {
    let j = &s.justification;
    let mut v = json!({
        "fact": encode_fact(&s.fact),
        "rule": j.rule.tag(),
        "premises": j.premises,
        "coefficients": j.coefficients.iter().map(enc_rat).collect::<Vec<_>>(),
        "relations": j.relations,
    });
    if let Some(w) = &j.witness {
        v.as_object_mut().unwrap().insert(
            "witness".into(),
            json!({ "w": encode_free_point(&w.w), "q1": enc_rat(&w.q1), "q2": enc_rat(&w.q2) }),
        );
    }
    v
}

fn decode_step(v: &Value, loc: &str) -> Result<Step> {
    let m = obj(v, loc)?;
    let fact = decode_fact(get(m, "fact", loc)?, &format!("{loc}.fact"))?;
    let tag = string(get(m, "rule", loc)?, &format!("{loc}.rule"))?;
    let rule = Rule::from_tag(tag).ok_or_else(|| violation(&format!("{loc}.rule"), format!("unknown rule {tag:?}")))?;
    let seq = |k: &str| -> Result<(&Vec<Value>, String)> {
        let l = format!("{loc}.{k}");
        Ok((arr(get(m, k, loc)?, &l)?, l))
    };
    let (ps, l) = seq("premises")?;
    let premises = ps.iter().enumerate().map(|(i, p)| index(p, &format!("{l}[{i}]"))).collect::<Result<_>>()?;
    let (cs, l) = seq("coefficients")?;
    let coefficients = cs.iter().enumerate().map(|(i, c)| rational(c, &format!("{l}[{i}]"))).collect::<Result<_>>()?;
    let (rs, l) = seq("relations")?;
    let relations =
        rs.iter().enumerate().map(|(i, r)| Ok(string(r, &format!("{l}[{i}]"))?.to_string())).collect::<Result<_>>()?;
    let witness = match m.get("witness") {
        None => None,
        Some(w) => {
            let l = format!("{loc}.witness");
            let wm = obj(w, &l)?;
            Some(Witness {
                w: decode_free_point(get(wm, "w", &l)?, &format!("{l}.w"))?,
                q1: rat_field(wm, "q1", &l)?,
                q2: rat_field(wm, "q2", &l)?,
            })
        }
    };
    Ok(Step { fact, justification: Justification { rule, premises, coefficients, relations, witness } })
}

pub fn encode_derivation(d: &Derivation) -> Value {
    json!({
        "gadget": encode_gadget(&d.gadget),
        "steps": d.steps.iter().map(encode_step).collect::<Vec<_>>(),
    })
}

pub fn decode_derivation(v: &Value, loc: &str) -> Result<Derivation> {
    let m = obj(v, loc)?;
    let gadget = decode_gadget(get(m, "gadget", loc)?, &format!("{loc}.gadget"))?;
    let sloc = format!("{loc}.steps");
    let steps = arr(get(m, "steps", loc)?, &sloc)?
        .iter()
        .enumerate()
        .map(|(i, s)| decode_step(s, &format!("{sloc}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Derivation { gadget, steps })
}

// ---- models ----

fn encode_target(c: &ConjugationTarget) -> Value {
    match c {
        ConjugationTarget::Generator(i) => json!({ "generator": i }),
        ConjugationTarget::Radicand(r) => json!({ "radicand": enc_rat(r) }),
    }
}

fn decode_target(v: &Value, loc: &str) -> Result<ConjugationTarget> {
    let m = obj(v, loc)?;
    match (m.get("generator"), m.get("radicand")) {
        (Some(g), None) => Ok(ConjugationTarget::Generator(index(g, &format!("{loc}.generator"))?)),
        (None, Some(r)) => Ok(ConjugationTarget::Radicand(rational(r, &format!("{loc}.radicand"))?)),
        _ => Err(violation(loc, "expected exactly one of \"generator\" or \"radicand\"")),
    }
}

pub fn encode_model(x: &ModelMap) -> Value {
    let embedding = match &x.embedding {
        EmbeddingSpec::Identity => json!({ "kind": "identity" }),
        EmbeddingSpec::Conjugation(c) => json!({ "kind": "conjugation", "target": encode_target(c) }),
        EmbeddingSpec::FunctionField(c) => {
            let mut v = json!({ "kind": "function-field" });
            if let Some(c) = c {
                v.as_object_mut().unwrap().insert("conjugation".into(), encode_target(c));
            }
            v
        }
    };
    let m = x.frame.matrix();
    let t = x.frame.translation();
    json!({
        "embedding": embedding,
        "matrix": m.iter().map(|row| row.iter().map(encode_scalar).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "translation": [encode_scalar(&t.x), encode_scalar(&t.y)],
    })
}

pub fn decode_model(v: &Value, loc: &str) -> Result<ModelMap> {
    let m = obj(v, loc)?;
    let eloc = format!("{loc}.embedding");
    let em = obj(get(m, "embedding", loc)?, &eloc)?;
    let embedding = match string(get(em, "kind", &eloc)?, &format!("{eloc}.kind"))? {
        "identity" => EmbeddingSpec::Identity,
        "conjugation" => EmbeddingSpec::Conjugation(decode_target(get(em, "target", &eloc)?, &format!("{eloc}.target"))?),
        "function-field" => EmbeddingSpec::FunctionField(match em.get("conjugation") {
            None => None,
            Some(c) => Some(decode_target(c, &format!("{eloc}.conjugation"))?),
        }),
        other => return Err(violation(&format!("{eloc}.kind"), format!("unknown embedding {other:?}"))),
    };
    let pair = |v: &Value, l: &str| -> Result<[Scalar; 2]> {
        match arr(v, l)?.as_slice() {
            [a, b] => Ok([decode_scalar(a, &format!("{l}[0]"))?, decode_scalar(b, &format!("{l}[1]"))?]),
            _ => Err(violation(l, "expected two entries")),
        }
    };
    let mloc = format!("{loc}.matrix");
    let rows = arr(get(m, "matrix", loc)?, &mloc)?;
    let [r0, r1] = rows.as_slice() else {
        return Err(violation(&mloc, "expected two rows"));
    };
    let matrix = [pair(r0, &format!("{mloc}[0]"))?, pair(r1, &format!("{mloc}[1]"))?];
    let tloc = format!("{loc}.translation");
    let [tx, ty] = pair(get(m, "translation", loc)?, &tloc)?;
    let frame = OrthoAffine::new(matrix, Point::new(tx, ty)).map_err(|e| violation(&mloc, e.to_string()))?;
    Ok(ModelMap::new(embedding, frame))
}
