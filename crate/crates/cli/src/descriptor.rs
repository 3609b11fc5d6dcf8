//! Textual model descriptors for `--model`.
//!
//! A descriptor is either a path to a model JSON file or `+`-separated parts
//! applied left to right:
//!
//! * `identity`
//! * `conj:<r>` conjugation negating `sqrt(r)`; `conj-gen:<i>` by generator index
//! * `eps-rotation`, `eps-reflection` orthogonal frames over `K(eps)` at `t = eps`
//! * `rotation:<t>`, `reflection:<t>` rational Pythagorean frames
//! * `shift:<x>,<y>` a rational translation
//!
//! so `conj:3+eps-rotation` conjugates and then rotates.

use std::path::Path;

use rigidity_forge_core::models::{
    make_pythagorean_reflection, make_pythagorean_rotation, ConjugationTarget, EmbeddingSpec, ModelMap, OrthoAffine,
};
use rigidity_forge_core::{FunElem, Point, Rational, Scalar};

use crate::codec::{self, Document};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DescriptorError {
    #[error("unknown model part {0:?}")]
    UnknownPart(String),
    #[error("bad parameter in {0:?}")]
    BadParameter(String),
    #[error("at most one conjugation per model")]
    TwoConjugations,
    #[error("{0}")]
    File(String),
}

pub fn parse_model(desc: &str) -> Result<ModelMap, DescriptorError> {
    if Path::new(desc).is_file() {
        let text = std::fs::read_to_string(desc).map_err(|e| DescriptorError::File(e.to_string()))?;
        let file = codec::from_text(&text).map_err(|e| DescriptorError::File(e.to_string()))?;
        return match file.document {
            Document::Model(m) => Ok(m),
            _ => Err(DescriptorError::File(format!("{desc} is a {} file, not a model", file.kind()))),
        };
    }
    let mut conj: Option<ConjugationTarget> = None;
    let mut over_eps = false;
    let mut frame = OrthoAffine::identity();
    for part in desc.split('+').map(str::trim) {
        let bad = || DescriptorError::BadParameter(part.to_string());
        let rat = |s: &str| s.parse::<Rational>().map_err(|_| bad());
        let (head, arg) = part.split_once(':').unwrap_or((part, ""));
        let step = match head {
            "identity" => None,
            "conj" | "conj-gen" => {
                if conj.is_some() {
                    return Err(DescriptorError::TwoConjugations);
                }
                conj = Some(if head == "conj" {
                    ConjugationTarget::Radicand(rat(arg)?)
                } else {
                    ConjugationTarget::Generator(arg.parse().map_err(|_| bad())?)
                });
                None
            }
            "eps-rotation" | "eps-reflection" => {
                over_eps = true;
                let eps = Scalar::Fun(FunElem::epsilon());
                let f = if head == "eps-rotation" { make_pythagorean_rotation(&eps) } else { make_pythagorean_reflection(&eps) };
                Some(f.map_err(|_| bad())?)
            }
            "rotation" | "reflection" => {
                let t = Scalar::Rat(rat(arg)?);
                let f = if head == "rotation" { make_pythagorean_rotation(&t) } else { make_pythagorean_reflection(&t) };
                Some(f.map_err(|_| bad())?)
            }
            "shift" => {
                let (x, y) = arg.split_once(',').ok_or_else(bad)?;
                Some(OrthoAffine::identity().with_translation(Point::new(Scalar::Rat(rat(x)?), Scalar::Rat(rat(y)?))))
            }
            _ => return Err(DescriptorError::UnknownPart(part.to_string())),
        };
        if let Some(f) = step {
            frame = f.after(&frame);
        }
    }
    let embedding = match (over_eps, conj) {
        (true, c) => EmbeddingSpec::FunctionField(c),
        (false, Some(c)) => EmbeddingSpec::Conjugation(c),
        (false, None) => EmbeddingSpec::Identity,
    };
    Ok(ModelMap::new(embedding, frame))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_parts() {
        assert_eq!(parse_model("identity").unwrap(), ModelMap::identity());
        let m = parse_model("conj:3+eps-rotation").unwrap();
        assert_eq!(m.embedding, EmbeddingSpec::FunctionField(Some(ConjugationTarget::Radicand(Rational::integer(3)))));
        let q = parse_model("rotation:1").unwrap();
        let one = Scalar::Rat(Rational::one());
        let zero = Scalar::Rat(Rational::zero());
        assert_eq!(q.frame.matrix(), &[[zero.clone(), Scalar::Rat(-Rational::one())], [one, zero]]);
        assert!(matches!(parse_model("conj:2+conj:3"), Err(DescriptorError::TwoConjugations)));
        assert!(matches!(parse_model("spin"), Err(DescriptorError::UnknownPart(_))));
        assert!(matches!(parse_model("conj:0.5"), Err(DescriptorError::BadParameter(_))));
    }
}
