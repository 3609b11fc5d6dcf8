//! The four symbolic Cayley-Menger identities behind the perpendicularity
//! argument for the straight-line linkage.
//!
//! Points `A, B, C, D, E, F` with `|AB| = |AD| = 4`, `|CB| = |CD| = |CE| = 2`,
//! `|AF| = 3`, `|FB| = |FE| = 1`; the unknown image squared distances are
//! `a = BD`, `b = AC`, `c = BE`, `d = CF`, `e = AE`.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{det_bareiss, identity_holds, Factored, Matrix, Polynomial};
use crate::scalars::{Rational, Ring};

fn v(name: &str) -> Polynomial {
    Polynomial::var(name)
}

fn k(n: i64) -> Polynomial {
    Polynomial::constant(Rational::integer(n))
}

/// `d^2 - 10d + 9`, the quadratic shared by the last two identities.
pub fn shared_quadratic() -> Polynomial {
    v("d").pow(2).sub(&k(10).mul(&v("d"))).add(&k(9))
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub name: &'static str,
    /// Point order of the Cayley-Menger determinant.
    pub points: [char; 4],
    pub matrix: Matrix<Polynomial>,
    /// Substitutions applied to the determinant before comparison.
    pub substitutions: Vec<(&'static str, Polynomial)>,
    pub claimed: Factored,
}

impl Identity {
    pub fn determinant(&self) -> Polynomial {
        let det = det_bareiss(&self.matrix);
        if self.substitutions.is_empty() {
            return det;
        }
        let bindings: BTreeMap<_, _> =
            self.substitutions.iter().map(|(n, p)| (n.to_string(), p.clone())).collect();
        det.substitute(&bindings)
    }

    pub fn holds(&self) -> bool {
        identity_holds(&self.determinant(), &self.claimed)
    }
}

fn rows(entries: [[Polynomial; 5]; 5]) -> Matrix<Polynomial> {
    entries.into_iter().map(|r| r.into_iter().collect()).collect()
}

/// The four identities, with the determinants written out row by row.
pub fn kempe_identities() -> [Identity; 4] {
    let (a, b, c, d, e) = (v("a"), v("b"), v("c"), v("d"), v("e"));
    let o = || k(0);
    let l = || k(1);
    [
        Identity {
            name: "cm(A,B,E,F)",
            points: ['A', 'B', 'E', 'F'],
            matrix: rows([
                [o(), l(), l(), l(), l()],
                [l(), o(), k(16), e.clone(), k(9)],
                [l(), k(16), o(), c.clone(), l()],
                [l(), e.clone(), c.clone(), o(), l()],
                [l(), k(9), l(), l(), o()],
            ]),
            substitutions: vec![],
            claimed: Factored::new(Rational::integer(-2), vec![(e.sub(&k(16)).add(&k(3).mul(&c)), 2)]),
        },
        Identity {
            name: "cm(A,B,C,F)",
            points: ['A', 'B', 'C', 'F'],
            matrix: rows([
                [o(), l(), l(), l(), l()],
                [l(), o(), k(16), b.clone(), k(9)],
                [l(), k(16), o(), k(4), l()],
                [l(), b.clone(), k(4), o(), d.clone()],
                [l(), k(9), l(), d.clone(), o()],
            ]),
            substitutions: vec![],
            claimed: Factored::new(Rational::integer(-2), vec![(b.sub(&k(4).mul(&d)), 2)]),
        },
        Identity {
            name: "cm(A,B,C,D) with b=4d",
            points: ['A', 'B', 'C', 'D'],
            matrix: rows([
                [o(), l(), l(), l(), l()],
                [l(), o(), k(16), b.clone(), k(16)],
                [l(), k(16), o(), k(4), a.clone()],
                [l(), b.clone(), k(4), o(), k(4)],
                [l(), k(16), a.clone(), k(4), o()],
            ]),
            substitutions: vec![("b", k(4).mul(&d))],
            claimed: Factored::new(
                Rational::integer(-8),
                vec![(a.clone(), 1), (a.mul(&d).add(&k(4).mul(&shared_quadratic())), 1)],
            ),
        },
        Identity {
            name: "cm(B,C,E,F)",
            points: ['B', 'C', 'E', 'F'],
            matrix: rows([
                [o(), l(), l(), l(), l()],
                [l(), o(), k(4), c.clone(), l()],
                [l(), k(4), o(), k(4), d.clone()],
                [l(), c.clone(), k(4), o(), l()],
                [l(), l(), d.clone(), l(), o()],
            ]),
            substitutions: vec![],
            claimed: Factored::new(
                Rational::integer(-2),
                vec![(c.clone(), 1), (c.mul(&d).add(&shared_quadratic()), 1)],
            ),
        },
    ]
}

/// Proof that all four identities were expanded and matched in this process.
/// Only [`verify_kempe_identities`] can construct one.
#[derive(Clone, Debug)]
pub struct KempeIdentityCertificate {
    _sealed: (),
}

/// Expands all four identities; on success returns the certificate that
/// enables the linkage rule in the deduction engine. On failure returns the
/// name of the first identity that did not match.
pub fn verify_kempe_identities() -> Result<KempeIdentityCertificate, &'static str> {
    for id in kempe_identities() {
        if !id.holds() {
            return Err(id.name);
        }
    }
    Ok(KempeIdentityCertificate { _sealed: () })
}

/// The relation chain derived from the identities, each as `lhs - rhs`
/// polynomials that vanish on every image of the linkage:
/// `e - (16 - 3c)`, `b - 4d`, `a d + 4(d^2 - 10d + 9)`, `c d + (d^2 - 10d + 9)`,
/// `a - 4c`, and the dot product `a/2 - c/2 + e/2 - 8`.
pub fn kempe_relations() -> [(&'static str, Polynomial); 6] {
    let (a, b, c, d, e) = (v("a"), v("b"), v("c"), v("d"), v("e"));
    let half = Polynomial::constant(Rational::new(1, 2));
    [
        ("e=16-3c", e.sub(&k(16).sub(&k(3).mul(&c)))),
        ("b=4d", b.sub(&k(4).mul(&d))),
        ("a*d=-4(d^2-10d+9)", a.mul(&d).add(&k(4).mul(&shared_quadratic()))),
        ("c*d=-(d^2-10d+9)", c.mul(&d).add(&shared_quadratic())),
        ("a=4c", a.sub(&k(4).mul(&c))),
        ("(E-D).(B-A)=a/2-c/2+e/2-8", half.mul(&a).sub(&half.mul(&c)).add(&half.mul(&e)).sub(&k(8))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::det_cofactor;

    #[test]
    fn all_four_hold() {
        for id in kempe_identities() {
            assert!(id.holds(), "{} failed: {}", id.name, id.determinant());
        }
        assert!(verify_kempe_identities().is_ok());
    }

    #[test]
    fn cofactor_oracle_agrees() {
        for id in kempe_identities() {
            assert_eq!(det_bareiss(&id.matrix), det_cofactor(&id.matrix), "{}", id.name);
        }
    }

    #[test]
    fn perturbed_claim_fails() {
        let mut id = kempe_identities()[0].clone();
        id.claimed.constant = Rational::integer(2);
        assert!(!id.holds());
    }
}
