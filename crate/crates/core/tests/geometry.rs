use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigidity_forge_core::cm::{affinely_dependent3, cm3, cm4, cm4_points, prop3_verify, prop4_verify, sqdist};
use rigidity_forge_core::poly::identities::{kempe_identities, verify_kempe_identities};
use rigidity_forge_core::poly::{det_bareiss, det_cofactor, Matrix, Polynomial};
use rigidity_forge_core::{Point, Rational, Ring, TowerElem};

type P = Point<TowerElem>;

fn rat() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| Rational::new(n, d))
}

fn pt() -> impl Strategy<Value = P> {
    (rat(), rat()).prop_map(|(x, y)| Point::new(TowerElem::from(x), TowerElem::from(y)))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-50..=50), rng.gen_range(1..=20))
}

/// `(q - p) x (r - p) == 0`.
fn collinear_by_cross(p: &P, q: &P, r: &P) -> bool {
    q.sub(p).cross(&r.sub(p)).is_zero()
}

#[test]
fn equilateral_triangle() {
    let one = Rational::one();
    assert_eq!(cm3(&one, &one, &one), Rational::integer(-3));
}

#[test]
fn degenerate_triangles_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut n = 0;
    while n < 50 {
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        if (&a + &b).is_zero() {
            continue;
        }
        assert!(cm3(&a.square(), &(&a + &b).square(), &b.square()).is_zero(), "a={a} b={b}");
        n += 1;
    }
}

#[test]
fn planar_quadruples_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let ps: Vec<P> = (0..4)
            .map(|_| Point::new(random_rational(&mut rng).into(), random_rational(&mut rng).into()))
            .collect();
        assert!(cm4_points([&ps[0], &ps[1], &ps[2], &ps[3]]).is_zero());
    }
}

#[test]
fn collinearity_agrees_with_cross_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut collinear = 0;
    for i in 0..1000 {
        let p: P = Point::new(random_rational(&mut rng).into(), random_rational(&mut rng).into());
        let q: P = Point::new(random_rational(&mut rng).into(), random_rational(&mut rng).into());
        let r: P = if i < 200 {
            let s = random_rational(&mut rng);
            p.add(&q.sub(&p).scale_rational(&s))
        } else {
            Point::new(random_rational(&mut rng).into(), random_rational(&mut rng).into())
        };
        let oracle = collinear_by_cross(&p, &q, &r);
        collinear += oracle as usize;
        assert_eq!(affinely_dependent3(&p, &q, &r), oracle);
    }
    assert!(collinear >= 200);
}

#[test]
fn identities_expand_exactly() {
    for id in kempe_identities() {
        assert!(id.holds(), "{}", id.name);
    }
    assert!(verify_kempe_identities().is_ok());
}

fn bindings(rng: &mut ChaCha8Rng) -> BTreeMap<String, Rational> {
    ["a", "b", "c", "d", "e"].iter().map(|v| (v.to_string(), random_rational(rng))).collect()
}

#[test]
fn symbolic_determinants_match_numeric_cm4() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ids = kempe_identities();
    for _ in 0..100 {
        let env = bindings(&mut rng);
        for id in &ids {
            // Substitutions are applied before the numeric evaluation too.
            let mut env = env.clone();
            for (var, p) in &id.substitutions {
                env.insert(var.to_string(), p.eval_rational(&env).unwrap());
            }
            let entries: Vec<Rational> = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
                .iter()
                .map(|&(i, j)| id.matrix[i][j].eval_rational(&env).unwrap())
                .collect();
            let numeric = cm4(&entries[0], &entries[1], &entries[2], &entries[3], &entries[4], &entries[5]);
            assert_eq!(id.determinant().eval_rational(&env).unwrap(), numeric, "{}", id.name);
            assert_eq!(id.claimed.expand().eval_rational(&env).unwrap(), numeric, "{}", id.name);
        }
    }
}

#[test]
fn bareiss_matches_cofactor_on_symbolic_matrix() {
    let v = |n: &str| Polynomial::var(n);
    let k = |n: i64| Polynomial::constant(Rational::integer(n));
    let m: Matrix<Polynomial> = vec![
        vec![v("x"), k(1), v("y")],
        vec![k(0), v("x").mul(&v("y")), k(-2)],
        vec![v("y"), k(3), v("x")],
    ];
    assert_eq!(det_bareiss(&m), det_cofactor(&m));
}

#[test]
fn polynomial_rendering_is_stable() {
    let id = &kempe_identities()[0];
    let text = id.claimed.expand().to_string();
    assert_eq!(text, id.determinant().to_string());
    assert!(!text.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bareiss_matches_cofactor(entries in proptest::collection::vec(rat(), 16)) {
        let m: Matrix<Rational> = entries.chunks(4).map(|r| r.to_vec()).collect();
        prop_assert_eq!(det_bareiss(&m), det_cofactor(&m));
    }

    #[test]
    fn cm3_sign_tracks_area(p in pt(), q in pt(), r in pt()) {
        // cm3 = -16 * area^2 = -4 * cross^2.
        let cross = q.sub(&p).cross(&r.sub(&p));
        let lhs = cm3(&sqdist(&p, &q), &sqdist(&p, &r), &sqdist(&q, &r));
        prop_assert_eq!(lhs, TowerElem::from_rational(Rational::integer(-4)).mul(&cross.square()));
    }

    #[test]
    fn ratio_lemma_on_collinear_points(z in pt(), a in 1i64..9, b in 1i64..9) {
        // A unit direction with rational coordinates keeps a, b rational.
        let u: P = Point::new(Rational::new(3, 5).into(), Rational::new(4, 5).into());
        let (a, b) = (Rational::integer(a), Rational::integer(b));
        let x = z.add(&u.scale_rational(&a));
        let xt = z.add(&u.scale_rational(&(&a + &b)));
        let cert = prop3_verify(&z, &x, &xt, &TowerElem::from(a.clone()), &TowerElem::from(b.clone())).unwrap();
        prop_assert_eq!(cert.ratio, TowerElem::from(&a / &(&a + &b)));
    }

    #[test]
    fn rhombus_lemma(e in pt(), f in pt(), h in rat()) {
        prop_assume!(e != f && !h.is_zero());
        // C, D on the perpendicular bisector of EF, symmetric about the midpoint.
        let mid = e.add(&f).scale_rational(&Rational::new(1, 2));
        let n = f.sub(&e).perp().scale_rational(&h);
        let (c, d) = (mid.add(&n), mid.sub(&n));
        let cert = prop4_verify(&e, &f, &c, &d).unwrap();
        prop_assert_eq!(cert.ec, f.sub(&d));
    }
}
