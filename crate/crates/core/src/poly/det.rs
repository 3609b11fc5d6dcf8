use alloc::vec::Vec;

use crate::scalars::{ExactDiv, Ring};

/// Square matrix as a list of rows.
pub type Matrix<R> = Vec<Vec<R>>;

/// Laplace expansion along the first row. Exponential, only meant for the
/// small bordered matrices here and as an oracle for [`det_bareiss`].
pub fn det_cofactor<R: Ring>(m: &Matrix<R>) -> R {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "square matrix expected");
    match n {
        0 => R::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut total = R::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Matrix<R> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = m[0][j].mul(&det_cofactor(&minor));
                total = if j % 2 == 0 { total.add(&term) } else { total.sub(&term) };
            }
            total
        }
    }
}

/// Fraction-free (Bareiss) elimination with row pivoting. Every division is
/// exact in an integral domain.
pub fn det_bareiss<R: ExactDiv>(m: &Matrix<R>) -> R {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "square matrix expected");
    if n == 0 {
        return R::one();
    }
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = R::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return R::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss quotients are exact");
            }
            a[i][k] = R::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        d.neg()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::scalars::Rational;
    use alloc::vec;

    fn r(n: i64) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn small_numeric() {
        let m = vec![vec![r(2), r(1)], vec![r(1), r(3)]];
        assert_eq!(det_cofactor(&m), r(5));
        assert_eq!(det_bareiss(&m), r(5));
        let m = vec![vec![r(0), r(1), r(1)], vec![r(1), r(0), r(1)], vec![r(1), r(1), r(0)]];
        assert_eq!(det_cofactor(&m), r(2));
        assert_eq!(det_bareiss(&m), r(2));
    }

    #[test]
    fn symbolic_two_by_two() {
        let x = Polynomial::var("x");
        let one = Polynomial::one();
        let m = vec![vec![x.clone(), one.clone()], vec![one.clone(), x.clone()]];
        let expect = x.mul(&x).sub(&one);
        assert_eq!(det_bareiss(&m), expect);
        assert_eq!(det_cofactor(&m), expect);
    }

    #[test]
    fn singular_column() {
        let m = vec![vec![r(0), r(1)], vec![r(0), r(3)]];
        assert_eq!(det_bareiss(&m), r(0));
    }
}
