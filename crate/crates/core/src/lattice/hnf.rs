//! Row-style Hermite normal form and the kernel computations built on it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// Result of a Hermite reduction with the accumulated unimodular transform.
#[derive(Debug, Clone)]
pub struct HermiteDecomposition {
    /// Nonzero rows of the Hermite form, in echelon order.
    pub hnf: IntMatrix,
    /// Pivot column of each row of `hnf`.
    pub pivots: Vec<usize>,
    /// Unimodular `u` with `u * m` equal to `hnf` stacked on top of zero rows.
    pub transform: IntMatrix,
}

fn reduce(m: &IntMatrix, track: bool) -> (IntMatrix, Vec<usize>, Option<IntMatrix>) {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut u = track.then(|| IntMatrix::identity(rows));
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut found = false;
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                let x = &a[(i, c)];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some(b) if a[(b, c)].magnitude() <= x.magnitude() => {}
                    _ => best = Some(i),
                }
            }
            let Some(p) = best else { break };
            found = true;
            a.swap_rows(p, r);
            if let Some(u) = u.as_mut() {
                u.swap_rows(p, r);
            }
            let mut clean = true;
            for i in r + 1..rows {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let q = -a[(i, c)].div_floor(&a[(r, c)]);
                a.add_row_multiple(i, r, &q);
                if let Some(u) = u.as_mut() {
                    u.add_row_multiple(i, r, &q);
                }
                if !a[(i, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if a[(r, c)].is_negative() {
            a.negate_row(r);
            if let Some(u) = u.as_mut() {
                u.negate_row(r);
            }
        }
        for i in 0..r {
            if a[(i, c)].is_zero() {
                continue;
            }
            let q = -a[(i, c)].div_floor(&a[(r, c)]);
            a.add_row_multiple(i, r, &q);
            if let Some(u) = u.as_mut() {
                u.add_row_multiple(i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let idx: Vec<usize> = (0..r).collect();
    (a.select_rows(&idx), pivots, u)
}

/// Row Hermite normal form: same integer row span, zero rows removed, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`.
pub fn hnf(m: &IntMatrix) -> IntMatrix {
    reduce(m, false).0
}

/// Hermite form together with pivot columns.
pub fn hnf_with_pivots(m: &IntMatrix) -> (IntMatrix, Vec<usize>) {
    let (h, p, _) = reduce(m, false);
    (h, p)
}

pub fn hnf_with_transform(m: &IntMatrix) -> HermiteDecomposition {
    let (hnf, pivots, u) = reduce(m, true);
    HermiteDecomposition {
        hnf,
        pivots,
        transform: u.expect("transform tracked"),
    }
}

pub fn rank(m: &IntMatrix) -> usize {
    reduce(m, false).1.len()
}

/// Saturated basis (in Hermite form) of `{x : x * m = 0}`.
pub fn left_kernel(m: &IntMatrix) -> IntMatrix {
    let rows = m.rows();
    if m.cols() == 0 {
        return IntMatrix::identity(rows);
    }
    let dec = hnf_with_transform(m);
    let r = dec.pivots.len();
    let idx: Vec<usize> = (r..rows).collect();
    let ker = dec.transform.select_rows(&idx);
    if ker.rows() == 0 {
        return IntMatrix::zeros(0, rows);
    }
    hnf(&ker)
}

/// Saturated basis of `{w : m * w^T = 0}`, returned as rows.
pub fn right_kernel(m: &IntMatrix) -> IntMatrix {
    if m.rows() == 0 {
        return IntMatrix::identity(m.cols());
    }
    left_kernel(&m.transpose())
}

/// Coordinates of `v` with respect to the rows of a Hermite basis, if `v` lies in
/// the integer row span.
pub fn solve_in_hnf(basis: &IntMatrix, pivots: &[usize], v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coords = Vec::with_capacity(basis.rows());
    for (k, &c) in pivots.iter().enumerate() {
        let p = &basis[(k, c)];
        let (q, r) = rest[c].div_rem(p);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (x, b) in rest.iter_mut().zip(basis.row(k)) {
                if !b.is_zero() {
                    *x -= &q * b;
                }
            }
        }
        coords.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coords)
}

/// Pivot columns of a matrix already in Hermite form.
pub fn hnf_pivots(h: &IntMatrix) -> Vec<usize> {
    h.iter_rows()
        .map(|r| {
            r.iter()
                .position(|x| !x.is_zero())
                .expect("zero row in Hermite basis")
        })
        .collect()
}

pub fn is_hnf(h: &IntMatrix) -> bool {
    let mut last: Option<usize> = None;
    for (i, r) in h.iter_rows().enumerate() {
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        if last.is_some_and(|l| p <= l) || !r[p].is_positive() {
            return false;
        }
        for k in 0..i {
            let x = &h[(k, p)];
            if x.is_negative() || x >= &r[p] {
                return false;
            }
        }
        last = Some(p);
    }
    true
}

/// Greatest common divisor of a slice, nonnegative.
pub fn content(v: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
        if g.is_one() {
            break;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn hnf_identity_and_zero() {
        assert_eq!(hnf(&IntMatrix::identity(2)), IntMatrix::identity(2));
        assert_eq!(hnf(&m(&[&[0, 0], &[0, 0]])).rows(), 0);
    }

    #[test]
    fn hnf_small_example() {
        assert_eq!(hnf(&m(&[&[2, 4], &[6, 8]])), m(&[&[2, 0], &[0, 4]]));
    }

    #[test]
    fn transform_reproduces_form() {
        let a = m(&[&[3, 5, 7], &[6, 10, 14], &[1, 0, 2], &[4, 4, 4]]);
        let dec = hnf_with_transform(&a);
        let full = dec.transform.mul(&a);
        for i in 0..dec.hnf.rows() {
            assert_eq!(full.row(i), dec.hnf.row(i));
        }
        for i in dec.hnf.rows()..a.rows() {
            assert!(full.row(i).iter().all(Zero::is_zero));
        }
        assert_eq!(dec.transform.det().magnitude(), BigInt::one().magnitude());
        assert!(is_hnf(&dec.hnf));
    }

    #[test]
    fn kernels() {
        let a = m(&[&[1, 2], &[2, 4], &[0, 1]]);
        let k = left_kernel(&a);
        assert_eq!(k, m(&[&[2, -1, 0]]));
        let r = right_kernel(&m(&[&[2, 4, 6]]));
        assert_eq!(r.rows(), 2);
        for row in r.iter_rows() {
            let dot: BigInt = row[0].clone() * 2 + &row[1] * 4 + &row[2] * 6;
            assert!(dot.is_zero());
        }
        // saturation: (1,1,-1) lies in the kernel and must be integral in the basis
        let h = hnf(&r);
        let piv = hnf_pivots(&h);
        assert!(solve_in_hnf(&h, &piv, &[1.into(), 1.into(), (-1).into()]).is_some());
    }

    #[test]
    fn solve_rejects_outside_vectors() {
        let h = m(&[&[2, 0], &[0, 4]]);
        let piv = hnf_pivots(&h);
        assert_eq!(
            solve_in_hnf(&h, &piv, &[4.into(), 8.into()]),
            Some(vec![2.into(), 2.into()])
        );
        assert_eq!(solve_in_hnf(&h, &piv, &[1.into(), 0.into()]), None);
    }
}
