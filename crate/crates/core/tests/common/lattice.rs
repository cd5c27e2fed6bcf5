//! Random small integer matrices and the lattice-core properties checked on them.

use manin_core::lattice::{
    hnf, hnf_with_transform, is_hnf, quotient_order, snf, IntMatrix, Lattice, QuotientOrder,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn matrix(
    rows: std::ops::RangeInclusive<usize>,
    cols: usize,
    bound: i64,
) -> impl Strategy<Value = IntMatrix> {
    rows.prop_flat_map(move |r| {
        proptest::collection::vec(proptest::collection::vec(-bound..=bound, cols), r)
    })
    .prop_map(move |rs| IntMatrix::from_rows(cols, &rs))
}

/// Unimodular `n x n` matrix built from a sequence of elementary row operations.
pub fn unimodular(n: usize) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec((0..n, 0..n, -3i64..=3, any::<bool>()), 0..=3 * n).prop_map(
        move |ops| {
            let mut u = IntMatrix::identity(n);
            for (a, b, k, neg) in ops {
                if a != b {
                    u.add_row_multiple(a, b, &BigInt::from(k));
                } else if neg {
                    u.negate_row(a);
                }
                if neg && a != b {
                    u.swap_rows(a, b);
                }
            }
            u
        },
    )
}

fn is_unimodular(u: &IntMatrix) -> bool {
    u.is_square() && u.det().abs().is_one()
}

/// `hnf(hnf(a)) == hnf(a)`, the result is in Hermite form, spans the same
/// lattice, and the transform is unimodular with `u * a = [h; 0]`.
pub fn hnf_idempotent(a: &IntMatrix) -> Result<(), TestCaseError> {
    let h = hnf(a);
    prop_assert!(is_hnf(&h));
    prop_assert_eq!(hnf(&h), h.clone());
    let t = hnf_with_transform(a);
    prop_assert_eq!(&t.hnf, &h);
    prop_assert!(is_unimodular(&t.transform));
    let ua = t.transform.mul(a);
    for i in 0..ua.rows() {
        if i < h.rows() {
            prop_assert_eq!(ua.row(i), h.row(i));
        } else {
            prop_assert!(ua.row(i).iter().all(Zero::is_zero));
        }
    }
    let la = Lattice::from_generators(a.cols(), a);
    prop_assert!(h.iter_rows().all(|r| la.contains(r)));
    prop_assert!(a.iter_rows().all(|r| la.contains(r)));
    Ok(())
}

/// `u * a * v == d` with `u`, `v` unimodular and `d` diagonal, nonnegative,
/// each invariant dividing the next.
pub fn snf_recomposes(a: &IntMatrix) -> Result<(), TestCaseError> {
    let s = snf(a);
    prop_assert!(is_unimodular(&s.u));
    prop_assert!(is_unimodular(&s.v));
    prop_assert_eq!(s.u.mul(a).mul(&s.v), s.d.clone());
    for i in 0..s.d.rows() {
        for j in 0..s.d.cols() {
            if i != j {
                prop_assert!(s.d[(i, j)].is_zero());
            }
        }
    }
    let inv = s.invariants();
    prop_assert!(inv.iter().all(|x| !x.is_negative()));
    for w in inv.windows(2) {
        prop_assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
    }
    Ok(())
}

/// The order of `L / M` depends only on the lattices, not on the generators,
/// and for full-rank square bases it equals the ratio of determinants.
pub fn quotient_order_basis_invariant(
    g: &IntMatrix,
    k: &IntMatrix,
    u1: &IntMatrix,
    u2: &IntMatrix,
) -> Result<(), TestCaseError> {
    let n = g.cols();
    let sub_gens = k.mul(g);
    let l = Lattice::from_generators(n, g);
    let m = Lattice::from_generators(n, &sub_gens);
    let l2 = Lattice::from_generators(n, &u1.mul(g));
    let m2 = Lattice::from_generators(n, &u2.mul(&sub_gens));
    let q = quotient_order(&l, &m).unwrap();
    prop_assert_eq!(&q, &quotient_order(&l2, &m2).unwrap());
    if l.rank() == n {
        let expected = if m.rank() == n {
            let (dl, dm) = (l.basis().det().abs(), m.basis().det().abs());
            prop_assert!(dm.is_multiple_of(&dl));
            QuotientOrder::Finite(dm / dl)
        } else {
            QuotientOrder::Infinite
        };
        prop_assert_eq!(&q, &expected);
    }
    Ok(())
}

/// `[A + B : B] == [A : A ∩ B]`.
pub fn second_isomorphism(a: &IntMatrix, b: &IntMatrix) -> Result<(), TestCaseError> {
    let n = a.cols();
    let la = Lattice::from_generators(n, a);
    let lb = Lattice::from_generators(n, b);
    let sum = la.sum(&lb).unwrap();
    let meet = la.intersect(&lb).unwrap();
    prop_assert!(sum.contains_lattice(&la) && sum.contains_lattice(&lb));
    prop_assert!(la.contains_lattice(&meet) && lb.contains_lattice(&meet));
    prop_assert_eq!(
        quotient_order(&sum, &lb).unwrap(),
        quotient_order(&la, &meet).unwrap()
    );
    Ok(())
}

pub fn square_pair(
    n: usize,
) -> impl Strategy<Value = (IntMatrix, IntMatrix, IntMatrix, IntMatrix)> {
    (
        matrix(n..=n, n, 6),
        matrix(n..=n, n, 4),
        unimodular(n),
        unimodular(n),
    )
}

pub fn quotient_case() -> impl Strategy<Value = (IntMatrix, IntMatrix, IntMatrix, IntMatrix)> {
    (1usize..=4).prop_flat_map(square_pair)
}

pub fn pair_case() -> impl Strategy<Value = (IntMatrix, IntMatrix)> {
    (1usize..=4).prop_flat_map(|n| (matrix(1..=n + 1, n, 6), matrix(1..=n + 1, n, 6)))
}

pub fn any_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=5).prop_flat_map(|c| matrix(1..=5, c, 9))
}
