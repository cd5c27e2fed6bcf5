mod common;

use common::lattice::{
    any_matrix, hnf_idempotent, pair_case, quotient_case, quotient_order_basis_invariant,
    second_isomorphism, snf_recomposes,
};
use manin_core::lattice::{
    quotient_invariants, quotient_order, IntMatrix, Lattice, LatticeError, QuotientOrder,
};
use num_bigint::BigInt;
use proptest::prelude::*;

#[test]
fn quotient_examples() {
    let full = Lattice::full(2);
    let sub = Lattice::from_generators(2, &IntMatrix::from_i64(&[&[2, 0], &[0, 3]]));
    assert_eq!(
        quotient_order(&full, &sub),
        Ok(QuotientOrder::Finite(BigInt::from(6)))
    );
    assert_eq!(
        quotient_invariants(&full, &sub),
        Ok(Some(vec![BigInt::from(6)]))
    );
    let line = Lattice::from_generators(2, &IntMatrix::from_i64(&[&[4, 0]]));
    assert_eq!(quotient_order(&full, &line), Ok(QuotientOrder::Infinite));
    assert!(matches!(
        quotient_order(&line, &full),
        Err(LatticeError::InvalidPair(_))
    ));
    assert_eq!(
        quotient_order(&full, &Lattice::full(3)),
        Err(LatticeError::AmbientMismatch(2, 3))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hnf_is_idempotent(a in any_matrix()) {
        hnf_idempotent(&a)?;
    }

    #[test]
    fn snf_recomposition(a in any_matrix()) {
        snf_recomposes(&a)?;
    }

    #[test]
    fn quotient_order_is_basis_invariant((g, k, u1, u2) in quotient_case()) {
        quotient_order_basis_invariant(&g, &k, &u1, &u2)?;
    }

    #[test]
    fn second_isomorphism_index_identity((a, b) in pair_case()) {
        second_isomorphism(&a, &b)?;
    }
}
