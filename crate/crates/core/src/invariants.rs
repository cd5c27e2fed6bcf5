//! Modular degree from the cuspidal lattice, and the 2-adic gap between the
//! degree and the congruence number.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::factor;
use crate::hecke_forms::{isotypic_complement, right_eigenvectors};
use crate::lattice::{hnf, quotient_order, IntMatrix, Lattice, QuotientOrder};
use crate::modsym::{ModSymSpace, RationalNewform};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantsError {
    #[error("lattice index {0} is not a perfect square")]
    NotPerfectSquare(BigInt),
    #[error("L_f + L_perp has infinite index in the cuspidal lattice")]
    InfiniteIndex,
    #[error("projection onto L_f is not multiplication by {0}")]
    SelfCheckFailed(u64),
    #[error("modular degree {degree} does not divide the congruence number {r_f}")]
    DivisibilityViolation { degree: u64, r_f: BigInt },
    #[error("newform level {form} does not match space level {space}")]
    LevelMismatch { form: u64, space: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub level: u64,
    /// Isogeny-class letter(s) of the newform, e.g. `"a"`.
    pub newform: String,
    pub degree: u64,
    /// `#(L / (L_f + L_⊥))`, always `degree²`.
    pub index_used: u64,
}

/// Class letters in base 26: `a..z, ba, bb, ...`.
pub fn class_letters(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// Degree of `X_0(N) -> E_f` for the optimal quotient attached to `f`.
///
/// `newform_index` is the position of `f` in the sorted output of
/// [`crate::modsym::rational_eigenspaces`] and only labels the result.
pub fn modular_degree(
    space: &ModSymSpace,
    f: &RationalNewform,
    newform_index: usize,
) -> Result<DegreeResult, InvariantsError> {
    if space.level() != f.level {
        return Err(InvariantsError::LevelMismatch {
            form: f.level,
            space: space.level(),
        });
    }
    let dim = space.dimension();
    let full = Lattice::full(dim);
    let l_f = &f.eigenspace;
    let l_perp = isotypic_complement(space, f);
    let sum = l_f.sum(&l_perp).expect("same ambient");
    let index = match quotient_order(&full, &sum).expect("sublattice of the full lattice") {
        QuotientOrder::Finite(k) => k,
        QuotientOrder::Infinite => return Err(InvariantsError::InfiniteIndex),
    };
    let root = index.sqrt();
    if &root * &root != index {
        return Err(InvariantsError::NotPerfectSquare(index));
    }
    let degree = root.to_u64().expect("degree fits in u64");

    // L -> L/L_⊥ is v -> v W^T; on that rank-2 quotient, L_f must be exactly deg times the image of L.
    let w = right_eigenvectors(space, f, 2);
    let quotient_map = w.transpose();
    let image_full = hnf(&quotient_map);
    let image_f = hnf(&l_f.basis().mul(&quotient_map));
    if image_f != image_full.scale(&BigInt::from(degree)) {
        return Err(InvariantsError::SelfCheckFailed(degree));
    }
    Ok(DegreeResult {
        level: f.level,
        newform: class_letters(newform_index),
        degree,
        index_used: index.to_u64().expect("index fits in u64"),
    })
}

/// Same computation with `L_f` replaced by its image under `w`; used to check
/// that the degree does not depend on the choice within the Atkin–Lehner orbit.
pub fn degree_with_eigenspace(
    space: &ModSymSpace,
    f: &RationalNewform,
    w: &IntMatrix,
) -> Option<BigInt> {
    let l_f = Lattice::from_generators(space.dimension(), &f.eigenspace.basis().mul(w));
    let l_perp = isotypic_complement(space, f);
    let sum = l_f.sum(&l_perp).ok()?;
    quotient_order(&Lattice::full(space.dimension()), &sum)
        .ok()?
        .finite()
        .cloned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub degree: u64,
    pub r_f: BigInt,
    /// `ord_2(r_f) - ord_2(deg)`.
    pub gap: i64,
    /// Prime factorization of `r_f / deg`.
    pub quotient_factors: Vec<(u64, u32)>,
}

fn ord2(x: &BigInt) -> i64 {
    x.trailing_zeros().map(|t| t as i64).unwrap_or(0)
}

pub fn degree_congruence_gap(
    deg: &DegreeResult,
    r_f: &BigInt,
) -> Result<GapReport, InvariantsError> {
    let d = BigInt::from(deg.degree);
    if d.is_zero() || r_f.is_zero() || !r_f.is_multiple_of(&d) {
        return Err(InvariantsError::DivisibilityViolation {
            degree: deg.degree,
            r_f: r_f.clone(),
        });
    }
    let q = r_f / &d;
    let quotient_factors = if q.is_one() {
        Vec::new()
    } else {
        factor(q.to_u64().expect("r_f/deg fits in u64"))
    };
    Ok(GapReport {
        degree: deg.degree,
        r_f: r_f.clone(),
        gap: ord2(r_f) - ord2(&d),
        quotient_factors,
    })
}
