//! Exact integer linear algebra: matrices, Hermite and Smith forms, and lattices
//! stored in canonical Hermite form.

mod hnf;
mod matrix;
mod snf;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hnf::{
    content, hnf, hnf_pivots, hnf_with_pivots, hnf_with_transform, is_hnf, left_kernel, rank,
    right_kernel, solve_in_hnf, HermiteDecomposition,
};
pub use matrix::IntMatrix;
pub use snf::{snf, SmithDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("ambient rank mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("invalid lattice pair: {0}")]
    InvalidPair(&'static str),
    #[error("vector of length {got} does not live in ambient rank {expected}")]
    BadVector { expected: usize, got: usize },
}

/// Order of a quotient of lattices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientOrder {
    Finite(BigInt),
    Infinite,
}

impl QuotientOrder {
    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            QuotientOrder::Finite(n) => Some(n),
            QuotientOrder::Infinite => None,
        }
    }
}

impl fmt::Display for QuotientOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientOrder::Finite(n) => write!(f, "{n}"),
            QuotientOrder::Infinite => write!(f, "infinite"),
        }
    }
}

/// A free sublattice of `Z^ambient_rank`, kept in Hermite normal form so that
/// equal lattices have equal bases.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    ambient_rank: usize,
    basis: IntMatrix,
    #[serde(skip)]
    pivots: Vec<usize>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Lattice(rank {} in Z^{}: {:?})",
            self.rank(),
            self.ambient_rank,
            self.basis
        )
    }
}

impl Lattice {
    /// Lattice spanned by the rows of `generators`.
    pub fn from_generators(ambient_rank: usize, generators: &IntMatrix) -> Self {
        if generators.rows() == 0 {
            return Self::zero(ambient_rank);
        }
        assert_eq!(
            generators.cols(),
            ambient_rank,
            "generator length must equal ambient rank"
        );
        let (basis, pivots) = hnf_with_pivots(generators);
        Lattice {
            ambient_rank,
            basis,
            pivots,
        }
    }

    pub fn from_rows(ambient_rank: usize, rows: &[Vec<BigInt>]) -> Self {
        Self::from_generators(ambient_rank, &IntMatrix::from_rows(ambient_rank, rows))
    }

    pub fn zero(ambient_rank: usize) -> Self {
        Lattice {
            ambient_rank,
            basis: IntMatrix::zeros(0, ambient_rank),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient_rank: usize) -> Self {
        Lattice {
            ambient_rank,
            basis: IntMatrix::identity(ambient_rank),
            pivots: (0..ambient_rank).collect(),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// Integer coordinates of `v` in the Hermite basis, or `None` if `v` is not
    /// in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient_rank);
        solve_in_hnf(&self.basis, &self.pivots, v)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter_rows().all(|r| self.contains(r))
    }

    /// Rational coordinates of `v` in the Hermite basis, if `v` lies in the
    /// rational span.
    pub fn rational_coordinates(&self, v: &[BigInt]) -> Option<Vec<BigRational>> {
        let mut rest: Vec<BigRational> = v
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        let mut coords = Vec::with_capacity(self.rank());
        for (k, &c) in self.pivots.iter().enumerate() {
            let q = &rest[c] / BigRational::from_integer(self.basis[(k, c)].clone());
            if !q.is_zero() {
                for (x, b) in rest.iter_mut().zip(self.basis.row(k)) {
                    if !b.is_zero() {
                        *x -= &q * BigRational::from_integer(b.clone());
                    }
                }
            }
            coords.push(q);
        }
        rest.iter().all(Zero::is_zero).then_some(coords)
    }

    pub fn in_rational_span(&self, v: &[BigInt]) -> bool {
        self.rational_coordinates(v).is_some()
    }

    /// Coordinates of every basis row of `sub` in this lattice's basis.
    pub fn coordinate_matrix(&self, sub: &Lattice) -> Option<IntMatrix> {
        let mut rows = Vec::with_capacity(sub.rank());
        for r in sub.basis.iter_rows() {
            rows.push(self.coordinates(r)?);
        }
        Some(IntMatrix::from_rows(self.rank(), &rows))
    }

    /// Smallest lattice containing `self` with torsion-free quotient in
    /// `Z^n ∩ span(self)`.
    pub fn saturate(&self) -> Lattice {
        if self.is_zero() {
            return self.clone();
        }
        let perp = right_kernel(&self.basis);
        if perp.rows() == 0 {
            return Lattice::full(self.ambient_rank);
        }
        let sat = left_kernel(&perp.transpose());
        Lattice::from_generators(self.ambient_rank, &sat)
    }

    pub fn is_saturated(&self) -> bool {
        self.saturate() == *self
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        self.check_ambient(other)?;
        Ok(Lattice::from_generators(
            self.ambient_rank,
            &self.basis.vstack(&other.basis),
        ))
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Lattice::zero(self.ambient_rank));
        }
        // x*A = y*B  <=>  (x | -y) [A; B] = 0
        let stacked = self.basis.vstack(&other.basis);
        let ker = left_kernel(&stacked);
        if ker.rows() == 0 {
            return Ok(Lattice::zero(self.ambient_rank));
        }
        let idx: Vec<usize> = (0..self.rank()).collect();
        let xs = ker.select_cols(&idx);
        Ok(Lattice::from_generators(
            self.ambient_rank,
            &xs.mul(&self.basis),
        ))
    }

    /// Image of the lattice under `v -> v * m`.
    pub fn image(&self, m: &IntMatrix) -> Lattice {
        assert_eq!(m.rows(), self.ambient_rank);
        Lattice::from_generators(m.cols(), &self.basis.mul(m))
    }

    pub fn scale(&self, k: &BigInt) -> Lattice {
        Lattice::from_generators(self.ambient_rank, &self.basis.scale(k))
    }

    fn check_ambient(&self, other: &Lattice) -> Result<(), LatticeError> {
        if self.ambient_rank != other.ambient_rank {
            return Err(LatticeError::AmbientMismatch(
                self.ambient_rank,
                other.ambient_rank,
            ));
        }
        Ok(())
    }
}

/// Order of `sup / sub`, computed from the Smith form of the inclusion matrix.
pub fn quotient_order(sup: &Lattice, sub: &Lattice) -> Result<QuotientOrder, LatticeError> {
    quotient_invariants(sup, sub).map(|inv| match inv {
        None => QuotientOrder::Infinite,
        Some(v) => QuotientOrder::Finite(v.iter().fold(BigInt::one(), |acc, x| acc * x)),
    })
}

/// Invariant factors of `sup / sub` (only the non-unit ones), or `None` when the
/// quotient is infinite.
pub fn quotient_invariants(
    sup: &Lattice,
    sub: &Lattice,
) -> Result<Option<Vec<BigInt>>, LatticeError> {
    sup.check_ambient(sub)?;
    for r in sub.basis.iter_rows() {
        if !sup.in_rational_span(r) {
            return Err(LatticeError::InvalidPair(
                "sub is not contained in the rational span of sup",
            ));
        }
    }
    let Some(inclusion) = sup.coordinate_matrix(sub) else {
        return Err(LatticeError::InvalidPair("sub is not a sublattice of sup"));
    };
    if sub.rank() < sup.rank() {
        return Ok(None);
    }
    if sup.rank() == 0 {
        return Ok(Some(Vec::new()));
    }
    let s = snf(&inclusion);
    Ok(Some(
        s.invariants()
            .into_iter()
            .map(|x| x.abs())
            .filter(|x| !x.is_one())
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: usize, rows: &[&[i64]]) -> Lattice {
        Lattice::from_generators(n, &IntMatrix::from_i64(rows))
    }

    #[test]
    fn saturate_examples() {
        assert_eq!(lat(2, &[&[2, 0]]).saturate(), lat(2, &[&[1, 0]]));
        let s = lat(3, &[&[1, 1, 0], &[0, 0, 1]]);
        assert_eq!(s.saturate(), s);
        // {(2,2),(0,4)} has full rank in Z^2, so its saturation is all of Z^2.
        // (The index-2 lattice {(1,1),(0,2)} still has Z/2 torsion in the quotient.)
        assert_eq!(lat(2, &[&[2, 2], &[0, 4]]).saturate(), Lattice::full(2));
        assert_eq!(
            lat(3, &[&[2, 2, 0], &[0, 4, 6]]).saturate(),
            lat(3, &[&[1, 1, 0], &[0, 2, 3]])
        );
    }

    #[test]
    fn quotient_orders() {
        let z2 = Lattice::full(2);
        let two = lat(2, &[&[2, 0], &[0, 2]]);
        assert_eq!(
            quotient_order(&z2, &two).unwrap(),
            QuotientOrder::Finite(4.into())
        );
        assert_eq!(
            quotient_order(&z2, &z2).unwrap(),
            QuotientOrder::Finite(1.into())
        );
        assert_eq!(
            quotient_order(&z2, &lat(2, &[&[1, 0]])).unwrap(),
            QuotientOrder::Infinite
        );
        let line = lat(2, &[&[1, 0]]);
        assert!(matches!(
            quotient_order(&line, &lat(2, &[&[0, 1]])),
            Err(LatticeError::InvalidPair(_))
        ));
        assert!(matches!(
            quotient_order(&z2, &Lattice::full(3)),
            Err(LatticeError::AmbientMismatch(2, 3))
        ));
    }

    #[test]
    fn sum_and_intersection() {
        let a = lat(2, &[&[2, 0], &[0, 2]]);
        assert_eq!(a.sum(&a).unwrap(), a);
        assert_eq!(a.intersect(&a).unwrap(), a);
        let s = a.sum(&lat(2, &[&[1, 1]])).unwrap();
        assert_eq!(s, lat(2, &[&[1, 1], &[0, 2]]));
        assert_eq!(
            quotient_order(&Lattice::full(2), &s).unwrap(),
            QuotientOrder::Finite(2.into())
        );
        let three = lat(2, &[&[3, 0], &[0, 3]]);
        assert_eq!(a.intersect(&three).unwrap(), lat(2, &[&[6, 0], &[0, 6]]));
        assert!(a.sum(&Lattice::full(3)).is_err());
    }

    #[test]
    fn invariants_of_quotient() {
        let z2 = Lattice::full(2);
        let sub = lat(2, &[&[2, 0], &[0, 6]]);
        assert_eq!(
            quotient_invariants(&z2, &sub).unwrap(),
            Some(vec![2.into(), 6.into()])
        );
    }
}
