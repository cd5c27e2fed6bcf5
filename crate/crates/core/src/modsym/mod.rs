//! Weight-2 modular symbols for `Γ_0(N)` with integral structure: Manin
//! symbols, the cuspidal lattice, Hecke and Atkin–Lehner operators, degeneracy
//! maps, the new subspace and its rational eigenspaces.

mod cusps;
mod degeneracy;
pub(crate) mod dense;
mod eigen;
mod heilbronn;
mod p1;
mod space;

use thiserror::Error;

pub use cusps::{cusps_equivalent, symbol_between, zero_to_cusp, Cusp, CuspClasses};
pub use degeneracy::{degeneracy_lower, degeneracy_raise, new_subspace, raising_cosets};
pub use eigen::{rational_eigenspaces, RationalNewform};
pub use heilbronn::{heilbronn_cremona, heilbronn_merel};
pub use p1::{lift_to_sl2, P1List};
pub use space::{atkin_lehner_matrix, build_space, HeckeOperator, ModSymSpace, SparseVec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModSymError {
    #[error("{q} does not exactly divide {n}")]
    NotExactDivisor { q: u64, n: u64 },
    #[error("level {m} does not divide {n}")]
    LevelNotDivisor { m: u64, n: u64 },
    #[error("{d} does not divide {n}/{m}")]
    BadDegeneracyDivisor { d: u64, n: u64, m: u64 },
    #[error("Hecke index must be positive")]
    ZeroIndex,
}
