//! Splitting the new subspace into rational Hecke eigenspaces.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::dense::{self, SmallMat};
use super::{new_subspace, ModSymSpace};
use crate::arith::{factor, primes_up_to};
use crate::hecke_forms::sturm_bound;
use crate::lattice::{left_kernel, IntMatrix, Lattice};

/// A rational newform seen through its rank-2 eigenspace in the cuspidal
/// lattice. `eigenspace` is in cuspidal coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalNewform {
    pub level: u64,
    pub ap: BTreeMap<u64, i64>,
    pub eigenspace: Lattice,
    /// Atkin–Lehner eigenvalue for each prime power exactly dividing the level.
    pub sign_w: BTreeMap<u64, i64>,
}

impl RationalNewform {
    /// Eigenvalues in increasing prime order, the canonical sort key.
    pub fn ap_sequence(&self) -> Vec<i64> {
        self.ap.values().copied().collect()
    }

    pub fn ap(&self, p: u64) -> Option<i64> {
        self.ap.get(&p).copied()
    }

    /// Sign of the functional equation, `-w_N`.
    pub fn root_number(&self) -> i64 {
        -self.sign_w.values().product::<i64>()
    }
}

const MOD: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

/// Whether `det(m) ≡ 0` modulo a 61-bit prime; a `false` answer proves `det(m) != 0`.
fn det_vanishes_mod_prime(m: &[Vec<BigInt>]) -> bool {
    let n = m.len();
    let modulus = BigInt::from(MOD);
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let y = ((x % &modulus) + &modulus) % &modulus;
                    y.to_u64().expect("reduced residue")
                })
                .collect()
        })
        .collect();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| a[i][c] != 0) else {
            return true;
        };
        a.swap(c, p);
        let inv = powmod(a[c][c], MOD - 2);
        for i in c + 1..n {
            if a[i][c] == 0 {
                continue;
            }
            let f = mulmod(a[i][c], inv);
            for j in c..n {
                let s = mulmod(f, a[c][j]);
                a[i][j] = (a[i][j] + MOD - s) % MOD;
            }
        }
    }
    false
}

/// Matrix of `t` restricted to the sublattice `piece` (given in coordinates of
/// the space `t` acts on), written in the Hermite basis of `piece`.
pub(crate) fn restrict_to_piece(piece: &Lattice, t: &SmallMat) -> IntMatrix {
    let rows: Vec<Vec<BigInt>> = piece
        .basis()
        .iter_rows()
        .map(|b| {
            let b: Vec<i64> = b.iter().map(|x| x.to_i64().expect("small basis")).collect();
            let img = dense::big_row(&dense::vec_mul(&b, t));
            piece
                .coordinates(&img)
                .expect("operator does not preserve the sublattice")
        })
        .collect();
    IntMatrix::from_rows(piece.rank(), &rows)
}

/// Scalar by which `m` acts, if it is a scalar matrix.
fn scalar_of(m: &IntMatrix) -> Option<i64> {
    let n = m.rows();
    let a = m[(0, 0)].to_i64()?;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { a } else { 0 };
            if m[(i, j)] != BigInt::from(want) {
                return None;
            }
        }
    }
    Some(a)
}

fn candidates(p: u64, level: u64) -> Vec<i64> {
    if level % p == 0 {
        return vec![-1, 0, 1];
    }
    let bound = (2.0 * (p as f64).sqrt()).floor() as i64;
    (-bound..=bound).collect()
}

/// Splits `piece` by the rational eigenvalues of `t` from `cands`, keeping the
/// eigen-sublattices of rank at least 2.
fn split(piece: &Lattice, t: &SmallMat, cands: &[i64]) -> Vec<(i64, Lattice)> {
    let local = restrict_to_piece(piece, t);
    if let Some(a) = scalar_of(&local) {
        return if cands.contains(&a) {
            vec![(a, piece.clone())]
        } else {
            Vec::new()
        };
    }
    let k = piece.rank();
    let mut out = Vec::new();
    for &a in cands {
        let shifted = local.sub_scalar(&BigInt::from(a));
        if !det_vanishes_mod_prime(&shifted.to_rows()) {
            continue;
        }
        let ker = left_kernel(&shifted);
        if ker.rows() < 2 {
            continue;
        }
        let sub = Lattice::from_generators(piece.ambient_rank(), &ker.mul(piece.basis()));
        debug_assert!(sub.rank() <= k);
        out.push((a, sub));
    }
    out
}

/// Simultaneous eigenspaces with integer eigenvalues in the new subspace, each of
/// rank 2, ordered lexicographically by `(a_2, a_3, a_5, ...)`.
pub fn rational_eigenspaces(space: &ModSymSpace) -> Vec<RationalNewform> {
    let n = space.level();
    let new = new_subspace(space);
    if new.is_zero() {
        return Vec::new();
    }
    let mut pieces: Vec<(BTreeMap<u64, i64>, Lattice)> = vec![(BTreeMap::new(), new)];
    // splitting needs primes up to the Sturm bound; a few more are recorded
    let recorded = sturm_bound(n) + 10;
    for p in primes_up_to(recorded) {
        let t = space.hecke_small(p);
        let cands = if p <= sturm_bound(n) {
            candidates(p, n)
        } else {
            (-(2 * p as i64)..=2 * p as i64).collect()
        };
        let mut next = Vec::new();
        for (ap, piece) in pieces {
            for (a, sub) in split(&piece, &t, &cands) {
                let mut ap = ap.clone();
                ap.insert(p, a);
                next.push((ap, sub));
            }
        }
        pieces = next;
        if pieces.is_empty() {
            break;
        }
    }
    let powers: Vec<u64> = factor(n).into_iter().map(|(p, e)| p.pow(e)).collect();
    let w_mats: Vec<(u64, SmallMat)> = powers
        .iter()
        .map(|&q| {
            (
                q,
                space
                    .atkin_lehner_small(q)
                    .expect("prime power exactly divides N"),
            )
        })
        .collect();
    let mut out: Vec<RationalNewform> = pieces
        .into_iter()
        .map(|(ap, eigenspace)| {
            assert_eq!(
                eigenspace.rank(),
                2,
                "eigenvalues up to the Sturm bound do not isolate a newform at level {n}"
            );
            let sign_w = w_mats
                .iter()
                .map(|(q, w)| {
                    let s = scalar_of(&restrict_to_piece(&eigenspace, w))
                        .expect("Atkin-Lehner acts by a scalar");
                    (*q, s)
                })
                .collect();
            RationalNewform {
                level: n,
                ap,
                eigenspace,
                sign_w,
            }
        })
        .collect();
    out.sort_by_key(|f| f.ap_sequence());
    out
}
