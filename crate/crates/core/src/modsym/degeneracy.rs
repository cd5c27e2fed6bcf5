//! Degeneracy maps between levels and the new subspace.

use num_bigint::BigInt;

use super::dense::{self, SmallMat};
use super::{ModSymError, ModSymSpace};
use crate::arith::{factor, gamma0_index, gcd, xgcd};
use crate::lattice::{left_kernel, IntMatrix, Lattice};

fn check_levels(n: u64, m: u64, d: u64) -> Result<(), ModSymError> {
    if m == 0 || n % m != 0 {
        return Err(ModSymError::LevelNotDivisor { m, n });
    }
    if d == 0 || (n / m) % d != 0 {
        return Err(ModSymError::BadDegeneracyDivisor { d, n, m });
    }
    Ok(())
}

pub(crate) fn lower_small(
    src: &ModSymSpace,
    target: &ModSymSpace,
    d: u64,
) -> Result<SmallMat, ModSymError> {
    check_levels(src.level(), target.level(), d)?;
    let amb = src.ambient_cusp_action(target, &[[d as i64, 0, 0, 1]]);
    Ok(src.restrict_to_cuspidal(&amb, target))
}

/// Level-lowering map `L_N -> L_M` induced by `{α, β} -> {dα, dβ}`, as a
/// `2g(N) x 2g(M)` matrix in the cuspidal bases.
pub fn degeneracy_lower(
    src: &ModSymSpace,
    target: &ModSymSpace,
    d: u64,
) -> Result<IntMatrix, ModSymError> {
    Ok(dense::to_int_matrix(
        &lower_small(src, target, d)?,
        target.dimension(),
    ))
}

/// Right coset representatives of `Γ_d = {γ : d | b, (N/d) | c}` in `Γ_0(M)`.
pub fn raising_cosets(n: u64, m: u64, d: u64) -> Vec<[i64; 4]> {
    let count = (gamma0_index(n) / gamma0_index(m)) as usize;
    let (ni, mi, di) = (n as i64, m as i64, d as i64);
    let in_gamma_d = |g: [i64; 4]| g[1] % di == 0 && g[2] % (ni / di) == 0;
    let mut reps: Vec<[i64; 4]> = Vec::new();
    let mut bound = 1i64;
    while reps.len() < count {
        for t in 0..=bound {
            let c = mi * t;
            for e in -bound..=bound {
                if gcd(c, e) != 1 {
                    continue;
                }
                let (_, x, y) = xgcd(e, c);
                // x*e + y*c = 1 => [[x, -y], [c, e]] has determinant 1
                for j in 0..di.max(1) * (ni / mi) {
                    let g = [x + j * c, -y + j * e, c, e];
                    // γ1 ~ γ2 iff γ1 γ2^{-1} ∈ Γ_d
                    let new = reps.iter().all(|r| {
                        let inv = [r[3], -r[1], -r[2], r[0]];
                        !in_gamma_d(mat_mul(g, inv))
                    });
                    if new {
                        reps.push(g);
                        if reps.len() == count {
                            return reps;
                        }
                    }
                }
            }
        }
        bound *= 2;
        assert!(bound < 1 << 20, "coset search did not terminate");
    }
    reps
}

fn mat_mul(a: [i64; 4], b: [i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Level-raising map `L_M -> L_N`, `x -> sum over Γ_d \ Γ_0(M) of δ_d^{-1} γ x`.
/// Composed with [`degeneracy_lower`] for the same `d` it is multiplication by
/// `[Γ_0(M) : Γ_d] = μ(N)/μ(M)`.
pub fn degeneracy_raise(
    src: &ModSymSpace,
    target: &ModSymSpace,
    d: u64,
) -> Result<IntMatrix, ModSymError> {
    check_levels(target.level(), src.level(), d)?;
    let mats: Vec<[i64; 4]> = raising_cosets(target.level(), src.level(), d)
        .into_iter()
        .map(|g| [g[0], g[1], g[2] * d as i64, g[3] * d as i64])
        .collect();
    let amb = src.ambient_cusp_action(target, &mats);
    Ok(dense::to_int_matrix(
        &src.restrict_to_cuspidal(&amb, target),
        target.dimension(),
    ))
}

/// Saturated sublattice of `L` (in cuspidal coordinates) cut out by the kernels
/// of both lowering maps to every level `N/p`.
pub fn new_subspace(space: &ModSymSpace) -> Lattice {
    let n = space.level();
    let dim = space.dimension();
    let mut blocks: Vec<SmallMat> = Vec::new();
    for (p, _) in factor(n) {
        let lower = ModSymSpace::new(n / p);
        if lower.dimension() == 0 {
            continue;
        }
        for d in [1, p] {
            blocks.push(lower_small(space, &lower, d).expect("valid degeneracy data"));
        }
    }
    if blocks.is_empty() {
        return Lattice::full(dim);
    }
    let rows: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            blocks
                .iter()
                .flat_map(|b| b[i].iter().map(|&x| BigInt::from(x)))
                .collect()
        })
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    let ker = left_kernel(&IntMatrix::from_rows(width, &rows));
    Lattice::from_generators(dim, &ker)
}
