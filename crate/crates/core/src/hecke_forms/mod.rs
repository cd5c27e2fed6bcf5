//! q-expansions of rational newforms, the integral cusp-form lattice and
//! congruence numbers.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor, gamma0_index, is_prime, primes_up_to};
use crate::lattice::{
    hnf_with_pivots, left_kernel, rank, right_kernel, solve_in_hnf, IntMatrix, Lattice,
};
use crate::modsym::dense::{self, SmallMat};
use crate::modsym::{heilbronn_cremona, heilbronn_merel, ModSymSpace};

pub use crate::modsym::RationalNewform;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeFormsError {
    #[error("precision {precision} is below the Sturm bound {sturm}")]
    PrecisionBelowSturm { precision: u64, sturm: u64 },
    #[error("a_{0} is not known for this newform")]
    MissingAp(u64),
    #[error("newform level {form} does not match space level {space}")]
    LevelMismatch { form: u64, space: u64 },
    #[error("index must be positive")]
    ZeroIndex,
}

/// `ceil(μ(N)/6)`: coefficients `a_1..a_B` determine a weight-2 form on `Γ_0(N)`.
pub fn sturm_bound(n: u64) -> u64 {
    gamma0_index(n).div_ceil(6)
}

/// Default q-expansion precision.
pub fn default_precision(n: u64) -> u64 {
    sturm_bound(n) + 10
}

/// `a_n` from prime eigenvalues: multiplicative, with
/// `a_{p^r} = a_p a_{p^{r-1}} - p a_{p^{r-2}}` for `p ∤ N` and `a_{p^r} = a_p^r` for `p | N`.
pub fn an_from_ap(
    level: u64,
    n: u64,
    ap: impl Fn(u64) -> Option<i64>,
) -> Result<i64, HeckeFormsError> {
    if n == 0 {
        return Err(HeckeFormsError::ZeroIndex);
    }
    let mut out: i128 = 1;
    for (p, e) in factor(n) {
        let a = ap(p).ok_or(HeckeFormsError::MissingAp(p))? as i128;
        let mut prev: i128 = 1;
        let mut cur: i128 = a;
        for _ in 1..e {
            let next = if level % p == 0 {
                cur * a
            } else {
                a * cur - p as i128 * prev
            };
            prev = cur;
            cur = next;
        }
        out *= cur;
    }
    Ok(dense::narrow(out))
}

/// `a_n` of `f` using the eigenvalues recorded on it.
pub fn extend_an(f: &RationalNewform, n: u64) -> Result<i64, HeckeFormsError> {
    an_from_ap(f.level, n, |p| f.ap(p))
}

fn good_primes(n: u64) -> impl Iterator<Item = u64> {
    (2..).filter(move |&p| is_prime(p) && n % p != 0)
}

/// Columns spanning the right eigenvectors `T_p w = a_p w` (good `p`) of `f` in
/// cuspidal coordinates, as rows of the returned matrix.
pub(crate) fn right_eigenvectors(
    space: &ModSymSpace,
    f: &RationalNewform,
    target_rank: usize,
) -> IntMatrix {
    let dim = space.dimension();
    let mut stack = IntMatrix::zeros(0, dim);
    for p in good_primes(space.level()).take(200) {
        let t = space.hecke_small(p);
        let a = f.ap(p).unwrap_or_else(|| eigenvalue_on(&f.eigenspace, &t));
        stack = stack.vstack(&dense::to_int_matrix(&dense::sub_identity(&t, a), dim));
        let w = right_kernel(&stack);
        if w.rows() == target_rank {
            return w;
        }
    }
    panic!(
        "good Hecke operators do not isolate the newform at level {}",
        space.level()
    );
}

fn eigenvalue_on(eigenspace: &Lattice, t: &SmallMat) -> i64 {
    let b: Vec<i64> = eigenspace
        .basis()
        .row(0)
        .iter()
        .map(|x| x.to_i64().expect("small basis"))
        .collect();
    let img = dense::vec_mul(&b, t);
    let k = b
        .iter()
        .position(|x| *x != 0)
        .expect("nonzero basis vector");
    img[k] / b[k]
}

/// `L_⊥ = L ∩ V_f^⊥`: the saturated Hecke complement of `f` in the cuspidal
/// lattice, in cuspidal coordinates.
pub fn isotypic_complement(space: &ModSymSpace, f: &RationalNewform) -> Lattice {
    let dim = space.dimension();
    let w = right_eigenvectors(space, f, 2);
    Lattice::from_generators(dim, &left_kernel(&w.transpose()))
}

/// A linear functional on the full modular-symbol space that is an eigenvector
/// for the dual Hecke action with the eigenvalues of `f`. It yields `a_p` for
/// arbitrary `p` from a single Manin symbol.
pub struct EigenFunctional<'a> {
    space: &'a ModSymSpace,
    level: u64,
    weights: Vec<i64>,
    probe: usize,
    cache: Mutex<BTreeMap<u64, i64>>,
}

impl<'a> EigenFunctional<'a> {
    pub fn new(space: &'a ModSymSpace, f: &RationalNewform) -> Result<Self, HeckeFormsError> {
        if space.level() != f.level {
            return Err(HeckeFormsError::LevelMismatch {
                form: f.level,
                space: space.level(),
            });
        }
        let r = space.ambient_rank();
        let mut stack = IntMatrix::zeros(0, r);
        let mut weights: Option<Vec<i64>> = None;
        for p in good_primes(space.level()).take(200) {
            let a = match f.ap(p) {
                Some(a) => a,
                None => eigenvalue_on(&f.eigenspace, &space.hecke_small(p)),
            };
            let amb = space.ambient_hecke_prime(p);
            stack = stack.vstack(&dense::to_int_matrix(&dense::sub_identity(&amb, a), r));
            let w = right_kernel(&stack);
            if w.rows() == 2 {
                weights = Some(
                    w.row(0)
                        .iter()
                        .map(|x| x.to_i64().expect("small eigenvector"))
                        .collect(),
                );
                break;
            }
        }
        let weights = weights.expect("good Hecke operators do not isolate the newform");
        // a Manin symbol on which the functional does not vanish
        let probe = (0..space.num_symbols())
            .find(|&i| {
                space
                    .symbol_coordinates(i)
                    .iter()
                    .map(|&(j, c)| c as i128 * weights[j] as i128)
                    .sum::<i128>()
                    != 0
            })
            .expect("eigenfunctional vanishes on every symbol");
        let cache = Mutex::new(f.ap.clone());
        Ok(EigenFunctional {
            space,
            level: f.level,
            weights,
            probe,
            cache,
        })
    }

    fn value(&self, c: i64, d: i64) -> i128 {
        match self.space.p1().index(c, d) {
            None => 0,
            Some(i) => self
                .space
                .symbol_coordinates(i)
                .iter()
                .map(|&(j, x)| x as i128 * self.weights[j] as i128)
                .sum(),
        }
    }

    /// `a_p` for a prime `p`.
    pub fn ap(&self, p: u64) -> i64 {
        if let Some(a) = self.cache.lock().expect("ap cache poisoned").get(&p) {
            return *a;
        }
        let mats = if self.level % p == 0 {
            heilbronn_merel(p)
        } else {
            heilbronn_cremona(p)
        };
        let (c, d) = self.space.p1().point(self.probe);
        let n = self.level as i64;
        let denom = self.value(c, d);
        let mut num: i128 = 0;
        for h in &mats {
            num += self.value(
                (c * h[0] + d * h[2]).rem_euclid(n),
                (c * h[1] + d * h[3]).rem_euclid(n),
            );
        }
        assert_eq!(num % denom, 0, "non-integral eigenvalue a_{p}");
        let a = dense::narrow(num / denom);
        self.cache.lock().expect("ap cache poisoned").insert(p, a);
        a
    }

    /// `a_n` for `n` in `1..=n_max` (index 0 is unused and set to 0).
    pub fn coefficients(&self, n_max: usize) -> Vec<i64> {
        let primes = primes_up_to(n_max as u64);
        let ap: BTreeMap<u64, i64> = primes.iter().map(|&p| (p, self.ap(p))).collect();
        let mut out = vec![0i64; n_max + 1];
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = an_from_ap(self.level, n as u64, |p| ap.get(&p).copied())
                .expect("all primes computed");
        }
        out
    }
}

/// The Hecke algebra `T ⊂ End(L)` as a lattice, via an injective embedding
/// `t -> (rows of t)` into `Z^{k·2g}`.
#[derive(Debug, Clone)]
pub struct HeckeAlgebra {
    pub level: u64,
    /// Largest `n` with `T_n` among the generators.
    pub span_bound: u64,
    rows_used: usize,
    dim: usize,
    basis: IntMatrix,
    pivots: Vec<usize>,
    /// Coordinates of `T_n` (`n = 1..=span_bound`) in the Hermite basis.
    coords: Vec<Vec<BigInt>>,
}

fn embed(t: &SmallMat, rows_used: usize) -> Vec<BigInt> {
    t.iter()
        .take(rows_used)
        .flat_map(|r| r.iter().map(|&x| BigInt::from(x)))
        .collect()
}

impl HeckeAlgebra {
    pub fn new(space: &ModSymSpace, span_bound: u64) -> Self {
        let dim = space.dimension();
        let g = dim / 2;
        let span_bound = span_bound.max(sturm_bound(space.level()));
        let ops: Vec<_> = (1..=span_bound).map(|n| space.hecke_small(n)).collect();
        let mut rows_used = 1.min(dim);
        loop {
            let width = rows_used * dim;
            let gens: Vec<Vec<BigInt>> = ops.iter().map(|t| embed(t, rows_used)).collect();
            let m = IntMatrix::from_rows(width, &gens);
            let (basis, pivots) = hnf_with_pivots(&m);
            if basis.rows() == g || rows_used >= dim {
                assert_eq!(basis.rows(), g, "Hecke algebra rank differs from the genus");
                let coords = gens
                    .iter()
                    .map(|v| solve_in_hnf(&basis, &pivots, v).expect("generator in span"))
                    .collect();
                return HeckeAlgebra {
                    level: space.level(),
                    span_bound,
                    rows_used,
                    dim,
                    basis,
                    pivots,
                    coords,
                };
            }
            rows_used = (rows_used * 2).min(dim);
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// Coordinates of `T_n` in the Hermite basis `t_1..t_g`.
    pub fn coordinates_of(&self, n: u64) -> &[BigInt] {
        &self.coords[(n - 1) as usize]
    }

    /// Matrix of multiplication by `t` on the basis: row `i` holds the
    /// coordinates of `t_i · t`.
    pub fn multiplication_matrix(&self, t: &SmallMat) -> IntMatrix {
        let rows: Vec<Vec<BigInt>> = self
            .basis
            .iter_rows()
            .map(|b| {
                let mut img = Vec::with_capacity(b.len());
                for blk in 0..self.rows_used {
                    let block = &b[blk * self.dim..(blk + 1) * self.dim];
                    match block
                        .iter()
                        .map(|x| x.to_i64())
                        .collect::<Option<Vec<i64>>>()
                    {
                        Some(v) if v.iter().all(|x| x.unsigned_abs() < 1 << 31) => {
                            img.extend(dense::big_row(&dense::vec_mul(&v, t)))
                        }
                        _ => img.extend((0..self.dim).map(|c| {
                            block
                                .iter()
                                .zip(t.iter())
                                .map(|(x, row)| x * BigInt::from(row[c]))
                                .sum::<BigInt>()
                        })),
                    }
                }
                solve_in_hnf(&self.basis, &self.pivots, &img)
                    .expect("Hecke algebra not closed under multiplication")
            })
            .collect();
        IntMatrix::from_rows(self.rank(), &rows)
    }
}

/// Z-basis of `S_2(Γ_0(N), Z)` to precision `B`, realized as `Hom(T, Z)`:
/// row `j` is `n -> c_{n,j}` where `T_n = Σ_j c_{n,j} t_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralCuspBasis {
    pub level: u64,
    pub precision: u64,
    /// Rows are basis forms; column `k` holds `a_{k+1}`.
    pub coeff_matrix: IntMatrix,
}

impl IntegralCuspBasis {
    pub fn rank(&self) -> usize {
        self.coeff_matrix.rows()
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::from_generators(self.precision as usize, &self.coeff_matrix)
    }
}

pub fn integral_cusp_basis(
    space: &ModSymSpace,
    precision: u64,
) -> Result<IntegralCuspBasis, HeckeFormsError> {
    let sturm = sturm_bound(space.level());
    if precision < sturm {
        return Err(HeckeFormsError::PrecisionBelowSturm { precision, sturm });
    }
    let b = precision as usize;
    if space.dimension() == 0 {
        return Ok(IntegralCuspBasis {
            level: space.level(),
            precision,
            coeff_matrix: IntMatrix::zeros(0, b),
        });
    }
    let alg = HeckeAlgebra::new(space, precision);
    let g = alg.rank();
    let rows: Vec<Vec<BigInt>> = (0..g)
        .map(|j| {
            (1..=precision)
                .map(|n| alg.coordinates_of(n)[j].clone())
                .collect()
        })
        .collect();
    Ok(IntegralCuspBasis {
        level: space.level(),
        precision,
        coeff_matrix: IntMatrix::from_rows(b, &rows),
    })
}

/// Congruence number `r_f = #(S / (S ∩ Qf + S ∩ (Qf)^⊥))`.
///
/// With `M_p` the multiplication matrices on a basis of `T`, `S = Hom(T, Z)` has
/// `f` as the primitive right eigenvector `λ` of the `M_p` and `S ∩ (Qf)^⊥` as the
/// orthogonal complement of the primitive left eigenvector `w`, so
/// `r_f = |λ · w|`.
pub fn congruence_number(
    space: &ModSymSpace,
    f: &RationalNewform,
) -> Result<BigInt, HeckeFormsError> {
    if space.level() != f.level {
        return Err(HeckeFormsError::LevelMismatch {
            form: f.level,
            space: space.level(),
        });
    }
    let alg = HeckeAlgebra::new(space, default_precision(space.level()));
    let g = alg.rank();
    let mut right = IntMatrix::zeros(0, g);
    let mut left = IntMatrix::zeros(g, 0);
    for p in good_primes(space.level()).take(200) {
        let t = space.hecke_small(p);
        let a = f.ap(p).unwrap_or_else(|| eigenvalue_on(&f.eigenspace, &t));
        let m = alg.multiplication_matrix(&t).sub_scalar(&BigInt::from(a));
        right = right.vstack(&m);
        left = left.hstack(&m);
        if rank(&right) == g - 1 {
            break;
        }
    }
    let lambda = right_kernel(&right);
    let w = left_kernel(&left);
    assert!(
        lambda.rows() == 1 && w.rows() == 1,
        "newform eigenline not isolated"
    );
    let dot: BigInt = lambda.row(0).iter().zip(w.row(0)).map(|(x, y)| x * y).sum();
    assert!(!dot.is_zero(), "degenerate congruence pairing");
    Ok(dot.abs())
}

/// q-expansion of `T_m g` for `g` given by `a_1..a_B` (column `k` holds `a_{k+1}`);
/// needs `B ≥ m · out_len`.
pub fn hecke_on_qexp(level: u64, m: u64, coeffs: &[BigInt], out_len: usize) -> Vec<BigInt> {
    let at = |k: u64| -> BigInt { coeffs[(k - 1) as usize].clone() };
    (1..=out_len as u64)
        .map(|n| {
            let mut s = BigInt::zero();
            for d in crate::arith::divisors(n.gcd(&m)) {
                if level.gcd(&d) != 1 {
                    continue;
                }
                s += BigInt::from(d) * at(m * n / (d * d));
            }
            s
        })
        .collect()
}
