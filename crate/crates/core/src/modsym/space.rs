use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::cusps::{symbol_between, Cusp, CuspClasses};
use super::dense::{self, SmallMat};
use super::heilbronn::{heilbronn_cremona, heilbronn_merel};
use super::p1::P1List;
use super::ModSymError;
use crate::arith::{factor, genus_x0, xgcd};
use crate::lattice::{hnf_with_transform, left_kernel, right_kernel, IntMatrix, Lattice};

/// Sparse integer vector as sorted `(index, coefficient)` pairs.
pub type SparseVec = Vec<(usize, i64)>;

/// A Hecke operator `T_m` written in the basis of the cuspidal lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeOperator {
    pub index: u64,
    pub matrix: IntMatrix,
}

/// Weight-2 modular symbols for `Γ_0(N)` over the integers.
///
/// Manin symbols are indexed by `P^1(Z/NZ)`. The free quotient of the symbol
/// module by the two- and three-term relations is identified with `Z^r`; every
/// symbol has integer coordinates there. The cuspidal lattice `L` is the kernel
/// of the boundary map, saturated in `Z^r`.
pub struct ModSymSpace {
    level: u64,
    genus: u64,
    p1: P1List,
    relations: Vec<SparseVec>,
    symbol_coords: Vec<SparseVec>,
    ambient_rank: usize,
    lifts: Vec<SparseVec>,
    cusps: CuspClasses,
    boundary: IntMatrix,
    cuspidal: Lattice,
    cusp_basis: SmallMat,
    cusp_pivots: Vec<usize>,
    hecke_cache: Mutex<HashMap<u64, Arc<SmallMat>>>,
}

impl std::fmt::Debug for ModSymSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModSymSpace")
            .field("level", &self.level)
            .field("genus", &self.genus)
            .field("symbols", &self.p1.len())
            .field("ambient_rank", &self.ambient_rank)
            .finish()
    }
}

/// Builds the modular-symbol space of level `n`.
pub fn build_space(n: u64) -> ModSymSpace {
    ModSymSpace::new(n)
}

fn axpy(dst: &mut BTreeMap<usize, i64>, k: i64, src: &[(usize, i64)]) {
    for &(i, c) in src {
        let e = dst.entry(i).or_insert(0);
        *e = e
            .checked_add(k.checked_mul(c).expect("coefficient overflow"))
            .expect("coefficient overflow");
        if *e == 0 {
            dst.remove(&i);
        }
    }
}

struct Elimination {
    exprs: Vec<Option<SparseVec>>,
}

impl Elimination {
    fn substitute(&self, rel: &[(usize, i64)]) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        for &(g, c) in rel {
            match &self.exprs[g] {
                Some(e) => axpy(&mut out, c, e),
                None => axpy(&mut out, c, &[(g, 1)]),
            }
        }
        out
    }

    /// Uses the relation to eliminate one generator with a unit coefficient;
    /// returns false if no such generator exists.
    fn try_eliminate(&mut self, rel: &BTreeMap<usize, i64>) -> bool {
        let Some((&h, &ch)) = rel.iter().rev().find(|(_, c)| c.abs() == 1) else {
            return false;
        };
        // ch*h + rest = 0  =>  h = -ch * rest
        let expr: SparseVec = rel
            .iter()
            .filter(|(g, _)| **g != h)
            .map(|(g, c)| (*g, -ch * c))
            .collect();
        for e in self.exprs.iter_mut().flatten() {
            if let Ok(pos) = e.binary_search_by_key(&h, |t| t.0) {
                let k = e[pos].1;
                let mut m: BTreeMap<usize, i64> = e.iter().copied().filter(|t| t.0 != h).collect();
                axpy(&mut m, k, &expr);
                *e = m.into_iter().collect();
            }
        }
        self.exprs[h] = Some(expr);
        true
    }
}

impl ModSymSpace {
    pub fn new(level: u64) -> Self {
        assert!(level >= 1, "level must be positive");
        let p1 = P1List::new(level);
        let mu = p1.len();

        // two-term relations x + xS = 0
        let mut relations: Vec<SparseVec> = Vec::new();
        let mut gen_of: Vec<Option<(usize, i64)>> = vec![None; mu];
        let mut gen_rep: Vec<usize> = Vec::new();
        for i in 0..mu {
            let j = p1.apply_s(i);
            if j == i {
                relations.push(vec![(i, 2)]);
            } else if i < j {
                relations.push(vec![(i, 1), (j, 1)]);
                gen_of[i] = Some((gen_rep.len(), 1));
                gen_of[j] = Some((gen_rep.len(), -1));
                gen_rep.push(i);
            }
        }
        let ngens = gen_rep.len();

        // three-term relations x + xT + xT^2 = 0
        let mut seen = vec![false; mu];
        let mut elim = Elimination {
            exprs: vec![None; ngens],
        };
        let mut leftover: Vec<SparseVec> = Vec::new();
        for i in 0..mu {
            if seen[i] {
                continue;
            }
            let j = p1.apply_t(i);
            let k = p1.apply_t(j);
            seen[i] = true;
            seen[j] = true;
            seen[k] = true;
            let mut raw: BTreeMap<usize, i64> = BTreeMap::new();
            for s in [i, j, k] {
                *raw.entry(s).or_insert(0) += 1;
            }
            relations.push(raw.iter().map(|(a, b)| (*a, *b)).collect());
            let mut rel: BTreeMap<usize, i64> = BTreeMap::new();
            for s in [i, j, k] {
                if let Some((g, sign)) = gen_of[s] {
                    axpy(&mut rel, sign, &[(g, 1)]);
                }
            }
            let rel: SparseVec = rel.into_iter().collect();
            let sub = elim.substitute(&rel);
            if sub.is_empty() {
                continue;
            }
            if !elim.try_eliminate(&sub) {
                leftover.push(rel);
            }
        }
        loop {
            let mut progress = false;
            let mut keep = Vec::new();
            for rel in leftover {
                let sub = elim.substitute(&rel);
                if sub.is_empty() {
                    continue;
                }
                if elim.try_eliminate(&sub) {
                    progress = true;
                } else {
                    keep.push(rel);
                }
            }
            leftover = keep;
            if !progress {
                break;
            }
        }

        let free: Vec<usize> = (0..ngens).filter(|&g| elim.exprs[g].is_none()).collect();
        let mut free_idx = vec![usize::MAX; ngens];
        for (k, &g) in free.iter().enumerate() {
            free_idx[g] = k;
        }
        let nfree = free.len();

        // leftover relations among free generators; the free quotient is cut out
        // by the saturated right kernel K of their matrix
        let mut rel_rows: Vec<Vec<BigInt>> = Vec::new();
        for rel in &leftover {
            let sub = elim.substitute(rel);
            if sub.is_empty() {
                continue;
            }
            let mut row = vec![BigInt::from(0); nfree];
            for (g, c) in sub {
                row[free_idx[g]] = BigInt::from(c);
            }
            rel_rows.push(row);
        }
        let (free_coords, ambient_rank, lift_rows): (Vec<SparseVec>, usize, Vec<SparseVec>) =
            if rel_rows.is_empty() {
                let coords = (0..nfree).map(|k| vec![(k, 1)]).collect();
                let lifts = (0..nfree).map(|k| vec![(k, 1)]).collect();
                (coords, nfree, lifts)
            } else {
                let k = right_kernel(&IntMatrix::from_rows(nfree, &rel_rows));
                let r = k.rows();
                let ks = dense::from_int_matrix(&k);
                let coords = (0..nfree)
                    .map(|j| {
                        (0..r)
                            .filter(|&i| ks[i][j] != 0)
                            .map(|i| (i, ks[i][j]))
                            .collect()
                    })
                    .collect();
                let dec = hnf_with_transform(&k.transpose());
                assert_eq!(
                    dec.hnf,
                    IntMatrix::identity(r),
                    "free quotient map is not surjective"
                );
                let u =
                    dense::from_int_matrix(&dec.transform.select_rows(&(0..r).collect::<Vec<_>>()));
                let lifts = u
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|t| *t.1 != 0)
                            .map(|(j, c)| (j, *c))
                            .collect()
                    })
                    .collect();
                (coords, r, lifts)
            };

        let gen_coords = |g: usize| -> SparseVec {
            match &elim.exprs[g] {
                None => free_coords[free_idx[g]].clone(),
                Some(e) => {
                    let mut m = BTreeMap::new();
                    for &(f, c) in e {
                        axpy(&mut m, c, &free_coords[free_idx[f]]);
                    }
                    m.into_iter().collect()
                }
            }
        };
        let gen_coord_table: Vec<SparseVec> = (0..ngens).map(gen_coords).collect();
        let symbol_coords: Vec<SparseVec> = gen_of
            .iter()
            .map(|go| match go {
                None => Vec::new(),
                Some((g, s)) => gen_coord_table[*g]
                    .iter()
                    .map(|(i, c)| (*i, c * s))
                    .collect(),
            })
            .collect();
        let lifts: Vec<SparseVec> = lift_rows
            .iter()
            .map(|row| row.iter().map(|&(j, c)| (gen_rep[free[j]], c)).collect())
            .collect();

        let mut space = ModSymSpace {
            level,
            genus: genus_x0(level),
            p1,
            relations,
            symbol_coords,
            ambient_rank,
            lifts,
            cusps: CuspClasses::new(level),
            boundary: IntMatrix::zeros(ambient_rank, 0),
            cuspidal: Lattice::zero(ambient_rank),
            cusp_basis: Vec::new(),
            cusp_pivots: Vec::new(),
            hecke_cache: Mutex::new(HashMap::new()),
        };
        space.build_boundary();
        space
    }

    fn build_boundary(&mut self) {
        let mut cusps = CuspClasses::new(self.level);
        let mut rows: Vec<BTreeMap<usize, i64>> = Vec::with_capacity(self.ambient_rank);
        for lift in &self.lifts {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(s, c) in lift {
                let [a, b, cc, d] = self.p1.lift_to_sl2(s);
                let i_inf = cusps.index_or_insert(&Cusp::new(a, cc));
                let i_zero = cusps.index_or_insert(&Cusp::new(b, d));
                axpy(&mut acc, c, &[(i_inf, 1)]);
                axpy(&mut acc, -c, &[(i_zero, 1)]);
            }
            rows.push(acc);
        }
        let nc = cusps.len();
        let mut boundary = IntMatrix::zeros(self.ambient_rank, nc);
        for (i, row) in rows.iter().enumerate() {
            for (&j, &c) in row {
                boundary.row_mut(i)[j] = BigInt::from(c);
            }
        }
        let ker = left_kernel(&boundary);
        let cuspidal = Lattice::from_generators(self.ambient_rank, &ker);
        assert_eq!(
            cuspidal.rank() as u64,
            2 * self.genus,
            "cuspidal rank disagrees with the genus formula at level {}",
            self.level
        );
        self.cusp_basis = dense::from_int_matrix(cuspidal.basis());
        self.cusp_pivots = crate::lattice::hnf_pivots(cuspidal.basis());
        self.cusps = cusps;
        self.boundary = boundary;
        self.cuspidal = cuspidal;
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn genus(&self) -> u64 {
        self.genus
    }

    pub fn p1(&self) -> &P1List {
        &self.p1
    }

    pub fn num_symbols(&self) -> usize {
        self.p1.len()
    }

    /// Rank `r` of the free quotient of the symbol module.
    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    /// Rank of the cuspidal lattice, `2g`.
    pub fn dimension(&self) -> usize {
        self.cuspidal.rank()
    }

    pub fn cuspidal_lattice(&self) -> &Lattice {
        &self.cuspidal
    }

    pub fn cusps(&self) -> &[Cusp] {
        self.cusps.reps()
    }

    pub fn boundary_matrix(&self) -> &IntMatrix {
        &self.boundary
    }

    /// Relation matrix over the Manin symbols: one row per two-term relation
    /// `x + xS` and per three-term relation `x + xU + xU^2`.
    pub fn presentation(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.relations.len(), self.p1.len());
        for (i, rel) in self.relations.iter().enumerate() {
            for &(j, c) in rel {
                m.row_mut(i)[j] = BigInt::from(c);
            }
        }
        m
    }

    /// Coordinates of Manin symbol number `i` in the free quotient.
    pub fn symbol_coordinates(&self, i: usize) -> &[(usize, i64)] {
        &self.symbol_coords[i]
    }

    /// A combination of Manin symbols representing basis vector `i` of `Z^r`.
    pub fn lift(&self, i: usize) -> &[(usize, i64)] {
        &self.lifts[i]
    }

    fn add_symbol(&self, acc: &mut [i64], c: i64, d: i64, mult: i64) {
        if let Some(i) = self.p1.index(c, d) {
            for &(j, x) in &self.symbol_coords[i] {
                acc[j] += mult * x;
            }
        }
    }

    /// Dense coordinates of the Manin symbol `(c : d)`; zero if `gcd(c, d, N) > 1`.
    pub fn manin_symbol(&self, c: i64, d: i64) -> Vec<i64> {
        let mut acc = vec![0; self.ambient_rank];
        self.add_symbol(&mut acc, c, d, 1);
        acc
    }

    /// Dense coordinates of the modular symbol `{α, β}`.
    pub fn modular_symbol(&self, alpha: &Cusp, beta: &Cusp) -> Vec<i64> {
        let mut acc = vec![0; self.ambient_rank];
        for (c, d, m) in symbol_between(alpha, beta) {
            self.add_symbol(&mut acc, c, d, m);
        }
        acc
    }

    /// Boundary of a vector of `Z^r`, indexed by cusp classes.
    pub fn boundary_of(&self, v: &[i64]) -> Vec<BigInt> {
        self.boundary.vec_mul(&dense::big_row(v))
    }

    /// Coordinates in the cuspidal basis of an ambient vector, if it lies in `L`.
    pub fn cuspidal_coordinates(&self, v: &[i64]) -> Option<Vec<i64>> {
        let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut out = Vec::with_capacity(self.cusp_pivots.len());
        for (k, &c) in self.cusp_pivots.iter().enumerate() {
            let p = self.cusp_basis[k][c] as i128;
            if rest[c] % p != 0 {
                return None;
            }
            let q = rest[c] / p;
            if q != 0 {
                for (x, b) in rest.iter_mut().zip(&self.cusp_basis[k]) {
                    *x -= q * *b as i128;
                }
            }
            out.push(dense::narrow(q));
        }
        rest.iter().all(|x| *x == 0).then_some(out)
    }

    /// The ambient image of a vector given in cuspidal coordinates.
    pub fn cuspidal_to_ambient(&self, coords: &[i64]) -> Vec<i64> {
        dense::vec_mul(coords, &self.cusp_basis)
    }

    /// Ambient matrix (rows are images of basis vectors) of the map sending each
    /// Manin symbol `x` to `sum_h x*h`.
    pub(crate) fn ambient_from_matrices(&self, mats: &[[i64; 4]]) -> SmallMat {
        let n = self.level as i64;
        self.lifts
            .iter()
            .map(|lift| {
                let mut acc = vec![0i64; self.ambient_rank];
                for &(s, coef) in lift {
                    let (c, d) = self.p1.point(s);
                    for h in mats {
                        let c2 = (c * h[0] + d * h[2]).rem_euclid(n);
                        let d2 = (c * h[1] + d * h[3]).rem_euclid(n);
                        self.add_symbol(&mut acc, c2, d2, coef);
                    }
                }
                acc
            })
            .collect()
    }

    /// Ambient matrix of the map induced by `{α, β} -> {mα, mβ}` into `target`,
    /// summed over the given matrices.
    pub(crate) fn ambient_cusp_action(&self, target: &ModSymSpace, mats: &[[i64; 4]]) -> SmallMat {
        self.lifts
            .iter()
            .map(|lift| {
                let mut acc = vec![0i64; target.ambient_rank];
                for &(s, coef) in lift {
                    let [a, b, c, d] = self.p1.lift_to_sl2(s);
                    let (zero, inf) = (Cusp::new(b, d), Cusp::new(a, c));
                    for m in mats {
                        for (c2, d2, mult) in symbol_between(&zero.act(*m), &inf.act(*m)) {
                            target.add_symbol(&mut acc, c2, d2, coef * mult);
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Restricts an ambient endomorphism (or map into `target`) to the cuspidal lattices.
    pub(crate) fn restrict_to_cuspidal(
        &self,
        ambient: &SmallMat,
        target: &ModSymSpace,
    ) -> SmallMat {
        self.cusp_basis
            .iter()
            .map(|b| {
                let img = dense::vec_mul(b, ambient);
                target
                    .cuspidal_coordinates(&img)
                    .expect("map does not preserve cuspidal lattices")
            })
            .collect()
    }

    /// Ambient matrix of `T_p` for a prime `p`.
    pub(crate) fn ambient_hecke_prime(&self, p: u64) -> SmallMat {
        if self.level % p == 0 {
            self.ambient_from_matrices(&heilbronn_merel(p))
        } else {
            self.ambient_from_matrices(&heilbronn_cremona(p))
        }
    }

    /// `T_m` on the cuspidal lattice as a machine-integer matrix.
    pub(crate) fn hecke_small(&self, m: u64) -> Arc<SmallMat> {
        assert!(m >= 1, "Hecke index must be positive");
        if let Some(t) = self
            .hecke_cache
            .lock()
            .expect("hecke cache poisoned")
            .get(&m)
        {
            return t.clone();
        }
        let dim = self.dimension();
        let t = if m == 1 {
            dense::identity(dim)
        } else {
            let f = factor(m);
            if f.len() > 1 {
                let (p, e) = f[0];
                let q = p.pow(e);
                dense::mul(&self.hecke_small(q), &self.hecke_small(m / q))
            } else {
                let (p, e) = f[0];
                if e == 1 {
                    self.restrict_to_cuspidal(&self.ambient_hecke_prime(p), self)
                } else if self.level % p == 0 {
                    dense::mul(&self.hecke_small(p), &self.hecke_small(m / p))
                } else {
                    let a = dense::mul(&self.hecke_small(p), &self.hecke_small(m / p));
                    dense::sub_scaled(&a, p as i64, &self.hecke_small(m / (p * p)))
                }
            }
        };
        let t = Arc::new(t);
        self.hecke_cache
            .lock()
            .expect("hecke cache poisoned")
            .insert(m, t.clone());
        t
    }

    /// `T_m` in the basis of the cuspidal lattice.
    pub fn hecke_operator(&self, m: u64) -> Result<HeckeOperator, ModSymError> {
        if m == 0 {
            return Err(ModSymError::ZeroIndex);
        }
        let t = self.hecke_small(m);
        Ok(HeckeOperator {
            index: m,
            matrix: dense::to_int_matrix(&t, self.dimension()),
        })
    }

    /// `T_n` computed directly from Merel's matrices of determinant `n`.
    pub fn hecke_operator_merel(&self, n: u64) -> Result<HeckeOperator, ModSymError> {
        if n == 0 {
            return Err(ModSymError::ZeroIndex);
        }
        let t = self.restrict_to_cuspidal(&self.ambient_from_matrices(&heilbronn_merel(n)), self);
        Ok(HeckeOperator {
            index: n,
            matrix: dense::to_int_matrix(&t, self.dimension()),
        })
    }

    /// The involution induced by `[[-1, 0], [0, 1]]`, on the cuspidal lattice.
    pub fn star_involution(&self) -> IntMatrix {
        let amb = self.ambient_from_matrices(&[[-1, 0, 0, 1]]);
        dense::to_int_matrix(&self.restrict_to_cuspidal(&amb, self), self.dimension())
    }

    pub(crate) fn atkin_lehner_small(&self, q: u64) -> Result<SmallMat, ModSymError> {
        let n = self.level;
        if q == 0 || n % q != 0 || crate::arith::gcd(q as i64, (n / q) as i64) != 1 {
            return Err(ModSymError::NotExactDivisor { q, n });
        }
        let w = atkin_lehner_matrix(n, q);
        let amb = self.ambient_cusp_action(self, &[w]);
        Ok(self.restrict_to_cuspidal(&amb, self))
    }

    /// Atkin–Lehner involution `W_Q` on the cuspidal lattice for `Q ∥ N`
    /// (typically a prime power; `Q = N` gives the Fricke involution).
    pub fn atkin_lehner(&self, q: u64) -> Result<IntMatrix, ModSymError> {
        Ok(dense::to_int_matrix(
            &self.atkin_lehner_small(q)?,
            self.dimension(),
        ))
    }

    /// The Fricke involution `W_N` on the cuspidal lattice.
    pub fn fricke(&self) -> IntMatrix {
        self.atkin_lehner(self.level).expect("N exactly divides N")
    }
}

/// A matrix `[[Q, y], [N, Qw]]` of determinant `Q`, for `Q ∥ N`.
pub fn atkin_lehner_matrix(n: u64, q: u64) -> [i64; 4] {
    let (n, q) = (n as i64, q as i64);
    let (g, s, t) = xgcd(q, n / q);
    debug_assert_eq!(g, 1);
    // q*s + (n/q)*t = 1  =>  det [[q, -t], [n, q*s]] = q^2 s + n t = q
    [q, -t, n, q * s]
}
