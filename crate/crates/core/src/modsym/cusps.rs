//! Cusps of `X_0(N)` and conversion of modular symbols `{α, β}` into Manin symbols.

use std::fmt;

use crate::arith::{gcd, inv_mod};

/// A point of `P^1(Q)` in lowest terms with nonnegative denominator;
/// infinity is `1/0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cusp {
    pub num: i64,
    pub den: i64,
}

impl Cusp {
    pub fn new(num: i64, den: i64) -> Self {
        Self::from_i128(num as i128, den as i128)
    }

    pub fn infinity() -> Self {
        Cusp { num: 1, den: 0 }
    }

    pub fn zero() -> Self {
        Cusp { num: 0, den: 1 }
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    fn from_i128(num: i128, den: i128) -> Self {
        assert!(num != 0 || den != 0, "0/0 is not a cusp");
        if den == 0 {
            return Self::infinity();
        }
        let g = gcd_i128(num, den);
        let (mut p, mut q) = (num / g, den / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Cusp {
            num: i64::try_from(p).expect("cusp numerator overflow"),
            den: i64::try_from(q).expect("cusp denominator overflow"),
        }
    }

    /// Image under the fractional linear transformation of `[[a, b], [c, d]]`.
    pub fn act(&self, m: [i64; 4]) -> Cusp {
        let [a, b, c, d] = m.map(i128::from);
        let (p, q) = (self.num as i128, self.den as i128);
        Self::from_i128(a * p + b * q, c * p + d * q)
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "oo")
        } else if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn cusp_s(c: &Cusp) -> i64 {
    match c.den {
        0 => 1,
        1 => 0,
        q => inv_mod(c.num, q).expect("cusp not in lowest terms"),
    }
}

/// Whether two cusps are equivalent under `Γ_0(N)`: with `p_j s_j ≡ 1 (mod q_j)`,
/// equivalence holds iff `s_1 q_2 ≡ s_2 q_1 (mod gcd(q_1 q_2, N))`.
pub fn cusps_equivalent(a: &Cusp, b: &Cusp, n: u64) -> bool {
    let n = n as i128;
    let (q1, q2) = (a.den as i128, b.den as i128);
    let m = gcd_i128(q1 * q2, n);
    if m == 1 {
        return true;
    }
    let (s1, s2) = (cusp_s(a) as i128, cusp_s(b) as i128);
    (s1 * q2 - s2 * q1).rem_euclid(m) == 0
}

/// Representatives of the `Γ_0(N)`-classes of cusps met so far.
#[derive(Debug, Clone)]
pub struct CuspClasses {
    level: u64,
    reps: Vec<Cusp>,
    // classes are separated first by gcd(q, N), which is an invariant of the class
    keys: Vec<i64>,
}

impl CuspClasses {
    pub fn new(level: u64) -> Self {
        CuspClasses {
            level,
            reps: Vec::new(),
            keys: Vec::new(),
        }
    }

    pub fn reps(&self) -> &[Cusp] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    fn key(&self, c: &Cusp) -> i64 {
        gcd(c.den, self.level as i64)
    }

    pub fn find(&self, c: &Cusp) -> Option<usize> {
        let k = self.key(c);
        (0..self.reps.len())
            .find(|&i| self.keys[i] == k && cusps_equivalent(&self.reps[i], c, self.level))
    }

    pub fn index_or_insert(&mut self, c: &Cusp) -> usize {
        if let Some(i) = self.find(c) {
            return i;
        }
        self.keys.push(self.key(c));
        self.reps.push(*c);
        self.reps.len() - 1
    }
}

/// Manin symbols `(c : d)` (as raw integer pairs, each with multiplicity `±1`)
/// whose sum is the modular symbol `{0, x}`.
pub fn zero_to_cusp(x: &Cusp) -> Vec<(i64, i64, i64)> {
    let mut out = vec![(0, 1, 1)];
    if x.is_infinity() {
        return out;
    }
    // continued fraction convergents p_k / q_k of x
    let (mut num, mut den) = (x.num, x.den);
    let (mut q_prev, mut q_cur) = (1i64, 0i64); // q_{k-2}, q_{k-1} starting at k = 0
    let mut sign = -1i64; // (-1)^(k-1)
    loop {
        let a = num.div_euclid(den);
        let r = num.rem_euclid(den);
        let q_next = a
            .checked_mul(q_cur)
            .and_then(|t| t.checked_add(q_prev))
            .expect("continued fraction overflow");
        // term k: ((-1)^(k-1) q_k : q_{k-1})
        out.push((sign * q_next, q_cur, 1));
        q_prev = q_cur;
        q_cur = q_next;
        sign = -sign;
        if r == 0 {
            break;
        }
        (num, den) = (den, r);
    }
    out
}

/// Manin symbols summing to `{α, β} = {0, β} - {0, α}`.
pub fn symbol_between(alpha: &Cusp, beta: &Cusp) -> Vec<(i64, i64, i64)> {
    let mut out = zero_to_cusp(beta);
    out.extend(zero_to_cusp(alpha).into_iter().map(|(c, d, m)| (c, d, -m)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cusp_count;

    fn cusp_reps_by_search(n: u64) -> usize {
        let mut cl = CuspClasses::new(n);
        cl.index_or_insert(&Cusp::infinity());
        for q in 1..=(n as i64) {
            for p in 0..q {
                if gcd(p, q) == 1 {
                    cl.index_or_insert(&Cusp::new(p, q));
                }
            }
        }
        cl.len()
    }

    #[test]
    fn cusp_count_matches_formula() {
        for n in 1..=120u64 {
            assert_eq!(cusp_reps_by_search(n) as u64, cusp_count(n), "N={n}");
        }
    }

    #[test]
    fn convergent_symbols() {
        // {0, 1/2} = {0, oo} + {oo, 0} + {0, 1/2}
        assert_eq!(
            zero_to_cusp(&Cusp::new(1, 2)),
            vec![(0, 1, 1), (-1, 0, 1), (2, 1, 1)]
        );
        assert_eq!(zero_to_cusp(&Cusp::infinity()), vec![(0, 1, 1)]);
    }

    #[test]
    fn normalization() {
        assert_eq!(Cusp::new(2, -4), Cusp::new(-1, 2));
        assert_eq!(Cusp::new(-3, 0), Cusp::infinity());
        assert_eq!(Cusp::zero().act([0, -1, 1, 0]), Cusp::infinity());
    }
}
