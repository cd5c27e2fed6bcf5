//! Weierstrass models over Q: invariants, global minimal models, rational
//! 2-torsion and point counts over prime fields.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, legendre};
use crate::hecke_forms::sturm_bound;
use crate::modsym::RationalNewform;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EllipticError {
    #[error("singular Weierstrass equation (discriminant 0)")]
    Singular,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bad reduction at {0}")]
    BadPrime(u64),
    #[error("cannot parse a-invariants from {0:?}")]
    Parse(String),
    #[error("newform level {level} differs from conductor {conductor}")]
    LevelMismatch { level: u64, conductor: u64 },
    #[error("no newform matches the curve")]
    NoMatch,
    #[error("{0} newforms match the curve")]
    AmbiguousMatch(usize),
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassModel {
    pub a1: BigRational,
    pub a2: BigRational,
    pub a3: BigRational,
    pub a4: BigRational,
    pub a6: BigRational,
}

/// b- and c-invariants and the discriminant of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invariants<T> {
    pub b2: T,
    pub b4: T,
    pub b6: T,
    pub b8: T,
    pub c4: T,
    pub c6: T,
    pub disc: T,
}

fn invariants<T>(a1: &T, a2: &T, a3: &T, a4: &T, a6: &T) -> Invariants<T>
where
    T: Clone
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<Output = T>
        + From<BigInt>,
{
    let k = |n: i32| T::from(BigInt::from(n));
    let b2 = a1.clone() * a1.clone() + k(4) * a2.clone();
    let b4 = a1.clone() * a3.clone() + k(2) * a4.clone();
    let b6 = a3.clone() * a3.clone() + k(4) * a6.clone();
    let b8 = a1.clone() * a1.clone() * a6.clone() + k(4) * a2.clone() * a6.clone()
        - a1.clone() * a3.clone() * a4.clone()
        + a2.clone() * a3.clone() * a3.clone()
        - a4.clone() * a4.clone();
    let c4 = b2.clone() * b2.clone() - k(24) * b4.clone();
    let c6 = k(0) - b2.clone() * b2.clone() * b2.clone() + k(36) * b2.clone() * b4.clone()
        - k(216) * b6.clone();
    let disc = k(0)
        - b2.clone() * b2.clone() * b8.clone()
        - k(8) * b4.clone() * b4.clone() * b4.clone()
        - k(27) * b6.clone() * b6.clone()
        + k(9) * b2.clone() * b4.clone() * b6.clone();
    Invariants {
        b2,
        b4,
        b6,
        b8,
        c4,
        c6,
        disc,
    }
}

impl WeierstrassModel {
    pub fn new(a: [BigRational; 5]) -> Result<Self, EllipticError> {
        let [a1, a2, a3, a4, a6] = a;
        let w = WeierstrassModel { a1, a2, a3, a4, a6 };
        if w.invariants().disc.is_zero() {
            return Err(EllipticError::Singular);
        }
        Ok(w)
    }

    pub fn from_integers(a: [i64; 5]) -> Result<Self, EllipticError> {
        Self::new(a.map(|x| BigRational::from_integer(BigInt::from(x))))
    }

    pub fn invariants(&self) -> Invariants<BigRational> {
        invariants(&self.a1, &self.a2, &self.a3, &self.a4, &self.a6)
    }

    pub fn coefficients(&self) -> [&BigRational; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    /// Image under `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
    pub fn transform(
        &self,
        u: &BigRational,
        r: &BigRational,
        s: &BigRational,
        t: &BigRational,
    ) -> WeierstrassModel {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let two = BigRational::from_integer(BigInt::from(2));
        let three = BigRational::from_integer(BigInt::from(3));
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        let n1 = a1 + &two * s;
        let n2 = a2 - s * a1 + &three * r - s * s;
        let n3 = a3 + r * a1 + &two * t;
        let n4 = a4 - s * a3 + &two * r * a2 - (t + r * s) * a1 + &three * r * r - &two * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        WeierstrassModel {
            a1: n1 / u,
            a2: n2 / u2,
            a3: n3 / u3,
            a4: n4 / u4,
            a6: n6 / u6,
        }
    }
}

impl FromStr for WeierstrassModel {
    type Err = EllipticError;

    /// Parses `"a1,a2,a3,a4,a6"`; entries may be integers or fractions `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 5 {
            return Err(EllipticError::Parse(s.to_string()));
        }
        let mut out = Vec::with_capacity(5);
        for p in parts {
            let v: BigRational = p
                .trim()
                .parse()
                .map_err(|_| EllipticError::Parse(s.to_string()))?;
            out.push(v);
        }
        let a: [BigRational; 5] = out.try_into().expect("five entries");
        WeierstrassModel::new(a)
    }
}

/// Reduced global minimal model over Z.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinimalModel {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub delta_min: BigInt,
}

impl MinimalModel {
    pub fn ainvs(&self) -> [BigInt; 5] {
        [
            self.a1.clone(),
            self.a2.clone(),
            self.a3.clone(),
            self.a4.clone(),
            self.a6.clone(),
        ]
    }

    pub fn ainvs_i64(&self) -> Option<[i64; 5]> {
        Some([
            self.a1.to_i64()?,
            self.a2.to_i64()?,
            self.a3.to_i64()?,
            self.a4.to_i64()?,
            self.a6.to_i64()?,
        ])
    }

    pub fn invariants(&self) -> Invariants<BigInt> {
        invariants(&self.a1, &self.a2, &self.a3, &self.a4, &self.a6)
    }

    pub fn to_weierstrass(&self) -> WeierstrassModel {
        let q = |x: &BigInt| BigRational::from_integer(x.clone());
        WeierstrassModel {
            a1: q(&self.a1),
            a2: q(&self.a2),
            a3: q(&self.a3),
            a4: q(&self.a4),
            a6: q(&self.a6),
        }
    }

    /// Primes dividing the minimal discriminant.
    pub fn bad_primes(&self) -> Vec<BigInt> {
        prime_divisors(&self.delta_min.abs())
    }
}

impl fmt::Display for MinimalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{},{},{},{}]",
            self.a1, self.a2, self.a3, self.a4, self.a6
        )
    }
}

fn valuation(x: &BigInt, p: &BigInt) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

/// Prime divisors of `n > 0` by trial division; a cofactor left after trial
/// division up to `10^6` is returned as if prime.
fn prime_divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(1_000_000);
    while &p * &p <= n && p <= limit {
        if (&n % &p).is_zero() {
            while (&n % &p).is_zero() {
                n /= &p;
            }
            out.push(p.clone());
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

/// Kraus' conditions at 2 and 3 for `(c4, c6)` to come from an integral model.
fn kraus(c4: &BigInt, c6: &BigInt) -> bool {
    let three = BigInt::from(3);
    if valuation(c6, &three) == Some(2) {
        return false;
    }
    if c6.mod_floor(&BigInt::from(4)) == three {
        return true;
    }
    let v2 = valuation(c4, &BigInt::from(2)).unwrap_or(u32::MAX);
    let r = c6.mod_floor(&BigInt::from(32));
    v2 >= 4 && (r.is_zero() || r == BigInt::from(8))
}

/// Reduced integral model with given `c4, c6` (which must satisfy Kraus' conditions).
fn model_from_c4c6(c4: &BigInt, c6: &BigInt) -> [BigInt; 5] {
    let twelve = BigInt::from(12);
    let mut b2 = (-c6).mod_floor(&twelve);
    if b2 > BigInt::from(6) {
        b2 -= &twelve;
    }
    let b4 = (&b2 * &b2 - c4) / 24;
    let b6: BigInt = (-(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - c6) / 216;
    let two = BigInt::from(2);
    let a1 = b2.mod_floor(&two);
    let a3 = b6.mod_floor(&two);
    let a2 = (&b2 - &a1) / 4;
    let a4 = (&b4 - &a1 * &a3) / 2;
    let a6 = (&b6 - &a3) / 4;
    [a1, a2, a3, a4, a6]
}

/// Global minimal model via Kraus' criterion and the Laska–Connell scaling.
pub fn minimal_model(w: &WeierstrassModel) -> Result<MinimalModel, EllipticError> {
    let inv = w.invariants();
    if inv.disc.is_zero() {
        return Err(EllipticError::Singular);
    }
    // clear denominators: a_i -> D^i a_i
    let d = w
        .coefficients()
        .iter()
        .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
    let dq = BigRational::from_integer(d.clone());
    let scale = |x: &BigRational, k: u32| -> BigInt {
        let y = x * num_traits::pow(dq.clone(), k as usize);
        debug_assert!(y.is_integer());
        y.to_integer()
    };
    let mut c4 = scale(&inv.c4, 4);
    let mut c6 = scale(&inv.c6, 6);
    let mut disc = scale(&inv.disc, 12);

    let g = c4.gcd(&c6).gcd(&disc);
    for p in prime_divisors(&g) {
        let v4 = valuation(&c4, &p).map(|v| v / 4).unwrap_or(u32::MAX);
        let v6 = valuation(&c6, &p).map(|v| v / 6).unwrap_or(u32::MAX);
        let vd = valuation(&disc, &p).expect("nonzero discriminant") / 12;
        let mut e = v4.min(v6).min(vd);
        while e > 0 {
            let c4e = &c4 / num_traits::pow(p.clone(), 4 * e as usize);
            let c6e = &c6 / num_traits::pow(p.clone(), 6 * e as usize);
            if p > BigInt::from(3) || kraus(&c4e, &c6e) {
                break;
            }
            e -= 1;
        }
        if e > 0 {
            c4 /= num_traits::pow(p.clone(), 4 * e as usize);
            c6 /= num_traits::pow(p.clone(), 6 * e as usize);
            disc /= num_traits::pow(p.clone(), 12 * e as usize);
        }
    }
    let [a1, a2, a3, a4, a6] = model_from_c4c6(&c4, &c6);
    let m = MinimalModel {
        a1,
        a2,
        a3,
        a4,
        a6,
        c4,
        c6,
        delta_min: disc,
    };
    debug_assert_eq!(m.invariants().disc, m.delta_min);
    debug_assert_eq!(m.invariants().c4, m.c4);
    Ok(m)
}

/// Minimal model of an integral model given by its a-invariants.
pub fn minimal_model_of(a: [i64; 5]) -> Result<MinimalModel, EllipticError> {
    minimal_model(&WeierstrassModel::from_integers(a)?)
}

fn integer_roots_of_monic_cubic(c2: &BigInt, c1: &BigInt, c0: &BigInt) -> Vec<BigInt> {
    let eval = |x: &BigInt| -> BigInt { ((x + c2) * x + c1) * x + c0 };
    let mut roots = Vec::new();
    if c0.is_zero() {
        roots.push(BigInt::zero());
        // remaining roots solve x^2 + c2 x + c1 = 0
        let disc = c2 * c2 - BigInt::from(4) * c1;
        if !disc.is_negative() {
            let s = disc.sqrt();
            if &s * &s == disc {
                for r in [(-c2 + &s), (-c2 - &s)] {
                    if r.is_even() {
                        let x = r / 2;
                        if !roots.contains(&x) {
                            roots.push(x);
                        }
                    }
                }
            }
        }
        return roots;
    }
    for p in positive_divisors(&c0.abs()) {
        for x in [p.clone(), -p] {
            if eval(&x).is_zero() {
                roots.push(x);
            }
        }
    }
    roots
}

fn positive_divisors(n: &BigInt) -> Vec<BigInt> {
    let mut divs = vec![BigInt::one()];
    let mut m = n.clone();
    for p in prime_divisors(n) {
        let mut e = 0;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        let base = divs.len();
        let mut pk = BigInt::one();
        for _ in 0..e {
            pk *= &p;
            for i in 0..base {
                let d = &divs[i] * &pk;
                divs.push(d);
            }
        }
    }
    divs
}

/// Rational roots of `4x^3 + b2 x^2 + 2 b4 x + b6`.
pub fn two_division_roots(m: &MinimalModel) -> Vec<BigRational> {
    let inv = m.invariants();
    // X = 4x turns the cubic into X^3 + b2 X^2 + 8 b4 X + 16 b6
    let c1 = BigInt::from(8) * &inv.b4;
    let c0 = BigInt::from(16) * &inv.b6;
    let mut roots: Vec<BigRational> = integer_roots_of_monic_cubic(&inv.b2, &c1, &c0)
        .into_iter()
        .map(|x| BigRational::new(x, BigInt::from(4)))
        .collect();
    roots.sort();
    roots
}

/// `dim_F2 E(Q)[2]`: 0, 1 or 2.
pub fn two_torsion_rank(m: &MinimalModel) -> u32 {
    match two_division_roots(m).len() {
        0 => 0,
        1 => 1,
        3 => 2,
        k => unreachable!("cubic with {k} distinct rational roots"),
    }
}

/// `a_p = p + 1 - #E(F_p)` for a prime of good reduction.
pub fn ap_via_counting(m: &MinimalModel, p: u64) -> Result<i64, EllipticError> {
    if !is_prime(p) {
        return Err(EllipticError::NotPrime(p));
    }
    let pb = BigInt::from(p);
    if (&m.delta_min % &pb).is_zero() {
        return Err(EllipticError::BadPrime(p));
    }
    let pi = p as i64;
    let r = |x: &BigInt| -> i64 { x.mod_floor(&pb).to_i64().expect("residue") };
    let [a1, a2, a3, a4, a6] = [r(&m.a1), r(&m.a2), r(&m.a3), r(&m.a4), r(&m.a6)];
    if p <= 3 {
        let mut count = 1i64;
        for x in 0..pi {
            for y in 0..pi {
                let lhs = (y * y + a1 * x * y + a3 * y).rem_euclid(pi);
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6).rem_euclid(pi);
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        return Ok(pi + 1 - count);
    }
    // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    let inv = m.invariants();
    let (b2, b4, b6) = (r(&inv.b2) as i128, r(&inv.b4) as i128, r(&inv.b6) as i128);
    let pw = pi as i128;
    let mut sum = 0i64;
    for x in 0..pw {
        let g = (((4 * x + b2) % pw * x + 2 * b4) % pw * x + b6) % pw;
        sum += legendre(g as i64, pi);
    }
    Ok(-sum)
}

/// The candidate whose `a_p` agree with point counts at all good `p` up to the
/// Sturm bound.
pub fn match_curve_to_newform(
    m: &MinimalModel,
    conductor: u64,
    candidates: &[RationalNewform],
) -> Result<usize, EllipticError> {
    if let Some(f) = candidates.iter().find(|f| f.level != conductor) {
        return Err(EllipticError::LevelMismatch {
            level: f.level,
            conductor,
        });
    }
    let good: Vec<u64> = crate::arith::primes_up_to(sturm_bound(conductor))
        .into_iter()
        .filter(|p| conductor % p != 0)
        .collect();
    let counts: Vec<(u64, i64)> = good
        .iter()
        .map(|&p| ap_via_counting(m, p).map(|a| (p, a)))
        .collect::<Result<_, _>>()?;
    let hits: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, f)| counts.iter().all(|&(p, a)| f.ap(p) == Some(a)))
        .map(|(i, _)| i)
        .collect();
    match hits.len() {
        0 => Err(EllipticError::NoMatch),
        1 => Ok(hits[0]),
        k => Err(EllipticError::AmbiguousMatch(k)),
    }
}
