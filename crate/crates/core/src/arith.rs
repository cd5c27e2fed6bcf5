//! Small-integer number theory helpers.

/// Prime factorisation by trial division, as `(prime, exponent)` pairs in
/// increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n as usize {
        if sieve[i] {
            let mut j = i * i;
            while j <= n as usize {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = xgcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Index `[SL_2(Z) : Gamma_0(N)] = N * prod_{p | N} (1 + 1/p)`.
pub fn gamma0_index(n: u64) -> u64 {
    factor(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut d = vec![1u64];
    for (p, e) in factor(n) {
        let base = d.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..base {
                d.push(d[i] * pk);
            }
        }
    }
    d.sort_unstable();
    d
}

/// Kronecker symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: i64, p: i64) -> i64 {
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    let mut result = 1i64;
    let mut base = a as i128;
    let mut e = (p - 1) / 2;
    let m = p as i128;
    while e > 0 {
        if e & 1 == 1 {
            result = ((result as i128 * base) % m) as i64;
        }
        base = base * base % m;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

/// Genus of `X_0(N)` from the standard formula
/// `g = 1 + mu/12 - nu2/4 - nu3/3 - cusps/2`.
pub fn genus_x0(n: u64) -> u64 {
    let f = factor(n);
    let mu = gamma0_index(n) as i64;
    let nu2: i64 = if n % 4 == 0 {
        0
    } else {
        f.iter()
            .map(|&(p, _)| {
                if p == 2 {
                    1
                } else {
                    1 + legendre(-1, p as i64)
                }
            })
            .product()
    };
    let nu3: i64 = if n % 9 == 0 {
        0
    } else {
        f.iter()
            .map(|&(p, _)| match p {
                2 => 0,
                3 => 1,
                _ => 1 + legendre(-3, p as i64),
            })
            .product()
    };
    let cusps = cusp_count(n) as i64;
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
    assert!(
        twelve_g >= 0 && twelve_g % 12 == 0,
        "genus formula not integral for N={n}"
    );
    (twelve_g / 12) as u64
}

/// Number of cusps of `X_0(N)`: `sum_{d | N} phi(gcd(d, N/d))`.
pub fn cusp_count(n: u64) -> u64 {
    divisors(n)
        .iter()
        .map(|&d| euler_phi(gcd(d as i64, (n / d) as i64) as u64))
        .sum()
}
