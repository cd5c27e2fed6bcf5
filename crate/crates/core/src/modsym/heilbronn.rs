//! Heilbronn-type matrix families realizing Hecke operators on Manin symbols.

/// Cremona's Heilbronn matrices for a prime `p`. Valid for `T_p` with `p ∤ N`.
pub fn heilbronn_cremona(p: u64) -> Vec<[i64; 4]> {
    let p = p as i64;
    if p == 2 {
        return vec![[1, 0, 0, 2], [2, 0, 0, 1], [2, 1, 0, 1], [1, 0, 1, 2]];
    }
    let mut out = vec![[1, 0, 0, p]];
    let half = (p - 1) / 2;
    for r in -half..=half {
        let (mut x1, mut x2, mut y1, mut y2) = (p, -r, 0i64, 1i64);
        let (mut a, mut b) = (-p, r);
        out.push([x1, x2, y1, y2]);
        while b != 0 {
            let q = round_half_away(a, b);
            let c = a - b * q;
            a = -b;
            b = c;
            let x3 = q * x2 - x1;
            x1 = x2;
            x2 = x3;
            let y3 = q * y2 - y1;
            y1 = y2;
            y2 = y3;
            out.push([x1, x2, y1, y2]);
        }
    }
    out
}

fn round_half_away(a: i64, b: i64) -> i64 {
    let (n, d) = if b < 0 { (-a, -b) } else { (a, b) };
    if n >= 0 {
        (2 * n + d).div_euclid(2 * d)
    } else {
        -((-2 * n + d).div_euclid(2 * d))
    }
}

/// Merel's set of matrices `[[a, b], [c, d]]` with `a > b ≥ 0`, `d > c ≥ 0` and
/// `ad - bc = n`. Valid for `T_n` at every level, dropping images that are not
/// points of `P^1(Z/NZ)`.
pub fn heilbronn_merel(n: u64) -> Vec<[i64; 4]> {
    let n = n as i64;
    let mut out = Vec::new();
    for a in 1..=n {
        let q = n / a;
        if q * a == n {
            let d = q;
            for b in 0..a {
                out.push([a, b, 0, d]);
            }
            for c in 1..d {
                out.push([a, 0, c, d]);
            }
        }
        for d in q + 1..=n {
            let bc = a * d - n;
            for c in bc / a + 1..d {
                if bc % c == 0 {
                    out.push([a, bc / c, c, d]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinants() {
        for p in [2u64, 3, 5, 7, 11, 13, 97] {
            for m in heilbronn_cremona(p) {
                assert_eq!(m[0] * m[3] - m[1] * m[2], p as i64, "p={p} {m:?}");
            }
        }
        for n in 1..30u64 {
            for m in heilbronn_merel(n) {
                assert_eq!(m[0] * m[3] - m[1] * m[2], n as i64);
                assert!(m[0] > m[1] && m[1] >= 0 && m[3] > m[2] && m[2] >= 0);
            }
        }
    }

    #[test]
    fn merel_brute_force_count() {
        for n in 1..=12i64 {
            let mut count = 0;
            for a in 1..=n {
                for b in 0..a {
                    for d in 1..=n {
                        for c in 0..d {
                            if a * d - b * c == n {
                                count += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(heilbronn_merel(n as u64).len(), count, "n={n}");
        }
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_away(5, 2), 3);
        assert_eq!(round_half_away(-5, 2), -3);
        assert_eq!(round_half_away(7, -3), -2);
        assert_eq!(round_half_away(4, 3), 1);
    }
}
