//! The projective line `P^1(Z/NZ)`, indexing the Manin symbols of level `N`.

use crate::arith::{gamma0_index, gcd, xgcd};

const NONE: u32 = u32::MAX;

/// All points `(c : d)` of `P^1(Z/NZ)` with a lookup table from raw residue
/// pairs to a canonical index. The canonical representative of a class is its
/// lexicographically smallest member.
#[derive(Debug, Clone)]
pub struct P1List {
    n: i64,
    points: Vec<(i64, i64)>,
    table: Vec<u32>,
}

impl P1List {
    pub fn new(level: u64) -> Self {
        assert!(level >= 1, "level must be positive");
        let n = level as i64;
        let nn = n as usize;
        let units: Vec<i64> = (1..=n).filter(|&u| gcd(u, n) == 1).map(|u| u % n).collect();
        let mut table = vec![NONE; nn * nn];
        let mut points = Vec::new();
        for c in 0..n {
            for d in 0..n {
                let key = (c * n + d) as usize;
                if table[key] != NONE || gcd(gcd(c, d), n) != 1 {
                    continue;
                }
                let idx = points.len() as u32;
                points.push((c, d));
                for &u in &units {
                    let k = ((u * c) % n * n + (u * d) % n) as usize;
                    table[k] = idx;
                }
            }
        }
        debug_assert_eq!(points.len() as u64, gamma0_index(level));
        P1List { n, points, table }
    }

    pub fn level(&self) -> u64 {
        self.n as u64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> (i64, i64) {
        self.points[i]
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    /// Canonical index of `(c : d)`, or `None` when `gcd(c, d, N) != 1`.
    pub fn index(&self, c: i64, d: i64) -> Option<usize> {
        let c = c.rem_euclid(self.n);
        let d = d.rem_euclid(self.n);
        let v = self.table[(c * self.n + d) as usize];
        (v != NONE).then_some(v as usize)
    }

    /// `(c : d) * S = (d : -c)`.
    pub fn apply_s(&self, i: usize) -> usize {
        let (c, d) = self.points[i];
        self.index(d, -c).expect("S preserves P^1")
    }

    /// `(c : d) * T = (d : -c - d)` with `T = [[0, -1], [1, -1]]`.
    pub fn apply_t(&self, i: usize) -> usize {
        let (c, d) = self.points[i];
        self.index(d, -c - d).expect("T preserves P^1")
    }

    /// `(c : d) -> (-c : d)`, the action of `[[-1, 0], [0, 1]]`.
    pub fn apply_star(&self, i: usize) -> usize {
        let (c, d) = self.points[i];
        self.index(-c, d).expect("star preserves P^1")
    }

    /// A matrix in `SL_2(Z)` whose bottom row reduces to the point `i`.
    pub fn lift_to_sl2(&self, i: usize) -> [i64; 4] {
        let (c, d) = self.points[i];
        lift_to_sl2(c, d, self.n)
    }
}

/// Lifts `(c, d)` with `gcd(c, d, N) = 1` to `[[a, b], [c', d']]` in `SL_2(Z)` with
/// `c' = c`, `d' = d` modulo `N`.
pub fn lift_to_sl2(c: i64, d: i64, n: i64) -> [i64; 4] {
    if n == 1 {
        return [1, 0, 0, 1];
    }
    let mut c = c.rem_euclid(n);
    let mut d = d.rem_euclid(n);
    if c == 0 {
        c = n;
    }
    if gcd(c, d) != 1 {
        let mut t = 1;
        while gcd(c, d + t * n) != 1 {
            t += 1;
            assert!(t < 10_000, "no coprime lift for ({c}, {d}) mod {n}");
        }
        d += t * n;
    }
    let (g, x, y) = xgcd(d, c);
    debug_assert_eq!(g, 1);
    // a*d - b*c = 1 with a = x, b = -y
    [x, -y, c, d]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_index() {
        for n in 1..=60u64 {
            assert_eq!(P1List::new(n).len() as u64, gamma0_index(n), "N={n}");
        }
        assert_eq!(P1List::new(11).len(), 12);
    }

    #[test]
    fn involutions() {
        let p = P1List::new(30);
        for i in 0..p.len() {
            assert_eq!(p.apply_s(p.apply_s(i)), i);
            assert_eq!(p.apply_t(p.apply_t(p.apply_t(i))), i);
            assert_eq!(p.apply_star(p.apply_star(i)), i);
        }
    }

    #[test]
    fn lifts_have_determinant_one() {
        for n in [1i64, 2, 11, 12, 36, 100] {
            let p = P1List::new(n as u64);
            for i in 0..p.len() {
                let [a, b, c, d] = p.lift_to_sl2(i);
                assert_eq!(a * d - b * c, 1);
                assert_eq!(p.index(c, d), Some(i));
            }
        }
    }

    #[test]
    fn non_points_rejected() {
        let p = P1List::new(12);
        assert_eq!(p.index(2, 4), None);
        assert!(p.index(2, 3).is_some());
        // 5 is its own inverse mod 12 and 7 * 5 = 35 = 11 mod 12
        assert_eq!(p.index(5, 7), p.index(1, 11));
        assert_ne!(p.index(5, 7), p.index(1, 5));
    }
}
