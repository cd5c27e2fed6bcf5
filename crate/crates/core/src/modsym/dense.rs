//! Small dense machine-integer matrices for the hot Hecke loops. Every product is
//! accumulated in `i128` and checked on the way back to `i64`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::lattice::IntMatrix;

pub type SmallMat = Vec<Vec<i64>>;

pub fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("machine-integer overflow in modular-symbol arithmetic")
}

pub fn identity(n: usize) -> SmallMat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mul(a: &SmallMat, b: &SmallMat) -> SmallMat {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            let mut acc = vec![0i128; cols];
            for (x, brow) in row.iter().zip(b) {
                if *x == 0 {
                    continue;
                }
                let x = *x as i128;
                for (s, y) in acc.iter_mut().zip(brow) {
                    *s += x * *y as i128;
                }
            }
            acc.into_iter().map(narrow).collect()
        })
        .collect()
}

/// `a - k * b`.
pub fn sub_scaled(a: &SmallMat, k: i64, b: &SmallMat) -> SmallMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| narrow(*x as i128 - k as i128 * *y as i128))
                .collect()
        })
        .collect()
}

pub fn sub_identity(a: &SmallMat, k: i64) -> SmallMat {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = narrow(row[i] as i128 - k as i128);
    }
    out
}

pub fn vec_mul(v: &[i64], m: &SmallMat) -> Vec<i64> {
    let cols = m.first().map_or(0, Vec::len);
    let mut acc = vec![0i128; cols];
    for (x, row) in v.iter().zip(m) {
        if *x == 0 {
            continue;
        }
        for (s, y) in acc.iter_mut().zip(row) {
            *s += *x as i128 * *y as i128;
        }
    }
    acc.into_iter().map(narrow).collect()
}

pub fn to_int_matrix(m: &SmallMat, cols: usize) -> IntMatrix {
    IntMatrix::from_rows(cols, m)
}

pub fn from_int_matrix(m: &IntMatrix) -> SmallMat {
    m.iter_rows()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i64().expect("entry does not fit in i64"))
                .collect()
        })
        .collect()
}

pub fn big_row(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let a = vec![vec![1, 2], vec![3, 4]];
        assert_eq!(mul(&a, &identity(2)), a);
        assert_eq!(mul(&a, &a), vec![vec![7, 10], vec![15, 22]]);
        assert_eq!(vec_mul(&[1, 1], &a), vec![4, 6]);
        assert_eq!(sub_identity(&a, 1), vec![vec![0, 2], vec![3, 3]]);
        assert_eq!(
            sub_scaled(&a, 2, &identity(2)),
            vec![vec![-1, 2], vec![3, 2]]
        );
    }
}
