use manin_core::arith::{is_prime, primes_up_to};
use manin_core::hecke_forms::{
    congruence_number, extend_an, hecke_on_qexp, integral_cusp_basis, sturm_bound, EigenFunctional,
    HeckeFormsError,
};
use manin_core::lattice::{quotient_order, IntMatrix, Lattice, QuotientOrder};
use manin_core::modsym::{build_space, rational_eigenspaces, ModSymSpace, RationalNewform};
use num_bigint::BigInt;
use proptest::prelude::*;

fn newforms(n: u64) -> (ModSymSpace, Vec<RationalNewform>) {
    let s = build_space(n);
    let f = rational_eigenspaces(&s);
    (s, f)
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[test]
fn sturm_examples() {
    assert_eq!(sturm_bound(11), 2);
    assert_eq!(sturm_bound(1), 1);
    assert_eq!(sturm_bound(130), 42);
}

#[test]
fn an_recursion_11a() {
    let (_, f) = newforms(11);
    let f = &f[0];
    assert_eq!(extend_an(f, 1), Ok(1));
    assert_eq!(extend_an(f, 4), Ok(2));
    assert_eq!(extend_an(f, 6), Ok(2));
    assert_eq!(extend_an(f, 0), Err(HeckeFormsError::ZeroIndex));
    assert_eq!(extend_an(f, 1009), Err(HeckeFormsError::MissingAp(1009)));
}

#[test]
fn eigenfunctional_matches_recorded_eigenvalues() {
    for n in [11u64, 37, 43, 57, 58, 91] {
        let (s, forms) = newforms(n);
        for f in &forms {
            let ef = EigenFunctional::new(&s, f).unwrap();
            for (&p, &a) in &f.ap {
                assert_eq!(ef.ap(p), a, "N={n} p={p}");
            }
            for p in primes_up_to(400) {
                if n % p != 0 {
                    assert!(
                        (ef.ap(p) as f64).abs() <= 2.0 * (p as f64).sqrt(),
                        "Hasse N={n} p={p}"
                    );
                } else if (n / p) % p != 0 {
                    assert_eq!(ef.ap(p).abs(), 1);
                }
            }
        }
    }
}

#[test]
fn eigenfunctional_11a_coefficients() {
    let (s, f) = newforms(11);
    let ef = EigenFunctional::new(&s, &f[0]).unwrap();
    // a_p = p + 1 - #E(F_p) for y^2 + y = x^3 - x^2 - 10x - 20, counted by brute force
    for p in primes_up_to(200).into_iter().filter(|&p| p != 11) {
        let mut count = 1i64; // point at infinity
        for x in 0..p as i64 {
            for y in 0..p as i64 {
                let pi = p as i64;
                let lhs = (y * y + y).rem_euclid(pi);
                let rhs = (x * x * x - x * x - 10 * x - 20).rem_euclid(pi);
                if lhs == rhs {
                    count += 1;
                }
            }
        }
        assert_eq!(ef.ap(p), p as i64 + 1 - count, "p={p}");
    }
}

#[test]
fn integral_basis_examples() {
    let b = integral_cusp_basis(&build_space(11), 10).unwrap();
    assert_eq!(
        b.coeff_matrix,
        IntMatrix::from_i64(&[&[1, -2, -1, 2, 1, 2, -2, 0, -2, -2]])
    );
    let b = integral_cusp_basis(&build_space(1), 5).unwrap();
    assert_eq!(b.rank(), 0);
    assert_eq!(
        integral_cusp_basis(&build_space(37), 3),
        Err(HeckeFormsError::PrecisionBelowSturm {
            precision: 3,
            sturm: 7
        })
    );

    // level 22: spanned by f(q) and f(q^2) for the level-11 newform f
    let prec = 30u64;
    let b22 = integral_cusp_basis(&build_space(22), prec).unwrap();
    assert_eq!(b22.rank(), 2);
    let (_, f11) = newforms(11);
    let s11 = build_space(11);
    let ef = EigenFunctional::new(&s11, &f11[0]).unwrap();
    let a = ef.coefficients(prec as usize);
    let f_q: Vec<i64> = (1..=prec as usize).map(|n| a[n]).collect();
    let f_q2: Vec<i64> = (1..=prec as usize)
        .map(|n| if n % 2 == 0 { a[n / 2] } else { 0 })
        .collect();
    let old = Lattice::from_rows(prec as usize, &[ints(&f_q), ints(&f_q2)]);
    for row in b22.coeff_matrix.iter_rows() {
        assert!(old.in_rational_span(row));
    }
}

#[test]
fn basis_is_stable_under_precision_increase() {
    for n in [11u64, 23, 37, 42, 60] {
        let s = build_space(n);
        let b0 = sturm_bound(n);
        let lo = integral_cusp_basis(&s, b0).unwrap();
        let hi = integral_cusp_basis(&s, b0 + 10).unwrap();
        let idx: Vec<usize> = (0..b0 as usize).collect();
        assert_eq!(
            lo.lattice(),
            Lattice::from_generators(b0 as usize, &hi.coeff_matrix.select_cols(&idx)),
            "N={n}"
        );
    }
}

#[test]
fn basis_is_hecke_stable() {
    for n in [23u64, 33, 37, 40] {
        let s = build_space(n);
        let b = sturm_bound(n) as usize + 2;
        let wide = integral_cusp_basis(&s, 5 * b as u64).unwrap();
        let idx: Vec<usize> = (0..b).collect();
        let lat = Lattice::from_generators(b, &wide.coeff_matrix.select_cols(&idx));
        for m in 2..=5u64 {
            for row in wide.coeff_matrix.iter_rows() {
                let img = hecke_on_qexp(n, m, row, b);
                assert!(lat.contains(&img), "N={n} T_{m}");
            }
        }
    }
}

#[test]
fn newform_is_primitive_in_integral_lattice() {
    for n in [11u64, 37, 43, 53, 65] {
        let (s, forms) = newforms(n);
        let prec = sturm_bound(n) + 10;
        let basis = integral_cusp_basis(&s, prec).unwrap();
        let lat = basis.lattice();
        for f in &forms {
            let ef = EigenFunctional::new(&s, f).unwrap();
            let a = ef.coefficients(prec as usize);
            let v = ints(&a[1..]);
            assert!(lat.contains(&v));
            let line = Lattice::from_rows(prec as usize, &[v]);
            assert!(line.is_saturated());
        }
    }
}

#[test]
fn congruence_examples() {
    let (s, f) = newforms(11);
    assert_eq!(congruence_number(&s, &f[0]).unwrap(), BigInt::from(1));
    let (s, f) = newforms(37);
    // f[0] is 37a (a_2 = -2)
    assert_eq!(congruence_number(&s, &f[0]).unwrap(), BigInt::from(2));
    assert_eq!(congruence_number(&s, &f[1]).unwrap(), BigInt::from(2));
}

/// Congruence number from q-expansions alone: `S ∩ (Qf)^⊥` is the saturated
/// span of `(T_p - a_p) S` computed on truncated q-expansions.
fn congruence_by_qexp(s: &ModSymSpace, f: &RationalNewform, unimodular: &IntMatrix) -> BigInt {
    let n = s.level();
    let prec = sturm_bound(n) as usize + 10;
    let primes: Vec<u64> = primes_up_to(40)
        .into_iter()
        .filter(|p| n % p != 0)
        .collect();
    let pmax = *primes.last().unwrap() as usize;
    let wide = integral_cusp_basis(s, (pmax * prec) as u64).unwrap();
    let rows = unimodular.mul(&wide.coeff_matrix);
    let idx: Vec<usize> = (0..prec).collect();
    let sl = Lattice::from_generators(prec, &rows.select_cols(&idx));
    let ef = EigenFunctional::new(s, f).unwrap();
    let a = ef.coefficients(prec);
    let fl = Lattice::from_rows(prec, &[ints(&a[1..])]);
    let mut gens: Vec<Vec<BigInt>> = Vec::new();
    for &p in &primes {
        for row in rows.iter_rows() {
            let tp = hecke_on_qexp(n, p, row, prec);
            let ap = BigInt::from(ef.ap(p));
            gens.push(tp.iter().zip(row).map(|(x, y)| x - &ap * y).collect());
        }
    }
    let perp = Lattice::from_rows(prec, &gens).saturate();
    assert_eq!(perp.rank() + 1, sl.rank());
    match quotient_order(&sl, &fl.sum(&perp).unwrap()).unwrap() {
        QuotientOrder::Finite(k) => k,
        QuotientOrder::Infinite => panic!("complement too small"),
    }
}

#[test]
fn congruence_agrees_with_qexpansion_oracle() {
    for n in [37u64, 43, 53, 57, 58, 61, 65, 77, 79, 83, 89] {
        let (s, forms) = newforms(n);
        let g = s.genus() as usize;
        for f in &forms {
            let direct = congruence_number(&s, f).unwrap();
            let oracle = congruence_by_qexp(&s, f, &IntMatrix::identity(g));
            assert_eq!(direct, oracle, "N={n}");
        }
    }
}

fn unimodular_strategy(g: usize) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec((0..g, 0..g, -3i64..=3), 0..12).prop_map(move |ops| {
        let mut m = IntMatrix::identity(g);
        for (i, j, k) in ops {
            if i != j {
                m.add_row_multiple(i, j, &BigInt::from(k));
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn congruence_number_is_basis_invariant(u in unimodular_strategy(5)) {
        let (s, forms) = newforms(57);
        prop_assert_eq!(s.genus(), 5);
        for f in &forms {
            let direct = congruence_number(&s, f).unwrap();
            prop_assert_eq!(congruence_by_qexp(&s, f, &u), direct);
        }
    }
}

#[test]
fn hasse_bound_on_recorded_eigenvalues() {
    for n in 11..=100u64 {
        let (_, forms) = newforms(n);
        for f in &forms {
            assert_eq!(extend_an(f, 1), Ok(1));
            for (&p, &a) in &f.ap {
                if n % p != 0 {
                    assert!(((a * a) as u64) <= 4 * p, "N={n} p={p}");
                } else if (n / p) % p != 0 {
                    assert!(a == 1 || a == -1, "N={n} p={p}");
                } else {
                    assert_eq!(a, 0, "N={n} p={p}");
                }
                assert!(is_prime(p));
            }
        }
    }
}
