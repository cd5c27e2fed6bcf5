mod common;

use manin_core::arith::factor;
use manin_core::elliptic::{match_curve_to_newform, minimal_model_of};
use manin_core::hecke_forms::congruence_number;
use manin_core::invariants::{
    class_letters, degree_congruence_gap, degree_with_eigenspace, modular_degree, DegreeResult,
    InvariantsError,
};
use manin_core::modsym::{build_space, rational_eigenspaces};
use num_bigint::BigInt;

#[test]
fn degree_examples() {
    let s = build_space(11);
    let f = rational_eigenspaces(&s);
    let d = modular_degree(&s, &f[0], 0).unwrap();
    assert_eq!(
        d,
        DegreeResult {
            level: 11,
            newform: "a".into(),
            degree: 1,
            index_used: 1
        }
    );

    let s = build_space(37);
    let f = rational_eigenspaces(&s);
    let d = modular_degree(&s, &f[0], 0).unwrap();
    assert_eq!((d.degree, d.index_used), (2, 4));

    let s = build_space(26);
    let f = rational_eigenspaces(&s);
    let degs: Vec<u64> = f
        .iter()
        .enumerate()
        .map(|(i, g)| modular_degree(&s, g, i).unwrap().degree)
        .collect();
    let fixture = common::fixture();
    let reference: Vec<u64> = fixture
        .iter()
        .filter(|c| c.conductor == 26 && c.optimal)
        .map(|c| c.modular_degree.unwrap())
        .collect();
    assert_eq!(degs, reference);

    let s11 = build_space(11);
    assert_eq!(
        modular_degree(&build_space(37), &rational_eigenspaces(&s11)[0], 0),
        Err(InvariantsError::LevelMismatch {
            form: 11,
            space: 37
        })
    );
}

#[test]
fn class_letter_encoding() {
    assert_eq!(class_letters(0), "a");
    assert_eq!(class_letters(25), "z");
    assert_eq!(class_letters(26), "ba");
    assert_eq!(class_letters(27), "bb");
}

#[test]
fn degrees_match_reference_for_optimal_curves() {
    let fixture = common::fixture();
    let mut checked = 0;
    for n in 11..=100u64 {
        let curves: Vec<_> = fixture
            .iter()
            .filter(|c| c.conductor == n && c.optimal)
            .collect();
        if curves.is_empty() {
            continue;
        }
        let s = build_space(n);
        let forms = rational_eigenspaces(&s);
        for c in curves {
            let m = minimal_model_of(c.ainvs).unwrap();
            let i = match_curve_to_newform(&m, n, &forms).unwrap();
            let d = modular_degree(&s, &forms[i], i).unwrap();
            assert_eq!(d.index_used, d.degree * d.degree);
            assert_eq!(Some(d.degree), c.modular_degree, "{}", c.label);
            checked += 1;
        }
    }
    assert_eq!(checked, 93);
}

#[test]
fn degree_divides_congruence_number() {
    for n in 11..=100u64 {
        let s = build_space(n);
        for (i, f) in rational_eigenspaces(&s).iter().enumerate() {
            let d = modular_degree(&s, f, i).unwrap();
            let r = congruence_number(&s, f).unwrap();
            let gap = degree_congruence_gap(&d, &r).unwrap();
            assert!(gap.gap >= 0, "N={n}");
            if n % 2 == 1 {
                assert_eq!(gap.gap, 0, "N={n}");
            }
            let q: u64 = gap
                .quotient_factors
                .iter()
                .map(|&(p, e)| p.pow(e))
                .product();
            assert_eq!(BigInt::from(q * d.degree), r);
        }
    }
}

#[test]
fn gap_examples() {
    let d = DegreeResult {
        level: 11,
        newform: "a".into(),
        degree: 1,
        index_used: 1,
    };
    assert_eq!(degree_congruence_gap(&d, &BigInt::from(1)).unwrap().gap, 0);
    let d = DegreeResult {
        level: 37,
        newform: "a".into(),
        degree: 2,
        index_used: 4,
    };
    let g = degree_congruence_gap(&d, &BigInt::from(2)).unwrap();
    assert_eq!((g.gap, g.quotient_factors.len()), (0, 0));
    let g = degree_congruence_gap(&d, &BigInt::from(12)).unwrap();
    assert_eq!((g.gap, g.quotient_factors), (1, vec![(2, 1), (3, 1)]));
    assert_eq!(
        degree_congruence_gap(&d, &BigInt::from(3)),
        Err(InvariantsError::DivisibilityViolation {
            degree: 2,
            r_f: BigInt::from(3)
        })
    );
}

#[test]
fn degree_is_atkin_lehner_invariant() {
    for n in [37u64, 43, 58, 77, 91, 99] {
        let s = build_space(n);
        for (i, f) in rational_eigenspaces(&s).iter().enumerate() {
            let d = modular_degree(&s, f, i).unwrap();
            for (p, e) in factor(n) {
                let w = s.atkin_lehner(p.pow(e)).unwrap();
                assert_eq!(
                    degree_with_eigenspace(&s, f, &w),
                    Some(BigInt::from(d.index_used)),
                    "N={n}"
                );
            }
            assert_eq!(
                degree_with_eigenspace(&s, f, &s.fricke()),
                Some(BigInt::from(d.index_used))
            );
        }
    }
}
