mod common;

use manin_core::elliptic::{match_curve_to_newform, minimal_model_of};
use manin_core::modsym::{build_space, rational_eigenspaces};
use manin_core::periods::{
    eisenstein_invariants, elliptic_period_lattice, manin_constant_numeric, newform_period_lattice,
    LatticeKind, NewformPeriods, PeriodLattice, PeriodsError, DEFAULT_TOL,
};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

// 11a1 real period, from the AGM in 30-digit arithmetic cross-checked by numerical quadrature
const OMEGA_11A1: f64 = 1.269_209_304_279_553_4;

#[test]
fn agm_examples() {
    let e = elliptic_period_lattice(
        &minimal_model_of([0, -1, 1, -10, -20]).unwrap(),
        DEFAULT_TOL,
    )
    .unwrap();
    assert!((e.real_period() - OMEGA_11A1).abs() < 1e-12);
    assert_eq!(e.kind, LatticeKind::NonRectangular);
    assert!(e.tau().im > 0.0);

    let e =
        elliptic_period_lattice(&minimal_model_of([0, 0, 0, -1, 0]).unwrap(), DEFAULT_TOL).unwrap();
    assert_eq!(e.kind, LatticeKind::Rectangular);
    assert!((e.tau() - Complex64::new(0.0, 1.0)).norm() < 1e-12);

    let m = minimal_model_of([0, -1, 1, -10, -20]).unwrap();
    assert_eq!(
        elliptic_period_lattice(&m, 0.0),
        Err(PeriodsError::InvalidTolerance(0.0))
    );
    assert!(matches!(
        elliptic_period_lattice(&m, 1e-30),
        Err(PeriodsError::Unattainable { .. })
    ));
}

#[test]
fn agm_lattice_reproduces_c4_c6() {
    for c in common::fixture().iter().filter(|c| c.conductor <= 100) {
        let m = minimal_model_of(c.ainvs).unwrap();
        let e = elliptic_period_lattice(&m, DEFAULT_TOL).unwrap();
        assert_eq!(e.kind == LatticeKind::Rectangular, m.delta_min > 0.into());
        let (c4, c6) = eisenstein_invariants(&e);
        let (x4, x6) = (m.c4.to_f64().unwrap(), m.c6.to_f64().unwrap());
        // relative to the size of the invariant, since periods carry relative error
        assert!(
            (c4 - x4).norm() < 10.0 * DEFAULT_TOL * x4.abs().max(1.0),
            "{} c4 {c4} vs {x4}",
            c.label
        );
        assert!(
            (c6 - x6).norm() < 10.0 * DEFAULT_TOL * x6.abs().max(1.0),
            "{} c6 {c6} vs {x6}",
            c.label
        );
    }
}

#[test]
fn newform_lattice_examples() {
    for (n, ainvs) in [(11u64, [0, -1, 1, -10, -20]), (37, [0, 0, 1, -1, 0])] {
        let s = build_space(n);
        let forms = rational_eigenspaces(&s);
        let m = minimal_model_of(ainvs).unwrap();
        let i = match_curve_to_newform(&m, n, &forms).unwrap();
        let lf = newform_period_lattice(&s, &forms[i], DEFAULT_TOL).unwrap();
        let le = elliptic_period_lattice(&m, DEFAULT_TOL).unwrap();
        assert_eq!(lf.kind, le.kind);
        let c = manin_constant_numeric(&le, &lf, DEFAULT_TOL).unwrap();
        assert_eq!(c.nearest, 1);
        assert!(c.residual < 1e-8);
    }
    let s = build_space(11);
    let f = rational_eigenspaces(&s);
    assert!(matches!(
        newform_period_lattice(&s, &f[0], 1e-300),
        Err(PeriodsError::Unattainable { .. })
    ));
    assert_eq!(
        newform_period_lattice(&s, &f[0], -1.0),
        Err(PeriodsError::InvalidTolerance(-1.0))
    );
}

#[test]
fn scaled_lattice_is_not_integral_ratio() {
    let m = minimal_model_of([0, -1, 1, -10, -20]).unwrap();
    let e = elliptic_period_lattice(&m, DEFAULT_TOL).unwrap();
    // a u = 2 model has periods scaled by 1/2 relative to the Néron lattice
    let half = PeriodLattice {
        omega1: e.omega1 * 0.5,
        omega2: e.omega2 * 0.5,
        ..e
    };
    let c = manin_constant_numeric(&half, &e, DEFAULT_TOL);
    assert_eq!(c, Err(PeriodsError::NotIntegral(0.5)));
    assert_eq!(
        manin_constant_numeric(&e, &half, DEFAULT_TOL)
            .unwrap()
            .nearest,
        2
    );
}

#[test]
fn manin_constant_is_one_up_to_100() {
    for c in common::fixture()
        .iter()
        .filter(|c| c.conductor <= 100 && c.optimal)
    {
        let s = build_space(c.conductor);
        let forms = rational_eigenspaces(&s);
        let m = minimal_model_of(c.ainvs).unwrap();
        let i = match_curve_to_newform(&m, c.conductor, &forms).unwrap();
        let lf = newform_period_lattice(&s, &forms[i], DEFAULT_TOL).unwrap();
        let le = elliptic_period_lattice(&m, DEFAULT_TOL).unwrap();
        let r = manin_constant_numeric(&le, &lf, DEFAULT_TOL).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6, "{}: {}", c.label, r.ratio);
    }
}

#[test]
fn period_map_is_linear_and_conjugation_equivariant() {
    let s = build_space(43);
    let forms = rational_eigenspaces(&s);
    let p = NewformPeriods::new(&s, &forms[0], DEFAULT_TOL).unwrap();
    let star = s.star_involution().to_i64_rows().unwrap();
    let g = s.dimension();
    for i in 0..g {
        let e: Vec<i64> = (0..g).map(|j| i64::from(i == j)).collect();
        let z = p.period(&e);
        let starred = p.period(&star[i]);
        assert!((starred - z.conj()).norm() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn manin_ratio_is_basis_invariant(a in -4i64..=4, b in -4i64..=4, k in -3i64..=3) {
        // [[1 + a b, a], [b, 1]]·[[1, k], [0, 1]] is unimodular
        let u = [[1 + a * b, (1 + a * b) * k + a], [b, b * k + 1]];
        let s = build_space(37);
        let forms = rational_eigenspaces(&s);
        let m = minimal_model_of([0, 0, 1, -1, 0]).unwrap();
        let p = NewformPeriods::new(&s, &forms[0], DEFAULT_TOL).unwrap();
        let [z1, z2] = p.basis_periods();
        let w1 = z1 * u[0][0] as f64 + z2 * u[0][1] as f64;
        let w2 = z1 * u[1][0] as f64 + z2 * u[1][1] as f64;
        let lf = PeriodLattice::from_basis(w1, w2, DEFAULT_TOL).unwrap();
        let le = elliptic_period_lattice(&m, DEFAULT_TOL).unwrap();
        let r = manin_constant_numeric(&le, &lf, DEFAULT_TOL).unwrap();
        prop_assert_eq!(r.nearest, 1);
        prop_assert!((lf.real_period() - p.lattice().unwrap().real_period()).abs() < 1e-9);
    }
}
