//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

#[path = "../../core/tests/common/lattice.rs"]
mod lattice_props;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use manin_catalog::{fixture_entries, CatalogEntry};
use manin_cli::{run, Cli, EXIT_OK};
use manin_core::arith::{factor, genus_x0, primes_up_to};
use manin_core::certify::{certify_stevens, CurveRecord, PrimeStatus};
use manin_core::elliptic::{ap_via_counting, match_curve_to_newform, minimal_model_of};
use manin_core::hecke_forms::{congruence_number, sturm_bound};
use manin_core::invariants::{degree_congruence_gap, modular_degree};
use manin_core::lattice::IntMatrix;
use manin_core::modsym::{build_space, rational_eigenspaces};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::test_runner::{Config, TestError, TestRunner};
use rayon::prelude::*;
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_json(args: &[&str]) -> Result<Value, String> {
    let mut argv = vec!["manin", "--offline", "--format", "json"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let out = run(&cli);
    ensure(out.code == EXIT_OK, || {
        format!("{args:?} exited {}: {}", out.code, out.stderr.trim())
    })?;
    serde_json::from_str(&out.stdout).map_err(|e| e.to_string())
}

fn optimal_upto(bound: u64) -> Vec<&'static CatalogEntry> {
    fixture_entries()
        .iter()
        .filter(|e| e.optimal && e.conductor <= bound)
        .collect()
}

fn census_reproduction() -> Check {
    let r = cli_json(&["census", "--max-conductor", "200"])?;
    let counts: Vec<u64> = [
        "selected_count",
        "settled_by_mm1_count",
        "remaining_after_mm1_count",
        "settled_by_mm15_count",
        "remaining_after_mm15_count",
    ]
    .iter()
    .map(|k| r[k].as_u64().unwrap_or(u64::MAX))
    .collect();
    ensure(counts == [62, 47, 15, 10, 5], || {
        format!("counts {counts:?}")
    })?;
    let residue = r["residue"].as_array().cloned().unwrap_or_default();
    let labels: Vec<&str> = residue
        .iter()
        .filter_map(|e| e["curve_label"].as_str())
        .collect();
    ensure(
        labels == ["130.a2", "130.b4", "130.c1", "170.a2", "170.b1"],
        || format!("residue {labels:?}"),
    )?;
    ensure(
        residue
            .iter()
            .all(|e| e["two_torsion_rank"].as_u64().is_some_and(|k| k > 0)),
        || "a residual curve has trivial E(Q)[2]".into(),
    )?;
    Ok(format!(
        "62 / 47 / 15 / 10 / 5, residue {}",
        labels.join(" ")
    ))
}

fn certify_530a1() -> Check {
    let r = cli_json(&["certify", "--label", "530.a1"])?;
    let cert = &r["certificate"];
    ensure(cert["conclusion"] == "manin-holds", || {
        format!("conclusion {}", cert["conclusion"])
    })?;
    let p2 = cert["per_prime"]
        .as_array()
        .and_then(|v| v.iter().find(|p| p["prime"] == 2))
        .ok_or("no entry for p = 2")?;
    ensure(
        p2["rule"] == "MM2" && p2["status"] == "certified-zero",
        || format!("p = 2: {p2}"),
    )?;
    let verdicts: BTreeMap<String, String> = cert["criteria"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|c| c["prime"] == 2)
        .map(|c| {
            (
                c["rule"].as_str().unwrap_or("").to_string(),
                c["verdict"].as_str().unwrap_or("").to_string(),
            )
        })
        .collect();
    for rule in ["MK2", "MK3", "MK4", "MM1", "MM15"] {
        ensure(
            verdicts.get(rule).map(String::as_str) == Some("not-applicable"),
            || format!("{rule}: {:?}", verdicts.get(rule)),
        )?;
    }
    Ok("ManinHolds via MM2; MK2 MK3 MK4 MM1 MM15 not applicable".into())
}

fn squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

fn stevens_blanket() -> Check {
    let mut classes: BTreeMap<String, Vec<CurveRecord>> = BTreeMap::new();
    for e in fixture_entries()
        .iter()
        .filter(|e| e.conductor <= 200 && squarefree(e.conductor))
    {
        classes
            .entry(e.class_label().map_err(|e| e.to_string())?)
            .or_default()
            .push(e.to_record().map_err(|e| e.to_string())?);
    }
    for (class, curves) in &classes {
        let c =
            certify_stevens(curves[0].conductor, curves).map_err(|e| format!("{class}: {e}"))?;
        ensure(
            c.per_prime
                .iter()
                .all(|p| p.status == PrimeStatus::CertifiedZero),
            || format!("{class}: {}", c.to_table()),
        )?;
    }
    let levels: std::collections::BTreeSet<u64> =
        classes.values().map(|v| v[0].conductor).collect();
    Ok(format!(
        "{} classes at {} squarefree levels",
        classes.len(),
        levels.len()
    ))
}

fn numeric_manin_constants() -> Check {
    let curves = optimal_upto(100);
    let worst = curves
        .par_iter()
        .map(|e| {
            let r = cli_json(&["numeric", "--label", &e.label, "--tol", "1e-8"])?;
            let c = r["c_num"].as_f64().ok_or("missing c_num")?;
            ensure((c - 1.0).abs() < 1e-6, || format!("{}: c = {c}", e.label))?;
            Ok((c - 1.0).abs())
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(format!(
        "{} curves, max |c - 1| = {worst:.1e}",
        curves.len()
    ))
}

fn degree_oracle() -> Check {
    let curves = optimal_upto(100);
    curves.par_iter().try_for_each(|e| {
        let s = build_space(e.conductor);
        let forms = rational_eigenspaces(&s);
        let m = minimal_model_of(e.ainvs).map_err(|x| x.to_string())?;
        let i = match_curve_to_newform(&m, e.conductor, &forms)
            .map_err(|x| format!("{}: {x}", e.label))?;
        let d = modular_degree(&s, &forms[i], i).map_err(|x| format!("{}: {x}", e.label))?;
        ensure(Some(d.degree) == e.modular_degree, || {
            format!("{}: degree {} vs {:?}", e.label, d.degree, e.modular_degree)
        })?;
        let root = d.index_used.isqrt();
        ensure(root * root == d.index_used, || {
            format!("{}: index {} is not a square", e.label, d.index_used)
        })
    })?;
    Ok(format!("{} optimal curves", curves.len()))
}

fn divisibility_suite() -> Check {
    let per_level = (1..=100u64)
        .into_par_iter()
        .map(|n| {
            let s = build_space(n);
            let forms = rational_eigenspaces(&s);
            for (i, f) in forms.iter().enumerate() {
                let d = modular_degree(&s, f, i).map_err(|x| format!("N={n}: {x}"))?;
                let r = congruence_number(&s, f).map_err(|x| format!("N={n}: {x}"))?;
                ensure((&r % BigInt::from(d.degree)).is_zero(), || {
                    format!("N={n}: degree {} does not divide r_f {r}", d.degree)
                })?;
                let g = degree_congruence_gap(&d, &r).map_err(|x| format!("N={n}: {x}"))?;
                ensure(g.gap >= 0, || format!("N={n}: gap {}", g.gap))?;
                ensure(n % 2 == 0 || g.gap == 0, || {
                    format!("N={n}: odd level with gap {}", g.gap)
                })?;
            }
            Ok(forms.len())
        })
        .collect::<Result<Vec<usize>, String>>()?;
    Ok(format!(
        "{} newforms at levels <= 100",
        per_level.iter().sum::<usize>()
    ))
}

fn modsym_suite() -> Check {
    let small: Vec<u64> = primes_up_to(13);
    (1..=60u64).into_par_iter().try_for_each(|n| {
        let s = build_space(n);
        let ops: Vec<IntMatrix> = small
            .iter()
            .map(|&p| {
                s.hecke_operator(p)
                    .map(|h| h.matrix)
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        for (a, ta) in small.iter().zip(&ops) {
            for (b, tb) in small.iter().zip(&ops) {
                ensure(ta.mul(tb) == tb.mul(ta), || {
                    format!("N={n}: T_{a} T_{b} != T_{b} T_{a}")
                })?;
            }
        }
        Ok::<(), String>(())
    })?;
    let mut involutions = 0usize;
    let mut ap_checks = 0usize;
    let fixture = fixture_entries();
    let per_level = (1..=100u64)
        .into_par_iter()
        .map(|n| {
            let s = build_space(n);
            let id = IntMatrix::identity(s.dimension());
            let mut w_count = 0;
            for (p, e) in factor(n) {
                let w = s.atkin_lehner(p.pow(e)).map_err(|x| x.to_string())?;
                ensure(w.mul(&w) == id, || format!("N={n}: W_{}^2 != 1", p.pow(e)))?;
                w_count += 1;
            }
            let f = s.fricke();
            ensure(f.mul(&f) == id, || format!("N={n}: W_N^2 != 1"))?;
            let forms = rational_eigenspaces(&s);
            let mut aps = 0;
            for e in fixture.iter().filter(|e| e.optimal && e.conductor == n) {
                let m = minimal_model_of(e.ainvs).map_err(|x| x.to_string())?;
                let i = match_curve_to_newform(&m, n, &forms)
                    .map_err(|x| format!("{}: {x}", e.label))?;
                let basis = forms[i].eigenspace.basis();
                for p in primes_up_to(sturm_bound(n))
                    .into_iter()
                    .filter(|p| n % p != 0)
                {
                    let ap = ap_via_counting(&m, p).map_err(|x| x.to_string())?;
                    let t = s.hecke_operator(p).map_err(|x| x.to_string())?.matrix;
                    ensure(basis.mul(&t) == basis.scale(&BigInt::from(ap)), || {
                        format!("{}: T_{p} does not act by a_p = {ap}", e.label)
                    })?;
                    aps += 1;
                }
            }
            Ok((w_count + 1, aps))
        })
        .collect::<Result<Vec<(usize, usize)>, String>>()?;
    for (w, a) in per_level {
        involutions += w;
        ap_checks += a;
    }
    for n in 1..=200u64 {
        let s = build_space(n);
        ensure(s.dimension() as u64 == 2 * genus_x0(n), || {
            format!(
                "N={n}: dimension {} vs genus {}",
                s.dimension(),
                genus_x0(n)
            )
        })?;
    }
    Ok(format!("commutativity N <= 60, {involutions} involutions, {ap_checks} a_p agreements, genus N <= 200"))
}

fn failure<T: std::fmt::Debug>(name: &str) -> impl Fn(TestError<T>) -> String + '_ {
    move |e| format!("{name}: {e}")
}

fn lattice_suite() -> Check {
    use lattice_props::*;
    let cfg = || {
        TestRunner::new(Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        })
    };
    cfg()
        .run(&any_matrix(), |a| hnf_idempotent(&a))
        .map_err(failure("hnf idempotence"))?;
    cfg()
        .run(&any_matrix(), |a| snf_recomposes(&a))
        .map_err(failure("snf recomposition"))?;
    cfg()
        .run(&quotient_case(), |(g, k, u1, u2)| {
            quotient_order_basis_invariant(&g, &k, &u1, &u2)
        })
        .map_err(failure("quotient order"))?;
    cfg()
        .run(&pair_case(), |(a, b)| second_isomorphism(&a, &b))
        .map_err(failure("second isomorphism"))?;
    Ok("4 properties x 1000 cases".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("census reproduction up to 200", census_reproduction),
        ("530.a1 settled by MM2", certify_530a1),
        ("Stevens blanket for squarefree N <= 200", stevens_blanket),
        ("numeric Manin constants N <= 100", numeric_manin_constants),
        ("degree oracle N <= 100", degree_oracle),
        ("deg | r_f and gap for N <= 100", divisibility_suite),
        ("modular symbols properties", modsym_suite),
        ("lattice properties", lattice_suite),
    ];
    let results: Vec<(Check, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let r = f();
                    (r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join().unwrap_or_else(|p| {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                    (Err(format!("panicked: {}", msg.unwrap_or_default())), 0.0)
                })
            })
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (r, secs))) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("PASS  {}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
