//! Commands behind the `manin` binary. Each returns an [`Outcome`] holding the
//! rendered output and the process exit code.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use manin_catalog::{fixture_entries, Catalog, CatalogConfig, CatalogEntry, CatalogError};
use manin_core::arith::factor;
use manin_core::certify::{
    census, certify_manin, certify_stevens, table, CertifyError, ComputedInputs, Conclusion,
    CurveRecord, Optimality, Provenance, SCHEMA_VERSION,
};
use manin_core::elliptic::{
    match_curve_to_newform, minimal_model, two_torsion_rank, MinimalModel, WeierstrassModel,
};
use manin_core::hecke_forms::congruence_number;
use manin_core::invariants::{
    class_letters, degree_congruence_gap, modular_degree, DegreeResult, GapReport,
};
use manin_core::modsym::{build_space, rational_eigenspaces};
use manin_core::periods::{
    elliptic_period_lattice, manin_constant_numeric, newform_period_lattice, PeriodsError,
    DEFAULT_TOL,
};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_NOT_OPTIMAL: i32 = 4;
pub const EXIT_COVERAGE: i32 = 5;
pub const EXIT_INCONSISTENT: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "manin",
    version,
    about = "Manin constants of elliptic optimal quotients of J_0(N)"
)]
pub struct Cli {
    /// Never contact the remote catalog.
    #[arg(long, global = true)]
    pub offline: bool,
    /// JSON-lines cache file for catalog entries.
    #[arg(long, global = true, value_name = "PATH")]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Worker threads; defaults to the number of processors.
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<usize>,
    /// Largest level accepted by `analyze`.
    #[arg(long, global = true, default_value_t = 1000, value_name = "N")]
    pub max_level: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rational newforms of level N with degrees and congruence numbers.
    Analyze { level: u64 },
    /// Per-prime certificate for the Manin constant of one curve.
    Certify(Selector),
    /// Staged count of 2-semistable optimal curves not covered by the classical criteria.
    Census {
        #[arg(long)]
        max_conductor: u64,
    },
    /// Numerical ratio of the Neron lattice to the newform period lattice.
    Numeric {
        #[command(flatten)]
        selector: Selector,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Quick end-to-end consistency checks.
    Selftest,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Selector {
    /// Catalog label such as 530.a1.
    #[arg(long)]
    pub label: Option<String>,
    /// Weierstrass coefficients a1,a2,a3,a4,a6.
    #[arg(long, allow_hyphen_values = true)]
    pub ainvs: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, msg: impl Into<String>) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: msg.into() + "\n",
        }
    }
}

type CmdResult = Result<Outcome, Outcome>;

fn catalog_code(e: &CatalogError) -> i32 {
    match e {
        CatalogError::Label(_) => EXIT_USAGE,
        _ => EXIT_COVERAGE,
    }
}

fn certify_code(e: &CertifyError) -> i32 {
    match e {
        CertifyError::NotOptimal(_) => EXIT_NOT_OPTIMAL,
        CertifyError::Coverage { .. }
        | CertifyError::OptimalCount { .. }
        | CertifyError::MissingDegree(_) => EXIT_COVERAGE,
        CertifyError::BadLabel(_) | CertifyError::ZeroConductor => EXIT_USAGE,
        _ => EXIT_INCONSISTENT,
    }
}

fn envelope(command: &str, payload: Value) -> String {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Value::Object(m), Value::Object(p)) = (&mut v, payload) {
        m.extend(p);
    }
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn run(cli: &Cli) -> Outcome {
    if let Some(k) = cli.workers {
        if k == 0 {
            return Outcome::fail(EXIT_USAGE, "--workers must be positive");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    let catalog = Catalog::new(CatalogConfig {
        offline: cli.offline,
        cache_path: cli.cache.clone(),
        ..Default::default()
    });
    let r = match &cli.command {
        Command::Analyze { level } => run_level(*level, cli.max_level, cli.format),
        Command::Certify(sel) => run_certify(&catalog, sel, cli.format),
        Command::Census { max_conductor } => run_census(&catalog, *max_conductor, cli.format),
        Command::Numeric { selector, tol } => run_numeric(&catalog, selector, *tol, cli.format),
        Command::Selftest => Ok(run_selftest(&catalog, cli.format)),
    };
    r.unwrap_or_else(|e| e)
}

#[derive(Debug, Clone, Serialize)]
pub struct NewformReport {
    pub label: String,
    pub ap: Vec<(u64, i64)>,
    pub degree: u64,
    pub index: u64,
    pub congruence_number: String,
    pub gap: i64,
    pub quotient_factors: Vec<(u64, u32)>,
}

fn degree_and_gap(
    space: &manin_core::modsym::ModSymSpace,
    f: &manin_core::modsym::RationalNewform,
    i: usize,
) -> Result<(DegreeResult, GapReport), Outcome> {
    let d =
        modular_degree(space, f, i).map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let r =
        congruence_number(space, f).map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let g = degree_congruence_gap(&d, &r)
        .map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    Ok((d, g))
}

pub fn run_level(n: u64, ceiling: u64, format: Format) -> CmdResult {
    if n == 0 || n > ceiling {
        return Err(Outcome::fail(
            EXIT_USAGE,
            format!("level must be in 1..={ceiling}, got {n}"),
        ));
    }
    let space = build_space(n);
    let forms = rational_eigenspaces(&space);
    let mut reports = Vec::new();
    for (i, f) in forms.iter().enumerate() {
        let (d, g) = degree_and_gap(&space, f, i)?;
        reports.push(NewformReport {
            label: format!("{n}.{}", class_letters(i)),
            ap: f
                .ap
                .iter()
                .filter(|(&p, _)| p < 30)
                .map(|(&p, &a)| (p, a))
                .collect(),
            degree: d.degree,
            index: d.index_used,
            congruence_number: g.r_f.to_string(),
            gap: g.gap,
            quotient_factors: g.quotient_factors,
        });
    }
    let out = match format {
        Format::Json => envelope(
            "analyze",
            json!({ "level": n, "genus": space.dimension() / 2, "newforms": to_value(&reports) }),
        ),
        Format::Table => {
            let mut s = format!(
                "level {n}, genus {}, {} rational newforms\n",
                space.dimension() / 2,
                reports.len()
            );
            let rows: Vec<[String; 6]> = reports
                .iter()
                .map(|r| {
                    let ap: Vec<String> = r.ap.iter().map(|(p, a)| format!("{p}:{a}")).collect();
                    [
                        r.label.clone(),
                        r.degree.to_string(),
                        r.congruence_number.clone(),
                        r.gap.to_string(),
                        format_factors(&r.quotient_factors),
                        ap.join(" "),
                    ]
                })
                .collect();
            if !rows.is_empty() {
                s.push_str(&table(
                    &["newform", "degree", "r_f", "gap", "r_f/deg", "a_p (p < 30)"],
                    &rows,
                ));
            }
            s
        }
    };
    Ok(Outcome::ok(out))
}

fn format_factors(f: &[(u64, u32)]) -> String {
    if f.is_empty() {
        return "1".into();
    }
    f.iter()
        .map(|&(p, e)| {
            if e == 1 {
                p.to_string()
            } else {
                format!("{p}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Looks the curve up by label, or by minimal model among snapshot curves with matching bad primes.
fn resolve(catalog: &Catalog, sel: &Selector) -> Result<(CatalogEntry, CurveRecord), Outcome> {
    let entry = match (&sel.label, &sel.ainvs) {
        (Some(l), _) => catalog
            .fetch_curve(l)
            .map_err(|e| Outcome::fail(catalog_code(&e), e.to_string()))?,
        (None, Some(a)) => {
            let w: WeierstrassModel = a
                .parse()
                .map_err(|e| Outcome::fail(EXIT_USAGE, format!("--ainvs: {e}")))?;
            let m = minimal_model(&w)
                .map_err(|e| Outcome::fail(EXIT_USAGE, format!("--ainvs: {e}")))?;
            find_by_model(&m).ok_or_else(|| {
                Outcome::fail(
                    EXIT_COVERAGE,
                    format!("curve {m} is not in the bundled catalog snapshot"),
                )
            })?
        }
        (None, None) => {
            return Err(Outcome::fail(
                EXIT_USAGE,
                "one of --label or --ainvs is required",
            ))
        }
    };
    let record = entry
        .to_record()
        .map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    Ok((entry, record))
}

fn find_by_model(m: &MinimalModel) -> Option<CatalogEntry> {
    let bad: Vec<u64> = m
        .bad_primes()
        .iter()
        .filter_map(|p| u64::try_from(p).ok())
        .collect();
    let target = m.ainvs_i64()?;
    fixture_entries()
        .iter()
        .filter(|e| {
            factor(e.conductor)
                .iter()
                .map(|&(p, _)| p)
                .eq(bad.iter().copied())
        })
        .find(|e| e.ainvs == target)
        .cloned()
}

#[derive(Debug, Clone, Serialize)]
struct ComputedReport {
    newform: String,
    degree: u64,
    congruence_number: String,
    gap: i64,
    two_torsion_rank: u32,
}

pub fn run_certify(catalog: &Catalog, sel: &Selector, format: Format) -> CmdResult {
    let (entry, record) = resolve(catalog, sel)?;
    if !record.optimality.optimal {
        return Err(Outcome::fail(
            EXIT_NOT_OPTIMAL,
            format!("{} is not the optimal curve of its isogeny class; the criteria apply only to optimal quotients", entry.label),
        ));
    }
    let n = record.conductor;
    let space = build_space(n);
    let forms = rational_eigenspaces(&space);
    let i = match_curve_to_newform(&record.model, n, &forms)
        .map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let (d, g) = degree_and_gap(&space, &forms[i], i)?;
    let computed = ComputedInputs {
        degree: Some(d.degree),
        r_f: Some(g.r_f.clone()),
        two_torsion_rank: Some(two_torsion_rank(&record.model)),
    };
    let cert = certify_manin(&record, &computed)
        .map_err(|e| Outcome::fail(certify_code(&e), e.to_string()))?;
    let class = entry
        .class_label()
        .map_err(|e| Outcome::fail(EXIT_USAGE, e.to_string()))?;
    let class_curves: Vec<CurveRecord> = catalog
        .fetch_range(n)
        .map_err(|e| Outcome::fail(catalog_code(&e), e.to_string()))?
        .iter()
        .filter(|e| e.class_label().map(|c| c == class).unwrap_or(false))
        .map(|e| e.to_record())
        .collect::<Result<_, _>>()
        .map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let stevens = certify_stevens(n, &class_curves)
        .map_err(|e| Outcome::fail(certify_code(&e), e.to_string()))?;
    let report = ComputedReport {
        newform: format!("{n}.{}", class_letters(i)),
        degree: d.degree,
        congruence_number: g.r_f.to_string(),
        gap: g.gap,
        two_torsion_rank: computed.two_torsion_rank.unwrap_or(0),
    };
    let out = match format {
        Format::Json => envelope(
            "certify",
            json!({ "computed": to_value(&report), "certificate": to_value(&cert), "stevens": to_value(&stevens) }),
        ),
        Format::Table => {
            let mut s = format!(
                "newform {}: degree {}, r_f {}, gap {}, E(Q)[2] rank {}\n\n",
                report.newform,
                report.degree,
                report.congruence_number,
                report.gap,
                report.two_torsion_rank
            );
            s.push_str(&cert.to_table());
            s.push('\n');
            s.push_str(&stevens.to_table());
            s
        }
    };
    let code = match cert.conclusion {
        Conclusion::ManinHolds | Conclusion::Bounded => EXIT_OK,
        Conclusion::Partial => EXIT_PARTIAL,
    };
    Ok(Outcome {
        code,
        stdout: out,
        stderr: String::new(),
    })
}

pub fn run_census(catalog: &Catalog, max_conductor: u64, format: Format) -> CmdResult {
    let data = catalog
        .census_data(max_conductor)
        .map_err(|e| Outcome::fail(catalog_code(&e), e.to_string()))?;
    let report =
        census(max_conductor, &data).map_err(|e| Outcome::fail(certify_code(&e), e.to_string()))?;
    let out = match format {
        Format::Json => envelope("census", to_value(&report)),
        Format::Table => report.to_table(),
    };
    Ok(Outcome::ok(out))
}

#[derive(Debug, Clone, Serialize)]
struct NumericReport {
    curve_label: String,
    newform: String,
    tol: f64,
    c_num: f64,
    nearest: i64,
    residual: f64,
    omega_plus_curve: f64,
    omega_plus_newform: f64,
}

pub fn run_numeric(catalog: &Catalog, sel: &Selector, tol: f64, format: Format) -> CmdResult {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Outcome::fail(
            EXIT_USAGE,
            format!("--tol must be a positive number, got {tol}"),
        ));
    }
    let (entry, record) = resolve(catalog, sel)?;
    if !record.optimality.optimal {
        return Err(Outcome::fail(
            EXIT_NOT_OPTIMAL,
            format!(
                "{} is not optimal; its lattice ratio is not a Manin constant",
                entry.label
            ),
        ));
    }
    let periods_code = |e: &PeriodsError| match e {
        PeriodsError::InvalidTolerance(_) | PeriodsError::Unattainable { .. } => EXIT_USAGE,
        _ => EXIT_INCONSISTENT,
    };
    let n = record.conductor;
    let space = build_space(n);
    let forms = rational_eigenspaces(&space);
    let i = match_curve_to_newform(&record.model, n, &forms)
        .map_err(|e| Outcome::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let le = elliptic_period_lattice(&record.model, tol)
        .map_err(|e| Outcome::fail(periods_code(&e), e.to_string()))?;
    let lf = newform_period_lattice(&space, &forms[i], tol)
        .map_err(|e| Outcome::fail(periods_code(&e), e.to_string()))?;
    let r = manin_constant_numeric(&le, &lf, tol)
        .map_err(|e| Outcome::fail(periods_code(&e), e.to_string()))?;
    let rep = NumericReport {
        curve_label: entry.label.clone(),
        newform: format!("{n}.{}", class_letters(i)),
        tol,
        c_num: r.ratio.abs(),
        nearest: r.nearest.abs(),
        residual: r.residual,
        omega_plus_curve: le.real_period(),
        omega_plus_newform: lf.real_period(),
    };
    let out = match format {
        Format::Json => envelope("numeric", to_value(&rep)),
        Format::Table => {
            let rows = [
                ["curve".to_string(), rep.curve_label.clone()],
                ["newform".into(), rep.newform.clone()],
                [
                    "real period of E".into(),
                    format!("{:.15}", rep.omega_plus_curve),
                ],
                [
                    "real period of f".into(),
                    format!("{:.15}", rep.omega_plus_newform),
                ],
                ["|c_num|".into(), format!("{:.12}", rep.c_num)],
                ["nearest integer".into(), rep.nearest.to_string()],
                ["residual".into(), format!("{:.3e}", rep.residual)],
            ];
            table(&["quantity", "value"], &rows)
        }
    };
    let code = if rep.residual < tol {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    };
    Ok(Outcome {
        code,
        stdout: out,
        stderr: String::new(),
    })
}

fn selftest_checks(catalog: &Catalog) -> Vec<(&'static str, Result<(), String>)> {
    let mut out: Vec<(&'static str, Result<(), String>)> = Vec::new();
    let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(msg) };

    out.push(("11.a degree 1 and r_f 1", {
        let s = build_space(11);
        let f = rational_eigenspaces(&s);
        match (modular_degree(&s, &f[0], 0), congruence_number(&s, &f[0])) {
            (Ok(d), Ok(r)) => check(
                d.degree == 1 && r == 1.into(),
                format!("degree {} r_f {r}", d.degree),
            ),
            (d, r) => Err(format!("{d:?} {r:?}")),
        }
    }));
    out.push(("37.a degree 2", {
        let s = build_space(37);
        let f = rational_eigenspaces(&s);
        match modular_degree(&s, &f[0], 0) {
            Ok(d) => check(
                d.degree == 2 && d.index_used == 4,
                format!("degree {}", d.degree),
            ),
            Err(e) => Err(e.to_string()),
        }
    }));
    out.push(("22 has no newforms", {
        let n = rational_eigenspaces(&build_space(22)).len();
        check(n == 0, format!("{n} newforms"))
    }));
    out.push(("11.a2 numeric Manin constant 1", {
        let s = build_space(11);
        let f = rational_eigenspaces(&s);
        let m = manin_core::elliptic::minimal_model_of([0, -1, 1, -10, -20]).expect("nonsingular");
        let r = elliptic_period_lattice(&m, DEFAULT_TOL).and_then(|le| {
            newform_period_lattice(&s, &f[0], DEFAULT_TOL)
                .and_then(|lf| manin_constant_numeric(&le, &lf, DEFAULT_TOL))
        });
        match r {
            Ok(r) => check(
                r.nearest.abs() == 1 && r.residual < 1e-6,
                format!("ratio {}", r.ratio),
            ),
            Err(e) => Err(e.to_string()),
        }
    }));
    out.push(("census up to 200", {
        match catalog
            .census_data(200)
            .map_err(|e| e.to_string())
            .and_then(|d| census(200, &d).map_err(|e| e.to_string()))
        {
            Ok(r) => {
                let counts = [
                    r.selected_count,
                    r.settled_by_mm1_count,
                    r.settled_by_mm15_count,
                    r.residue.len(),
                ];
                check(counts == [62, 47, 10, 5], format!("counts {counts:?}"))
            }
            Err(e) => Err(e),
        }
    }));
    out.push(("530.a1 settled by MM2", {
        let r = catalog
            .fetch_curve("530.a1")
            .map_err(|e| e.to_string())
            .and_then(|e| e.to_record().map_err(|e| e.to_string()));
        match r.and_then(|c| {
            certify_manin(&c, &ComputedInputs::from_model(&c.model)).map_err(|e| e.to_string())
        }) {
            Ok(c) => check(
                c.conclusion == Conclusion::ManinHolds
                    && c.prime(2).and_then(|p| p.rule).map(|r| r.to_string()) == Some("MM2".into()),
                format!("conclusion {}", c.conclusion),
            ),
            Err(e) => Err(e),
        }
    }));
    out.push(("asserted optimality is accepted", {
        let m = manin_core::elliptic::minimal_model_of([0, 0, 1, -1, 0]).expect("nonsingular");
        let o = Optimality {
            optimal: true,
            provenance: Provenance::Asserted,
        };
        match CurveRecord::new(None, m, 37, o)
            .map(|c| certify_manin(&c, &ComputedInputs::from_model(&c.model)))
        {
            Ok(Ok(c)) => check(
                c.conclusion == Conclusion::ManinHolds,
                c.conclusion.to_string(),
            ),
            Ok(Err(e)) => Err(e.to_string()),
            Err(e) => Err(e.to_string()),
        }
    }));
    out
}

pub fn run_selftest(catalog: &Catalog, format: Format) -> Outcome {
    let checks = selftest_checks(catalog);
    let all = checks.iter().all(|(_, r)| r.is_ok());
    let out = match format {
        Format::Json => {
            let v: Vec<Value> = checks
                .iter()
                .map(|(name, r)| json!({ "check": name, "pass": r.is_ok(), "detail": r.as_ref().err() }))
                .collect();
            envelope("selftest", json!({ "pass": all, "checks": v }))
        }
        Format::Table => {
            let rows: Vec<[String; 3]> = checks
                .iter()
                .map(|(name, r)| {
                    [
                        if r.is_ok() { "pass" } else { "FAIL" }.to_string(),
                        name.to_string(),
                        r.clone().err().unwrap_or_default(),
                    ]
                })
                .collect();
            table(&["result", "check", "detail"], &rows)
        }
    };
    Outcome {
        code: if all { EXIT_OK } else { EXIT_INCONSISTENT },
        stdout: out,
        stderr: String::new(),
    }
}
