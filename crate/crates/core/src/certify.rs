//! Rule engine for valuations of the Manin constant of an elliptic optimal
//! quotient `J_0(n) -> E`, its `Gamma_1` counterpart, and the staged census
//! over a catalog snapshot.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factor, is_prime};
use crate::elliptic::{two_torsion_rank, MinimalModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("conductor must be positive")]
    ZeroConductor,
    #[error("model has bad primes {model:?} but conductor {conductor} has support {support:?}")]
    ConductorMismatch {
        conductor: u64,
        model: Vec<String>,
        support: Vec<u64>,
    },
    #[error("{0} is not recorded as optimal; the rules only apply to optimal quotients")]
    NotOptimal(String),
    #[error(
        "computed modular degree {computed} disagrees with ingested degree {ingested} for {label}"
    )]
    DegreeMismatch {
        label: String,
        computed: u64,
        ingested: u64,
    },
    #[error("curves do not form one isogeny class of conductor {0}")]
    NotOneClass(u64),
    #[error("catalog data covers conductors up to {covered} but {requested} was requested")]
    Coverage { requested: u64, covered: u64 },
    #[error("isogeny class {class} has {optimal} curves marked optimal")]
    OptimalCount { class: String, optimal: usize },
    #[error("no modular degree available for {0}")]
    MissingDegree(String),
    #[error("malformed curve label {0:?}")]
    BadLabel(String),
}

/// `N.cI`, e.g. `130.a2`; the index may be absent for a class label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CurveLabel {
    pub conductor: u64,
    pub class: String,
    pub index: Option<u32>,
}

impl CurveLabel {
    pub fn class_label(&self) -> String {
        format!("{}.{}", self.conductor, self.class)
    }
}

impl FromStr for CurveLabel {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CertifyError::BadLabel(s.to_string());
        let (n, rest) = s.split_once('.').ok_or_else(bad)?;
        if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let conductor: u64 = n.parse().map_err(|_| bad())?;
        let split = rest
            .find(|c: char| !c.is_ascii_lowercase())
            .unwrap_or(rest.len());
        let (class, idx) = rest.split_at(split);
        if conductor == 0 || class.is_empty() {
            return Err(bad());
        }
        let index = if idx.is_empty() {
            None
        } else if idx.bytes().all(|b| b.is_ascii_digit()) && !idx.starts_with('0') {
            Some(idx.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        Ok(CurveLabel {
            conductor,
            class: class.to_string(),
            index,
        })
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.conductor, self.class)?;
        if let Some(i) = self.index {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl Ord for CurveLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.conductor, self.class.len(), &self.class, self.index).cmp(&(
            other.conductor,
            other.class.len(),
            &other.class,
            other.index,
        ))
    }
}

impl PartialOrd for CurveLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Catalog order on label strings; unparsable labels sort last, lexically.
pub fn label_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<CurveLabel>(), b.parse::<CurveLabel>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Ingested { source: String },
    Asserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimality {
    pub optimal: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: Option<String>,
    pub model: MinimalModel,
    pub conductor: u64,
    pub conductor_factors: Vec<(u64, u32)>,
    pub optimality: Optimality,
    pub degree: Option<u64>,
    pub torsion_order: Option<u64>,
    pub kodaira: Option<BTreeMap<u64, String>>,
}

impl CurveRecord {
    /// Checks that the primes of bad reduction of `model` are exactly the
    /// primes dividing `conductor`.
    pub fn new(
        label: Option<String>,
        model: MinimalModel,
        conductor: u64,
        optimality: Optimality,
    ) -> Result<Self, CertifyError> {
        if conductor == 0 {
            return Err(CertifyError::ZeroConductor);
        }
        let conductor_factors = factor(conductor);
        let support: Vec<u64> = conductor_factors.iter().map(|&(p, _)| p).collect();
        let bad = model.bad_primes();
        if bad.len() != support.len()
            || bad
                .iter()
                .zip(&support)
                .any(|(b, &p)| *b != BigInt::from(p))
        {
            return Err(CertifyError::ConductorMismatch {
                conductor,
                model: bad.iter().map(|b| b.to_string()).collect(),
                support,
            });
        }
        Ok(CurveRecord {
            label,
            model,
            conductor,
            conductor_factors,
            optimality,
            degree: None,
            torsion_order: None,
            kodaira: None,
        })
    }

    pub fn with_degree(mut self, degree: u64) -> Self {
        self.degree = Some(degree);
        self
    }

    pub fn with_torsion_order(mut self, t: u64) -> Self {
        self.torsion_order = Some(t);
        self
    }

    pub fn with_kodaira(mut self, k: BTreeMap<u64, String>) -> Self {
        self.kodaira = Some(k);
        self
    }

    pub fn ord(&self, p: u64) -> u32 {
        self.conductor_factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.model.to_string())
    }
}

/// Values the caller computed from modular symbols or the model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComputedInputs {
    pub degree: Option<u64>,
    pub r_f: Option<BigInt>,
    pub two_torsion_rank: Option<u32>,
}

impl ComputedInputs {
    /// The 2-torsion rank of the model; degree and `r_f` left unset.
    pub fn from_model(m: &MinimalModel) -> Self {
        ComputedInputs {
            degree: None,
            r_f: None,
            two_torsion_rank: Some(two_torsion_rank(m)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// odd `p` with `ord_p(n) <= 1`
    MK1,
    MK2,
    MK3,
    MK4,
    MM1,
    MM15,
    MM2,
    SHIM,
    EDIX,
    /// `ord_2(c) <= 1` when `ord_2(n) <= 1`
    BOUND2,
    /// `Gamma_1` side, `ord_p(n) <= 1`
    STEVENS,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// 2-adic rules in the order they are tried.
pub const TWO_ADIC_PRECEDENCE: [Rule; 7] = [
    Rule::MK2,
    Rule::MK3,
    Rule::MK4,
    Rule::MM1,
    Rule::MM15,
    Rule::MM2,
    Rule::SHIM,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Applicable,
    NotApplicable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub rule: Rule,
    pub prime: u64,
    pub verdict: Verdict,
    pub evidence: String,
}

fn verdict(b: bool) -> Verdict {
    if b {
        Verdict::Applicable
    } else {
        Verdict::NotApplicable
    }
}

fn ord2_big(x: &BigInt) -> u64 {
    x.abs().trailing_zeros().unwrap_or(0)
}

/// `n = 2 q^r` with `q` an odd prime and `r >= 1`.
fn shimura_shape(factors: &[(u64, u32)]) -> Option<u64> {
    match factors {
        [(2, 1), (q, _)] => Some(*q),
        _ => None,
    }
}

const EXCLUDED_KODAIRA: [&str; 3] = ["II", "III", "IV"];

pub fn evaluate_criteria(
    c: &CurveRecord,
    computed: &ComputedInputs,
) -> Result<Vec<CriterionResult>, CertifyError> {
    let n = c.conductor;
    let degree = match (computed.degree, c.degree) {
        (Some(x), Some(y)) if x != y => {
            return Err(CertifyError::DegreeMismatch {
                label: c.display_label(),
                computed: x,
                ingested: y,
            })
        }
        (x, y) => x.or(y),
    };
    let mut out = Vec::new();
    let mut push = |rule, prime, v, evidence: String| {
        out.push(CriterionResult {
            rule,
            prime,
            verdict: v,
            evidence,
        })
    };

    let o2 = c.ord(2);
    push(Rule::MK2, 2, verdict(o2 == 0), format!("ord_2(n) = {o2}"));

    let od = ord2_big(&c.model.delta_min);
    push(
        Rule::MK3,
        2,
        verdict(od % 2 == 1),
        format!("ord_2(disc_min) = {od}"),
    );

    match degree {
        Some(d) => {
            let mut ev = format!("modular degree {d} (independent of the base point)");
            if let Some(r) = &computed.r_f {
                let _ = write!(ev, ", congruence number {r}");
            }
            push(Rule::MK4, 2, verdict(d % 2 == 1), ev)
        }
        None => push(
            Rule::MK4,
            2,
            Verdict::Indeterminate,
            "modular degree unavailable".into(),
        ),
    }

    let q3: Vec<u64> = c
        .conductor_factors
        .iter()
        .map(|&(p, _)| p)
        .filter(|p| p % 4 == 3)
        .collect();
    let ev = if q3.is_empty() {
        "no prime factor of n is 3 mod 4".to_string()
    } else {
        format!("prime factors 3 mod 4: {q3:?}")
    };
    push(Rule::MM1, 2, verdict(!q3.is_empty()), ev);

    let mm15 = n % 2 == 0 && is_prime(n / 2);
    push(
        Rule::MM15,
        2,
        verdict(mm15),
        format!(
            "n/2 = {}",
            if n % 2 == 0 {
                (n / 2).to_string()
            } else {
                "-".into()
            }
        ),
    );

    match computed.two_torsion_rank {
        Some(r) => push(
            Rule::MM2,
            2,
            verdict(r == 0),
            format!("E(Q)[2] has rank {r}"),
        ),
        None => push(
            Rule::MM2,
            2,
            Verdict::Indeterminate,
            "2-torsion not computed".into(),
        ),
    }

    let shim = shimura_shape(&c.conductor_factors);
    let ok = shim.is_some_and(|q| q % 4 == 3 || q % 8 == 5);
    let ev = match shim {
        Some(q) => format!("n = 2*{q}^r with {q} = {} mod 8", q % 8),
        None => "n is not of the form 2 q^r".into(),
    };
    push(Rule::SHIM, 2, verdict(ok), ev);

    for &(p, e) in c
        .conductor_factors
        .iter()
        .filter(|&&(p, e)| p != 2 && e >= 2)
    {
        let k = c.kodaira.as_ref().and_then(|k| k.get(&p));
        let (v, ev) = match (p > 7, k) {
            (false, _) => (
                Verdict::NotApplicable,
                format!("p = {p} <= 7, ord_p(n) = {e}"),
            ),
            (true, None) => (Verdict::Indeterminate, format!("no Kodaira symbol at {p}")),
            (true, Some(t)) => (
                verdict(!EXCLUDED_KODAIRA.contains(&t.as_str())),
                format!("Kodaira type {t} at {p}, ord_p(n) = {e}"),
            ),
        };
        push(Rule::EDIX, p, v, ev);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimeStatus {
    CertifiedZero,
    BoundedByOne,
    Unknown,
}

impl fmt::Display for PrimeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeStatus::CertifiedZero => "certified-zero",
            PrimeStatus::BoundedByOne => "bounded-by-one",
            PrimeStatus::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCertificate {
    pub curve_label: String,
    pub prime: u64,
    pub status: PrimeStatus,
    pub rule: Option<Rule>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    /// `c = ±1`
    ManinHolds,
    /// `c ∈ {±1, ±2}`
    Bounded,
    Partial,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::ManinHolds => "manin-holds",
            Conclusion::Bounded => "bounded",
            Conclusion::Partial => "partial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Manin,
    Stevens,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub curve_label: String,
    pub conductor: u64,
    pub ainvs: Option<String>,
    pub optimality: Option<Optimality>,
    pub per_prime: Vec<PrimeCertificate>,
    pub conclusion: Conclusion,
    /// Every evaluated criterion, not only the ones used.
    pub criteria: Vec<CriterionResult>,
    pub implications: Vec<String>,
}

impl Certificate {
    pub fn prime(&self, p: u64) -> Option<&PrimeCertificate> {
        self.per_prime.iter().find(|c| c.prime == p)
    }

    pub fn criterion(&self, rule: Rule) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.rule == rule)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let kind = match self.kind {
            CertificateKind::Manin => "Manin constant",
            CertificateKind::Stevens => "Manin-Stevens constant",
        };
        let _ = writeln!(
            s,
            "{kind} certificate for {} (conductor {})",
            self.curve_label, self.conductor
        );
        if let Some(a) = &self.ainvs {
            let _ = writeln!(s, "model: {a}");
        }
        if let Some(o) = &self.optimality {
            let src = match &o.provenance {
                Provenance::Ingested { source } => format!("ingested from {source}"),
                Provenance::Asserted => "asserted by caller".into(),
            };
            let _ = writeln!(s, "optimal: {} ({src})", o.optimal);
        }
        let rows: Vec<[String; 4]> = self
            .per_prime
            .iter()
            .map(|c| {
                [
                    c.prime.to_string(),
                    c.status.to_string(),
                    c.rule.map_or("-".into(), |r| r.to_string()),
                    c.detail.clone(),
                ]
            })
            .collect();
        s.push_str(&table(&["prime", "status", "rule", "detail"], &rows));
        if !self.criteria.is_empty() {
            let rows: Vec<[String; 4]> = self
                .criteria
                .iter()
                .map(|c| {
                    let v = match c.verdict {
                        Verdict::Applicable => "applicable",
                        Verdict::NotApplicable => "not applicable",
                        Verdict::Indeterminate => "indeterminate",
                    };
                    [
                        c.rule.to_string(),
                        c.prime.to_string(),
                        v.into(),
                        c.evidence.clone(),
                    ]
                })
                .collect();
            s.push_str(&table(&["rule", "prime", "verdict", "evidence"], &rows));
        }
        for i in &self.implications {
            let _ = writeln!(s, "implies: {i}");
        }
        let _ = writeln!(s, "conclusion: {}", self.conclusion);
        s
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table<const K: usize>(header: &[&str; K], rows: &[[String; K]]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut l = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            if i + 1 == K {
                l.push_str(c);
            } else {
                let _ = write!(l, "{c:<w$}  ");
            }
        }
        l.trim_end().to_string() + "\n"
    };
    let mut s = line(header.to_vec());
    s.push_str(&line(
        width
            .iter()
            .map(|&w| "-".repeat(w))
            .collect::<Vec<_>>()
            .iter()
            .map(|x| x.as_str())
            .collect(),
    ));
    for r in rows {
        s.push_str(&line(r.iter().map(|x| x.as_str()).collect()));
    }
    s
}

fn aggregate(per_prime: &[PrimeCertificate]) -> Conclusion {
    if per_prime
        .iter()
        .all(|c| c.status == PrimeStatus::CertifiedZero)
    {
        Conclusion::ManinHolds
    } else if per_prime.iter().all(|c| c.status != PrimeStatus::Unknown) {
        Conclusion::Bounded
    } else {
        Conclusion::Partial
    }
}

/// Primes that get an entry: 2 and every prime dividing `n`.
fn listed_primes(factors: &[(u64, u32)]) -> Vec<(u64, u32)> {
    let mut ps = factors.to_vec();
    if ps.first().map(|&(p, _)| p) != Some(2) {
        ps.insert(0, (2, 0));
    }
    ps
}

pub fn certify_manin(
    c: &CurveRecord,
    computed: &ComputedInputs,
) -> Result<Certificate, CertifyError> {
    let label = c.display_label();
    if !c.optimality.optimal {
        return Err(CertifyError::NotOptimal(label));
    }
    let criteria = evaluate_criteria(c, computed)?;
    let find = |rule: Rule, p: u64| criteria.iter().find(|r| r.rule == rule && r.prime == p);
    let mut per_prime = Vec::new();
    for (p, e) in listed_primes(&c.conductor_factors) {
        let (status, rule, detail) = if p == 2 {
            if e <= 1 {
                match TWO_ADIC_PRECEDENCE
                    .iter()
                    .filter_map(|&r| find(r, 2))
                    .find(|r| r.verdict == Verdict::Applicable)
                {
                    Some(r) => (PrimeStatus::CertifiedZero, Some(r.rule), r.evidence.clone()),
                    None => (
                        PrimeStatus::BoundedByOne,
                        Some(Rule::BOUND2),
                        format!("ord_2(n) = {e} <= 1 and no 2-adic criterion applies"),
                    ),
                }
            } else {
                (
                    PrimeStatus::Unknown,
                    None,
                    format!("ord_2(n) = {e} >= 2, outside the 2-adic rules"),
                )
            }
        } else if e <= 1 {
            (
                PrimeStatus::CertifiedZero,
                Some(Rule::MK1),
                format!("odd prime with ord_{p}(n) = {e}"),
            )
        } else {
            match find(Rule::EDIX, p) {
                Some(r) if r.verdict == Verdict::Applicable => (
                    PrimeStatus::CertifiedZero,
                    Some(Rule::EDIX),
                    r.evidence.clone(),
                ),
                Some(r) => (PrimeStatus::Unknown, None, r.evidence.clone()),
                None => (PrimeStatus::Unknown, None, format!("ord_{p}(n) = {e}")),
            }
        };
        per_prime.push(PrimeCertificate {
            curve_label: label.clone(),
            prime: p,
            status,
            rule,
            detail,
        });
    }
    Ok(Certificate {
        kind: CertificateKind::Manin,
        curve_label: label,
        conductor: c.conductor,
        ainvs: Some(c.model.to_string()),
        optimality: Some(c.optimality.clone()),
        conclusion: aggregate(&per_prime),
        per_prime,
        criteria,
        implications: Vec::new(),
    })
}

/// Certificate for the `Gamma_1`-optimal quotient in the isogeny class of
/// `class_curves`, applied as a theorem without any `Gamma_1` computation.
pub fn certify_stevens(n: u64, class_curves: &[CurveRecord]) -> Result<Certificate, CertifyError> {
    if n == 0 {
        return Err(CertifyError::ZeroConductor);
    }
    let classes: Vec<Option<String>> = class_curves
        .iter()
        .map(|c| {
            c.label
                .as_deref()
                .and_then(|l| l.parse::<CurveLabel>().ok())
                .map(|l| l.class_label())
        })
        .collect();
    if class_curves.is_empty()
        || class_curves.iter().any(|c| c.conductor != n)
        || classes.windows(2).any(|w| w[0] != w[1])
    {
        return Err(CertifyError::NotOneClass(n));
    }
    let class_label = classes[0].clone().unwrap_or_else(|| format!("{n}.?"));
    let factors = factor(n);
    let per_prime: Vec<PrimeCertificate> = listed_primes(&factors)
        .into_iter()
        .map(|(p, e)| {
            let (status, rule, detail) = if e <= 1 {
                (
                    PrimeStatus::CertifiedZero,
                    Some(Rule::STEVENS),
                    format!("ord_{p}(n) = {e} <= 1"),
                )
            } else {
                (PrimeStatus::Unknown, None, format!("ord_{p}(n) = {e} >= 2"))
            };
            PrimeCertificate {
                curve_label: class_label.clone(),
                prime: p,
                status,
                rule,
                detail,
            }
        })
        .collect();
    let mut implications = Vec::new();
    if let Some(opt) = class_curves.iter().find(|c| c.optimality.optimal) {
        let computed = ComputedInputs::from_model(&opt.model);
        if let Ok(m) = certify_manin(opt, &computed) {
            if m.conclusion == Conclusion::ManinHolds {
                implications.push(format!(
                    "c = ±1 for the Gamma_0-optimal {} gives c = ±1 for the Gamma_1-optimal quotient, \
                     since c_0 = c_1 · #coker with c_1 integral (the cokernel factor is not computed)",
                    m.curve_label
                ));
            }
        }
    }
    Ok(Certificate {
        kind: CertificateKind::Stevens,
        curve_label: class_label,
        conductor: n,
        ainvs: None,
        optimality: None,
        conclusion: aggregate(&per_prime),
        per_prime,
        criteria: Vec::new(),
        implications,
    })
}

/// Ingested curves together with the conductor range they are complete for.
#[derive(Debug, Clone)]
pub struct CensusData {
    pub records: Vec<CurveRecord>,
    pub covered_up_to: u64,
    /// Where the optimality designations came from, stamped into the report.
    pub optimality_source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueEntry {
    pub curve_label: String,
    pub two_torsion_rank: u32,
    pub mm2: Verdict,
    pub shim: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub max_conductor: u64,
    pub optimality_source: String,
    pub selected_count: usize,
    pub settled_by_mm1_count: usize,
    pub remaining_after_mm1_count: usize,
    pub settled_by_mm15_count: usize,
    pub remaining_after_mm15_count: usize,
    pub selected: Vec<String>,
    pub settled_by_mm1: Vec<String>,
    pub settled_by_mm15: Vec<String>,
    pub residue: Vec<ResidueEntry>,
}

impl CensusReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "census of optimal curves with conductor <= {}",
            self.max_conductor
        );
        let _ = writeln!(s, "optimality source: {}", self.optimality_source);
        let rows = [
            [
                "selected (2-semistable, MK2-MK4 fail)".to_string(),
                self.selected_count.to_string(),
            ],
            [
                "settled by MM1".into(),
                self.settled_by_mm1_count.to_string(),
            ],
            [
                "remaining".into(),
                self.remaining_after_mm1_count.to_string(),
            ],
            [
                "settled by MM15".into(),
                self.settled_by_mm15_count.to_string(),
            ],
            [
                "remaining".into(),
                self.remaining_after_mm15_count.to_string(),
            ],
        ];
        s.push_str(&table(&["stage", "curves"], &rows));
        let _ = writeln!(s, "selected: {}", self.selected.join(", "));
        let rows: Vec<[String; 4]> = self
            .residue
            .iter()
            .map(|r| {
                let v = |v: Verdict| match v {
                    Verdict::Applicable => "applicable",
                    Verdict::NotApplicable => "not applicable",
                    Verdict::Indeterminate => "indeterminate",
                };
                [
                    r.curve_label.clone(),
                    r.two_torsion_rank.to_string(),
                    v(r.mm2).into(),
                    v(r.shim).into(),
                ]
            })
            .collect();
        s.push_str(&table(&["residue", "rank E(Q)[2]", "MM2", "SHIM"], &rows));
        s
    }
}

struct Staged {
    label: String,
    selected: bool,
    mm1: bool,
    mm15: bool,
    residue: ResidueEntry,
}

fn stage(c: &CurveRecord) -> Result<Staged, CertifyError> {
    let label = c.display_label();
    let crit = evaluate_criteria(c, &ComputedInputs::from_model(&c.model))?;
    let get = |r: Rule| {
        crit.iter()
            .find(|x| x.rule == r)
            .expect("every 2-adic rule is evaluated")
            .verdict
    };
    if c.ord(2) == 1
        && get(Rule::MK4) == Verdict::Indeterminate
        && get(Rule::MK3) == Verdict::NotApplicable
    {
        return Err(CertifyError::MissingDegree(label));
    }
    let selected = c.ord(2) == 1
        && [Rule::MK2, Rule::MK3, Rule::MK4]
            .iter()
            .all(|&r| get(r) == Verdict::NotApplicable);
    Ok(Staged {
        selected,
        mm1: get(Rule::MM1) == Verdict::Applicable,
        mm15: get(Rule::MM15) == Verdict::Applicable,
        residue: ResidueEntry {
            curve_label: label.clone(),
            two_torsion_rank: two_torsion_rank(&c.model),
            mm2: get(Rule::MM2),
            shim: get(Rule::SHIM),
        },
        label,
    })
}

/// Optimal curves with `ord_2(n) = 1` on which MK2, MK3 and MK4 all fail,
/// then staged through MM1 and MM15.
pub fn census(max_conductor: u64, data: &CensusData) -> Result<CensusReport, CertifyError> {
    if data.covered_up_to < max_conductor {
        return Err(CertifyError::Coverage {
            requested: max_conductor,
            covered: data.covered_up_to,
        });
    }
    let mut classes: BTreeMap<(u64, usize, String), Vec<&CurveRecord>> = BTreeMap::new();
    for c in data.records.iter().filter(|c| c.conductor <= max_conductor) {
        let l = c.label.as_deref().unwrap_or_default();
        let parsed: CurveLabel = l.parse()?;
        classes
            .entry((parsed.conductor, parsed.class.len(), parsed.class.clone()))
            .or_default()
            .push(c);
    }
    let mut optimal = Vec::new();
    for ((n, _, class), curves) in &classes {
        let opt: Vec<&CurveRecord> = curves
            .iter()
            .copied()
            .filter(|c| c.optimality.optimal)
            .collect();
        if opt.len() != 1 {
            return Err(CertifyError::OptimalCount {
                class: format!("{n}.{class}"),
                optimal: opt.len(),
            });
        }
        optimal.push(opt[0]);
    }
    let staged: Vec<Staged> = optimal
        .par_iter()
        .map(|c| stage(c))
        .collect::<Result<_, _>>()?;
    let selected: Vec<&Staged> = staged.iter().filter(|s| s.selected).collect();
    let settled_by_mm1: Vec<String> = selected
        .iter()
        .filter(|s| s.mm1)
        .map(|s| s.label.clone())
        .collect();
    let after_mm1: Vec<&&Staged> = selected.iter().filter(|s| !s.mm1).collect();
    let settled_by_mm15: Vec<String> = after_mm1
        .iter()
        .filter(|s| s.mm15)
        .map(|s| s.label.clone())
        .collect();
    let residue: Vec<ResidueEntry> = after_mm1
        .iter()
        .filter(|s| !s.mm15)
        .map(|s| s.residue.clone())
        .collect();
    Ok(CensusReport {
        max_conductor,
        optimality_source: data.optimality_source.clone(),
        selected_count: selected.len(),
        settled_by_mm1_count: settled_by_mm1.len(),
        remaining_after_mm1_count: after_mm1.len(),
        settled_by_mm15_count: settled_by_mm15.len(),
        remaining_after_mm15_count: residue.len(),
        selected: selected.iter().map(|s| s.label.clone()).collect(),
        settled_by_mm1,
        settled_by_mm15,
        residue,
    })
}
