//! Period lattices in floating point: the Néron lattice of a minimal model via
//! the AGM, the period lattice of a newform via q-series, and their ratio.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd, inv_mod};
use crate::elliptic::MinimalModel;
use crate::hecke_forms::{right_eigenvectors, EigenFunctional, HeckeFormsError};
use crate::lattice::{hnf, hnf_with_transform, solve_in_hnf, IntMatrix};
use crate::modsym::{Cusp, ModSymSpace, RationalNewform};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest q-expansion length the newform evaluation will use.
pub const TERM_CAP: usize = 1 << 20;

const AGM_ITERATIONS: usize = 64;

/// Best absolute accuracy the double-precision q-series can deliver.
const FLOAT_FLOOR: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodsError {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("AGM did not converge in {0} iterations")]
    AgmDiverged(usize),
    #[error("tolerance {tol:e} is below the attainable precision {attainable:e}")]
    Unattainable { tol: f64, attainable: f64 },
    #[error("q-series needs {needed} terms, above the cap {cap}")]
    TermCap { needed: usize, cap: usize },
    #[error("period changed by {0:e} when the term count was doubled")]
    NotConverged(f64),
    #[error("period lattice is not stable under complex conjugation")]
    NotConjugationStable,
    #[error("real and imaginary period ratios disagree: {plus} vs {minus}")]
    RatioMismatch { plus: f64, minus: f64 },
    #[error("period ratio {0} is not within tolerance of a nonzero integer")]
    NotIntegral(f64),
    #[error("no small set of Γ_0(N) symbols generates the homology quotient")]
    NoGenerators,
    #[error(transparent)]
    Forms(#[from] HeckeFormsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    /// `Z Ω+ + Z iΩ-`; curves with positive discriminant.
    Rectangular,
    /// `Z Ω+ + Z (-Ω+ + iΩ-)/2`; curves with negative discriminant.
    NonRectangular,
}

/// A lattice `Z ω1 + Z ω2` stable under complex conjugation, normalized so that
/// `ω1 = Ω+ > 0` and `ω2` is `iΩ-` or `(-Ω+ + iΩ-)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub kind: LatticeKind,
    /// Absolute error bound on the generators.
    pub precision: f64,
}

impl PeriodLattice {
    fn normalized(real: f64, imag: f64, kind: LatticeKind, precision: f64) -> Self {
        let omega2 = match kind {
            LatticeKind::Rectangular => Complex64::new(0.0, imag),
            LatticeKind::NonRectangular => Complex64::new(-real / 2.0, imag / 2.0),
        };
        PeriodLattice {
            omega1: Complex64::new(real, 0.0),
            omega2,
            kind,
            precision,
        }
    }

    /// Normalizes an arbitrary basis of a conjugation-stable lattice.
    pub fn from_basis(z1: Complex64, z2: Complex64, precision: f64) -> Result<Self, PeriodsError> {
        let (u, v) = gauss_reduce(z1, z2);
        let covolume = (u.conj() * v).im.abs();
        let eps = 1e3 * precision.max(1e-12 * u.norm());
        let mut real: Option<f64> = None;
        let mut imag: Option<f64> = None;
        for m in -4i32..=4 {
            for n in -4i32..=4 {
                if m == 0 && n == 0 {
                    continue;
                }
                let z = u * m as f64 + v * n as f64;
                if z.im.abs() < eps && z.re > eps {
                    real = Some(real.map_or(z.re, |r: f64| r.min(z.re)));
                }
                if z.re.abs() < eps && z.im > eps {
                    imag = Some(imag.map_or(z.im, |r: f64| r.min(z.im)));
                }
            }
        }
        let (real, imag) = match (real, imag) {
            (Some(r), Some(i)) => (r, i),
            _ => return Err(PeriodsError::NotConjugationStable),
        };
        let ratio = real * imag / covolume;
        let kind = if (ratio - 1.0).abs() < 1e-6 {
            LatticeKind::Rectangular
        } else if (ratio - 2.0).abs() < 1e-6 {
            LatticeKind::NonRectangular
        } else {
            return Err(PeriodsError::NotConjugationStable);
        };
        Ok(Self::normalized(real, imag, kind, precision))
    }

    /// Least positive real period `Ω+`.
    pub fn real_period(&self) -> f64 {
        self.omega1.re
    }

    /// Least positive imaginary period `Ω-` (so `iΩ-` lies in the lattice).
    pub fn imaginary_period(&self) -> f64 {
        match self.kind {
            LatticeKind::Rectangular => self.omega2.im,
            LatticeKind::NonRectangular => 2.0 * self.omega2.im,
        }
    }

    pub fn covolume(&self) -> f64 {
        (self.omega1.conj() * self.omega2).im.abs()
    }

    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }
}

/// Lagrange–Gauss reduction of a planar lattice basis.
fn gauss_reduce(mut u: Complex64, mut v: Complex64) -> (Complex64, Complex64) {
    if u.norm_sqr() > v.norm_sqr() {
        std::mem::swap(&mut u, &mut v);
    }
    for _ in 0..200 {
        let mu = ((u.conj() * v).re / u.norm_sqr()).round();
        v -= u * mu;
        if v.norm_sqr() >= u.norm_sqr() {
            break;
        }
        std::mem::swap(&mut u, &mut v);
    }
    (u, v)
}

fn check_tol(tol: f64) -> Result<(), PeriodsError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PeriodsError::InvalidTolerance(tol));
    }
    Ok(())
}

fn agm(mut a: f64, mut b: f64) -> Result<f64, PeriodsError> {
    for _ in 0..AGM_ITERATIONS {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a.abs() {
            return Ok(a);
        }
        let next = ((a + b) / 2.0, (a * b).sqrt());
        a = next.0;
        b = next.1;
    }
    Err(PeriodsError::AgmDiverged(AGM_ITERATIONS))
}

/// Real roots of `X^3 + p X + q`, in decreasing order, polished by Newton steps.
fn depressed_cubic_real_roots(p: f64, q: f64) -> Vec<f64> {
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if disc < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let phi = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt())
            .clamp(-1.0, 1.0)
            .acos()
            / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    };
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = (*x * *x + p) * *x + q;
            let df = 3.0 * *x * *x + p;
            if df != 0.0 {
                *x -= f / df;
            }
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).expect("finite roots"));
    roots
}

fn to_f64(x: &BigInt) -> f64 {
    x.to_f64().expect("finite")
}

/// Néron period lattice of a minimal model (periods of `dx / (2y + a1 x + a3)`).
pub fn elliptic_period_lattice(m: &MinimalModel, tol: f64) -> Result<PeriodLattice, PeriodsError> {
    check_tol(tol)?;
    let inv = m.invariants();
    let (b2, b4) = (to_f64(&inv.b2), to_f64(&inv.b4));
    let (c4, c6) = (to_f64(&m.c4), to_f64(&m.c6));
    // x = X - b2/12 turns 4x^3 + b2 x^2 + 2 b4 x + b6 into 4(X^3 - c4/48 X - c6/864)
    let shift = b2 / 12.0;
    let roots: Vec<f64> = depressed_cubic_real_roots(-c4 / 48.0, -c6 / 864.0)
        .into_iter()
        .map(|x| x - shift)
        .collect();
    let lattice = if m.delta_min > BigInt::from(0) {
        let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
        let w1 = PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt())?;
        let w2 = PI / agm((e1 - e3).sqrt(), (e2 - e3).sqrt())?;
        PeriodLattice::normalized(w1, w2, LatticeKind::Rectangular, 0.0)
    } else {
        let e1 = roots[0];
        let a = 3.0 * e1 + b2 / 4.0;
        let b = (3.0 * e1 * e1 + b2 / 2.0 * e1 + b4 / 2.0).sqrt();
        let w1 = 2.0 * PI / agm(2.0 * b.sqrt(), (2.0 * b + a).sqrt())?;
        let y = PI / agm(2.0 * b.sqrt(), (2.0 * b - a).sqrt())?;
        PeriodLattice::normalized(w1, 2.0 * y, LatticeKind::NonRectangular, 0.0)
    };
    // root finding dominates the rounding error
    let scale = roots.iter().fold(1.0f64, |acc, r| acc.max(r.abs()));
    let attainable = 1e3 * f64::EPSILON * scale * lattice.omega1.norm().max(lattice.omega2.norm());
    if attainable > tol {
        return Err(PeriodsError::Unattainable { tol, attainable });
    }
    Ok(PeriodLattice {
        precision: tol,
        ..lattice
    })
}

/// `c4` and `c6` of `C / Λ` from Eisenstein series:
/// `c4 = (2π/ω1)^4 E4(τ)` and `c6 = (2π/ω1)^6 E6(τ)` for a basis with `Im τ > 0`.
pub fn eisenstein_invariants(lattice: &PeriodLattice) -> (Complex64, Complex64) {
    let (mut w1, mut w2) = (lattice.omega1, lattice.omega2);
    // move τ into the fundamental domain for fast convergence
    for _ in 0..100 {
        let tau = w2 / w1;
        let k = tau.re.round();
        w2 -= w1 * k;
        if (w2 / w1).norm() < 1.0 {
            let t = w1;
            w1 = w2;
            w2 = -t;
        } else {
            break;
        }
    }
    let tau = w2 / w1;
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut e4 = Complex64::new(1.0, 0.0);
    let mut e6 = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..200u32 {
        qn *= q;
        let (s3, s5) = (1..=n)
            .filter(|d| n % d == 0)
            .fold((0.0, 0.0), |(a, b), d| {
                let d = d as f64;
                (a + d.powi(3), b + d.powi(5))
            });
        e4 += qn * 240.0 * s3;
        e6 -= qn * 504.0 * s5;
        if qn.norm() * (n as f64).powi(6) < 1e-18 {
            break;
        }
    }
    let k = Complex64::new(2.0 * PI, 0.0) / w1;
    (k.powi(4) * e4, k.powi(6) * e6)
}

/// The period map `γ -> ∫_γ 2πi f(τ) dτ` on the cuspidal lattice, factored
/// through the rank-2 quotient `L / L_⊥`.
pub struct NewformPeriods {
    /// `v -> v · quotient_map` realizes `L -> L/L_⊥ ⊂ Z^2`.
    quotient_map: IntMatrix,
    /// Hermite basis of the image of `L` in `Z^2`.
    image: IntMatrix,
    /// Periods of the image basis vectors.
    basis_periods: [Complex64; 2],
    pub precision: f64,
    pub terms_used: usize,
}

struct SymbolPeriod {
    image: Vec<BigInt>,
    period: Complex64,
}

/// `Σ a_n/n q^n` at `τ`, the primitive of `2πi f(τ)`, up to `terms` terms.
fn primitive(an: &[i64], tau: Complex64, terms: usize) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, &a) in an.iter().enumerate().take(terms + 1).skip(1) {
        qn *= q;
        if a != 0 {
            sum += qn * (a as f64 / n as f64);
        }
    }
    sum
}

fn terms_for(im: f64, tol: f64) -> usize {
    ((1.0 / tol).ln() / (2.0 * PI * im)).ceil() as usize + 50
}

/// `γ = [[a, b], [c, d]] ∈ Γ_0(N)` with `c = k N`, `0 < d < c`.
fn gamma_family(level: u64, k: u64) -> Vec<[i64; 4]> {
    let c = (k * level) as i64;
    (1..c.max(2))
        .filter(|&d| gcd(d, c) == 1)
        .map(|d| {
            let a = inv_mod(d, c).expect("d is a unit mod c");
            let b = (a * d - 1) / c;
            [a, b, c, d]
        })
        .collect()
}

impl NewformPeriods {
    pub fn new(space: &ModSymSpace, f: &RationalNewform, tol: f64) -> Result<Self, PeriodsError> {
        check_tol(tol)?;
        if tol < FLOAT_FLOOR {
            return Err(PeriodsError::Unattainable {
                tol,
                attainable: FLOAT_FLOOR,
            });
        }
        let level = space.level();
        let quotient_map = right_eigenvectors(space, f, 2).transpose();
        let image = hnf(&quotient_map);
        let target_tol = tol / 10.0;

        // symbols {0, γ(0)} whose images generate the quotient
        let mut gens: Vec<([i64; 4], Vec<BigInt>)> = Vec::new();
        let mut span = IntMatrix::zeros(0, 2);
        'outer: for k in 1..=8u64 {
            for g in gamma_family(level, k) {
                let amb = space.modular_symbol(&Cusp::zero(), &Cusp::new(g[1], g[3]));
                let v = space
                    .cuspidal_coordinates(&amb)
                    .expect("{0, γ0} is cuspidal for γ in Γ_0(N)");
                let img = IntMatrix::from_rows(v.len(), &[v])
                    .mul(&quotient_map)
                    .row_vec(0);
                let grown = hnf(&span.vstack(&IntMatrix::from_rows(2, std::slice::from_ref(&img))));
                if grown != hnf(&span) {
                    span = span.vstack(&IntMatrix::from_rows(2, std::slice::from_ref(&img)));
                    gens.push((g, img));
                    if grown == image {
                        break 'outer;
                    }
                }
            }
        }
        if hnf(&span) != image {
            return Err(PeriodsError::NoGenerators);
        }

        let max_c = gens
            .iter()
            .map(|(g, _)| g[2])
            .max()
            .expect("at least one generator") as f64;
        let terms = terms_for(1.0 / max_c, target_tol);
        if 2 * terms > TERM_CAP {
            return Err(PeriodsError::TermCap {
                needed: 2 * terms,
                cap: TERM_CAP,
            });
        }
        let ef = EigenFunctional::new(space, f)?;
        let an = ef.coefficients(2 * terms);
        let mut periods = Vec::with_capacity(gens.len());
        let mut drift = 0.0f64;
        for (g, img) in &gens {
            let [a, _, c, d] = *g;
            let c = c as f64;
            let z0 = Complex64::new(-d as f64 / c, 1.0 / c);
            let z1 = Complex64::new(a as f64 / c, 1.0 / c);
            let short = primitive(&an, z1, terms) - primitive(&an, z0, terms);
            let long = primitive(&an, z1, 2 * terms) - primitive(&an, z0, 2 * terms);
            drift = drift.max((long - short).norm());
            periods.push(SymbolPeriod {
                image: img.clone(),
                period: long,
            });
        }
        if drift >= target_tol {
            return Err(PeriodsError::NotConverged(drift));
        }

        let rows: Vec<Vec<BigInt>> = periods.iter().map(|s| s.image.clone()).collect();
        let dec = hnf_with_transform(&IntMatrix::from_rows(2, &rows));
        let mut basis_periods = [Complex64::new(0.0, 0.0); 2];
        for (i, slot) in basis_periods.iter_mut().enumerate() {
            // row i of the Hermite form is row i of transform · rows
            let mut z = Complex64::new(0.0, 0.0);
            for (j, s) in periods.iter().enumerate() {
                let k = dec.transform[(i, j)].to_f64().expect("small transform");
                z += s.period * k;
            }
            *slot = z;
        }
        debug_assert_eq!(dec.hnf, image);
        Ok(NewformPeriods {
            quotient_map,
            image,
            basis_periods,
            precision: tol,
            terms_used: 2 * terms,
        })
    }

    /// Period of a cuspidal vector (cuspidal coordinates).
    pub fn period(&self, v: &[i64]) -> Complex64 {
        let img = IntMatrix::from_rows(v.len(), &[v.to_vec()])
            .mul(&self.quotient_map)
            .row_vec(0);
        let pivots = crate::lattice::hnf_pivots(&self.image);
        let coords =
            solve_in_hnf(&self.image, &pivots, &img).expect("image lies in the quotient lattice");
        coords
            .iter()
            .zip(&self.basis_periods)
            .map(|(k, z)| z * k.to_f64().expect("small coordinate"))
            .sum()
    }

    /// Periods of the basis of `L / L_⊥` used internally.
    pub fn basis_periods(&self) -> [Complex64; 2] {
        self.basis_periods
    }

    pub fn lattice(&self) -> Result<PeriodLattice, PeriodsError> {
        PeriodLattice::from_basis(self.basis_periods[0], self.basis_periods[1], self.precision)
    }
}

pub fn newform_period_lattice(
    space: &ModSymSpace,
    f: &RationalNewform,
    tol: f64,
) -> Result<PeriodLattice, PeriodsError> {
    NewformPeriods::new(space, f, tol)?.lattice()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManinRatio {
    /// `Λ_E / Λ_f` measured on real periods.
    pub ratio: f64,
    pub nearest: i64,
    pub residual: f64,
}

/// `|c_π|` from `Λ_E = c_π Λ_f`, the lattice of the curve over that of the newform.
pub fn manin_constant_numeric(
    e: &PeriodLattice,
    f: &PeriodLattice,
    tol: f64,
) -> Result<ManinRatio, PeriodsError> {
    check_tol(tol)?;
    let plus = e.real_period() / f.real_period();
    let minus = e.imaginary_period() / f.imaginary_period();
    if (plus - minus).abs() >= tol * plus.abs().max(1.0) {
        return Err(PeriodsError::RatioMismatch { plus, minus });
    }
    let nearest = plus.round();
    let residual = (plus - nearest).abs();
    if nearest == 0.0 || residual >= tol {
        return Err(PeriodsError::NotIntegral(plus));
    }
    Ok(ManinRatio {
        ratio: plus,
        nearest: nearest as i64,
        residual,
    })
}
