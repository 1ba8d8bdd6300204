//! Verification reports and the checks shared by the two spectral layers.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::numlin::{determinant, eigenvalues, match_spectra, CMatrix};

/// One named comparison of a residual against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Free-form findings that are not pass/fail, e.g. transcription flags.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a check; NaN residuals fail.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64, refs: &[&str]) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
            pass,
            refs: refs.iter().map(|s| s.to_string()).collect(),
        });
        pass
    }

    /// Record a check that could not be evaluated.
    pub fn failed(&mut self, name: impl Into<String>, tolerance: f64, refs: &[&str], why: impl Into<String>) {
        let name = name.into();
        self.notes.push(format!("{name}: {}", why.into()));
        self.check(name, f64::INFINITY, tolerance, refs);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    /// Append `other` with every check name prefixed by `prefix/`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
        for n in other.notes {
            self.notes.push(format!("{prefix}/{n}"));
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// `|a - b| / max(scale, tiny)`.
pub fn rel_err(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Closed forms a spectral matrix is compared against.
pub(crate) struct SpectralTargets<'a> {
    pub label: &'a str,
    pub predicted: &'a [Complex64],
    pub trace_k1_closed: Complex64,
    pub det_closed: Complex64,
    pub refs_trace: &'a str,
    pub refs_det: &'a str,
    pub refs_spectrum: &'a str,
}

/// Spectrum law, trace of powers 1..=3 and determinant.
pub(crate) fn spectral_identity_checks(
    report: &mut VerificationReport,
    mat: &CMatrix,
    t: &SpectralTargets<'_>,
    spectrum_tol: f64,
    trace_tol: f64,
) {
    let label = t.label;
    match eigenvalues(mat).and_then(|e| match_spectra(&e, t.predicted)) {
        Ok(m) => {
            report.check(format!("spectrum-{label}"), m.max_rel_gap, spectrum_tol, &[t.refs_spectrum]);
        }
        Err(e) => report.failed(format!("spectrum-{label}"), spectrum_tol, &[t.refs_spectrum], e.to_string()),
    }

    let mut power = CMatrix::identity(mat.dim());
    for k in 1..=3u32 {
        power = &power * mat;
        let tr = power.trace();
        let sum: Complex64 = t.predicted.iter().map(|m| m.powu(k)).sum();
        let scale: f64 = t.predicted.iter().map(|m| m.norm().powi(k as i32)).sum();
        report.check(format!("trace-{label}-k{k}"), rel_err(tr, sum, scale), trace_tol, &[t.refs_trace]);
    }
    let sum1: Complex64 = t.predicted.iter().sum();
    let scale1: f64 = t.predicted.iter().map(|m| m.norm()).sum();
    report.check(
        format!("trace-{label}-k1-closed-form"),
        rel_err(mat.trace(), t.trace_k1_closed, scale1),
        trace_tol,
        &[t.refs_trace],
    );
    report.check(
        format!("power-sum-{label}-k1-closed-form"),
        rel_err(sum1, t.trace_k1_closed, scale1),
        trace_tol,
        &[t.refs_trace],
    );
    let det = determinant(mat);
    let prod_abs: f64 = t.predicted.iter().map(|m| m.norm()).product();
    report.check(
        format!("det-{label}"),
        rel_err(det, t.det_closed, t.det_closed.norm().max(prod_abs)),
        trace_tol,
        &[t.refs_det],
    );
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only when it reproduces `x` to within `tol` (relative).
pub fn as_rational(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1i64 } else { 1 };
    let ax = x.abs();
    // continued fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rem = ax;
    for _ in 0..64 {
        let a = rem.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 as u128 > max_den as u128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - ax).abs() <= tol * ax.max(1.0) {
            return Some(BigRational::new(BigInt::from(sign as i128 * h1), BigInt::from(k1)));
        }
        let frac = rem - a;
        if frac <= 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

/// Recognize a complex number as a real rational.
pub fn complex_as_rational(z: Complex64) -> Option<BigRational> {
    if z.im.abs() > 1e-14 * z.re.abs().max(1.0) {
        return None;
    }
    as_rational(z.re, 1_000_000, 1e-13)
}

pub fn rational_pow(r: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(r.clone(), k as usize)
    } else {
        num_traits::pow(r.recip(), (-k) as usize)
    }
}

/// Exact rational value of `q^{-N} (1 - q^n)(1 - p q^{e(n)})` for `n = 1..=N`.
pub fn rational_spectrum(
    q: &BigRational,
    product: &BigRational,
    n: usize,
    exponent: impl Fn(usize) -> i64,
) -> Vec<BigRational> {
    let one = BigRational::one();
    let qn = rational_pow(q, -(n as i64));
    (1..=n)
        .map(|m| &qn * (&one - rational_pow(q, m as i64)) * (&one - product * rational_pow(q, exponent(m))))
        .collect()
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}

/// Diophantine check: each eigenvalue lies within `tol` of its exact rational value.
pub(crate) fn rational_spectrum_check(
    report: &mut VerificationReport,
    label: &str,
    mat: &CMatrix,
    exact: &[BigRational],
    tol: f64,
    refs: &str,
) {
    let target: Vec<Complex64> = exact.iter().map(|r| Complex64::new(rational_to_f64(r), 0.0)).collect();
    match eigenvalues(mat).and_then(|e| match_spectra(&e, &target)) {
        Ok(m) => {
            report.check(format!("rational-spectrum-{label}"), m.max_abs_gap, tol, &[refs]);
        }
        Err(e) => report.failed(format!("rational-spectrum-{label}"), tol, &[refs], e.to_string()),
    }
}
