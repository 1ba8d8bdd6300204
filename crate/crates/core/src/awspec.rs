//! Askey-Wilson spectral layer.
//!
//! Structure functions
//!
//! ```text
//! A(z) = (1-az)(1-bz)(1-cz)(1-dz) / ((1-z^2)(1-qz^2))
//! G(z) = A(z) (qz - 1/z)
//! K(z_n, z_m) = (z_m - q z_n)(q z_n z_m - 1) / ((z_m - z_n)(z_n z_m - 1))
//! ```
//!
//! the matrix `M` assembled from the zeros, its closed-form eigenvalues
//! `mu_n = q^{-N}(1-q^n)(1 - abcd q^{2N-1-n})`, and the checks built on them.
//!
//! Every formula containing "the same expression with each `z_s` replaced by
//! `1/z_s`" is evaluated literally: once on the zeros, once on their
//! reciprocals, and the two halves are summed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended;
use crate::numlin::{eigenvalues, match_spectra, CMatrix, MatrixLabel, SpectralMatrix, ZeroSet};
use crate::polyform::{AWParams, Params};
use crate::qkernel::{qpochhammer, qpow, ONE};
use crate::recurrence::{PolyEvaluator, Recurrence};
use crate::report::{
    complex_as_rational, rational_spectrum, rational_spectrum_check, spectral_identity_checks, SpectralTargets,
    VerificationReport,
};
use crate::tolerances::Tolerances;

/// Guard on every denominator of `A`, `G`, `K`.
pub const GUARD_EPS: f64 = 1e-10;

/// Reference tags attached to report checks.
pub mod refs {
    pub const ZERO_IDENTITY: &str = "aw-zero-equations";
    pub const SPECTRUM: &str = "aw-M-spectrum";
    pub const RATIONAL: &str = "aw-M-rational-spectrum";
    pub const ISOSPECTRAL: &str = "aw-M-isospectral";
    pub const TRACE: &str = "aw-M-trace-identities";
    pub const DET: &str = "aw-M-determinant";
    pub const EIGEN_RELATION: &str = "aw-q-difference-equation";
    pub const BRANCH: &str = "aw-branch-independence";
    pub const JACOBIAN: &str = "aw-flow-jacobian";
    pub const FLOW: &str = "aw-zero-flow";
}

fn guard(v: Complex64, name: &'static str, index: usize) -> Result<()> {
    if v.norm() > GUARD_EPS {
        Ok(())
    } else {
        Err(Error::SingularConfiguration { guard: name, index })
    }
}

/// `A(z)`.
pub fn a_fn(p: &AWParams, z: Complex64) -> Complex64 {
    let num = (ONE - p.a * z) * (ONE - p.b * z) * (ONE - p.c * z) * (ONE - p.d * z);
    num / ((ONE - z * z) * (ONE - p.q * z * z))
}

/// `A(z)` and `A'(z)` by the quotient rule.
fn a_with_derivative(p: &AWParams, z: Complex64) -> (Complex64, Complex64) {
    let params = [p.a, p.b, p.c, p.d];
    let factors: Vec<Complex64> = params.iter().map(|&u| ONE - u * z).collect();
    let num: Complex64 = factors.iter().product();
    let mut dnum = Complex64::new(0.0, 0.0);
    for (i, &u) in params.iter().enumerate() {
        let mut t = -u;
        for (j, f) in factors.iter().enumerate() {
            if j != i {
                t *= f;
            }
        }
        dnum += t;
    }
    let d1 = ONE - z * z;
    let d2 = ONE - p.q * z * z;
    let den = d1 * d2;
    let dden = -2.0 * z * d2 - 2.0 * p.q * z * d1;
    (num / den, (dnum * den - num * dden) / (den * den))
}

/// `G(z) = A(z)(qz - 1/z)`.
pub fn g_fn(p: &AWParams, z: Complex64) -> Complex64 {
    a_fn(p, z) * (p.q * z - z.inv())
}

/// `G'(z)`, exact derivative of the closed form.
pub fn g_prime(p: &AWParams, z: Complex64) -> Complex64 {
    let (a, da) = a_with_derivative(p, z);
    da * (p.q * z - z.inv()) + a * (p.q + (z * z).inv())
}

/// `K(z_n, z_m)`.
pub fn k_fn(q: Complex64, zn: Complex64, zm: Complex64) -> Complex64 {
    (zm - q * zn) * (q * zn * zm - ONE) / ((zm - zn) * (zn * zm - ONE))
}

/// `dz/dx = 2z^2/(z^2-1)` along `x = (z^2+1)/(2z)`.
fn dz_dx(z: Complex64) -> Complex64 {
    2.0 * z * z / (z * z - ONE)
}

/// Structure functions at the zeros (`plus`) and at their reciprocals (`minus`).
#[derive(Debug, Clone, PartialEq)]
pub struct AWStructureEval {
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
    pub g_plus: Vec<Complex64>,
    pub g_minus: Vec<Complex64>,
    pub gp_plus: Vec<Complex64>,
    pub gp_minus: Vec<Complex64>,
    /// `k_plus[n][l] = K(z_n, z_l)`; diagonal entries unused (set to 1).
    pub k_plus: Vec<Vec<Complex64>>,
    pub k_minus: Vec<Vec<Complex64>>,
}

fn check_point_guards(q: Complex64, z: Complex64, n: usize) -> Result<()> {
    guard(z, "|z| > eps", n)?;
    guard(z * z - ONE, "|z^2 - 1| > eps", n)?;
    guard(q * z * z - ONE, "|q z^2 - 1| > eps", n)?;
    // same guards on the reciprocal
    guard(q - z * z, "|q/z^2 - 1| > eps", n)
}

fn check_pair_guards(zs: &[Complex64]) -> Result<()> {
    for i in 0..zs.len() {
        for j in 0..zs.len() {
            if i != j {
                guard(zs[i] - zs[j], "|z_n - z_l| > eps", i)?;
                guard(zs[i] * zs[j] - ONE, "|z_n z_l - 1| > eps", i)?;
            }
        }
    }
    Ok(())
}

impl AWStructureEval {
    pub fn evaluate(p: &AWParams, zs: &[Complex64]) -> Result<Self> {
        for (n, &z) in zs.iter().enumerate() {
            check_point_guards(p.q, z, n)?;
        }
        check_pair_guards(zs)?;
        let inv: Vec<Complex64> = zs.iter().map(|z| z.inv()).collect();
        let kmat = |v: &[Complex64]| -> Vec<Vec<Complex64>> {
            (0..v.len())
                .map(|n| (0..v.len()).map(|l| if l == n { ONE } else { k_fn(p.q, v[n], v[l]) }).collect())
                .collect()
        };
        Ok(AWStructureEval {
            a_plus: zs.iter().map(|&z| a_fn(p, z)).collect(),
            a_minus: inv.iter().map(|&z| a_fn(p, z)).collect(),
            g_plus: zs.iter().map(|&z| g_fn(p, z)).collect(),
            g_minus: inv.iter().map(|&z| g_fn(p, z)).collect(),
            gp_plus: zs.iter().map(|&z| g_prime(p, z)).collect(),
            gp_minus: inv.iter().map(|&z| g_prime(p, z)).collect(),
            k_plus: kmat(zs),
            k_minus: kmat(&inv),
        })
    }
}

pub fn eval_structure(p: &AWParams, zs: &ZeroSet) -> Result<AWStructureEval> {
    AWStructureEval::evaluate(p, &zs.zbar)
}

/// One half of every entry of `M`: the bracketed expression evaluated on `z`
/// with structure values `g`, `gp` and `k` taken at the same points.
fn m_half(q: Complex64, z: &[Complex64], g: &[Complex64], gp: &[Complex64], k: &[Vec<Complex64>]) -> CMatrix {
    let n = z.len();
    CMatrix::from_fn(n, |row, col| {
        let zn = z[row];
        let kprod: Complex64 = (0..n).filter(|&l| l != row).map(|l| k[row][l]).product();
        if row == col {
            let sum: Complex64 = (0..n)
                .filter(|&m| m != row)
                .map(|m| {
                    let zm = z[m];
                    -q / (zm - q * zn) + q * zm / (q * zn * zm - ONE) + (zm - zn).inv() - zm / (zn * zm - ONE)
                })
                .sum();
            dz_dx(zn) * (g[row] * sum + gp[row]) * kprod
        } else {
            let zm = z[col];
            let bracket = (zm - q * zn).inv() + q * zn / (q * zn * zm - ONE) - (zm - zn).inv() - zn / (zn * zm - ONE);
            dz_dx(zm) * g[row] * bracket * kprod
        }
    })
}

/// The matrix `M` built from the zeros in `zs.zbar` (as given, so a flipped
/// [`ZeroSet`] is honored).
pub fn build_matrix_m(p: &AWParams, zs: &ZeroSet) -> Result<SpectralMatrix> {
    let s = eval_structure(p, zs)?;
    let predicted = predicted_mu(p);
    let q = p.q;
    let inv: Vec<Complex64> = zs.zbar.iter().map(|z| z.inv()).collect();
    let plus = m_half(q, &zs.zbar, &s.g_plus, &s.gp_plus, &s.k_plus);
    let minus = m_half(q, &inv, &s.g_minus, &s.gp_minus, &s.k_minus);
    let pref = (q - ONE) / (2.0 * qpow(q, p.n as i64));
    let entries = plus.add(&minus).scale(pref);
    Ok(SpectralMatrix { entries, predicted, label: MatrixLabel::M })
}

/// `mu_n = q^{-N}(1 - q^n)(1 - abcd q^{2N-1-n})`, `n = 1..=N`.
pub fn predicted_mu(p: &AWParams) -> Vec<Complex64> {
    let n = p.n as i64;
    let qn = qpow(p.q, -n);
    let abcd = p.abcd();
    (1..=n).map(|m| qn * (ONE - qpow(p.q, m)) * (ONE - abcd * qpow(p.q, 2 * n - 1 - m))).collect()
}

/// Normalized residuals of `A(z)p_N(x(qz)) + A(1/z)p_N(x(z/q)) = 0` at each zero.
///
/// When the three-term recurrence is available, each zero is refined and
/// both terms are evaluated in double-double: the equation can be
/// ill-conditioned enough that the rounding of an f64 zero alone leaves a
/// residual far above the tolerance.
pub fn zero_equation_residuals(p: &AWParams, zs: &ZeroSet) -> Result<Vec<f64>> {
    let rec = Recurrence::askey_wilson(p).ok();
    let poly = PolyEvaluator::new(&Params::AskeyWilson(*p))?;
    let q = p.q;
    zs.zbar
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            check_point_guards(q, z, n)?;
            if let (Some(rec), Some(&x)) = (&rec, zs.xbar.get(n)) {
                return Ok(extended::aw_zero_equation(p, rec, x, z));
            }
            let up = a_fn(p, z) * poly.eval((q * q * z * z + ONE) / (2.0 * q * z)).0;
            let down = a_fn(p, z.inv()) * poly.eval((z * z + q * q) / (2.0 * q * z)).0;
            Ok((up + down).norm() / (up.norm() + down.norm() + f64::MIN_POSITIVE))
        })
        .collect()
}

/// `(Qf)(z) = A(z) f(qz) + A(1/z) f(z/q) - [A(z) + A(1/z)] f(z)`.
pub fn apply_q_operator<F>(p: &AWParams, f: F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    check_point_guards(p.q, z, 0)?;
    let ap = a_fn(p, z);
    let am = a_fn(p, z.inv());
    Ok(ap * f(p.q * z) + am * f(z / p.q) - (ap + am) * f(z))
}

/// `(q^{-N} - 1)(1 - abcd q^{N-1})`.
pub fn q_operator_eigenvalue(p: &AWParams) -> Complex64 {
    let n = p.n as i64;
    (qpow(p.q, -n) - ONE) * (ONE - p.abcd() * qpow(p.q, n - 1))
}

/// `N(q^{-N} + abcd q^{N-1}) + (1 - q^{-N})/(1 - q) (q + abcd q^{N-1})`.
pub fn trace_closed_form(p: &AWParams) -> Complex64 {
    let n = p.n as i64;
    let q = p.q;
    let abcd = p.abcd();
    let nn = Complex64::new(n as f64, 0.0);
    nn * (qpow(q, -n) + abcd * qpow(q, n - 1)) + (ONE - qpow(q, -n)) / (ONE - q) * (q + abcd * qpow(q, n - 1))
}

/// `q^{-N^2} (q;q)_N (abcd q^{N-1};q)_N`.
pub fn det_closed_form(p: &AWParams) -> Complex64 {
    let n = p.n as i64;
    qpow(p.q, -n * n) * qpochhammer(p.q, p.q, p.n) * qpochhammer(p.abcd() * qpow(p.q, n - 1), p.q, p.n)
}

/// Largest entrywise change relative to the largest entry.
pub fn max_entry_change(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.data().iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub tolerances: Tolerances,
    /// Values of `t` for the deformation `(a, b, c, d) -> (t a, b / t, c, d)`.
    pub sweep: Vec<Complex64>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tolerances: Tolerances::default(),
            sweep: vec![Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.3)],
        }
    }
}

/// Spectrum, trace/determinant identities, rational spectrum (when `q` and
/// `abcd` are rational) and isospectral sweep for `M`.
pub fn verify_spectral_identities(p: &AWParams, m: &SpectralMatrix, opts: &SpectralOptions) -> VerificationReport {
    let tol = &opts.tolerances;
    let mut report = VerificationReport::new();
    let targets = SpectralTargets {
        label: "M",
        predicted: &m.predicted,
        trace_k1_closed: trace_closed_form(p),
        det_closed: det_closed_form(p),
        refs_trace: refs::TRACE,
        refs_det: refs::DET,
        refs_spectrum: refs::SPECTRUM,
    };
    spectral_identity_checks(&mut report, &m.entries, &targets, tol.spectrum, tol.trace_det);

    if let (Some(q), Some(abcd)) = (complex_as_rational(p.q), complex_as_rational(p.abcd())) {
        let n = p.n;
        let exact = rational_spectrum(&q, &abcd, n, |m| 2 * n as i64 - 1 - m as i64);
        rational_spectrum_check(&mut report, "M", &m.entries, &exact, tol.diophantine, refs::RATIONAL);
    }

    let base = match eigenvalues(&m.entries) {
        Ok(e) => e,
        Err(e) => {
            report.failed("isospectral-M", tol.isospectral, &[refs::ISOSPECTRAL], e.to_string());
            return report;
        }
    };
    for &t in &opts.sweep {
        let name = format!("isospectral-M-t={}", fmt_complex(t));
        let swept = p
            .with_abcd(t * p.a, p.b / t, p.c, p.d)
            .and_then(|ps| {
                let zs = ZeroSet::compute(&Params::AskeyWilson(ps))?;
                build_matrix_m(&ps, &zs)
            })
            .and_then(|sm| eigenvalues(&sm.entries))
            .and_then(|e| match_spectra(&e, &base));
        match swept {
            Ok(mm) => {
                report.check(name, mm.max_rel_gap, tol.isospectral, &[refs::ISOSPECTRAL]);
            }
            Err(e) => report.failed(name, tol.isospectral, &[refs::ISOSPECTRAL], e.to_string()),
        }
    }
    report
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyform::aw_rational_eval;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn anchor() -> (AWParams, ZeroSet) {
        let p = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let zs = ZeroSet::askey_wilson(&p).unwrap();
        (p, zs)
    }

    #[test]
    fn structure_function_values() {
        let (p, _) = anchor();
        assert_eq!(a_fn(&p, c(0.0)), ONE);
        assert_eq!(a_fn(&p, c(0.25)).norm(), 0.0);
        let zn = Complex64::new(0.3, 0.7);
        let zm = Complex64::new(-1.1, 0.2);
        assert!((k_fn(ONE, zn, zm) - ONE).norm() < 1e-14);
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        let p = AWParams::new(
            Complex64::new(0.7, 0.2),
            Complex64::new(-1.3, 0.5),
            Complex64::new(2.1, -0.4),
            Complex64::new(0.3, 0.9),
            Complex64::new(0.5, 0.2),
            3,
        )
        .unwrap();
        let h = 1e-6;
        for z in [Complex64::new(0.4, 0.8), Complex64::new(-1.7, 0.3), Complex64::new(2.5, -1.2)] {
            let fd = (g_fn(&p, z + h) - g_fn(&p, z - h)) / (2.0 * h);
            let exact = g_prime(&p, z);
            assert!((fd - exact).norm() <= 1e-7 * exact.norm().max(1.0), "{fd} vs {exact}");
        }
    }

    #[test]
    fn degree_one_matrix_is_mu() {
        let (p, zs) = anchor();
        let m = build_matrix_m(&p, &zs).unwrap();
        assert!((m.entries[(0, 0)] - c(-119.0)).norm() < 1e-10);
        assert!((m.predicted[0] - c(-119.0)).norm() < 1e-12);
    }

    #[test]
    fn predicted_mu_hand_values() {
        // abcd = 3/10 with q = 1/2, N = 2
        let p = AWParams::real(2.0, 3.0, 0.25, 0.2, 0.5, 2).unwrap();
        let mu = predicted_mu(&p);
        assert!((mu[0] - c(37.0 / 20.0)).norm() < 1e-14);
        assert!((mu[1] - c(51.0 / 20.0)).norm() < 1e-14);
        assert!((det_closed_form(&p) - c(1887.0 / 400.0)).norm() < 1e-13);
    }

    #[test]
    fn zero_equations_anchor_and_perturbation() {
        let (p, zs) = anchor();
        assert!(zero_equation_residuals(&p, &zs).unwrap()[0] <= 1e-12);
        let mut off = zs.clone();
        off.xbar[0] += c(1e-2);
        off.zbar[0] = crate::polyform::x_to_z(off.xbar[0]);
        assert!(zero_equation_residuals(&p, &off).unwrap()[0] > 1e-4);
    }

    #[test]
    fn q_operator_on_constants_and_p1() {
        let (p, _) = anchor();
        let z = Complex64::new(0.3, 1.4);
        assert!(apply_q_operator(&p, |_| ONE, z).unwrap().norm() < 1e-13);
        let lhs = apply_q_operator(&p, |w| aw_rational_eval(&p, w).unwrap(), z).unwrap();
        let ratio = lhs / aw_rational_eval(&p, z).unwrap();
        assert!((ratio - c(-119.0)).norm() < 1e-10);
        assert!((q_operator_eigenvalue(&p) - c(-119.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_zero_reported() {
        let (p, _) = anchor();
        let err = AWStructureEval::evaluate(&p, &[c(1.0)]);
        assert!(matches!(err, Err(Error::SingularConfiguration { .. })));
    }

    #[test]
    fn degree_one_spectral_identities() {
        let (p, zs) = anchor();
        let m = build_matrix_m(&p, &zs).unwrap();
        let r = verify_spectral_identities(&p, &m, &SpectralOptions::default());
        assert!((trace_closed_form(&p) - c(-119.0)).norm() < 1e-12);
        assert!(r.get("rational-spectrum-M").is_some());
        assert!(r.pass(), "{:#?}", r.failures().collect::<Vec<_>>());
    }
}
