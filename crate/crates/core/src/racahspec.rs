//! q-Racah spectral layer.
//!
//! With `S = sqrt(z^2 - 4 gamma delta q)` and `Z = (z + S)/(2 gamma delta q)`
//! (so that `z = 1/Z + gamma delta q Z` and `Z = q^x`), the shifted points
//!
//! ```text
//! z^(+-) = q^{+-1} z +- ((1 - q^2)/(2q)) (z - S)
//! ```
//!
//! are `z(x +- 1)`. The coefficients of the q-difference equation are
//!
//! ```text
//! B(Z) = (1 - alpha q Z)(1 - beta delta q Z)(1 - gamma q Z)(1 - gamma delta q Z)
//!        / ((1 - gamma delta q Z^2)(1 - gamma delta q^2 Z^2))
//! D(Z) = q (1 - Z)(1 - delta Z)(beta - gamma Z)(alpha - gamma delta Z)
//!        / ((1 - gamma delta Z^2)(1 - gamma delta q Z^2))
//! ```
//!
//! Changing the sign of `S` exchanges `z^(+)` with `z^(-)` and `B` with `D`,
//! so every quantity built from both halves is independent of the branch.

use num_complex::Complex64;

use crate::awspec::fmt_complex;
use crate::error::{Error, Result};
use crate::extended;
use crate::numlin::{eigenvalues, match_spectra, CMatrix, MatrixLabel, SpectralMatrix, ZeroSet};
use crate::polyform::{Params, RacahParams};
use crate::qkernel::{qpochhammer, qpow, ONE};
use crate::recurrence::{PolyEvaluator, Recurrence};
use crate::report::{
    complex_as_rational, rational_spectrum, rational_spectrum_check, spectral_identity_checks, SpectralTargets,
    VerificationReport,
};
use crate::tolerances::Tolerances;

/// Guard on every denominator of the structure functions.
pub const GUARD_EPS: f64 = 1e-10;

pub mod refs {
    pub const ZERO_IDENTITY: &str = "racah-zero-equations";
    pub const SPECTRUM: &str = "racah-L-spectrum";
    pub const RATIONAL: &str = "racah-L-rational-spectrum";
    pub const ISOSPECTRAL: &str = "racah-L-isospectral";
    pub const TRACE: &str = "racah-L-trace-identities";
    pub const DET: &str = "racah-L-determinant";
    pub const EIGEN_RELATION: &str = "racah-q-difference-equation";
    pub const BRANCH: &str = "racah-branch-independence";
    pub const JACOBIAN: &str = "racah-flow-jacobian";
    pub const FLOW: &str = "racah-zero-flow";
}

/// Determination of `S = sqrt(z^2 - 4 gamma delta q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// Principal square root.
    #[default]
    Principal,
    /// Negated principal square root.
    Flipped,
}

impl Branch {
    pub fn flip(self) -> Self {
        match self {
            Branch::Principal => Branch::Flipped,
            Branch::Flipped => Branch::Principal,
        }
    }
}

fn guard(v: Complex64, name: &'static str, index: usize) -> Result<()> {
    if v.norm() > GUARD_EPS {
        Ok(())
    } else {
        Err(Error::SingularConfiguration { guard: name, index })
    }
}

/// Everything the difference operator needs at one point `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RacahPoint {
    pub z: Complex64,
    pub s: Complex64,
    /// `Z = q^x`.
    pub zz: Complex64,
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub b: Complex64,
    pub d: Complex64,
    /// `dB/dz`.
    pub bp: Complex64,
    /// `dD/dz`.
    pub dp: Complex64,
    /// `dz^(+)/dz`.
    pub c_plus: Complex64,
    /// `dz^(-)/dz`.
    pub c_minus: Complex64,
}

/// Value and `Z`-derivative of `scale * prod(u_i + v_i Z) / prod(1 - w_j Z^2)`.
fn rational_in_z(
    scale: Complex64,
    linear: &[(Complex64, Complex64)],
    quad: &[Complex64],
    zz: Complex64,
) -> (Complex64, Complex64) {
    let vals: Vec<Complex64> = linear.iter().map(|&(u, v)| u + v * zz).collect();
    let num: Complex64 = vals.iter().product();
    let mut dnum = Complex64::new(0.0, 0.0);
    for (i, &(_, v)) in linear.iter().enumerate() {
        let mut t = v;
        for (j, val) in vals.iter().enumerate() {
            if j != i {
                t *= val;
            }
        }
        dnum += t;
    }
    let dvals: Vec<Complex64> = quad.iter().map(|&w| ONE - w * zz * zz).collect();
    let den: Complex64 = dvals.iter().product();
    let mut dden = Complex64::new(0.0, 0.0);
    for (i, &w) in quad.iter().enumerate() {
        let mut t = -2.0 * w * zz;
        for (j, val) in dvals.iter().enumerate() {
            if j != i {
                t *= val;
            }
        }
        dden += t;
    }
    (scale * num / den, scale * (dnum * den - num * dden) / (den * den))
}

/// Structure functions at `z` with the given square-root determination.
pub fn point_structure(p: &RacahParams, z: Complex64, branch: Branch, index: usize) -> Result<RacahPoint> {
    let q = p.q;
    let gd = p.gamma_delta();
    let gdq = gd * q;
    guard(gdq, "|gamma delta q| > eps", index)?;
    let disc = z * z - 4.0 * gdq;
    if disc.norm() < GUARD_EPS {
        return Err(Error::BranchDegenerate { index });
    }
    let root = disc.sqrt();
    let s = match branch {
        Branch::Principal => root,
        Branch::Flipped => -root,
    };
    let zz = (z + s) / (2.0 * gdq);
    let z2 = zz * zz;
    guard(ONE - gd * z2, "|1 - gamma delta Z^2| > eps", index)?;
    guard(ONE - gdq * z2, "|1 - gamma delta q Z^2| > eps", index)?;
    guard(ONE - gdq * q * z2, "|1 - gamma delta q^2 Z^2| > eps", index)?;

    let k = (ONE - q * q) / (2.0 * q);
    let z_plus = q * z + k * (z - s);
    let z_minus = z / q - k * (z - s);
    let c_plus = q + k * (ONE - z / s);
    let c_minus = q.inv() - k * (ONE - z / s);

    let (b, db) = rational_in_z(
        ONE,
        &[(ONE, -p.alpha * q), (ONE, -p.beta * p.delta * q), (ONE, -p.gamma * q), (ONE, -gdq)],
        &[gdq, gdq * q],
        zz,
    );
    let (d, dd) = rational_in_z(q, &[(ONE, -ONE), (ONE, -p.delta), (p.beta, -p.gamma), (p.alpha, -gd)], &[gd, gdq], zz);
    let dzz = (ONE + z / s) / (2.0 * gdq);
    Ok(RacahPoint { z, s, zz, z_plus, z_minus, b, d, bp: db * dzz, dp: dd * dzz, c_plus, c_minus })
}

/// `W^(+-)(z_n, z_m) = (C(z_n)(z_n - z_m) - z_n^(+-) + z_m) / ((z_n - z_m)(z_n^(+-) - z_m))`.
pub fn w_fn(c: Complex64, zn: Complex64, zn_shift: Complex64, zm: Complex64) -> Complex64 {
    (c * (zn - zm) - zn_shift + zm) / ((zn - zm) * (zn_shift - zm))
}

/// Structure functions at all zeros plus the pair functions `W^(+-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RacahStructureEval {
    pub points: Vec<RacahPoint>,
    /// `w_plus[n][m] = W^(+)(z_n, z_m)`; diagonal unused (zero).
    pub w_plus: Vec<Vec<Complex64>>,
    pub w_minus: Vec<Vec<Complex64>>,
}

impl RacahStructureEval {
    pub fn evaluate(p: &RacahParams, zs: &[Complex64], branch: Branch) -> Result<Self> {
        let points =
            zs.iter().enumerate().map(|(n, &z)| point_structure(p, z, branch, n)).collect::<Result<Vec<_>>>()?;
        let n = zs.len();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    guard(zs[i] - zs[j], "|z_n - z_m| > eps", i)?;
                    guard(points[i].z_plus - zs[j], "|z_n^(+) - z_m| > eps", i)?;
                    guard(points[i].z_minus - zs[j], "|z_n^(-) - z_m| > eps", i)?;
                }
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        let table = |plus: bool| -> Vec<Vec<Complex64>> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                zero
                            } else if plus {
                                w_fn(points[i].c_plus, zs[i], points[i].z_plus, zs[j])
                            } else {
                                w_fn(points[i].c_minus, zs[i], points[i].z_minus, zs[j])
                            }
                        })
                        .collect()
                })
                .collect()
        };
        Ok(RacahStructureEval { w_plus: table(true), w_minus: table(false), points })
    }
}

pub fn eval_structure(p: &RacahParams, zs: &ZeroSet) -> Result<RacahStructureEval> {
    RacahStructureEval::evaluate(p, &zs.zbar, Branch::Principal)
}

/// `prod_{l != n, l not in skip} (shift - z_l)/(z_n - z_l)`.
fn shift_product(zs: &[Complex64], n: usize, shift: Complex64, skip: Option<usize>) -> Complex64 {
    (0..zs.len()).filter(|&l| l != n && Some(l) != skip).map(|l| (shift - zs[l]) / (zs[n] - zs[l])).product()
}

/// The matrix `L` on the given square-root branch.
pub fn build_matrix_l_on_branch(p: &RacahParams, zs: &ZeroSet, branch: Branch) -> Result<SpectralMatrix> {
    let z = &zs.zbar;
    let s = RacahStructureEval::evaluate(p, z, branch)?;
    let n = z.len();
    let entries = CMatrix::from_fn(n, |row, col| {
        let pt = &s.points[row];
        let zn = z[row];
        let dplus = pt.z_plus - zn;
        let dminus = pt.z_minus - zn;
        if row == col {
            let wp: Complex64 = s.w_plus[row].iter().sum();
            let wm: Complex64 = s.w_minus[row].iter().sum();
            (pt.bp * dplus + pt.b * (pt.c_plus - ONE + dplus * wp)) * shift_product(z, row, pt.z_plus, None)
                + (pt.dp * dminus + pt.d * (pt.c_minus - ONE + dminus * wm)) * shift_product(z, row, pt.z_minus, None)
        } else {
            let zm = z[col];
            let rp = dplus / (zn - zm);
            let rm = dminus / (zn - zm);
            pt.b * rp * rp * shift_product(z, row, pt.z_plus, Some(col))
                + pt.d * rm * rm * shift_product(z, row, pt.z_minus, Some(col))
        }
    });
    Ok(SpectralMatrix { entries, predicted: predicted_lambda(p), label: MatrixLabel::L })
}

/// The matrix `L` on the principal branch.
pub fn build_matrix_l(p: &RacahParams, zs: &ZeroSet) -> Result<SpectralMatrix> {
    build_matrix_l_on_branch(p, zs, Branch::Principal)
}

/// `lambda_n = q^{-N}(1 - q^n)(1 - alpha beta q^{2N-n+1})`, `n = 1..=N`.
pub fn predicted_lambda(p: &RacahParams) -> Vec<Complex64> {
    let n = p.n as i64;
    let qn = qpow(p.q, -n);
    let ab = p.alpha_beta();
    (1..=n).map(|m| qn * (ONE - qpow(p.q, m)) * (ONE - ab * qpow(p.q, 2 * n - m + 1))).collect()
}

/// Normalized residuals of `B R_N(z^(+)) + D R_N(z^(-)) = 0` at each zero,
/// refined and evaluated in double-double when the three-term recurrence is
/// available (see [`crate::awspec::zero_equation_residuals`]).
pub fn zero_equation_residuals(p: &RacahParams, zs: &ZeroSet) -> Result<Vec<f64>> {
    let rec = Recurrence::q_racah(p).ok();
    let poly = PolyEvaluator::new(&Params::QRacah(*p))?;
    zs.zbar
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            let pt = point_structure(p, z, Branch::Principal, n)?;
            if let Some(rec) = &rec {
                return extended::racah_zero_equation(p, rec, z, n);
            }
            let (up, down) = (pt.b * poly.eval(pt.z_plus).0, pt.d * poly.eval(pt.z_minus).0);
            Ok((up + down).norm() / (up.norm() + down.norm() + f64::MIN_POSITIVE))
        })
        .collect()
}

/// `B(z) f(z^(+)) - [B(z) + D(z)] f(z) + D(z) f(z^(-))` on the given branch.
pub fn apply_racah_difference_on_branch<F>(p: &RacahParams, f: F, z: Complex64, branch: Branch) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let pt = point_structure(p, z, branch, 0)?;
    Ok(pt.b * f(pt.z_plus) - (pt.b + pt.d) * f(z) + pt.d * f(pt.z_minus))
}

pub fn apply_racah_difference<F>(p: &RacahParams, f: F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    apply_racah_difference_on_branch(p, f, z, Branch::Principal)
}

/// `(q^{-N} - 1)(1 - alpha beta q^{N+1})`.
pub fn difference_eigenvalue(p: &RacahParams) -> Complex64 {
    let n = p.n as i64;
    (qpow(p.q, -n) - ONE) * (ONE - p.alpha_beta() * qpow(p.q, n + 1))
}

/// `N(q^{-N} + ab q^{N+1}) + q(1 - q^{-N})(1 + ab q^N)/(1 - q)`.
pub fn trace_closed_form(p: &RacahParams) -> Complex64 {
    let n = p.n as i64;
    let q = p.q;
    let ab = p.alpha_beta();
    let nn = Complex64::new(n as f64, 0.0);
    nn * (qpow(q, -n) + ab * qpow(q, n + 1)) + q * (ONE - qpow(q, -n)) * (ONE + ab * qpow(q, n)) / (ONE - q)
}

/// `q^{-N^2} (q;q)_N (alpha beta q^{N+1};q)_N`.
pub fn det_closed_form(p: &RacahParams) -> Complex64 {
    let n = p.n as i64;
    qpow(p.q, -n * n) * qpochhammer(p.q, p.q, p.n) * qpochhammer(p.alpha_beta() * qpow(p.q, n + 1), p.q, p.n)
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub tolerances: Tolerances,
    /// Values of `t` for the deformation `(alpha, beta) -> (t alpha, beta / t)`.
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
/// `alpha beta` are rational) and isospectral sweep for `L`.
pub fn verify_spectral_identities(p: &RacahParams, l: &SpectralMatrix, opts: &SpectralOptions) -> VerificationReport {
    let tol = &opts.tolerances;
    let mut report = VerificationReport::new();
    let targets = SpectralTargets {
        label: "L",
        predicted: &l.predicted,
        trace_k1_closed: trace_closed_form(p),
        det_closed: det_closed_form(p),
        refs_trace: refs::TRACE,
        refs_det: refs::DET,
        refs_spectrum: refs::SPECTRUM,
    };
    spectral_identity_checks(&mut report, &l.entries, &targets, tol.spectrum, tol.trace_det);

    if let (Some(q), Some(ab)) = (complex_as_rational(p.q), complex_as_rational(p.alpha_beta())) {
        let n = p.n;
        let exact = rational_spectrum(&q, &ab, n, |m| 2 * n as i64 - m as i64 + 1);
        rational_spectrum_check(&mut report, "L", &l.entries, &exact, tol.diophantine, refs::RATIONAL);
    }

    let base = match eigenvalues(&l.entries) {
        Ok(e) => e,
        Err(e) => {
            report.failed("isospectral-L", tol.isospectral, &[refs::ISOSPECTRAL], e.to_string());
            return report;
        }
    };
    for &t in &opts.sweep {
        let name = format!("isospectral-L-t={}", fmt_complex(t));
        let swept = p
            .with_greek(t * p.alpha, p.beta / t, p.gamma, p.delta)
            .and_then(|ps| {
                let zs = ZeroSet::compute(&Params::QRacah(ps))?;
                build_matrix_l(&ps, &zs)
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
