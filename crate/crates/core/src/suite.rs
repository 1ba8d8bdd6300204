//! The full verification suite for one parameter point.

use num_complex::Complex64;

use crate::awspec;
use crate::error::Result;
use crate::extended;
use crate::numlin::{SpectralMatrix, ZeroSet};
use crate::polyform::{AWParams, Params, RacahParams};
use crate::racahspec::{self, Branch};
use crate::recurrence::{PolyEvaluator, Recurrence};
use crate::report::{rel_err, VerificationReport};
use crate::sampling::SplitMix64;
use crate::tolerances::Tolerances;
use crate::zeroflow::{self, fd_jacobian, jacobian_residual, FD_STEP};

/// Perturbation size used by the linearization check.
pub const LINEARIZATION_EPSILON: f64 = 1e-6;
/// Number of random points for the eigen-relation check.
pub const EIGEN_POINTS: usize = 10;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub tolerances: Tolerances,
    /// Deformation parameters for the isospectral sweep.
    pub sweep: Vec<Complex64>,
    /// Seed for the eigen-relation sample points and the perturbation direction.
    pub seed: u64,
    pub jacobian: bool,
    pub linearization: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            tolerances: Tolerances::default(),
            sweep: awspec::SpectralOptions::default().sweep,
            seed: 0,
            jacobian: true,
            linearization: true,
        }
    }
}

/// Zeros and the zero-built matrix for a parameter point.
pub fn zeros_and_matrix(params: &Params) -> Result<(ZeroSet, SpectralMatrix)> {
    let zs = ZeroSet::compute(params)?;
    let m = match params {
        Params::AskeyWilson(p) => awspec::build_matrix_m(p, &zs)?,
        Params::QRacah(p) => racahspec::build_matrix_l(p, &zs)?,
    };
    Ok((zs, m))
}

/// Run every check for `params`. Errors are returned only when the zeros or
/// the matrix cannot be built at all; failures of individual checks are
/// recorded in the report.
pub fn verify(params: &Params, opts: &SuiteOptions) -> Result<VerificationReport> {
    let (zs, m) = zeros_and_matrix(params)?;
    let mut report = match params {
        Params::AskeyWilson(p) => verify_aw(p, &zs, &m, opts),
        Params::QRacah(p) => verify_racah(p, &zs, &m, opts),
    };
    if opts.jacobian {
        jacobian_check(&mut report, &zs, &m, &opts.tolerances);
    }
    if opts.linearization {
        let mut rng = SplitMix64::new(opts.seed.wrapping_add(1));
        let dir = rng.direction(zs.len());
        let t = zeroflow::short_time(&m.entries);
        report.extend(zeroflow::linearization_check(&zs, &m, LINEARIZATION_EPSILON, &dir, t, &opts.tolerances));
    }
    Ok(report)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn zs_poly(zs: &ZeroSet) -> PolyEvaluator {
    // the zero set was built from the same evaluator, so this cannot fail
    PolyEvaluator::new(&zs.params).expect("evaluator of a computed zero set")
}

/// `p_N((z^2 + 1)/(2z))`.
fn aw_z_eval(poly: &PolyEvaluator, z: Complex64) -> Complex64 {
    poly.eval((z * z + 1.0) / (2.0 * z)).0
}

fn sample_points(seed: u64) -> Vec<Complex64> {
    let mut rng = SplitMix64::new(seed);
    (0..EIGEN_POINTS).map(|_| rng.parameter()).collect()
}

/// The eigen-relations are evaluated in double-double when the three-term
/// recurrence is available: the difference operator cancels heavily.
fn verify_aw(p: &AWParams, zs: &ZeroSet, m: &SpectralMatrix, opts: &SuiteOptions) -> VerificationReport {
    let tol = &opts.tolerances;
    let mut r = VerificationReport::new();
    match awspec::zero_equation_residuals(p, zs) {
        Ok(res) => {
            r.check("zero-equations-M", max_of(&res), tol.identity, &[awspec::refs::ZERO_IDENTITY]);
        }
        Err(e) => r.failed("zero-equations-M", tol.identity, &[awspec::refs::ZERO_IDENTITY], e.to_string()),
    }
    if p.n == 1 {
        let mu = m.predicted[0];
        r.check(
            "matrix-M-entry",
            rel_err(m.entries[(0, 0)], mu, mu.norm().max(1.0)),
            tol.anchor,
            &[awspec::refs::SPECTRUM],
        );
    }
    let copts = awspec::SpectralOptions { tolerances: *tol, sweep: opts.sweep.clone() };
    r.extend(awspec::verify_spectral_identities(p, m, &copts));

    let ev = awspec::q_operator_eigenvalue(p);
    let poly = zs_poly(zs);
    let rec = Recurrence::askey_wilson(p).ok();
    let worst = sample_points(opts.seed)
        .into_iter()
        .map(|z| {
            let lhs = awspec::apply_q_operator(p, |w| aw_z_eval(&poly, w), z)?;
            let ratio = match &rec {
                Some(rec) => extended::aw_eigen_ratio(p, rec, z),
                None => lhs / aw_z_eval(&poly, z),
            };
            Ok(rel_err(ratio, ev, ev.norm()))
        })
        .collect::<Result<Vec<f64>>>();
    match worst {
        Ok(v) => {
            r.check("eigen-relation-Q", max_of(&v), tol.eigen_relation, &[awspec::refs::EIGEN_RELATION]);
        }
        Err(e) => r.failed("eigen-relation-Q", tol.eigen_relation, &[awspec::refs::EIGEN_RELATION], e.to_string()),
    }

    for n in 0..zs.len() {
        let name = format!("branch-flip-M-z{}", n + 1);
        match awspec::build_matrix_m(p, &zs.with_flipped(n)) {
            Ok(f) => {
                r.check(name, awspec::max_entry_change(&m.entries, &f.entries), tol.branch, &[awspec::refs::BRANCH]);
            }
            Err(e) => r.failed(name, tol.branch, &[awspec::refs::BRANCH], e.to_string()),
        }
    }
    r
}

fn verify_racah(p: &RacahParams, zs: &ZeroSet, l: &SpectralMatrix, opts: &SuiteOptions) -> VerificationReport {
    let tol = &opts.tolerances;
    let mut r = VerificationReport::new();
    match racahspec::zero_equation_residuals(p, zs) {
        Ok(res) => {
            r.check("zero-equations-L", max_of(&res), tol.identity, &[racahspec::refs::ZERO_IDENTITY]);
        }
        Err(e) => r.failed("zero-equations-L", tol.identity, &[racahspec::refs::ZERO_IDENTITY], e.to_string()),
    }
    if p.n == 1 {
        let la = l.predicted[0];
        r.check(
            "matrix-L-entry",
            rel_err(l.entries[(0, 0)], la, la.norm().max(1.0)),
            tol.anchor,
            &[racahspec::refs::SPECTRUM],
        );
    }
    let copts = racahspec::SpectralOptions { tolerances: *tol, sweep: opts.sweep.clone() };
    r.extend(racahspec::verify_spectral_identities(p, l, &copts));

    let ev = racahspec::difference_eigenvalue(p);
    let poly = zs_poly(zs);
    let rec = Recurrence::q_racah(p).ok();
    let worst = sample_points(opts.seed)
        .into_iter()
        .map(|z| {
            let lhs = racahspec::apply_racah_difference(p, |w| poly.eval(w).0, z)?;
            let ratio = match &rec {
                Some(rec) => extended::racah_eigen_ratio(p, rec, z)?,
                None => lhs / poly.eval(z).0,
            };
            Ok(rel_err(ratio, ev, ev.norm()))
        })
        .collect::<Result<Vec<f64>>>();
    match worst {
        Ok(v) => {
            r.check("eigen-relation-R", max_of(&v), tol.eigen_relation, &[racahspec::refs::EIGEN_RELATION]);
        }
        Err(e) => r.failed("eigen-relation-R", tol.eigen_relation, &[racahspec::refs::EIGEN_RELATION], e.to_string()),
    }

    match racahspec::build_matrix_l_on_branch(p, zs, Branch::Flipped) {
        Ok(f) => {
            r.check(
                "branch-flip-L",
                awspec::max_entry_change(&l.entries, &f.entries),
                tol.branch,
                &[racahspec::refs::BRANCH],
            );
        }
        Err(e) => r.failed("branch-flip-L", tol.branch, &[racahspec::refs::BRANCH], e.to_string()),
    }
    r
}

/// Central-difference Jacobian of the flow at the zeros against the analytic matrix.
pub fn jacobian_check(report: &mut VerificationReport, zs: &ZeroSet, m: &SpectralMatrix, tol: &Tolerances) {
    let label = format!("{:?}", m.label);
    let refs = match zs.family() {
        crate::polyform::Family::AskeyWilson => awspec::refs::JACOBIAN,
        crate::polyform::Family::QRacah => racahspec::refs::JACOBIAN,
    };
    let name = format!("jacobian-{label}");
    match fd_jacobian(|x| zeroflow::velocity(zs, x), zs.flow_coordinates(), FD_STEP) {
        Ok(fd) => {
            report.check(name, jacobian_residual(&fd, &m.entries, tol.jacobian), tol.jacobian, &[refs]);
        }
        Err(e) => report.failed(name, tol.jacobian, &[refs], e.to_string()),
    }
}
