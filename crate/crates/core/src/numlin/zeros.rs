//! Polynomial zeros: companion-matrix seeds polished against a structured
//! evaluator, and the [`ZeroSet`] record used by the spectral layers.

use num_complex::Complex64;

use super::eigen::eigenvalues;
use super::matrix::CMatrix;
use crate::ddouble::to_complex64;
use crate::error::{Error, Result};
use crate::polyform::{x_to_z, AWParams, ExtendedPoly, Family, MonomialPoly, Params, RacahParams};
use crate::qkernel::{ONE, ZERO};
use crate::recurrence::Recurrence;

/// Relative distance below which two zeros count as coincident.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Acceptance bound on `|p(zero)| / scale`.
pub const ZERO_RESIDUAL_BOUND: f64 = 1e-10;

const MAX_POLISH_STEPS: usize = 200;

/// Frobenius companion matrix of the monic normalization of `poly`.
pub fn companion_matrix(poly: &MonomialPoly) -> CMatrix {
    let n = poly.degree();
    let lead = poly.leading();
    let c = poly.coeffs();
    CMatrix::from_fn(n, |i, j| {
        if i == 0 {
            -c[n - 1 - j] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    })
}

/// Ascending by real part, ties broken by imaginary part.
pub fn sort_zeros(zs: &mut [Complex64]) {
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest of the pairwise distance and the largest modulus.
pub fn spread(zs: &[Complex64]) -> f64 {
    let mut s = zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            s = s.max((zs[i] - zs[j]).norm());
        }
    }
    s
}

pub fn min_separation(zs: &[Complex64]) -> f64 {
    let mut s = f64::INFINITY;
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            s = s.min((zs[i] - zs[j]).norm());
        }
    }
    s
}

/// Zeros of a polynomial given in monomial form, refined with `evaluator`
/// (which returns value and derivative at a point).
///
/// Seeds are the eigenvalues of the companion matrix. Refinement runs
/// Newton steps with implicit deflation against the other current
/// approximations (the Aberth-Ehrlich correction), so that two seeds cannot
/// be drawn into the same zero.
pub fn find_polynomial_zeros<F>(poly: &MonomialPoly, evaluator: F) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let n = poly.degree();
    if n == 0 {
        return Err(Error::InvalidParameters("degree-0 polynomial has no zeros".into()));
    }
    if poly.leading() == ZERO {
        return Err(Error::InvalidParameters("leading coefficient vanishes".into()));
    }
    let seeds = eigenvalues(&companion_matrix(poly))?;
    polish_and_accept(seeds, evaluator, |z| poly.magnitude(z))
}

/// Polish `seeds` against `evaluator` and accept them as zeros when the
/// value at each is small against `magnitude` and no two coincide.
pub fn polish_and_accept<F, G>(mut zs: Vec<Complex64>, evaluator: F, magnitude: G) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
    G: Fn(Complex64) -> f64,
{
    polish(&mut zs, &evaluator);
    sort_zeros(&mut zs);

    for &z in &zs {
        let (v, _) = evaluator(z);
        let scale = magnitude(z).max(f64::MIN_POSITIVE);
        let r = v.norm() / scale;
        if r.is_nan() || r > ZERO_RESIDUAL_BOUND {
            return Err(Error::DegenerateConfiguration(format!("zero {z} did not converge (scaled residual {r:.3e})")));
        }
    }
    let sp = spread(&zs);
    if zs.len() > 1 && min_separation(&zs) < DEGENERACY_THRESHOLD * sp {
        return Err(Error::DegenerateConfiguration(format!(
            "two zeros closer than {DEGENERACY_THRESHOLD:e} relative to their spread"
        )));
    }
    Ok(zs)
}

fn polish<F>(zs: &mut [Complex64], evaluator: &F)
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let n = zs.len();
    let mut done = vec![false; n];
    for _ in 0..MAX_POLISH_STEPS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let z = zs[i];
            let (v, d) = evaluator(z);
            if v == ZERO {
                done[i] = true;
                continue;
            }
            let ratio = v / d;
            let mut repulsion = ZERO;
            for (j, &w) in zs.iter().enumerate() {
                if j != i && w != z {
                    repulsion += (z - w).inv();
                }
            }
            let denom = ONE - ratio * repulsion;
            let step = if denom.norm() > 0.0 && (ratio / denom).is_finite() { ratio / denom } else { ratio };
            if !step.is_finite() {
                done[i] = true;
                continue;
            }
            zs[i] = z - step;
            if step.norm() <= 4.0 * f64::EPSILON * zs[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
}

/// The `N` zeros of one polynomial, with residuals and separation data.
///
/// For Askey-Wilson, `xbar` holds the zeros of `p_N(x)` and `zbar` their
/// images under [`x_to_z`] (principal branch unless flipped); for q-Racah
/// `xbar` is empty and `zbar` holds the zeros of `R_N(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub params: Params,
    pub zbar: Vec<Complex64>,
    pub xbar: Vec<Complex64>,
    /// `|p(zero)|` divided by the size of the terms combined to evaluate it.
    pub residuals: Vec<f64>,
    /// Minimum pairwise distance in the flow coordinate (`x` for
    /// Askey-Wilson, `z` for q-Racah).
    pub min_separation: f64,
}

impl ZeroSet {
    pub fn compute(params: &Params) -> Result<Self> {
        match params {
            Params::AskeyWilson(p) => Self::askey_wilson(p),
            Params::QRacah(p) => Self::q_racah(p),
        }
    }

    pub fn askey_wilson(p: &AWParams) -> Result<Self> {
        if p.n == 0 {
            return Err(Error::InvalidParameters("degree N must be at least 1".into()));
        }
        let (xbar, residuals) = zeros_of(&Params::AskeyWilson(*p))?;
        let zbar = xbar.iter().map(|&x| x_to_z(x)).collect();
        Ok(ZeroSet { params: Params::AskeyWilson(*p), zbar, min_separation: min_separation(&xbar), xbar, residuals })
    }

    pub fn q_racah(p: &RacahParams) -> Result<Self> {
        if p.n == 0 {
            return Err(Error::InvalidParameters("degree N must be at least 1".into()));
        }
        let (zbar, residuals) = zeros_of(&Params::QRacah(*p))?;
        Ok(ZeroSet {
            params: Params::QRacah(*p),
            min_separation: min_separation(&zbar),
            zbar,
            xbar: Vec::new(),
            residuals,
        })
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn len(&self) -> usize {
        self.zbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zbar.is_empty()
    }

    /// Positions in the flow coordinate: `xbar` for Askey-Wilson, `zbar` for q-Racah.
    pub fn flow_coordinates(&self) -> &[Complex64] {
        match self.family() {
            Family::AskeyWilson => &self.xbar,
            Family::QRacah => &self.zbar,
        }
    }

    /// Copy with `zbar[n]` replaced by `1/zbar[n]` (the other square-root
    /// determination for that zero). Only meaningful for Askey-Wilson.
    pub fn with_flipped(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.zbar[n] = out.zbar[n].inv();
        out
    }
}

/// Zeros of `p_N` (in `x`) or `R_N` (in `z`) with their scaled residuals.
///
/// The three-term recurrence is preferred: its tridiagonal matrix supplies
/// the seeds and its forward evaluation the polishing, followed by Newton
/// steps in double-double, since clustered zeros can be far less accurate
/// than their f64 residuals suggest. When a recurrence
/// coefficient vanishes, the monomial expansion in extended precision is
/// used instead.
fn zeros_of(params: &Params) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if let Ok(rec) = Recurrence::for_params(params) {
        let seeds: Vec<Complex64> = eigenvalues(&rec.tridiagonal())?.into_iter().map(|l| rec.lambda_to_t(l)).collect();
        let zs: Vec<Complex64> = polish_and_accept(seeds, |t| rec.eval(t), |t| rec.magnitude(t))?
            .into_iter()
            .map(|z| to_complex64(rec.refine_zero(z)))
            .collect();
        let residuals = zs.iter().map(|&z| rec.eval(z).0.norm() / rec.magnitude(z).max(f64::MIN_POSITIVE)).collect();
        return Ok((zs, residuals));
    }
    let extended = ExtendedPoly::new(params);
    let poly = extended.rounded()?;
    let zs = refine_extended(&extended, find_polynomial_zeros(&poly, |x| poly.eval(x))?);
    let residuals = relative_residuals(&poly, &zs);
    Ok((zs, residuals))
}

/// Two extended-precision Newton steps on each converged zero, which remove
/// the error left by evaluating the rounded coefficients in floating point.
fn refine_extended(extended: &ExtendedPoly, mut zs: Vec<Complex64>) -> Vec<Complex64> {
    for z in zs.iter_mut() {
        for _ in 0..2 {
            *z = extended.newton_step(*z);
        }
    }
    zs
}

fn relative_residuals(poly: &MonomialPoly, zs: &[Complex64]) -> Vec<f64> {
    zs.iter().map(|&z| poly.eval(z).0.norm() / poly.magnitude(z).max(f64::MIN_POSITIVE)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn quadratic_zeros() {
        let p = MonomialPoly::new(r(&[2.0, -3.0, 1.0])).unwrap();
        let z = find_polynomial_zeros(&p, |t| p.eval(t)).unwrap();
        assert!((z[0].re - 1.0).abs() < 1e-14 && (z[1].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degree_one_family_anchors() {
        let aw = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let zs = ZeroSet::askey_wilson(&aw).unwrap();
        assert!((zs.xbar[0] - Complex64::new(10.0 / 17.0, 0.0)).norm() < 1e-14);
        let racah = RacahParams::real(3.0, 2.0, 4.0, 5.0, 0.5, 1).unwrap();
        let zs = ZeroSet::q_racah(&racah).unwrap();
        assert!((zs.zbar[0] - Complex64::new(7.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn double_root_is_degenerate() {
        let p = MonomialPoly::new(r(&[1.0, -2.0, 1.0])).unwrap();
        assert!(matches!(find_polynomial_zeros(&p, |t| p.eval(t)), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn degree_zero_rejected() {
        let aw = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 0).unwrap();
        assert!(matches!(ZeroSet::askey_wilson(&aw), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn companion_eigenvalues_are_zeros() {
        // (t - 1)(t + 2)(t - 3i)
        let roots = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 3.0)];
        let mut coeffs = vec![ONE];
        for &rt in &roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] -= rt * c;
                next[k + 1] += c;
            }
            coeffs = next;
        }
        let p = MonomialPoly::new(coeffs).unwrap();
        let mut e = eigenvalues(&companion_matrix(&p)).unwrap();
        sort_zeros(&mut e);
        let mut want = roots.to_vec();
        sort_zeros(&mut want);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
