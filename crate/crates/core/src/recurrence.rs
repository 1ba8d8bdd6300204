//! Three-term recurrences of both families, used for stable evaluation and
//! for locating zeros.
//!
//! With `p~_n` the terminating `4phi3` series normalized to `p~_0 = 1`,
//!
//! ```text
//! lambda(t) p~_n = A_n p~_{n+1} + B_n p~_n + C_n p~_{n-1}
//! ```
//!
//! where for Askey-Wilson `t = x`, `lambda = 2x`, `B_n = a + 1/a - A_n - C_n`,
//!
//! ```text
//! A_n = (1-abq^n)(1-acq^n)(1-adq^n)(1-abcdq^{n-1}) / (a (1-abcdq^{2n-1})(1-abcdq^{2n}))
//! C_n = a (1-q^n)(1-bcq^{n-1})(1-bdq^{n-1})(1-cdq^{n-1}) / ((1-abcdq^{2n-2})(1-abcdq^{2n-1}))
//! ```
//!
//! and for q-Racah `t = z`, `lambda = z - 1 - gamma delta q`, `B_n = -A_n - C_n`,
//!
//! ```text
//! A_n = (1-alpha q^{n+1})(1-alpha beta q^{n+1})(1-beta delta q^{n+1})(1-gamma q^{n+1})
//!       / ((1-alpha beta q^{2n+1})(1-alpha beta q^{2n+2}))
//! C_n = q (1-q^n)(1-beta q^n)(gamma - alpha beta q^n)(delta - alpha q^n)
//!       / ((1-alpha beta q^{2n})(1-alpha beta q^{2n+1})).
//! ```
//!
//! The nested series can cancel by many orders of magnitude for small `q`;
//! the recurrence does not, and its tridiagonal matrix gives the zeros as
//! eigenvalues.

use num_complex::Complex64;

use crate::ddouble::{to_complex64, to_complex_dd, ComplexDd};
use crate::error::{Error, Result};
use crate::numlin::CMatrix;
use crate::polyform::{AWParams, ExtendedPoly, MonomialPoly, Params, RacahParams};
use crate::qkernel::{ONE, ZERO};

/// Recurrence coefficients smaller than this make the recurrence unusable.
const COEFF_FLOOR: f64 = 1e-13;
/// Largest relative correction [`Recurrence::refine_zero`] accepts; a point
/// further from a zero than this is returned unchanged.
const REFINE_LIMIT: f64 = 1e-6;
const REFINE_STEPS: usize = 8;

/// Coefficients in one arithmetic.
#[derive(Debug, Clone, PartialEq)]
struct Coefficients<T> {
    /// `lambda(t) = slope * t + offset`.
    slope: T,
    offset: T,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    /// `p_N = normalization * p~_N`.
    normalization: T,
}

impl Coefficients<ComplexDd> {
    fn rounded(&self) -> Coefficients<Complex64> {
        let r = |v: &[ComplexDd]| v.iter().map(|&x| to_complex64(x)).collect();
        Coefficients {
            slope: to_complex64(self.slope),
            offset: to_complex64(self.offset),
            a: r(&self.a),
            b: r(&self.b),
            c: r(&self.c),
            normalization: to_complex64(self.normalization),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    f64s: Coefficients<Complex64>,
    /// The same coefficients computed and kept in double-double.
    ext: Coefficients<ComplexDd>,
}

fn dd(z: Complex64) -> ComplexDd {
    to_complex_dd(z)
}

fn one() -> ComplexDd {
    dd(ONE)
}

/// `q^k` for any integer `k`, by repeated multiplication.
fn pow(q: ComplexDd, k: i64) -> ComplexDd {
    let p = (0..k.unsigned_abs()).fold(one(), |acc, _| acc * q);
    if k < 0 {
        one() / p
    } else {
        p
    }
}

fn nonzero(v: ComplexDd, what: &'static str, index: usize) -> Result<ComplexDd> {
    let r = to_complex64(v);
    if r.norm() > COEFF_FLOOR && r.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateDenominator { what, index })
    }
}

impl Recurrence {
    pub fn askey_wilson(p: &AWParams) -> Result<Self> {
        let (a, b, c, d, q) = (dd(p.a), dd(p.b), dd(p.c), dd(p.d), dd(p.q));
        let abcd = a * b * c * d;
        let mut ra = Vec::with_capacity(p.n);
        let mut rb = Vec::with_capacity(p.n);
        let mut rc = Vec::with_capacity(p.n);
        for n in 0..p.n as i64 {
            let qn = pow(q, n);
            let den_a = nonzero(
                a * (one() - abcd * pow(q, 2 * n - 1)) * (one() - abcd * pow(q, 2 * n)),
                "recurrence denominator",
                n as usize,
            )?;
            let an =
                (one() - a * b * qn) * (one() - a * c * qn) * (one() - a * d * qn) * (one() - abcd * pow(q, n - 1))
                    / den_a;
            let cn = if n == 0 {
                dd(ZERO)
            } else {
                let den_c = nonzero(
                    (one() - abcd * pow(q, 2 * n - 2)) * (one() - abcd * pow(q, 2 * n - 1)),
                    "recurrence denominator",
                    n as usize,
                )?;
                let qm = pow(q, n - 1);
                a * (one() - qn) * (one() - b * c * qm) * (one() - b * d * qm) * (one() - c * d * qm) / den_c
            };
            ra.push(nonzero(an, "recurrence coefficient A_n", n as usize)?);
            rb.push(a + one() / a - an - cn);
            rc.push(cn);
        }
        let mut normalization = one();
        for k in 0..p.n as i64 {
            let qk = pow(q, k);
            normalization = normalization * (one() - a * b * qk) * (one() - a * c * qk) * (one() - a * d * qk) / a;
        }
        let ext = Coefficients { slope: dd(2.0 * ONE), offset: dd(ZERO), a: ra, b: rb, c: rc, normalization };
        Ok(Recurrence { f64s: ext.rounded(), ext })
    }

    pub fn q_racah(p: &RacahParams) -> Result<Self> {
        let (al, be, ga, de, q) = (dd(p.alpha), dd(p.beta), dd(p.gamma), dd(p.delta), dd(p.q));
        let ab = al * be;
        let mut ra = Vec::with_capacity(p.n);
        let mut rb = Vec::with_capacity(p.n);
        let mut rc = Vec::with_capacity(p.n);
        for n in 0..p.n as i64 {
            let qn = pow(q, n);
            let qn1 = qn * q;
            let den_a = nonzero(
                (one() - ab * pow(q, 2 * n + 1)) * (one() - ab * pow(q, 2 * n + 2)),
                "recurrence denominator",
                n as usize,
            )?;
            let an = (one() - al * qn1) * (one() - ab * qn1) * (one() - be * de * qn1) * (one() - ga * qn1) / den_a;
            let cn = if n == 0 {
                dd(ZERO)
            } else {
                let den_c = nonzero(
                    (one() - ab * pow(q, 2 * n)) * (one() - ab * pow(q, 2 * n + 1)),
                    "recurrence denominator",
                    n as usize,
                )?;
                q * (one() - qn) * (one() - be * qn) * (ga - ab * qn) * (de - al * qn) / den_c
            };
            ra.push(nonzero(an, "recurrence coefficient A_n", n as usize)?);
            rb.push(-an - cn);
            rc.push(cn);
        }
        let ext =
            Coefficients { slope: one(), offset: -(one() + ga * de * q), a: ra, b: rb, c: rc, normalization: one() };
        Ok(Recurrence { f64s: ext.rounded(), ext })
    }

    pub fn for_params(params: &Params) -> Result<Self> {
        match params {
            Params::AskeyWilson(p) => Self::askey_wilson(p),
            Params::QRacah(p) => Self::q_racah(p),
        }
    }

    pub fn degree(&self) -> usize {
        self.f64s.a.len()
    }

    /// `p_N(t)` and its derivative, by forward recurrence.
    pub fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        let lam = self.f64s.slope * t + self.f64s.offset;
        let (mut p0, mut p1) = (ZERO, ONE);
        let (mut d0, mut d1) = (ZERO, ZERO);
        for n in 0..self.degree() {
            let shift = lam - self.f64s.b[n];
            let p2 = (shift * p1 - self.f64s.c[n] * p0) / self.f64s.a[n];
            let d2 = (self.f64s.slope * p1 + shift * d1 - self.f64s.c[n] * d0) / self.f64s.a[n];
            p0 = p1;
            p1 = p2;
            d0 = d1;
            d1 = d2;
        }
        (self.f64s.normalization * p1, self.f64s.normalization * d1)
    }

    /// `p_N(t)` by forward recurrence in double-double arithmetic.
    pub fn eval_extended(&self, t: ComplexDd) -> ComplexDd {
        self.eval_extended_with_derivative(t).0
    }

    /// `p_N(t)` and `p_N'(t)` in double-double arithmetic.
    pub fn eval_extended_with_derivative(&self, t: ComplexDd) -> (ComplexDd, ComplexDd) {
        let e = &self.ext;
        let lam = e.slope * t + e.offset;
        let (mut p0, mut p1) = (dd(ZERO), one());
        let (mut d0, mut d1) = (dd(ZERO), dd(ZERO));
        for n in 0..self.degree() {
            let shift = lam - e.b[n];
            let p2 = (shift * p1 - e.c[n] * p0) / e.a[n];
            let d2 = (e.slope * p1 + shift * d1 - e.c[n] * d0) / e.a[n];
            p0 = p1;
            p1 = p2;
            d0 = d1;
            d1 = d2;
        }
        (e.normalization * p1, e.normalization * d1)
    }

    /// Newton steps in double-double from an f64 zero, returning the refined
    /// zero unrounded. Points that are not zeros to about f64 accuracy are
    /// returned as given.
    pub fn refine_zero(&self, t: Complex64) -> ComplexDd {
        let scale = t.norm().max(1.0);
        let mut x = dd(t);
        for _ in 0..REFINE_STEPS {
            let (v, d) = self.eval_extended_with_derivative(x);
            let step = to_complex64(v / d);
            if !step.is_finite() {
                return dd(t);
            }
            x = x - dd(step);
            if step.norm() <= 1e-30 * scale {
                break;
            }
        }
        if (to_complex64(x) - t).norm() > REFINE_LIMIT * scale {
            return dd(t);
        }
        x
    }

    /// Bound on the size of the quantities combined by [`Self::eval`], a
    /// scale for its rounding error.
    pub fn magnitude(&self, t: Complex64) -> f64 {
        let lam = (self.f64s.slope * t).norm() + self.f64s.offset.norm();
        let (mut p0, mut p1) = (0.0, 1.0);
        for n in 0..self.degree() {
            let p2 = ((lam + self.f64s.b[n].norm()) * p1 + self.f64s.c[n].norm() * p0) / self.f64s.a[n].norm();
            p0 = p1;
            p1 = p2;
        }
        self.f64s.normalization.norm() * p1
    }

    /// Tridiagonal matrix whose eigenvalues are `lambda` at the zeros of `p_N`.
    pub fn tridiagonal(&self) -> CMatrix {
        let n = self.degree();
        CMatrix::from_fn(n, |i, j| {
            if i == j {
                self.f64s.b[i]
            } else if j == i + 1 {
                self.f64s.a[i]
            } else if i == j + 1 {
                self.f64s.c[i]
            } else {
                ZERO
            }
        })
    }

    /// Map an eigenvalue of [`Self::tridiagonal`] back to `t`.
    pub fn lambda_to_t(&self, lam: Complex64) -> Complex64 {
        (lam - self.f64s.offset) / self.f64s.slope
    }
}

/// Best available evaluator of `p_N`: the recurrence when its coefficients
/// are regular, otherwise the monomial expansion computed in extended
/// precision.
#[derive(Debug, Clone)]
pub enum PolyEvaluator {
    Recurrence(Box<Recurrence>),
    Monomial(MonomialPoly),
}

impl PolyEvaluator {
    pub fn new(params: &Params) -> Result<Self> {
        match Recurrence::for_params(params) {
            Ok(r) => Ok(PolyEvaluator::Recurrence(Box::new(r))),
            Err(_) => Ok(PolyEvaluator::Monomial(ExtendedPoly::new(params).rounded()?)),
        }
    }

    pub fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        match self {
            PolyEvaluator::Recurrence(r) => r.eval(t),
            PolyEvaluator::Monomial(m) => m.eval(t),
        }
    }

    pub fn magnitude(&self, t: Complex64) -> f64 {
        match self {
            PolyEvaluator::Recurrence(r) => r.magnitude(t),
            PolyEvaluator::Monomial(m) => m.magnitude(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyform::NestedSeries;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn degree_one_anchors() {
        let aw = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let r = Recurrence::askey_wilson(&aw).unwrap();
        assert!(r.eval(c(10.0 / 17.0)).0.norm() < 1e-12);
        assert!((r.eval(c(0.0)).0 - c(140.0)).norm() < 1e-11);
        let rc = RacahParams::real(3.0, 2.0, 4.0, 5.0, 0.5, 1).unwrap();
        let r = Recurrence::q_racah(&rc).unwrap();
        assert!((r.eval(c(3.0)).0 - c(-1.0)).norm() < 1e-14);
        assert!((r.lambda_to_t(r.tridiagonal()[(0, 0)]) - c(7.0)).norm() < 1e-13);
    }

    #[test]
    fn refine_zero_moves_only_nearby_points() {
        // the N = 1 zero sits at 10/17
        let aw = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let r = Recurrence::askey_wilson(&aw).unwrap();
        let exact = c(10.0 / 17.0);
        let near = to_complex64(r.refine_zero(exact + c(1e-9)));
        assert!((near - exact).norm() < 1e-15);
        let far = exact + c(1e-3);
        assert_eq!(to_complex64(r.refine_zero(far)), far);
    }

    #[test]
    fn recurrence_matches_series() {
        let aw = AWParams::new(
            Complex64::new(0.7, 0.3),
            Complex64::new(-1.1, 0.5),
            Complex64::new(1.9, -0.2),
            Complex64::new(0.4, 1.2),
            c(0.6),
            5,
        )
        .unwrap();
        let rc = RacahParams::new(
            Complex64::new(0.8, -0.3),
            Complex64::new(1.5, 0.4),
            Complex64::new(-0.6, 0.9),
            Complex64::new(1.1, 0.2),
            Complex64::new(0.5, 0.2),
            4,
        )
        .unwrap();
        let cases = [
            (Recurrence::askey_wilson(&aw).unwrap(), NestedSeries::askey_wilson(&aw)),
            (Recurrence::q_racah(&rc).unwrap(), NestedSeries::q_racah(&rc)),
        ];
        for (r, s) in &cases {
            for t in [Complex64::new(0.3, -0.2), Complex64::new(-1.4, 0.8), c(2.2)] {
                let (v1, d1) = r.eval(t);
                let (v2, d2) = s.eval(t);
                assert!((v1 - v2).norm() < 1e-10 * v2.norm().max(1.0), "{v1} vs {v2}");
                assert!((d1 - d2).norm() < 1e-10 * d2.norm().max(1.0), "{d1} vs {d2}");
            }
        }
    }
}
