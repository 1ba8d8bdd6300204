//! Askey-Wilson and q-Racah polynomials: parameter sets, evaluation with
//! exact derivatives, the rational form in `z`, and monomial expansion.
//!
//! Both families share the shape `sum_m c_m prod_{s<m} (u_s + v_s t)`, which
//! is stored once as a [`NestedSeries`] and evaluated in nested (Horner-like)
//! form. For Askey-Wilson `t = x` and the factors come from `{a;q;x}_s`; for
//! q-Racah `t = z` and the factors are `1 - z q^s + gamma delta q^{2s+1}`.

use num_complex::Complex64;
use num_traits::{Num, Zero};
use serde::Serialize;

use crate::ddouble::{to_complex64, to_complex_dd, ComplexDd};
use crate::error::{Error, Result};
use crate::qkernel::{qpow, ONE, ZERO};
use crate::recurrence::Recurrence;

/// Factors smaller than this in modulus are treated as vanishing when
/// validating parameter admissibility.
const ADMISSIBILITY_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "aw")]
    AskeyWilson,
    #[serde(rename = "racah")]
    QRacah,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::AskeyWilson => write!(f, "aw"),
            Family::QRacah => write!(f, "racah"),
        }
    }
}

fn check_finite(name: &str, v: Complex64) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} is not finite")))
    }
}

fn check_q(q: Complex64) -> Result<()> {
    check_finite("q", q)?;
    if q.norm() < ADMISSIBILITY_FLOOR {
        return Err(Error::InvalidParameters("q must be nonzero".into()));
    }
    if (q - ONE).norm() < ADMISSIBILITY_FLOOR {
        return Err(Error::InvalidParameters("q must differ from 1".into()));
    }
    Ok(())
}

/// Fails when one of `1 - c q^k`, `k < n`, vanishes.
fn check_pochhammer_nonzero(what: &'static str, c: Complex64, q: Complex64, n: usize) -> Result<()> {
    let mut cq = c;
    for k in 0..n {
        if (ONE - cq).norm() < ADMISSIBILITY_FLOOR {
            return Err(Error::DegenerateDenominator { what, index: k + 1 });
        }
        cq *= q;
    }
    Ok(())
}

/// Parameters `(a, b, c, d; q)` and degree `n` of an Askey-Wilson polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AWParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub q: Complex64,
    pub n: usize,
}

impl AWParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64, q: Complex64, n: usize) -> Result<Self> {
        let p = AWParams { a, b, c, d, q, n };
        p.validate()?;
        Ok(p)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64, q: f64, n: usize) -> Result<Self> {
        let r = |v| Complex64::new(v, 0.0);
        Self::new(r(a), r(b), r(c), r(d), r(q), n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            check_finite(name, v)?;
        }
        check_q(self.q)?;
        if self.a.norm() < ADMISSIBILITY_FLOOR {
            return Err(Error::InvalidParameters("a must be nonzero".into()));
        }
        let n = self.n;
        check_pochhammer_nonzero("(ab;q)_m", self.a * self.b, self.q, n)?;
        check_pochhammer_nonzero("(ac;q)_m", self.a * self.c, self.q, n)?;
        check_pochhammer_nonzero("(ad;q)_m", self.a * self.d, self.q, n)?;
        check_pochhammer_nonzero("(q;q)_m", self.q, self.q, n)?;
        if n > 0 {
            check_pochhammer_nonzero("(abcd q^{N-1};q)_N", self.abcd() * qpow(self.q, n as i64 - 1), self.q, n)?;
        }
        Ok(())
    }

    pub fn abcd(&self) -> Complex64 {
        self.a * self.b * self.c * self.d
    }

    pub fn with_degree(&self, n: usize) -> Result<Self> {
        Self::new(self.a, self.b, self.c, self.d, self.q, n)
    }

    /// Same `q` and `n`, different `(a, b, c, d)`.
    pub fn with_abcd(&self, a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self::new(a, b, c, d, self.q, self.n)
    }
}

/// Parameters `(alpha, beta, gamma, delta; q)` and degree `n` of a q-Racah polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RacahParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub q: Complex64,
    pub n: usize,
}

impl RacahParams {
    pub fn new(
        alpha: Complex64,
        beta: Complex64,
        gamma: Complex64,
        delta: Complex64,
        q: Complex64,
        n: usize,
    ) -> Result<Self> {
        let p = RacahParams { alpha, beta, gamma, delta, q, n };
        p.validate()?;
        Ok(p)
    }

    pub fn real(alpha: f64, beta: f64, gamma: f64, delta: f64, q: f64, n: usize) -> Result<Self> {
        let r = |v| Complex64::new(v, 0.0);
        Self::new(r(alpha), r(beta), r(gamma), r(delta), r(q), n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)] {
            check_finite(name, v)?;
        }
        check_q(self.q)?;
        let (q, n) = (self.q, self.n);
        check_pochhammer_nonzero("(alpha q;q)_m", self.alpha * q, q, n)?;
        check_pochhammer_nonzero("(beta delta q;q)_m", self.beta * self.delta * q, q, n)?;
        check_pochhammer_nonzero("(gamma q;q)_m", self.gamma * q, q, n)?;
        check_pochhammer_nonzero("(q;q)_m", q, q, n)?;
        if n > 0 {
            check_pochhammer_nonzero("(alpha beta q^{N+1};q)_N", self.alpha_beta() * qpow(q, n as i64 + 1), q, n)?;
        }
        Ok(())
    }

    pub fn alpha_beta(&self) -> Complex64 {
        self.alpha * self.beta
    }

    pub fn gamma_delta(&self) -> Complex64 {
        self.gamma * self.delta
    }

    pub fn with_degree(&self, n: usize) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma, self.delta, self.q, n)
    }

    pub fn with_greek(&self, alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self> {
        Self::new(alpha, beta, gamma, delta, self.q, self.n)
    }
}

/// Either family's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    AskeyWilson(AWParams),
    QRacah(RacahParams),
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::AskeyWilson(_) => Family::AskeyWilson,
            Params::QRacah(_) => Family::QRacah,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Params::AskeyWilson(p) => p.n,
            Params::QRacah(p) => p.n,
        }
    }

    pub fn q(&self) -> Complex64 {
        match self {
            Params::AskeyWilson(p) => p.q,
            Params::QRacah(p) => p.q,
        }
    }

    pub fn series(&self) -> NestedSeries {
        match self {
            Params::AskeyWilson(p) => NestedSeries::askey_wilson(p),
            Params::QRacah(p) => NestedSeries::q_racah(p),
        }
    }
}

/// Dense coefficients in the monomial basis; `coeffs[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    coeffs: Vec<Complex64>,
}

impl MonomialPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::InvalidParameters("empty coefficient list".into())),
            Some(c) if *c == ZERO && coeffs.len() > 1 => {
                Err(Error::InvalidParameters("leading coefficient vanishes".into()))
            }
            _ => Ok(MonomialPoly { coeffs }),
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("nonempty")
    }

    /// Horner evaluation of value and derivative.
    pub fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut val = ZERO;
        let mut der = ZERO;
        for &c in self.coeffs.iter().rev() {
            der = der * t + val;
            val = val * t + c;
        }
        (val, der)
    }

    /// `sum_k |c_k| |t|^k`, the scale of rounding errors in [`Self::eval`].
    pub fn magnitude(&self, t: Complex64) -> f64 {
        let r = t.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        let (s_re, c_re) = two_sum(self.sum.re, v.re);
        let (s_im, c_im) = two_sum(self.sum.im, v.im);
        self.sum = Complex64::new(s_re, s_im);
        self.comp += Complex64::new(c_re, c_im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// `sum_{m=0}^{N} coeffs[m] * prod_{s<m} (factors[s].0 + factors[s].1 * t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedSeries {
    coeffs: Vec<Complex64>,
    factors: Vec<(Complex64, Complex64)>,
}

impl NestedSeries {
    pub fn askey_wilson(p: &AWParams) -> Self {
        let (coeffs, factors) = aw_parts(p.a, p.b, p.c, p.d, p.q, p.n);
        NestedSeries { coeffs, factors }
    }

    pub fn q_racah(p: &RacahParams) -> Self {
        let (coeffs, factors) = racah_parts(p.alpha, p.beta, p.gamma, p.delta, p.q, p.n);
        NestedSeries { coeffs, factors }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    /// Value and exact derivative, nested from the innermost term outward.
    pub fn eval(&self, t: Complex64) -> (Complex64, Complex64) {
        let n = self.factors.len();
        let mut val = self.coeffs[n];
        let mut der = ZERO;
        for m in (0..n).rev() {
            let (u, v) = self.factors[m];
            let f = u + v * t;
            der = v * val + f * der;
            val = self.coeffs[m] + f * val;
        }
        (val, der)
    }

    /// Sum of the moduli of the individual terms at `t`, a scale for residuals.
    pub fn term_magnitude(&self, t: Complex64) -> f64 {
        let mut prod = ONE;
        let mut total = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            total += (c * prod).norm();
            if m < self.factors.len() {
                let (u, v) = self.factors[m];
                prod *= u + v * t;
            }
        }
        total
    }

    /// Expansion into the monomial basis by multiplying in one linear factor
    /// at a time, with compensated accumulation of each coefficient.
    pub fn monomial(&self) -> Result<MonomialPoly> {
        let n = self.factors.len();
        let mut acc = vec![CompensatedSum::default(); n + 1];
        let mut running = vec![ONE];
        for m in 0..=n {
            let cm = self.coeffs[m];
            for (k, r) in running.iter().enumerate() {
                acc[k].add(cm * r);
            }
            if m < n {
                let (u, v) = self.factors[m];
                let mut next = vec![ZERO; running.len() + 1];
                for (k, r) in running.iter().enumerate() {
                    next[k] += u * r;
                    next[k + 1] += v * r;
                }
                running = next;
            }
        }
        MonomialPoly::new(acc.iter().map(CompensatedSum::value).collect())
    }
}

/// `q^k` for any integer `k` in a field.
fn field_pow<T: Clone + Num>(q: &T, k: i64) -> T {
    let base = if k < 0 { T::one() / q.clone() } else { q.clone() };
    let mut out = T::one();
    for _ in 0..k.unsigned_abs() {
        out = out * base.clone();
    }
    out
}

/// `[(c;q)_0, ..., (c;q)_n]` in a field.
fn field_pochhammer_table<T: Clone + Num>(c: &T, q: &T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::one();
    let mut cq = c.clone();
    out.push(acc.clone());
    for _ in 0..n {
        acc = acc * (T::one() - cq.clone());
        out.push(acc.clone());
        cq = cq * q.clone();
    }
    out
}

type Parts<T> = (Vec<T>, Vec<(T, T)>);

/// Coefficients and linear factors of the Askey-Wilson series, including the
/// normalization `(ab, ac, ad; q)_N a^{-N}`.
fn aw_parts<T: Clone + Num>(a: T, b: T, c: T, d: T, q: T, n: usize) -> Parts<T> {
    let two = T::one() + T::one();
    let abcd = a.clone() * b.clone() * c.clone() * d.clone();
    let upper1 = field_pochhammer_table(&field_pow(&q, -(n as i64)), &q, n);
    let upper2 = field_pochhammer_table(&(abcd * field_pow(&q, n as i64 - 1)), &q, n);
    let qq = field_pochhammer_table(&q, &q, n);
    let ab = field_pochhammer_table(&(a.clone() * b), &q, n);
    let ac = field_pochhammer_table(&(a.clone() * c), &q, n);
    let ad = field_pochhammer_table(&(a.clone() * d), &q, n);
    let prefactor = ab[n].clone() * ac[n].clone() * ad[n].clone() / field_pow(&a, n as i64);

    let mut coeffs = Vec::with_capacity(n + 1);
    let mut qm = T::one();
    for m in 0..=n {
        let den = qq[m].clone() * ab[m].clone() * ac[m].clone() * ad[m].clone();
        coeffs.push(prefactor.clone() * qm.clone() * upper1[m].clone() * upper2[m].clone() / den);
        qm = qm * q.clone();
    }
    let mut factors = Vec::with_capacity(n);
    let mut aqs = a;
    for _ in 0..n {
        factors.push((T::one() + aqs.clone() * aqs.clone(), T::zero() - two.clone() * aqs.clone()));
        aqs = aqs * q.clone();
    }
    (coeffs, factors)
}

/// Coefficients and linear factors of the q-Racah series.
fn racah_parts<T: Clone + Num>(alpha: T, beta: T, gamma: T, delta: T, q: T, n: usize) -> Parts<T> {
    let upper1 = field_pochhammer_table(&field_pow(&q, -(n as i64)), &q, n);
    let upper2 = field_pochhammer_table(&(alpha.clone() * beta.clone() * field_pow(&q, n as i64 + 1)), &q, n);
    let qq = field_pochhammer_table(&q, &q, n);
    let l1 = field_pochhammer_table(&(alpha * q.clone()), &q, n);
    let l2 = field_pochhammer_table(&(beta * delta.clone() * q.clone()), &q, n);
    let l3 = field_pochhammer_table(&(gamma.clone() * q.clone()), &q, n);

    let mut coeffs = Vec::with_capacity(n + 1);
    let mut qm = T::one();
    for m in 0..=n {
        let den = qq[m].clone() * l1[m].clone() * l2[m].clone() * l3[m].clone();
        coeffs.push(qm.clone() * upper1[m].clone() * upper2[m].clone() / den);
        qm = qm * q.clone();
    }
    let gd = gamma * delta;
    let mut factors = Vec::with_capacity(n);
    let mut qs = T::one();
    for _ in 0..n {
        factors.push((T::one() + gd.clone() * qs.clone() * qs.clone() * q.clone(), T::zero() - qs.clone()));
        qs = qs * q.clone();
    }
    (coeffs, factors)
}

/// `sum_m c_m prod_{s<m} (u_s + v_s t)` expanded into monomial coefficients.
fn expand_parts<T: Clone + Num>(coeffs: &[T], factors: &[(T, T)]) -> Vec<T> {
    let n = factors.len();
    let mut acc = vec![T::zero(); n + 1];
    let mut running = vec![T::one()];
    for m in 0..=n {
        for (k, r) in running.iter().enumerate() {
            acc[k] = acc[k].clone() + coeffs[m].clone() * r.clone();
        }
        if m < n {
            let (u, v) = &factors[m];
            let mut next = vec![T::zero(); running.len() + 1];
            for (k, r) in running.iter().enumerate() {
                next[k] = next[k].clone() + u.clone() * r.clone();
                next[k + 1] = next[k + 1].clone() + v.clone() * r.clone();
            }
            running = next;
        }
    }
    acc
}

/// Monomial coefficients computed in double-double arithmetic and rounded
/// once to double precision.
///
/// The nested series can cancel heavily (its terms may exceed the polynomial
/// by many orders of magnitude), so expanding it in plain floating point
/// loses digits that the extended computation keeps.
pub fn extended_monomial(params: &Params) -> Result<MonomialPoly> {
    ExtendedPoly::new(params).rounded()
}

/// Monomial coefficients held in double-double precision.
#[derive(Debug, Clone)]
pub struct ExtendedPoly {
    coeffs: Vec<ComplexDd>,
}

impl ExtendedPoly {
    pub fn new(params: &Params) -> Self {
        let e = to_complex_dd;
        let (coeffs, factors) = match params {
            Params::AskeyWilson(p) => aw_parts(e(p.a), e(p.b), e(p.c), e(p.d), e(p.q), p.n),
            Params::QRacah(p) => racah_parts(e(p.alpha), e(p.beta), e(p.gamma), e(p.delta), e(p.q), p.n),
        };
        ExtendedPoly { coeffs: expand_parts(&coeffs, &factors) }
    }

    /// Coefficients rounded once to double precision.
    pub fn rounded(&self) -> Result<MonomialPoly> {
        MonomialPoly::new(self.coeffs.iter().map(|&c| to_complex64(c)).collect())
    }

    /// Value and derivative in extended precision at the binary value of `t`.
    pub fn eval(&self, t: Complex64) -> (ComplexDd, ComplexDd) {
        let x = to_complex_dd(t);
        let mut val = ComplexDd::zero();
        let mut der = ComplexDd::zero();
        for &c in self.coeffs.iter().rev() {
            der = der * x + val;
            val = val * x + c;
        }
        (val, der)
    }

    /// One Newton step `t - p(t)/p'(t)` with the correction computed in
    /// extended precision. Returns `t` if the correction is not finite.
    pub fn newton_step(&self, t: Complex64) -> Complex64 {
        let (v, d) = self.eval(t);
        let step = to_complex64(v / d);
        if step.is_finite() {
            t - step
        } else {
            t
        }
    }
}

/// `z = x + sqrt(x^2 - 1)` on the principal branch.
pub fn x_to_z(x: Complex64) -> Complex64 {
    x + (x * x - ONE).sqrt()
}

/// `x = (z^2 + 1) / (2z)`.
pub fn z_to_x(z: Complex64) -> Result<Complex64> {
    if z == ZERO {
        return Err(Error::ZeroArgument);
    }
    Ok((z * z + ONE) / (2.0 * z))
}

/// `p_N(x)` and its derivative. The three-term recurrence is used when its
/// coefficients are regular, since the series itself cancels badly for
/// small `q`.
pub fn aw_eval(p: &AWParams, x: Complex64) -> (Complex64, Complex64) {
    match Recurrence::askey_wilson(p) {
        Ok(r) => r.eval(x),
        Err(_) => NestedSeries::askey_wilson(p).eval(x),
    }
}

/// The rational form `P_N(z) = p_N((z^2+1)/(2z))`.
pub fn aw_rational_eval(p: &AWParams, z: Complex64) -> Result<Complex64> {
    Ok(aw_eval(p, z_to_x(z)?).0)
}

/// `R_N(z)` and its derivative, evaluated like [`aw_eval`].
pub fn racah_eval(p: &RacahParams, z: Complex64) -> (Complex64, Complex64) {
    match Recurrence::q_racah(p) {
        Ok(r) => r.eval(z),
        Err(_) => NestedSeries::q_racah(p).eval(z),
    }
}

pub fn monomial_coefficients(params: &Params) -> Result<MonomialPoly> {
    extended_monomial(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::phi43_terminating;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn aw_anchor() -> AWParams {
        AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap()
    }

    fn racah_anchor() -> RacahParams {
        RacahParams::real(3.0, 2.0, 4.0, 5.0, 0.5, 1).unwrap()
    }

    #[test]
    fn aw_degree_zero_is_one() {
        let p = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 0).unwrap();
        let (v, d) = aw_eval(&p, Complex64::new(0.3, 0.8));
        assert_eq!(v, ONE);
        assert_eq!(d, ZERO);
    }

    #[test]
    fn aw_degree_one_closed_form() {
        // p_1(x) = 140 - 238 x for (2,3,4,5; 1/2)
        let p = aw_anchor();
        let (v, d) = aw_eval(&p, ZERO);
        assert!((v - c(140.0)).norm() < 1e-12);
        assert!((d - c(-238.0)).norm() < 1e-12);
        let (v, _) = aw_eval(&p, c(10.0 / 17.0));
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn aw_rational_form_zero_and_unit() {
        let p = aw_anchor();
        let z = Complex64::new(10.0, 189f64.sqrt()) / 17.0;
        assert!(aw_rational_eval(&p, z).unwrap().norm() < 1e-12);
        let v = aw_rational_eval(&p, ONE).unwrap();
        assert!((v - aw_eval(&p, ONE).0).norm() < 1e-12);
        assert_eq!(aw_rational_eval(&p, ZERO), Err(Error::ZeroArgument));
    }

    #[test]
    fn change_of_variables() {
        assert!((x_to_z(ONE) - ONE).norm() < 1e-15);
        assert!(z_to_x(Complex64::i()).unwrap().norm() < 1e-15);
        let x = Complex64::new(0.3, -1.7);
        let z = x_to_z(x);
        assert!((z * (x - (x * x - ONE).sqrt()) - ONE).norm() < 1e-13);
        assert!((z_to_x(z).unwrap() - x).norm() < 1e-13);
    }

    #[test]
    fn racah_closed_forms() {
        let p = RacahParams::real(3.0, 2.0, 4.0, 5.0, 0.5, 0).unwrap();
        assert_eq!(racah_eval(&p, c(2.2)).0, ONE);
        // R_1(z) = (z - 7) / 4
        let p = racah_anchor();
        let (v, d) = racah_eval(&p, c(7.0));
        assert!(v.norm() < 1e-13);
        assert!((d - c(0.25)).norm() < 1e-13);
    }

    #[test]
    fn racah_is_one_at_first_lattice_point() {
        let q = Complex64::new(0.6, 0.1);
        let p = RacahParams::new(c(1.3), Complex64::new(0.4, 0.9), c(2.1), c(-0.7), q, 5).unwrap();
        let z = ONE + p.gamma_delta() * q;
        assert!((racah_eval(&p, z).0 - ONE).norm() < 1e-12);
    }

    #[test]
    fn racah_matches_hypergeometric_form() {
        let q = Complex64::new(0.55, 0.15);
        let p = RacahParams::new(
            Complex64::new(1.3, 0.2),
            Complex64::new(0.4, 0.9),
            Complex64::new(2.1, -0.3),
            Complex64::new(-0.7, 0.5),
            q,
            6,
        )
        .unwrap();
        let ln_q = q.ln();
        for x in [Complex64::new(0.37, 0.21), Complex64::new(-1.3, 0.6), Complex64::new(2.4, -0.8)] {
            let q_mx = (-x * ln_q).exp();
            let q_x1 = p.gamma_delta() * q * (x * ln_q).exp();
            let z = q_mx + q_x1;
            let hyper = phi43_terminating(
                [qpow(q, -6), p.alpha_beta() * qpow(q, 7), q_mx, q_x1],
                [p.alpha * q, p.beta * p.delta * q, p.gamma * q],
                q,
                q,
                6,
            )
            .unwrap();
            let direct = racah_eval(&p, z).0;
            assert!((hyper - direct).norm() <= 1e-9 * hyper.norm().max(1.0));
        }
    }

    #[test]
    fn monomial_degree_one_anchors() {
        let m = monomial_coefficients(&Params::AskeyWilson(aw_anchor())).unwrap();
        assert_eq!(m.degree(), 1);
        assert!((m.coeffs()[0] - c(140.0)).norm() < 1e-12);
        assert!((m.coeffs()[1] - c(-238.0)).norm() < 1e-12);
        let m = monomial_coefficients(&Params::QRacah(racah_anchor())).unwrap();
        assert!((m.coeffs()[0] - c(-1.75)).norm() < 1e-13);
        assert!((m.coeffs()[1] - c(0.25)).norm() < 1e-13);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(AWParams::real(2.0, 3.0, 4.0, 5.0, 1.0, 2).is_err());
        assert!(AWParams::real(2.0, 3.0, 4.0, 5.0, 0.0, 2).is_err());
        // ab = 1 kills (ab;q)_1
        assert!(matches!(AWParams::real(2.0, 0.5, 4.0, 5.0, 0.5, 2), Err(Error::DegenerateDenominator { .. })));
        // alpha q = 1
        assert!(RacahParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).is_err());
        assert!(AWParams::new(Complex64::new(f64::NAN, 0.0), ONE, ONE, ONE, c(0.5), 1).is_err());
    }
}
