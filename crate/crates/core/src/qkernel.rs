//! q-series primitives: q-Pochhammer symbols, the modified q-Pochhammer
//! product used by the Askey-Wilson polynomials, and terminating 4φ3 sums.
//!
//! Everything here is plain double-precision complex arithmetic. Products are
//! accumulated factor by factor (never through logarithms) so that a vanishing
//! factor yields an exact zero.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Successive powers `q^0, q^1, ..., q^len-1` by repeated multiplication.
pub fn q_powers(q: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = ONE;
    for _ in 0..len {
        out.push(acc);
        acc *= q;
    }
    out
}

/// Integer power by repeated squaring; negative exponents invert the base.
pub fn qpow(q: Complex64, k: i64) -> Complex64 {
    let mut base = if k < 0 { q.inv() } else { q };
    let mut e = k.unsigned_abs();
    let mut acc = ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// The q-Pochhammer symbol `(c;q)_n = (1-c)(1-cq)...(1-cq^{n-1})`.
pub fn qpochhammer(c: Complex64, q: Complex64, n: usize) -> Complex64 {
    let mut acc = ONE;
    let mut cq = c;
    for _ in 0..n {
        acc *= ONE - cq;
        cq *= q;
    }
    acc
}

/// All partial products `(c;q)_0, ..., (c;q)_n`.
pub fn qpochhammer_table(c: Complex64, q: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ONE;
    let mut cq = c;
    out.push(acc);
    for _ in 0..n {
        acc *= ONE - cq;
        cq *= q;
        out.push(acc);
    }
    out
}

/// Product of several q-Pochhammer symbols sharing `q` and `n`.
pub fn qpochhammer_multi(cs: &[Complex64], q: Complex64, n: usize) -> Complex64 {
    cs.iter().map(|&c| qpochhammer(c, q, n)).product()
}

/// `{a;q;x}_m = prod_{s<m} (1 + a^2 q^{2s} - 2 a q^s x)`, a degree-m polynomial in `x`.
pub fn modified_qpochhammer(a: Complex64, q: Complex64, x: Complex64, m: usize) -> Complex64 {
    let mut acc = ONE;
    let mut aqs = a;
    for _ in 0..m {
        acc *= ONE + aqs * aqs - 2.0 * aqs * x;
        aqs *= q;
    }
    acc
}

/// x-derivative of [`modified_qpochhammer`], by the product rule.
pub fn modified_qpochhammer_derivative(a: Complex64, q: Complex64, x: Complex64, m: usize) -> Complex64 {
    // Running (value, derivative) of the partial product.
    let mut val = ONE;
    let mut der = ZERO;
    let mut aqs = a;
    for _ in 0..m {
        let f = ONE + aqs * aqs - 2.0 * aqs * x;
        let df = -2.0 * aqs;
        der = der * f + val * df;
        val *= f;
        aqs *= q;
    }
    der
}

/// Terminating `4φ3(q^{-N}, n1, n2, n3; d1, d2, d3 | q; arg)`.
///
/// `num[0]` is expected to be `q^{-N}`; the sum is cut at `k = N` regardless,
/// which is exact because `(q^{-N};q)_k` vanishes beyond that point.
pub fn phi43_terminating(
    num: [Complex64; 4],
    den: [Complex64; 3],
    q: Complex64,
    arg: Complex64,
    n: usize,
) -> Result<Complex64> {
    let mut sum = ONE;
    let mut term = ONE;
    let mut qk = ONE;
    for k in 0..n {
        let mut ratio = arg;
        for &a in &num {
            ratio *= ONE - a * qk;
        }
        let mut denom = ONE - q * qk;
        for &b in &den {
            let f = ONE - b * qk;
            if f == ZERO {
                return Err(Error::DegenerateDenominator { what: "4phi3 lower parameter", index: k + 1 });
            }
            denom *= f;
        }
        if denom == ZERO {
            return Err(Error::DegenerateDenominator { what: "(q;q)_k in 4phi3", index: k + 1 });
        }
        term *= ratio / denom;
        sum += term;
        qk *= q;
    }
    Ok(sum)
}
