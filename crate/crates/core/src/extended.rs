//! Double-double evaluations of the structure functions, velocities and
//! zero equations, for quantities formed as small differences of large
//! terms. Inputs are f64; square roots are taken in f64 and refined by
//! Newton steps on the same branch.

use num_complex::Complex64;

use crate::ddouble::{to_complex64, to_complex_dd, ComplexDd, Dd};
use crate::error::Result;
use crate::polyform::{x_to_z, AWParams, RacahParams};
use crate::racahspec::{point_structure, Branch};
use crate::recurrence::Recurrence;

fn c(z: Complex64) -> ComplexDd {
    to_complex_dd(z)
}

fn one() -> ComplexDd {
    c(Complex64::new(1.0, 0.0))
}

fn scaled(z: ComplexDd, k: f64) -> ComplexDd {
    z * Dd::from(k)
}

fn sum_exact(a: Complex64, b: Complex64) -> ComplexDd {
    c(a) + c(b)
}

/// Root of `z^2 - 2xz + 1` near `z0`.
fn refine_z(x: ComplexDd, z0: Complex64) -> ComplexDd {
    let mut z = c(z0);
    for _ in 0..2 {
        let f = z * z - scaled(x * z, 2.0) + one();
        z = z - f / scaled(z - x, 2.0);
    }
    z
}

/// Square root of `w` near `s0`.
fn refine_sqrt(w: ComplexDd, s0: Complex64) -> ComplexDd {
    let mut s = c(s0);
    for _ in 0..2 {
        s = scaled(s + w / s, 0.5);
    }
    s
}

fn pow(q: ComplexDd, k: usize) -> ComplexDd {
    (0..k).fold(one(), |acc, _| acc * q)
}

fn aw_a(p: &AWParams, q: ComplexDd, z: ComplexDd) -> ComplexDd {
    let num = [p.a, p.b, p.c, p.d].iter().fold(one(), |acc, &u| acc * (one() - c(u) * z));
    let z2 = z * z;
    num / ((one() - z2) * (one() - q * z2))
}

fn aw_g(p: &AWParams, q: ComplexDd, z: ComplexDd) -> ComplexDd {
    aw_a(p, q, z) * (q * z - one() / z)
}

fn aw_k(q: ComplexDd, zn: ComplexDd, zm: ComplexDd) -> ComplexDd {
    (zm - q * zn) * (q * zn * zm - one()) / ((zm - zn) * (zn * zm - one()))
}

/// Askey-Wilson velocity at `base + offset`, returned unrounded.
pub fn aw_velocity(p: &AWParams, base: &[Complex64], offset: &[Complex64]) -> Vec<ComplexDd> {
    let q = c(p.q);
    let zs: Vec<ComplexDd> = base
        .iter()
        .zip(offset)
        .map(|(&b, &o)| {
            let x = sum_exact(b, o);
            refine_z(x, x_to_z(b + o))
        })
        .collect();
    let inv: Vec<ComplexDd> = zs.iter().map(|&z| one() / z).collect();
    let pref = (q - one()) / scaled(pow(q, p.n), 2.0);
    (0..zs.len())
        .map(|n| {
            let mut up = aw_g(p, q, zs[n]);
            let mut down = aw_g(p, q, inv[n]);
            for l in (0..zs.len()).filter(|&l| l != n) {
                up = up * aw_k(q, zs[n], zs[l]);
                down = down * aw_k(q, inv[n], inv[l]);
            }
            pref * (up + down)
        })
        .collect()
}

/// `scale prod (u + v Z) / prod (1 - w Z^2)`.
fn rational(scale: ComplexDd, num: &[(ComplexDd, ComplexDd)], den: &[ComplexDd], zz: ComplexDd) -> ComplexDd {
    let z2 = zz * zz;
    let top = num.iter().fold(scale, |acc, &(u, v)| acc * (u + v * zz));
    den.iter().fold(top, |acc, &w| acc / (one() - w * z2))
}

/// `z^(+)`, `z^(-)`, `B`, `D` at `z` on the principal branch. The f64
/// evaluation supplies the guards and the seed of the square root.
struct RacahPoint {
    z_plus: ComplexDd,
    z_minus: ComplexDd,
    b: ComplexDd,
    d: ComplexDd,
}

fn racah_point(p: &RacahParams, z: ComplexDd, index: usize) -> Result<RacahPoint> {
    let q = c(p.q);
    let (al, be, ga, de) = (c(p.alpha), c(p.beta), c(p.gamma), c(p.delta));
    let gd = ga * de;
    let gdq = gd * q;
    let k = (one() - q * q) / scaled(q, 2.0);
    let seed = point_structure(p, to_complex64(z), Branch::Principal, index)?;
    let s = refine_sqrt(z * z - scaled(gdq, 4.0), seed.s);
    let zz = (z + s) / scaled(gdq, 2.0);
    let b = rational(
        one(),
        &[(one(), -(al * q)), (one(), -(be * de * q)), (one(), -(ga * q)), (one(), -gdq)],
        &[gdq, gdq * q],
        zz,
    );
    let d = rational(q, &[(one(), -one()), (one(), -de), (be, -ga), (al, -gd)], &[gd, gdq], zz);
    Ok(RacahPoint { z_plus: q * z + k * (z - s), z_minus: z / q - k * (z - s), b, d })
}

/// q-Racah velocity at `base + offset` on the principal branch.
pub fn racah_velocity(p: &RacahParams, base: &[Complex64], offset: &[Complex64]) -> Result<Vec<ComplexDd>> {
    let zs: Vec<ComplexDd> = base.iter().zip(offset).map(|(&b, &o)| sum_exact(b, o)).collect();
    let mut out = Vec::with_capacity(zs.len());
    for i in 0..zs.len() {
        let z = zs[i];
        let pt = racah_point(p, z, i)?;
        let mut up = pt.b * (pt.z_plus - z);
        let mut down = pt.d * (pt.z_minus - z);
        for l in (0..zs.len()).filter(|&l| l != i) {
            up = up * (pt.z_plus - zs[l]) / (z - zs[l]);
            down = down * (pt.z_minus - zs[l]) / (z - zs[l]);
        }
        out.push(up + down);
    }
    Ok(out)
}

/// `|up + down| / (|up| + |down|)` from terms computed in double-double.
fn normalized(up: ComplexDd, down: ComplexDd) -> f64 {
    let sum = to_complex64(up + down).norm();
    sum / (to_complex64(up).norm() + to_complex64(down).norm() + f64::MIN_POSITIVE)
}

/// Normalized residual of `A(z) p_N(x(qz)) + A(1/z) p_N(x(z/q))` at the
/// zero `x` (refined in double-double first), with `z0` the f64 image of
/// `x` on either branch.
pub fn aw_zero_equation(p: &AWParams, rec: &Recurrence, x: Complex64, z0: Complex64) -> f64 {
    let q = c(p.q);
    let x = rec.refine_zero(x);
    let z = refine_z(x, z0);
    let qz2 = scaled(q * z, 2.0);
    let up = aw_a(p, q, z) * rec.eval_extended((q * q * z * z + one()) / qz2);
    let down = aw_a(p, q, one() / z) * rec.eval_extended((z * z + q * q) / qz2);
    normalized(up, down)
}

/// Normalized residual of `B R_N(z^(+)) + D R_N(z^(-))` at the zero `z`,
/// refined in double-double first.
pub fn racah_zero_equation(p: &RacahParams, rec: &Recurrence, z: Complex64, index: usize) -> Result<f64> {
    let pt = racah_point(p, rec.refine_zero(z), index)?;
    Ok(normalized(pt.b * rec.eval_extended(pt.z_plus), pt.d * rec.eval_extended(pt.z_minus)))
}

/// `(Qp_N)(z) / p_N(z)` for the polynomial of `rec`.
pub fn aw_eigen_ratio(p: &AWParams, rec: &Recurrence, z: Complex64) -> Complex64 {
    let q = c(p.q);
    let z = c(z);
    let f = |w: ComplexDd| rec.eval_extended((w * w + one()) / scaled(w, 2.0));
    let (ap, am) = (aw_a(p, q, z), aw_a(p, q, one() / z));
    let fz = f(z);
    to_complex64((ap * (f(q * z) - fz) + am * (f(z / q) - fz)) / fz)
}

/// `(D R_N)(z) / R_N(z)` for the polynomial of `rec`, on the principal branch.
pub fn racah_eigen_ratio(p: &RacahParams, rec: &Recurrence, z: Complex64) -> Result<Complex64> {
    let pt = racah_point(p, c(z), 0)?;
    let fz = rec.eval_extended(c(z));
    Ok(to_complex64((pt.b * (rec.eval_extended(pt.z_plus) - fz) + pt.d * (rec.eval_extended(pt.z_minus) - fz)) / fz))
}
