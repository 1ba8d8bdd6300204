//! Flows on the zeros.
//!
//! Askey-Wilson zeros move under
//!
//! ```text
//! x_n' = (q-1)/(2q^N) [ G(z_n) prod_{l != n} K(z_n, z_l) + G(1/z_n) prod_{l != n} K(1/z_n, 1/z_l) ]
//! ```
//!
//! with `z_n = x_n + sqrt(x_n^2 - 1)`, and q-Racah zeros under
//!
//! ```text
//! z_n' = B(z_n)(z_n^(+) - z_n) prod_{l != n} (z_n^(+) - z_l)/(z_n - z_l)
//!      + D(z_n)(z_n^(-) - z_n) prod_{l != n} (z_n^(-) - z_l)/(z_n - z_l).
//! ```
//!
//! The zeros are equilibria of these flows and the Jacobians there are `M`
//! and `L`. This module provides the right-hand sides, an adaptive RK4
//! integrator, central-difference Jacobians and the linearization check.

use num_complex::Complex64;

use crate::awspec::{self, AWStructureEval};
use crate::ddouble::{to_complex64, ComplexDd};
use crate::error::{Error, Result};
use crate::extended;
use crate::numlin::{CMatrix, SpectralMatrix, ZeroSet};
use crate::polyform::{x_to_z, AWParams, Family, RacahParams};
use crate::qkernel::{qpow, ONE};
use crate::racahspec::{self, point_structure, Branch};
use crate::report::VerificationReport;
use crate::tolerances::{Tolerances, JACOBIAN_ABS_FRACTION};

/// Relative central-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Local error bound per integration step (relative).
pub const STEP_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub family: Family,
    /// `x_n` for Askey-Wilson, `z_n` for q-Racah.
    pub positions: Vec<Complex64>,
    pub time: f64,
}

impl FlowState {
    pub fn at_zeros(zs: &ZeroSet) -> Self {
        FlowState { family: zs.family(), positions: zs.flow_coordinates().to_vec(), time: 0.0 }
    }
}

/// An equilibrium displaced by `epsilon * direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub base: ZeroSet,
    pub epsilon: f64,
    pub direction: Vec<Complex64>,
}

impl PerturbationState {
    pub fn new(base: ZeroSet, epsilon: f64, direction: Vec<Complex64>) -> Result<Self> {
        if direction.len() != base.len() {
            return Err(Error::LengthMismatch { left: direction.len(), right: base.len() });
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameters(format!("epsilon must be finite and nonnegative, got {epsilon}")));
        }
        if base.len() > 1 && epsilon >= 1e-3 * base.min_separation {
            return Err(Error::DegenerateConfiguration(format!(
                "epsilon {epsilon} is not small against the zero separation {}",
                base.min_separation
            )));
        }
        Ok(PerturbationState { base, epsilon, direction })
    }

    pub fn initial_positions(&self) -> Vec<Complex64> {
        self.base.flow_coordinates().iter().zip(&self.direction).map(|(x, d)| x + self.epsilon * d).collect()
    }
}

/// Askey-Wilson velocity in terms of the `z` coordinates, which may be on
/// either square-root determination per coordinate.
pub fn aw_velocity_z(p: &AWParams, zs: &[Complex64]) -> Result<Vec<Complex64>> {
    let s = AWStructureEval::evaluate(p, zs)?;
    let pref = (p.q - ONE) / (2.0 * qpow(p.q, p.n as i64));
    Ok((0..zs.len())
        .map(|n| {
            let kp: Complex64 = (0..zs.len()).filter(|&l| l != n).map(|l| s.k_plus[n][l]).product();
            let km: Complex64 = (0..zs.len()).filter(|&l| l != n).map(|l| s.k_minus[n][l]).product();
            pref * (s.g_plus[n] * kp + s.g_minus[n] * km)
        })
        .collect())
}

/// Askey-Wilson velocity at positions `x_n`.
pub fn aw_velocity(p: &AWParams, xs: &[Complex64]) -> Result<Vec<Complex64>> {
    let zs: Vec<Complex64> = xs.iter().map(|&x| x_to_z(x)).collect();
    aw_velocity_z(p, &zs)
}

/// q-Racah velocity at positions `z_n` on the given square-root branch.
pub fn racah_velocity_on_branch(p: &RacahParams, zs: &[Complex64], branch: Branch) -> Result<Vec<Complex64>> {
    let n = zs.len();
    for i in 0..n {
        for j in 0..i {
            if (zs[i] - zs[j]).norm() <= racahspec::GUARD_EPS {
                return Err(Error::SingularConfiguration { guard: "|z_n - z_l| > eps", index: i });
            }
        }
    }
    (0..n)
        .map(|i| {
            let pt = point_structure(p, zs[i], branch, i)?;
            let mut up = pt.b * (pt.z_plus - zs[i]);
            let mut down = pt.d * (pt.z_minus - zs[i]);
            for l in (0..n).filter(|&l| l != i) {
                up *= (pt.z_plus - zs[l]) / (zs[i] - zs[l]);
                down *= (pt.z_minus - zs[l]) / (zs[i] - zs[l]);
            }
            Ok(up + down)
        })
        .collect()
}

pub fn racah_velocity(p: &RacahParams, zs: &[Complex64]) -> Result<Vec<Complex64>> {
    racah_velocity_on_branch(p, zs, Branch::Principal)
}

/// Step-size control for [`integrate_flow_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Bound on the step-doubling error estimate relative to the state size.
    pub rtol: f64,
    /// Lower bound on the state size used for the relative error.
    pub scale_floor: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: STEP_RTOL, scale_floor: 1.0 }
    }
}

/// Accepted states of an integration, and the reason it stopped early if it did.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub stopped: Option<Error>,
}

impl Trajectory {
    /// Final state, or the error that stopped the integration.
    pub fn endpoint(&self) -> Result<&FlowState> {
        match &self.stopped {
            Some(e) => Err(e.clone()),
            None => Ok(self.states.last().expect("trajectory holds the initial state")),
        }
    }
}

fn axpy(y: &[Complex64], h: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step<F>(rhs: &F, y: &[Complex64], h: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, h / 2.0, &k1))?;
    let k3 = rhs(&axpy(y, h / 2.0, &k2))?;
    let k4 = rhs(&axpy(y, h, &k3))?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Classical RK4 with step doubling and default step control.
pub fn integrate_flow<F>(rhs: F, initial: FlowState, t_end: f64, dt_max: f64) -> Trajectory
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    integrate_flow_with(rhs, initial, t_end, dt_max, StepControl::default())
}

/// Classical RK4 with step doubling. Each accepted step has a local error
/// estimate at most `ctl.rtol * max(|y|, ctl.scale_floor)`; the extrapolated
/// value is kept. A guard failure or a collapsing step size stops the run
/// with [`Error::SingularTrajectory`], keeping the states reached so far.
pub fn integrate_flow_with<F>(rhs: F, initial: FlowState, t_end: f64, dt_max: f64, ctl: StepControl) -> Trajectory
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let t0 = initial.time;
    let family = initial.family;
    let mut states = vec![initial];
    if t_end.is_nan() || t0.is_nan() || t_end <= t0 || dt_max.is_nan() || dt_max <= 0.0 {
        return Trajectory {
            states,
            stopped: Some(Error::InvalidParameters("integration needs t_end > start and dt_max > 0".into())),
        };
    }
    let min_step = 1e-14 * (t_end - t0).max(1.0);
    let mut t = t0;
    let mut y = states[0].positions.clone();
    let mut h = dt_max.min(t_end - t0);
    while t < t_end {
        h = h.min(t_end - t);
        let attempt = rk4_step(&rhs, &y, h).and_then(|full| {
            let half = rk4_step(&rhs, &y, h / 2.0)?;
            let two = rk4_step(&rhs, &half, h / 2.0)?;
            Ok((full, two))
        });
        let (full, two) = match attempt {
            Ok(v) => v,
            Err(e) => {
                if h > 2.0 * min_step {
                    h /= 2.0;
                    continue;
                }
                return Trajectory { states, stopped: Some(singular(t, e.to_string())) };
            }
        };
        let diff: Vec<Complex64> = two.iter().zip(&full).map(|(a, b)| a - b).collect();
        let err = inf_norm(&diff) / 15.0;
        let bound = ctl.rtol * inf_norm(&two).max(ctl.scale_floor);
        if !err.is_finite() {
            return Trajectory { states, stopped: Some(singular(t, "non-finite state".into())) };
        }
        if err <= bound {
            t = if t_end - t - h <= min_step { t_end } else { t + h };
            y = two.iter().zip(&diff).map(|(a, d)| a + d / 15.0).collect();
            states.push(FlowState { family, positions: y.clone(), time: t });
        }
        let factor = if err == 0.0 { 2.0 } else { (0.9 * (bound / err).powf(0.2)).clamp(0.2, 2.0) };
        h = (h * factor).min(dt_max);
        if h < min_step {
            return Trajectory { states, stopped: Some(singular(t, "step size underflow".into())) };
        }
    }
    Trajectory { states, stopped: None }
}

fn singular(time: f64, reason: String) -> Error {
    Error::SingularTrajectory { time, reason }
}

/// Central-difference Jacobian; coordinate `m` is stepped by
/// `h_rel * max(1, |point_m|)` along the real axis.
pub fn fd_jacobian<F>(rhs: F, point: &[Complex64], h_rel: f64) -> Result<CMatrix>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let n = point.len();
    let mut jac = CMatrix::zeros(n);
    let mut work = point.to_vec();
    for m in 0..n {
        let h = h_rel * point[m].norm().max(1.0);
        work[m] = point[m] + h;
        let up = rhs(&work)?;
        work[m] = point[m] - h;
        let down = rhs(&work)?;
        work[m] = point[m];
        for i in 0..n {
            jac[(i, m)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Largest entrywise gap between `fd` and `analytic`, measured in units of
/// `max(|analytic_ij|, (JACOBIAN_ABS_FRACTION / rel_tol) * |analytic|_F)`, so
/// that the result is at most `rel_tol` exactly when every entry agrees within
/// `max(rel_tol relative, JACOBIAN_ABS_FRACTION * |analytic|_F absolute)`.
pub fn jacobian_residual(fd: &CMatrix, analytic: &CMatrix, rel_tol: f64) -> f64 {
    let floor = JACOBIAN_ABS_FRACTION / rel_tol * analytic.norm();
    fd.data()
        .iter()
        .zip(analytic.data())
        .map(|(f, a)| (f - a).norm() / a.norm().max(floor).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Velocity of either family at `positions`.
pub fn velocity(zs: &ZeroSet, positions: &[Complex64]) -> Result<Vec<Complex64>> {
    match &zs.params {
        crate::polyform::Params::AskeyWilson(p) => aw_velocity(p, positions),
        crate::polyform::Params::QRacah(p) => racah_velocity(p, positions),
    }
}

/// Velocity at `base + offset` in extended precision, after the f64
/// evaluation at the same point has passed every guard.
fn velocity_extended(zs: &ZeroSet, base: &[Complex64], offset: &[Complex64]) -> Result<Vec<ComplexDd>> {
    let x: Vec<Complex64> = base.iter().zip(offset).map(|(a, b)| a + b).collect();
    velocity(zs, &x)?;
    match &zs.params {
        crate::polyform::Params::AskeyWilson(p) => Ok(extended::aw_velocity(p, base, offset)),
        crate::polyform::Params::QRacah(p) => extended::racah_velocity(p, base, offset),
    }
}

/// Deviation of the displacement at time `t` from `exp(mat t)` applied to
/// the initial displacement, relative to the prediction.
///
/// The displacement `y = x - xbar` is integrated directly, with right-hand
/// side `F(xbar + y) - F(xbar)` evaluated in double-double, so that the error
/// control is relative to `|y|`, the residual velocity at the numerical
/// equilibrium cancels, and rounding in `F` (whose terms can exceed the
/// difference by many orders) does not swamp the second-order remainder.
pub fn linearization_deviation(pert: &PerturbationState, mat: &CMatrix, t: f64) -> Result<f64> {
    let base = pert.base.flow_coordinates().to_vec();
    let zero = vec![Complex64::new(0.0, 0.0); base.len()];
    let f0 = velocity_extended(&pert.base, &base, &zero)?;
    let y0: Vec<Complex64> = pert.direction.iter().map(|d| pert.epsilon * d).collect();
    let predicted = mat.scale(Complex64::new(t, 0.0)).exp().mat_vec(&y0);
    if pert.epsilon == 0.0 {
        return Ok(0.0);
    }
    let rhs = |y: &[Complex64]| -> Result<Vec<Complex64>> {
        let f = velocity_extended(&pert.base, &base, y)?;
        Ok(f.iter().zip(&f0).map(|(&v, &v0)| to_complex64(v - v0)).collect())
    };
    let init = FlowState { family: pert.base.family(), positions: y0, time: 0.0 };
    let ctl = StepControl { rtol: 1e-12, scale_floor: 0.0 };
    let traj = integrate_flow_with(rhs, init, t, t / 8.0, ctl);
    let end = traj.endpoint()?;
    let gap: f64 = end.positions.iter().zip(&predicted).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let size: f64 = predicted.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(gap / size.max(f64::MIN_POSITIVE))
}

/// Time horizon with `t |mat|_F = 0.5`.
pub fn short_time(mat: &CMatrix) -> f64 {
    0.5 / mat.norm().max(f64::MIN_POSITIVE)
}

/// Deviations below this are rounding noise, and their ratio under halving
/// of the perturbation is meaningless.
pub const HALVING_NOISE_FLOOR: f64 = 1e-9;

/// Linearization checks: deviation at `epsilon` within the linearization
/// tolerance, and the ratio of deviations at `epsilon` and `epsilon / 2`
/// within a factor 2.5 of 2 (reported as `max(r/2, 2/r)` against 2.5).
pub fn linearization_check(
    zs: &ZeroSet,
    mat: &SpectralMatrix,
    epsilon: f64,
    direction: &[Complex64],
    t_short: f64,
    tol: &Tolerances,
) -> VerificationReport {
    let label = format!("{:?}", mat.label);
    let refs = match zs.family() {
        Family::AskeyWilson => awspec::refs::FLOW,
        Family::QRacah => racahspec::refs::FLOW,
    };
    let mut report = VerificationReport::new();
    let name = format!("linearization-{label}");
    let halving = format!("linearization-{label}-halving");
    let run = |eps: f64| {
        PerturbationState::new(zs.clone(), eps, direction.to_vec())
            .and_then(|p| linearization_deviation(&p, &mat.entries, t_short))
    };
    match run(epsilon) {
        Ok(d1) => {
            report.check(name, d1, tol.linearization, &[refs]);
            match run(epsilon / 2.0) {
                Ok(d2) if d1.max(d2) < HALVING_NOISE_FLOOR => {
                    // the flow is linear (always the case for N = 1), so both
                    // deviations are rounding noise and carry no scaling
                    report.check(halving, 1.0, 2.5, &[refs]);
                    report.note(format!(
                        "{label} flow is linear to rounding (deviations {d1:.2e}, {d2:.2e}); halving ratio not measurable"
                    ));
                }
                Ok(d2) => {
                    let r = d1 / d2;
                    let spread = if r.is_finite() && r > 0.0 { (r / 2.0).max(2.0 / r) } else { f64::INFINITY };
                    report.check(halving, spread, 2.5, &[refs]);
                }
                Err(e) => report.failed(halving, 2.5, &[refs], e.to_string()),
            }
        }
        Err(e) => {
            report.failed(name, tol.linearization, &[refs], e.to_string());
            report.failed(halving, 2.5, &[refs], "not run".to_string());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::CMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(pos: Vec<Complex64>) -> FlowState {
        FlowState { family: Family::AskeyWilson, positions: pos, time: 0.0 }
    }

    #[test]
    fn exponential_decay() {
        let traj = integrate_flow(|y: &[Complex64]| Ok(y.iter().map(|v| -v).collect()), scalar(vec![c(1.0)]), 1.0, 0.1);
        let end = traj.endpoint().unwrap();
        assert_eq!(end.time, 1.0);
        assert!((end.positions[0] - c((-1.0f64).exp())).norm() < 1e-8);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let traj = integrate_flow(|y: &[Complex64]| Ok(vec![c(0.0); y.len()]), scalar(vec![c(0.3), c(2.0)]), 2.0, 0.5);
        assert_eq!(traj.endpoint().unwrap().positions, vec![c(0.3), c(2.0)]);
    }

    #[test]
    fn blow_up_stops_integration() {
        // y' = y^2 from 1 blows up at t = 1
        let rhs = |y: &[Complex64]| {
            if y[0].norm() > 1e8 {
                Err(Error::SingularConfiguration { guard: "bounded", index: 0 })
            } else {
                Ok(vec![y[0] * y[0]])
            }
        };
        let traj = integrate_flow(rhs, scalar(vec![c(1.0)]), 2.0, 0.1);
        assert!(matches!(traj.endpoint(), Err(Error::SingularTrajectory { .. })));
        assert!(traj.states.len() > 1);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[-3.0, 0.5]]).unwrap();
        let jac = fd_jacobian(|y: &[Complex64]| Ok(a.mat_vec(y)), &[c(0.2), c(-1.0)], FD_STEP).unwrap();
        for (x, y) in jac.data().iter().zip(a.data()) {
            assert!((x - y).norm() < 1e-9);
        }
        let quad =
            fd_jacobian(|y: &[Complex64]| Ok(y.iter().map(|v| v * v).collect()), &[c(0.0), c(0.0)], 1e-3).unwrap();
        assert!(quad.norm() < 1e-12);
    }

    #[test]
    fn aw_degree_one_velocity() {
        let p = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let xbar = 10.0 / 17.0;
        assert!(aw_velocity(&p, &[c(xbar)]).unwrap()[0].norm() < 1e-10);
        let v = aw_velocity(&p, &[c(xbar + 0.01)]).unwrap()[0];
        assert!((v - c(-1.19)).norm() < 0.05 * 1.19, "{v}");
    }

    #[test]
    fn aw_velocity_is_even_in_each_z() {
        let p = AWParams::new(c(0.7), Complex64::new(1.1, 0.4), c(-0.5), Complex64::new(0.2, -1.3), c(0.6), 3).unwrap();
        let zs = [Complex64::new(1.3, 0.7), Complex64::new(-0.4, 2.2), Complex64::new(0.9, -1.6)];
        let v = aw_velocity_z(&p, &zs).unwrap();
        let mut flipped = zs;
        flipped[1] = flipped[1].inv();
        let w = aw_velocity_z(&p, &flipped).unwrap();
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn racah_degree_one_velocity_and_branch() {
        let p = RacahParams::real(3.0, 2.0, 4.0, 5.0, 0.5, 1).unwrap();
        assert!(racah_velocity(&p, &[c(7.0)]).unwrap()[0].norm() < 1e-10);
        let v = racah_velocity(&p, &[c(7.01)]).unwrap()[0];
        assert!((v - c(-0.005)).norm() < 0.05 * 0.005, "{v}");
        let w = racah_velocity_on_branch(&p, &[c(7.01)], Branch::Flipped).unwrap()[0];
        assert!((v - w).norm() < 1e-9 * v.norm());
    }

    #[test]
    fn scalar_linearization_ratio() {
        let p = AWParams::real(2.0, 3.0, 4.0, 5.0, 0.5, 1).unwrap();
        let zs = ZeroSet::askey_wilson(&p).unwrap();
        let m = crate::awspec::build_matrix_m(&p, &zs).unwrap();
        let pert = PerturbationState::new(zs, 1e-6, vec![c(1.0)]).unwrap();
        let dev = linearization_deviation(&pert, &m.entries, 1e-3).unwrap();
        // exp(-0.119) predicted; nonlinear correction is O(epsilon)
        assert!(dev < 1e-4, "{dev}");
        let zero = PerturbationState { epsilon: 0.0, ..pert };
        assert_eq!(linearization_deviation(&zero, &m.entries, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn extended_velocity_agrees_with_f64() {
        let aw = AWParams::new(
            Complex64::new(0.7, 0.3),
            Complex64::new(-1.1, 0.5),
            Complex64::new(1.9, -0.2),
            Complex64::new(0.4, 1.2),
            c(0.6),
            3,
        )
        .unwrap();
        let racah = RacahParams::new(
            Complex64::new(0.8, -0.3),
            Complex64::new(1.5, 0.4),
            Complex64::new(-0.6, 0.9),
            Complex64::new(1.1, 0.2),
            c(0.5),
            3,
        )
        .unwrap();
        for params in [crate::Params::AskeyWilson(aw), crate::Params::QRacah(racah)] {
            let zs = ZeroSet::compute(&params).unwrap();
            let base = zs.flow_coordinates().to_vec();
            let offset = vec![Complex64::new(0.01, -0.02), Complex64::new(-0.015, 0.005), Complex64::new(0.02, 0.01)];
            let x: Vec<Complex64> = base.iter().zip(&offset).map(|(a, b)| a + b).collect();
            let plain = velocity(&zs, &x).unwrap();
            let ext = velocity_extended(&zs, &base, &offset).unwrap();
            for (a, b) in plain.iter().zip(&ext) {
                assert!((a - to_complex64(*b)).norm() < 1e-12 * a.norm().max(1.0), "{a} vs {b:?}");
            }
        }
    }
}
