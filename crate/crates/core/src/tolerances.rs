//! Named tolerances used by the verification suites.
//!
//! Every threshold a report compares against lives here so that the CLI can
//! override it by name and scale all of them at once.

use serde::Serialize;

/// Normalized residual of the algebraic equations satisfied by the zeros.
pub const IDENTITY: f64 = 1e-8;
/// Relative gap between computed and closed-form spectra.
pub const SPECTRUM: f64 = 1e-6;
/// Entrywise relative agreement between a finite-difference Jacobian and the analytic matrix.
pub const JACOBIAN: f64 = 1e-4;
/// Absolute distance of an eigenvalue from its exact rational value.
pub const DIOPHANTINE: f64 = 1e-8;
/// Relative error of trace and determinant identities.
pub const TRACE_DET: f64 = 1e-6;
/// Relative error of the q-difference eigen-relations.
pub const EIGEN_RELATION: f64 = 1e-9;
/// Relative change of matrix entries under a change of square-root branch.
pub const BRANCH: f64 = 1e-8;
/// Relative spectral displacement along an isospectral deformation.
pub const ISOSPECTRAL: f64 = 1e-6;
/// Relative deviation of a perturbed trajectory from the linear prediction.
pub const LINEARIZATION: f64 = 1e-3;
/// Closed-form anchors with exactly known values.
pub const ANCHOR: f64 = 1e-10;
/// Absolute part of the Jacobian comparison, as a multiple of the matrix norm.
pub const JACOBIAN_ABS_FRACTION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub identity: f64,
    pub spectrum: f64,
    pub jacobian: f64,
    pub diophantine: f64,
    pub trace_det: f64,
    pub eigen_relation: f64,
    pub branch: f64,
    pub isospectral: f64,
    pub linearization: f64,
    pub anchor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: IDENTITY,
            spectrum: SPECTRUM,
            jacobian: JACOBIAN,
            diophantine: DIOPHANTINE,
            trace_det: TRACE_DET,
            eigen_relation: EIGEN_RELATION,
            branch: BRANCH,
            isospectral: ISOSPECTRAL,
            linearization: LINEARIZATION,
            anchor: ANCHOR,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "identity",
        "spectrum",
        "jacobian",
        "diophantine",
        "trace_det",
        "eigen_relation",
        "branch",
        "isospectral",
        "linearization",
        "anchor",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "identity" => &mut self.identity,
            "spectrum" => &mut self.spectrum,
            "jacobian" => &mut self.jacobian,
            "diophantine" => &mut self.diophantine,
            "trace_det" => &mut self.trace_det,
            "eigen_relation" => &mut self.eigen_relation,
            "branch" => &mut self.branch,
            "isospectral" => &mut self.isospectral,
            "linearization" => &mut self.linearization,
            "anchor" => &mut self.anchor,
            _ => return None,
        })
    }

    /// Override one tolerance; unknown names are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance {name} must be a positive finite number"));
        }
        match self.slot(name) {
            Some(s) => {
                *s = value;
                Ok(())
            }
            None => Err(format!("unknown tolerance `{name}` (known: {})", Self::NAMES.join(", "))),
        }
    }

    /// Every tolerance multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for name in Self::NAMES {
            if let Some(s) = self.slot(name) {
                *s *= factor;
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_and_scale() {
        let mut t = Tolerances::default();
        t.set("spectrum", 1e-3).unwrap();
        assert_eq!(t.spectrum, 1e-3);
        assert!(t.set("bogus", 1.0).is_err());
        assert!(t.set("identity", -1.0).is_err());
        let s = t.scaled(10.0);
        assert!((s.identity - 1e-7).abs() < 1e-20);
        assert!((s.spectrum - 1e-2).abs() < 1e-15);
    }
}
