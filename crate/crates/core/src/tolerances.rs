//! Default numerical tolerances.
//!
//! Every threshold used by the library and by the verification suite lives
//! here. The CLI reads `HURWITZ_TOL` to override [`Tolerances::residual`].

use serde::{Deserialize, Serialize};

/// Guard for evaluating the rational map near one of its poles (relative).
pub const POLE_GUARD: f64 = 1e-12;
/// Minimum separation of critical points/values (relative to data scale).
pub const GENERICITY: f64 = 1e-6;
/// Relative step for central finite differences over flows.
pub const FD_STEP: f64 = 1e-5;
/// Relative step for pure second differences.
pub const FD_STEP_SECOND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Generic residual threshold for FD-based identities.
    pub residual: f64,
    pub closed_form: f64,
    pub partial_fraction: f64,
    pub deformation: f64,
    pub tau_equivalence: f64,
    pub genus_reduction: f64,
    pub conservation: f64,
    pub commuting_tau: f64,
    pub hodograph: f64,
    pub plemelj: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-6,
            closed_form: 1e-12,
            partial_fraction: 1e-10,
            deformation: 1e-8,
            tau_equivalence: 1e-8,
            genus_reduction: 1e-12,
            conservation: 1e-9,
            commuting_tau: 1e-10,
            hodograph: 1e-8,
            plemelj: 1e-4,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            newton: 1e-10,
        }
    }
}

impl Tolerances {
    /// Defaults with `HURWITZ_TOL` applied to the residual threshold, when set
    /// to a positive number.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Some(v) = std::env::var("HURWITZ_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
        {
            t.residual = v;
        }
        t
    }
}

/// `|a - b|` measured against `max(1, |a|, |b|)`.
pub fn mixed_error(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}
