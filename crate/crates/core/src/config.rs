//! Tolerances and trial budgets shared by every checker.
//!
//! Defaults live in [`Tolerances::DEFAULT`]; the CLI exposes each one as a
//! flag and echoes the values it used into the report.

use serde::{Deserialize, Serialize};

/// Numerical tolerances used by the falsifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues below this are raised to it before a function is applied.
    pub clamp: f64,
    /// Relative PSD tolerance: `M >= 0` iff `lambda_min(M) >= -psd_rel * max(1, |M|_max)`.
    pub psd_rel: f64,
    /// Absolute tolerance for trace-inequality margins.
    pub ps_abs: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        clamp: 1e-6,
        psd_rel: 1e-8,
        ps_abs: 1e-7,
    };

    /// PSD slack for a matrix whose largest entry magnitude is `max_abs`.
    pub fn psd_eps(&self, max_abs: f64) -> f64 {
        self.psd_rel * max_abs.max(1.0)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Number of randomized trials and the master seed they derive from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialBudget {
    pub trials: u64,
    pub seed: u64,
}

impl TrialBudget {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed }
    }
}

/// Every `BOUNDARY_PERIOD`-th trial injects a deterministic equality case.
pub const BOUNDARY_PERIOD: u64 = 16;

/// Relative node separation below which divided differences use the derivative.
pub const CONFLUENCE_REL: f64 = 1e-7;

/// Spectra of randomly drawn matrices are kept inside this window (intersected
/// with the working domain) so that rounding stays far below the PSD slack.
pub const MATRIX_WINDOW: (f64, f64) = (1e-2, 1e2);
