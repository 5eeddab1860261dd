//! Scheme selection, tolerances and per-step diagnostics shared by the
//! 1D and 2D solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::field::{ClampReport, Field};
use crate::isotherm::NewtonConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// First-order explicit upwind.
    Explicit1,
    /// Second-order explicit reference: van Leer MUSCL with Heun stages.
    Explicit2,
    /// First-order implicit upwind, solved by fast sweeping.
    Implicit1,
    /// Compact implicit second order with fixed `ω` and no limiting.
    Compact2 { omega: f64 },
    /// Compact implicit second order with WENO-weighted `ω` and limiter `l`,
    /// computed by a predictor–corrector pair.
    HiresWeno,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Explicit1 => "explicit1",
            Self::Explicit2 => "explicit2",
            Self::Implicit1 => "implicit1",
            Self::Compact2 { .. } => "compact2",
            Self::HiresWeno => "hires_weno",
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, Self::Explicit1 | Self::Explicit2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub newton: NewtonConfig,
    /// Fixed-point tolerance on the max-norm change of `U` between sweeps.
    pub sweep_tol: f64,
    pub max_sweeps: usize,
    /// Smoothness-indicator regularizer.
    pub weno_eps: f64,
    /// Number of corrector solves in the high-resolution scheme; each extra
    /// pass recomputes `ω` and `l` from the previous corrector.
    pub corrector_passes: usize,
    /// Forces every limiter value to zero (first-order degeneration).
    pub force_first_order: bool,
    pub limiter_mode: LimiterMode,
}

/// How the high-resolution corrector uses the limiter computed from the
/// predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimiterMode {
    /// `l` is used as computed from the predictor.
    Frozen,
    /// The predictor `l` is an upper bound; each cell solve reduces it so
    /// the new value stays within its local range and every interface value
    /// stays inside its envelope with the solved values.
    #[default]
    Local,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            newton: NewtonConfig::default(),
            sweep_tol: 1e-10,
            max_sweeps: 100,
            weno_eps: 1e-6,
            corrector_passes: 1,
            force_first_order: false,
            limiter_mode: LimiterMode::default(),
        }
    }

    /// Every violated constraint, named by its config key.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.newton.violations();
        if let Scheme::Compact2 { omega } = self.scheme {
            if !(0.0..=1.0).contains(&omega) {
                out.push(format!("scheme.omega must lie in [0, 1], got {omega}"));
            }
        }
        if !(self.sweep_tol > 0.0) {
            out.push(format!("scheme.sweep.tol must be > 0, got {}", self.sweep_tol));
        }
        if self.max_sweeps < 2 {
            out.push(format!(
                "scheme.sweep.max_sweeps must be >= 2, got {}",
                self.max_sweeps
            ));
        }
        if !(self.weno_eps > 0.0) {
            out.push(format!("scheme.weno_eps must be > 0, got {}", self.weno_eps));
        }
        if self.corrector_passes < 1 {
            out.push("scheme.corrector_passes must be >= 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(m) => Err(SolverError::InvalidParameter(m)),
            None => Ok(()),
        }
    }
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    /// Sweeps (1D) or four-ordering rounds (2D), summed over predictor and
    /// corrector solves.
    pub sweeps_used: usize,
    pub newton_iters_total: usize,
    /// `τ·v·U` integrated over the inflow/left boundary edge(s).
    pub flux_left: f64,
    /// `τ·v·U` integrated over the outflow/right boundary edge(s).
    pub flux_right: f64,
    /// `Σ h^d Q^{n+1} − Σ h^d Q^n + (flux_right − flux_left)` before clamping.
    pub mass_defect: f64,
    pub clamp: ClampReport,
    pub min_u: f64,
    pub max_u: f64,
    /// Largest distance of a reconstructed interface value (with predictor
    /// data) outside its stencil envelope; zero for unlimited schemes.
    pub envelope_excess: f64,
    pub wall_time: f64,
}

/// Accumulated conservation bookkeeping of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConservationLedger {
    pub mass_initial: f64,
    pub mass_final: f64,
    /// `Σ_n (flux_right − flux_left)`.
    pub net_boundary_flux: f64,
    /// Total change of mass caused by round-off clamping.
    pub clamp_adjustment: f64,
    /// Largest per-step `|mass_defect|`.
    pub max_step_defect: f64,
}

impl ConservationLedger {
    /// `mass_final − mass_initial + net_boundary_flux − clamp_adjustment`.
    pub fn drift(&self) -> f64 {
        self.mass_final - self.mass_initial + self.net_boundary_flux - self.clamp_adjustment
    }

    /// Drift relative to the larger of the initial and final mass.
    pub fn relative_drift(&self) -> f64 {
        let scale = self.mass_initial.abs().max(self.mass_final.abs()).max(1e-300);
        self.drift().abs() / scale
    }
}

/// Output of a complete time loop.
#[derive(Debug, Clone)]
pub struct RunResult<L> {
    pub field: Field,
    pub steps: Vec<StepDiagnostics>,
    pub ledger: ConservationLedger,
    /// Limiter state of the final step (high-resolution scheme only).
    pub limiter: Option<L>,
    pub wall_time: f64,
}

impl<L> RunResult<L> {
    pub fn min_u(&self) -> f64 {
        self.steps.iter().map(|s| s.min_u).fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.max_u)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_newton_iters(&self) -> usize {
        self.steps.iter().map(|s| s.newton_iters_total).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SchemeConfig::new(Scheme::Compact2 { omega: 1.5 })
            .validate()
            .is_err());
        let mut c = SchemeConfig::new(Scheme::HiresWeno);
        c.max_sweeps = 1;
        assert!(c.validate().is_err());
        assert!(SchemeConfig::new(Scheme::Implicit1).validate().is_ok());
    }
}
