//! Fixed-ansatz optimisers and the metered energy function they share.

mod config;
mod evaluator;
mod gradient;
mod solve;
mod trace;

pub use config::{ConvergenceConfig, ConvergenceMode, SweepOrder};
pub use evaluator::EnergyEvaluator;
pub(crate) use gradient::gradient_descent_from;
pub use gradient::{gradient_descent, ps_gradient, rotosolve, rotosolve_step, GradientOutcome};
pub use solve::{
    auto_pair, excitation_solve, excitation_solve_2d, excitation_solve_2d_with, excitation_solve_from,
    excitation_solve_step, parameter_order, score_parameters, SolveOutcome, Step2D, StepResult,
};
pub use trace::{EventKind, OptimizerTrace, RankedCandidate, RunMetadata, TraceEvent};

/// Default gradient-descent step size for a molecule (`h2`, `h3p`, `lih`, `h2o`).
pub fn default_gd_step(molecule: &str) -> Option<f64> {
    match molecule {
        "h2" | "h3p" => Some(0.5),
        "lih" => Some(0.25),
        "h2o" => Some(0.025),
        _ => None,
    }
}

/// Default energy thresholds for one molecule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// ExcitationSolve VQE and selection threshold.
    pub excitation_solve: f64,
    /// Gradient-descent VQE threshold.
    pub gradient_vqe: f64,
    /// Gradient-criterion selection threshold.
    pub gradient_selection: f64,
}

pub fn default_thresholds(molecule: &str) -> Option<Thresholds> {
    let t = |e, v, s| Some(Thresholds { excitation_solve: e, gradient_vqe: v, gradient_selection: s });
    match molecule {
        "h2" => t(1e-6, 2e-13, 2e-13),
        "h3p" => t(1e-6, 2e-13, 2e-8),
        "lih" => t(1e-7, 2e-7, 2e-7),
        "h2o" => t(1e-6, 2e-8, 2e-8),
        _ => None,
    }
}

/// Molecule key of a fixture name (`lih_d2.20` -> `lih`).
pub fn molecule_of(fixture: &str) -> &str {
    fixture.split("_d").next().unwrap_or(fixture)
}
