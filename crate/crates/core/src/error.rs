use thiserror::Error;

/// Errors shared by every engine in the crate.
///
/// Variants group into four families, which the CLI maps onto exit codes:
/// configuration/input problems, unsupported or unstable parameter regimes,
/// numerical failures, and Fock-space truncation problems.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor invariant was violated (negative rate, overlapping
    /// pulses, non-increasing grid, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested formula is only stated for red detuning.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The linearized system has no stable steady state at these parameters.
    #[error(
        "parameters violate the stability condition (|G|^2 >= -(4*det^2+kappa^2)*omega_m/(16*det))"
    )]
    UnstableParams,

    /// Net optical damping is zero or negative; no cooling limit exists.
    #[error("heating regime: optical damping Gamma_opt <= 0")]
    HeatingRegime,

    /// A closed-form expression was evaluated at or beyond one of its poles.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Frequency-matching index must be an odd integer >= 3.
    #[error("invalid matching index k = {0}: must be odd and >= 3")]
    InvalidK(u32),

    /// Newton polish failed to reach the residual target.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The adaptive step-size controller collapsed below the hard floor.
    #[error("step underflow at t = {t}: dt = {dt} < 1e-12")]
    StepUnderflow { t: f64, dt: f64 },

    /// Dense linear solve met a zero pivot.
    #[error("singular linear system (zero pivot at row {0})")]
    SingularSystem(usize),

    /// Fixed-step density-matrix integration lost too much trace per step.
    #[error("step too large: trace drift {drift:e} per step exceeds 1e-6")]
    StepTooLarge { drift: f64 },

    /// Requested Fock-space size exceeds the configured budget.
    #[error("Fock budget exceeded: dim_a*dim_b = {dim} > budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    /// Population reached the highest retained Fock level.
    #[error("truncation warning: top-level population photon {leak_a:e}, phonon {leak_b:e} exceeds 1e-4")]
    Truncation { leak_a: f64, leak_b: f64 },

    /// A moment state left the physical cone by more than integrator slack.
    #[error("physicality violation: {0}")]
    Physicality(String),
}

pub type Result<T> = std::result::Result<T, Error>;
