//! Monte Carlo estimates of the six Stein-bound components γ₁…γ₆, the
//! assembled Wasserstein/Kolmogorov bounds, and the stabilization-form bounds
//! driven by non-vanishing probabilities of difference operators.

mod gammas;
mod report;
mod stabilization;

pub use gammas::{
    estimate_gammas, fourth_moment_bound, fourth_moment_from_integrals, FourthMomentBound, FourthMomentSource,
    GammaEstimates, GammaPlan, DEFAULT_BOOTSTRAP,
};
pub use report::{assemble_bounds, write_bound_csv, BoundReport, BoundRow, Domination, Measured};
pub use stabilization::{
    estimate_stabilization_bound, second_difference_nonzero_probability, ProbabilityIntegrals, StabilizationPlan,
    StabilizationReport, ZERO_TOLERANCE,
};
