//! Add-point difference operators, the Mehler thinning operator `P_s` and
//! Monte Carlo estimators of the inverse Ornstein–Uhlenbeck operator.

mod diff;
mod inequalities;
mod mehler;
mod quadrature;

pub use diff::{diff1, diff2};
pub use inequalities::{contractivity_checks, inverse_ou_moment_checks, poincare_check, InequalityCheck};
pub use mehler::{
    coupled_commutation, default_s_quadrature, default_u_quadrature, inverse_ou_minus_dx, inverse_ou_value,
    mehler_ps, Centring, CommutationEstimate, InverseOUEstimate, MehlerEstimate, NodeDiagnostic, DEFAULT_N_INNER,
};
pub use quadrature::Quadrature;
