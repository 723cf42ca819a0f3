//! Replication engine for standardised samples of `F_t`, empirical
//! Kolmogorov/Wasserstein distances to N(0, 1), and log–log rate fits.

mod distance;
mod replicate;

pub use distance::{
    bootstrap_se, distance_report, dkw_band, empirical_dk, empirical_dw, fit_rate, fit_rate_with, Distance,
    DistanceReport, RateFit, DKW_ALPHA, MIN_RATE_POINTS,
};
pub use replicate::{
    replicate, standardize_member, write_clt_csv, CltRow, FunctionalFamily, RegistryFamily, ReplicateSample,
    ReplicationPlan, StandardizationMode, CLT_STREAM, MIN_REPS,
};
