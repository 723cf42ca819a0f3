//! Marked Poisson processes on box windows, thinning, and configuration I/O.

mod config;
pub mod io;
mod marks;
mod model;
mod sampling;
mod window;

pub use config::{Point, PointConfiguration, PointRef};
pub(crate) use config::sq_dist;
pub use marks::MarkMeasure;
pub use model::IntensityModel;
pub use sampling::{poisson_count, sample_point, sample_poisson, thin, MAX_EXPECTED_POINTS};
pub(crate) use sampling::{retention_uniforms, thin_with_uniforms};
pub use window::Window;
