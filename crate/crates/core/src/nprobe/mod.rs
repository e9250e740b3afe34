//! Precision of N probes: channel-extension bound, GHZ parity, time
//! optimization and scaling exponents.

pub mod bound;
pub mod optimize;
pub mod parity;
pub mod scaling;
pub mod simplex;

pub use bound::{channel_qfi_bound, BoundOptions, BoundResult};
pub use optimize::{log_grid, optimize_time, TimeOptimum};
pub use parity::{parity_expectation, parity_expectation_derivative, parity_precision};
pub use scaling::{
    n_grid, precision_curve, precision_point, scaling_fit, ClosedForm, MapFamily, PrecisionCurve, PrecisionPoint,
    SampledFamily, ScalingFit, ScalingOptions, Source,
};
