//! Time cutoff, derivative operators, cofactor algebra and the cutoff-modified
//! Lagrangian flow map.

mod bounds;
mod cutoff;
pub mod deriv;
mod flow_map;
pub mod tensor;

use thiserror::Error;

pub use bounds::{cofactor_distances, CofactorDistances};
pub use cutoff::{make_cutoff, CutoffFunction, RAMP_DERIVATIVE_MAX};
pub use deriv::Deriv;
pub use flow_map::{
    cofactor, cofactor_difference, cutoff_integral, deformation, flow_map, piola_residual, CofactorDifference,
    Deformation, FlowMapState, PiolaReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldsError {
    #[error("cutoff time {0} outside (0, 1/4]")]
    CutoffOutOfRange(f64),
    #[error("cutoff steepness {0} must be at least 1 so the ramp ends by 2T")]
    SteepnessOutOfRange(f64),
    #[error("field shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error(
        "det(grad eta) = {det:e} <= 0 at time index {t}, sample ({ix}, {iy}, {iz}); the cutoff time is too large for this velocity"
    )]
    NonPositiveJacobian {
        t: usize,
        ix: usize,
        iy: usize,
        iz: usize,
        det: f64,
    },
}
