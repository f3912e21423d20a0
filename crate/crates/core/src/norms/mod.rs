//! Fractional space-time Sobolev norms.
//!
//! Spatial norms are spectral: a Fourier transform in `x`, `y`, a type-I
//! cosine transform in `z` on every slab, and the multiplier
//! `(1 + |ξ|²)^s`. They are realised through an *embedding* vector whose
//! Euclidean length is the norm, so temporal norms of spatial norms reduce
//! to norms of vector-valued sequences.
//!
//! Temporal norms of order `r = k + σ` add the `L²` norms of the first `k`
//! forward difference quotients and the Slobodeckij seminorm of order `σ`
//! of the `k`-th one.

mod p01;
mod slobodeckij;
mod spacetime;
mod spatial;
mod verify;

pub(crate) use spatial::check_space_order as spatial_order_check;

use thiserror::Error;

use crate::field::Layer;

pub use p01::{bump_profile, log_log_slope, p01_experiment, P01Row, P01Table};
pub use slobodeckij::{slobodeckij_seminorm, slobodeckij_sq_sequence};
pub use spacetime::{
    interface_trace_norm, spacetime_norm, temporal_norm_sq, NormEngine, TemporalParts,
};
pub use spatial::{spatial_fractional_norm, SpatialEmbedding, MAX_SPACE_ORDER};
pub use verify::{verify_interpolation, verify_trace_inequality, InequalityReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormsError {
    #[error("Slobodeckij order {0} outside (0, 1)")]
    FractionalOrder(f64),
    #[error("need at least {need} time samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("space order {0} outside [0, 4]")]
    SpaceOrder(f64),
    #[error("time order {0} must be finite and non-negative")]
    TimeOrder(f64),
    #[error("norm domain {spec} does not match field layer {field}")]
    MismatchedDomain { spec: &'static str, field: &'static str },
    #[error("exponent constraint violated: theta/alpha + lambda/beta = {0} > 1")]
    ExponentConstraint(f64),
    #[error("parameter out of range: {0}")]
    Parameter(&'static str),
}

/// Which norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `H^r((0,1), L²) ∩ L²((0,1), H^s)`.
    Hrs { r: f64, s: f64 },
    /// `K^s = H^{s/2, s}`.
    K { s: f64 },
    /// Spatial `H^s` of the first time sample.
    Spatial { s: f64 },
    /// `H^r((0,1), L²)` only.
    Temporal { r: f64 },
    /// `H^θ((0,1), H^λ)`.
    Mixed { theta: f64, lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub kind: NormKind,
    pub domain: Layer,
}

impl NormSpec {
    pub fn new(kind: NormKind, domain: Layer) -> Self {
        Self { kind, domain }
    }

    pub fn k(s: f64, domain: Layer) -> Self {
        Self::new(NormKind::K { s }, domain)
    }

    pub fn hrs(r: f64, s: f64, domain: Layer) -> Self {
        Self::new(NormKind::Hrs { r, s }, domain)
    }

    /// `(time order, space order)` after expanding `K^s`.
    pub fn orders(&self) -> (f64, f64) {
        match self.kind {
            NormKind::Hrs { r, s } => (r, s),
            NormKind::K { s } => (s / 2.0, s),
            NormKind::Spatial { s } => (0.0, s),
            NormKind::Temporal { r } => (r, 0.0),
            NormKind::Mixed { theta, lambda } => (theta, lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    SlobodeckijQuadrature,
    Hybrid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::SlobodeckijQuadrature => "slobodeckij-quadrature",
            Method::Hybrid => "hybrid",
        }
    }
}

/// Evaluated norm with its two squared addends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub spec: NormSpec,
    pub method: Method,
    /// Squared temporal part (`H^r L²`, or `H^θ H^λ` for the mixed kind).
    pub temporal_sq: f64,
    /// Squared spatial part (`L² H^s`, or `H^s` for the spatial kind).
    pub spatial_sq: f64,
}
