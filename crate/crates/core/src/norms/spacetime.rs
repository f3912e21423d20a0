use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::slobodeckij::slobodeckij_sq_sequence;
use super::spatial::{check_space_order, SpatialEmbedding};
use super::{Method, NormKind, NormReport, NormSpec, NormsError};
use crate::field::{Layer, SpaceTimeField};
use crate::geometry::ChannelGeometry;

/// Fractional parts below this are treated as integer orders.
const INTEGER_TOL: f64 = 1e-12;

/// Squared temporal norm split into the integer-order sum and the
/// Slobodeckij remainder.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TemporalParts {
    pub integer_sq: f64,
    pub fractional_sq: f64,
}

impl TemporalParts {
    pub fn total(&self) -> f64 {
        self.integer_sq + self.fractional_sq
    }
}

fn split_order(r: f64) -> Result<(usize, f64), NormsError> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(NormsError::TimeOrder(r));
    }
    let k = r.floor();
    let sigma = r - k;
    if sigma < INTEGER_TOL {
        Ok((k as usize, 0.0))
    } else if 1.0 - sigma < INTEGER_TOL {
        Ok((k as usize + 1, 0.0))
    } else {
        Ok((k as usize, sigma))
    }
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `‖g‖²_{H^r(0,T)}` of a vector sequence sampled at `t_n = n dt`.
///
/// Order zero uses the trapezoid rule; the forward difference quotients of
/// order `j ≥ 1` carry the uniform weight `dt`; a fractional remainder `σ`
/// adds the Slobodeckij seminorm of the highest difference quotient. A
/// single sample is read as a function constant on a unit interval.
pub fn temporal_norm_sq<S: AsRef<[f64]>>(seq: &[S], dt: f64, r: f64) -> Result<TemporalParts, NormsError> {
    let (k, sigma) = split_order(r)?;
    let n = seq.len();
    if n == 1 && k == 0 && sigma == 0.0 {
        return Ok(TemporalParts {
            integer_sq: sq(seq[0].as_ref()),
            fractional_sq: 0.0,
        });
    }
    let need = (k + 1 + usize::from(sigma > 0.0)).max(2);
    if n < need {
        return Err(NormsError::TooFewSamples { need, got: n });
    }
    let mut integer_sq = 0.0;
    for (i, g) in seq.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        integer_sq += w * dt * sq(g.as_ref());
    }
    let mut current: Vec<Vec<f64>> = Vec::new();
    for j in 1..=k {
        let next: Vec<Vec<f64>> = if j == 1 {
            seq.windows(2)
                .map(|w| w[1].as_ref().iter().zip(w[0].as_ref()).map(|(a, b)| (a - b) / dt).collect())
                .collect()
        } else {
            current
                .windows(2)
                .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b) / dt).collect())
                .collect()
        };
        integer_sq += dt * next.iter().map(|g| sq(g)).sum::<f64>();
        current = next;
    }
    let fractional_sq = if sigma > 0.0 {
        if k == 0 {
            slobodeckij_sq_sequence(seq, dt, sigma)?
        } else {
            slobodeckij_sq_sequence(&current, dt, sigma)?
        }
    } else {
        0.0
    };
    Ok(TemporalParts {
        integer_sq,
        fractional_sq,
    })
}

/// Cached spatial embeddings for every layer of one geometry.
#[derive(Debug, Clone)]
pub struct NormEngine {
    geom: ChannelGeometry,
    embeddings: [SpatialEmbedding; 4],
}

impl NormEngine {
    pub fn new(geom: &ChannelGeometry) -> Self {
        let layers = [Layer::Fluid, Layer::Elastic, Layer::Interface, Layer::OuterBoundary];
        Self {
            geom: geom.clone(),
            embeddings: layers.map(|l| SpatialEmbedding::new(geom, l)),
        }
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geom
    }

    pub fn embedding(&self, layer: Layer) -> &SpatialEmbedding {
        &self.embeddings[layer.tag() as usize]
    }

    fn embedded(&self, f: &SpaceTimeField, s: f64) -> Vec<Vec<f64>> {
        let emb = self.embedding(f.layer());
        let nc = f.components();
        (0..f.time_samples())
            .map(|n| {
                if s == 0.0 {
                    emb.embed_l2(f.slice(n), nc)
                } else {
                    emb.embed(f.slice(n), nc, s)
                }
            })
            .collect()
    }

    /// Spatial `H^s` norm of each time sample.
    pub fn spatial_norms(&self, f: &SpaceTimeField, s: f64) -> Result<Vec<f64>, NormsError> {
        check_space_order(s)?;
        Ok(self.embedded(f, s).iter().map(|e| sq(e).sqrt()).collect())
    }

    /// `sup_t ‖f(t)‖_{H^s}`.
    pub fn sup_spatial_norm(&self, f: &SpaceTimeField, s: f64) -> Result<f64, NormsError> {
        Ok(self.spatial_norms(f, s)?.into_iter().fold(0.0, f64::max))
    }

    pub fn norm(&self, f: &SpaceTimeField, spec: NormSpec) -> Result<NormReport, NormsError> {
        spacetime_norm(self, f, spec)
    }
}

fn time_step(f: &SpaceTimeField) -> f64 {
    let n = f.time_samples();
    if n > 1 {
        1.0 / (n - 1) as f64
    } else {
        1.0
    }
}

/// `‖f‖²_{L²((0,1), X)}` from per-sample squared norms (trapezoid rule).
fn l2_in_time(sq_norms: &[f64], dt: f64) -> f64 {
    let n = sq_norms.len();
    if n == 1 {
        return sq_norms[0];
    }
    sq_norms
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 } else { 1.0 } * dt * v)
        .sum()
}

/// Evaluates `spec` on `f`, which must live on the layer named by the spec.
pub fn spacetime_norm(engine: &NormEngine, f: &SpaceTimeField, spec: NormSpec) -> Result<NormReport, NormsError> {
    if spec.domain != f.layer() {
        return Err(NormsError::MismatchedDomain {
            spec: spec.domain.name(),
            field: f.layer().name(),
        });
    }
    let (r, s) = spec.orders();
    check_space_order(s)?;
    let (_, sigma) = split_order(r)?;
    let dt = time_step(f);
    let (temporal_sq, spatial_sq, method) = match spec.kind {
        NormKind::Spatial { s } => {
            let e = engine.embedding(f.layer()).embed(f.slice(0), f.components(), s);
            (0.0, sq(&e), Method::Spectral)
        }
        NormKind::Temporal { r } => {
            let t = temporal_norm_sq(&engine.embedded(f, 0.0), dt, r)?;
            let m = if sigma > 0.0 { Method::SlobodeckijQuadrature } else { Method::Spectral };
            (t.total(), 0.0, m)
        }
        NormKind::Mixed { theta, lambda } => {
            let t = temporal_norm_sq(&engine.embedded(f, lambda), dt, theta)?;
            let m = if sigma > 0.0 { Method::Hybrid } else { Method::Spectral };
            (t.total(), 0.0, m)
        }
        NormKind::Hrs { .. } | NormKind::K { .. } => {
            let t = temporal_norm_sq(&engine.embedded(f, 0.0), dt, r)?;
            let per: Vec<f64> = engine.embedded(f, s).iter().map(|e| sq(e)).collect();
            let m = if sigma > 0.0 { Method::Hybrid } else { Method::Spectral };
            (t.total(), l2_in_time(&per, dt), m)
        }
    };
    Ok(NormReport {
        value: (temporal_sq + spatial_sq).sqrt(),
        spec,
        method,
        temporal_sq,
        spatial_sq,
    })
}

/// Norm of an interface field (both planes of `Γc` together).
pub fn interface_trace_norm(engine: &NormEngine, f: &SpaceTimeField, spec: NormSpec) -> Result<NormReport, NormsError> {
    if f.layer() != Layer::Interface {
        return Err(NormsError::MismatchedDomain {
            spec: Layer::Interface.name(),
            field: f.layer().name(),
        });
    }
    spacetime_norm(engine, f, NormSpec { domain: Layer::Interface, ..spec })
}
