//! Discrete maximal-regularity ratio of a Stokes solve.

use alloc::vec::Vec;

use super::{StokesProblem, StokesSolution};
use crate::field::{Layer, SpaceTimeField};
use crate::norms::{NormEngine, NormKind, NormSpec, NormsError};

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityRatio {
    /// `‖u‖_{K^{s+1}} + ‖p‖_{H^{s/2−1/2, s}}`.
    pub solution: f64,
    /// Sum of the data norms, labelled.
    pub data: Vec<(&'static str, f64)>,
    pub ratio: f64,
}

fn on_grid(f: &SpaceTimeField, samples: usize) -> SpaceTimeField {
    if f.time_samples() == 1 {
        f.repeated(samples)
    } else {
        f.clone()
    }
}

/// Solution norms over data norms for regularity index `s ≥ 1`:
/// `u0 ∈ H^s`, `f, g̃, b ∈ K^{s−1}`, `g ∈ K^s`, traction data in
/// `H^{s/2−1/4, s−1/2}(Γc)` and wall data in `H^{s/2+1/4, s+1/2}(Γf)`.
pub fn maximal_regularity_ratio(
    engine: &NormEngine,
    problem: &StokesProblem,
    solution: &StokesSolution,
    s: f64,
) -> Result<RegularityRatio, NormsError> {
    if !(s >= 1.0) {
        return Err(NormsError::Parameter("regularity index below 1"));
    }
    let samples = solution.u.time_samples();
    let fluid = |r: f64, sp: f64| NormSpec::hrs(r, sp, Layer::Fluid);
    let norm = |f: &SpaceTimeField, spec: NormSpec| engine.norm(&on_grid(f, samples), spec).map(|r| r.value);
    let sol = norm(&solution.u, NormSpec::k(s + 1.0, Layer::Fluid))? + norm(&solution.p, fluid(s / 2.0 - 0.5, s))?;
    let mut data = Vec::new();
    data.push(("u0", engine.norm(&problem.u0, NormSpec::new(NormKind::Spatial { s }, Layer::Fluid))?.value));
    data.push(("f", norm(&problem.f, NormSpec::k(s - 1.0, Layer::Fluid))?));
    data.push(("g", norm(&problem.g, NormSpec::k(s, Layer::Fluid))?));
    if let Some(dec) = &problem.decomposition {
        data.push(("g_tilde", norm(&dec.g_tilde, NormSpec::k(s - 1.0, Layer::Fluid))?));
        data.push(("b", norm(&dec.b, NormSpec::k(s - 1.0, Layer::Fluid))?));
    }
    data.push(("h1", norm(&problem.h1, NormSpec::hrs(s / 2.0 - 0.25, s - 0.5, Layer::Interface))?));
    data.push(("h2", norm(&problem.h2, NormSpec::hrs(s / 2.0 + 0.25, s + 0.5, Layer::OuterBoundary))?));
    let total: f64 = data.iter().map(|(_, v)| v).sum();
    Ok(RegularityRatio {
        solution: sol,
        data,
        ratio: if total > 0.0 { sol / total } else { f64::NAN },
    })
}
