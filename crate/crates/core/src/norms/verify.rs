#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::spacetime::NormEngine;
use super::{NormKind, NormSpec, NormsError};
use crate::field::{Layer, SpaceTimeField};

/// Evaluated sides of `LHS ≤ first + C · second` and the smallest `C` that
/// makes the inequality hold for this sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    /// `ε · ‖u‖_A`.
    pub first: f64,
    /// `ε^{-p} · ‖u‖_B`, the factor multiplying the unknown constant.
    pub second: f64,
    /// `max(0, lhs − first) / second`; infinite when `second = 0` but the
    /// inequality would need a positive constant.
    pub constant: f64,
}

impl InequalityReport {
    fn new(lhs: f64, first: f64, second: f64) -> Self {
        let excess = (lhs - first).max(0.0);
        let constant = if excess == 0.0 {
            0.0
        } else if second > 0.0 {
            excess / second
        } else {
            f64::INFINITY
        };
        Self {
            lhs,
            first,
            second,
            constant,
        }
    }
}

fn check_epsilon(eps: f64) -> Result<(), NormsError> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(NormsError::Parameter("epsilon must lie in (0, 1]"))
    }
}

fn l2_hs(engine: &NormEngine, u: &SpaceTimeField, s: f64) -> Result<f64, NormsError> {
    let rep = engine.norm(u, NormSpec::hrs(0.0, s, u.layer()))?;
    Ok(rep.spatial_sq.sqrt())
}

/// Space-time trace inequality
/// `‖u‖_{H^θ L²(Γc)} ≤ ε ‖u‖_{H^{2θr/(2r−1)} L²} + C ε^{1−2r} ‖u‖_{L² H^r}`.
pub fn verify_trace_inequality(
    engine: &NormEngine,
    u: &SpaceTimeField,
    r: f64,
    theta: f64,
    eps: f64,
) -> Result<InequalityReport, NormsError> {
    if !(r > 0.5) {
        return Err(NormsError::Parameter("trace inequality needs r > 1/2"));
    }
    if !(theta >= 0.0) {
        return Err(NormsError::Parameter("trace inequality needs theta >= 0"));
    }
    check_epsilon(eps)?;
    if u.layer() != Layer::Fluid {
        return Err(NormsError::MismatchedDomain {
            spec: Layer::Fluid.name(),
            field: u.layer().name(),
        });
    }
    let trace = u.interface_trace(engine.geometry());
    let lhs = engine.norm(&trace, NormSpec::new(NormKind::Temporal { r: theta }, Layer::Interface))?.value;
    let a = engine
        .norm(u, NormSpec::new(NormKind::Temporal { r: 2.0 * theta * r / (2.0 * r - 1.0) }, Layer::Fluid))?
        .value;
    let b = l2_hs(engine, u, r)?;
    Ok(InequalityReport::new(lhs, eps * a, eps.powf(1.0 - 2.0 * r) * b))
}

/// Space-time interpolation inequality
/// `‖u‖_{H^θ H^λ} ≤ ε ‖u‖_{H^α L²} + C ε^{−θβ/(αλ)} ‖u‖_{L² H^β}`.
pub fn verify_interpolation(
    engine: &NormEngine,
    u: &SpaceTimeField,
    alpha: f64,
    beta: f64,
    theta: f64,
    lambda: f64,
    eps: f64,
) -> Result<InequalityReport, NormsError> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(NormsError::Parameter("interpolation needs alpha, beta > 0"));
    }
    if !(theta > 0.0 && theta < alpha && lambda > 0.0 && lambda < beta) {
        return Err(NormsError::Parameter("interpolation needs theta in (0, alpha) and lambda in (0, beta)"));
    }
    let used = theta / alpha + lambda / beta;
    if used > 1.0 {
        return Err(NormsError::ExponentConstraint(used));
    }
    check_epsilon(eps)?;
    let layer = u.layer();
    let lhs = engine.norm(u, NormSpec::new(NormKind::Mixed { theta, lambda }, layer))?.value;
    let a = engine.norm(u, NormSpec::new(NormKind::Temporal { r: alpha }, layer))?.value;
    let b = l2_hs(engine, u, beta)?;
    let p = theta * beta / (alpha * lambda);
    Ok(InequalityReport::new(lhs, eps * a, eps.powf(-p) * b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, ChannelGeometry, GeometryConfig};

    fn geom() -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 8, 4, [8, 4, 8], 16)).unwrap()
    }

    fn sample(g: &ChannelGeometry) -> SpaceTimeField {
        SpaceTimeField::from_fn(g, Layer::Fluid, 1, 17, |t, x, _, _, o| o[0] = x.sin() * (2.0 * t).sin())
    }

    #[test]
    fn zero_field_gives_zero_sides() {
        let g = geom();
        let e = NormEngine::new(&g);
        let u = SpaceTimeField::zeros_on(&g, Layer::Fluid, 1);
        let r = verify_trace_inequality(&e, &u, 1.0, 0.25, 0.5).unwrap();
        assert_eq!((r.lhs, r.first, r.second, r.constant), (0.0, 0.0, 0.0, 0.0));
        let r = verify_interpolation(&e, &u, 1.0, 2.0, 0.25, 1.0, 0.5).unwrap();
        assert_eq!(r.constant, 0.0);
    }

    #[test]
    fn epsilon_scaling_is_explicit() {
        let g = geom();
        let e = NormEngine::new(&g);
        let u = sample(&g);
        let r = 1.5;
        let a = verify_trace_inequality(&e, &u, r, 0.3, 0.5).unwrap();
        let b = verify_trace_inequality(&e, &u, r, 0.3, 0.25).unwrap();
        assert!((b.first - 0.5 * a.first).abs() < 1e-14 * a.first);
        assert!((b.second - 2.0f64.powf(2.0 * r - 1.0) * a.second).abs() < 1e-12 * b.second);
        assert!(a.constant.is_finite());
    }

    #[test]
    fn exponent_constraint_is_enforced() {
        let g = geom();
        let e = NormEngine::new(&g);
        let u = sample(&g);
        assert!(matches!(
            verify_interpolation(&e, &u, 1.0, 2.0, 0.75, 1.0, 0.5),
            Err(NormsError::ExponentConstraint(_))
        ));
        assert!(verify_trace_inequality(&e, &u, 0.5, 0.3, 0.5).is_err());
    }
}
