//! Fixed-point drivers for the coupled fluid / elastic system.
//!
//! The linear map `Λ` solves the wave problem with boundary displacement
//! `w0 + ∫ψ v` and then the Stokes problem with the elastic normal
//! derivative as traction data. The nonlinear map `Π` adds the flow map of
//! the iterate and the variable-coefficient forcing built from it.

mod iterate;
mod linear;
mod members;
mod nonlinear;
mod verify;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::field::{Layer, SpaceTimeField};
use crate::fields::FieldsError;
use crate::geometry::{ChannelGeometry, Plane};
use crate::norms::{NormEngine, NormKind, NormSpec, NormsError};
use crate::stokes::StokesError;
use crate::wave::WaveError;

pub use iterate::{
    initial_pressure_iterate, iterate_to_fixed_point, Driver, FixedPointOutcome, HistoryRow, IterationState, MapEvaluator,
};
pub use linear::{linear_lambda_step, LambdaStep, LinearData};
pub use members::random_member;
pub use nonlinear::{assemble_nonlinear_forcing, nonlinear_pi_step, NonlinearForcing, PiStep};
pub use verify::{verify_coupled_solution, CoupledResiduals, Residual};

/// Default regularity exponent.
pub const DEFAULT_S: f64 = 1.52;
/// Default width of the admissible exponent window above `3/2`.
pub const DEFAULT_EPSILON0: f64 = 0.04;
/// Tolerance of the strongly imposed membership conditions of an iterate.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FsiError {
    #[error("stokes subsolve: {0}")]
    Stokes(#[from] StokesError),
    #[error("wave subsolve: {0}")]
    Wave(#[from] WaveError),
    #[error("flow map: {0}")]
    Fields(#[from] FieldsError),
    #[error("norm evaluation: {0}")]
    Norms(#[from] NormsError),
    #[error("iterate violates {what} by {value:e}")]
    Membership { what: &'static str, value: f64 },
    #[error("initial data violate {what} by {value:e}")]
    InitialData { what: &'static str, value: f64 },
    #[error("parameter out of range: {0}")]
    Parameter(&'static str),
    #[error("cutoff time {0} outside (0, 1/4]")]
    CutoffTime(f64),
}

/// Initial state `(v0, w0, w1)`, each a single time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub v0: SpaceTimeField,
    pub w0: SpaceTimeField,
    pub w1: SpaceTimeField,
}

impl InitialData {
    pub fn zero(geom: &ChannelGeometry) -> Self {
        Self {
            v0: SpaceTimeField::static_on(geom, Layer::Fluid, 3),
            w0: SpaceTimeField::static_on(geom, Layer::Elastic, 3),
            w1: SpaceTimeField::static_on(geom, Layer::Elastic, 3),
        }
    }

    /// Divergence-free single horizontal mode
    /// `v0 = A (sin x Φ'(z), 0, −cos x Φ(z))` with the cubic profile
    /// `Φ = d² − d³ / (3δ)`, where `d` is the distance to the nearer outer
    /// wall and `δ` the slab thickness. It vanishes on the walls and has
    /// `∂_z v0_x = 0` on the interface, so the traction condition holds at
    /// `t = 0` with `w0 = 0`. The elastic velocity `w1` interpolates `v0`
    /// linearly between the planes.
    pub fn single_mode(geom: &ChannelGeometry, amplitude: f64) -> Self {
        let [l1, l2, l3] = geom.lengths();
        let v = move |x: f64, z: f64| {
            let (d, width, sign) = if z <= l1 { (z, l1, 1.0) } else { (l3 - z, l3 - l2, -1.0) };
            let phi = d * d - d * d * d / (3.0 * width);
            let dphi = sign * (2.0 * d - d * d / width);
            [amplitude * x.sin() * dphi, 0.0, -amplitude * x.cos() * phi]
        };
        let v0 = SpaceTimeField::from_fn(geom, Layer::Fluid, 3, 1, |_, x, _, z, o| o.copy_from_slice(&v(x, z)));
        let w1 = SpaceTimeField::from_fn(geom, Layer::Elastic, 3, 1, |_, x, _, z, o| {
            let s = (z - l1) / (l2 - l1);
            let (lo, hi) = (v(x, l1), v(x, l2));
            for c in 0..3 {
                o[c] = (1.0 - s) * lo[c] + s * hi[c];
            }
        });
        Self {
            v0,
            w0: SpaceTimeField::static_on(geom, Layer::Elastic, 3),
            w1,
        }
    }

    /// Checks `v0 = 0` on the outer walls and `w1 = v0` on the interface.
    pub fn check(&self, geom: &ChannelGeometry) -> Result<(), FsiError> {
        let walls = self.v0.wall_trace(geom).max_abs();
        if walls > MEMBERSHIP_TOL {
            return Err(FsiError::InitialData { what: "v0 = 0 on the outer walls", value: walls });
        }
        let mismatch = self.v0.interface_trace(geom).difference(&self.w1.interface_trace(geom)).max_abs();
        if mismatch > MEMBERSHIP_TOL {
            return Err(FsiError::InitialData { what: "w1 = v0 on the interface", value: mismatch });
        }
        Ok(())
    }

    /// `v0` constant in time: the starting iterate.
    pub fn constant_iterate(&self, geom: &ChannelGeometry) -> SpaceTimeField {
        self.v0.repeated(geom.nt() + 1)
    }
}

/// Data norms entering the size bound `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataNorms {
    /// `‖v0‖_{H^s}`.
    pub v0: f64,
    /// `‖w0‖_{H^{s+1/2}}`.
    pub w0: f64,
    /// `‖w1‖_{H^{s−1/2}}`.
    pub w1: f64,
}

impl DataNorms {
    pub fn measure(engine: &NormEngine, data: &InitialData, s: f64) -> Result<Self, NormsError> {
        let norm = |f: &SpaceTimeField, layer: Layer, order: f64| {
            engine.norm(f, NormSpec::new(NormKind::Spatial { s: order }, layer)).map(|r| r.value)
        };
        Ok(Self {
            v0: norm(&data.v0, Layer::Fluid, s)?,
            w0: norm(&data.w0, Layer::Elastic, s + 0.5)?,
            w1: norm(&data.w1, Layer::Elastic, s - 0.5)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParameters {
    /// Regularity exponent in `(3/2, 3/2 + ε0)`.
    pub s: f64,
    pub epsilon0: f64,
    /// Scheme constant `C̄ ≥ 1`.
    pub c_bar: f64,
    /// Data-size bound `M`.
    pub m: f64,
    /// Cutoff time.
    pub t_tilde: f64,
    /// Cutoff ramp steepness; one ends the ramp at `2 T̃`.
    pub steepness: f64,
    /// Set when `T̃` was overridden rather than taken from `M`.
    pub off_theory: bool,
    /// Fixed-point tolerance on `‖v⁽ⁿ⁺¹⁾ − v⁽ⁿ⁾‖_{K^{s+1}}`.
    pub tol: f64,
    pub max_iter: usize,
    pub data_norms: DataNorms,
}

/// `M = (6 C̄)⁷ (1 + ‖v0‖⁷ + ‖w0‖ + ‖w1‖)`.
pub fn size_bound(c_bar: f64, norms: &DataNorms) -> f64 {
    (6.0 * c_bar).powi(7) * (1.0 + norms.v0.powi(7) + norms.w0 + norms.w1)
}

/// Parameters with the default exponent `s = 1.52`, `ε0 = 0.04`.
pub fn compute_parameters(engine: &NormEngine, data: &InitialData, c_bar: f64) -> Result<SchemeParameters, FsiError> {
    compute_parameters_with(engine, data, c_bar, DEFAULT_S, DEFAULT_EPSILON0)
}

/// `M` from the data norms and `T̃ = M⁻⁶`.
pub fn compute_parameters_with(
    engine: &NormEngine,
    data: &InitialData,
    c_bar: f64,
    s: f64,
    epsilon0: f64,
) -> Result<SchemeParameters, FsiError> {
    if !(epsilon0 > 0.0 && epsilon0 < 0.05) {
        return Err(FsiError::Parameter("epsilon0 outside (0, 1/20)"));
    }
    if !(s > 1.5 && s < 1.5 + epsilon0) {
        return Err(FsiError::Parameter("s outside (3/2, 3/2 + epsilon0)"));
    }
    if !(c_bar >= 1.0 && c_bar.is_finite()) {
        return Err(FsiError::Parameter("C-bar below 1"));
    }
    let data_norms = DataNorms::measure(engine, data, s)?;
    let m = size_bound(c_bar, &data_norms);
    if !m.is_finite() {
        return Err(FsiError::Parameter("data norms are not finite"));
    }
    let t_tilde = m.powi(-6);
    assert!(t_tilde <= 0.25, "M >= 6^7 forces T~ <= 1/4");
    Ok(SchemeParameters {
        s,
        epsilon0,
        c_bar,
        m,
        t_tilde,
        steepness: 1.0,
        off_theory: false,
        tol: 1e-8,
        max_iter: 30,
        data_norms,
    })
}

impl SchemeParameters {
    /// Replaces `T̃` and flags the parameters as off-theory.
    pub fn with_t_tilde(mut self, t_tilde: f64) -> Result<Self, FsiError> {
        if !(t_tilde > 0.0 && t_tilde <= 0.25) {
            return Err(FsiError::CutoffTime(t_tilde));
        }
        self.t_tilde = t_tilde;
        self.off_theory = true;
        Ok(self)
    }

    pub fn cutoff(&self) -> Result<crate::fields::CutoffFunction, FsiError> {
        Ok(crate::fields::make_cutoff(self.t_tilde, self.steepness)?)
    }

    /// The `K^{s+1}` norm specification used for iterates.
    pub fn iterate_norm(&self) -> NormSpec {
        NormSpec::k(self.s + 1.0, Layer::Fluid)
    }
}

/// Shared, solver-independent context of one coupled problem.
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    pub geom: ChannelGeometry,
    pub data: InitialData,
    pub engine: NormEngine,
    pub fluid: crate::fields::Deriv,
    /// Initial pressure of the data, one time sample.
    pub q0: SpaceTimeField,
}

impl CoupledProblem {
    pub fn new(geom: &ChannelGeometry, data: InitialData) -> Result<Self, FsiError> {
        data.check(geom)?;
        let q0 = crate::stokes::initial_pressure(geom, &data.v0, &data.w0)?.q0;
        Ok(Self {
            geom: geom.clone(),
            engine: NormEngine::new(geom),
            fluid: crate::fields::Deriv::for_layer(geom, Layer::Fluid),
            data,
            q0,
        })
    }

    /// Fails unless `v(0) = v0` and `v = 0` on the outer walls.
    pub fn check_member(&self, v: &SpaceTimeField) -> Result<(), FsiError> {
        let start = max_diff(v.slice(0), self.data.v0.slice(0));
        if start > MEMBERSHIP_TOL {
            return Err(FsiError::Membership { what: "v(0) = v0", value: start });
        }
        let walls = v.wall_trace(&self.geom).max_abs();
        if walls > MEMBERSHIP_TOL {
            return Err(FsiError::Membership { what: "v = 0 on the outer walls", value: walls });
        }
        Ok(())
    }

    /// Elastic boundary displacement `w0 + ∫₀ᵗ ψ v` on both planes at every
    /// level.
    pub fn boundary_displacement(&self, v: &SpaceTimeField, psi: &crate::fields::CutoffFunction) -> SpaceTimeField {
        let integral = crate::fields::cutoff_integral(&v.interface_trace(&self.geom), psi);
        let base = self.data.w0.interface_trace(&self.geom);
        let nt = self.geom.nt();
        let mut out = SpaceTimeField::zeros(Layer::Interface, nt + 1, self.geom.nx(), self.geom.ny(), 2, 3);
        for n in 0..=nt {
            let src = integral.slice(n.min(integral.time_samples() - 1));
            for ((o, a), b) in out.slice_mut(n).iter_mut().zip(src).zip(base.slice(0)) {
                *o = a + b;
            }
        }
        out
    }

    /// Wave problem whose boundary data follow the iterate `v`.
    pub fn wave_problem(&self, v: &SpaceTimeField, psi: &crate::fields::CutoffFunction) -> crate::wave::WaveProblem {
        crate::wave::WaveProblem {
            w0: self.data.w0.clone(),
            w1: self.data.w1.clone(),
            psi: self.boundary_displacement(v, psi),
            psi_rate: Some(self.data.v0.interface_trace(&self.geom)),
        }
    }
}

/// Replaces the first pressure level, which the time stepper does not
/// determine, by the initial pressure of the data.
pub(crate) fn pin_initial_pressure(problem: &CoupledProblem, q: &mut SpaceTimeField) {
    q.slice_mut(0).copy_from_slice(problem.q0.slice(0));
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Outward normal component `N_z` on the interface plane with index `k`.
pub(crate) fn plane_normal(k: usize) -> f64 {
    Plane::BOTH[k].normal_sign()
}
