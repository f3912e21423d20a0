//! Wave equation `w_tt − Δw = 0` on the elastic slab with Dirichlet data on
//! both interface planes.
//!
//! Horizontal Fourier modes decouple; each mode is a 1D problem in `z`
//! discretised with second-order central differences. Boundary nodes are
//! pinned to the data.

mod hidden;
mod solver;
mod study;

use thiserror::Error;

use crate::field::{Layer, SpaceTimeField};
use crate::geometry::ChannelGeometry;

pub use hidden::{hidden_regularity_report, random_boundary_problem, TraceBalance, TraceReport};
pub use solver::{cfl_number, normal_trace, steps_for_cfl, WaveSolver};
pub use study::{random_homogeneous_problem, wave_mms_study, StandingWave, WaveLevel, WaveStudy};

/// Compatibility mismatches above this are errors.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Largest admissible CFL number of the explicit scheme.
pub const CFL_LIMIT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("CFL number {number} exceeds {limit}")]
    Cfl { number: f64, limit: f64 },
    #[error("boundary data differ from the initial data on the interface by {0:e}")]
    Compatibility(f64),
    #[error("time step {given} does not match the grid step {expected}")]
    TimeStep { given: f64, expected: f64 },
    #[error("{0} has the wrong shape")]
    Shape(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveScheme {
    /// Explicit leapfrog.
    #[default]
    Leapfrog,
    /// Implicit average `(¼, ½, ¼)` of the stiffness over three levels.
    Implicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    /// Initial displacement (elastic layer, three components).
    pub w0: SpaceTimeField,
    /// Initial velocity.
    pub w1: SpaceTimeField,
    /// Dirichlet data on both planes (interface layer); one sample means
    /// constant in time.
    pub psi: SpaceTimeField,
    /// `∂_t ψ` at `t = 0`, when known exactly. Otherwise it is estimated by
    /// a second-order one-sided difference.
    pub psi_rate: Option<SpaceTimeField>,
}

impl WaveProblem {
    pub fn zero(geom: &ChannelGeometry) -> Self {
        Self {
            w0: SpaceTimeField::static_on(geom, Layer::Elastic, 3),
            w1: SpaceTimeField::static_on(geom, Layer::Elastic, 3),
            psi: SpaceTimeField::static_on(geom, Layer::Interface, 3),
            psi_rate: None,
        }
    }

    /// Homogeneous Dirichlet problem with the given initial data.
    pub fn homogeneous(geom: &ChannelGeometry, w0: SpaceTimeField, w1: SpaceTimeField) -> Self {
        Self { w0, w1, ..Self::zero(geom) }
    }

    fn check(&self, geom: &ChannelGeometry) -> Result<(), WaveError> {
        let ok = |f: &SpaceTimeField, layer: Layer, timed: bool| {
            let [nt, nx, ny, nz, c] = f.dims();
            f.layer() == layer
                && (nt == 1 || (timed && nt == geom.nt() + 1))
                && [nx, ny, nz, c] == [geom.nx(), geom.ny(), layer.nz(geom), 3]
        };
        let rate_ok = self.psi_rate.as_ref().map_or(true, |r| ok(r, Layer::Interface, false));
        let checks = [
            (ok(&self.w0, Layer::Elastic, false), "initial displacement"),
            (ok(&self.w1, Layer::Elastic, false), "initial velocity"),
            (ok(&self.psi, Layer::Interface, true), "boundary data"),
            (rate_ok, "boundary rate"),
        ];
        match checks.iter().find(|(good, _)| !good) {
            Some((_, what)) => Err(WaveError::Shape(what)),
            None => Ok(()),
        }
    }

    /// Largest mismatch of `ψ(0)` against `w0` and of `∂_tψ(0)` against
    /// `w1` on the interface.
    pub fn compatibility_defect(&self, geom: &ChannelGeometry) -> f64 {
        let w0 = self.w0.interface_trace(geom);
        let w1 = self.w1.interface_trace(geom);
        let value = max_diff(self.psi.slice(0), w0.slice(0));
        let rate = match (&self.psi_rate, self.psi.time_samples()) {
            (Some(r), _) => max_diff(r.slice(0), w1.slice(0)),
            (None, 1) => w1.max_abs(),
            (None, _) => {
                let dt = geom.dt();
                let (p0, p1, p2) = (self.psi.slice(0), self.psi.slice(1), self.psi.slice(2));
                p0.iter()
                    .zip(p1)
                    .zip(p2)
                    .zip(w1.slice(0))
                    .map(|(((a, b), c), v)| ((-3.0 * a + 4.0 * b - c) / (2.0 * dt) - v).abs())
                    .fold(0.0, f64::max)
            }
        };
        value.max(rate)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveSolution {
    /// Displacement at every time level.
    pub w: SpaceTimeField,
    /// Velocity: the initial velocity at `t = 0`, centred differences
    /// inside, a second-order one-sided difference at `t = 1`.
    pub w_t: SpaceTimeField,
    /// Conserved discrete energy of the scheme at the half levels
    /// `t_{n+1/2}`, `n = 0..nt`.
    pub energy: alloc::vec::Vec<f64>,
    /// Compatibility mismatch that was accepted as a warning (zero when the
    /// data are exactly compatible).
    pub compatibility_warning: f64,
    pub cfl: f64,
}

impl WaveSolution {
    /// `max_n |E_n − E_0| / E_0`, zero for zero energy.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().map(|e| (e - e0).abs() / e0.abs()).fold(0.0, f64::max)
    }
}

/// Solves on the time grid of `geom`; `dt` must equal the grid step.
pub fn solve_wave(problem: &WaveProblem, geom: &ChannelGeometry, dt: f64) -> Result<WaveSolution, WaveError> {
    solve_wave_with(problem, geom, dt, WaveScheme::default())
}

pub fn solve_wave_with(
    problem: &WaveProblem,
    geom: &ChannelGeometry,
    dt: f64,
    scheme: WaveScheme,
) -> Result<WaveSolution, WaveError> {
    if (dt - geom.dt()).abs() > 1e-14 * geom.dt() {
        return Err(WaveError::TimeStep { given: dt, expected: geom.dt() });
    }
    WaveSolver::new(geom, scheme)?.solve(problem)
}
