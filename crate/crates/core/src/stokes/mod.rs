//! Time-dependent Stokes problem with nonhomogeneous divergence on the two
//! fluid slabs: traction data on the interface planes, Dirichlet data on the
//! outer walls.
//!
//! Every horizontal Fourier mode decouples into a 1D saddle-point system in
//! `z`. The vertical grid is staggered: the vertical velocity lives on the
//! grid nodes, the horizontal velocity and the pressure on cell centres.
//! Output fields are interpolated back to the nodes.

mod decomposition;
mod mms;
mod pressure;
mod regularity;
mod scheme;

use alloc::vec;

use thiserror::Error;

use crate::field::{Layer, SpaceTimeField};
use crate::geometry::ChannelGeometry;

pub use decomposition::{
    decomposition_defect, divergence_decomposition, lagrangian_divergence_target, DivergenceDecomposition, GHistory,
};
pub use mms::{stokes_mms_study, ManufacturedStokes, MmsLevel, MmsStudy};
pub use pressure::{initial_pressure, InitialPressure};
pub use regularity::{maximal_regularity_ratio, RegularityRatio};
pub use scheme::{StokesLevel, StokesSolver};

/// Largest allowed mismatch between `u0` and the wall data at `t = 0`.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StokesError {
    #[error("saddle-point block of mode ({kx}, {ky}) in the {slab} slab is singular at column {column}")]
    Singular { kx: f64, ky: f64, slab: &'static str, column: usize },
    #[error("initial velocity differs from the wall data by {0:e}")]
    Compatibility(f64),
    #[error("time step {given} does not match the grid step {expected}")]
    TimeStep { given: f64, expected: f64 },
    #[error("{0} has the wrong shape")]
    Shape(&'static str),
    #[error("divergence of the initial velocity is {0:e}")]
    Divergence(f64),
}

/// Time discretisation of the Stokes solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

impl TimeScheme {
    pub fn theta(self) -> f64 {
        match self {
            TimeScheme::ImplicitEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        }
    }
}

/// Time-level access to the data of a Stokes problem. Slices use the field
/// layout of the corresponding layer.
pub trait StokesData {
    /// Body force `f` (three components, fluid layer).
    fn forcing(&self, n: usize, out: &mut [f64]);
    /// Divergence target `g` (fluid layer).
    fn divergence(&self, n: usize, out: &mut [f64]);
    /// Traction data `h1` with `∂u/∂N − pN = h1` (interface layer).
    fn traction(&self, n: usize, out: &mut [f64]);
    /// Wall values `h2` (outer-boundary layer).
    fn wall(&self, n: usize, out: &mut [f64]);
    /// Initial velocity (fluid layer).
    fn initial_velocity(&self, out: &mut [f64]);
}

/// Stokes data stored as fields. Data fields may hold a single time sample,
/// which is then used at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesProblem {
    pub f: SpaceTimeField,
    pub g: SpaceTimeField,
    pub decomposition: Option<DivergenceDecomposition>,
    pub h1: SpaceTimeField,
    pub h2: SpaceTimeField,
    pub u0: SpaceTimeField,
}

impl StokesProblem {
    /// All data zero.
    pub fn zero(geom: &ChannelGeometry) -> Self {
        Self {
            f: SpaceTimeField::static_on(geom, Layer::Fluid, 3),
            g: SpaceTimeField::static_on(geom, Layer::Fluid, 1),
            decomposition: None,
            h1: SpaceTimeField::static_on(geom, Layer::Interface, 3),
            h2: SpaceTimeField::static_on(geom, Layer::OuterBoundary, 3),
            u0: SpaceTimeField::static_on(geom, Layer::Fluid, 3),
        }
    }

    fn check(&self, geom: &ChannelGeometry) -> Result<(), StokesError> {
        let ok = |f: &SpaceTimeField, layer: Layer, nc: usize| {
            let [nt, nx, ny, nz, c] = f.dims();
            f.layer() == layer
                && (nt == 1 || nt == geom.nt() + 1)
                && [nx, ny, nz, c] == [geom.nx(), geom.ny(), layer.nz(geom), nc]
        };
        let checks = [
            (ok(&self.f, Layer::Fluid, 3), "forcing"),
            (ok(&self.g, Layer::Fluid, 1), "divergence target"),
            (ok(&self.h1, Layer::Interface, 3), "traction data"),
            (ok(&self.h2, Layer::OuterBoundary, 3), "wall data"),
            (ok(&self.u0, Layer::Fluid, 3) && self.u0.time_samples() == 1, "initial velocity"),
        ];
        match checks.iter().find(|(good, _)| !good) {
            Some((_, what)) => Err(StokesError::Shape(what)),
            None => Ok(()),
        }
    }
}

fn level(f: &SpaceTimeField, n: usize) -> &[f64] {
    f.slice(if f.time_samples() == 1 { 0 } else { n })
}

impl StokesData for StokesProblem {
    fn forcing(&self, n: usize, out: &mut [f64]) {
        out.copy_from_slice(level(&self.f, n));
    }

    fn divergence(&self, n: usize, out: &mut [f64]) {
        out.copy_from_slice(level(&self.g, n));
    }

    fn traction(&self, n: usize, out: &mut [f64]) {
        out.copy_from_slice(level(&self.h1, n));
    }

    fn wall(&self, n: usize, out: &mut [f64]) {
        out.copy_from_slice(level(&self.h2, n));
    }

    fn initial_velocity(&self, out: &mut [f64]) {
        out.copy_from_slice(self.u0.slice(0));
    }
}

/// Largest algebraic residuals of the per-mode systems over all steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StokesResiduals {
    /// Momentum rows, per unit cell volume.
    pub momentum: f64,
    /// Staggered `div u − g` at cell centres.
    pub divergence: f64,
    /// Wall and traction rows.
    pub boundary: f64,
}

impl StokesResiduals {
    pub fn max(&self) -> f64 {
        self.momentum.max(self.divergence).max(self.boundary)
    }

    fn merge(&mut self, other: &Self) {
        self.momentum = self.momentum.max(other.momentum);
        self.divergence = self.divergence.max(other.divergence);
        self.boundary = self.boundary.max(other.boundary);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSolution {
    /// Velocity at the fluid nodes, `nt + 1` samples.
    pub u: SpaceTimeField,
    /// Pressure at the fluid nodes. The `t = 0` sample is extrapolated
    /// linearly from the first two steps.
    pub p: SpaceTimeField,
    pub residuals: StokesResiduals,
}

/// Solves the Stokes problem on the time grid of `geom`. `dt` must equal the
/// grid step.
pub fn solve_stokes(problem: &StokesProblem, geom: &ChannelGeometry, dt: f64) -> Result<StokesSolution, StokesError> {
    solve_stokes_with(problem, geom, dt, TimeScheme::default())
}

pub fn solve_stokes_with(
    problem: &StokesProblem,
    geom: &ChannelGeometry,
    dt: f64,
    scheme: TimeScheme,
) -> Result<StokesSolution, StokesError> {
    if (dt - geom.dt()).abs() > 1e-14 * geom.dt() {
        return Err(StokesError::TimeStep { given: dt, expected: geom.dt() });
    }
    solve_stokes_on(&StokesSolver::new(geom, scheme)?, problem)
}

/// Solves with an already factored solver.
pub fn solve_stokes_on(solver: &StokesSolver, problem: &StokesProblem) -> Result<StokesSolution, StokesError> {
    let geom = solver.geometry();
    problem.check(geom)?;
    let mut u = SpaceTimeField::zeros_on(geom, Layer::Fluid, 3);
    let mut p = SpaceTimeField::zeros_on(geom, Layer::Fluid, 1);
    let residuals = solver.run(problem, |level| {
        u.slice_mut(level.n).copy_from_slice(level.u);
        p.slice_mut(level.n).copy_from_slice(level.p);
    })?;
    Ok(StokesSolution { u, p, residuals })
}

/// Largest `|u0 − h2(0)|` over the outer walls.
pub fn compatibility_defect<D: StokesData + ?Sized>(data: &D, geom: &ChannelGeometry) -> f64 {
    let fluid_len = geom.plane_len() * geom.fluid_nz() * 3;
    let mut u0 = vec![0.0; fluid_len];
    data.initial_velocity(&mut u0);
    let mut h2 = vec![0.0; geom.plane_len() * 2 * 3];
    data.wall(0, &mut h2);
    let nz = geom.fluid_nz();
    let mut worst: f64 = 0.0;
    for p in 0..geom.plane_len() {
        for (k, iz) in [geom.fluid_wall_index(0), geom.fluid_wall_index(1)].into_iter().enumerate() {
            for c in 0..3 {
                worst = worst.max((u0[(p * nz + iz) * 3 + c] - h2[(p * 2 + k) * 3 + c]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryConfig};
    use crate::norms::NormEngine;
    #[allow(unused_imports)]
    use num_traits::Float;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(nz: usize, nt: usize) -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 4, 4, [nz, 4, nz], nt)).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = geom(8, 8);
        let sol = solve_stokes(&StokesProblem::zero(&g), &g, g.dt()).unwrap();
        assert_eq!(sol.u.max_abs() + sol.p.max_abs(), 0.0);
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        for scheme in [TimeScheme::ImplicitEuler, TimeScheme::CrankNicolson] {
            let study = stokes_mms_study(&[8, 16, 32], scheme).unwrap();
            assert!(study.min_velocity_order() >= 1.8, "{scheme:?} {:?}", study.velocity_orders);
            assert!(study.pressure_orders.iter().all(|&o| o >= 1.5), "{scheme:?} {:?}", study.pressure_orders);
            assert!(study.levels.iter().all(|l| l.divergence_residual < 1e-10));
        }
    }

    #[test]
    fn divergence_target_is_met() {
        let g = geom(16, 8);
        let mut problem = StokesProblem::zero(&g);
        // g = div w̄ for w̄ = (sin x · z, 0, cos y · z²)
        problem.g = SpaceTimeField::from_fn(&g, Layer::Fluid, 1, 1, |_, x, y, z, o| {
            o[0] = x.cos() * z + 2.0 * y.cos() * z;
        });
        let sol = solve_stokes(&problem, &g, g.dt()).unwrap();
        assert!(sol.residuals.divergence < 1e-10, "{:?}", sol.residuals);
        assert!(sol.residuals.max() < 1e-9, "{:?}", sol.residuals);
        let d = crate::fields::Deriv::for_layer(&g, Layer::Fluid);
        let grad = d.gradient(sol.u.slice(g.nt()), 3);
        let target = problem.g.slice(0);
        let err = (0..d.points())
            .map(|p| (grad[9 * p] + grad[9 * p + 4] + grad[9 * p + 8] - target[p]).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn energy_decays_without_data() {
        let g = geom(8, 16);
        let mut problem = StokesProblem::zero(&g);
        problem.u0 = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 1, |_, _, y, z, o| {
            o[0] = (core::f64::consts::PI * z / 3.0).sin() * y.cos();
            o[1] = 0.5 * (core::f64::consts::PI * z / 3.0).sin();
        });
        let solver = StokesSolver::new(&g, TimeScheme::ImplicitEuler).unwrap();
        let mut energies = alloc::vec::Vec::new();
        solver.run(&problem, |l| energies.push(l.energy)).unwrap();
        assert!(energies[0] > 0.0);
        assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)), "{energies:?}");
    }

    #[test]
    fn rejects_incompatible_walls_and_wrong_step() {
        let g = geom(8, 8);
        let mut problem = StokesProblem::zero(&g);
        problem.u0 = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 1, |_, _, _, _, o| o[0] = 1.0);
        assert_eq!(solve_stokes(&problem, &g, g.dt()).unwrap_err(), StokesError::Compatibility(1.0));
        let zero = StokesProblem::zero(&g);
        assert!(matches!(solve_stokes(&zero, &g, 0.3), Err(StokesError::TimeStep { .. })));
    }

    #[test]
    fn every_mode_factors_for_small_steps() {
        for nt in [4, 10, 10_000] {
            assert!(StokesSolver::new(&geom(8, nt), TimeScheme::ImplicitEuler).is_ok());
        }
    }

    fn random_problem(g: &ChannelGeometry, rng: &mut ChaCha8Rng) -> StokesProblem {
        let mut c = [0.0; 8];
        for v in c.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let mut p = StokesProblem::zero(g);
        p.f = SpaceTimeField::from_fn(g, Layer::Fluid, 3, g.nt() + 1, |t, x, y, z, o| {
            o[0] = c[0] * (x + t).sin() * z;
            o[1] = c[1] * y.cos() * (1.0 + t);
            o[2] = c[2] * (x - y).sin();
        });
        p.h1 = SpaceTimeField::from_fn(g, Layer::Interface, 3, g.nt() + 1, |t, x, y, _, o| {
            o[0] = c[3] * t * x.cos();
            o[2] = c[4] * t * (x + y).sin();
        });
        p.g = SpaceTimeField::from_fn(g, Layer::Fluid, 1, g.nt() + 1, |t, x, _, z, o| {
            o[0] = c[5] * t * x.sin() * z;
        });
        let gs = p.g.clone();
        p.decomposition = Some(divergence_decomposition(
            &crate::fields::Deriv::for_layer(g, Layer::Fluid),
            GHistory::Generic(&gs),
        ));
        p
    }

    #[test]
    fn maximal_regularity_ratio_stays_bounded() {
        let g = geom(8, 16);
        let engine = NormEngine::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ratios = alloc::vec::Vec::new();
        for _ in 0..6 {
            let p = random_problem(&g, &mut rng);
            let sol = solve_stokes(&p, &g, g.dt()).unwrap();
            let r = maximal_regularity_ratio(&engine, &p, &sol, 1.52).unwrap();
            assert!(r.ratio.is_finite() && r.ratio > 0.0);
            ratios.push(r.ratio);
        }
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min < 10.0, "{ratios:?}");
    }
}
