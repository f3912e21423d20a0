//! Manufactured Stokes solution used for refinement studies.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::{StokesData, StokesError, StokesSolver, TimeScheme};
use crate::geometry::{build_geometry, ChannelGeometry, GeometryConfig, Plane};

/// `u = (cos t sin x cos z, 0, −cos t cos x sin z)`, `p = cos t cos x cos z`,
/// which is divergence free; forcing and boundary data follow by
/// substitution.
#[derive(Debug, Clone)]
pub struct ManufacturedStokes {
    geom: ChannelGeometry,
}

impl ManufacturedStokes {
    pub fn new(geom: &ChannelGeometry) -> Self {
        Self { geom: geom.clone() }
    }

    pub fn velocity(t: f64, x: f64, z: f64) -> [f64; 3] {
        [t.cos() * x.sin() * z.cos(), 0.0, -t.cos() * x.cos() * z.sin()]
    }

    pub fn pressure(t: f64, x: f64, z: f64) -> f64 {
        t.cos() * x.cos() * z.cos()
    }

    fn forcing_at(t: f64, x: f64, z: f64) -> [f64; 3] {
        [
            x.sin() * z.cos() * (t.cos() - t.sin()),
            0.0,
            x.cos() * z.sin() * (t.sin() - 3.0 * t.cos()),
        ]
    }

    /// `∂u/∂N − pN` on an interface plane.
    fn traction_at(t: f64, x: f64, z: f64, nz: f64) -> [f64; 3] {
        let du1 = -t.cos() * x.sin() * z.sin();
        let du3 = -t.cos() * x.cos() * z.cos();
        [nz * du1, 0.0, nz * du3 - Self::pressure(t, x, z) * nz]
    }

    fn fill<F: Fn(f64, f64, f64) -> [f64; 3]>(&self, zs: &[f64], out: &mut [f64], f: F) {
        let g = &self.geom;
        let nz = zs.len();
        for ix in 0..g.nx() {
            for iy in 0..g.ny() {
                let p = ix * g.ny() + iy;
                for (iz, &z) in zs.iter().enumerate() {
                    let v = f(g.x(ix), g.y(iy), z);
                    out[(p * nz + iz) * 3..(p * nz + iz) * 3 + 3].copy_from_slice(&v);
                }
            }
        }
    }

    fn fluid_z(&self) -> Vec<f64> {
        crate::field::layer_z(&self.geom, crate::Layer::Fluid)
    }
}

impl StokesData for ManufacturedStokes {
    fn forcing(&self, n: usize, out: &mut [f64]) {
        let t = self.geom.time(n);
        self.fill(&self.fluid_z(), out, |x, _, z| Self::forcing_at(t, x, z));
    }

    fn divergence(&self, _n: usize, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn traction(&self, n: usize, out: &mut [f64]) {
        let t = self.geom.time(n);
        let [l1, l2, _] = self.geom.lengths();
        let g = &self.geom;
        for p in 0..g.plane_len() {
            let x = g.x(p / g.ny());
            for (k, (z, plane)) in [(l1, Plane::Lower), (l2, Plane::Upper)].into_iter().enumerate() {
                let v = Self::traction_at(t, x, z, plane.normal_sign());
                out[(p * 2 + k) * 3..(p * 2 + k) * 3 + 3].copy_from_slice(&v);
            }
        }
    }

    fn wall(&self, n: usize, out: &mut [f64]) {
        let t = self.geom.time(n);
        let [_, _, l3] = self.geom.lengths();
        self.fill(&[0.0, l3], out, |x, _, z| Self::velocity(t, x, z));
    }

    fn initial_velocity(&self, out: &mut [f64]) {
        self.fill(&self.fluid_z(), out, |x, _, z| Self::velocity(0.0, x, z));
    }
}

/// Errors of one refinement level: velocity over all nodes and levels
/// `n ≥ 1`, pressure over all nodes at `t = 1` (the first steps carry a
/// pressure transient from the cell-averaged initial velocity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsLevel {
    pub intervals: usize,
    pub h: f64,
    pub dt: f64,
    pub velocity_error: f64,
    pub pressure_error: f64,
    pub divergence_residual: f64,
    pub momentum_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsStudy {
    pub levels: Vec<MmsLevel>,
    pub velocity_orders: Vec<f64>,
    pub pressure_orders: Vec<f64>,
}

impl MmsStudy {
    pub fn min_velocity_order(&self) -> f64 {
        self.velocity_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn orders(levels: &[MmsLevel], e: impl Fn(&MmsLevel) -> f64) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| (e(&w[0]) / e(&w[1])).ln() / (w[0].h / w[1].h).ln())
        .collect()
}

/// Runs the manufactured solution on fluid slabs of unit depth with
/// `intervals` cells each, `nx = ny = 4` and `dt = h²`.
pub fn stokes_mms_study(intervals: &[usize], scheme: TimeScheme) -> Result<MmsStudy, StokesError> {
    let mut levels = Vec::with_capacity(intervals.len());
    for &n in intervals {
        let geom = build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 4, 4, [n, 4, n], n * n))
            .map_err(|_| StokesError::Shape("refinement level"))?;
        let data = ManufacturedStokes::new(&geom);
        let solver = StokesSolver::new(&geom, scheme)?;
        let zs = data.fluid_z();
        let nz = zs.len();
        let (mut eu, mut ep) = (0.0f64, 0.0f64);
        let res = solver.run(&data, |level| {
            if level.n == 0 {
                return;
            }
            let t = geom.time(level.n);
            for ix in 0..geom.nx() {
                let x = geom.x(ix);
                for iy in 0..geom.ny() {
                    let p = ix * geom.ny() + iy;
                    for (iz, &z) in zs.iter().enumerate() {
                        let exact = ManufacturedStokes::velocity(t, x, z);
                        for c in 0..3 {
                            eu = eu.max((level.u[(p * nz + iz) * 3 + c] - exact[c]).abs());
                        }
                        if level.n == geom.nt() {
                            ep = ep.max((level.p[p * nz + iz] - ManufacturedStokes::pressure(t, x, z)).abs());
                        }
                    }
                }
            }
        })?;
        levels.push(MmsLevel {
            intervals: n,
            h: 1.0 / n as f64,
            dt: geom.dt(),
            velocity_error: eu,
            pressure_error: ep,
            divergence_residual: res.divergence,
            momentum_residual: res.momentum,
        });
    }
    Ok(MmsStudy {
        velocity_orders: orders(&levels, |l| l.velocity_error),
        pressure_orders: orders(&levels, |l| l.pressure_error),
        levels,
    })
}
