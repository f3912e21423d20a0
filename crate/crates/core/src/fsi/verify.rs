use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::iterate::IterationState;
use super::{plane_normal, CoupledProblem, FsiError, SchemeParameters};
#[cfg(test)]
use crate::field::SpaceTimeField;
use crate::geometry::Slab;
use crate::wave::normal_trace;

/// Sup and `L²` size of one residual, with the constant `K` of
/// `sup ≤ K (h² + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residual {
    pub sup: f64,
    /// Root mean square over all samples times the square root of the
    /// space-time measure.
    pub l2: f64,
    pub constant: f64,
}

impl Residual {
    fn from_samples(samples: &[f64], measure: f64, scale: f64) -> Self {
        let sup = samples.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mean = samples.iter().map(|r| r * r).sum::<f64>() / samples.len().max(1) as f64;
        Self {
            sup,
            l2: (mean * measure).sqrt(),
            constant: sup / scale,
        }
    }
}

/// Residuals of the coupled system at a computed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledResiduals {
    /// Largest vertical spacing.
    pub h: f64,
    pub dt: f64,
    /// `w_t − ψ v` on the interface.
    pub velocity_matching: Residual,
    /// `∂w/∂N − (a_jl a_ml ∂_m v_k − a_jk q) N^j` on the interface.
    pub stress_matching: Residual,
    /// `a_ji ∂_j v_i` in the fluid.
    pub divergence: Residual,
    /// `∂_i a_ij` in the fluid.
    pub piola: Residual,
}

impl CoupledResiduals {
    pub fn labelled(&self) -> [(&'static str, Residual); 4] {
        [
            ("velocity_matching", self.velocity_matching),
            ("stress_matching", self.stress_matching),
            ("lagrangian_divergence", self.divergence),
            ("piola", self.piola),
        ]
    }
}

/// Measures the four coupling residuals of `state`.
pub fn verify_coupled_solution(
    problem: &CoupledProblem,
    state: &IterationState,
    params: &SchemeParameters,
) -> Result<CoupledResiduals, FsiError> {
    let geom = &problem.geom;
    let deriv = &problem.fluid;
    let psi = params.cutoff()?;
    let nt = geom.nt();
    let h = [Slab::LowerFluid, Slab::Elastic, Slab::UpperFluid]
        .iter()
        .map(|&s| geom.spacing(s))
        .fold(0.0, f64::max);
    let dt = geom.dt();
    let scale = h * h + dt;
    let area = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
    let [l1, l2, l3] = geom.lengths();
    let (interface_measure, fluid_measure) = (2.0 * area, area * (l1 + l3 - l2));

    let wt = state.w_t.interface_trace(geom);
    let v_planes = state.v.interface_trace(geom);
    let mut matching = Vec::with_capacity(wt.as_slice().len());
    for n in 0..=nt {
        let cut = psi.value(geom.time(n));
        matching.extend(wt.slice(n).iter().zip(v_planes.slice(n)).map(|(a, b)| a - cut * b));
    }

    let trace = normal_trace(geom, &state.w);
    let np = deriv.points();
    let nz = deriv.nz();
    let rows = [
        geom.fluid_interface_index(crate::geometry::Plane::Lower),
        geom.fluid_interface_index(crate::geometry::Plane::Upper),
    ];
    let mut stress = Vec::with_capacity(trace.as_slice().len());
    let mut divergence = Vec::with_capacity(np * (nt + 1));
    let mut piola = Vec::with_capacity(np * 3 * (nt + 1));
    let mut plane_res = vec![0.0; geom.plane_len() * 2 * 3];
    for n in 0..=nt {
        let a = state.flow.cofactor(n);
        let grad = deriv.gradient(state.v.slice(n), 3);
        let q = state.q.slice(n);
        for p in 0..np {
            let (a, g) = (&a[9 * p..9 * p + 9], &grad[9 * p..9 * p + 9]);
            divergence.push((0..3).flat_map(|j| (0..3).map(move |i| a[3 * j + i] * g[3 * i + j])).sum());
        }
        let tr = trace.slice(n);
        for col in 0..geom.plane_len() {
            for (k, &iz) in rows.iter().enumerate() {
                let p = col * nz + iz;
                let (a, g) = (&a[9 * p..9 * p + 9], &grad[9 * p..9 * p + 9]);
                for c in 0..3 {
                    let mut s = 0.0;
                    for m in 0..3 {
                        let b: f64 = (0..3).map(|l| a[6 + l] * a[3 * m + l]).sum();
                        s += b * g[3 * c + m];
                    }
                    s -= a[6 + c] * q[p];
                    let idx = (col * 2 + k) * 3 + c;
                    plane_res[idx] = tr[idx] - plane_normal(k) * s;
                }
            }
        }
        stress.extend_from_slice(&plane_res);
        piola.extend(deriv.row_divergence(a));
    }
    Ok(CoupledResiduals {
        h,
        dt,
        velocity_matching: Residual::from_samples(&matching, interface_measure, scale),
        stress_matching: Residual::from_samples(&stress, interface_measure, scale),
        divergence: Residual::from_samples(&divergence, fluid_measure, scale),
        piola: Residual::from_samples(&piola, fluid_measure, scale),
    })
}

/// Adds `delta` to `w_t` on both interface planes at every level.
#[cfg(test)]
pub(crate) fn corrupt_interface_velocity(problem: &CoupledProblem, w_t: &mut SpaceTimeField, delta: f64) {
    let geom = &problem.geom;
    let rows = crate::geometry::Plane::BOTH.map(|p| geom.elastic_interface_index(p));
    for n in 0..w_t.time_samples() {
        for ix in 0..geom.nx() {
            for iy in 0..geom.ny() {
                for &iz in &rows {
                    for c in 0..3 {
                        let v = w_t.get(n, ix, iy, iz, c);
                        w_t.set(n, ix, iy, iz, c, v + delta);
                    }
                }
            }
        }
    }
}
