use alloc::vec;

use super::linear::traction;
use super::{pin_initial_pressure, plane_normal, CoupledProblem, FsiError, SchemeParameters};
use crate::field::{Layer, SpaceTimeField};
use crate::fields::{flow_map, Deriv, FlowMapState};
use crate::geometry::ChannelGeometry;
use crate::stokes::{
    divergence_decomposition, lagrangian_divergence_target, solve_stokes_on, DivergenceDecomposition, GHistory,
    StokesProblem, StokesResiduals, StokesSolver,
};
use crate::wave::{normal_trace, WaveSolver};

/// Variable-coefficient forcing built from a flow map and a velocity /
/// pressure pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearForcing {
    /// `f_k = ∂_j((a_jl a_ml − δ_jm) ∂_m v_k) − ∂_j((a_jk − δ_jk) q)`.
    pub f: SpaceTimeField,
    /// `g = −∂_j((a_ji − δ_ji) v_i)`.
    pub g: SpaceTimeField,
    /// `h_k = −(a_jl a_ml − δ_jm) ∂_m v_k N^j + (a_jk − δ_jk) q N^j`.
    pub h: SpaceTimeField,
    /// `(g̃, b)` with `∂_t g = g̃ + div b`, `g̃ = 0`.
    pub decomposition: DivergenceDecomposition,
}

/// Flux `T_jk = (a aᵀ − I)_jm ∂_m v_k − (a_jk − δ_jk) q` at one level,
/// stored at `3 j + k`.
fn stress_flux(deriv: &Deriv, a: &[f64], v: &[f64], q: &[f64]) -> vec::Vec<f64> {
    let np = deriv.points();
    let grad = deriv.gradient(v, 3);
    let mut t = vec![0.0; np * 9];
    for p in 0..np {
        let a = &a[9 * p..9 * p + 9];
        let gv = &grad[9 * p..9 * p + 9];
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    let b = (0..3).map(|l| a[3 * j + l] * a[3 * m + l]).sum::<f64>() - delta(j, m);
                    s += b * gv[3 * k + m];
                }
                t[9 * p + 3 * j + k] = s - (a[3 * j + k] - delta(j, k)) * q[p];
            }
        }
    }
    t
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Builds `(f, g, h, b)` from the flow map and the pair `(v, q)`, both with
/// `nt + 1` samples on the fluid layer.
pub fn assemble_nonlinear_forcing(
    geom: &ChannelGeometry,
    deriv: &Deriv,
    flow: &FlowMapState,
    v: &SpaceTimeField,
    q: &SpaceTimeField,
) -> Result<NonlinearForcing, FsiError> {
    flow.check_invertible()?;
    let nt1 = v.time_samples();
    if q.time_samples() != nt1 || flow.time_steps() + 1 != nt1 {
        return Err(FsiError::Parameter("forcing inputs live on different time grids"));
    }
    let mut f = SpaceTimeField::zeros_on(geom, Layer::Fluid, 3);
    let mut flux = SpaceTimeField::zeros_on(geom, Layer::Fluid, 9);
    for n in 0..nt1 {
        let t = stress_flux(deriv, flow.cofactor(n), v.slice(n), q.slice(n));
        f.slice_mut(n).copy_from_slice(&deriv.row_divergence(&t));
        flux.slice_mut(n).copy_from_slice(&t);
    }
    let on_planes = flux.interface_trace(geom);
    let mut h = SpaceTimeField::zeros_on(geom, Layer::Interface, 3);
    for n in 0..nt1 {
        let src = on_planes.slice(n);
        let out = h.slice_mut(n);
        for p in 0..geom.plane_len() {
            for k in 0..2 {
                for c in 0..3 {
                    out[(p * 2 + k) * 3 + c] = -plane_normal(k) * src[(p * 2 + k) * 9 + 6 + c];
                }
            }
        }
    }
    Ok(NonlinearForcing {
        f,
        g: lagrangian_divergence_target(deriv, flow, v),
        h,
        decomposition: divergence_decomposition(deriv, GHistory::Lagrangian { flow, velocity: v }),
    })
}

/// Output of one application of `Π`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiStep {
    pub v: SpaceTimeField,
    pub q: SpaceTimeField,
    pub w: SpaceTimeField,
    pub w_t: SpaceTimeField,
    pub trace: SpaceTimeField,
    /// Flow map of the input iterate.
    pub flow: FlowMapState,
    pub stokes: StokesResiduals,
    /// `‖v‖_{K^{s+1}} / M` of the input iterate; above one is a warning.
    pub size_ratio: f64,
}

/// One application of the nonlinear map to the iterate `(v, q)`: flow
/// map, wave solve, normal trace, forcing from `(v, q)`, Stokes solve.
pub fn nonlinear_pi_step(
    problem: &CoupledProblem,
    v: &SpaceTimeField,
    q: &SpaceTimeField,
    params: &SchemeParameters,
) -> Result<PiStep, FsiError> {
    let wave = WaveSolver::new(&problem.geom, Default::default())?;
    let stokes = StokesSolver::new(&problem.geom, Default::default())?;
    pi_with(problem, &wave, &stokes, v, q, params)
}

pub(crate) fn pi_with(
    problem: &CoupledProblem,
    wave: &WaveSolver,
    stokes: &StokesSolver,
    v: &SpaceTimeField,
    q: &SpaceTimeField,
    params: &SchemeParameters,
) -> Result<PiStep, FsiError> {
    problem.check_member(v)?;
    let geom = &problem.geom;
    let psi = params.cutoff()?;
    let size = problem.engine.norm(v, params.iterate_norm())?.value;
    let flow = flow_map(&problem.fluid, v, &psi)?;
    flow.check_invertible()?;
    let elastic = wave.solve(&problem.wave_problem(v, &psi))?;
    let trace = normal_trace(geom, &elastic.w);
    let forcing = assemble_nonlinear_forcing(geom, &problem.fluid, &flow, v, q)?;
    let sp = StokesProblem {
        f: forcing.f,
        g: forcing.g,
        decomposition: Some(forcing.decomposition),
        h1: traction(&trace, &forcing.h),
        h2: SpaceTimeField::static_on(geom, Layer::OuterBoundary, 3),
        u0: problem.data.v0.clone(),
    };
    let mut fluid = solve_stokes_on(stokes, &sp)?;
    pin_initial_pressure(problem, &mut fluid.p);
    Ok(PiStep {
        v: fluid.u,
        q: fluid.p,
        w: elastic.w,
        w_t: elastic.w_t,
        trace,
        flow,
        stokes: fluid.residuals,
        size_ratio: size / params.m,
    })
}
