use super::{pin_initial_pressure, CoupledProblem, FsiError, SchemeParameters};
use crate::field::{Layer, SpaceTimeField};
use crate::geometry::ChannelGeometry;
use crate::stokes::{solve_stokes_on, DivergenceDecomposition, StokesProblem, StokesResiduals, StokesSolver};
use crate::wave::{normal_trace, WaveSolver};

/// Fluid data of the linear problem. Fields may hold one time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearData {
    pub f: SpaceTimeField,
    pub g: SpaceTimeField,
    pub decomposition: Option<DivergenceDecomposition>,
    /// Traction data added to the elastic normal derivative.
    pub h: SpaceTimeField,
}

impl LinearData {
    pub fn zero(geom: &ChannelGeometry) -> Self {
        Self {
            f: SpaceTimeField::static_on(geom, Layer::Fluid, 3),
            g: SpaceTimeField::static_on(geom, Layer::Fluid, 1),
            decomposition: None,
            h: SpaceTimeField::static_on(geom, Layer::Interface, 3),
        }
    }
}

/// Output of one application of `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStep {
    pub v: SpaceTimeField,
    pub q: SpaceTimeField,
    pub w: SpaceTimeField,
    pub w_t: SpaceTimeField,
    /// `∂w/∂N` on the interface.
    pub trace: SpaceTimeField,
    pub stokes: StokesResiduals,
}

/// `h1 = ∂w/∂N + h` at every level.
pub(crate) fn traction(trace: &SpaceTimeField, h: &SpaceTimeField) -> SpaceTimeField {
    let mut out = trace.clone();
    for n in 0..out.time_samples() {
        let src = h.slice(if h.time_samples() == 1 { 0 } else { n });
        for (o, x) in out.slice_mut(n).iter_mut().zip(src) {
            *o += x;
        }
    }
    out
}

/// One application of the linear map: wave solve with boundary
/// displacement `w0 + ∫ψ v`, normal trace, then the Stokes solve with
/// traction `∂w/∂N + h`.
pub fn linear_lambda_step(
    problem: &CoupledProblem,
    v: &SpaceTimeField,
    data: &LinearData,
    params: &SchemeParameters,
) -> Result<LambdaStep, FsiError> {
    let wave = WaveSolver::new(&problem.geom, Default::default())?;
    let stokes = StokesSolver::new(&problem.geom, Default::default())?;
    lambda_with(problem, &wave, &stokes, v, data, params)
}

pub(crate) fn lambda_with(
    problem: &CoupledProblem,
    wave: &WaveSolver,
    stokes: &StokesSolver,
    v: &SpaceTimeField,
    data: &LinearData,
    params: &SchemeParameters,
) -> Result<LambdaStep, FsiError> {
    problem.check_member(v)?;
    let psi = params.cutoff()?;
    let elastic = wave.solve(&problem.wave_problem(v, &psi))?;
    let trace = normal_trace(&problem.geom, &elastic.w);
    let sp = StokesProblem {
        f: data.f.clone(),
        g: data.g.clone(),
        decomposition: data.decomposition.clone(),
        h1: traction(&trace, &data.h),
        h2: SpaceTimeField::static_on(&problem.geom, Layer::OuterBoundary, 3),
        u0: problem.data.v0.clone(),
    };
    let mut fluid = solve_stokes_on(stokes, &sp)?;
    pin_initial_pressure(problem, &mut fluid.p);
    Ok(LambdaStep {
        v: fluid.u,
        q: fluid.p,
        w: elastic.w,
        w_t: elastic.w_t,
        trace,
        stokes: fluid.residuals,
    })
}
