use alloc::vec::Vec;

use super::linear::{lambda_with, LinearData};
use super::nonlinear::pi_with;
use super::verify::{verify_coupled_solution, CoupledResiduals};
use super::{CoupledProblem, FsiError, SchemeParameters};
use crate::field::{Layer, SpaceTimeField};
use crate::fields::FlowMapState;
use crate::stokes::StokesSolver;
use crate::wave::WaveSolver;

/// Which map is iterated.
#[derive(Debug, Clone, PartialEq)]
pub enum Driver {
    /// `Λ` with fixed fluid data.
    Linear(LinearData),
    /// `Π`, whose forcing is rebuilt from every iterate.
    Nonlinear,
}

/// Full state after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub n: usize,
    pub v: SpaceTimeField,
    pub q: SpaceTimeField,
    pub w: SpaceTimeField,
    pub w_t: SpaceTimeField,
    /// Flow map the state was built with (identity for the linear map).
    pub flow: FlowMapState,
    /// Labelled norms of the iterate.
    pub norms: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub n: usize,
    /// `‖v⁽ⁿ⁾ − v⁽ⁿ⁻¹⁾‖_{K^{s+1}}`.
    pub diff_norm: f64,
    /// `diff_n / diff_{n−1}`; absent for the first step or a zero divisor.
    pub ratio: Option<f64>,
    /// `‖v⁽ⁿ⁾‖_{K^{s+1}}`.
    pub v_norm: f64,
    /// Largest algebraic residual of the Stokes subsolve.
    pub stokes_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    pub state: IterationState,
    pub history: Vec<HistoryRow>,
    pub converged: bool,
    /// Residuals of the coupled system, evaluated on convergence.
    pub verification: Option<CoupledResiduals>,
}

/// Factored subsolvers for repeated map applications on one geometry.
pub struct MapEvaluator<'a> {
    problem: &'a CoupledProblem,
    wave: WaveSolver,
    stokes: StokesSolver,
}

impl<'a> MapEvaluator<'a> {
    pub fn new(problem: &'a CoupledProblem) -> Result<Self, FsiError> {
        Ok(Self {
            problem,
            wave: WaveSolver::new(&problem.geom, Default::default())?,
            stokes: StokesSolver::new(&problem.geom, Default::default())?,
        })
    }

    /// Applies the map of `driver` to `(v, q)`.
    pub fn apply(
        &self,
        driver: &Driver,
        v: &SpaceTimeField,
        q: &SpaceTimeField,
        params: &SchemeParameters,
        n: usize,
    ) -> Result<(IterationState, f64), FsiError> {
        let p = self.problem;
        let nt = p.geom.nt();
        let (state, residual) = match driver {
            Driver::Linear(data) => {
                let s = lambda_with(p, &self.wave, &self.stokes, v, data, params)?;
                let flow = FlowMapState::identity(&p.fluid, Layer::Fluid, nt);
                let res = s.stokes.max();
                (IterationState { n, v: s.v, q: s.q, w: s.w, w_t: s.w_t, flow, norms: Vec::new() }, res)
            }
            Driver::Nonlinear => {
                let s = pi_with(p, &self.wave, &self.stokes, v, q, params)?;
                let res = s.stokes.max();
                let norms = alloc::vec![("input_size_over_m", s.size_ratio)];
                (IterationState { n, v: s.v, q: s.q, w: s.w, w_t: s.w_t, flow: s.flow, norms }, res)
            }
        };
        Ok((state, residual))
    }

    /// `‖T v1 − T v2‖ / ‖v1 − v2‖` in `K^{s+1}` for the map `T` of `driver`,
    /// with the pressure input `q` shared by both.
    pub fn contraction_ratio(
        &self,
        driver: &Driver,
        v1: &SpaceTimeField,
        v2: &SpaceTimeField,
        q: &SpaceTimeField,
        params: &SchemeParameters,
    ) -> Result<f64, FsiError> {
        let spec = params.iterate_norm();
        let (a, _) = self.apply(driver, v1, q, params, 0)?;
        let (b, _) = self.apply(driver, v2, q, params, 0)?;
        let num = self.problem.engine.norm(&a.v.difference(&b.v), spec)?.value;
        let den = self.problem.engine.norm(&v1.difference(v2), spec)?.value;
        Ok(num / den)
    }
}

/// Starting pressure: the initial pressure of the data, constant in time.
pub fn initial_pressure_iterate(problem: &CoupledProblem) -> Result<SpaceTimeField, FsiError> {
    Ok(problem.q0.repeated(problem.geom.nt() + 1))
}

/// Iterates from `v⁽⁰⁾ = v0` until the `K^{s+1}` difference of successive
/// iterates drops below `params.tol` or `params.max_iter` steps ran.
pub fn iterate_to_fixed_point(
    problem: &CoupledProblem,
    driver: &Driver,
    params: &SchemeParameters,
) -> Result<FixedPointOutcome, FsiError> {
    let eval = MapEvaluator::new(problem)?;
    let spec = params.iterate_norm();
    let mut v = problem.data.constant_iterate(&problem.geom);
    let mut q = initial_pressure_iterate(problem)?;
    let mut history: Vec<HistoryRow> = Vec::new();
    let mut state = None;
    let mut converged = false;
    for n in 1..=params.max_iter {
        let (next, residual) = eval.apply(driver, &v, &q, params, n)?;
        let diff_norm = problem.engine.norm(&next.v.difference(&v), spec)?.value;
        let v_norm = problem.engine.norm(&next.v, spec)?.value;
        let ratio = history.last().and_then(|r| (r.diff_norm > 0.0).then(|| diff_norm / r.diff_norm));
        history.push(HistoryRow { n, diff_norm, ratio, v_norm, stokes_residual: residual });
        v = next.v.clone();
        q = next.q.clone();
        state = Some(next);
        if diff_norm < params.tol {
            converged = true;
            break;
        }
    }
    let state = state.ok_or(FsiError::Parameter("max_iter must be at least 1"))?;
    let verification = if converged {
        Some(verify_coupled_solution(problem, &state, params)?)
    } else {
        None
    };
    Ok(FixedPointOutcome { state, history, converged, verification })
}
