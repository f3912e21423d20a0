//! Experiment runners. Each writes its artifacts into the output directory
//! and returns a JSON report.

use std::path::{Path, PathBuf};

use chanfsi_core::fsi::{
    compute_parameters_with, iterate_to_fixed_point, CoupledProblem, Driver, FixedPointOutcome, FsiError, InitialData,
    LinearData, SchemeParameters,
};
use chanfsi_core::norms::{p01_experiment, verify_interpolation, verify_trace_inequality, NormEngine};
use chanfsi_core::stokes::{stokes_mms_study, TimeScheme};
use chanfsi_core::wave::{
    hidden_regularity_report, random_boundary_problem, solve_wave, steps_for_cfl, wave_mms_study, WaveScheme,
};
use chanfsi_core::{ChannelGeometry, GeometryConfig, Layer, SpaceTimeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, DriverKind, Experiment, Preset, RunConfig};
use crate::report::{self, history_records, residual_records, ReportError, RESIDUALS_FILE};
use crate::snapshot;

pub const HISTORY_FILE: &str = "history.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure ({kind}): {message}")]
    Numerical { kind: &'static str, message: String },
    #[error("output: {0}")]
    Output(String),
}

impl From<ReportError> for RunError {
    fn from(e: ReportError) -> Self {
        Self::Output(e.to_string())
    }
}

fn numerical(kind: &'static str) -> impl FnOnce(String) -> RunError {
    move |message| RunError::Numerical { kind, message }
}

fn invalid(key: &str, message: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid { key: key.to_owned(), message: message.into() })
}

/// Artifacts of a finished run. `failure` is set when the run completed
/// but its numerical goal was missed.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub experiment: Experiment,
    pub artifacts: Vec<PathBuf>,
    pub report: Value,
    pub failure: Option<String>,
}

pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| RunError::Output(format!("{}: {e}", dir.display())))?;
    let mut outcome = match config.experiment {
        Experiment::Solve => solve(config, dir)?,
        Experiment::P01 => p01(config, dir)?,
        Experiment::HiddenRegularity => hidden(config, dir)?,
        Experiment::NormVerify => norm_verify(config, dir)?,
        Experiment::StokesMms => stokes_mms(config, dir)?,
        Experiment::WaveMms => wave_mms(config, dir)?,
    };
    if let Value::Object(map) = &mut outcome.report {
        map.insert("experiment".into(), json!(config.experiment.name()));
        map.insert("seed".into(), json!(config.seed()));
        map.insert("geometry".into(), json!(config.geometry));
        map.insert("failure".into(), json!(outcome.failure));
    }
    let path = dir.join(REPORT_FILE);
    report::write_json(&path, &outcome.report)?;
    outcome.artifacts.push(path);
    Ok(outcome)
}

fn initial_data(config: &RunConfig, geom: &ChannelGeometry) -> Result<InitialData, RunError> {
    let d = &config.data;
    Ok(match d.preset {
        Preset::Zero => InitialData::zero(geom),
        Preset::SingleMode => InitialData::single_mode(geom, d.amplitude),
        Preset::Snapshot => {
            let load = |key: &str, p: &Option<PathBuf>, layer: Layer| -> Result<SpaceTimeField, RunError> {
                let p = p.as_ref().ok_or_else(|| invalid(key, "missing"))?;
                let f = snapshot::load(p).map_err(|e| invalid(key, e.to_string()))?;
                let expect = SpaceTimeField::static_on(geom, layer, 3);
                if !f.same_shape(&expect) {
                    return Err(invalid(key, format!("snapshot shape {:?} does not match {:?}", f.dims(), expect.dims())));
                }
                Ok(f)
            };
            InitialData {
                v0: load("data.v0", &d.v0, Layer::Fluid)?,
                w0: load("data.w0", &d.w0, Layer::Elastic)?,
                w1: load("data.w1", &d.w1, Layer::Elastic)?,
            }
        }
    })
}

/// Problem and parameters of a `solve` configuration.
pub fn coupled_setup(config: &RunConfig) -> Result<(CoupledProblem, SchemeParameters), RunError> {
    let geom = config.geometry.build()?;
    let data = initial_data(config, &geom)?;
    let problem = CoupledProblem::new(&geom, data).map_err(|e| match e {
        FsiError::InitialData { .. } => invalid("data", e.to_string()),
        other => RunError::Numerical { kind: "setup", message: other.to_string() },
    })?;
    let sc = &config.scheme;
    let mut params = compute_parameters_with(&problem.engine, &problem.data, sc.c_bar, sc.s, sc.epsilon0)
        .map_err(|e| invalid("scheme", e.to_string()))?;
    if let Some(t) = sc.t_tilde {
        params = params.with_t_tilde(t).map_err(|e| invalid("scheme.t_tilde", e.to_string()))?;
    }
    params.tol = sc.tol;
    params.max_iter = sc.max_iter;
    Ok((problem, params))
}

fn solve(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let (problem, params) = coupled_setup(config)?;
    let driver = match config.scheme.driver {
        DriverKind::Linear => Driver::Linear(LinearData::zero(&problem.geom)),
        DriverKind::Nonlinear => Driver::Nonlinear,
    };
    let out: FixedPointOutcome = iterate_to_fixed_point(&problem, &driver, &params)
        .map_err(|e| numerical(fsi_kind(&e))(e.to_string()))?;
    let mut artifacts = Vec::new();
    let history = dir.join(HISTORY_FILE);
    report::write_csv(&history, &config.geometry, &history_records(&out.history, out.converged))?;
    artifacts.push(history);
    let residuals = out.verification.as_ref().map(residual_records);
    if let Some(rows) = &residuals {
        let path = dir.join(RESIDUALS_FILE);
        report::write_csv(&path, &config.geometry, rows)?;
        artifacts.push(path);
    }
    if config.output.snapshot_every > 0 {
        for (name, f) in [("v", &out.state.v), ("q", &out.state.q), ("w", &out.state.w)] {
            let path = dir.join(format!("{name}.snap"));
            let sampled = every_nth_level(f, config.output.snapshot_every);
            snapshot::save(&path, &sampled).map_err(|e| RunError::Output(e.to_string()))?;
            artifacts.push(path);
        }
    }
    let max_ratio = out.history.iter().filter_map(|r| r.ratio).reduce(f64::max);
    let report = json!({
        "driver": config.scheme.driver,
        "parameters": {
            "s": params.s,
            "epsilon0": params.epsilon0,
            "c_bar": params.c_bar,
            "m": params.m,
            "t_tilde": params.t_tilde,
            "off_theory": params.off_theory,
            "tol": params.tol,
            "max_iter": params.max_iter,
            "data_norms": [params.data_norms.v0, params.data_norms.w0, params.data_norms.w1],
        },
        "converged": out.converged,
        "iterations": out.history.len(),
        "final_diff_norm": out.history.last().map(|r| r.diff_norm),
        "max_ratio": max_ratio,
        "contraction_target": 0.5,
        "residuals": residuals,
    });
    let failure = (!out.converged).then(|| format!("no convergence within {} iterations", params.max_iter));
    Ok(RunOutcome { experiment: Experiment::Solve, artifacts, report, failure })
}

/// Time levels `0, k, 2k, …` of `f`, always ending with the last level.
pub fn every_nth_level(f: &SpaceTimeField, k: usize) -> SpaceTimeField {
    let last = f.time_samples() - 1;
    let mut levels: Vec<usize> = (0..=last).step_by(k.max(1)).collect();
    if levels.last() != Some(&last) {
        levels.push(last);
    }
    let data: Vec<f64> = levels.iter().flat_map(|&n| f.slice(n).iter().copied()).collect();
    let mut dims = f.dims();
    dims[0] = levels.len();
    SpaceTimeField::from_vec(f.layer(), dims, data).expect("sampled levels keep the spatial shape")
}

fn fsi_kind(e: &FsiError) -> &'static str {
    match e {
        FsiError::Fields(_) => "flow map",
        FsiError::Stokes(_) => "stokes",
        FsiError::Wave(_) => "wave",
        FsiError::Membership { .. } => "membership",
        _ => "fsi",
    }
}

#[derive(Debug, Serialize)]
struct P01Record {
    m: f64,
    beta: f64,
    l2: f64,
    seminorm: f64,
    ratio: f64,
}

fn p01(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let c = &config.p01;
    let table = p01_experiment(&c.betas, c.alpha, c.t, &c.ms).map_err(|e| invalid("p01", e.to_string()))?;
    let mut rows = Vec::new();
    for r in &table.rows {
        for (b, ratio) in table.betas.iter().zip(&r.ratios) {
            rows.push(P01Record { m: r.m, beta: *b, l2: r.l2, seminorm: r.seminorm, ratio: *ratio });
        }
    }
    let path = dir.join("p01.csv");
    report::write_csv(&path, &config.geometry, &rows)?;
    let columns: Vec<Value> = table
        .betas
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let col: Vec<f64> = table.rows.iter().map(|r| r.ratios[i]).collect();
            let (lo, hi) = spread(&col);
            json!({ "beta": b, "min": lo, "max": hi, "growth": col.last().unwrap() / col[0] })
        })
        .collect();
    let report = json!({ "alpha": c.alpha, "t": c.t, "seminorm_slope": table.seminorm_slope(), "columns": columns });
    Ok(RunOutcome { experiment: Experiment::P01, artifacts: vec![path], report, failure: None })
}

fn spread(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

#[derive(Debug, Clone, Serialize)]
pub struct HiddenRecord {
    pub sample: usize,
    pub intervals: usize,
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    pub energy_ratio: Option<f64>,
    pub trace_ratio: Option<f64>,
}

/// Geometry of one hidden-regularity level: `nxy²` horizontal points,
/// `intervals` elastic intervals, step count for `cfl`.
pub fn hidden_geometry(nxy: usize, intervals: usize, cfl: f64) -> Result<ChannelGeometry, RunError> {
    let config = |nt| GeometryConfig::new([1.0, 2.0, 3.0], nxy, nxy, [4, intervals, 4], nt);
    let build = |c: GeometryConfig| chanfsi_core::geometry::build_geometry(&c).map_err(|e| invalid("hidden", e.to_string()));
    let probe = build(config(4))?;
    build(config(steps_for_cfl(&probe, cfl)))
}

/// Band-limited boundary suite: sample `i` draws its data from
/// `seed + i`, so every level sees the same continuous problem.
pub fn hidden_suite(
    seed: u64,
    samples: usize,
    levels: &[usize],
    nxy: usize,
    cfl: f64,
    beta: f64,
) -> Result<Vec<HiddenRecord>, RunError> {
    let geoms = levels.iter().map(|&n| hidden_geometry(nxy, n, cfl)).collect::<Result<Vec<_>, _>>()?;
    let engines: Vec<NormEngine> = geoms.iter().map(NormEngine::new).collect();
    let jobs: Vec<(usize, usize)> = (0..samples).flat_map(|s| (0..levels.len()).map(move |l| (s, l))).collect();
    jobs.par_iter()
        .map(|&(sample, l)| {
            let g = &geoms[l];
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(sample as u64));
            let problem = random_boundary_problem(g, &mut rng);
            let sol = solve_wave(&problem, g, g.dt()).map_err(|e| numerical("wave")(e.to_string()))?;
            let rep = hidden_regularity_report(&engines[l], &problem, &sol, beta)
                .map_err(|e| invalid("hidden.beta", e.to_string()))?;
            Ok(HiddenRecord {
                sample,
                intervals: levels[l],
                energy_lhs: rep.energy.lhs_total(),
                energy_rhs: rep.energy.rhs_total(),
                energy_ratio: rep.energy.ratio,
                trace_ratio: rep.trace.and_then(|t| t.ratio),
            })
        })
        .collect()
}

/// Largest per-sample `max / min` of the energy ratio across levels.
pub fn hidden_spread(records: &[HiddenRecord]) -> Option<f64> {
    let samples = records.iter().map(|r| r.sample).max()? + 1;
    (0..samples)
        .map(|s| {
            let col: Vec<f64> = records.iter().filter(|r| r.sample == s).filter_map(|r| r.energy_ratio).collect();
            let (lo, hi) = spread(&col);
            hi / lo
        })
        .reduce(f64::max)
}

fn hidden(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let c = &config.hidden;
    let records = hidden_suite(config.seed(), c.samples, &c.levels, c.nxy, c.cfl, c.beta)?;
    let path = dir.join("hidden_regularity.csv");
    report::write_csv(&path, &config.geometry, &records)?;
    let report = json!({ "beta": c.beta, "levels": c.levels, "samples": c.samples, "max_spread": hidden_spread(&records) });
    Ok(RunOutcome { experiment: Experiment::HiddenRegularity, artifacts: vec![path], report, failure: None })
}

#[derive(Debug, Serialize)]
struct InequalityRecord {
    sample: usize,
    inequality: &'static str,
    epsilon: f64,
    lhs: f64,
    first: f64,
    second: f64,
    constant: f64,
}

/// Smooth band-limited scalar field on the fluid layer.
fn random_smooth_field<R: Rng + ?Sized>(geom: &ChannelGeometry, rng: &mut R) -> SpaceTimeField {
    let terms: Vec<[f64; 6]> = (0..3)
        .map(|_| {
            [
                rng.random_range(-2..=2) as f64,
                rng.random_range(-2..=2) as f64,
                rng.random_range(0..=2) as f64,
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    SpaceTimeField::from_fn(geom, Layer::Fluid, 1, geom.nt() + 1, |t, x, y, z, o| {
        o[0] = terms.iter().map(|[kx, ky, m, w, ph, a]| a * (kx * x + ky * y + ph).cos() * (m * z).cos() * (w * t + ph).sin()).sum();
    })
}

fn norm_verify(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let geom = config.geometry.build()?;
    let engine = NormEngine::new(&geom);
    let c = &config.norm_verify;
    let seed = config.seed();
    let per_sample: Vec<Vec<InequalityRecord>> = (0..c.samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(sample as u64));
            let u = random_smooth_field(&geom, &mut rng);
            let mut out = Vec::new();
            for &eps in &c.epsilons {
                let tr = verify_trace_inequality(&engine, &u, 1.0, 0.25, eps).map_err(|e| invalid("norm_verify", e.to_string()))?;
                let ip = verify_interpolation(&engine, &u, 1.0, 2.0, 0.25, 0.5, eps)
                    .map_err(|e| invalid("norm_verify", e.to_string()))?;
                for (name, r) in [("trace", tr), ("interpolation", ip)] {
                    out.push(InequalityRecord {
                        sample,
                        inequality: name,
                        epsilon: eps,
                        lhs: r.lhs,
                        first: r.first,
                        second: r.second,
                        constant: r.constant,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, RunError>>()?;
    let rows: Vec<InequalityRecord> = per_sample.into_iter().flatten().collect();
    let path = dir.join("norm_verify.csv");
    report::write_csv(&path, &config.geometry, &rows)?;
    let max_of = |name: &str| rows.iter().filter(|r| r.inequality == name).map(|r| r.constant).fold(0.0, f64::max);
    let (trace_max, interp_max) = (max_of("trace"), max_of("interpolation"));
    let failure = (!trace_max.is_finite() || !interp_max.is_finite()).then(|| "unbounded inequality constant".to_owned());
    let report = json!({ "samples": c.samples, "max_constant": { "trace": trace_max, "interpolation": interp_max } });
    Ok(RunOutcome { experiment: Experiment::NormVerify, artifacts: vec![path], report, failure })
}

fn stokes_mms(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let c = &config.stokes_mms;
    let scheme = if c.crank_nicolson { TimeScheme::CrankNicolson } else { TimeScheme::ImplicitEuler };
    let study = stokes_mms_study(&c.levels, scheme).map_err(|e| numerical("stokes")(e.to_string()))?;
    #[derive(Serialize)]
    struct Row {
        intervals: usize,
        h: f64,
        dt: f64,
        velocity_error: f64,
        pressure_error: f64,
        divergence_residual: f64,
        momentum_residual: f64,
    }
    let rows: Vec<Row> = study
        .levels
        .iter()
        .map(|l| Row {
            intervals: l.intervals,
            h: l.h,
            dt: l.dt,
            velocity_error: l.velocity_error,
            pressure_error: l.pressure_error,
            divergence_residual: l.divergence_residual,
            momentum_residual: l.momentum_residual,
        })
        .collect();
    let path = dir.join("stokes_mms.csv");
    report::write_csv(&path, &config.geometry, &rows)?;
    let report = json!({ "velocity_orders": study.velocity_orders, "pressure_orders": study.pressure_orders });
    Ok(RunOutcome { experiment: Experiment::StokesMms, artifacts: vec![path], report, failure: None })
}

fn wave_mms(config: &RunConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let c = &config.wave_mms;
    let scheme = if c.implicit { WaveScheme::Implicit } else { WaveScheme::Leapfrog };
    let study = wave_mms_study(&c.levels, c.kx, c.cfl, scheme).map_err(|e| numerical("wave")(e.to_string()))?;
    let path = dir.join("wave_mms.csv");
    #[derive(Serialize)]
    struct Row {
        intervals: usize,
        h: f64,
        dt: f64,
        cfl: f64,
        error: f64,
        trace_error: f64,
        energy_drift: f64,
    }
    let rows: Vec<Row> = study
        .levels
        .iter()
        .map(|l| Row {
            intervals: l.intervals,
            h: l.h,
            dt: l.dt,
            cfl: l.cfl,
            error: l.error,
            trace_error: l.trace_error,
            energy_drift: l.energy_drift,
        })
        .collect();
    report::write_csv(&path, &config.geometry, &rows)?;
    let report = json!({ "orders": study.orders, "trace_orders": study.trace_orders });
    Ok(RunOutcome { experiment: Experiment::WaveMms, artifacts: vec![path], report, failure: None })
}
