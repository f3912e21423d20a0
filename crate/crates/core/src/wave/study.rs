//! Refinement study against an exact standing wave, and energy runs.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use rand::Rng;

use super::solver::{cfl_number, normal_trace, steps_for_cfl};
use super::{solve_wave_with, WaveError, WaveProblem, WaveScheme};
use crate::field::{Layer, SpaceTimeField};
use crate::geometry::{build_geometry, ChannelGeometry, GeometryConfig};

use core::f64::consts::PI;

/// `cos(kx x) sin(mπ(z − L1)/(L2 − L1)) cos(ωt)` in every component, with
/// `ω² = kx² + (mπ/(L2 − L1))²`. It vanishes on both interface planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWave {
    pub kx: f64,
    pub m: f64,
    pub l1: f64,
    pub width: f64,
}

impl StandingWave {
    pub fn new(geom: &ChannelGeometry, kx: f64, m: f64) -> Self {
        let [l1, l2, _] = geom.lengths();
        Self { kx, m, l1, width: l2 - l1 }
    }

    fn kz(&self) -> f64 {
        self.m * PI / self.width
    }

    pub fn omega(&self) -> f64 {
        (self.kx * self.kx + self.kz() * self.kz()).sqrt()
    }

    /// `(w, w_t)` at one point.
    pub fn eval(&self, t: f64, x: f64, z: f64) -> (f64, f64) {
        let s = (self.kx * x).cos() * (self.kz() * (z - self.l1)).sin();
        let w = self.omega();
        (s * (w * t).cos(), -w * s * (w * t).sin())
    }

    /// `∂w/∂N` on plane `k`; both outward normals see the same sign.
    pub fn normal_derivative(&self, t: f64, x: f64, k: usize) -> f64 {
        let end = if k == 0 { 1.0 } else { (self.kz() * self.width).cos() };
        let sign = if k == 0 { -1.0 } else { 1.0 };
        sign * self.kz() * end * (self.kx * x).cos() * (self.omega() * t).cos()
    }

    pub fn problem(&self, geom: &ChannelGeometry) -> WaveProblem {
        let w0 = SpaceTimeField::from_fn(geom, Layer::Elastic, 3, 1, |_, x, _, z, o| o.fill(self.eval(0.0, x, z).0));
        let w1 = SpaceTimeField::from_fn(geom, Layer::Elastic, 3, 1, |_, x, _, z, o| o.fill(self.eval(0.0, x, z).1));
        WaveProblem::homogeneous(geom, w0, w1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveLevel {
    pub intervals: usize,
    pub h: f64,
    pub dt: f64,
    pub cfl: f64,
    /// Largest nodal displacement error over all levels.
    pub error: f64,
    /// Largest error of the normal trace.
    pub trace_error: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveStudy {
    pub levels: Vec<WaveLevel>,
    pub orders: Vec<f64>,
    pub trace_orders: Vec<f64>,
}

impl WaveStudy {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves the standing wave on `[1, 2]` with `intervals` elastic intervals
/// per level, a 4×4 horizontal grid and the step count for `cfl`.
pub fn wave_mms_study(intervals: &[usize], wave_kx: f64, cfl: f64, scheme: WaveScheme) -> Result<WaveStudy, WaveError> {
    let mut levels = Vec::with_capacity(intervals.len());
    for &n in intervals {
        let config = |nt| GeometryConfig::new([1.0, 2.0, 3.0], 4, 4, [4, n, 4], nt);
        let probe = build_geometry(&config(4)).map_err(|_| WaveError::Shape("refinement level"))?;
        let geom = build_geometry(&config(steps_for_cfl(&probe, cfl))).map_err(|_| WaveError::Shape("refinement level"))?;
        let wave = StandingWave::new(&geom, wave_kx, 1.0);
        let sol = solve_wave_with(&wave.problem(&geom), &geom, geom.dt(), scheme)?;
        let exact = SpaceTimeField::from_fn(&geom, Layer::Elastic, 3, geom.nt() + 1, |t, x, _, z, o| {
            o.fill(wave.eval(t, x, z).0)
        });
        let exact_trace = SpaceTimeField::from_fn(&geom, Layer::Interface, 3, geom.nt() + 1, |t, x, _, z, o| {
            o.fill(wave.normal_derivative(t, x, usize::from(z != geom.lengths()[0])))
        });
        levels.push(WaveLevel {
            intervals: n,
            h: 1.0 / n as f64,
            dt: geom.dt(),
            cfl: cfl_number(&geom),
            error: sol.w.difference(&exact).max_abs(),
            trace_error: normal_trace(&geom, &sol.w).difference(&exact_trace).max_abs(),
            energy_drift: sol.energy_drift(),
        });
    }
    let order = |e: fn(&WaveLevel) -> f64| -> Vec<f64> {
        levels.windows(2).map(|w| (e(&w[0]) / e(&w[1])).ln() / (w[0].h / w[1].h).ln()).collect()
    };
    Ok(WaveStudy {
        orders: order(|l| l.error),
        trace_orders: order(|l| l.trace_error),
        levels,
    })
}

/// Random smooth `(w0, w1)` vanishing on both planes, with zero boundary
/// data: modes with `|kx|, |ky| ≤ 2` and vertical index up to 3.
pub fn random_homogeneous_problem<R: Rng + ?Sized>(geom: &ChannelGeometry, rng: &mut R) -> WaveProblem {
    let [l1, l2, _] = geom.lengths();
    let terms: Vec<(f64, f64, f64, f64, [f64; 6])> = (0..4)
        .map(|_| {
            (
                rng.random_range(-2..=2) as f64,
                rng.random_range(-2..=2) as f64,
                rng.random_range(1..=3) as f64,
                rng.random_range(0.0..core::f64::consts::TAU),
                [0; 6].map(|_| rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let build = |offset: usize| {
        SpaceTimeField::from_fn(geom, Layer::Elastic, 3, 1, |_, x, y, z, o| {
            for (kx, ky, m, phase, amp) in &terms {
                let s = (kx * x + ky * y + phase).cos() * (m * PI * (z - l1) / (l2 - l1)).sin();
                for c in 0..3 {
                    o[c] += amp[offset + c] * s;
                }
            }
        })
    };
    WaveProblem::homogeneous(geom, build(0), build(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn study_reports_second_order() {
        let s = wave_mms_study(&[8, 16, 32], 1.0, 0.5, WaveScheme::Leapfrog).unwrap();
        assert!(s.min_order() > 1.9, "{:?}", s.orders);
        assert!(s.trace_orders.iter().all(|&o| o > 1.8), "{:?}", s.trace_orders);
        assert!(s.levels.iter().all(|l| l.cfl <= 0.5 && l.energy_drift < 1e-12));
    }

    #[test]
    fn random_problem_is_compatible_and_conserves_energy() {
        let probe = build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 8, 8, [4, 16, 4], 4)).unwrap();
        let g = build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 8, 8, [4, 16, 4], steps_for_cfl(&probe, 0.9))).unwrap();
        let p = random_homogeneous_problem(&g, &mut ChaCha8Rng::seed_from_u64(9));
        assert!(p.compatibility_defect(&g) < 1e-14);
        let sol = solve_wave_with(&p, &g, g.dt(), WaveScheme::Leapfrog).unwrap();
        assert!(sol.energy[0] > 0.1 && sol.energy_drift() < 1e-12);
    }
}
