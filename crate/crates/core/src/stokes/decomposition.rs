//! Structural decomposition `∂_t g = g̃ + div b` of a divergence target.

use alloc::vec;

use crate::field::{Layer, SpaceTimeField};
use crate::fields::{Deriv, FlowMapState};

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceDecomposition {
    /// Scalar part `g̃` on the fluid layer.
    pub g_tilde: SpaceTimeField,
    /// Vector part `b` on the fluid layer.
    pub b: SpaceTimeField,
}

/// Source of the divergence target.
#[derive(Debug, Clone, Copy)]
pub enum GHistory<'a> {
    /// Any sampled `g`; decomposed as `(∂_t g, 0)`.
    Generic(&'a SpaceTimeField),
    /// `g = −∂_j((a_ji − δ_ji) v_i)` for the cofactor `a` of `flow`.
    Lagrangian { flow: &'a FlowMapState, velocity: &'a SpaceTimeField },
}

/// Centered time differences on `[0, 1]`, one-sided at both ends.
pub(crate) fn time_derivative(f: &SpaceTimeField) -> SpaceTimeField {
    let [nt1, nx, ny, nz, nc] = f.dims();
    let mut out = SpaceTimeField::zeros(f.layer(), nt1, nx, ny, nz, nc);
    if nt1 < 2 {
        return out;
    }
    let dt = 1.0 / (nt1 - 1) as f64;
    for n in 0..nt1 {
        let (lo, hi, scale) = match n {
            0 => (0, 1, 1.0 / dt),
            _ if n == nt1 - 1 => (n - 1, n, 1.0 / dt),
            _ => (n - 1, n + 1, 0.5 / dt),
        };
        let d: vec::Vec<f64> = f.slice(hi).iter().zip(f.slice(lo)).map(|(a, b)| (a - b) * scale).collect();
        out.slice_mut(n).copy_from_slice(&d);
    }
    out
}

/// Returns `(g̃, b)`. The Lagrangian form has `g̃ = 0` and
/// `b_j = −(∂_t a_ji v_i + (a_ji − δ_ji) ∂_t v_i)`, so that `∂_t g = div b`
/// holds with the sign of `g`.
pub fn divergence_decomposition(deriv: &Deriv, history: GHistory<'_>) -> DivergenceDecomposition {
    match history {
        GHistory::Generic(g) => {
            let [nt1, nx, ny, nz, _] = g.dims();
            DivergenceDecomposition {
                g_tilde: time_derivative(g),
                b: SpaceTimeField::zeros(g.layer(), nt1, nx, ny, nz, 3),
            }
        }
        GHistory::Lagrangian { flow, velocity } => {
            let [nt1, nx, ny, nz, _] = velocity.dims();
            let vt = time_derivative(velocity);
            let mut b = SpaceTimeField::zeros(Layer::Fluid, nt1, nx, ny, nz, 3);
            for n in 0..nt1 {
                let a = flow.cofactor(n);
                let at = flow.cofactor_rate(n);
                let (v, dv) = (velocity.slice(n), vt.slice(n));
                let out = b.slice_mut(n);
                for p in 0..deriv.points() {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for i in 0..3 {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            s += at[9 * p + 3 * j + i] * v[3 * p + i] + (a[9 * p + 3 * j + i] - delta) * dv[3 * p + i];
                        }
                        out[3 * p + j] = -s;
                    }
                }
            }
            DivergenceDecomposition {
                g_tilde: SpaceTimeField::zeros(Layer::Fluid, nt1, nx, ny, nz, 1),
                b,
            }
        }
    }
}

/// `g = −∂_j((a_ji − δ_ji) v_i)` at every time level of `velocity`.
pub fn lagrangian_divergence_target(deriv: &Deriv, flow: &FlowMapState, velocity: &SpaceTimeField) -> SpaceTimeField {
    let [nt1, nx, ny, nz, _] = velocity.dims();
    let mut g = SpaceTimeField::zeros(Layer::Fluid, nt1, nx, ny, nz, 1);
    let np = deriv.points();
    let mut flux = vec![0.0; np * 3];
    let mut d = vec![0.0; np];
    for n in 0..nt1 {
        let (a, v) = (flow.cofactor(n), velocity.slice(n));
        for p in 0..np {
            for j in 0..3 {
                flux[3 * p + j] = (0..3)
                    .map(|i| (a[9 * p + 3 * j + i] - if i == j { 1.0 } else { 0.0 }) * v[3 * p + i])
                    .sum();
            }
        }
        let out = g.slice_mut(n);
        for j in 0..3 {
            deriv.derivative(&flux, 3, j, j, &mut d);
            for (o, x) in out.iter_mut().zip(&d) {
                *o -= x;
            }
        }
    }
    g
}

/// Largest `|∂_t g − g̃ − div b|` with centered time differences, over the
/// interior time levels.
pub fn decomposition_defect(deriv: &Deriv, g: &SpaceTimeField, dec: &DivergenceDecomposition) -> f64 {
    let gt = time_derivative(g);
    let np = deriv.points();
    let mut d = vec![0.0; np];
    let mut worst: f64 = 0.0;
    let nt1 = g.time_samples();
    let levels = if nt1 > 2 { 1..nt1 - 1 } else { 0..nt1 };
    for n in levels {
        let mut r: vec::Vec<f64> = gt.slice(n).iter().zip(dec.g_tilde.slice(n)).map(|(a, b)| a - b).collect();
        for j in 0..3 {
            deriv.derivative(dec.b.slice(n), 3, j, j, &mut d);
            for (x, y) in r.iter_mut().zip(&d) {
                *x -= y;
            }
        }
        worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    worst
}
