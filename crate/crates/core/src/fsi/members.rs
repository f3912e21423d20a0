use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use rand::Rng;

use super::CoupledProblem;
use crate::field::{Layer, SpaceTimeField};

/// Random admissible iterate `v(t) = v0 + t φ`, where `φ` is a sum of four
/// horizontal modes with `|kx|, |ky| ≤ 2` times `sin(πz/L3)`, so that
/// `v(0) = v0` and `v = 0` on the outer walls. Component amplitudes are
/// uniform in `[−amplitude, amplitude]`.
pub fn random_member<R: Rng + ?Sized>(problem: &CoupledProblem, rng: &mut R, amplitude: f64) -> SpaceTimeField {
    let geom = &problem.geom;
    let l3 = geom.lengths()[2];
    let modes: Vec<([f64; 3], f64, f64, f64)> = (0..4)
        .map(|_| {
            let amp = [0, 1, 2].map(|_| rng.random_range(-amplitude..=amplitude));
            let kx = rng.random_range(-2..=2) as f64;
            let ky = rng.random_range(-2..=2) as f64;
            (amp, kx, ky, rng.random_range(0.0..core::f64::consts::TAU))
        })
        .collect();
    let shape = SpaceTimeField::from_fn(geom, Layer::Fluid, 3, 1, |_, x, y, z, o| {
        let envelope = (core::f64::consts::PI * z / l3).sin();
        for (amp, kx, ky, phase) in &modes {
            let wave = (kx * x + ky * y + phase).cos() * envelope;
            for c in 0..3 {
                o[c] += amp[c] * wave;
            }
        }
    });
    let mut v = problem.data.constant_iterate(geom);
    for n in 0..=geom.nt() {
        let t = geom.time(n);
        for (o, s) in v.slice_mut(n).iter_mut().zip(shape.slice(0)) {
            *o += t * s;
        }
    }
    v
}
