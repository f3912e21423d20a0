use alloc::vec;
use alloc::vec::Vec;

use super::cutoff::CutoffFunction;
use super::deriv::Deriv;
use super::tensor::{
    adjugate_defect, bilinear_cofactor, cofactor3, cofactor_linear, det3, load3, max_abs3, store3,
    sub3, IDENTITY,
};
use super::FieldsError;
use crate::field::{Layer, SpaceTimeField};

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// Weights `(α, β)` with `∫_a^b ψ(τ) v(τ) dτ ≈ α v(a) + β v(b)` for `v`
/// linear on `[a, b]`. Exact for the piecewise-quintic cutoff.
fn cell_weights(psi: &CutoffFunction, a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    if b <= psi.t_tilde() {
        return (0.5 * h, 0.5 * h);
    }
    if a >= psi.ramp_end() {
        return (0.0, 0.0);
    }
    let mut cuts = [a, a, a, b];
    let mut n = 1;
    for t in psi.breakpoints_in(a, b) {
        cuts[n] = t;
        n += 1;
    }
    cuts[n] = b;
    let (mut wa, mut wb) = (0.0, 0.0);
    for k in 0..n {
        let (p, q) = (cuts[k], cuts[k + 1]);
        let (mid, half) = (0.5 * (p + q), 0.5 * (q - p));
        for &(x, w) in &GAUSS4 {
            let t = mid + half * x;
            let s = (t - a) / h;
            let f = w * half * psi.value(t);
            wa += f * (1.0 - s);
            wb += f * s;
        }
    }
    (wa, wb)
}

/// Deformation gradient, cofactor and Jacobian of one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    pub grad: Vec<f64>,
    pub cofactor: Vec<f64>,
    pub det: Vec<f64>,
}

/// Builds `∇η = I + ∇ξ`, `a = cof(∇η)` and `det ∇η` from a displacement
/// slice `ξ = η − x` (three components).
pub fn deformation(deriv: &Deriv, displacement: &[f64]) -> Deformation {
    let np = deriv.points();
    let mut grad = deriv.gradient(displacement, 3);
    let mut cof = vec![0.0; np * 9];
    let mut det = vec![0.0; np];
    for p in 0..np {
        let g = &mut grad[9 * p..9 * p + 9];
        g[0] += 1.0;
        g[4] += 1.0;
        g[8] += 1.0;
        let j = load3(g);
        store3(&cofactor3(&j), &mut cof[9 * p..9 * p + 9]);
        det[p] = det3(&j);
    }
    Deformation {
        grad,
        cofactor: cof,
        det,
    }
}

/// The cutoff-modified flow map `η(t, x) = x + ∫₀ᵗ ψ(τ) v(τ, x) dτ` and its
/// derived tensors.
///
/// Only the slices up to the first time level past the end of the cutoff
/// ramp are stored; later levels are identical and read through
/// [`FlowMapState::stored_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMapState {
    nt: usize,
    frozen: usize,
    displacement: SpaceTimeField,
    grad: SpaceTimeField,
    cofactor: SpaceTimeField,
    det: SpaceTimeField,
}

/// `∫₀ᵗ ψ(τ) f(τ) dτ` at every time level of `f` up to the first level
/// past the end of the cutoff ramp, by product quadrature: `ψ` is
/// integrated exactly against the piecewise-linear interpolant of `f`.
/// Later levels equal the last returned one.
pub fn cutoff_integral(f: &SpaceTimeField, psi: &CutoffFunction) -> SpaceTimeField {
    let [nt1, nx, ny, nz, nc] = f.dims();
    let nt = nt1 - 1;
    let dt = 1.0 / nt as f64;
    let frozen = (0..=nt).find(|&n| n as f64 * dt >= psi.ramp_end()).unwrap_or(nt);
    let mut out = SpaceTimeField::zeros(f.layer(), frozen + 1, nx, ny, nz, nc);
    let len = out.slice_len();
    let mut acc = vec![0.0; len];
    for n in 0..frozen {
        let (wa, wb) = cell_weights(psi, n as f64 * dt, (n + 1) as f64 * dt);
        let (fa, fb) = (f.slice(n), f.slice(n + 1));
        for k in 0..len {
            acc[k] += wa * fa[k] + wb * fb[k];
        }
        out.slice_mut(n + 1).copy_from_slice(&acc);
    }
    out
}

/// The flow map of `v`; see [`cutoff_integral`].
pub fn flow_map(deriv: &Deriv, v: &SpaceTimeField, psi: &CutoffFunction) -> Result<FlowMapState, FieldsError> {
    let [nt1, nx, ny, nz, nc] = v.dims();
    if nc != 3 || nt1 < 2 || [nx, ny, nz] != [deriv.nx(), deriv.ny(), deriv.nz()] {
        return Err(FieldsError::ShapeMismatch("flow map needs a 3-component velocity on the derivative grid"));
    }
    Ok(FlowMapState::from_displacement(deriv, cutoff_integral(v, psi), nt1 - 1))
}

impl FlowMapState {
    /// Derived tensors for stored displacement slices; `nt` is the step
    /// count of the full time grid.
    pub fn from_displacement(deriv: &Deriv, displacement: SpaceTimeField, nt: usize) -> Self {
        let [ns, nx, ny, nz, _] = displacement.dims();
        let layer = displacement.layer();
        let mut grad = SpaceTimeField::zeros(layer, ns, nx, ny, nz, 9);
        let mut cof = SpaceTimeField::zeros(layer, ns, nx, ny, nz, 9);
        let mut det = SpaceTimeField::zeros(layer, ns, nx, ny, nz, 1);
        for n in 0..ns {
            let d = deformation(deriv, displacement.slice(n));
            grad.slice_mut(n).copy_from_slice(&d.grad);
            cof.slice_mut(n).copy_from_slice(&d.cofactor);
            det.slice_mut(n).copy_from_slice(&d.det);
        }
        Self {
            nt,
            frozen: ns - 1,
            displacement,
            grad,
            cofactor: cof,
            det,
        }
    }

    /// Flow map of the zero velocity on `layer`.
    pub fn identity(deriv: &Deriv, layer: Layer, nt: usize) -> Self {
        let xi = SpaceTimeField::zeros(layer, 1, deriv.nx(), deriv.ny(), deriv.nz(), 3);
        Self::from_displacement(deriv, xi, nt)
    }

    pub fn time_steps(&self) -> usize {
        self.nt
    }

    /// Last stored time index; every later level equals this one.
    pub fn frozen_index(&self) -> usize {
        self.frozen
    }

    pub fn stored_index(&self, n: usize) -> usize {
        n.min(self.frozen)
    }

    pub fn displacement(&self, n: usize) -> &[f64] {
        self.displacement.slice(self.stored_index(n))
    }

    pub fn grad(&self, n: usize) -> &[f64] {
        self.grad.slice(self.stored_index(n))
    }

    pub fn cofactor(&self, n: usize) -> &[f64] {
        self.cofactor.slice(self.stored_index(n))
    }

    pub fn det(&self, n: usize) -> &[f64] {
        self.det.slice(self.stored_index(n))
    }

    pub fn displacement_field(&self) -> &SpaceTimeField {
        &self.displacement
    }

    pub fn grad_field(&self) -> &SpaceTimeField {
        &self.grad
    }

    pub fn cofactor_field(&self) -> &SpaceTimeField {
        &self.cofactor
    }

    pub fn det_field(&self) -> &SpaceTimeField {
        &self.det
    }

    /// Expands a stored field to all `nt + 1` time levels.
    pub fn expand(&self, stored: &SpaceTimeField) -> SpaceTimeField {
        let [_, nx, ny, nz, nc] = stored.dims();
        let mut out = SpaceTimeField::zeros(stored.layer(), self.nt + 1, nx, ny, nz, nc);
        for n in 0..=self.nt {
            out.slice_mut(n).copy_from_slice(stored.slice(self.stored_index(n)));
        }
        out
    }

    /// Time derivative of the cofactor at level `n`: centered differences,
    /// one-sided at the ends of `[0, 1]`.
    pub fn cofactor_rate(&self, n: usize) -> Vec<f64> {
        let dt = 1.0 / self.nt as f64;
        let (lo, hi, scale) = if n == 0 {
            (0, 1, 1.0 / dt)
        } else if n == self.nt {
            (n - 1, n, 1.0 / dt)
        } else {
            (n - 1, n + 1, 0.5 / dt)
        };
        if lo >= self.frozen {
            return vec![0.0; self.cofactor.slice_len()];
        }
        let (a, b) = (self.cofactor(lo), self.cofactor(hi));
        a.iter().zip(b).map(|(x, y)| (y - x) * scale).collect()
    }

    /// Smallest Jacobian over all stored samples.
    pub fn min_det(&self) -> f64 {
        self.det.as_slice().iter().fold(f64::INFINITY, |m, &d| m.min(d))
    }

    /// Rejects the flow map if `det ∇η ≤ 0` anywhere.
    pub fn check_invertible(&self) -> Result<(), FieldsError> {
        let [_, nx, ny, nz, _] = self.det.dims();
        for (k, &d) in self.det.as_slice().iter().enumerate() {
            if !(d > 0.0) {
                let iz = k % nz;
                let iy = (k / nz) % ny;
                let ix = (k / (nz * ny)) % nx;
                let t = k / (nz * ny * nx);
                return Err(FieldsError::NonPositiveJacobian { t, ix, iy, iz, det: d });
            }
        }
        Ok(())
    }

    /// `max ‖a ∇η − det(∇η) I‖_∞ / (1 + ‖∇η‖²_∞)` over stored samples.
    pub fn identity_defect(&self) -> f64 {
        let g = self.grad.as_slice().chunks_exact(9);
        let a = self.cofactor.as_slice().chunks_exact(9);
        g.zip(a).fold(0.0, |m, (g, a)| {
            let j = load3(g);
            let n = max_abs3(&j);
            m.max(adjugate_defect(&j, &load3(a)) / (1.0 + n * n))
        })
    }

    /// Piola residual over all stored slices.
    pub fn piola(&self, deriv: &Deriv) -> PiolaReport {
        piola_residual(deriv, &self.cofactor)
    }
}

/// Cofactor of every sample of a 9-component gradient field.
pub fn cofactor(grad: &SpaceTimeField) -> SpaceTimeField {
    assert_eq!(grad.components(), 9, "cofactor needs a tensor field");
    let mut out = grad.clone();
    for (g, a) in grad.as_slice().chunks_exact(9).zip(out.as_mut_slice().chunks_exact_mut(9)) {
        store3(&cofactor3(&load3(g)), a);
    }
    out
}

/// `a1 − a2` assembled as `B(D, S) + tr(D) I − D` with `D = ∇η1 − ∇η2`,
/// `S = ∇η1 + ∇η2 − 2I`, next to its deviation from direct subtraction.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorDifference {
    pub difference: SpaceTimeField,
    pub mismatch: f64,
}

pub fn cofactor_difference(
    a1: &SpaceTimeField,
    a2: &SpaceTimeField,
    grad1: &SpaceTimeField,
    grad2: &SpaceTimeField,
) -> Result<CofactorDifference, FieldsError> {
    let shapes_ok = a1.components() == 9
        && a1.same_shape(a2)
        && a1.same_shape(grad1)
        && a1.same_shape(grad2);
    if !shapes_ok {
        return Err(FieldsError::ShapeMismatch("cofactor difference needs four tensor fields on one grid"));
    }
    let mut out = a1.clone();
    let mut mismatch: f64 = 0.0;
    let chunks = out
        .as_mut_slice()
        .chunks_exact_mut(9)
        .zip(a1.as_slice().chunks_exact(9))
        .zip(a2.as_slice().chunks_exact(9))
        .zip(grad1.as_slice().chunks_exact(9).zip(grad2.as_slice().chunks_exact(9)));
    for (((o, x1), x2), (g1, g2)) in chunks {
        let e1 = sub3(&load3(g1), &IDENTITY);
        let e2 = sub3(&load3(g2), &IDENTITY);
        let d = sub3(&e1, &e2);
        let mut s = e1;
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += e2[i][j];
            }
        }
        let quad = bilinear_cofactor(&d, &s);
        let lin = cofactor_linear(&d);
        let mut diff = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                diff[i][j] = quad[i][j] + lin[i][j];
            }
        }
        let direct = sub3(&load3(x1), &load3(x2));
        mismatch = mismatch.max(max_abs3(&sub3(&diff, &direct)));
        store3(&diff, o);
    }
    Ok(CofactorDifference {
        difference: out,
        mismatch,
    })
}

/// `sup |∂_i a_ij|` for each column `j`, maximised over time samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiolaReport {
    pub per_column: [f64; 3],
    pub max: f64,
}

pub fn piola_residual(deriv: &Deriv, a: &SpaceTimeField) -> PiolaReport {
    assert_eq!(a.components(), 9, "Piola residual needs a tensor field");
    let mut per_column = [0.0f64; 3];
    for n in 0..a.time_samples() {
        let div = deriv.row_divergence(a.slice(n));
        for (k, v) in div.iter().enumerate() {
            per_column[k % 3] = per_column[k % 3].max(v.abs());
        }
    }
    PiolaReport {
        per_column,
        max: per_column.iter().fold(0.0, |m, &v| m.max(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_cutoff;
    use crate::geometry::{build_geometry, ChannelGeometry, GeometryConfig};

    fn geom(nt: usize) -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 8, 8, [8, 8, 8], nt)).unwrap()
    }

    #[test]
    fn cell_weights_reduce_to_trapezoid_and_integrate_cutoff() {
        let psi = make_cutoff(0.125, 1.0).unwrap();
        assert_eq!(cell_weights(&psi, 0.0, 0.125), (0.0625, 0.0625));
        assert_eq!(cell_weights(&psi, 0.25, 0.5), (0.0, 0.0));
        // ∫ψ over the ramp is half its width by symmetry of the smoothstep
        let (wa, wb) = cell_weights(&psi, 0.1, 0.3);
        assert!((wa + wb - (0.025 + 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn zero_velocity_gives_identity() {
        let g = geom(8);
        let d = Deriv::for_layer(&g, Layer::Fluid);
        let v = SpaceTimeField::zeros_on(&g, Layer::Fluid, 3);
        let psi = make_cutoff(0.25, 1.0).unwrap();
        let f = flow_map(&d, &v, &psi).unwrap();
        assert_eq!(f.frozen_index(), 4);
        assert!(f.displacement_field().max_abs() == 0.0);
        for n in 0..=8 {
            for (k, a) in f.cofactor(n).iter().enumerate() {
                let e = if k % 9 % 4 == 0 { 1.0 } else { 0.0 };
                assert_eq!(*a, e);
            }
            assert!(f.det(n).iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn constant_velocity_translates() {
        let g = geom(16);
        let d = Deriv::for_layer(&g, Layer::Fluid);
        let c = [0.3, -0.2, 0.1];
        let v = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 17, |_, _, _, _, o| o.copy_from_slice(&c));
        let psi = make_cutoff(0.25, 1.0).unwrap();
        let f = flow_map(&d, &v, &psi).unwrap();
        for n in 0..=4 {
            let t = n as f64 / 16.0;
            for (k, x) in f.displacement(n).iter().enumerate() {
                assert!((x - t * c[k % 3]).abs() < 1e-15);
            }
        }
        assert!(f.identity_defect() < 1e-15);
        // past the ramp: η − x = c ∫ψ = c (T̃ + T̃/2)
        for (k, x) in f.displacement(16).iter().enumerate() {
            assert!((x - 0.375 * c[k % 3]).abs() < 1e-14);
        }
    }

    #[test]
    fn shear_flow_map_at_plateau_end() {
        let g = geom(16);
        let d = Deriv::for_layer(&g, Layer::Fluid);
        let v = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 17, |_, _, y, _, o| {
            o[0] = y.sin();
            o[1] = 0.0;
            o[2] = 0.0;
        });
        let psi = make_cutoff(0.25, 1.0).unwrap();
        let f = flow_map(&d, &v, &psi).unwrap();
        let n = 4; // t = T̃
        let nz = g.fluid_nz();
        for ix in 0..8 {
            for iy in 0..8 {
                for iz in 0..nz {
                    let p = (ix * 8 + iy) * nz + iz;
                    let j = load3(&f.grad(n)[9 * p..9 * p + 9]);
                    let mut expect = IDENTITY;
                    expect[0][1] = 0.25 * g.y(iy).cos();
                    assert!(max_abs3(&sub3(&j, &expect)) < 1e-14);
                    assert!((f.det(n)[p] - 1.0).abs() < 1e-15);
                    let a = load3(&f.cofactor(n)[9 * p..9 * p + 9]);
                    assert!((det3(&a) - 1.0).abs() < 1e-14);
                    assert!((a[0][1] + expect[0][1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn cofactor_difference_of_identity_and_stretch() {
        let g = geom(4);
        let mk = |m: [f64; 9]| SpaceTimeField::from_fn(&g, Layer::Fluid, 9, 1, |_, _, _, _, o| o.copy_from_slice(&m));
        let g1 = mk([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let g2 = mk([2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let (a1, a2) = (cofactor(&g1), cofactor(&g2));
        let r = cofactor_difference(&a1, &a2, &g1, &g2).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0];
        for chunk in r.difference.as_slice().chunks_exact(9) {
            assert_eq!(chunk, expect);
        }
        assert_eq!(r.mismatch, 0.0);
        let same = cofactor_difference(&a1, &a1, &g1, &g1).unwrap();
        assert_eq!(same.difference.max_abs(), 0.0);
    }

    #[test]
    fn piola_residual_of_identity_is_zero() {
        let g = geom(4);
        let d = Deriv::for_layer(&g, Layer::Fluid);
        let f = FlowMapState::identity(&d, Layer::Fluid, 4);
        assert_eq!(f.piola(&d).max, 0.0);
    }

    #[test]
    fn resolved_horizontal_flow_map_has_spectral_piola_residual() {
        let g = geom(4);
        let d = Deriv::for_layer(&g, Layer::Fluid);
        let xi = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 1, |_, x, y, _, o| {
            o[0] = 0.1 * y.sin();
            o[1] = 0.1 * x.cos();
            o[2] = 0.05 * (x + y).sin();
        });
        let f = FlowMapState::from_displacement(&d, xi, 4);
        assert!(f.piola(&d).max <= 1e-10);
        assert!(f.identity_defect() < 1e-15);
    }
}
