//! Initial pressure: `Δq0 = −∂_k v0_i ∂_i v0_k` in the fluid, Dirichlet data
//! on the interface planes and Neumann data on the outer walls, solved per
//! horizontal mode with second-order differences in `z`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::StokesError;
use crate::field::{Layer, SpaceTimeField};
use crate::fields::Deriv;
use crate::geometry::{ChannelGeometry, Plane};
use crate::linalg::BandMatrix;
use crate::spectral::Fft2;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialPressure {
    /// Pressure on the fluid layer, one time sample.
    pub q0: SpaceTimeField,
    /// Largest algebraic residual of the per-mode systems.
    pub residual: f64,
    /// Largest `|div v0|`; reported, not repaired.
    pub divergence: f64,
}

/// Right side, interface values and wall slopes `∂_z q0` of the problem.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PressureData {
    pub rhs: Vec<f64>,
    /// `(∂v0/∂N − ∂w0/∂N)·N` per interface point, plane-major pairs.
    pub dirichlet: Vec<f64>,
    /// `∂_z q0 = Δv0_z` per wall point; with the outward wall normal this is
    /// the Neumann condition `∂q0/∂N = Δv0·N`.
    pub wall_slope: Vec<f64>,
    pub divergence: f64,
}

pub(crate) fn pressure_data(geom: &ChannelGeometry, v0: &[f64], w0: &[f64]) -> PressureData {
    let fd = Deriv::for_layer(geom, Layer::Fluid);
    let ed = Deriv::for_layer(geom, Layer::Elastic);
    let (np, nz, nze) = (fd.points(), geom.fluid_nz(), geom.elastic_nz());
    let grad = fd.gradient(v0, 3);
    let mut rhs = vec![0.0; np];
    let mut divergence: f64 = 0.0;
    for p in 0..np {
        let g = &grad[9 * p..9 * p + 9];
        let mut s = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                s += g[3 * i + k] * g[3 * k + i];
            }
        }
        rhs[p] = -s;
        divergence = divergence.max((g[0] + g[4] + g[8]).abs());
    }
    let wgrad = ed.gradient(w0, 3);
    let mut dirichlet = vec![0.0; geom.plane_len() * 2];
    for pl in 0..geom.plane_len() {
        for plane in Plane::BOTH {
            let fi = pl * nz + geom.fluid_interface_index(plane);
            let ei = pl * nze + geom.elastic_interface_index(plane);
            // N = ±e_z, so (∂_N v − ∂_N w)·N = ∂_z v_z − ∂_z w_z
            dirichlet[pl * 2 + plane.index()] = grad[9 * fi + 8] - wgrad[9 * ei + 8];
        }
    }
    let mut lap = vec![0.0; np];
    let mut first = vec![0.0; np];
    let mut second = vec![0.0; np];
    for m in 0..3 {
        fd.derivative(v0, 3, 2, m, &mut first);
        fd.derivative(&first, 1, 0, m, &mut second);
        for (l, s) in lap.iter_mut().zip(&second) {
            *l += s;
        }
    }
    let mut wall_slope = vec![0.0; geom.plane_len() * 2];
    for pl in 0..geom.plane_len() {
        for w in 0..2 {
            wall_slope[pl * 2 + w] = lap[pl * nz + geom.fluid_wall_index(w)];
        }
    }
    PressureData {
        rhs,
        dirichlet,
        wall_slope,
        divergence,
    }
}

/// Solves for the initial pressure. `v0` is a one-sample fluid velocity,
/// `w0` a one-sample elastic displacement.
pub fn initial_pressure(geom: &ChannelGeometry, v0: &SpaceTimeField, w0: &SpaceTimeField) -> Result<InitialPressure, StokesError> {
    let fluid = [geom.nx(), geom.ny(), geom.fluid_nz(), 3];
    let elastic = [geom.nx(), geom.ny(), geom.elastic_nz(), 3];
    if v0.layer() != Layer::Fluid || v0.dims()[1..] != fluid {
        return Err(StokesError::Shape("initial velocity"));
    }
    if w0.layer() != Layer::Elastic || w0.dims()[1..] != elastic {
        return Err(StokesError::Shape("initial displacement"));
    }
    let data = pressure_data(geom, v0.slice(0), w0.slice(0));
    let fft = Fft2::new(geom.nx(), geom.ny());
    let nz = geom.fluid_nz();
    let len = fft.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut rhs = vec![zero; len * nz];
    fft.planes_forward(&data.rhs, nz, 1, &mut rhs);
    let mut dir = vec![zero; len * 2];
    fft.planes_forward(&data.dirichlet, 2, 1, &mut dir);
    let mut slope = vec![zero; len * 2];
    fft.planes_forward(&data.wall_slope, 2, 1, &mut slope);

    let mut modes = vec![zero; len * nz];
    let mut residual: f64 = 0.0;
    for m in 0..len {
        let k2 = fft.k2(m);
        for (si, seg) in geom.fluid_segments().into_iter().enumerate() {
            let (n, h) = (seg.intervals, seg.spacing);
            // lower slab: wall at node 0, interface at node n; upper: reversed
            let (wall, iface) = if si == 0 { (0, n) } else { (n, 0) };
            let plane = if si == 0 { Plane::Lower } else { Plane::Upper };
            let mut a = BandMatrix::new(n + 1, 1, 1);
            let mut b = vec![zero; n + 1];
            for i in 0..=n {
                if i == iface {
                    a.add_re(i, i, 1.0);
                    b[i] = dir[m * 2 + plane.index()];
                    continue;
                }
                b[i] = rhs[m * nz + seg.offset + i];
                a.add_re(i, i, -2.0 / (h * h) - k2);
                if i == wall {
                    let inner = if i == 0 { 1 } else { n - 1 };
                    let dir_sign = if i == 0 { 1.0 } else { -1.0 };
                    a.add_re(i, inner, 2.0 / (h * h));
                    b[i] += slope[m * 2 + si] * (2.0 * dir_sign / h);
                } else {
                    a.add_re(i, i - 1, 1.0 / (h * h));
                    a.add_re(i, i + 1, 1.0 / (h * h));
                }
            }
            let lu = a.clone().factor().map_err(|e| {
                let (kx, ky) = fft.wavevector(m);
                StokesError::Singular { kx, ky, slab: if si == 0 { "lower" } else { "upper" }, column: e.column }
            })?;
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            let mut ax = vec![zero; n + 1];
            a.mul(&x, &mut ax);
            let scale = b.iter().fold(1.0f64, |s, v| s.max(v.norm()));
            residual = residual.max(ax.iter().zip(&b).fold(0.0f64, |r, (p, q)| r.max((p - q).norm())) / scale);
            for (i, v) in x.into_iter().enumerate() {
                modes[m * nz + seg.offset + i] = v;
            }
        }
    }
    let mut q0 = SpaceTimeField::static_on(geom, Layer::Fluid, 1);
    fft.planes_inverse(&modes, nz, 1, q0.slice_mut(0));
    Ok(InitialPressure {
        q0,
        residual,
        divergence: data.divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryConfig};
    #[allow(unused_imports)]
    use num_traits::Float;

    fn taylor_green(geom: &ChannelGeometry) -> SpaceTimeField {
        SpaceTimeField::from_fn(geom, Layer::Fluid, 3, 1, |_, x, y, _, o| {
            o[0] = x.cos() * y.sin();
            o[1] = -x.sin() * y.cos();
            o[2] = 0.0;
        })
    }

    #[test]
    fn zero_velocity_gives_zero_pressure() {
        let g = build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 4, 4, [8, 4, 8], 4)).unwrap();
        let v0 = SpaceTimeField::static_on(&g, Layer::Fluid, 3);
        let w0 = SpaceTimeField::static_on(&g, Layer::Elastic, 3);
        let q = initial_pressure(&g, &v0, &w0).unwrap();
        assert_eq!(q.q0.max_abs(), 0.0);
    }

    #[test]
    fn taylor_green_matches_closed_form() {
        // Δq = cos 2x + cos 2y, q = 0 on the interfaces, ∂_z q = 0 on the walls:
        // q = (cos 2x + cos 2y) Q(z) with Q'' − 4Q = 1
        let (l1, l2, l3) = (1.0f64, 2.0f64, 3.0f64);
        let g = build_geometry(&GeometryConfig::new([l1, l2, l3], 8, 8, [64, 4, 64], 4)).unwrap();
        let v0 = taylor_green(&g);
        let w0 = SpaceTimeField::static_on(&g, Layer::Elastic, 3);
        let q = initial_pressure(&g, &v0, &w0).unwrap();
        assert!(q.residual < 1e-12 && q.divergence < 1e-12);
        let zs = crate::field::layer_z(&g, Layer::Fluid);
        let mut err: f64 = 0.0;
        for ix in 0..8 {
            for iy in 0..8 {
                for (iz, &z) in zs.iter().enumerate() {
                    let big_q = if z <= l1 {
                        -0.25 + (2.0 * z).cosh() / (4.0 * (2.0 * l1).cosh())
                    } else {
                        -0.25 + (2.0 * (l3 - z)).cosh() / (4.0 * (2.0 * (l3 - l2)).cosh())
                    };
                    let exact = ((2.0 * g.x(ix)).cos() + (2.0 * g.y(iy)).cos()) * big_q;
                    err = err.max((q.q0.get(0, ix, iy, iz, 0) - exact).abs());
                }
            }
        }
        assert!(err < 2e-5, "{err}");
    }

    /// Dense physical-space assembly of the same discretisation, solved by
    /// Gaussian elimination.
    fn dense_oracle(g: &ChannelGeometry, data: &PressureData) -> Vec<f64> {
        let (nx, ny, nz) = (g.nx(), g.ny(), g.fluid_nz());
        let n = nx * ny * nz;
        let d2 = |n: usize, i: usize, j: usize| -> f64 {
            (0..n)
                .map(|k| {
                    let kk = crate::spectral::wavenumber(k, n);
                    let th = kk * 2.0 * core::f64::consts::PI * (i as f64 - j as f64) / n as f64;
                    -kk * kk * th.cos() / n as f64
                })
                .sum()
        };
        let idx = |ix: usize, iy: usize, iz: usize| (ix * ny + iy) * nz + iz;
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        let segs = g.fluid_segments();
        for ix in 0..nx {
            for iy in 0..ny {
                let pl = ix * ny + iy;
                for (si, seg) in segs.iter().enumerate() {
                    let (m, h) = (seg.intervals, seg.spacing);
                    let (wall, iface) = if si == 0 { (0, m) } else { (m, 0) };
                    for i in 0..=m {
                        let r = idx(ix, iy, seg.offset + i);
                        if i == iface {
                            a[r][r] = 1.0;
                            b[r] = data.dirichlet[pl * 2 + si];
                            continue;
                        }
                        b[r] = data.rhs[r];
                        for jx in 0..nx {
                            a[r][idx(jx, iy, seg.offset + i)] += d2(nx, ix, jx);
                        }
                        for jy in 0..ny {
                            a[r][idx(ix, jy, seg.offset + i)] += d2(ny, iy, jy);
                        }
                        a[r][r] -= 2.0 / (h * h);
                        if i == wall {
                            let (inner, sign) = if i == 0 { (1, 1.0) } else { (m - 1, -1.0) };
                            a[r][idx(ix, iy, seg.offset + inner)] += 2.0 / (h * h);
                            b[r] += data.wall_slope[pl * 2 + si] * 2.0 * sign / h;
                        } else {
                            a[r][idx(ix, iy, seg.offset + i - 1)] += 1.0 / (h * h);
                            a[r][idx(ix, iy, seg.offset + i + 1)] += 1.0 / (h * h);
                        }
                    }
                }
            }
        }
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, piv);
            b.swap(k, piv);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                if f != 0.0 {
                    for j in k..n {
                        a[i][j] -= f * a[k][j];
                    }
                    b[i] -= f * b[k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn matches_dense_oracle_with_mixed_data() {
        let g = build_geometry(&GeometryConfig::new([0.5, 1.0, 1.75], 4, 4, [6, 4, 6], 4)).unwrap();
        let v0 = SpaceTimeField::from_fn(&g, Layer::Fluid, 3, 1, |_, x, y, z, o| {
            o[0] = (x + 0.3).sin() * z * z;
            o[1] = (y - 0.2 * x).cos() * (1.0 + z);
            o[2] = (x + y).sin() * z.sin() + 0.1 * z * z * z;
        });
        let w0 = SpaceTimeField::from_fn(&g, Layer::Elastic, 3, 1, |_, x, _, z, o| {
            o[2] = 0.2 * x.cos() * z * z;
        });
        let q = initial_pressure(&g, &v0, &w0).unwrap();
        let data = pressure_data(&g, v0.slice(0), w0.slice(0));
        let oracle = dense_oracle(&g, &data);
        let scale = oracle.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (a, b) in q.q0.slice(0).iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8 * scale, "{a} {b}");
        }
    }
}
