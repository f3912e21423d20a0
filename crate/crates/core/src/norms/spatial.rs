use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::NormsError;
use crate::field::{Layer, SpaceTimeField};
use crate::geometry::ChannelGeometry;
use crate::spectral::{Dct1, Fft2};

/// Largest supported spatial order.
pub const MAX_SPACE_ORDER: f64 = 4.0;

#[derive(Debug, Clone)]
struct Slab {
    offset: usize,
    intervals: usize,
    length: f64,
    dct: Dct1,
}

/// Linear map from a field slice to a real vector whose Euclidean norm is
/// the spectral `H^s` norm of the slice.
#[derive(Debug, Clone)]
pub struct SpatialEmbedding {
    layer: Layer,
    nz: usize,
    fft: Fft2,
    slabs: Vec<Slab>,
    /// `sqrt(dx dy w_z)` per z index, the `s = 0` shortcut.
    l2_weights: Vec<f64>,
}

pub(crate) fn check_space_order(s: f64) -> Result<(), NormsError> {
    if (0.0..=MAX_SPACE_ORDER).contains(&s) {
        Ok(())
    } else {
        Err(NormsError::SpaceOrder(s))
    }
}

impl SpatialEmbedding {
    pub fn new(geom: &ChannelGeometry, layer: Layer) -> Self {
        let slab = |s: crate::geometry::Segment| Slab {
            offset: s.offset,
            intervals: s.intervals,
            length: s.length(),
            dct: Dct1::new(s.intervals),
        };
        let slabs = match layer {
            Layer::Fluid => geom.fluid_segments().into_iter().map(slab).collect(),
            Layer::Elastic => vec![slab(geom.segment(crate::geometry::Slab::Elastic))],
            Layer::Interface | Layer::OuterBoundary => Vec::new(),
        };
        let nz = layer.nz(geom);
        let cell = geom.dx() * geom.dy();
        let mut l2_weights = vec![if slabs.is_empty() { cell } else { 0.0 }; nz];
        for s in &slabs {
            let h = s.length / s.intervals as f64;
            for i in 0..=s.intervals {
                let end = i == 0 || i == s.intervals;
                l2_weights[s.offset + i] += cell * h * if end { 0.5 } else { 1.0 };
            }
        }
        for w in &mut l2_weights {
            *w = w.sqrt();
        }
        Self {
            layer,
            nz,
            fft: Fft2::new(geom.nx(), geom.ny()),
            slabs,
            l2_weights,
        }
    }

    /// Weighted samples whose Euclidean norm is the discrete `L²` norm. By
    /// Parseval this agrees with `embed(.., 0.0)` up to round-off.
    pub fn embed_l2(&self, slice: &[f64], nc: usize) -> Vec<f64> {
        let nz = self.nz;
        slice
            .iter()
            .enumerate()
            .map(|(k, v)| v * self.l2_weights[(k / nc) % nz])
            .collect()
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// Embedding of an `nc`-component slice at order `s`.
    pub fn embed(&self, slice: &[f64], nc: usize, s: f64) -> Vec<f64> {
        let plane_len = self.fft.len();
        let nz = self.nz;
        debug_assert_eq!(slice.len(), plane_len * nz * nc);
        let area = 4.0 * PI * PI;
        let mut out = Vec::new();
        let mut plane = vec![0.0; plane_len];
        let mut hat = vec![Complex64::new(0.0, 0.0); plane_len * nz];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); plane_len];
        let push = |out: &mut Vec<f64>, c: Complex64, w: f64| {
            out.push(w * c.re);
            out.push(w * c.im);
        };
        for c in 0..nc {
            for iz in 0..nz {
                for (p, v) in plane.iter_mut().enumerate() {
                    *v = slice[(p * nz + iz) * nc + c];
                }
                self.fft.forward_real(&plane, &mut coeffs);
                hat[iz * plane_len..(iz + 1) * plane_len].copy_from_slice(&coeffs);
            }
            if self.slabs.is_empty() {
                // horizontal planes only: each z row is one plane
                for iz in 0..nz {
                    for m in 0..plane_len {
                        let w = (area * (1.0 + self.fft.k2(m)).powf(s)).sqrt();
                        push(&mut out, hat[iz * plane_len + m], w);
                    }
                }
                continue;
            }
            for slab in &self.slabs {
                let n = slab.intervals;
                let h = slab.length / n as f64;
                let mut col = vec![Complex64::new(0.0, 0.0); n + 1];
                let mut dct = vec![Complex64::new(0.0, 0.0); n + 1];
                for m in 0..plane_len {
                    for (j, v) in col.iter_mut().enumerate() {
                        *v = hat[(slab.offset + j) * plane_len + m];
                    }
                    slab.dct.forward(&col, &mut dct);
                    let k2 = self.fft.k2(m);
                    for (mz, d) in dct.iter().enumerate() {
                        let kz = mz as f64 * PI / slab.length;
                        let w = (area * h * slab.dct.gamma(mz) * (1.0 + k2 + kz * kz).powf(s)).sqrt();
                        push(&mut out, *d, w);
                    }
                }
            }
        }
        out
    }

    pub fn norm(&self, slice: &[f64], nc: usize, s: f64) -> f64 {
        self.embed(slice, nc, s).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Spectral `H^s` norm of the first time sample of `f`.
pub fn spatial_fractional_norm(geom: &ChannelGeometry, f: &SpaceTimeField, s: f64) -> Result<f64, NormsError> {
    check_space_order(s)?;
    let emb = SpatialEmbedding::new(geom, f.layer());
    Ok(emb.norm(f.slice(0), f.components(), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryConfig};

    fn geom() -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.5, 3.0], 8, 8, [8, 12, 6], 4)).unwrap()
    }

    /// Horizontal rectangle rule times vertical trapezoid rule, per slab.
    fn discrete_l2(g: &ChannelGeometry, f: &SpaceTimeField) -> f64 {
        let d = crate::fields::Deriv::for_layer(g, f.layer());
        let nz = f.nz();
        let mut w = vec![0.0; nz];
        for seg in d.segments() {
            for i in 0..=seg.intervals {
                let end = i == 0 || i == seg.intervals;
                w[seg.offset + i] += if end { 0.5 } else { 1.0 } * seg.spacing;
            }
        }
        let mut s = 0.0;
        for ix in 0..f.nx() {
            for iy in 0..f.ny() {
                for (iz, wz) in w.iter().enumerate() {
                    for c in 0..f.components() {
                        s += wz * g.dx() * g.dy() * f.get(0, ix, iy, iz, c).powi(2);
                    }
                }
            }
        }
        s.sqrt()
    }

    #[test]
    fn constant_has_volume_norm() {
        let g = geom();
        for layer in [Layer::Fluid, Layer::Elastic] {
            let f = SpaceTimeField::from_fn(&g, layer, 1, 1, |_, _, _, _, o| o[0] = 1.0);
            // both layers have thickness 1.5 here
            let vol = 1.5 * 4.0 * PI * PI;
            for s in [0.0, 1.3, 4.0] {
                let n = spatial_fractional_norm(&g, &f, s).unwrap();
                assert!((n - vol.sqrt()).abs() < 1e-12, "{layer:?} {s} {n}");
            }
        }
    }

    #[test]
    fn single_mode_multiplier() {
        let g = geom();
        let f = SpaceTimeField::from_fn(&g, Layer::Elastic, 1, 1, |_, x, _, _, o| o[0] = x.sin());
        let n = spatial_fractional_norm(&g, &f, 2.0).unwrap();
        let l2_sq = 2.0 * PI * PI * 1.5;
        assert!((n * n - 4.0 * l2_sq).abs() < 1e-11);
    }

    #[test]
    fn order_zero_is_discrete_l2() {
        let g = geom();
        let f = SpaceTimeField::from_fn(&g, Layer::Fluid, 2, 1, |_, x, y, z, o| {
            o[0] = (x + z).sin() * y.cos() + z * z;
            o[1] = (3.0 * z).exp() * (2.0 * x).cos();
        });
        let a = spatial_fractional_norm(&g, &f, 0.0).unwrap();
        let b = discrete_l2(&g, &f);
        assert!((a - b).abs() < 1e-12 * b);
        let emb = SpatialEmbedding::new(&g, Layer::Fluid);
        let c = emb.embed_l2(f.slice(0), 2).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((c - b).abs() < 1e-13 * b);
    }

    #[test]
    fn interface_fields_use_horizontal_multiplier() {
        let g = geom();
        let f = SpaceTimeField::from_fn(&g, Layer::Interface, 1, 1, |_, x, _, _, o| o[0] = x.sin());
        let n = spatial_fractional_norm(&g, &f, 1.0).unwrap();
        // two planes, each ‖sin x‖² = 2π², multiplier 2
        assert!((n * n - 2.0 * 2.0 * 2.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn rejects_out_of_range_order() {
        let g = geom();
        let f = SpaceTimeField::static_on(&g, Layer::Fluid, 1);
        assert_eq!(spatial_fractional_norm(&g, &f, 4.5), Err(NormsError::SpaceOrder(4.5)));
    }
}
