//! Spatial derivatives on one layer: spectral in `x`, `y`; fourth-order
//! finite differences in `z` with one-sided closures at every slab end.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::field::Layer;
use crate::geometry::ChannelGeometry;
use crate::spectral::Fft2;

/// A run of uniformly spaced z samples inside a layer's z index range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalSegment {
    pub offset: usize,
    pub intervals: usize,
    pub spacing: f64,
}

const CENTERED: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Fourth-order first derivative of uniformly spaced samples.
pub fn d1_fourth_order(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    assert!(n >= 5, "fourth-order stencil needs five samples");
    let s = 1.0 / (12.0 * h);
    let dot = |w: &[f64; 5], start: usize| -> f64 { (0..5).map(|k| w[k] * f[start + k]).sum() };
    let dot_rev = |w: &[f64; 5], end: usize| -> f64 { (0..5).map(|k| w[k] * f[end - k]).sum() };
    out[0] = s * dot(&EDGE0, 0);
    out[1] = s * dot(&EDGE1, 0);
    for i in 2..n - 2 {
        out[i] = s * dot(&CENTERED, i - 2);
    }
    out[n - 2] = -s * dot_rev(&EDGE1, n - 1);
    out[n - 1] = -s * dot_rev(&EDGE0, n - 1);
}

/// Derivative operator bound to a layer's grid.
#[derive(Debug, Clone)]
pub struct Deriv {
    nx: usize,
    ny: usize,
    nz: usize,
    segments: Vec<VerticalSegment>,
    fft: Fft2,
}

impl Deriv {
    pub fn new(nx: usize, ny: usize, nz: usize, segments: Vec<VerticalSegment>) -> Self {
        Self {
            nx,
            ny,
            nz,
            segments,
            fft: Fft2::new(nx, ny),
        }
    }

    /// Operator for `layer`. Interface and wall layers only support
    /// horizontal derivatives.
    pub fn for_layer(geom: &ChannelGeometry, layer: Layer) -> Self {
        let seg = |s: crate::geometry::Segment| VerticalSegment {
            offset: s.offset,
            intervals: s.intervals,
            spacing: s.spacing,
        };
        let segments = match layer {
            Layer::Fluid => geom.fluid_segments().into_iter().map(seg).collect(),
            Layer::Elastic => vec![seg(geom.segment(crate::geometry::Slab::Elastic))],
            Layer::Interface | Layer::OuterBoundary => Vec::new(),
        };
        Self::new(geom.nx(), geom.ny(), layer.nz(geom), segments)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn segments(&self) -> &[VerticalSegment] {
        &self.segments
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// `∂_axis` of component `c` of a slice with `nc` components; writes a
    /// scalar slice.
    pub fn derivative(&self, slice: &[f64], nc: usize, c: usize, axis: usize, out: &mut [f64]) {
        debug_assert_eq!(slice.len(), self.points() * nc);
        debug_assert_eq!(out.len(), self.points());
        match axis {
            0 | 1 => self.horizontal(slice, nc, c, axis, out),
            2 => self.vertical(slice, nc, c, out),
            _ => panic!("axis {axis} out of range"),
        }
    }

    fn horizontal(&self, slice: &[f64], nc: usize, c: usize, axis: usize, out: &mut [f64]) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let plane_len = nx * ny;
        let mut plane = vec![0.0; plane_len];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); plane_len];
        for iz in 0..nz {
            for (p, v) in plane.iter_mut().enumerate() {
                *v = slice[(p * nz + iz) * nc + c];
            }
            self.fft.forward_real(&plane, &mut coeffs);
            for (m, cf) in coeffs.iter_mut().enumerate() {
                let (kx, ky) = self.fft.derivative_wavevector(m);
                let k = if axis == 0 { kx } else { ky };
                *cf *= Complex64::new(0.0, k);
            }
            self.fft.inverse_real(&coeffs, &mut plane);
            for (p, v) in plane.iter().enumerate() {
                out[p * nz + iz] = *v;
            }
        }
    }

    fn vertical(&self, slice: &[f64], nc: usize, c: usize, out: &mut [f64]) {
        assert!(!self.segments.is_empty(), "layer has no vertical extent");
        let nz = self.nz;
        let mut col = Vec::new();
        let mut dcol = Vec::new();
        for p in 0..self.nx * self.ny {
            for seg in &self.segments {
                let n = seg.intervals + 1;
                col.clear();
                col.extend((0..n).map(|i| slice[(p * nz + seg.offset + i) * nc + c]));
                dcol.resize(n, 0.0);
                d1_fourth_order(&col, seg.spacing, &mut dcol);
                for i in 0..n {
                    out[p * nz + seg.offset + i] = dcol[i];
                }
            }
        }
    }

    /// Full gradient of an `nc`-component slice. Output has `3 nc`
    /// components per point, component `3 c + m` holding `∂_m f_c`.
    pub fn gradient(&self, slice: &[f64], nc: usize) -> Vec<f64> {
        let np = self.points();
        let mut out = vec![0.0; np * nc * 3];
        let mut tmp = vec![0.0; np];
        for c in 0..nc {
            for m in 0..3 {
                self.derivative(slice, nc, c, m, &mut tmp);
                for p in 0..np {
                    out[p * nc * 3 + 3 * c + m] = tmp[p];
                }
            }
        }
        out
    }

    /// Divergence of the rows of a tensor slice (`9` components,
    /// `T_ij` at `3 i + j`): returns `Σ_i ∂_i T_ij` for each `j`.
    pub fn row_divergence(&self, tensor: &[f64]) -> Vec<f64> {
        let np = self.points();
        let mut out = vec![0.0; np * 3];
        let mut tmp = vec![0.0; np];
        for i in 0..3 {
            for j in 0..3 {
                self.derivative(tensor, 9, 3 * i + j, i, &mut tmp);
                for p in 0..np {
                    out[p * 3 + j] += tmp[p];
                }
            }
        }
        out
    }
}
