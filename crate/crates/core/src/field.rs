//! Space-time sample storage.
//!
//! Samples are stored row-major in `(t, x, y, z, component)` order. Each time
//! slice is therefore a contiguous block of `nx * ny * nz * nc` values, which
//! is also the in-memory layout of the binary snapshot format.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{ChannelGeometry, Plane};

/// Which part of the channel a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Both fluid slabs, lower slab samples first (see
    /// [`ChannelGeometry::fluid_segments`]).
    Fluid,
    /// The elastic slab including both interface planes.
    Elastic,
    /// The two interface planes `z = L1`, `z = L2` (z index 0 and 1).
    Interface,
    /// The two outer wall planes `z = 0`, `z = L3` (z index 0 and 1).
    OuterBoundary,
}

impl Layer {
    /// Numeric tag used by the binary snapshot header.
    pub fn tag(self) -> u32 {
        match self {
            Layer::Fluid => 0,
            Layer::Elastic => 1,
            Layer::Interface => 2,
            Layer::OuterBoundary => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Layer::Fluid),
            1 => Some(Layer::Elastic),
            2 => Some(Layer::Interface),
            3 => Some(Layer::OuterBoundary),
            _ => None,
        }
    }

    /// Vertical sample count of this layer on `geom`.
    pub fn nz(self, geom: &ChannelGeometry) -> usize {
        match self {
            Layer::Fluid => geom.fluid_nz(),
            Layer::Elastic => geom.elastic_nz(),
            Layer::Interface | Layer::OuterBoundary => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Fluid => "fluid",
            Layer::Elastic => "elastic",
            Layer::Interface => "interface",
            Layer::OuterBoundary => "outer-boundary",
        }
    }
}

/// Real samples of a scalar, vector or tensor field on one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    layer: Layer,
    nt: usize,
    nx: usize,
    ny: usize,
    nz: usize,
    nc: usize,
    data: Vec<f64>,
}

impl SpaceTimeField {
    /// Zero field with `nt` time samples.
    pub fn zeros(layer: Layer, nt: usize, nx: usize, ny: usize, nz: usize, nc: usize) -> Self {
        Self {
            layer,
            nt,
            nx,
            ny,
            nz,
            nc,
            data: vec![0.0; nt * nx * ny * nz * nc],
        }
    }

    /// Zero field on `layer` with one sample per time level of `geom`
    /// (`nt + 1` samples on `[0, 1]`).
    pub fn zeros_on(geom: &ChannelGeometry, layer: Layer, nc: usize) -> Self {
        Self::zeros(layer, geom.nt() + 1, geom.nx(), geom.ny(), layer.nz(geom), nc)
    }

    /// Zero field on `layer` with a single time sample.
    pub fn static_on(geom: &ChannelGeometry, layer: Layer, nc: usize) -> Self {
        Self::zeros(layer, 1, geom.nx(), geom.ny(), layer.nz(geom), nc)
    }

    /// Wraps raw samples. Returns `None` if the length does not match.
    pub fn from_vec(
        layer: Layer,
        dims: [usize; 5],
        data: Vec<f64>,
    ) -> Option<Self> {
        let [nt, nx, ny, nz, nc] = dims;
        (data.len() == nt * nx * ny * nz * nc).then_some(Self {
            layer,
            nt,
            nx,
            ny,
            nz,
            nc,
            data,
        })
    }

    /// Samples `f(t, x, y, z, out)` at every grid point of `geom`.
    pub fn from_fn<F>(geom: &ChannelGeometry, layer: Layer, nc: usize, time_samples: usize, mut f: F) -> Self
    where
        F: FnMut(f64, f64, f64, f64, &mut [f64]),
    {
        let mut field = Self::zeros(layer, time_samples, geom.nx(), geom.ny(), layer.nz(geom), nc);
        let zs = layer_z(geom, layer);
        for n in 0..time_samples {
            let t = geom.time(n);
            for ix in 0..geom.nx() {
                for iy in 0..geom.ny() {
                    for (iz, &z) in zs.iter().enumerate() {
                        let k = field.index(n, ix, iy, iz, 0);
                        f(t, geom.x(ix), geom.y(iy), z, &mut field.data[k..k + nc]);
                    }
                }
            }
        }
        field
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    /// `[nt, nx, ny, nz, nc]`.
    pub fn dims(&self) -> [usize; 5] {
        [self.nt, self.nx, self.ny, self.nz, self.nc]
    }

    pub fn time_samples(&self) -> usize {
        self.nt
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

    pub fn components(&self) -> usize {
        self.nc
    }

    pub fn slice_len(&self) -> usize {
        self.nx * self.ny * self.nz * self.nc
    }

    #[inline]
    pub fn index(&self, t: usize, ix: usize, iy: usize, iz: usize, c: usize) -> usize {
        (((t * self.nx + ix) * self.ny + iy) * self.nz + iz) * self.nc + c
    }

    #[inline]
    pub fn get(&self, t: usize, ix: usize, iy: usize, iz: usize, c: usize) -> f64 {
        self.data[self.index(t, ix, iy, iz, c)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, ix: usize, iy: usize, iz: usize, c: usize, v: f64) {
        let k = self.index(t, ix, iy, iz, c);
        self.data[k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn slice(&self, t: usize) -> &[f64] {
        let n = self.slice_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn slice_mut(&mut self, t: usize) -> &mut [f64] {
        let n = self.slice_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    /// Single-time field holding slice `t`.
    pub fn snapshot(&self, t: usize) -> Self {
        Self {
            nt: 1,
            data: self.slice(t).to_vec(),
            ..*self
        }
    }

    /// Field with `time_samples` copies of this single-time field.
    pub fn repeated(&self, time_samples: usize) -> Self {
        assert_eq!(self.nt, 1, "repeated expects a single-time field");
        let mut data = Vec::with_capacity(self.data.len() * time_samples);
        for _ in 0..time_samples {
            data.extend_from_slice(&self.data);
        }
        Self {
            nt: time_samples,
            data,
            ..*self
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layer == other.layer && self.dims() == other.dims()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        assert!(self.same_shape(other), "field shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Restriction of a fluid or elastic field to the two interface planes.
    pub fn interface_trace(&self, geom: &ChannelGeometry) -> Self {
        let rows = match self.layer {
            Layer::Fluid => Plane::BOTH.map(|p| geom.fluid_interface_index(p)),
            Layer::Elastic => Plane::BOTH.map(|p| geom.elastic_interface_index(p)),
            _ => panic!("interface trace of a {} field", self.layer.name()),
        };
        self.restrict_rows(Layer::Interface, rows)
    }

    /// Restriction of a fluid field to the outer walls `z = 0`, `z = L3`.
    pub fn wall_trace(&self, geom: &ChannelGeometry) -> Self {
        assert_eq!(self.layer, Layer::Fluid, "wall trace needs a fluid field");
        self.restrict_rows(Layer::OuterBoundary, [geom.fluid_wall_index(0), geom.fluid_wall_index(1)])
    }

    fn restrict_rows(&self, layer: Layer, rows: [usize; 2]) -> Self {
        let mut out = Self::zeros(layer, self.nt, self.nx, self.ny, 2, self.nc);
        for t in 0..self.nt {
            for ix in 0..self.nx {
                for iy in 0..self.ny {
                    for (k, &iz) in rows.iter().enumerate() {
                        for c in 0..self.nc {
                            out.set(t, ix, iy, k, c, self.get(t, ix, iy, iz, c));
                        }
                    }
                }
            }
        }
        out
    }

    /// Single component as a scalar field.
    pub fn component(&self, c: usize) -> Self {
        let mut out = Self::zeros(self.layer, self.nt, self.nx, self.ny, self.nz, 1);
        for (o, chunk) in out.data.iter_mut().zip(self.data.chunks_exact(self.nc)) {
            *o = chunk[c];
        }
        out
    }
}

/// Vertical coordinates of every z index of `layer`.
pub fn layer_z(geom: &ChannelGeometry, layer: Layer) -> Vec<f64> {
    let [l1, l2, l3] = geom.lengths();
    match layer {
        Layer::Fluid => (0..geom.fluid_nz()).map(|i| geom.fluid_z(i)).collect(),
        Layer::Elastic => (0..geom.elastic_nz()).map(|i| geom.elastic_z(i)).collect(),
        Layer::Interface => vec![l1, l2],
        Layer::OuterBoundary => vec![0.0, l3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryConfig};

    fn geom() -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 4, 4, [4, 4, 4], 4)).unwrap()
    }

    #[test]
    fn from_fn_places_samples_row_major() {
        let g = geom();
        let f = SpaceTimeField::from_fn(&g, Layer::Fluid, 2, 5, |t, x, _, z, out| {
            out[0] = t + z;
            out[1] = x;
        });
        assert_eq!(f.dims(), [5, 4, 4, 10, 2]);
        assert_eq!(f.get(2, 1, 0, 6, 0), 0.5 + 2.25);
        assert!((f.get(0, 1, 3, 0, 1) - g.x(1)).abs() < 1e-15);
        assert_eq!(f.index(1, 0, 0, 0, 0), f.slice_len());
    }

    #[test]
    fn traces_pick_interface_and_wall_rows() {
        let g = geom();
        let f = SpaceTimeField::from_fn(&g, Layer::Fluid, 1, 1, |_, _, _, z, out| out[0] = z);
        let tr = f.interface_trace(&g);
        assert_eq!(tr.get(0, 2, 2, 0, 0), 1.0);
        assert_eq!(tr.get(0, 2, 2, 1, 0), 2.0);
        let wall = f.wall_trace(&g);
        assert_eq!(wall.get(0, 0, 0, 0, 0), 0.0);
        assert_eq!(wall.get(0, 0, 0, 1, 0), 3.0);
        let e = SpaceTimeField::from_fn(&g, Layer::Elastic, 1, 1, |_, _, _, z, out| out[0] = z);
        assert_eq!(e.interface_trace(&g), tr);
    }

    #[test]
    fn layer_tags_round_trip() {
        for l in [Layer::Fluid, Layer::Elastic, Layer::Interface, Layer::OuterBoundary] {
            assert_eq!(Layer::from_tag(l.tag()), Some(l));
        }
        assert_eq!(Layer::from_tag(9), None);
    }
}
