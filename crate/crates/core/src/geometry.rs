//! Periodic channel decomposition.
//!
//! The reference domain is `T² × (0, L3)` with `T²` the torus of side 2π. It
//! splits into the lower fluid slab `(0, L1)`, the elastic slab `(L1, L2)` and
//! the upper fluid slab `(L2, L3)`. The planes `z = L1` and `z = L2` form the
//! interface `Γc`; `z = 0` and `z = L3` form the outer wall `Γf`.
//!
//! Every slab carries its own uniform vertical grid. Interface planes are
//! grid planes of both adjacent slabs, so a fluid field and an elastic field
//! both own a sample row at `z = L1` (and at `z = L2`).

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use thiserror::Error;

/// Relative tolerance used when checking that a length is an integer
/// multiple of a requested vertical spacing.
const GRID_ALIGNMENT_TOL: f64 = 1e-9;

/// Smallest admissible sample count in any direction.
pub const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("lengths not strictly ordered: need 0 < L1 < L2 < L3, got ({0}, {1}, {2})")]
    LengthsNotOrdered(f64, f64, f64),
    #[error("{axis} sample count {count} is below the minimum of {MIN_SAMPLES}")]
    TooFewSamples { axis: &'static str, count: usize },
    #[error("{axis} sample count {count} is not a power of two")]
    NotPowerOfTwo { axis: &'static str, count: usize },
    #[error("interface plane z = {z} is not representable on a grid with spacing {spacing}")]
    InterfaceOffGrid { z: f64, spacing: f64 },
}

/// Vertical resolution request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vertical {
    /// Interval counts for (lower fluid, elastic, upper fluid).
    PerLayer([usize; 3]),
    /// One spacing for the whole channel; every layer length must be an
    /// integer multiple of it.
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    /// `(L1, L2, L3)`.
    pub lengths: [f64; 3],
    pub nx: usize,
    pub ny: usize,
    pub vertical: Vertical,
    /// Number of time steps on the reference interval `[0, 1]`.
    pub nt: usize,
}

impl GeometryConfig {
    pub fn new(lengths: [f64; 3], nx: usize, ny: usize, nz: [usize; 3], nt: usize) -> Self {
        Self {
            lengths,
            nx,
            ny,
            vertical: Vertical::PerLayer(nz),
            nt,
        }
    }
}

/// One of the three slabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slab {
    LowerFluid,
    Elastic,
    UpperFluid,
}

/// The two interface planes of `Γc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    /// `z = L1`.
    Lower,
    /// `z = L2`.
    Upper,
}

impl Plane {
    pub const BOTH: [Plane; 2] = [Plane::Lower, Plane::Upper];

    pub fn index(self) -> usize {
        match self {
            Plane::Lower => 0,
            Plane::Upper => 1,
        }
    }

    /// Vertical component of the unit normal pointing out of the elastic slab.
    pub fn normal_sign(self) -> f64 {
        match self {
            Plane::Lower => -1.0,
            Plane::Upper => 1.0,
        }
    }
}

/// A piece of `Γc` carrying its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfacePatch {
    pub plane: Plane,
}

/// Unit normal on an interface plane, outward with respect to the elastic slab.
pub fn normal_at(patch: InterfacePatch) -> [f64; 3] {
    [0.0, 0.0, patch.plane.normal_sign()]
}

/// A uniformly spaced run of vertical samples inside a field's z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// Index of the first sample of the run along the field's z axis.
    pub offset: usize,
    /// Number of intervals; the run holds `intervals + 1` samples.
    pub intervals: usize,
    pub z0: f64,
    pub spacing: f64,
}

impl Segment {
    pub fn samples(&self) -> usize {
        self.intervals + 1
    }

    pub fn length(&self) -> f64 {
        self.spacing * self.intervals as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z0 + self.spacing * i as f64
    }
}

/// Classification of a vertical position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneKind {
    OuterWall,
    Interface(Plane),
    Interior(Slab),
}

/// Validated channel geometry. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGeometry {
    config: GeometryConfig,
    lengths: [f64; 3],
    nx: usize,
    ny: usize,
    nz: [usize; 3],
    nt: usize,
}

fn check_count(axis: &'static str, count: usize) -> Result<(), GeometryError> {
    if count < MIN_SAMPLES {
        return Err(GeometryError::TooFewSamples { axis, count });
    }
    Ok(())
}

/// Validates a configuration and builds the channel grids.
pub fn build_geometry(config: &GeometryConfig) -> Result<ChannelGeometry, GeometryError> {
    let [l1, l2, l3] = config.lengths;
    let finite = config.lengths.iter().all(|l| l.is_finite());
    if !(finite && 0.0 < l1 && l1 < l2 && l2 < l3) {
        return Err(GeometryError::LengthsNotOrdered(l1, l2, l3));
    }
    for (axis, count) in [("x", config.nx), ("y", config.ny)] {
        check_count(axis, count)?;
        if !count.is_power_of_two() {
            return Err(GeometryError::NotPowerOfTwo { axis, count });
        }
    }
    check_count("t", config.nt)?;

    let nz = match config.vertical {
        Vertical::PerLayer(nz) => nz,
        Vertical::Uniform(spacing) => {
            let mut nz = [0usize; 3];
            let bounds = [(0.0, l1), (l1, l2), (l2, l3)];
            for (k, (a, b)) in bounds.into_iter().enumerate() {
                let ratio = (b - a) / spacing;
                let rounded = ratio.round();
                if !(spacing > 0.0) || (ratio - rounded).abs() > GRID_ALIGNMENT_TOL * ratio.max(1.0)
                {
                    // the first layer end that misses the grid is the offending plane
                    return Err(GeometryError::InterfaceOffGrid { z: b, spacing });
                }
                nz[k] = rounded as usize;
            }
            nz
        }
    };
    for (axis, count) in ["z (lower fluid)", "z (elastic)", "z (upper fluid)"]
        .into_iter()
        .zip(nz)
    {
        check_count(axis, count)?;
    }

    Ok(ChannelGeometry {
        config: *config,
        lengths: config.lengths,
        nx: config.nx,
        ny: config.ny,
        nz,
        nt: config.nt,
    })
}

impl ChannelGeometry {
    pub fn config(&self) -> &GeometryConfig {
        &self.config
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Time step on the unit reference interval.
    pub fn dt(&self) -> f64 {
        1.0 / self.nt as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 / self.nt as f64
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * PI / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.dy() * j as f64
    }

    /// Horizontal sample count of one plane.
    pub fn plane_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Interval count of one slab.
    pub fn intervals(&self, slab: Slab) -> usize {
        match slab {
            Slab::LowerFluid => self.nz[0],
            Slab::Elastic => self.nz[1],
            Slab::UpperFluid => self.nz[2],
        }
    }

    pub fn slab_bounds(&self, slab: Slab) -> (f64, f64) {
        let [l1, l2, l3] = self.lengths;
        match slab {
            Slab::LowerFluid => (0.0, l1),
            Slab::Elastic => (l1, l2),
            Slab::UpperFluid => (l2, l3),
        }
    }

    pub fn spacing(&self, slab: Slab) -> f64 {
        let (a, b) = self.slab_bounds(slab);
        (b - a) / self.intervals(slab) as f64
    }

    /// Segment of `slab` as laid out inside a field of the given layer.
    pub fn segment(&self, slab: Slab) -> Segment {
        let (z0, _) = self.slab_bounds(slab);
        let offset = match slab {
            Slab::LowerFluid | Slab::Elastic => 0,
            Slab::UpperFluid => self.nz[0] + 1,
        };
        Segment {
            offset,
            intervals: self.intervals(slab),
            z0,
            spacing: self.spacing(slab),
        }
    }

    /// Fluid fields stack the lower slab samples, then the upper slab samples.
    pub fn fluid_segments(&self) -> [Segment; 2] {
        [self.segment(Slab::LowerFluid), self.segment(Slab::UpperFluid)]
    }

    pub fn fluid_nz(&self) -> usize {
        self.nz[0] + 1 + self.nz[2] + 1
    }

    pub fn elastic_nz(&self) -> usize {
        self.nz[1] + 1
    }

    /// z index of an interface plane inside a fluid field.
    pub fn fluid_interface_index(&self, plane: Plane) -> usize {
        match plane {
            Plane::Lower => self.nz[0],
            Plane::Upper => self.nz[0] + 1,
        }
    }

    /// z index of an outer wall plane inside a fluid field (0: z = 0, 1: z = L3).
    pub fn fluid_wall_index(&self, wall: usize) -> usize {
        if wall == 0 {
            0
        } else {
            self.fluid_nz() - 1
        }
    }

    /// z index of an interface plane inside an elastic field.
    pub fn elastic_interface_index(&self, plane: Plane) -> usize {
        match plane {
            Plane::Lower => 0,
            Plane::Upper => self.nz[1],
        }
    }

    /// Vertical coordinate of every fluid z index.
    pub fn fluid_z(&self, iz: usize) -> f64 {
        let [lower, upper] = self.fluid_segments();
        if iz < upper.offset {
            lower.z(iz)
        } else {
            upper.z(iz - upper.offset)
        }
    }

    pub fn elastic_z(&self, iz: usize) -> f64 {
        self.segment(Slab::Elastic).z(iz)
    }

    /// Which part of the channel a vertical grid plane belongs to. Returns
    /// `None` for positions outside `[0, L3]` or off every grid.
    pub fn classify_plane(&self, z: f64) -> Option<PlaneKind> {
        let [l1, l2, l3] = self.lengths;
        let tol = 1e-12 * l3;
        let near = |a: f64| (z - a).abs() <= tol;
        if near(0.0) || near(l3) {
            return Some(PlaneKind::OuterWall);
        }
        if near(l1) {
            return Some(PlaneKind::Interface(Plane::Lower));
        }
        if near(l2) {
            return Some(PlaneKind::Interface(Plane::Upper));
        }
        for slab in [Slab::LowerFluid, Slab::Elastic, Slab::UpperFluid] {
            let seg = self.segment(slab);
            let (a, b) = self.slab_bounds(slab);
            if z > a && z < b {
                let r = (z - seg.z0) / seg.spacing;
                return ((r - r.round()).abs() <= 1e-9).then_some(PlaneKind::Interior(slab));
            }
        }
        None
    }

    /// Horizontal wavenumber of FFT index `i` along an axis of `n` samples.
    pub fn wavenumber(i: usize, n: usize) -> f64 {
        crate::spectral::wavenumber(i, n)
    }

    /// Total volume of the fluid region.
    pub fn fluid_volume(&self) -> f64 {
        let [l1, l2, l3] = self.lengths;
        4.0 * PI * PI * (l1 + l3 - l2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_config() -> GeometryConfig {
        GeometryConfig::new([1.0, 2.0, 3.0], 8, 8, [8, 8, 8], 8)
    }

    #[test]
    fn uniform_layers_have_expected_spacing() {
        let g = build_geometry(&unit_config()).unwrap();
        for slab in [Slab::LowerFluid, Slab::Elastic, Slab::UpperFluid] {
            assert!((g.spacing(slab) - 0.125).abs() < 1e-15);
        }
        assert_eq!(g.classify_plane(1.0), Some(PlaneKind::Interface(Plane::Lower)));
        assert_eq!(g.classify_plane(2.0), Some(PlaneKind::Interface(Plane::Upper)));
        assert_eq!(g.fluid_z(g.fluid_interface_index(Plane::Lower)), 1.0);
        assert_eq!(g.fluid_z(g.fluid_interface_index(Plane::Upper)), 2.0);
        assert_eq!(g.fluid_z(g.fluid_nz() - 1), 3.0);
    }

    #[test]
    fn rejects_unordered_lengths() {
        let mut c = unit_config();
        c.lengths = [1.0, 1.0, 3.0];
        let err = build_geometry(&c).unwrap_err();
        assert!(matches!(err, GeometryError::LengthsNotOrdered(..)));
        assert!(alloc::format!("{err}").contains("lengths not strictly ordered"));
    }

    #[test]
    fn uniform_spacing_places_interfaces_on_grid() {
        let c = GeometryConfig {
            lengths: [0.25, 0.5, 1.0],
            nx: 8,
            ny: 8,
            vertical: Vertical::Uniform(1.0 / 32.0),
            nt: 8,
        };
        let g = build_geometry(&c).unwrap();
        assert_eq!(g.intervals(Slab::LowerFluid), 8);
        assert_eq!(g.intervals(Slab::Elastic), 8);
        assert_eq!(g.intervals(Slab::UpperFluid), 16);
        assert_eq!(g.classify_plane(0.25), Some(PlaneKind::Interface(Plane::Lower)));
        assert_eq!(g.classify_plane(0.5), Some(PlaneKind::Interface(Plane::Upper)));
    }

    #[test]
    fn rejects_interface_off_grid() {
        let c = GeometryConfig {
            lengths: [0.3, 0.5, 1.0],
            nx: 8,
            ny: 8,
            vertical: Vertical::Uniform(1.0 / 16.0),
            nt: 8,
        };
        assert!(matches!(
            build_geometry(&c),
            Err(GeometryError::InterfaceOffGrid { .. })
        ));
    }

    #[test]
    fn rejects_small_and_non_power_of_two_counts() {
        let mut c = unit_config();
        c.nx = 6;
        assert!(matches!(build_geometry(&c), Err(GeometryError::NotPowerOfTwo { .. })));
        let mut c = unit_config();
        c.vertical = Vertical::PerLayer([8, 3, 8]);
        assert!(matches!(build_geometry(&c), Err(GeometryError::TooFewSamples { .. })));
    }

    #[test]
    fn normals_point_out_of_the_elastic_slab() {
        assert_eq!(normal_at(InterfacePatch { plane: Plane::Lower }), [0.0, 0.0, -1.0]);
        assert_eq!(normal_at(InterfacePatch { plane: Plane::Upper }), [0.0, 0.0, 1.0]);
        for plane in Plane::BOTH {
            let n = normal_at(InterfacePatch { plane });
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert_eq!(len, 1.0);
        }
    }

    #[test]
    fn layers_tile_the_channel_without_overlap() {
        let g = build_geometry(&GeometryConfig::new([0.5, 1.25, 2.0], 8, 8, [4, 6, 12], 8)).unwrap();
        // walk every grid plane of every slab and count how often each z occurs
        let mut planes: alloc::vec::Vec<f64> = alloc::vec::Vec::new();
        for slab in [Slab::LowerFluid, Slab::Elastic, Slab::UpperFluid] {
            let seg = g.segment(slab);
            for i in 0..seg.samples() {
                planes.push(seg.z(i));
            }
        }
        planes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        planes.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(planes.len(), 4 + 6 + 12 + 1);
        for z in planes {
            assert!(g.classify_plane(z).is_some());
        }
        assert_eq!(g.classify_plane(0.3), None);
    }

    #[test]
    fn wavenumbers_are_symmetric() {
        let n = 16;
        let ks: alloc::vec::Vec<f64> = (0..n).map(|i| ChannelGeometry::wavenumber(i, n)).collect();
        for &k in &ks {
            // Nyquist is its own mirror image modulo n
            let mirrored = ks.iter().any(|&q| q == -k || (k.abs() == (n / 2) as f64 && q == k));
            assert!(mirrored, "missing mirror of {k}");
        }
    }
}
