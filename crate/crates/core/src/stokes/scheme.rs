use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{compatibility_defect, StokesData, StokesError, StokesResiduals, TimeScheme, COMPATIBILITY_TOL};
use crate::geometry::{ChannelGeometry, Plane, Slab};
use crate::linalg::{BandLu, BandMatrix};
use crate::spectral::Fft2;

const BAND: usize = 4;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Wall,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Stiffness,
    Pressure,
    Constraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    Momentum,
    Traction,
    Continuity,
    Dirichlet,
}

/// One fluid slab as seen by the vertical solver.
#[derive(Debug, Clone, Copy)]
struct SlabLayout {
    name: &'static str,
    /// Intervals.
    n: usize,
    h: f64,
    /// First z index inside a fluid field.
    offset: usize,
    bottom: End,
    top: End,
    plane: Plane,
    /// Outer-boundary z index (0: `z = 0`, 1: `z = L3`).
    wall: usize,
}

impl SlabLayout {
    fn dim(&self) -> usize {
        4 * self.n + 1
    }

    fn w(i: usize) -> usize {
        4 * i
    }

    fn u(c: usize, comp: usize) -> usize {
        4 * c + 1 + comp
    }

    fn p(c: usize) -> usize {
        4 * c + 3
    }

    fn interface_node(&self) -> usize {
        if self.top == End::Interface { self.n } else { 0 }
    }

    fn wall_node(&self) -> usize {
        if self.top == End::Wall { self.n } else { 0 }
    }

    fn row_kind(&self, r: usize) -> Row {
        match r % 4 {
            0 if r / 4 == self.wall_node() => Row::Dirichlet,
            0 if r / 4 == self.interface_node() => Row::Traction,
            3 => Row::Continuity,
            _ => Row::Momentum,
        }
    }

    /// Calls `sink(kind, row, col, value)` for every matrix entry of mode
    /// `(kx, ky)`; `k2` is the full squared wavenumber.
    fn assemble(&self, kx: f64, ky: f64, k2: f64, mut sink: impl FnMut(Entry, usize, usize, Complex64)) {
        let (n, h) = (self.n, self.h);
        let re = |v: f64| Complex64::new(v, 0.0);
        let kc = [kx, ky];
        for comp in 0..2 {
            for c in 0..n {
                let r = Self::u(c, comp);
                let mut diag = h * k2;
                for (nb, end) in [(c.checked_sub(1), self.bottom), ((c + 1 < n).then_some(c + 1), self.top)] {
                    match nb {
                        Some(j) => {
                            diag += 1.0 / h;
                            sink(Entry::Stiffness, r, Self::u(j, comp), re(-1.0 / h));
                        }
                        None if end == End::Wall => diag += 2.0 / h,
                        None => {}
                    }
                }
                sink(Entry::Stiffness, r, r, re(diag));
                sink(Entry::Pressure, r, Self::p(c), I * (h * kc[comp]));
            }
        }
        for i in 0..=n {
            let r = Self::w(i);
            if i == self.wall_node() {
                sink(Entry::Constraint, r, r, re(1.0));
            } else if i == self.interface_node() {
                let inner = if i == 0 { 1 } else { n - 1 };
                sink(Entry::Stiffness, r, r, re(0.5 * h * k2 + 1.0 / h));
                sink(Entry::Stiffness, r, Self::w(inner), re(-1.0 / h));
                if i == 0 {
                    sink(Entry::Pressure, r, Self::p(0), re(1.0));
                } else {
                    sink(Entry::Pressure, r, Self::p(n - 1), re(-1.0));
                }
            } else {
                sink(Entry::Stiffness, r, r, re(h * k2 + 2.0 / h));
                sink(Entry::Stiffness, r, Self::w(i - 1), re(-1.0 / h));
                sink(Entry::Stiffness, r, Self::w(i + 1), re(-1.0 / h));
                sink(Entry::Pressure, r, Self::p(i), re(1.0));
                sink(Entry::Pressure, r, Self::p(i - 1), re(-1.0));
            }
        }
        for c in 0..n {
            let r = Self::p(c);
            sink(Entry::Constraint, r, Self::u(c, 0), I * (h * kx));
            sink(Entry::Constraint, r, Self::u(c, 1), I * (h * ky));
            sink(Entry::Constraint, r, Self::w(c + 1), re(1.0));
            sink(Entry::Constraint, r, Self::w(c), re(-1.0));
        }
    }

    fn mass(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|r| match self.row_kind(r) {
                Row::Momentum => self.h,
                Row::Traction => 0.5 * self.h,
                Row::Continuity | Row::Dirichlet => 0.0,
            })
            .collect()
    }
}

/// Modal data of one time level, mode-major as produced by
/// [`Fft2::planes_forward`].
#[derive(Debug, Clone)]
struct ModalData {
    f: Vec<Complex64>,
    g: Vec<Complex64>,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
}

impl ModalData {
    fn gather<D: StokesData + ?Sized>(data: &D, n: usize, geom: &ChannelGeometry, fft: &Fft2, buf: &mut Buffers) -> Self {
        let (len, nz) = (geom.plane_len(), geom.fluid_nz());
        let mut out = Self {
            f: vec![ZERO; len * nz * 3],
            g: vec![ZERO; len * nz],
            h1: vec![ZERO; len * 2 * 3],
            h2: vec![ZERO; len * 2 * 3],
        };
        data.forcing(n, &mut buf.fluid3);
        fft.planes_forward(&buf.fluid3, nz, 3, &mut out.f);
        data.divergence(n, &mut buf.fluid1);
        fft.planes_forward(&buf.fluid1, nz, 1, &mut out.g);
        data.traction(n, &mut buf.plane3);
        fft.planes_forward(&buf.plane3, 2, 3, &mut out.h1);
        data.wall(n, &mut buf.plane3);
        fft.planes_forward(&buf.plane3, 2, 3, &mut out.h2);
        out
    }
}

struct Buffers {
    fluid3: Vec<f64>,
    fluid1: Vec<f64>,
    plane3: Vec<f64>,
}

impl Buffers {
    fn new(geom: &ChannelGeometry) -> Self {
        let (len, nz) = (geom.plane_len(), geom.fluid_nz());
        Self {
            fluid3: vec![0.0; len * nz * 3],
            fluid1: vec![0.0; len * nz],
            plane3: vec![0.0; len * 2 * 3],
        }
    }
}

struct ModeSystem {
    lhs: BandMatrix,
    lu: BandLu,
    stiffness: BandMatrix,
}

/// One time level of a Stokes run: nodal velocity (three components) and
/// pressure slices on the fluid layer, plus the staggered kinetic energy.
#[derive(Debug, Clone, Copy)]
pub struct StokesLevel<'a> {
    pub n: usize,
    pub u: &'a [f64],
    pub p: &'a [f64],
    pub energy: f64,
}

/// Factored per-mode systems for the time grid of one geometry. Immutable
/// after construction; [`StokesSolver::run`] may be called repeatedly.
pub struct StokesSolver {
    geom: ChannelGeometry,
    theta: f64,
    fft: Fft2,
    slabs: [SlabLayout; 2],
    masses: [Vec<f64>; 2],
    systems: Vec<[ModeSystem; 2]>,
}

impl StokesSolver {
    pub fn new(geom: &ChannelGeometry, scheme: TimeScheme) -> Result<Self, StokesError> {
        let [lower, upper] = geom.fluid_segments();
        let slabs = [
            SlabLayout {
                name: "lower",
                n: lower.intervals,
                h: lower.spacing,
                offset: lower.offset,
                bottom: End::Wall,
                top: End::Interface,
                plane: Plane::Lower,
                wall: 0,
            },
            SlabLayout {
                name: "upper",
                n: upper.intervals,
                h: upper.spacing,
                offset: upper.offset,
                bottom: End::Interface,
                top: End::Wall,
                plane: Plane::Upper,
                wall: 1,
            },
        ];
        debug_assert_eq!(geom.spacing(Slab::LowerFluid), lower.spacing);
        let fft = Fft2::new(geom.nx(), geom.ny());
        let theta = scheme.theta();
        let dt = geom.dt();
        let masses = slabs.map(|s| s.mass());
        let mut systems = Vec::with_capacity(fft.len());
        for m in 0..fft.len() {
            let (kx, ky) = fft.derivative_wavevector(m);
            let k2 = fft.k2(m);
            let build = |si: usize| -> Result<ModeSystem, StokesError> {
                let slab = &slabs[si];
                let mut lhs = BandMatrix::new(slab.dim(), BAND, BAND);
                let mut stiffness = BandMatrix::new(slab.dim(), BAND, BAND);
                slab.assemble(kx, ky, k2, |kind, r, c, v| match kind {
                    Entry::Stiffness => {
                        lhs.add(r, c, v * theta);
                        stiffness.add(r, c, v);
                    }
                    Entry::Pressure | Entry::Constraint => lhs.add(r, c, v),
                });
                for (r, &mr) in masses[si].iter().enumerate() {
                    if mr > 0.0 {
                        lhs.add_re(r, r, mr / dt);
                    }
                }
                let (kxw, kyw) = fft.wavevector(m);
                let lu = lhs.clone().factor().map_err(|e| StokesError::Singular {
                    kx: kxw,
                    ky: kyw,
                    slab: slab.name,
                    column: e.column,
                })?;
                Ok(ModeSystem { lhs, lu, stiffness })
            };
            systems.push([build(0)?, build(1)?]);
        }
        Ok(Self {
            geom: geom.clone(),
            theta,
            fft,
            slabs,
            masses,
            systems,
        })
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geom
    }

    /// Right-hand-side data of every row of slab `si`, mode `m`.
    fn load(&self, si: usize, m: usize, d: &ModalData) -> Vec<Complex64> {
        let slab = &self.slabs[si];
        let (n, h) = (slab.n, slab.h);
        let nz = self.geom.fluid_nz();
        let f = |iz: usize, c: usize| d.f[(m * nz + slab.offset + iz) * 3 + c];
        let g = |iz: usize| d.g[m * nz + slab.offset + iz];
        let h1 = |c: usize| d.h1[(m * 2 + slab.plane.index()) * 3 + c];
        let h2 = |c: usize| d.h2[(m * 2 + slab.wall) * 3 + c];
        let mut rhs = vec![ZERO; slab.dim()];
        for comp in 0..2 {
            for c in 0..n {
                let mut v = (f(c, comp) + f(c + 1, comp)) * (0.5 * h);
                if (c == 0 && slab.bottom == End::Wall) || (c + 1 == n && slab.top == End::Wall) {
                    v += h2(comp) * (2.0 / h);
                }
                if (c == 0 && slab.bottom == End::Interface) || (c + 1 == n && slab.top == End::Interface) {
                    v -= h1(comp);
                }
                rhs[SlabLayout::u(c, comp)] = v;
            }
        }
        for i in 0..=n {
            rhs[SlabLayout::w(i)] = if i == slab.wall_node() {
                h2(2)
            } else if i == slab.interface_node() {
                f(i, 2) * (0.5 * h) - h1(2)
            } else {
                f(i, 2) * h
            };
        }
        for c in 0..n {
            rhs[SlabLayout::p(c)] = (g(c) + g(c + 1)) * (0.5 * h);
        }
        rhs
    }

    /// Writes nodal velocity and pressure of slab `si`, mode `m`, into the
    /// mode-major buffers.
    fn to_nodes(&self, si: usize, m: usize, x: &[Complex64], d: &ModalData, u: &mut [Complex64], p: &mut [Complex64]) {
        let slab = &self.slabs[si];
        let (n, h) = (slab.n, slab.h);
        let nz = self.geom.fluid_nz();
        let (kx, ky) = self.fft.derivative_wavevector(m);
        let h1 = |c: usize| d.h1[(m * 2 + slab.plane.index()) * 3 + c];
        let h2 = |c: usize| d.h2[(m * 2 + slab.wall) * 3 + c];
        let at = |iz: usize| m * nz + slab.offset + iz;
        for i in 0..=n {
            u[at(i) * 3 + 2] = x[SlabLayout::w(i)];
        }
        for comp in 0..2 {
            for i in 1..n {
                u[at(i) * 3 + comp] = (x[SlabLayout::u(i - 1, comp)] + x[SlabLayout::u(i, comp)]) * 0.5;
            }
            let wn = slab.wall_node();
            u[at(wn) * 3 + comp] = h2(comp);
            let (ifn, adj) = if slab.interface_node() == 0 { (0, 0) } else { (n, n - 1) };
            u[at(ifn) * 3 + comp] = x[SlabLayout::u(adj, comp)] - h1(comp) * (0.5 * h);
        }
        for i in 1..n {
            p[at(i)] = (x[SlabLayout::p(i - 1)] + x[SlabLayout::p(i)]) * 0.5;
        }
        let (wn, a, b) = if slab.wall_node() == 0 { (0, 0, 1) } else { (n, n - 1, n - 2) };
        p[at(wn)] = x[SlabLayout::p(a)] * 1.5 - x[SlabLayout::p(b)] * 0.5;
        let ifn = slab.interface_node();
        let dwdz = d.g[at(ifn)] - I * (kx * u[at(ifn) * 3] + ky * u[at(ifn) * 3 + 1]);
        p[at(ifn)] = dwdz - h1(2) * slab.plane.normal_sign();
    }

    /// Initial state vector of slab `si`, mode `m`, from nodal modal velocity.
    fn initial_state(&self, si: usize, m: usize, u0: &[Complex64]) -> Vec<Complex64> {
        let slab = &self.slabs[si];
        let nz = self.geom.fluid_nz();
        let at = |iz: usize| m * nz + slab.offset + iz;
        let mut x = vec![ZERO; slab.dim()];
        for i in 0..=slab.n {
            x[SlabLayout::w(i)] = u0[at(i) * 3 + 2];
        }
        for comp in 0..2 {
            for c in 0..slab.n {
                x[SlabLayout::u(c, comp)] = (u0[at(c) * 3 + comp] + u0[at(c + 1) * 3 + comp]) * 0.5;
            }
        }
        x
    }

    /// Staggered kinetic energy `(2π)² Σ_modes Σ_rows mass |X|²`.
    fn energy(&self, state: &[[Vec<Complex64>; 2]]) -> f64 {
        let area = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
        let mut e = 0.0;
        for modes in state {
            for (si, x) in modes.iter().enumerate() {
                e += self.masses[si].iter().zip(x).map(|(m, v)| m * v.norm_sqr()).sum::<f64>();
            }
        }
        area * e
    }

    /// Time-marches `data` and hands every level `n = 0..=nt` to `observe`
    /// in increasing `n`.
    pub fn run<D, F>(&self, data: &D, mut observe: F) -> Result<StokesResiduals, StokesError>
    where
        D: StokesData + ?Sized,
        F: FnMut(StokesLevel<'_>),
    {
        let geom = &self.geom;
        let defect = compatibility_defect(data, geom);
        if defect > COMPATIBILITY_TOL {
            return Err(StokesError::Compatibility(defect));
        }
        let (len, nz, nt) = (geom.plane_len(), geom.fluid_nz(), geom.nt());
        let dt = geom.dt();
        let mut buf = Buffers::new(geom);
        data.initial_velocity(&mut buf.fluid3);
        let u0_phys = buf.fluid3.clone();
        let mut u0 = vec![ZERO; len * nz * 3];
        self.fft.planes_forward(&u0_phys, nz, 3, &mut u0);
        let mut state: Vec<[Vec<Complex64>; 2]> =
            (0..len).map(|m| [self.initial_state(0, m, &u0), self.initial_state(1, m, &u0)]).collect();
        let e0 = self.energy(&state);

        let mut prev = (self.theta < 1.0).then(|| ModalData::gather(data, 0, geom, &self.fft, &mut buf));
        let mut residuals = StokesResiduals::default();
        let mut um = vec![ZERO; len * nz * 3];
        let mut pm = vec![ZERO; len * nz];
        let mut u_phys = vec![0.0; len * nz * 3];
        let mut p_phys = vec![0.0; len * nz];
        let mut first: Option<(Vec<f64>, Vec<f64>, f64)> = None;

        if nt == 0 {
            observe(StokesLevel { n: 0, u: &u0_phys, p: &p_phys, energy: e0 });
        }
        for step in 1..=nt {
            let cur = ModalData::gather(data, step, geom, &self.fft, &mut buf);
            for m in 0..len {
                for si in 0..2 {
                    let sys = &self.systems[m][si];
                    let x = &mut state[m][si];
                    let mut rhs = self.load(si, m, &cur);
                    let mass = &self.masses[si];
                    let explicit = prev.as_ref().map(|p| {
                        let mut kx = vec![ZERO; x.len()];
                        sys.stiffness.mul(x, &mut kx);
                        (self.load(si, m, p), kx)
                    });
                    for r in 0..rhs.len() {
                        if mass[r] > 0.0 {
                            let mut v = x[r] * (mass[r] / dt) + rhs[r] * self.theta;
                            if let Some((old, kx)) = &explicit {
                                v += (old[r] - kx[r]) * (1.0 - self.theta);
                            }
                            rhs[r] = v;
                        }
                    }
                    x.copy_from_slice(&rhs);
                    sys.lu.solve_in_place(x);
                    residuals.merge(&self.residual(si, sys, x, &rhs));
                    self.to_nodes(si, m, x, &cur, &mut um, &mut pm);
                }
            }
            self.fft.planes_inverse(&um, nz, 3, &mut u_phys);
            self.fft.planes_inverse(&pm, nz, 1, &mut p_phys);
            let energy = self.energy(&state);
            if step == 1 && nt > 1 {
                first = Some((u_phys.clone(), p_phys.clone(), energy));
            } else if step == 1 {
                observe(StokesLevel { n: 0, u: &u0_phys, p: &p_phys, energy: e0 });
                observe(StokesLevel { n: 1, u: &u_phys, p: &p_phys, energy });
            } else {
                if let Some((u1, p1, e1)) = first.take() {
                    // the pressure has no initial value; extrapolate it
                    let p0: Vec<f64> = p1.iter().zip(&p_phys).map(|(a, b)| 2.0 * a - b).collect();
                    observe(StokesLevel { n: 0, u: &u0_phys, p: &p0, energy: e0 });
                    observe(StokesLevel { n: 1, u: &u1, p: &p1, energy: e1 });
                }
                observe(StokesLevel { n: step, u: &u_phys, p: &p_phys, energy });
            }
            if prev.is_some() {
                prev = Some(cur);
            }
        }
        Ok(residuals)
    }

    fn residual(&self, si: usize, sys: &ModeSystem, x: &[Complex64], rhs: &[Complex64]) -> StokesResiduals {
        let slab = &self.slabs[si];
        let mut ax = vec![ZERO; x.len()];
        sys.lhs.mul(x, &mut ax);
        let mut out = StokesResiduals::default();
        for r in 0..x.len() {
            let e = (ax[r] - rhs[r]).norm();
            match slab.row_kind(r) {
                Row::Momentum => out.momentum = out.momentum.max(e / slab.h),
                Row::Continuity => out.divergence = out.divergence.max(e / slab.h),
                Row::Traction | Row::Dirichlet => out.boundary = out.boundary.max(e),
            }
        }
        out
    }
}
