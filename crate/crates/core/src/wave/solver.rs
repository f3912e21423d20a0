use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::{WaveError, WaveProblem, WaveScheme, WaveSolution, CFL_LIMIT, COMPATIBILITY_TOL};
use crate::field::{Layer, SpaceTimeField};
use crate::fields::deriv::d1_fourth_order;
use crate::geometry::{ChannelGeometry, Plane, Slab};
use crate::spectral::Fft2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn largest_k2(fft: &Fft2) -> f64 {
    (0..fft.len()).map(|m| fft.k2(m)).fold(0.0, f64::max)
}

/// `dt · sqrt(4/h² + |k|²_max) / 2` of the elastic grid; the leapfrog scheme
/// is stable below one.
pub fn cfl_number(geom: &ChannelGeometry) -> f64 {
    let h = geom.spacing(Slab::Elastic);
    let fft = Fft2::new(geom.nx(), geom.ny());
    geom.dt() * (4.0 / (h * h) + largest_k2(&fft)).sqrt() / 2.0
}

/// Smallest number of unit-time steps whose CFL number is at most `target`.
pub fn steps_for_cfl(geom: &ChannelGeometry, target: f64) -> usize {
    let h = geom.spacing(Slab::Elastic);
    let fft = Fft2::new(geom.nx(), geom.ny());
    let rate = (4.0 / (h * h) + largest_k2(&fft)).sqrt() / 2.0;
    (rate / target).ceil() as usize
}

/// Outward normal derivative `∂w/∂N` of an elastic field on both interface
/// planes, from the one-sided fourth-order stencil.
pub fn normal_trace(geom: &ChannelGeometry, w: &SpaceTimeField) -> SpaceTimeField {
    assert_eq!(w.layer(), Layer::Elastic, "normal trace needs an elastic field");
    let [nt, nx, ny, nz, nc] = w.dims();
    let h = geom.spacing(Slab::Elastic);
    let mut out = SpaceTimeField::zeros(Layer::Interface, nt, nx, ny, 2, nc);
    let mut col = vec![0.0; nz];
    let mut d = vec![0.0; nz];
    for t in 0..nt {
        let slice = w.slice(t);
        let target = out.slice_mut(t);
        for p in 0..nx * ny {
            for c in 0..nc {
                for (iz, v) in col.iter_mut().enumerate() {
                    *v = slice[(p * nz + iz) * nc + c];
                }
                d1_fourth_order(&col, h, &mut d);
                target[(p * 2) * nc + c] = Plane::Lower.normal_sign() * d[0];
                target[(p * 2 + 1) * nc + c] = Plane::Upper.normal_sign() * d[nz - 1];
            }
        }
    }
    out
}

/// Forward elimination factors of the constant tridiagonal matrix
/// `tridiag(off, diag, off)` of size `n`.
#[derive(Debug, Clone)]
struct Tridiagonal {
    off: f64,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut inv_pivot = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 { diag } else { diag - off * off * prev };
            prev = 1.0 / pivot;
            inv_pivot.push(prev);
        }
        Self { off, inv_pivot }
    }

    fn solve(&self, x: &mut [Complex64]) {
        let n = x.len();
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.off * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let v = x[i + 1];
            x[i] -= self.off * self.inv_pivot[i] * v;
        }
    }
}

/// Per-mode marching engine on a fixed geometry.
#[derive(Debug, Clone)]
pub struct WaveSolver {
    geom: ChannelGeometry,
    scheme: WaveScheme,
    fft: Fft2,
    h: f64,
    k2: Vec<f64>,
    implicit: Vec<Tridiagonal>,
    cfl: f64,
}

impl WaveSolver {
    pub fn new(geom: &ChannelGeometry, scheme: WaveScheme) -> Result<Self, WaveError> {
        let cfl = cfl_number(geom);
        if scheme == WaveScheme::Leapfrog && cfl > CFL_LIMIT {
            return Err(WaveError::Cfl { number: cfl, limit: CFL_LIMIT });
        }
        let fft = Fft2::new(geom.nx(), geom.ny());
        let h = geom.spacing(Slab::Elastic);
        let k2: Vec<f64> = (0..fft.len()).map(|m| fft.k2(m)).collect();
        let implicit = match scheme {
            WaveScheme::Leapfrog => Vec::new(),
            WaveScheme::Implicit => {
                let q = geom.dt() * geom.dt() / 4.0;
                let n = geom.intervals(Slab::Elastic);
                k2.iter()
                    .map(|k| Tridiagonal::new(n - 1, 1.0 + q * (k + 2.0 / (h * h)), -q / (h * h)))
                    .collect()
            }
        };
        Ok(Self { geom: geom.clone(), scheme, fft, h, k2, implicit, cfl })
    }

    pub fn geometry(&self) -> &ChannelGeometry {
        &self.geom
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    fn nz(&self) -> usize {
        self.geom.elastic_nz()
    }

    fn to_modes(&self, slice: &[f64], nz: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.fft.len() * nz * 3];
        self.fft.planes_forward(slice, nz, 3, &mut out);
        out
    }

    fn to_physical(&self, modes: &[Complex64], out: &mut [f64]) {
        self.fft.planes_inverse(modes, self.nz(), 3, out);
    }

    /// `(A u)_i = k² u_i − (u_{i+1} − 2u_i + u_{i−1}) / h²` at interior node `i`.
    fn stiffness(&self, u: &[Complex64], m: usize, c: usize, i: usize) -> Complex64 {
        let nz = self.nz();
        let at = |j: usize| u[(m * nz + j) * 3 + c];
        let h2 = self.h * self.h;
        at(i) * self.k2[m] - (at(i + 1) - at(i) * 2.0 + at(i - 1)) / h2
    }

    fn pin(&self, next: &mut [Complex64], boundary: &[Complex64]) {
        let nz = self.nz();
        for m in 0..self.fft.len() {
            for c in 0..3 {
                next[(m * nz) * 3 + c] = boundary[(m * 2) * 3 + c];
                next[(m * nz + nz - 1) * 3 + c] = boundary[(m * 2 + 1) * 3 + c];
            }
        }
    }

    fn step(&self, prev: &[Complex64], curr: &[Complex64], boundary: &[Complex64], next: &mut [Complex64]) {
        let nz = self.nz();
        let dt2 = self.geom.dt() * self.geom.dt();
        self.pin(next, boundary);
        match self.scheme {
            WaveScheme::Leapfrog => {
                for m in 0..self.fft.len() {
                    for c in 0..3 {
                        for i in 1..nz - 1 {
                            let k = (m * nz + i) * 3 + c;
                            next[k] = curr[k] * 2.0 - prev[k] - self.stiffness(curr, m, c, i) * dt2;
                        }
                    }
                }
            }
            WaveScheme::Implicit => {
                let q = dt2 / (4.0 * self.h * self.h);
                let mut rhs = vec![ZERO; nz - 2];
                for m in 0..self.fft.len() {
                    for c in 0..3 {
                        for i in 1..nz - 1 {
                            let k = (m * nz + i) * 3 + c;
                            rhs[i - 1] = curr[k] * 2.0 - prev[k]
                                - (self.stiffness(curr, m, c, i) * 0.5 + self.stiffness(prev, m, c, i) * 0.25) * dt2;
                        }
                        rhs[0] += next[(m * nz) * 3 + c] * q;
                        rhs[nz - 3] += next[(m * nz + nz - 1) * 3 + c] * q;
                        self.implicit[m].solve(&mut rhs);
                        for i in 1..nz - 1 {
                            next[(m * nz + i) * 3 + c] = rhs[i - 1];
                        }
                    }
                }
            }
        }
    }

    /// Trapezoid-weighted `L²` and gradient forms of two mode vectors.
    fn forms(&self, u: &[Complex64], v: &[Complex64]) -> (f64, f64) {
        let nz = self.nz();
        let h = self.h;
        let (mut mass, mut grad) = (0.0, 0.0);
        for m in 0..self.fft.len() {
            for c in 0..3 {
                let at = |w: &[Complex64], j: usize| w[(m * nz + j) * 3 + c];
                for i in 0..nz {
                    let wgt = if i == 0 || i == nz - 1 { 0.5 * h } else { h };
                    let p = (at(u, i) * at(v, i).conj()).re * wgt;
                    mass += p;
                    grad += self.k2[m] * p;
                }
                for i in 0..nz - 1 {
                    grad += ((at(u, i + 1) - at(u, i)) * (at(v, i + 1) - at(v, i)).conj()).re / h;
                }
            }
        }
        let area = 4.0 * core::f64::consts::PI * core::f64::consts::PI;
        (area * mass, area * grad)
    }

    /// Energy of the step `curr → next` that the scheme conserves.
    fn half_step_energy(&self, curr: &[Complex64], next: &[Complex64]) -> f64 {
        let dt = self.geom.dt();
        let rate: Vec<Complex64> = next.iter().zip(curr).map(|(a, b)| (a - b) / dt).collect();
        let (kinetic, _) = self.forms(&rate, &rate);
        let potential = match self.scheme {
            WaveScheme::Leapfrog => self.forms(next, curr).1,
            WaveScheme::Implicit => {
                let mid: Vec<Complex64> = next.iter().zip(curr).map(|(a, b)| (a + b) * 0.5).collect();
                self.forms(&mid, &mid).1
            }
        };
        0.5 * (kinetic + potential)
    }

    fn boundary_modes(&self, psi: &SpaceTimeField, n: usize) -> Vec<Complex64> {
        let n = if psi.time_samples() == 1 { 0 } else { n };
        self.to_modes(psi.slice(n), 2)
    }

    pub fn solve(&self, problem: &WaveProblem) -> Result<WaveSolution, WaveError> {
        let geom = &self.geom;
        problem.check(geom)?;
        let defect = problem.compatibility_defect(geom);
        if defect > COMPATIBILITY_TOL {
            return Err(WaveError::Compatibility(defect));
        }
        let (nt, nz, dt) = (geom.nt(), self.nz(), geom.dt());
        let mut w = SpaceTimeField::zeros_on(geom, Layer::Elastic, 3);
        let w0 = self.to_modes(problem.w0.slice(0), nz);
        let w1 = self.to_modes(problem.w1.slice(0), nz);

        let mut first = vec![ZERO; w0.len()];
        self.pin(&mut first, &self.boundary_modes(&problem.psi, 1));
        for m in 0..self.fft.len() {
            for c in 0..3 {
                for i in 1..nz - 1 {
                    let k = (m * nz + i) * 3 + c;
                    first[k] = w0[k] + w1[k] * dt - self.stiffness(&w0, m, c, i) * (0.5 * dt * dt);
                }
            }
        }
        w.slice_mut(0).copy_from_slice(problem.w0.slice(0));
        self.to_physical(&first, w.slice_mut(1));
        let mut energy = Vec::with_capacity(nt);
        energy.push(self.half_step_energy(&w0, &first));

        let (mut prev, mut curr) = (w0, first);
        let mut next = vec![ZERO; prev.len()];
        for n in 1..nt {
            self.step(&prev, &curr, &self.boundary_modes(&problem.psi, n + 1), &mut next);
            energy.push(self.half_step_energy(&curr, &next));
            self.to_physical(&next, w.slice_mut(n + 1));
            core::mem::swap(&mut prev, &mut curr);
            core::mem::swap(&mut curr, &mut next);
        }
        let w_t = velocity(&w, problem.w1.slice(0), dt);
        Ok(WaveSolution {
            w,
            w_t,
            energy,
            compatibility_warning: defect,
            cfl: self.cfl,
        })
    }

    /// Advances the two physical levels `(prev, curr)` by `steps` with zero
    /// boundary data and returns the last two levels. Running it again on
    /// the swapped output retraces the trajectory.
    pub fn march(&self, prev: &[f64], curr: &[f64], steps: usize) -> (Vec<f64>, Vec<f64>) {
        let nz = self.nz();
        let zero = vec![ZERO; self.fft.len() * 2 * 3];
        let mut p = self.to_modes(prev, nz);
        let mut c = self.to_modes(curr, nz);
        let mut next = vec![ZERO; p.len()];
        for _ in 0..steps {
            self.step(&p, &c, &zero, &mut next);
            core::mem::swap(&mut p, &mut c);
            core::mem::swap(&mut c, &mut next);
        }
        let mut a = vec![0.0; prev.len()];
        let mut b = vec![0.0; prev.len()];
        self.to_physical(&p, &mut a);
        self.to_physical(&c, &mut b);
        (a, b)
    }
}

fn velocity(w: &SpaceTimeField, w1: &[f64], dt: f64) -> SpaceTimeField {
    let nt = w.time_samples() - 1;
    let mut out = w.clone();
    out.slice_mut(0).copy_from_slice(w1);
    for n in 1..nt {
        let (a, b) = (w.slice(n + 1), w.slice(n - 1));
        for (o, (x, y)) in out.slice_mut(n).iter_mut().zip(a.iter().zip(b)) {
            *o = (x - y) / (2.0 * dt);
        }
    }
    let (a, b, c) = (w.slice(nt), w.slice(nt - 1), w.slice(nt - 2));
    let last: Vec<f64> = (0..a.len()).map(|i| (3.0 * a[i] - 4.0 * b[i] + c[i]) / (2.0 * dt)).collect();
    out.slice_mut(nt).copy_from_slice(&last);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometryConfig};
    use crate::wave::{solve_wave, solve_wave_with};
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(nxy: usize, nz: usize, nt: usize) -> ChannelGeometry {
        build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], nxy, nxy, [8, nz, 8], nt)).unwrap()
    }

    /// Standing wave `cos x · sin(mπ(z − 1)) · cos(ωt)` in every component,
    /// `ω² = kx² + (mπ)²`.
    fn standing(kx: f64, m: f64) -> impl Fn(f64, f64, f64) -> (f64, f64) {
        let omega = (kx * kx + m * m * PI * PI).sqrt();
        move |t, x, z| {
            let s = (kx * x).cos() * (m * PI * (z - 1.0)).sin();
            (s * (omega * t).cos(), -omega * s * (omega * t).sin())
        }
    }

    fn standing_problem(g: &ChannelGeometry, kx: f64, m: f64) -> WaveProblem {
        let f = standing(kx, m);
        let w0 = SpaceTimeField::from_fn(g, Layer::Elastic, 3, 1, |_, x, _, z, o| o.fill(f(0.0, x, z).0));
        let w1 = SpaceTimeField::from_fn(g, Layer::Elastic, 3, 1, |_, x, _, z, o| o.fill(f(0.0, x, z).1));
        WaveProblem::homogeneous(g, w0, w1)
    }

    fn standing_error(nz: usize, kx: f64) -> f64 {
        let probe = geom(4, nz, 4);
        let g = geom(4, nz, steps_for_cfl(&probe, 0.5));
        let sol = solve_wave(&standing_problem(&g, kx, 1.0), &g, g.dt()).unwrap();
        let f = standing(kx, 1.0);
        let exact = SpaceTimeField::from_fn(&g, Layer::Elastic, 3, g.nt() + 1, |t, x, _, z, o| o.fill(f(t, x, z).0));
        sol.w.difference(&exact).max_abs()
    }

    #[test]
    fn zero_data_stay_zero() {
        let g = geom(4, 8, 16);
        let sol = solve_wave(&WaveProblem::zero(&g), &g, g.dt()).unwrap();
        assert_eq!(sol.w.max_abs(), 0.0);
        assert_eq!(sol.w_t.max_abs(), 0.0);
        assert_eq!(sol.energy_drift(), 0.0);
    }

    #[test]
    fn standing_wave_converges_at_second_order() {
        for kx in [0.0, 1.0] {
            let e: Vec<f64> = [8, 16, 32].iter().map(|&n| standing_error(n, kx)).collect();
            for w in e.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order > 1.9, "kx {kx}: {e:?}");
            }
        }
    }

    #[test]
    fn energy_is_conserved_at_cfl_point_nine() {
        let probe = geom(8, 16, 4);
        let g = geom(8, 16, steps_for_cfl(&probe, 0.9));
        assert!(cfl_number(&g) <= 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let amps: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w0 = SpaceTimeField::from_fn(&g, Layer::Elastic, 3, 1, |_, x, y, z, o| {
            let s = (PI * (z - 1.0)).sin();
            o[0] = amps[0] * s * x.cos() + amps[1] * (2.0 * PI * (z - 1.0)).sin() * y.sin();
            o[1] = amps[2] * s * (x + 2.0 * y).sin();
            o[2] = amps[3] * s * (z - 1.0);
        });
        let w1 = SpaceTimeField::from_fn(&g, Layer::Elastic, 3, 1, |_, x, _, z, o| {
            o.fill(amps[4] * (3.0 * PI * (z - 1.0)).sin() * (1.0 + amps[5] * x.cos()));
        });
        for scheme in [WaveScheme::Leapfrog, WaveScheme::Implicit] {
            let sol = solve_wave_with(&WaveProblem::homogeneous(&g, w0.clone(), w1.clone()), &g, g.dt(), scheme).unwrap();
            assert!(sol.energy[0] > 0.1);
            assert!(sol.energy_drift() < 1e-12, "{scheme:?}: {}", sol.energy_drift());
        }
    }

    #[test]
    fn leapfrog_is_time_reversible() {
        let g = geom(8, 16, 48);
        let solver = WaveSolver::new(&g, WaveScheme::Leapfrog).unwrap();
        let sol = solver.solve(&standing_problem(&g, 2.0, 2.0)).unwrap();
        let steps = g.nt() - 1;
        let (a, b) = solver.march(sol.w.slice(0), sol.w.slice(1), steps);
        let (back1, back0) = solver.march(&b, &a, steps);
        let err = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err(&a, sol.w.slice(g.nt() - 1)) < 1e-12);
        assert!(err(&back0, sol.w.slice(0)) < 1e-10);
        assert!(err(&back1, sol.w.slice(1)) < 1e-10);
    }

    #[test]
    fn solution_map_is_linear() {
        let g = geom(4, 8, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let random = |rng: &mut ChaCha8Rng, layer: Layer, samples| {
            let mut f = SpaceTimeField::zeros(layer, samples, 4, 4, layer.nz(&g), 3);
            f.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            f
        };
        let mut make = || {
            let psi = random(&mut rng, Layer::Interface, 17);
            let mut w0 = random(&mut rng, Layer::Elastic, 1);
            let mut w1 = random(&mut rng, Layer::Elastic, 1);
            let rate = random(&mut rng, Layer::Interface, 1);
            for ix in 0..4 {
                for iy in 0..4 {
                    for (k, p) in Plane::BOTH.iter().enumerate() {
                        let iz = g.elastic_interface_index(*p);
                        for c in 0..3 {
                            w0.set(0, ix, iy, iz, c, psi.get(0, ix, iy, k, c));
                            w1.set(0, ix, iy, iz, c, rate.get(0, ix, iy, k, c));
                        }
                    }
                }
            }
            WaveProblem { w0, w1, psi, psi_rate: Some(rate) }
        };
        let a = make();
        let b = make();
        let sum = |x: &SpaceTimeField, y: &SpaceTimeField| {
            let mut s = x.clone();
            s.axpy(1.0, y);
            s
        };
        let ab = WaveProblem {
            w0: sum(&a.w0, &b.w0),
            w1: sum(&a.w1, &b.w1),
            psi: sum(&a.psi, &b.psi),
            psi_rate: Some(sum(a.psi_rate.as_ref().unwrap(), b.psi_rate.as_ref().unwrap())),
        };
        let solve = |p: &WaveProblem| solve_wave(p, &g, g.dt()).unwrap().w;
        let lin = sum(&solve(&a), &solve(&b)).difference(&solve(&ab)).max_abs();
        assert!(lin < 1e-12, "{lin}");
    }

    #[test]
    fn explicit_scheme_rejects_large_steps() {
        let g = geom(8, 16, 8);
        assert!(matches!(solve_wave(&WaveProblem::zero(&g), &g, g.dt()), Err(WaveError::Cfl { .. })));
        assert!(solve_wave_with(&WaveProblem::zero(&g), &g, g.dt(), WaveScheme::Implicit).is_ok());
    }

    #[test]
    fn implicit_scheme_converges_at_second_order() {
        let err = |n: usize| {
            let g = geom(4, n, n);
            let sol = solve_wave_with(&standing_problem(&g, 1.0, 1.0), &g, g.dt(), WaveScheme::Implicit).unwrap();
            let f = standing(1.0, 1.0);
            let exact = SpaceTimeField::from_fn(&g, Layer::Elastic, 3, g.nt() + 1, |t, x, _, z, o| o.fill(f(t, x, z).0));
            sol.w.difference(&exact).max_abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn incompatible_data_are_rejected() {
        let g = geom(4, 8, 16);
        let mut p = WaveProblem::zero(&g);
        p.psi.as_mut_slice()[0] = 1e-3;
        assert!(matches!(solve_wave(&p, &g, g.dt()), Err(WaveError::Compatibility(d)) if d == 1e-3));
        p.psi.as_mut_slice()[0] = 1e-10;
        let sol = solve_wave(&p, &g, g.dt()).unwrap();
        assert_eq!(sol.compatibility_warning, 1e-10);
    }

    #[test]
    fn normal_trace_of_polynomials() {
        let g = geom(4, 8, 4);
        let lin = SpaceTimeField::from_fn(&g, Layer::Elastic, 1, 1, |_, _, _, z, o| o[0] = z);
        let tr = normal_trace(&g, &lin);
        for ix in 0..4 {
            assert!((tr.get(0, ix, 1, 0, 0) + 1.0).abs() < 1e-12);
            assert!((tr.get(0, ix, 1, 1, 0) - 1.0).abs() < 1e-12);
        }
        let quad = SpaceTimeField::from_fn(&g, Layer::Elastic, 1, 1, |_, _, _, z, o| o[0] = (z - 1.0) * (z - 1.0));
        let tr = normal_trace(&g, &quad);
        assert!(tr.get(0, 2, 3, 0, 0).abs() < 1e-12);
        assert!((tr.get(0, 2, 3, 1, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn standing_wave_trace_converges() {
        let err = |nz: usize| {
            let probe = geom(4, nz, 4);
            let g = geom(4, nz, steps_for_cfl(&probe, 0.5));
            let sol = solve_wave(&standing_problem(&g, 1.0, 1.0), &g, g.dt()).unwrap();
            let tr = normal_trace(&g, &sol.w);
            let omega = (1.0 + PI * PI).sqrt();
            // ∂_z sin(π(z − 1)) is −π at z = 2 and π at z = 1; both normals give −π.
            let exact = SpaceTimeField::from_fn(&g, Layer::Interface, 3, g.nt() + 1, |t, x, _, _, o| {
                o.fill(-PI * x.cos() * (omega * t).cos())
            });
            tr.difference(&exact).max_abs()
        };
        let (e1, e2, e3) = (err(8), err(16), err(32));
        assert!((e1 / e2).log2() > 1.8 && (e2 / e3).log2() > 1.8, "{e1} {e2} {e3}");
    }
}
