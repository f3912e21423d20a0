//! Horizontal Fourier transforms and the vertical cosine transform.
//!
//! Horizontal axes are 2π-periodic with power-of-two sample counts and use
//! an iterative radix-2 FFT. Coefficients are normalised so that
//! `f(x) = Σ_k f̂_k e^{i k·x}`; Parseval then reads
//! `Σ_x |f|² dx dy = (2π)² Σ_k |f̂_k|²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

/// Signed wavenumber of FFT index `i` on an axis with `n` samples. The
/// Nyquist index `n/2` maps to `+n/2`.
pub fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Wavenumber used for odd-order derivatives: the Nyquist mode has no
/// real-valued derivative and is dropped.
pub fn derivative_wavenumber(i: usize, n: usize) -> f64 {
    if n % 2 == 0 && i == n / 2 {
        0.0
    } else {
        wavenumber(i, n)
    }
}

/// One-dimensional radix-2 FFT plan.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length must be a power of two");
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalised transform: `X_k = Σ_j x_j e^{∓2πi jk/n}` (minus sign
    /// forward, plus sign inverse).
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + len / 2] * w;
                    data[start + k] = a + b;
                    data[start + k + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Two-dimensional transform over an `nx × ny` plane stored x-major
/// (`index = ix * ny + iy`).
#[derive(Debug, Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fx: Fft,
    fy: Fft,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            fx: Fft::new(nx),
            fy: Fft::new(ny),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, plane: &mut [Complex64], inverse: bool, scratch: &mut Vec<Complex64>) {
        let (nx, ny) = (self.nx, self.ny);
        for row in plane.chunks_exact_mut(ny) {
            self.fy.process(row, inverse);
        }
        scratch.clear();
        scratch.resize(nx, Complex64::new(0.0, 0.0));
        for iy in 0..ny {
            for ix in 0..nx {
                scratch[ix] = plane[ix * ny + iy];
            }
            self.fx.process(scratch, inverse);
            for ix in 0..nx {
                plane[ix * ny + iy] = scratch[ix];
            }
        }
    }

    /// Real samples to normalised coefficients.
    pub fn forward_real(&self, samples: &[f64], coeffs: &mut [Complex64]) {
        debug_assert_eq!(samples.len(), self.len());
        for (c, &s) in coeffs.iter_mut().zip(samples) {
            *c = Complex64::new(s, 0.0);
        }
        let mut scratch = Vec::new();
        self.transform(coeffs, false, &mut scratch);
        let scale = 1.0 / self.len() as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
    }

    /// Normalised coefficients to real samples; the imaginary part, which is
    /// round-off for Hermitian input, is discarded.
    pub fn inverse_real(&self, coeffs: &[Complex64], samples: &mut [f64]) {
        let mut buf = coeffs.to_vec();
        let mut scratch = Vec::new();
        self.transform(&mut buf, true, &mut scratch);
        for (s, c) in samples.iter_mut().zip(&buf) {
            *s = c.re;
        }
    }

    /// `(kx, ky)` of flat coefficient index `m`.
    pub fn wavevector(&self, m: usize) -> (f64, f64) {
        (wavenumber(m / self.ny, self.nx), wavenumber(m % self.ny, self.ny))
    }

    /// Wavevector with the Nyquist components dropped, for first derivatives.
    pub fn derivative_wavevector(&self, m: usize) -> (f64, f64) {
        (
            derivative_wavenumber(m / self.ny, self.nx),
            derivative_wavenumber(m % self.ny, self.ny),
        )
    }

    /// Transforms every `(z, component)` plane of a field slice with `nz`
    /// vertical samples and `nc` components. Output is mode-major:
    /// `out[(m * nz + iz) * nc + c]`.
    pub fn planes_forward(&self, slice: &[f64], nz: usize, nc: usize, out: &mut [Complex64]) {
        let len = self.len();
        debug_assert_eq!(slice.len(), len * nz * nc);
        let mut plane = vec![0.0; len];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for iz in 0..nz {
            for c in 0..nc {
                for (p, v) in plane.iter_mut().enumerate() {
                    *v = slice[(p * nz + iz) * nc + c];
                }
                self.forward_real(&plane, &mut coeffs);
                for (m, cf) in coeffs.iter().enumerate() {
                    out[(m * nz + iz) * nc + c] = *cf;
                }
            }
        }
    }

    /// Inverse of [`Fft2::planes_forward`].
    pub fn planes_inverse(&self, modes: &[Complex64], nz: usize, nc: usize, out: &mut [f64]) {
        let len = self.len();
        let mut plane = vec![0.0; len];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for iz in 0..nz {
            for c in 0..nc {
                for (m, cf) in coeffs.iter_mut().enumerate() {
                    *cf = modes[(m * nz + iz) * nc + c];
                }
                self.inverse_real(&coeffs, &mut plane);
                for (p, v) in plane.iter().enumerate() {
                    out[(p * nz + iz) * nc + c] = *v;
                }
            }
        }
    }

    /// Squared modulus `kx² + ky²` (Nyquist kept).
    pub fn k2(&self, m: usize) -> f64 {
        let (kx, ky) = self.wavevector(m);
        kx * kx + ky * ky
    }
}

/// Type-I cosine transform on `n + 1` samples (even reflection at both ends).
///
/// `f_j = Σ_{m=0}^{n} c_m cos(mπ j / n)`; with trapezoid weights `w_j` the
/// cosines are orthogonal and `Σ_j w_j f_j² = Σ_m γ_m c_m²` where
/// `γ_0 = γ_n = n` and `γ_m = n/2` otherwise.
#[derive(Debug, Clone)]
pub struct Dct1 {
    n: usize,
    table: Vec<f64>,
}

impl Dct1 {
    /// Plan for `intervals` intervals (`intervals + 1` samples).
    pub fn new(intervals: usize) -> Self {
        let n = intervals;
        let mut table = vec![0.0; (n + 1) * (n + 1)];
        for m in 0..=n {
            for j in 0..=n {
                // reduce the argument exactly before calling cos
                let r = (m * j) % (2 * n);
                table[m * (n + 1) + j] = (PI * r as f64 / n as f64).cos();
            }
        }
        Self { n, table }
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    /// Orthogonality constant `γ_m`.
    pub fn gamma(&self, m: usize) -> f64 {
        if m == 0 || m == self.n {
            self.n as f64
        } else {
            self.n as f64 / 2.0
        }
    }

    pub fn forward(&self, samples: &[Complex64], coeffs: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(samples.len(), n + 1);
        for m in 0..=n {
            let row = &self.table[m * (n + 1)..(m + 1) * (n + 1)];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc += samples[j] * (w * row[j]);
            }
            coeffs[m] = acc / self.gamma(m);
        }
    }

    pub fn inverse(&self, coeffs: &[Complex64], samples: &mut [Complex64]) {
        let n = self.n;
        for j in 0..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..=n {
                acc += coeffs[m] * self.table[m * (n + 1) + j];
            }
            samples[j] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let th = -2.0 * PI * (j * k) as f64 / n as f64;
                        v * Complex64::new(th.cos(), th.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn fft_matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 32] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            Fft::new(n).process(&mut y, false);
            let z = naive_dft(&x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fft2_recovers_single_mode() {
        let (nx, ny) = (8, 4);
        let plan = Fft2::new(nx, ny);
        let mut f = vec![0.0; nx * ny];
        for ix in 0..nx {
            for iy in 0..ny {
                let x = 2.0 * PI * ix as f64 / nx as f64;
                let y = 2.0 * PI * iy as f64 / ny as f64;
                f[ix * ny + iy] = (2.0 * x - y).cos();
            }
        }
        let mut c = vec![Complex64::new(0.0, 0.0); nx * ny];
        plan.forward_real(&f, &mut c);
        for (m, v) in c.iter().enumerate() {
            let (kx, ky) = plan.wavevector(m);
            let expect = if (kx, ky) == (2.0, -1.0) || (kx, ky) == (-2.0, 1.0) { 0.5 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-14 && v.im.abs() < 1e-14, "{kx} {ky} {v}");
        }
        let mut back = vec![0.0; nx * ny];
        plan.inverse_real(&c, &mut back);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dct1_round_trip_and_parseval() {
        let n = 9;
        let plan = Dct1::new(n);
        let f: Vec<Complex64> = (0..=n)
            .map(|j| Complex64::new((j as f64 * 0.4).exp(), (j as f64).sin()))
            .collect();
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        plan.forward(&f, &mut c);
        let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
        plan.inverse(&c, &mut g);
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).norm() < 1e-12);
        }
        let lhs: f64 = (0..=n)
            .map(|j| if j == 0 || j == n { 0.5 } else { 1.0 } * f[j].norm_sqr())
            .sum();
        let rhs: f64 = (0..=n).map(|m| plan.gamma(m) * c[m].norm_sqr()).sum();
        assert!((lhs - rhs).abs() < 1e-11 * lhs);
    }
}
