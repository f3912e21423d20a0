//! Small-time Poincaré experiment on the cutoff bump family.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::slobodeckij::slobodeckij_seminorm;
use super::NormsError;

/// Midpoint samples per unit of the largest `M` in a sweep.
const SAMPLES_PER_M: usize = 32;

/// `f(t) = S(t M / T)` on `[0, T/M]` and `1` afterwards, with `S` the
/// quintic smoothstep; `f(0) = 0` and `|f'| ≤ (15/8) M / T`.
pub fn bump_profile(t: f64, big_t: f64, m: f64) -> f64 {
    let x = (t * m / big_t).clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct P01Row {
    pub m: f64,
    pub l2: f64,
    pub seminorm: f64,
    /// `‖f‖ / (T^β (⌊f⌋ + ‖f‖))`, one entry per requested `β`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct P01Table {
    pub alpha: f64,
    pub t: f64,
    pub betas: Vec<f64>,
    pub samples: usize,
    pub rows: Vec<P01Row>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl P01Table {
    /// Log-log slope of the seminorm column against `M`.
    pub fn seminorm_slope(&self) -> f64 {
        let m: Vec<f64> = self.rows.iter().map(|r| r.m).collect();
        let s: Vec<f64> = self.rows.iter().map(|r| r.seminorm).collect();
        log_log_slope(&m, &s)
    }

    /// `ratio(M_last) / ratio(M_first)` for the `k`-th `β`.
    pub fn ratio_growth(&self, k: usize) -> f64 {
        let first = self.rows.first().map_or(f64::NAN, |r| r.ratios[k]);
        let last = self.rows.last().map_or(f64::NAN, |r| r.ratios[k]);
        last / first
    }

    /// `(max − min) / min` of the `k`-th ratio column.
    pub fn ratio_variation(&self, k: usize) -> f64 {
        let col = self.rows.iter().map(|r| r.ratios[k]);
        let (lo, hi) = col.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (hi - lo) / lo
    }
}

/// Evaluates the bump family on `[0, T]` for every `M` in `ms` with one
/// common midpoint grid of `32 · max M` cells.
pub fn p01_experiment(betas: &[f64], alpha: f64, big_t: f64, ms: &[f64]) -> Result<P01Table, NormsError> {
    if !(big_t > 0.0 && big_t <= 1.0) {
        return Err(NormsError::Parameter("T must lie in (0, 1]"));
    }
    if ms.is_empty() || ms.iter().any(|&m| !(m >= 2.0)) {
        return Err(NormsError::Parameter("every M must be at least 2"));
    }
    let m_max = ms.iter().fold(0.0f64, |a, &b| a.max(b));
    let n = SAMPLES_PER_M * m_max.ceil() as usize;
    let h = big_t / n as f64;
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let f: Vec<f64> = (0..n).map(|i| bump_profile((i as f64 + 0.5) * h, big_t, m)).collect();
        let l2 = (h * f.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let seminorm = slobodeckij_seminorm(&f, h, alpha)?;
        let ratios = betas
            .iter()
            .map(|&b| l2 / (big_t.powf(b) * (seminorm + l2)))
            .collect();
        rows.push(P01Row { m, l2, seminorm, ratios });
    }
    Ok(P01Table {
        alpha,
        t: big_t,
        betas: betas.to_vec(),
        samples: n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_norm_is_bracketed_by_sqrt_t() {
        let t = 0.5;
        let table = p01_experiment(&[0.0], 0.25, t, &[2.0, 8.0, 32.0]).unwrap();
        for row in &table.rows {
            assert!(row.l2 <= t.sqrt() && row.l2 >= 0.5 * t.sqrt(), "{row:?}");
        }
    }

    #[test]
    fn seminorm_decays_like_m_to_alpha_minus_half() {
        let table = p01_experiment(&[0.0], 0.25, 0.5, &[4.0, 8.0, 16.0, 32.0, 64.0]).unwrap();
        assert!((table.seminorm_slope() + 0.25).abs() < 0.1, "{}", table.seminorm_slope());
    }

    #[test]
    fn rejects_small_m_and_bad_t() {
        assert!(p01_experiment(&[0.0], 0.25, 0.5, &[1.0]).is_err());
        assert!(p01_experiment(&[0.0], 0.25, 1.5, &[2.0]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.7)).collect();
        assert!((log_log_slope(&x, &y) + 0.7).abs() < 1e-12);
    }
}
