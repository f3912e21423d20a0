#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use super::NormsError;

fn check_order(alpha: f64) -> Result<(), NormsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(NormsError::FractionalOrder(alpha))
    }
}

/// Midpoint-rule Slobodeckij seminorm of uniformly spaced samples:
/// `(Σ_{i≠j} h² |f_i − f_j|² / |t_i − t_j|^{1+2α})^{1/2}`.
///
/// The double sum is evaluated lag by lag, which costs one power per lag
/// instead of one per pair.
pub fn slobodeckij_seminorm(f: &[f64], h: f64, alpha: f64) -> Result<f64, NormsError> {
    check_order(alpha)?;
    if f.len() < 2 {
        return Err(NormsError::TooFewSamples { need: 2, got: f.len() });
    }
    let n = f.len();
    let mut total = 0.0;
    for d in 1..n {
        let kernel = (d as f64 * h).powf(-1.0 - 2.0 * alpha);
        let mut lag = 0.0;
        for i in 0..n - d {
            let diff = f[i + d] - f[i];
            lag += diff * diff;
        }
        total += kernel * lag;
    }
    Ok((2.0 * h * h * total).sqrt())
}

/// Squared seminorm of a sequence of vectors, using `‖g_i − g_j‖²` as the
/// numerator.
pub fn slobodeckij_sq_sequence<S: AsRef<[f64]>>(seq: &[S], h: f64, alpha: f64) -> Result<f64, NormsError> {
    check_order(alpha)?;
    if seq.len() < 2 {
        return Err(NormsError::TooFewSamples { need: 2, got: seq.len() });
    }
    let n = seq.len();
    let mut total = 0.0;
    for d in 1..n {
        let kernel = (d as f64 * h).powf(-1.0 - 2.0 * alpha);
        let mut lag = 0.0;
        for i in 0..n - d {
            let (a, b) = (seq[i + d].as_ref(), seq[i].as_ref());
            lag += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
        total += kernel * lag;
    }
    Ok(2.0 * h * h * total)
}
