use super::FieldsError;

/// `sup |S'|` of the quintic smoothstep `S(x) = 6x⁵ − 15x⁴ + 10x³` on `[0, 1]`,
/// attained at `x = 1/2`.
pub const RAMP_DERIVATIVE_MAX: f64 = 15.0 / 8.0;

/// Smooth time cutoff: one on `[0, T̃]`, a quintic ramp down to zero on
/// `[T̃, T̃ (1 + 1/steepness)]`, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFunction {
    t_tilde: f64,
    steepness: f64,
}

/// Builds the cutoff with plateau end `t_tilde`. A steepness of one puts the
/// end of the ramp at `2 T̃`.
pub fn make_cutoff(t_tilde: f64, steepness: f64) -> Result<CutoffFunction, FieldsError> {
    if !(t_tilde > 0.0 && t_tilde <= 0.25) {
        return Err(FieldsError::CutoffOutOfRange(t_tilde));
    }
    if !(steepness >= 1.0 && steepness.is_finite()) {
        return Err(FieldsError::SteepnessOutOfRange(steepness));
    }
    Ok(CutoffFunction { t_tilde, steepness })
}

fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

fn smoothstep_prime(x: f64) -> f64 {
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

impl CutoffFunction {
    pub fn t_tilde(&self) -> f64 {
        self.t_tilde
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    fn width(&self) -> f64 {
        self.t_tilde / self.steepness
    }

    /// First time at which the cutoff vanishes.
    pub fn ramp_end(&self) -> f64 {
        self.t_tilde + self.width()
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.t_tilde {
            1.0
        } else if t >= self.ramp_end() {
            0.0
        } else {
            1.0 - smoothstep((t - self.t_tilde) / self.width())
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= self.t_tilde || t >= self.ramp_end() {
            0.0
        } else {
            -smoothstep_prime((t - self.t_tilde) / self.width()) / self.width()
        }
    }

    /// The constant `c` in `sup |ψ'| = c / T̃`.
    pub fn ramp_constant(&self) -> f64 {
        RAMP_DERIVATIVE_MAX * self.steepness
    }

    /// Recorded `sup |ψ'|`.
    pub fn derivative_bound(&self) -> f64 {
        self.ramp_constant() / self.t_tilde
    }

    /// Breakpoints of the piecewise-polynomial profile inside `(a, b)`.
    pub(crate) fn breakpoints_in(&self, a: f64, b: f64) -> impl Iterator<Item = f64> {
        let (t0, t1) = (self.t_tilde, self.ramp_end());
        [t0, t1].into_iter().filter(move |&t| t > a && t < b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let psi = make_cutoff(0.25, 1.0).unwrap();
        assert_eq!(psi.value(0.125), 1.0);
        assert_eq!(psi.value(0.75), 0.0);
        assert_eq!(psi.value(0.5), 0.0);
        assert!((psi.value(0.375) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(make_cutoff(0.3, 1.0), Err(FieldsError::CutoffOutOfRange(0.3)));
        assert!(make_cutoff(0.0, 1.0).is_err());
        assert!(make_cutoff(0.1, 0.5).is_err());
    }

    #[test]
    fn sampled_derivative_respects_bound() {
        let psi = make_cutoff(0.1, 1.0).unwrap();
        let n = 10_000;
        let sampled = (0..=n)
            .map(|i| psi.derivative(i as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        // the grid hits the ramp midpoint t = 0.15 exactly
        assert!((sampled - 18.75).abs() < 1e-9, "{sampled}");
        assert!(sampled <= psi.derivative_bound() * (1.0 + 1e-12));
        assert_eq!(psi.ramp_constant(), 1.875);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let psi = make_cutoff(0.2, 1.5).unwrap();
        for i in 1..100 {
            let t = 0.2 + 0.14 * i as f64 / 100.0;
            let fd = (psi.value(t + 1e-6) - psi.value(t - 1e-6)) / 2e-6;
            assert!((fd - psi.derivative(t)).abs() < 1e-6);
        }
    }
}
