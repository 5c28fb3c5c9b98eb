//! The contraction semigroup generated by -A: its action on gridded
//! functions, its exact norm, and the location of the norm-attaining point.

use thiserror::Error;

use crate::potential::{Family, Potential};

/// Uniformly sampled function; values outside the grid are treated as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFunction {
    pub x_start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GriddedFunction {
    pub fn sample<F: Fn(f64) -> f64>(x_start: f64, step: f64, n: usize, f: F) -> Self {
        let values = (0..n).map(|i| f(x_start + i as f64 * step)).collect();
        Self {
            x_start,
            step,
            values,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_start + i as f64 * self.step
    }

    /// Grid l2 norm sqrt(h sum f_i^2).
    pub fn norm(&self) -> f64 {
        (self.step * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("t = {t} is not aligned with the grid step {step}; regrid the input")]
    NotGridAligned { t: f64, step: f64 },
    #[error("t = {t} is below the validity threshold t0 = {t0} for this potential")]
    BelowThreshold { t: f64, t0: f64 },
}

/// g_t(x) = -int_x^{x+t} W(s) ds.
pub fn log_weight(pot: &Potential, t: f64, x: f64) -> f64 {
    pot.w_antiderivative(x) - pot.w_antiderivative(x + t)
}

/// Threshold t0 above which the norm formula holds: 0 for the smooth
/// built-ins; `2 x1` with `W(x1) > sup W over [0, x0]` for custom potentials.
pub fn t_threshold(pot: &Potential) -> f64 {
    match pot.family() {
        Family::Custom => {
            let sup_core = pot.sup_w_on_core();
            let mut x1 = pot.x0();
            while pot.w(x1) <= sup_core {
                x1 *= 1.5;
                if !x1.is_finite() {
                    return f64::INFINITY;
                }
            }
            2.0 * x1
        }
        _ => 0.0,
    }
}

/// (S_t f)(x) = exp(g_t(x)) f(x + t) for grid-aligned t.
pub fn apply_semigroup(
    pot: &Potential,
    t: f64,
    f: &GriddedFunction,
) -> Result<GriddedFunction, SemigroupError> {
    if t < 0.0 {
        return Err(SemigroupError::NegativeTime(t));
    }
    let ratio = t / f.step;
    let shift = ratio.round();
    if (ratio - shift).abs() > 1e-9 * ratio.max(1.0) {
        return Err(SemigroupError::NotGridAligned { t, step: f.step });
    }
    let shift = shift as usize;
    let n = f.values.len();
    let values = (0..n)
        .map(|i| {
            let advected = if i + shift < n { f.values[i + shift] } else { 0.0 };
            log_weight(pot, t, f.x(i)).exp() * advected
        })
        .collect();
    Ok(GriddedFunction {
        x_start: f.x_start,
        step: f.step,
        values,
    })
}

/// log ||S_t|| = -2 int_0^{t/2} W(s) ds for t >= t0.
pub fn semigroup_norm(pot: &Potential, t: f64) -> Result<f64, SemigroupError> {
    if t < 0.0 {
        return Err(SemigroupError::NegativeTime(t));
    }
    let t0 = t_threshold(pot);
    if t < t0 {
        return Err(SemigroupError::BelowThreshold { t, t0 });
    }
    Ok(-2.0 * pot.w_antiderivative(0.5 * t))
}

/// Grid argmax of g_t over [-t - 5 x0, 5 x0]; the maximizer is -t/2 for
/// t above the threshold.
pub fn norm_maximizer(pot: &Potential, t: f64, grid_n: usize) -> f64 {
    assert!(grid_n >= 1000, "maximizer grid too coarse");
    assert!(t > 0.0, "time must be positive");
    let lo = -t - 5.0 * pot.x0();
    let hi = 5.0 * pot.x0();
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..grid_n {
        let x = lo + (hi - lo) * i as f64 / (grid_n - 1) as f64;
        let g = log_weight(pot, t, x);
        if g > best.0 {
            best = (g, x);
        }
    }
    best.1
}
