//! Lambda-dependent scalars of the spectral analysis: turning point,
//! action integral f_lambda, its positive zero, the concentration windows
//! around the turning points, and the Laplace-method window integrals.

use thiserror::Error;

use crate::numerics::{find_root, integrate, NumericsError, QuadratureConfig, RootConfig};
use crate::potential::Potential;

/// Window half-width factor delta in delta_lambda = delta * x_lambda^{-nu}.
/// Any value in (0, 1/4) works; 0.1 keeps the windows inside (0, x_{lambda,0})
/// for all built-in families at desk-scale lambda.
pub const WINDOW_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// All lambda-dependent scalars for one (potential, lambda) pair.
#[derive(Debug, Clone, Copy)]
pub struct SpectralProfile {
    pub lambda: f64,
    /// Positive root of W(x) = lambda.
    pub x_lambda: f64,
    /// f_lambda(x_lambda), the maximum of the action integral.
    pub f_at_xlambda: f64,
    pub wprime_at_xlambda: f64,
    /// Positive zero of f_lambda beyond the turning point.
    pub x_lambda_0: f64,
    /// Window half-width delta * x_lambda^{-nu}.
    pub delta_lambda: f64,
    /// Upsilon_1(x_lambda).
    pub upsilon1: f64,
    /// Laplace width |f''(x_lambda)|^{-1/2} = W'(x_lambda)^{-1/2}.
    pub rho: f64,
}

impl SpectralProfile {
    /// The window around +x_lambda (`Plus`) or -x_lambda (`Minus`).
    pub fn omega(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Plus => (
                self.x_lambda - self.delta_lambda,
                self.x_lambda + self.delta_lambda,
            ),
            Side::Minus => (
                -self.x_lambda - self.delta_lambda,
                -self.x_lambda + self.delta_lambda,
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(
        "lambda = {lambda} is below lambda_0 for this family (needs lambda > {floor:.6e})"
    )]
    BelowLambdaZero { lambda: f64, floor: f64 },
    #[error("bracket doubling for {what} did not terminate")]
    BracketSearch { what: &'static str },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The positive turning point x_lambda solving W(x) = lambda.
///
/// The bracket is found by doubling from x0; lambda at or below the sup of
/// W over [0, x0] is rejected as below lambda_0.
pub fn turning_point(pot: &Potential, lambda: f64) -> Result<f64, SpectralError> {
    let floor = pot.sup_w_on_core();
    if lambda.is_nan() || lambda <= floor {
        return Err(SpectralError::BelowLambdaZero { lambda, floor });
    }
    let a = pot.x0();
    let mut b = 2.0 * a;
    let mut tries = 0;
    while pot.w(b) < lambda {
        b *= 2.0;
        tries += 1;
        if tries > 2000 || !b.is_finite() {
            return Err(SpectralError::BracketSearch {
                what: "turning point",
            });
        }
    }
    Ok(find_root(
        |x| pot.w(x) - lambda,
        (a, b),
        &RootConfig::default(),
    )?)
}

/// Action integral f_lambda(x) = int_0^x (lambda - W(t)) dt.
///
/// Built-in families use the closed-form antiderivative of W; custom
/// potentials fall back to adaptive quadrature.
pub fn f_lambda(pot: &Potential, lambda: f64, x: f64) -> f64 {
    lambda * x - pot.w_antiderivative(x)
}

/// Assemble the full [`SpectralProfile`]; errors below lambda_0.
pub fn profile(pot: &Potential, lambda: f64) -> Result<SpectralProfile, SpectralError> {
    let x_lambda = turning_point(pot, lambda)?;
    let f_at_xlambda = f_lambda(pot, lambda, x_lambda);
    let wprime_at_xlambda = pot.w_prime(x_lambda);
    let usable = f_at_xlambda > 0.0 && wprime_at_xlambda > 0.0;
    if !usable {
        return Err(SpectralError::BelowLambdaZero {
            lambda,
            floor: pot.sup_w_on_core(),
        });
    }
    // zero of f beyond the turning point, bracket found by doubling
    let mut upper = 2.0 * x_lambda;
    let mut tries = 0;
    while f_lambda(pot, lambda, upper) > 0.0 {
        upper *= 2.0;
        tries += 1;
        if tries > 2000 || !upper.is_finite() {
            return Err(SpectralError::BracketSearch { what: "f zero" });
        }
    }
    let x_lambda_0 = find_root(
        |x| f_lambda(pot, lambda, x),
        (x_lambda, upper),
        &RootConfig::default(),
    )?;
    let delta_lambda = WINDOW_DELTA * x_lambda.powf(-pot.nu());
    Ok(SpectralProfile {
        lambda,
        x_lambda,
        f_at_xlambda,
        wprime_at_xlambda,
        x_lambda_0,
        delta_lambda,
        upsilon1: pot.upsilon1(x_lambda),
        rho: wprime_at_xlambda.powf(-0.5),
    })
}

/// log of int_a^b e^{g(x)} dx, overflow-safe: the max of g (sampled, plus
/// the supplied candidates) is factored out before adaptive quadrature.
///
/// `eval_noise` is the relative accuracy of one g evaluation. The shifted
/// integrand e^{g - gmax} cannot be resolved below eval_noise * |g|, so
/// the quadrature tolerance is floored there and the best estimate is
/// kept if the refinement bottoms out at that floor.
pub(crate) fn log_integral_exp<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    extra_max_candidates: &[f64],
    eval_noise: f64,
) -> Result<f64, NumericsError> {
    if a == b {
        return Ok(f64::NEG_INFINITY);
    }
    let mut gmax = f64::NEG_INFINITY;
    let mut g_scale: f64 = 0.0;
    let samples = 32;
    for i in 0..=samples {
        let x = a + (b - a) * i as f64 / samples as f64;
        let gx = g(x);
        gmax = gmax.max(gx);
        if gx.is_finite() {
            g_scale = g_scale.max(gx.abs());
        }
    }
    for &c in extra_max_candidates {
        gmax = gmax.max(c);
        if c.is_finite() {
            g_scale = g_scale.max(c.abs());
        }
    }
    if gmax == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let cfg = QuadratureConfig {
        rel_tol: 1e-10f64.max(8.0 * eval_noise * g_scale),
        ..Default::default()
    };
    let v = match integrate(|x| (g(x) - gmax).exp(), a, b, &cfg) {
        Ok(v) => v,
        Err(NumericsError::QuadratureDepth { estimate, .. }) => estimate,
        Err(e) => return Err(e),
    };
    Ok(gmax + v.ln())
}

/// log of the Laplace window integral I_{lambda,+-} = int over the window
/// of e^{M f_lambda}.
///
/// The integrand is shifted by its window maximum (at x_lambda for the plus
/// side, at the window edges for the minus side) so only bounded values are
/// exponentiated; the shift is added back to the returned log.
pub fn laplace_integral(
    pot: &Potential,
    lambda: f64,
    m: f64,
    side: Side,
) -> Result<f64, SpectralError> {
    assert!(m > 0.0, "Laplace parameter M must be positive");
    let prof = profile(pot, lambda)?;
    let (a, b) = prof.omega(side);
    let candidates = match side {
        Side::Plus => vec![m * prof.f_at_xlambda],
        Side::Minus => vec![
            m * f_lambda(pot, lambda, a),
            m * f_lambda(pot, lambda, b),
        ],
    };
    Ok(log_integral_exp(
        |x| m * f_lambda(pot, lambda, x),
        a,
        b,
        &candidates,
        pot.eval_noise(),
    )?)
}

/// log of the Laplace-method leading-order value
/// sqrt(2 pi / M) W'(x_lambda)^{-1/2} e^{M f(x_lambda)}.
pub fn laplace_log_asymptote(prof: &SpectralProfile, m: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI / m).ln() - 0.5 * prof.wprime_at_xlambda.ln()
        + m * prof.f_at_xlambda
}
