//! Shared scalar kernels: adaptive Simpson quadrature, bracketed root
//! finding, log-domain accumulation, and a symmetric tridiagonal
//! eigensolver based on Sturm-sequence bisection.

use thiserror::Error;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_depth: 50,
        }
    }
}

/// Tolerances for [`find_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    pub rel_tol: f64,
    pub max_iter: u32,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("quadrature hit max depth {max_depth}; best estimate {estimate:.6e}")]
    QuadratureDepth { max_depth: u32, estimate: f64 },
    #[error("invalid bracket: f(a) = {fa:.6e} and f(b) = {fb:.6e} have the same sign")]
    InvalidBracket { fa: f64, fb: f64 },
    #[error("requested {k} eigenvalues from a matrix of dimension {n}")]
    TooManyEigenvalues { k: usize, n: usize },
}

/// Hard cap on integrand evaluations per [`integrate`] call. Refinement
/// driven purely by evaluation noise (the tolerance sits below what the
/// integrand can resolve) would otherwise grow the bisection tree
/// geometrically instead of terminating.
const MAX_QUADRATURE_EVALS: u64 = 1_000_000;

/// Adaptive composite Simpson quadrature of `f` over `[a, b]`.
///
/// Interval bisection on the local Richardson error estimate; on hitting
/// `max_depth` or the evaluation budget the error variant still carries
/// the best estimate so callers may degrade gracefully.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, NumericsError> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    let tol = cfg.abs_tol.max(cfg.rel_tol * whole.abs());
    let mut budget = MAX_QUADRATURE_EVALS;
    let (value, converged) = adapt(&f, a, b, fa, fm, fb, whole, tol, cfg.max_depth, &mut budget);
    if converged {
        Ok(value)
    } else {
        Err(NumericsError::QuadratureDepth {
            max_depth: cfg.max_depth,
            estimate: value,
        })
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u64,
) -> (f64, bool) {
    if *budget < 2 {
        return (whole, false);
    }
    *budget -= 2;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    // interval collapsed to rounding: accept what we have
    if err.abs() <= 15.0 * tol || lm <= a || rm >= b {
        return (left + right + err / 15.0, true);
    }
    if depth == 0 {
        return (left + right + err / 15.0, false);
    }
    let half_tol = 0.5 * tol;
    let (vl, okl) = adapt(f, a, m, fa, flm, fm, left, half_tol, depth - 1, budget);
    let (vr, okr) = adapt(f, m, b, fm, frm, fb, right, half_tol, depth - 1, budget);
    (vl + vr, okl && okr)
}

/// Root of `f` inside the bracket: bisection to relative tolerance, then a
/// few secant-Newton polish steps clamped to the bracket.
pub fn find_root<F: Fn(f64) -> f64>(
    f: F,
    bracket: (f64, f64),
    cfg: &RootConfig,
) -> Result<f64, NumericsError> {
    let (mut a, mut b) = bracket;
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::InvalidBracket { fa, fb });
    }
    let (lo0, hi0) = (a, b);
    let mut iters = 0;
    while b - a > cfg.rel_tol * a.abs().max(b.abs()).max(1.0) && iters < cfg.max_iter {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        iters += 1;
    }
    // secant-derivative Newton polish, kept inside the original bracket
    let mut x = if fa.abs() < fb.abs() { a } else { b };
    let mut fx = f(x);
    let dx0 = (b - a).max(cfg.rel_tol * x.abs().max(1.0));
    for _ in 0..5 {
        if fx == 0.0 {
            break;
        }
        let h = dx0.max(1e-7 * x.abs().max(1.0));
        let deriv = (f(x + h) - f(x - h)) / (2.0 * h);
        if deriv == 0.0 || !deriv.is_finite() {
            break;
        }
        let next = (x - fx / deriv).clamp(lo0, hi0);
        let fnext = f(next);
        if fnext.abs() < fx.abs() {
            x = next;
            fx = fnext;
        } else {
            break;
        }
    }
    Ok(x)
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix,
/// ascending, via bisection on the Sturm-sequence negative-pivot count.
pub fn tridiag_eigs(
    diag: &[f64],
    offdiag: &[f64],
    k: usize,
) -> Result<Vec<f64>, NumericsError> {
    let n = diag.len();
    if k > n {
        return Err(NumericsError::TooManyEigenvalues { k, n });
    }
    if k == 0 || n == 0 {
        return Ok(Vec::new());
    }
    assert_eq!(
        offdiag.len(),
        n - 1,
        "offdiag must have dimension - 1 entries"
    );
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut norm_inf: f64 = 0.0;
    for i in 0..n {
        let e_left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
        let e_right = if i < n - 1 { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - e_left - e_right);
        hi = hi.max(diag[i] + e_left + e_right);
        norm_inf = norm_inf.max(diag[i].abs() + e_left + e_right);
    }
    if norm_inf == 0.0 {
        return Ok(vec![0.0; k]);
    }
    let tol = 1e-10 * norm_inf;
    let guard = (f64::EPSILON * norm_inf).max(f64::MIN_POSITIVE);
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < guard {
                if q < 0.0 {
                    -guard
                } else {
                    guard
                }
            } else {
                q
            };
            q = (diag[i] - x) - offdiag[i - 1] * offdiag[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut eigs = Vec::with_capacity(k);
    for idx in 0..k {
        let mut a = lo - tol;
        let mut b = hi + tol;
        while b - a > tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if count_below(m) > idx {
                b = m;
            } else {
                a = m;
            }
        }
        let mut ev = 0.5 * (a + b);
        if let Some(&prev) = eigs.last() {
            ev = ev.max(prev);
        }
        eigs.push(ev);
    }
    Ok(eigs)
}

/// Least-squares slope of ys against xs.
pub(crate) fn lstsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// log(exp(a) + exp(b)) without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log of the sum of exponentials of `xs`; empty input gives -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const QUAD: QuadratureConfig = QuadratureConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_depth: 50,
    };

    #[test]
    fn integrate_monomial() {
        let v = integrate(|x| x * x, 0.0, 1.0, &QUAD).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn integrate_action_integrand() {
        // antiderivative 3t - t^3/3 gives 10/3 on [0, 2]
        let v = integrate(|t| 3.0 - t * t, 0.0, 2.0, &QUAD).unwrap();
        assert!((v - 10.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn integrate_empty_interval() {
        assert_eq!(integrate(|x| x.exp(), 0.0, 0.0, &QUAD).unwrap(), 0.0);
    }

    #[test]
    fn integrate_reports_nonconvergence_with_estimate() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_depth: 2,
        };
        match integrate(|x| (50.0 * x).sin().abs(), 0.0, 3.0, &cfg) {
            Err(NumericsError::QuadratureDepth { estimate, .. }) => {
                assert!(estimate.is_finite());
            }
            other => panic!("expected depth error, got {other:?}"),
        }
    }

    #[test]
    fn root_of_parabola() {
        let r = find_root(|x| x * x - 4.0, (0.0, 10.0), &RootConfig::default()).unwrap();
        assert!((r - 2.0).abs() <= 1e-11);
    }

    #[test]
    fn root_of_shifted_potential() {
        // W = x^2, lambda = 9: x_lambda = 3
        let r = find_root(|x| x * x - 9.0, (1.0, 100.0), &RootConfig::default()).unwrap();
        assert!((r - 3.0).abs() <= 1e-10);
    }

    #[test]
    fn root_of_exponential() {
        let r = find_root(|x| x.exp() - 2.0, (0.0, 1.0), &RootConfig::default()).unwrap();
        assert!((r - std::f64::consts::LN_2).abs() <= 1e-12);
    }

    #[test]
    fn root_residual_within_scale() {
        let f = |x: f64| x * x - 4.0;
        let cfg = RootConfig::default();
        let r = find_root(f, (0.0, 10.0), &cfg).unwrap();
        let scale = f(0.0).abs().max(f(10.0).abs());
        assert!(f(r).abs() <= cfg.rel_tol * scale);
    }

    #[test]
    fn invalid_bracket_names_endpoints() {
        let err = find_root(|x| x * x + 1.0, (0.0, 1.0), &RootConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1.0") && msg.contains("2.0"), "{msg}");
    }

    #[test]
    fn tridiag_two_by_two() {
        let eigs = tridiag_eigs(&[2.0, 2.0], &[-1.0], 2).unwrap();
        assert!((eigs[0] - 1.0).abs() <= 1e-9);
        assert!((eigs[1] - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn tridiag_dirichlet_laplacian() {
        // -d^2/dx^2 on [0, pi] with 200 interior points; lowest eigenvalue -> 1
        let n = 200;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n - 1];
        let eigs = tridiag_eigs(&diag, &off, 1).unwrap();
        assert!((eigs[0] - 1.0).abs() <= 1e-3, "{}", eigs[0]);
    }

    #[test]
    fn tridiag_zero_matrix() {
        let eigs = tridiag_eigs(&[0.0; 4], &[0.0; 3], 4).unwrap();
        assert_eq!(eigs, vec![0.0; 4]);
    }

    #[test]
    fn tridiag_k_too_large() {
        assert!(matches!(
            tridiag_eigs(&[1.0], &[], 2),
            Err(NumericsError::TooManyEigenvalues { k: 2, n: 1 })
        ));
    }

    /// Characteristic-polynomial oracle: coefficients of det(T - x I) from the
    /// tridiagonal determinant recurrence, roots located by sign-change bisection.
    fn charpoly_eigs(diag: &[f64], off: &[f64]) -> Vec<f64> {
        let n = diag.len();
        // p_k(x) = (d_k - x) p_{k-1}(x) - e_{k-1}^2 p_{k-2}(x), in coefficient form
        let mut prev: Vec<f64> = vec![1.0];
        let mut cur: Vec<f64> = vec![diag[0], -1.0];
        for i in 1..n {
            let mut next = vec![0.0; i + 2];
            for (j, &c) in cur.iter().enumerate() {
                next[j] += diag[i] * c;
                next[j + 1] -= c;
            }
            let e2 = off[i - 1] * off[i - 1];
            for (j, &c) in prev.iter().enumerate() {
                next[j] -= e2 * c;
            }
            prev = cur;
            cur = next;
        }
        let eval = |x: f64| -> f64 {
            let mut acc = 0.0;
            for &c in cur.iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        // scan Gershgorin interval for sign changes, then bisect each
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let el = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let er = if i < n - 1 { off[i].abs() } else { 0.0 };
            lo = lo.min(diag[i] - el - er);
            hi = hi.max(diag[i] + el + er);
        }
        let m = 20_000;
        let step = (hi - lo + 2.0) / m as f64;
        let mut roots = Vec::new();
        let mut x_prev = lo - 1.0;
        let mut f_prev = eval(x_prev);
        for j in 1..=m {
            let x = lo - 1.0 + j as f64 * step;
            let fx = eval(x);
            if f_prev == 0.0 {
                roots.push(x_prev);
            } else if f_prev.signum() != fx.signum() {
                let (mut a, mut b, mut fa) = (x_prev, x, f_prev);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let fm = eval(mid);
                    if fm == 0.0 || fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x_prev = x;
            f_prev = fx;
        }
        roots
    }

    #[test]
    fn tridiag_matches_charpoly_oracle_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..8 {
            let diag: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let off: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = tridiag_eigs(&diag, &off, 6).unwrap();
            let want = charpoly_eigs(&diag, &off);
            assert_eq!(want.len(), 6, "oracle lost a root: {want:?}");
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-8, "got {g}, oracle {w}");
            }
        }
    }

    #[test]
    fn log_sum_exp_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() <= 1e-12);
        let small = log_sum_exp(&[0.1, 0.2, 0.3]);
        let direct = (0.1f64.exp() + 0.2f64.exp() + 0.3f64.exp()).ln();
        assert!((small - direct).abs() <= 1e-14);
    }

    proptest! {
        #[test]
        fn integrate_is_additive(
            c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64,
            a in -3.0..0.0f64, len1 in 0.1..2.0f64, len2 in 0.1..2.0f64,
        ) {
            let f = |x: f64| c0 + c1 * x + c2 * (x * 0.7).sin();
            let b = a + len1;
            let c = b + len2;
            let whole = integrate(f, a, c, &QUAD).unwrap();
            let split = integrate(f, a, b, &QUAD).unwrap() + integrate(f, b, c, &QUAD).unwrap();
            prop_assert!((whole - split).abs() <= 1e-9 * (1.0 + whole.abs()));
        }

        #[test]
        fn find_root_stays_in_bracket(shift in 0.1..50.0f64) {
            let f = move |x: f64| x * x - shift;
            let hi = shift.max(2.0) + 1.0;
            let r = find_root(f, (0.0, hi), &RootConfig::default()).unwrap();
            prop_assert!((0.0..=hi).contains(&r));
            prop_assert!((r - shift.sqrt()).abs() <= 1e-8 * shift.sqrt().max(1.0));
        }

        #[test]
        fn tridiag_output_sorted(seed in 0u64..100) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let diag: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let off: Vec<f64> = (0..7).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let eigs = tridiag_eigs(&diag, &off, 8).unwrap();
            prop_assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
