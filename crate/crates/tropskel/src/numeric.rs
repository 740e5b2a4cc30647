//! Floating-point utilities shared by the analytic modules: Gauss-Legendre
//! rules, safeguarded root finding, damped Newton for small systems, an
//! adaptive RK4 flow integrator, quintic ramps, log-space exponential sums
//! and finite-difference derivatives.
//!
//! Everything here is deterministic: fixed rules, fixed iteration orders,
//! and explicit seeds for the sample generators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumError {
    #[error("quadrature failed to reach the requested tolerance")]
    QuadratureNotConverged,
    #[error("no sign change in the search interval")]
    NoBracket,
    #[error("newton iteration failed to converge")]
    NewtonDiverged,
    #[error("step limit exceeded during flow integration")]
    StepLimitExceeded,
}

pub fn dotf(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn normf(x: &[f64]) -> f64 {
    dotf(x, x).sqrt()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the three-term recurrence. Exact for polynomials
/// of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // p = P_n(x), dp = P_n'(x) via the recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let dp = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dp = if n == 1 {
            1.0
        } else {
            n as f64 * (x * p1 - p0) / (x * x - 1.0)
        };
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

pub fn gl12() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// `int_a^b f` with a fixed rule.
pub fn integrate_gl(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (nodes, weights) = rule;
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive panel integration: a panel is accepted when its 12- and 24-point
/// values agree to the panel's share of `tol`, otherwise it is split.
pub fn integrate_adaptive(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, NumError> {
    fn rec(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, NumError> {
        let coarse = integrate_gl(f, a, b, gl12());
        let fine = integrate_gl(f, a, b, gl24());
        if (coarse - fine).abs() <= tol.max(1e-15 * fine.abs()) {
            return Ok(fine);
        }
        if depth == 0 {
            return Err(NumError::QuadratureNotConverged);
        }
        let mid = 0.5 * (a + b);
        Ok(rec(f, a, mid, 0.5 * tol, depth - 1)? + rec(f, mid, b, 0.5 * tol, depth - 1)?)
    }
    rec(f, a, b, tol, 48)
}

/// Root of `f` in `[lo, hi]` by bisection; the endpoint values must bracket.
pub fn bisect(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64, NumError> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumError::NoBracket);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Safeguarded Newton: `f` returns `(value, derivative)`; steps that leave
/// the current bracket fall back to bisection, so convergence is global on
/// a sign-changing interval.
pub fn newton_bisect(
    f: &mut dyn FnMut(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumError> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo).0, f(hi).0);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumError::NoBracket);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        if v == 0.0 || hi - lo <= tol {
            return Ok(x);
        }
        if v.signum() == flo.signum() {
            lo = x;
            flo = v;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        x = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    if hi - lo <= tol {
        Ok(x)
    } else {
        Err(NumError::NewtonDiverged)
    }
}

/// Expands `[lo, hi]` geometrically around `x0 > 0` until `f` changes sign,
/// for root finds along rays. Returns the bracket.
pub fn expand_bracket(
    f: &mut dyn FnMut(f64) -> f64,
    x0: f64,
    max_expand: usize,
) -> Result<(f64, f64), NumError> {
    let f0 = f(x0);
    if f0 == 0.0 {
        return Ok((x0, x0));
    }
    let (mut lo, mut hi) = (x0, x0);
    for _ in 0..max_expand {
        if f0 > 0.0 {
            hi *= 2.0;
            if f(hi) <= 0.0 {
                return Ok((lo, hi));
            }
            lo = hi;
        } else {
            lo *= 0.5;
            if f(lo) >= 0.0 {
                return Ok((lo, hi));
            }
            hi = lo;
        }
    }
    Err(NumError::NoBracket)
}

/// Damped Newton for a square system, finite-difference Jacobian, halving
/// line search on the residual norm.
pub fn damped_newton_system(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, NumError> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    assert_eq!(fx.len(), n, "system must be square");
    let res = |v: &[f64]| v.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    for _ in 0..max_iter {
        if res(&fx) <= tol {
            return Ok(x);
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let (fp, fm) = (f(&xp), f(&xm));
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_column_slice(&fx);
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(NumError::NewtonDiverged)?;
        let mut lambda = 1.0;
        let base = res(&fx);
        loop {
            let cand: Vec<f64> = (0..n).map(|i| x[i] - lambda * step[i]).collect();
            let fc = f(&cand);
            if res(&fc) < base || lambda < 1e-10 {
                x = cand;
                fx = fc;
                break;
            }
            lambda *= 0.5;
        }
        if lambda < 1e-10 {
            return Err(NumError::NewtonDiverged);
        }
    }
    if res(&fx) <= tol {
        Ok(x)
    } else {
        Err(NumError::NewtonDiverged)
    }
}

/// Flow of `x' = field(x)` for time `t` (either sign). Classical RK4 with
/// step doubling: the local error estimate `|full - two halves| / 15` must
/// stay within the step's share of `tol`, and the step size is capped at
/// `1e-2 * (1 + |x|)`.
pub fn rk4_flow(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    t: f64,
    tol: f64,
    max_steps: usize,
) -> Result<Vec<f64>, NumError> {
    fn step(field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<f64> {
        let n = x.len();
        let k1 = field(x);
        let mid1: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k1[i]).collect();
        let k2 = field(&mid1);
        let mid2: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * h * k2[i]).collect();
        let k3 = field(&mid2);
        let end: Vec<f64> = (0..n).map(|i| x[i] + h * k3[i]).collect();
        let k4 = field(&end);
        (0..n)
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    let total = t.abs();
    let dir = t.signum();
    let mut x = x0.to_vec();
    let mut done = 0.0;
    let mut h = (1e-2 * (1.0 + normf(&x))).min(total);
    let mut steps = 0;
    while done < total {
        if steps >= max_steps {
            return Err(NumError::StepLimitExceeded);
        }
        steps += 1;
        h = h.min(total - done).min(1e-2 * (1.0 + normf(&x)));
        let full = step(field, &x, dir * h);
        let half = step(field, &x, dir * 0.5 * h);
        let two = step(field, &half, dir * 0.5 * h);
        let err: f64 = full
            .iter()
            .zip(&two)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / 15.0;
        let budget = tol * (h / total).max(1e-3);
        if err <= budget {
            // fifth-order correction from the Richardson pair
            x = (0..x.len()).map(|i| two[i] + (two[i] - full[i]) / 15.0).collect();
            done += h;
            if err < 0.1 * budget {
                h *= 1.5;
            }
        } else {
            h *= 0.5;
            if h < 1e-12 {
                return Err(NumError::StepLimitExceeded);
            }
        }
    }
    Ok(x)
}

/// `6y^5 - 15y^4 + 10y^3` clamped to `[0, 1]`: monotone, flat to second
/// order at both ends.
pub fn smoothstep5(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        y * y * y * (10.0 + y * (-15.0 + 6.0 * y))
    }
}

/// `R(y) = 3y^5 - 8y^4 + 6y^3` on `[0, 1]`: `R(0) = 0`, `R(1) = 1`,
/// `R'(1) = 1`, `R''(0) = R''(1) = 0`, `R' >= 0`.
pub fn ramp_quintic(y: f64) -> f64 {
    y * y * y * (6.0 + y * (-8.0 + 3.0 * y))
}

fn ramp_quintic_d1(y: f64) -> f64 {
    y * y * (18.0 + y * (-32.0 + 15.0 * y))
}

/// C^2 ramp vanishing for `x <= eps` and equal to `x - eps` for `x >= 2 eps`.
pub fn smooth_ramp(eps: f64, x: f64) -> f64 {
    assert!(eps > 0.0);
    if x <= eps {
        0.0
    } else if x >= 2.0 * eps {
        x - eps
    } else {
        eps * ramp_quintic((x - eps) / eps)
    }
}

pub fn smooth_ramp_d1(eps: f64, x: f64) -> f64 {
    if x <= eps {
        0.0
    } else if x >= 2.0 * eps {
        1.0
    } else {
        ramp_quintic_d1((x - eps) / eps)
    }
}

/// `log(sum w_i exp(a_i))` for nonnegative weights, stable for exponents far
/// outside the representable range. Entries with zero weight are skipped;
/// an effectively empty sum gives `-inf`.
pub fn log_exp_sum(a: &[f64], w: &[f64]) -> f64 {
    assert_eq!(a.len(), w.len());
    let m = a
        .iter()
        .zip(w)
        .filter(|(_, w)| **w > 0.0)
        .map(|(a, _)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = a
        .iter()
        .zip(w)
        .filter(|(_, w)| **w > 0.0)
        .map(|(a, w)| w * (a - m).exp())
        .sum();
    m + s.ln()
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Central-difference gradient with absolute step `h`.
pub fn grad_fd(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    for i in 0..n {
        let mut xp = x.to_vec();
        xp[i] += h;
        let mut xm = x.to_vec();
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian with absolute step `h`, symmetrised.
pub fn hess_fd(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut xp = x.to_vec();
        xp[i] += h;
        let mut xm = x.to_vec();
        xm[i] -= h;
        hess[i][i] = (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
        for j in (i + 1)..n {
            let mut pp = x.to_vec();
            pp[i] += h;
            pp[j] += h;
            let mut pm = x.to_vec();
            pm[i] += h;
            pm[j] -= h;
            let mut mp = x.to_vec();
            mp[i] -= h;
            mp[j] += h;
            let mut mm = x.to_vec();
            mm[i] -= h;
            mm[j] -= h;
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// `count` unit vectors in dimension `n`. For `n = 3` a Fibonacci lattice
/// (seed-independent, well spread); otherwise seeded Gaussian directions.
pub fn sphere_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    if n == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        return (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * i as f64;
                vec![r * th.cos(), r * th.sin(), z]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let norm = normf(&v);
        if norm > 1e-6 {
            out.push(v.iter().map(|t| t / norm).collect());
        }
    }
    out
}

/// One standard Gaussian draw by Box-Muller.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i]));
    mat.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Whether a symmetric matrix is positive definite (Cholesky succeeds).
pub fn is_positive_definite(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i]));
    mat.cholesky().is_some()
}

/// Minimum-norm least-squares solution of `A x = b` (rows of `a` are the
/// equations), via SVD with cutoff `1e-12`.
pub fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mat = DMatrix::from_fn(rows, cols, |i, j| a[i][j]);
    let rhs = DVector::from_column_slice(b);
    let svd = mat.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).expect("svd solve");
    sol.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_is_exact_to_design_degree() {
        let (nodes, weights) = gauss_legendre(12);
        assert_eq!(nodes.len(), 12);
        let wsum: f64 = weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // exact moments: int_{-1}^{1} t^k = 0 (odd) or 2/(k+1) (even), k <= 23
        for k in 0..=23usize {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "moment {k}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_quadrature_handles_flat_and_kinked_integrands() {
        // int_0^1 exp(-1/s) ds, flat to all orders at 0
        let v = integrate_adaptive(&mut |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() }, 0.0, 1.0, 1e-12)
            .unwrap();
        let reference = 0.148_495_506_775_922_14;
        assert!((v - reference).abs() < 1e-10, "{v}");
        // kink at 1/3
        let v = integrate_adaptive(&mut |t: f64| (t - 1.0 / 3.0).abs(), 0.0, 1.0, 1e-12).unwrap();
        let want = (1.0 / 3.0f64).powi(2) / 2.0 + (2.0 / 3.0f64).powi(2) / 2.0;
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn bisect_and_newton_find_roots_and_report_missing_brackets() {
        let root = bisect(&mut |x: f64| x.cos() - x, 0.0, 1.0, 1e-12).unwrap();
        assert!((root.cos() - root).abs() < 1e-11);
        let root = newton_bisect(&mut |x: f64| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-13).unwrap();
        assert!((root - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            bisect(&mut |x: f64| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(NumError::NoBracket)
        );
    }

    #[test]
    fn expand_bracket_walks_to_a_sign_change() {
        // decreasing in the search direction: f(x) = 10 - x around x0 = 1
        let (lo, hi) = expand_bracket(&mut |x: f64| 10.0 - x, 1.0, 60).unwrap();
        assert!(lo <= 10.0 && 10.0 <= hi);
    }

    #[test]
    fn damped_newton_solves_a_small_nonlinear_system() {
        let f = |x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] * x[1] - 1.0];
        let sol = damped_newton_system(&f, &[2.0, 0.3], 1e-12, 100).unwrap();
        assert!((sol[0] * sol[0] + sol[1] * sol[1] - 4.0).abs() < 1e-11);
        assert!((sol[0] * sol[1] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rk4_flow_matches_the_exponential() {
        let field = |x: &[f64]| x.to_vec();
        let out = rk4_flow(&field, &[1.0, 2.0], 1.0, 1e-10, 100_000).unwrap();
        assert!((out[0] - 1.0f64.exp()).abs() < 1e-8);
        assert!((out[1] - 2.0 * 1.0f64.exp()).abs() < 1e-8);
        let back = rk4_flow(&field, &out, -1.0, 1e-10, 100_000).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-8);
        assert_eq!(
            rk4_flow(&field, &[1.0], 1.0, 1e-10, 3),
            Err(NumError::StepLimitExceeded)
        );
    }

    #[test]
    fn ramp_has_the_advertised_contact_and_monotonicity() {
        assert_eq!(ramp_quintic(0.0), 0.0);
        assert!((ramp_quintic(1.0) - 1.0).abs() < 1e-15);
        let h = 1e-6;
        let d1 = (ramp_quintic(1.0) - ramp_quintic(1.0 - h)) / h;
        assert!((d1 - 1.0).abs() < 1e-4);
        let d2_at_0 = (ramp_quintic(2.0 * h) - 2.0 * ramp_quintic(h)) / (h * h);
        assert!(d2_at_0.abs() < 1e-3);
        for i in 0..1000 {
            let y = i as f64 / 999.0;
            assert!(ramp_quintic_d1(y) >= -1e-15);
        }
        let eps = 0.25;
        assert_eq!(smooth_ramp(eps, 0.2), 0.0);
        assert_eq!(smooth_ramp(eps, 0.9), 0.9 - eps);
        // C^1 across the joins
        for x in [eps, 2.0 * eps] {
            let left = (smooth_ramp(eps, x) - smooth_ramp(eps, x - h)) / h;
            let right = (smooth_ramp(eps, x + h) - smooth_ramp(eps, x)) / h;
            assert!((left - right).abs() < 1e-4);
        }
    }

    #[test]
    fn log_exp_sum_is_stable_and_matches_naive_values() {
        let naive = (0.5f64 * 1.0f64.exp() + 2.0 * 2.0f64.exp()).ln();
        let got = log_exp_sum(&[1.0, 2.0], &[0.5, 2.0]);
        assert!((got - naive).abs() < 1e-14);
        // exponents far beyond f64 range
        let got = log_exp_sum(&[800.0, 801.0], &[1.0, 1.0]);
        assert!((got - (801.0 + 1.0f64.exp().recip().ln_1p())).abs() < 1e-12);
        assert_eq!(log_exp_sum(&[1.0], &[0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn fit_slope_recovers_synthetic_lines() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -0.93 * x + 4.2).collect();
        let (slope, intercept) = fit_slope(&xs, &ys);
        assert!((slope + 0.93).abs() < 1e-12);
        assert!((intercept - 4.2).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_match_a_quadratic() {
        let mut f = |x: &[f64]| x[0] * x[0] + 3.0 * x[0] * x[1] + 2.0 * x[1] * x[1];
        let g = grad_fd(&mut f, &[1.0, -2.0], 1e-5);
        assert!((g[0] - (2.0 - 6.0)).abs() < 1e-8);
        assert!((g[1] - (3.0 - 8.0)).abs() < 1e-8);
        let h = hess_fd(&mut f, &[1.0, -2.0], 1e-5);
        assert!((h[0][0] - 2.0).abs() < 1e-4);
        assert!((h[0][1] - 3.0).abs() < 1e-4);
        assert!((h[1][1] - 4.0).abs() < 1e-4);
    }

    #[test]
    fn sphere_samples_are_unit_and_deterministic() {
        for n in [2usize, 3, 4] {
            let pts = sphere_samples(n, 64, 7);
            assert_eq!(pts.len(), 64);
            for p in &pts {
                assert_eq!(p.len(), n);
                assert!((normf(p) - 1.0).abs() < 1e-12);
            }
            assert_eq!(pts, sphere_samples(n, 64, 7));
        }
    }

    #[test]
    fn eigen_helpers_agree_with_closed_forms() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((min_symmetric_eigenvalue(&m) - 1.0).abs() < 1e-12);
        assert!(is_positive_definite(&m));
        let indef = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(!is_positive_definite(&indef));
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let sol = least_squares(&a, &[1.0, 1.0, 2.0]);
        assert!((sol[0] - 1.0).abs() < 1e-10 && (sol[1] - 1.0).abs() < 1e-10);
    }
}
