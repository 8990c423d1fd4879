//! Reference computations that share no code path with the production
//! evaluators: a plain power series for `J_ν`, adaptive Simpson quadrature,
//! and central finite differences. Used by the test suites and by the
//! `oracle` subcommand.

use std::f64::consts::PI;

use crate::specfun::Order;

/// `J_ν(x)` by direct summation of `Σ (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))`,
/// with `Γ` built up from `Γ(1) = 1` or `Γ(1/2) = √π`. Accurate for moderate
/// `x` (cancellation grows like `e^x`); intended for `x <= 10`, `ν <= 20`.
pub fn series_j(order: Order, x: f64) -> f64 {
    let nu = order.nu();
    let mut gamma = if order.is_integer() { 1.0 } else { PI.sqrt() };
    let mut a = if order.is_integer() { 1.0 } else { 0.5 };
    // Γ(ν + 1) by the recurrence Γ(a + 1) = a Γ(a)
    while a < nu + 1.0 - 0.25 {
        gamma *= a;
        a += 1.0;
    }
    let h = 0.5 * x;
    let mut term = h.powf(nu) / gamma;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= -h * h / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() && k > 5 {
            break;
        }
    }
    sum
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`
/// (Richardson-corrected).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson to a relative tolerance, using a coarse first pass to set
/// the absolute scale.
pub fn simpson_relative<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64) -> f64 {
    let coarse = adaptive_simpson(f, a, b, 1e-6 * composite_abs(f, a, b));
    adaptive_simpson(f, a, b, rel * coarse.abs().max(f64::MIN_POSITIVE))
}

fn composite_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let n = 256;
    let h = (b - a) / n as f64;
    let s: f64 = (0..=n).map(|i| f(a + h * i as f64).abs()).sum();
    (s * h).max(f64::MIN_POSITIVE)
}

/// Central difference `(g(x + h) - g(x - h)) / 2h`.
pub fn central_difference<F: FnMut(f64) -> f64>(mut g: F, x: f64, h: f64) -> f64 {
    (g(x + h) - g(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_half_order_closed_form() {
        for x in [0.3, 1.0, 4.5, 9.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((series_j(Order::from_twice(1), x) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn simpson_polynomial_and_exponential() {
        let v = simpson_relative(&|x: f64| x.exp(), 0.0, 2.0, 1e-12);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| x * x * x, -1.0, 3.0, 1e-14);
        assert!((v - 20.0).abs() < 1e-12);
    }

    #[test]
    fn central_difference_of_sine() {
        let d = central_difference(f64::sin, 0.4, 1e-5);
        assert!((d - 0.4f64.cos()).abs() < 1e-9);
    }
}
