//! Positive zeros of `J_ν` and `J_ν'`.
//!
//! Roots are located by sign counting on a grid of step 1/2 starting at `ν`
//! (neither `J_ν` nor `J_ν'` vanishes on `(0, ν]` for `ν > 0`), refined by
//! bisection to a width of `1e-13 · value` and finished with one Newton step.
//! Consecutive zeros of either function are more than 2 apart for the orders
//! used here, so the grid cannot step over a pair of roots.

use super::bessel::bessel_j_eval_wide as bessel_j_eval;
use super::Order;
use crate::error::{Error, Result};

const SCAN_STEP: f64 = 0.5;
const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZeroKind {
    OfJ,
    OfJPrime,
}

/// The `k`-th positive root of `J_ν` (or `J_ν'`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroRecord {
    pub order: Order,
    pub k: usize,
    pub value: f64,
    pub kind: ZeroKind,
}

/// `j_ν`, the first positive zero of `J_ν`.
pub fn first_zero(order: Order) -> Result<ZeroRecord> {
    kth_zero(order, 1)
}

/// `j'_ν`, the first positive zero of `J_ν'`.
pub fn first_deriv_zero(order: Order) -> Result<ZeroRecord> {
    Ok(scan(order, ZeroKind::OfJPrime, 1)?.remove(0))
}

pub fn kth_zero(order: Order, k: usize) -> Result<ZeroRecord> {
    if k == 0 {
        return Err(Error::Domain("zero index k must be >= 1".into()));
    }
    Ok(scan(order, ZeroKind::OfJ, k)?.pop().expect("scan returns k records"))
}

/// The first `count` positive zeros of `J_ν`, in increasing order.
pub fn zeros(order: Order, count: usize) -> Result<Vec<ZeroRecord>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    scan(order, ZeroKind::OfJ, count)
}

fn target(order: Order, kind: ZeroKind, x: f64) -> Result<f64> {
    let ev = bessel_j_eval(order, x)?;
    Ok(match kind {
        ZeroKind::OfJ => ev.j,
        ZeroKind::OfJPrime => ev.jp,
    })
}

fn scan(order: Order, kind: ZeroKind, count: usize) -> Result<Vec<ZeroRecord>> {
    let nu = order.nu();
    // J_0' = -J_1 vanishes at the origin; start just to the right of it.
    let start = if nu > 0.0 { nu } else { 1e-3 };
    let mut out = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = target(order, kind, a)?;
    let limit = (15.0 * (nu + 2.0)).max(1e4);
    while out.len() < count {
        let b = a + SCAN_STEP;
        if b > limit {
            return Err(Error::NoConvergence {
                what: "Bessel zero scan",
                detail: format!(
                    "found {} of {count} zeros of order {order} below the evaluation limit {limit}",
                    out.len()
                ),
            });
        }
        let fb = target(order, kind, b)?;
        if fb == 0.0 {
            out.push(record(order, kind, out.len() + 1, b));
            // step past the exact root so it is not counted twice
            a = b + 1e-9 * b;
            fa = target(order, kind, a)?;
            continue;
        }
        if fa.signum() != fb.signum() {
            let value = refine(order, kind, a, b, fa)?;
            out.push(record(order, kind, out.len() + 1, value));
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

fn record(order: Order, kind: ZeroKind, k: usize, value: f64) -> ZeroRecord {
    ZeroRecord {
        order,
        k,
        value,
        kind,
    }
}

fn refine(order: Order, kind: ZeroKind, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    let mut iters = 0;
    while b - a > 1e-13 * b {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = target(order, kind, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        iters += 1;
        if iters > MAX_BISECTIONS {
            return Err(Error::NoConvergence {
                what: "Bessel zero bisection",
                detail: format!("order {order}, bracket [{a}, {b}]"),
            });
        }
    }
    let x0 = 0.5 * (a + b);
    let ev = bessel_j_eval(order, x0)?;
    let step = match kind {
        ZeroKind::OfJ => ev.j / ev.jp,
        ZeroKind::OfJPrime => {
            // J'' from Bessel's equation
            let nu = order.nu();
            let jpp = -ev.jp / x0 - (1.0 - nu * nu / (x0 * x0)) * ev.j;
            ev.jp / jpp
        }
    };
    let polished = x0 - step;
    // keep the polish only if it stays inside the certified bracket
    let lo = a - (b - a);
    let hi = b + (b - a);
    if polished.is_finite() && polished >= lo && polished <= hi {
        Ok(polished)
    } else {
        Ok(x0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_order_zeros_are_multiples_of_pi() {
        let z = zeros(Order::from_twice(1), 3).unwrap();
        for (i, r) in z.iter().enumerate() {
            assert!((r.value - PI * (i + 1) as f64).abs() < 1e-12, "{r:?}");
            assert_eq!(r.k, i + 1);
        }
    }

    #[test]
    fn j0_second_zero() {
        let z = kth_zero(Order::integer(0), 2).unwrap();
        assert!((z.value - 5.520078110286311).abs() < 1e-10);
    }

    #[test]
    fn high_radial_zeros_of_low_orders() {
        // beyond the guarded range 15 (ν + 2) of the public evaluator
        let z = kth_zero(Order::integer(0), 24).unwrap();
        assert!(z.value > 30.0);
        assert!(crate::specfun::bessel_j_eval(Order::integer(0), z.value).is_err());
        // McMahon: j_{0,k} ≈ β + 1/(8β) - 31/(384β³), β = (k - 1/4)π
        let beta = (24.0 - 0.25) * PI;
        let mcmahon = beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta.powi(3));
        assert!((z.value - mcmahon).abs() < 1e-9, "{} vs {mcmahon}", z.value);
    }

    #[test]
    fn zero_index_must_be_positive() {
        assert!(kth_zero(Order::integer(2), 0).is_err());
    }

    #[test]
    fn derivative_zero_of_half_order() {
        // J_{1/2}'(x) = 0  <=>  tan x = 2x; dense sign scan of that equation on (0, π/2)
        let g = |x: f64| x.sin() - 2.0 * x * x.cos();
        let (mut a, mut b) = (0.5, 1.5);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a).signum() == g(m).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        let z = first_deriv_zero(Order::from_twice(1)).unwrap();
        assert!((z.value - a).abs() < 1e-12, "{} vs {a}", z.value);
        assert_eq!(z.kind, ZeroKind::OfJPrime);
    }

    #[test]
    fn derivative_zero_precedes_zero() {
        for t in [1u32, 2, 10, 41, 100, 200] {
            let o = Order::from_twice(t);
            assert!(first_deriv_zero(o).unwrap().value < first_zero(o).unwrap().value);
        }
    }

    #[test]
    fn zero_residual_contract() {
        for t in [0u32, 3, 20, 77, 200] {
            let o = Order::from_twice(t);
            for r in zeros(o, 4).unwrap() {
                let ev = bessel_j_eval(o, r.value).unwrap();
                assert!(ev.j.abs() <= 1e-12 * ev.jp.abs() * r.value, "{r:?} {}", ev.j);
            }
        }
    }
}
