//! Bessel functions of the first kind for integer and half-integer orders,
//! their zeros, `ln Γ`, and closed forms built on them.
//!
//! Orders are stored as `2ν` so that the two supported families are exact.
//! On the unit ball in dimension `d` the angular degree `n` maps to
//! `ν = n + d/2 - 1`; for the dimensions used here (2 and 3) an integer
//! order therefore means `d = 2` and a half-integer order `d = 3`.

mod bessel;
mod gamma;
mod zeros;

use std::fmt;

use crate::error::{Error, Result};

pub(crate) use bessel::bessel_j_eval_wide;
pub use bessel::{bessel_j, bessel_j_eval, bessel_j_prime, BesselEval, Scaled};
pub use gamma::log_gamma;
pub use zeros::{first_deriv_zero, first_zero, kth_zero, zeros, ZeroKind, ZeroRecord};

/// Order `ν` of a Bessel function, restricted to `ν ∈ {0, 1/2, 1, 3/2, ...}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order {
    twice_nu: u32,
}

impl Order {
    pub const fn integer(n: u32) -> Self {
        Order { twice_nu: 2 * n }
    }

    pub const fn from_twice(twice_nu: u32) -> Self {
        Order { twice_nu }
    }

    /// `ν = n + d/2 - 1` for angular degree `n` on the ball in `R^d`.
    pub fn from_dim(d: u32, n: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
        }
        Ok(Order { twice_nu: 2 * n + d - 2 })
    }

    /// Parses a real order; only integers and half-integers are accepted.
    pub fn from_f64(nu: f64) -> Result<Self> {
        let twice = 2.0 * nu;
        if !(nu >= 0.0) || twice != twice.round() || twice > u32::MAX as f64 {
            return Err(Error::Domain(format!(
                "order must be a non-negative integer or half-integer, got {nu}"
            )));
        }
        Ok(Order { twice_nu: twice as u32 })
    }

    pub fn twice_nu(self) -> u32 {
        self.twice_nu
    }

    pub fn nu(self) -> f64 {
        self.twice_nu as f64 * 0.5
    }

    pub fn is_integer(self) -> bool {
        self.twice_nu.is_multiple_of(2)
    }

    /// The ball shift `D = d/2 - 1` associated with this order family:
    /// 0 for integer orders (disk) and 1/2 for half-integer orders (ball in R^3).
    pub fn ball_shift(self) -> f64 {
        if self.is_integer() {
            0.0
        } else {
            0.5
        }
    }

    pub fn next(self) -> Self {
        Order { twice_nu: self.twice_nu + 2 }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_nu / 2)
        } else {
            write!(f, "{}/2", self.twice_nu)
        }
    }
}

/// Closed form of the Dirichlet energy `∫_{B_s} |∇w|²` for
/// `w = r^{-D} J_ν(j r) Y(θ)` with `‖Y‖_{L²(S^{d-1})} = 1`:
///
/// ```text
/// ((z² - ν²)/2) J_ν(z)² + (z²/2) J_ν'(z)² + (z J_ν'(z) - D J_ν(z)) J_ν(z),   z = j s
/// ```
///
/// The first two terms are Lommel's integral `∫_0^z t J_ν(t)² dt`; the last is
/// the boundary flux from integrating by parts.
pub fn lommel_energy(order: Order, scale: f64, s: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("radius must lie in [0, 1], got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let z = scale * s;
    let ev = bessel_j_eval(order, z)?;
    let lommel = lommel_integral_from(order, z, ev.j, ev.jp);
    let flux = (z * ev.jp - order.ball_shift() * ev.j) * ev.j;
    Ok(lommel + flux)
}

/// `∫_0^z t J_ν(t)² dt` from the values of `J_ν` and `J_ν'` at `z`.
pub(crate) fn lommel_integral_from(order: Order, z: f64, j: f64, jp: f64) -> f64 {
    let nu = order.nu();
    // (z² - ν²) J² + z² J'² with the difference formed before squaring terms
    // are combined, which keeps the evanescent-region cancellation benign.
    0.5 * ((z - nu) * (z + nu) * j * j + z * z * jp * jp)
}

/// `ln` of the envelope `(x/2)^ν / Γ(ν+1)` that bounds `|J_ν(x)|` for real `x`.
pub fn envelope_log_bound(order: Order, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("envelope requires x > 0, got {x}")));
    }
    let nu = order.nu();
    Ok(nu * (0.5 * x).ln() - log_gamma(nu + 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_from_dimension() {
        assert_eq!(Order::from_dim(2, 7).unwrap().nu(), 7.0);
        assert_eq!(Order::from_dim(3, 7).unwrap().nu(), 7.5);
        assert!(Order::from_dim(1, 0).is_err());
        assert_eq!(Order::from_f64(2.5).unwrap().twice_nu(), 5);
        assert!(Order::from_f64(0.3).is_err());
        assert!(Order::from_f64(-1.0).is_err());
        assert_eq!(Order::from_f64(1.5).unwrap().to_string(), "3/2");
    }

    #[test]
    fn lommel_vanishes_on_empty_ball() {
        for t in [0, 1, 7, 40] {
            assert_eq!(lommel_energy(Order::from_twice(t), 10.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn lommel_at_the_boundary_reduces_to_derivative_square() {
        let order = Order::integer(100);
        let j = first_zero(order).unwrap().value;
        let jp = bessel_j_prime(order, j).unwrap();
        let want = 0.5 * j * j * jp * jp;
        let got = lommel_energy(order, j, 1.0).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(envelope_log_bound(Order::integer(0), 2.0).unwrap(), 0.0);
        let want = 100.0 * 0.5f64.ln() - log_gamma(101.0).unwrap();
        assert_eq!(envelope_log_bound(Order::integer(100), 1.0).unwrap(), want);
        let j10 = bessel_j(Order::integer(10), 5.0).unwrap();
        assert!(j10.abs().ln() <= envelope_log_bound(Order::integer(10), 5.0).unwrap());
    }
}
