//! Evaluation of `J_ν` and `J_ν'` for integer and half-integer `ν`.
//!
//! Two regimes:
//! * the ascending power series, used when its terms decrease from the
//!   start (`x²/4 <= ν + 1`) or the argument is small (`x <= 2`);
//! * Miller's downward recurrence otherwise, normalized by
//!   `J_0 + 2 Σ J_{2k} = 1` for integer orders and by the closed forms of
//!   `J_{±1/2}` for half-integer orders.
//!
//! Intermediate quantities carry an explicit power-of-two exponent so that
//! values far below the `f64` range keep full relative accuracy until the
//! final conversion.

use std::f64::consts::{LN_2, PI};

use super::Order;
use crate::error::{Error, Result};

const WIDE_LIMIT: f64 = 1e4;
const RESCALE_EXP: i32 = 600;
const SMALL_RESCALE_EXP: i32 = 400;
const MAX_OFFSET_DOUBLINGS: usize = 4;
const CONSISTENCY_TOL: f64 = 1e-13;

fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// A value `mant · 2^exp2` with an unbounded exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mant: f64,
    pub exp2: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mant: 0.0, exp2: 0 };

    pub fn from_f64(x: f64) -> Self {
        Scaled { mant: x, exp2: 0 }
    }

    /// Converts to `f64`; magnitudes below `f64::MIN_POSITIVE` become 0.
    pub fn to_f64(self) -> f64 {
        if self.mant == 0.0 {
            return 0.0;
        }
        let mut m = self.mant;
        let mut e = self.exp2;
        while e > 1000 {
            m *= pow2(1000);
            e -= 1000;
            if m.is_infinite() {
                return m;
            }
        }
        while e < -1000 {
            m *= pow2(-1000);
            e += 1000;
            if m.abs() < f64::MIN_POSITIVE {
                return 0.0;
            }
        }
        let v = m * pow2(e as i32);
        if v.abs() < f64::MIN_POSITIVE {
            0.0
        } else {
            v
        }
    }

    /// `ln |value|`, finite whenever the mantissa is non-zero.
    pub fn ln_abs(self) -> f64 {
        self.mant.abs().ln() + self.exp2 as f64 * LN_2
    }

    pub fn is_underflow(self) -> bool {
        self.mant != 0.0 && self.to_f64() == 0.0
    }

    fn scale(self, factor: f64) -> Self {
        Scaled {
            mant: self.mant * factor,
            exp2: self.exp2,
        }
    }

    /// Re-expresses `self` with exponent `exp2` (which must not be smaller).
    fn aligned_mant(self, exp2: i64) -> f64 {
        Scaled {
            mant: self.mant,
            exp2: self.exp2 - exp2,
        }
        .to_f64()
    }

    fn max_exp(values: &[Scaled]) -> i64 {
        values
            .iter()
            .filter(|v| v.mant != 0.0)
            .map(|v| v.exp2 + v.mant.abs().log2().ceil() as i64)
            .max()
            .unwrap_or(0)
    }
}

/// Value and derivative of `J_ν` at a point, with the neighbouring order.
#[derive(Clone, Copy, Debug)]
pub struct BesselEval {
    pub j: f64,
    pub jp: f64,
    /// `J_{ν+1}(x)`.
    pub j_next: f64,
    pub j_scaled: Scaled,
    pub jp_scaled: Scaled,
    /// Set when `J_ν(x)` is non-zero but below the `f64` range.
    pub underflow: bool,
}

/// `J_ν(x)` for `0 <= x <= 15 (ν + 2)`.
pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    Ok(bessel_j_eval(order, x)?.j)
}

/// `J_ν'(x) = (J_{ν-1}(x) - J_{ν+1}(x)) / 2`.
pub fn bessel_j_prime(order: Order, x: f64) -> Result<f64> {
    Ok(bessel_j_eval(order, x)?.jp)
}

pub fn bessel_j_eval(order: Order, x: f64) -> Result<BesselEval> {
    eval_within(order, x, 15.0 * (order.nu() + 2.0))
}

/// As [`bessel_j_eval`] with the argument bound raised to
/// `max(15 (ν + 2), 10⁴)`, for the higher radial zeros of low orders that the
/// disk basis needs.
pub(crate) fn bessel_j_eval_wide(order: Order, x: f64) -> Result<BesselEval> {
    eval_within(order, x, (15.0 * (order.nu() + 2.0)).max(WIDE_LIMIT))
}

fn eval_within(order: Order, x: f64, limit: f64) -> Result<BesselEval> {
    let nu = order.nu();
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be >= 0, got {x}")));
    }
    if x > limit {
        return Err(Error::ArgumentTooLarge { nu, x, limit });
    }
    if x == 0.0 {
        return Ok(at_origin(order));
    }

    let [prev, cur, next] = if x <= 2.0 || 0.25 * x * x <= nu + 1.0 {
        series_triplet(order, x)
    } else {
        miller_checked(order, x)?
    };

    let e = Scaled::max_exp(&[prev, next]);
    let jp_scaled = Scaled {
        mant: 0.5 * (prev.aligned_mant(e) - next.aligned_mant(e)),
        exp2: e,
    };
    Ok(BesselEval {
        j: cur.to_f64(),
        jp: jp_scaled.to_f64(),
        j_next: next.to_f64(),
        j_scaled: cur,
        jp_scaled,
        underflow: cur.is_underflow(),
    })
}

fn at_origin(order: Order) -> BesselEval {
    let (j, jp, j_next) = match order.twice_nu() {
        0 => (1.0, 0.0, 0.0),
        1 => (0.0, f64::INFINITY, 0.0),
        2 => (0.0, 0.5, 0.0),
        _ => (0.0, 0.0, 0.0),
    };
    BesselEval {
        j,
        jp,
        j_next,
        j_scaled: Scaled::from_f64(j),
        jp_scaled: Scaled::from_f64(jp),
        underflow: false,
    }
}

/// `(x/2)^μ / Γ(μ+1)` for `μ = twice_mu / 2 >= -1/2`, built as an exact
/// product so that large orders keep full relative accuracy.
fn series_prefactor(twice_mu: i64, x: f64) -> Scaled {
    let half_x = 0.5 * x;
    let mut acc = Scaled::from_f64(1.0);
    let mut mu2: i64;
    if twice_mu % 2 == 0 {
        mu2 = 0;
    } else {
        // μ = -1/2: (x/2)^{-1/2} / Γ(1/2)
        acc.mant = 1.0 / (PI * half_x).sqrt();
        mu2 = -1;
    }
    while mu2 < twice_mu {
        mu2 += 2;
        acc.mant *= half_x / (0.5 * mu2 as f64);
        renormalize(&mut acc);
    }
    acc
}

fn renormalize(v: &mut Scaled) {
    let a = v.mant.abs();
    if a != 0.0 && a < pow2(-SMALL_RESCALE_EXP) {
        v.mant *= pow2(SMALL_RESCALE_EXP);
        v.exp2 -= SMALL_RESCALE_EXP as i64;
    } else if a > pow2(SMALL_RESCALE_EXP) {
        v.mant *= pow2(-SMALL_RESCALE_EXP);
        v.exp2 += SMALL_RESCALE_EXP as i64;
    }
}

fn series_single(twice_mu: i64, x: f64) -> Scaled {
    let mu = 0.5 * twice_mu as f64;
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (mu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 500.0 {
            break;
        }
    }
    series_prefactor(twice_mu, x).scale(sum)
}

fn series_triplet(order: Order, x: f64) -> [Scaled; 3] {
    let t = order.twice_nu() as i64;
    let cur = series_single(t, x);
    let next = series_single(t + 2, x);
    let prev = if t == 0 {
        next.scale(-1.0)
    } else {
        series_single(t - 2, x)
    };
    [prev, cur, next]
}

fn miller_checked(order: Order, x: f64) -> Result<[Scaled; 3]> {
    let mut offset = (12.0 * x.sqrt()).ceil().max(40.0) as usize;
    let mut last = miller(order, x, offset);
    for _ in 0..MAX_OFFSET_DOUBLINGS {
        offset *= 2;
        let refined = miller(order, x, offset);
        let e = Scaled::max_exp(&refined);
        let diff = refined[1].aligned_mant(e) - last[1].aligned_mant(e);
        let mag = refined
            .iter()
            .map(|v| v.aligned_mant(e).abs())
            .fold(0.0, f64::max);
        // rounding in the recurrence grows with its length
        let top = order.nu().max(x) + offset as f64;
        let tol = CONSISTENCY_TOL.max(4e-16 * top);
        if diff.abs() <= tol * mag {
            return Ok(refined);
        }
        last = refined;
    }
    Err(Error::NoConvergence {
        what: "Bessel downward recurrence",
        detail: format!("order {order}, x = {x}, start offset {offset}"),
    })
}

/// Downward recurrence from index `max(ν, x) + offset`, returning
/// `[J_{ν-1}, J_ν, J_{ν+1}]` (with `J_{-1} = -J_1`).
fn miller(order: Order, x: f64, offset: usize) -> [Scaled; 3] {
    let half = if order.is_integer() { 0.0 } else { 0.5 };
    let nu_idx = (order.twice_nu() / 2) as i64;
    let top = (order.nu().max(x).ceil() as i64) + offset as i64;
    let bottom: i64 = if order.is_integer() { 0 } else { -1 };

    let mut exp2: i64 = 0;
    let mut above = 0.0f64; // f_{k+1}
    let mut cur = 1.0f64; // f_k
    let mut sum = 0.0f64;
    let mut captured = [Scaled::ZERO; 3];
    let mut lowest_two = (0.0, 0.0); // (f_0, f_{-1}) for half-integer orders

    let mut k = top;
    loop {
        if k == nu_idx + 1 {
            captured[2] = Scaled { mant: cur, exp2 };
        } else if k == nu_idx {
            captured[1] = Scaled { mant: cur, exp2 };
        } else if k == nu_idx - 1 {
            captured[0] = Scaled { mant: cur, exp2 };
        }
        if half == 0.0 && k % 2 == 0 {
            sum += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == bottom {
            break;
        }
        if half != 0.0 && k == 0 {
            lowest_two.0 = cur;
        }
        let mu = k as f64 + half;
        let below = (2.0 * mu / x) * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if cur.abs() > pow2(RESCALE_EXP) {
            let s = pow2(-RESCALE_EXP);
            cur *= s;
            above *= s;
            sum *= s;
            lowest_two.0 *= s;
            exp2 += RESCALE_EXP as i64;
        }
    }

    let (ratio, ratio_exp) = if half == 0.0 {
        (1.0 / sum, -exp2)
    } else {
        lowest_two.1 = cur;
        let (f_half, f_mhalf) = lowest_two;
        let amp = (2.0 / (PI * x)).sqrt();
        let (s, c) = (amp * x.sin(), amp * x.cos());
        let m = f_half.abs().max(f_mhalf.abs());
        let (a, b) = (f_half / m, f_mhalf / m);
        ((s * a + c * b) / ((a * a + b * b) * m), -exp2)
    };

    if order.twice_nu() == 0 {
        captured[0] = captured[2].scale(-1.0);
    }
    captured.map(|v| {
        let mut out = Scaled {
            mant: v.mant * ratio,
            exp2: v.exp2 + ratio_exp,
        };
        renormalize(&mut out);
        out
    })
}
