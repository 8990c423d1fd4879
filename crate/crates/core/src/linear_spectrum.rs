//! Dirichlet eigenmodes of the unit ball in `R^d` (`d = 2, 3`): masses and
//! Dirichlet energies on concentric sub-balls, angular `L^p` norms of zonal
//! harmonics, and the boundary-concentration checks built on them.
//!
//! A mode of angular degree `n` is `w(r, θ) = r^{-D} J_ν(j_ν r) Y(θ)` with
//! `D = d/2 - 1`, `ν = n + D`, `j_ν` the first zero of `J_ν` and
//! `‖Y‖_{L²(S^{d-1})} = 1`. Its eigenvalue is `Λ_n = j_ν²`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};
use crate::specfun::{
    bessel_j, bessel_j_eval, first_deriv_zero, first_zero, lommel_energy, lommel_integral_from,
    Order,
};

const CIRCLE_NODES: usize = 4096;
const SPHERE_NODES: usize = 2048;
const RADIAL_REL_TOL: f64 = 1e-10;
const RADIAL_ABS_TOL: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallMode {
    pub d: u32,
    pub n: u32,
    pub order: Order,
    /// `j_ν`.
    pub j: f64,
    /// `Λ_n = j_ν²`.
    pub lam: f64,
    /// Dimension of the eigenspace of spherical harmonics of degree `n`.
    pub mult: u64,
}

fn binom(top: i64, k: i64) -> u64 {
    if top < 0 || k < 0 || k > top {
        return 0;
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (top - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub fn mode(d: u32, n: u32) -> Result<BallMode> {
    if !(2..=3).contains(&d) {
        return Err(Error::Domain(format!("dimension must be 2 or 3, got {d}")));
    }
    let order = Order::from_dim(d, n)?;
    let j = first_zero(order)?.value;
    let (ni, di) = (n as i64, d as i64);
    Ok(BallMode {
        d,
        n,
        order,
        j,
        lam: j * j,
        mult: binom(ni + di - 1, di - 1) - binom(ni + di - 3, di - 1),
    })
}

fn check_radius(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("radius must lie in [0, 1], got {s}")));
    }
    Ok(())
}

/// `∫_{B_s} w² = ∫_0^s r J_ν(j_ν r)² dr`, from Lommel's closed form.
pub fn radial_mass(mode: &BallMode, s: f64) -> Result<f64> {
    check_radius(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let z = mode.j * s;
    let ev = bessel_j_eval(mode.order, z)?;
    Ok(lommel_integral_from(mode.order, z, ev.j, ev.jp) / mode.lam)
}

/// `∫_{B_s} |∇w|²` from the Lommel closed form.
pub fn grad_energy(mode: &BallMode, s: f64) -> Result<f64> {
    lommel_energy(mode.order, mode.j, s)
}

/// The zonal representative: `cos(nθ)/√π` (or `1/√(2π)`) on the circle,
/// `√((2n+1)/4π) P_n(cos φ)` on the sphere.
fn legendre_p(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn sphere_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(SPHERE_NODES))
}

/// `∫_{S^{d-1}} |Y|^p` for the normalized zonal harmonic of degree `n`.
pub fn angular_lp_integral(d: u32, n: u32, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("exponent must be >= 1, got {p}")));
    }
    match d {
        2 => {
            let h = 2.0 * PI / CIRCLE_NODES as f64;
            if n == 0 {
                return Ok(2.0 * PI * (2.0 * PI).powf(-0.5 * p));
            }
            let c = PI.powf(-0.5 * p);
            let s: f64 = (0..CIRCLE_NODES)
                .map(|i| (n as f64 * h * i as f64).cos().abs().powf(p))
                .sum();
            Ok(c * s * h)
        }
        3 => {
            let (x, w) = sphere_rule();
            let c = ((2.0 * n as f64 + 1.0) / (4.0 * PI)).sqrt();
            let s: f64 = x
                .iter()
                .zip(w)
                .map(|(xi, wi)| wi * (c * legendre_p(n, *xi)).abs().powf(p))
                .sum();
            Ok(2.0 * PI * s)
        }
        _ => Err(Error::Domain(format!("dimension must be 2 or 3, got {d}"))),
    }
}

/// `‖Y‖_{L^p(S^{d-1})}` for the normalized zonal harmonic of degree `n`.
pub fn angular_lp_norm(d: u32, n: u32, p: f64) -> Result<f64> {
    Ok(angular_lp_integral(d, n, p)?.powf(1.0 / p))
}

/// Radial factor `∫_0^s r^{d-1-pD} |J_ν(j_ν r)|^p dr` by adaptive
/// Gauss–Legendre panels. Underflowing Bessel values contribute 0.
pub fn radial_lp_integral(mode: &BallMode, p: f64, s: f64) -> Result<f64> {
    check_radius(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let shift = mode.order.ball_shift();
    let expo = mode.d as f64 - 1.0 - p * shift;
    let mut failure = None;
    let r = integrate(
        |r| match bessel_j(mode.order, mode.j * r) {
            Ok(v) => r.powf(expo) * v.abs().powf(p),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        s,
        RADIAL_REL_TOL,
        RADIAL_ABS_TOL,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

/// `∫_{B_s} |w|^p`.
pub fn lp_mass(mode: &BallMode, p: f64, s: f64) -> Result<f64> {
    Ok(radial_lp_integral(mode, p, s)? * angular_lp_integral(mode.d, mode.n, p)?)
}

/// `τ_Λ = 1 - 2 Λ^{-1/6}`.
pub fn tau_of(lam: f64) -> f64 {
    1.0 - 2.0 * lam.powf(-1.0 / 6.0)
}

/// `ζ_n = (ν - ν^{2/3}) / j_ν`, the radius where `j_ν r` reaches `ν - ν^{2/3}`.
pub fn zeta_of(mode: &BallMode) -> f64 {
    let nu = mode.order.nu();
    (nu - nu.powf(2.0 / 3.0)) / mode.j
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpEntry {
    pub p: f64,
    /// `∫_{B_τ} |w|^p` for `‖w‖₂ = 1`.
    pub mass_inner: f64,
    /// `2^{-Λ^{1/6} p / 10}`.
    pub bound: f64,
    pub pass: bool,
}

/// Interior smallness of one normalized eigenmode on `B_τ`, `τ = 1 - 2Λ^{-1/6}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WgmReport {
    pub d: u32,
    pub n: u32,
    pub nu: Order,
    pub lam: f64,
    pub tau: f64,
    pub zeta: f64,
    /// `∫_{B_τ} |∇w|²` for `‖w‖₂ = 1`.
    pub grad_energy_inner: f64,
    /// `2^{-Λ^{1/6}/5}`.
    pub grad_bound: f64,
    pub grad_pass: bool,
    pub lp_entries: Vec<LpEntry>,
}

impl WgmReport {
    pub fn pass(&self) -> bool {
        self.grad_pass && self.lp_entries.iter().all(|e| e.pass)
    }

    /// `log2(bound / value)` for the energy; positive when the check passes.
    pub fn grad_margin_log2(&self) -> f64 {
        margin_log2(self.grad_energy_inner, self.grad_bound)
    }
}

pub fn margin_log2(value: f64, bound: f64) -> f64 {
    if value <= 0.0 {
        f64::INFINITY
    } else {
        (bound / value).log2()
    }
}

/// Checks, for the mode of degree `n` normalized in `L²(B_1)`,
/// `∫_{B_τ}|∇w|² <= 2^{-Λ^{1/6}/5}` and `∫_{B_τ}|w|^p <= 2^{-Λ^{1/6}p/10}`.
/// When `τ <= 0` the inner ball is empty and both integrals are 0.
pub fn verify_thm13(d: u32, n: u32, p_list: &[f64]) -> Result<WgmReport> {
    let m = mode(d, n)?;
    let tau = tau_of(m.lam);
    let zeta = zeta_of(&m);
    let m1 = radial_mass(&m, 1.0)?;
    let sixth = m.lam.powf(1.0 / 6.0);
    let s = tau.clamp(0.0, 1.0);
    let grad_energy_inner = grad_energy(&m, s)?.max(0.0) / m1;
    let grad_bound = (-sixth / 5.0).exp2();
    let mut lp_entries = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let mass_inner = lp_mass(&m, p, s)? / m1.powf(0.5 * p);
        let bound = (-sixth * p / 10.0).exp2();
        lp_entries.push(LpEntry {
            p,
            mass_inner,
            bound,
            pass: mass_inner <= bound,
        });
    }
    Ok(WgmReport {
        d,
        n,
        nu: m.order,
        lam: m.lam,
        tau,
        zeta,
        grad_energy_inner,
        grad_bound,
        grad_pass: grad_energy_inner <= grad_bound,
        lp_entries,
    })
}

/// Reports for every degree in `n_min..=n_max`, computed in parallel and
/// returned in increasing `n`.
pub fn verify_range(d: u32, n_min: u32, n_max: u32, p_list: &[f64]) -> Result<Vec<WgmReport>> {
    if n_min > n_max {
        return Ok(Vec::new());
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| verify_thm13(d, n, p_list))
        .collect()
}

/// Smallest `n` in the given reports such that every report from `n` on
/// passes, or `None` if the last one fails.
pub fn onset(reports: &[WgmReport]) -> Option<u32> {
    let mut first = None;
    for r in reports.iter().rev() {
        if !r.pass() {
            break;
        }
        first = Some(r.n);
    }
    first
}

/// `‖Y‖_r / max(1, n(n+d-2))^{(d-1)/4}` for the normalized zonal harmonic.
pub fn sogge_ratio(d: u32, n: u32, r: f64) -> Result<f64> {
    let eig = (n as f64 * (n as f64 + d as f64 - 2.0)).max(1.0);
    Ok(angular_lp_norm(d, n, r)? / eig.powf((d as f64 - 1.0) / 4.0))
}

/// The four scaled quantities that the large-order bracket estimates
/// constrain, measured at one order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketSample {
    pub order: Order,
    /// `(j_ν - ν) / ν^{1/3}`, bracketed by `(1.855, 1.856)`.
    pub zero_offset: f64,
    /// `(j'_ν - ν) / ν^{1/3}`, bracketed by `(0.808, 0.809)`.
    pub deriv_zero_offset: f64,
    /// `J_ν'(j_ν) ν^{2/3}`, bracketed by `(-1.114, -1.113)`.
    pub slope_at_zero: f64,
    /// `J_ν(j'_ν) ν^{1/3}`, bracketed by `(0.674, 0.675)`.
    pub peak_value: f64,
}

pub const BRACKETS: [(&str, f64, f64); 4] = [
    ("zero_offset", 1.855, 1.856),
    ("deriv_zero_offset", 0.808, 0.809),
    ("slope_at_zero", -1.114, -1.113),
    ("peak_value", 0.674, 0.675),
];

impl BracketSample {
    pub fn values(&self) -> [f64; 4] {
        [
            self.zero_offset,
            self.deriv_zero_offset,
            self.slope_at_zero,
            self.peak_value,
        ]
    }

    /// Which of the four brackets hold, in the order of [`BRACKETS`].
    pub fn holds(&self) -> [bool; 4] {
        let v = self.values();
        std::array::from_fn(|i| BRACKETS[i].1 < v[i] && v[i] < BRACKETS[i].2)
    }
}

pub fn bracket_sample(order: Order) -> Result<BracketSample> {
    let nu = order.nu();
    if !(nu > 0.0) {
        return Err(Error::Domain("bracket scaling needs ν > 0".into()));
    }
    let j = first_zero(order)?.value;
    let jd = first_deriv_zero(order)?.value;
    let c = nu.cbrt();
    Ok(BracketSample {
        order,
        zero_offset: (j - nu) / c,
        deriv_zero_offset: (jd - nu) / c,
        slope_at_zero: bessel_j_eval(order, j)?.jp * c * c,
        peak_value: bessel_j(order, jd)? * c,
    })
}

/// For each bracket, the smallest sampled order from which the bracket holds
/// at every later sample (samples must be sorted by order).
pub fn bracket_onsets(samples: &[BracketSample]) -> [Option<Order>; 4] {
    std::array::from_fn(|i| {
        let mut first = None;
        for s in samples.iter().rev() {
            if !s.holds()[i] {
                break;
            }
            first = Some(s.order);
        }
        first
    })
}

/// Values at `x = ν - ν^{2/3}` against `2^{-ν^{1/3}/3}` and
/// `ν^{-1/2} 2^{-ν^{1/3}/3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupercriticalSample {
    pub order: Order,
    pub x: f64,
    pub j: f64,
    pub jp: f64,
    pub j_bound: f64,
    pub jp_bound: f64,
    /// True when `J_ν(x)` underflowed but its scaled representation is positive.
    pub underflow_positive: bool,
}

impl SupercriticalSample {
    pub fn holds(&self) -> bool {
        let positive = self.j > 0.0 || self.underflow_positive;
        positive && self.j < self.j_bound && self.jp.abs() < self.jp_bound
    }
}

pub fn supercritical_sample(order: Order) -> Result<SupercriticalSample> {
    let nu = order.nu();
    let x = nu - nu.powf(2.0 / 3.0);
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ν - ν^(2/3) must be positive, got {x}")));
    }
    let ev = bessel_j_eval(order, x)?;
    let b = (-nu.cbrt() / 3.0).exp2();
    Ok(SupercriticalSample {
        order,
        x,
        j: ev.j,
        jp: ev.jp,
        j_bound: b,
        jp_bound: b / nu.sqrt(),
        underflow_positive: ev.underflow && ev.j_scaled.mant > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::simpson_relative;

    #[test]
    fn mode_multiplicities() {
        let m = mode(2, 0).unwrap();
        assert_eq!((m.order.nu(), m.mult), (0.0, 1));
        assert!((m.lam - 2.404825557695773f64.powi(2)).abs() < 1e-12 * m.lam);
        assert_eq!(mode(2, 3).unwrap().mult, 2);
        assert_eq!(mode(3, 2).unwrap().mult, 5);
        assert_eq!(mode(3, 0).unwrap().mult, 1);
        // j_{1/2} = π on the ball in R^3
        assert!((mode(3, 0).unwrap().j - PI).abs() < 1e-12);
        assert!(mode(4, 1).is_err());
    }

    #[test]
    fn mass_closed_form_matches_quadrature() {
        let m = mode(2, 20).unwrap();
        let want = simpson_relative(
            &|r: f64| r * bessel_j(m.order, m.j * r).unwrap().powi(2),
            0.0,
            0.6,
            1e-11,
        );
        let got = radial_mass(&m, 0.6).unwrap();
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        assert_eq!(radial_mass(&m, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_mass_identity_and_bounds() {
        let m = mode(2, 100).unwrap();
        let jp = bessel_j_eval(m.order, m.j).unwrap().jp;
        let m1 = radial_mass(&m, 1.0).unwrap();
        assert!((m1 - 0.5 * jp * jp).abs() < 1e-10 * m1);
        let nu43 = 100f64.powf(-4.0 / 3.0);
        assert!(0.5 * nu43 <= m1 && m1 <= nu43);
        let e1 = grad_energy(&m, 1.0).unwrap();
        assert!((e1 - 0.5 * m.lam * jp * jp).abs() < 1e-10 * e1);
    }

    #[test]
    fn energy_inside_zeta_is_small() {
        let m = mode(2, 100).unwrap();
        let z = zeta_of(&m);
        let e = grad_energy(&m, z).unwrap();
        assert!(e < (-100f64.cbrt() / 3.0).exp2());
        let l4 = lp_mass(&m, 4.0, z).unwrap();
        assert!(l4 < (-100f64.cbrt() * 4.0 / 6.0).exp2());
    }

    #[test]
    fn angular_norms() {
        assert!((angular_lp_norm(2, 0, 4.0).unwrap() - (2.0 * PI).powf(-0.25)).abs() < 1e-12);
        assert!((angular_lp_norm(2, 7, 2.0).unwrap() - 1.0).abs() < 1e-12);
        // ∫ cos^4(5θ) over a period is 3π/4
        let want = (PI.powi(-2) * 0.75 * PI).powf(0.25);
        assert!((angular_lp_norm(2, 5, 4.0).unwrap() - want).abs() < 1e-12);
        for n in [0, 1, 5, 40] {
            assert!((angular_lp_norm(3, n, 2.0).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(angular_lp_norm(3, 1, 4.0).unwrap().is_finite());
    }

    #[test]
    fn lp_mass_with_p2_is_the_mass() {
        for (d, n, s) in [(2, 10, 1.0), (3, 10, 0.8), (2, 0, 0.5), (3, 60, 0.9)] {
            let m = mode(d, n).unwrap();
            let a = lp_mass(&m, 2.0, s).unwrap();
            let b = radial_mass(&m, s).unwrap();
            assert!((a - b).abs() < 1e-8 * b, "{d} {n} {s}: {a} vs {b}");
        }
    }

    #[test]
    fn sogge_ratio_on_the_circle_is_degree_independent() {
        let r1 = sogge_ratio(2, 1, 4.0).unwrap();
        for n in [2, 7, 50] {
            let r = sogge_ratio(2, n, 4.0).unwrap();
            let scaled = r * ((n * n) as f64).powf(0.25);
            assert!((scaled - r1).abs() < 1e-12, "{n}");
        }
    }

    #[test]
    fn interior_smallness_holds_at_degree_100() {
        let rep = verify_thm13(2, 100, &[2.0]).unwrap();
        assert!(rep.pass());
        assert!(rep.tau < rep.zeta);
        // below the threshold τ is negative: the inner ball is empty
        let small = verify_thm13(2, 2, &[2.0]).unwrap();
        assert!(small.tau < 0.0);
        assert_eq!(small.grad_energy_inner, 0.0);
    }

    #[test]
    fn supercritical_bound_at_order_100() {
        let s = supercritical_sample(Order::integer(100)).unwrap();
        assert!((s.x - 78.455).abs() < 1e-3);
        assert!(s.holds());
    }
}
