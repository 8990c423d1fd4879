//! Oracle suites comparing production evaluators with independent reference
//! computations. Each suite returns one [`Comparison`] per case.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linear_spectrum::{grad_energy, mode, radial_mass};
use crate::ls_solver::{LsConfig, LsProblem};
use crate::oracle::{series_j, simpson_relative};
use crate::potential::PotentialSpec;
use crate::specfun::{bessel_j, bessel_j_eval, Order};

pub const SUITES: [&str; 4] = ["lommel", "gradient", "series", "mass"];

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub tol: f64,
}

impl Comparison {
    fn new(label: String, value: f64, reference: f64, tol: f64) -> Self {
        let rel_error = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        Comparison { label, value, reference, rel_error, tol }
    }

    pub fn pass(&self) -> bool {
        self.rel_error <= self.tol
    }
}

pub fn run_suite(name: &str) -> Option<Result<Vec<Comparison>>> {
    match name {
        "lommel" => Some(lommel_suite()),
        "gradient" => Some(gradient_suite()),
        "series" => Some(series_suite()),
        "mass" => Some(mass_suite()),
        _ => None,
    }
}

/// `∫_0^s (R'² + n(n+d-2) R²/r²) r^{d-1} dr` with `R = r^{-D} J_ν(j r)`,
/// by adaptive Simpson.
pub fn grad_energy_by_quadrature(d: u32, n: u32, s: f64) -> Result<f64> {
    let m = mode(d, n)?;
    let shift = 0.5 * d as f64 - 1.0;
    let mu = n as f64 * (n as f64 + d as f64 - 2.0);
    let integrand = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        let ev = bessel_j_eval(m.order, m.j * r).expect("radius inside the unit ball");
        let rd = r.powf(-shift);
        let big_r = rd * ev.j;
        let dr = rd * (m.j * ev.jp - shift * ev.j / r);
        (dr * dr + mu * big_r * big_r / (r * r)) * r.powi(d as i32 - 1)
    };
    Ok(simpson_relative(&integrand, 0.0, s, 1e-11))
}

/// Lommel closed form against quadrature for `d ∈ {2,3}`, `n ∈ {5,20,60}`,
/// `s ∈ {0.3,0.7,1}`; tolerance `1e-8`.
pub fn lommel_suite() -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for d in [2, 3] {
        for n in [5, 20, 60] {
            let m = mode(d, n)?;
            for s in [0.3, 0.7, 1.0] {
                out.push(Comparison::new(
                    format!("d={d} n={n} s={s}"),
                    grad_energy(&m, s)?,
                    grad_energy_by_quadrature(d, n, s)?,
                    1e-8,
                ));
            }
        }
    }
    Ok(out)
}

/// `J_ν(x)` against the plain power series for `ν ≤ 20`, `x ≤ 10`; tolerance
/// `1e-10` on the error scaled by `max(|J|, 1e-3)`. The series itself loses
/// about `e^x ε` to cancellation.
pub fn series_suite() -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for twice in [0, 1, 2, 5, 10, 21, 40] {
        let order = Order::from_twice(twice);
        for x in [0.1, 1.0, 2.5, 5.0, 7.5, 10.0] {
            let got = bessel_j(order, x)?;
            let want = series_j(order, x);
            let scale = want.abs().max(1e-3);
            let mut c = Comparison::new(format!("nu={order} x={x}"), got, want, 1e-10);
            c.rel_error = (got - want).abs() / scale;
            out.push(c);
        }
    }
    Ok(out)
}

/// `∫_{B_1} w² = ½ J_ν'(j_ν)²` for 20 random modes (seed 7); tolerance `1e-10`.
pub fn mass_suite() -> Result<Vec<Comparison>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for _ in 0..20 {
        let d = rng.gen_range(2..=3);
        let n = rng.gen_range(0..=300);
        let m = mode(d, n)?;
        let jp = bessel_j_eval(m.order, m.j)?.jp;
        out.push(Comparison::new(
            format!("d={d} n={n}"),
            radial_mass(&m, 1.0)?,
            0.5 * jp * jp,
            1e-10,
        ));
    }
    Ok(out)
}

/// Reduced gradient against central differences of `J̃` at 10 random points
/// (seed 11) per configuration `n ∈ {8, 12}`, `F = |s|⁴/4`, `δ = 1e-3`;
/// tolerance `1e-5`.
pub fn gradient_suite() -> Result<Vec<Comparison>> {
    let spec = PotentialSpec::single(0.25, 4.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();
    for n in [8, 12] {
        let p = LsProblem::new(LsConfig::new(n, 1e-3, spec.clone()))?;
        for _ in 0..10 {
            let c = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)];
            let chk = p.gradient_check(c, 1e-6)?;
            let mut cmp = Comparison::new(
                format!("n={n} c=({:.4},{:.4})", c[0], c[1]),
                chk.analytic[0].hypot(chk.analytic[1]),
                chk.fd[0].hypot(chk.fd[1]),
                1e-5,
            );
            cmp.rel_error = chk.rel_error();
            out.push(cmp);
        }
    }
    Ok(out)
}
