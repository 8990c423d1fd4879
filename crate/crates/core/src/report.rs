//! Energies of disk fields on concentric sub-disks, the boundary-concentration
//! sweep `E_τ(u_n) / E_1(u_n)`, and CSV/SVG emission.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linear_spectrum::{grad_energy, mode};
use crate::ls_solver::{LsConfig, LsProblem};
use crate::potential::PotentialSpec;
use crate::quadrature::gauss_legendre_on;
use crate::spectral_field::{Field, Parity, RadialEval};

const RADIAL_NODES: usize = 128;
const ENERGY_REL_TOL: f64 = 1e-7;

pub const CSV_HEADER: &str = "n,lambda_lin,lambda,tau,E_tau,E_1,ratio,lin_ratio,residual";

/// Dirichlet and potential parts of `E_τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts {
    /// `∫_{B_τ} ½|∇u|²`.
    pub dirichlet: f64,
    /// `∫_{B_τ} F(u)`.
    pub potential: f64,
    /// Node-doubling estimate of the absolute quadrature error.
    pub error: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.dirichlet + self.potential
    }
}

#[allow(clippy::needless_range_loop)]
fn energy_with_nodes(u: &Field, spec: &PotentialSpec, tau: f64, n_r: usize) -> Result<(f64, f64)> {
    let basis = u.basis();
    let n_t = 2 * basis.n_theta();
    let dtheta = 2.0 * PI / n_t as f64;
    let (r_nodes, r_w) = gauss_legendre_on(n_r, 0.0, tau);
    let trig: Vec<Vec<(f64, f64)>> = (0..=basis.m_max())
        .map(|m| {
            (0..n_t)
                .map(|l| (m as f64 * dtheta * l as f64).sin_cos())
                .collect()
        })
        .collect();
    let (mut dirichlet, mut potential) = (0.0, 0.0);
    for (&r, &w) in r_nodes.iter().zip(&r_w) {
        let profiles = RadialEval::new(basis, r)?.profiles(u);
        let (mut sd, mut sp) = (0.0, 0.0);
        for l in 0..n_t {
            let (mut val, mut ur, mut ut) = (0.0, 0.0, 0.0);
            for p in &profiles {
                let (s, c) = trig[p.m as usize][l];
                let mf = p.m as f64;
                let (a, da) = match p.parity {
                    Parity::Cos => (c, -mf * s),
                    Parity::Sin => (s, mf * c),
                };
                val += p.value * a;
                ur += p.deriv * a;
                ut += p.over_r * da;
            }
            sd += 0.5 * (ur * ur + ut * ut);
            sp += spec.f_big(val);
        }
        dirichlet += w * r * sd * dtheta;
        potential += w * r * sp * dtheta;
    }
    Ok((dirichlet, potential))
}

/// `E_τ(u) = ∫_{B_τ} ½|∇u|² + F(u)` by Gauss–Legendre in `r` on `[0, τ]`
/// (128 nodes, checked against 256) and a uniform angular grid of twice the
/// basis resolution. Gradients come from exact coefficient-space derivatives.
pub fn energy_parts(u: &Field, spec: &PotentialSpec, tau: f64) -> Result<EnergyParts> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1], got {tau}")));
    }
    let (d1, p1) = energy_with_nodes(u, spec, tau, RADIAL_NODES)?;
    let (d2, p2) = energy_with_nodes(u, spec, tau, 2 * RADIAL_NODES)?;
    let error = (d1 + p1 - d2 - p2).abs();
    let total = (d2 + p2).abs();
    if error > ENERGY_REL_TOL * total && error > f64::MIN_POSITIVE {
        return Err(Error::NoConvergence {
            what: "sub-disk energy quadrature",
            detail: format!("node-doubling difference {error:e} on E = {total:e} at tau = {tau}"),
        });
    }
    Ok(EnergyParts {
        dirichlet: d2,
        potential: p2,
        error,
    })
}

pub fn energy(u: &Field, spec: &PotentialSpec, tau: f64) -> Result<f64> {
    Ok(energy_parts(u, spec, tau)?.total())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRow {
    pub n: u32,
    /// `Λ_n`.
    pub lam_lin: f64,
    /// `λ_n`.
    pub lam: f64,
    pub tau: f64,
    pub e_tau: f64,
    pub e_one: f64,
    pub ratio: f64,
    /// `∫_{B_τ}|∇w|² / ∫_{B_1}|∇w|²` for the linear mode of degree `n`.
    pub lin_ratio: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Sorted by `n`, then `τ`.
    pub rows: Vec<EnergyRow>,
    /// Degrees whose solve or energy evaluation failed, with the reason.
    pub failures: Vec<(u32, String)>,
}

/// Solves at each degree (in parallel), then tabulates `E_τ/E_1` for every `τ`.
/// Truncation defaults follow [`LsConfig::new`] unless `k_max` is given.
pub fn ratio_sweep<D>(
    n_list: &[u32],
    delta_rule: D,
    spec: &PotentialSpec,
    tau_list: &[f64],
    k_max: Option<u32>,
) -> SweepResult
where
    D: Fn(u32) -> f64 + Sync,
{
    let mut ns: Vec<u32> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let per_n: Vec<(u32, std::result::Result<Vec<EnergyRow>, String>)> = ns
        .par_iter()
        .map(|&n| (n, sweep_one(n, delta_rule(n), spec, tau_list, k_max).map_err(|e| e.to_string())))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in per_n {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => failures.push((n, e)),
        }
    }
    SweepResult { rows, failures }
}

fn sweep_one(
    n: u32,
    delta: f64,
    spec: &PotentialSpec,
    tau_list: &[f64],
    k_max: Option<u32>,
) -> Result<Vec<EnergyRow>> {
    let mut cfg = LsConfig::new(n, delta, spec.clone());
    if let Some(k) = k_max {
        cfg.k_max = k;
    }
    let sol = LsProblem::new(cfg)?.assemble_solution()?;
    let e_one = energy(&sol.u, spec, 1.0)?;
    let lin = mode(2, n)?;
    let lin_one = grad_energy(&lin, 1.0)?;
    let mut taus = tau_list.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus.into_iter()
        .map(|tau| {
            let e_tau = if tau == 1.0 { e_one } else { energy(&sol.u, spec, tau)? };
            Ok(EnergyRow {
                n,
                lam_lin: sol.lam_lin,
                lam: sol.lam,
                tau,
                e_tau,
                e_one,
                ratio: e_tau / e_one,
                lin_ratio: grad_energy(&lin, tau)?.max(0.0) / lin_one,
                residual: sol.diagnostics.residual_l2,
            })
        })
        .collect()
}

/// CSV text with the fixed header and 17-significant-digit values, LF endings.
pub fn csv_string(rows: &[EnergyRow]) -> String {
    let mut s = String::with_capacity(CSV_HEADER.len() + 1 + rows.len() * 200);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n, r.lam_lin, r.lam, r.tau, r.e_tau, r.e_one, r.ratio, r.lin_ratio, r.residual
        );
    }
    s
}

pub fn emit_csv(rows: &[EnergyRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows))?;
    Ok(())
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 600.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Self-contained SVG: `log10(ratio)` against `n`, one polyline per `τ`.
pub fn svg_string(rows: &[EnergyRow]) -> String {
    let pts: Vec<&EnergyRow> = rows.iter().filter(|r| r.ratio > 0.0).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, SVG_W - MARGIN, SVG_H - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">n</text>"#,
        0.5 * (x0 + x1),
        SVG_H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-size="14" transform="rotate(-90 20 {})" text-anchor="middle">log10(E_tau/E_1)</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
    if !pts.is_empty() {
        let nmin = pts.iter().map(|r| r.n).min().unwrap_or(0) as f64;
        let nmax = pts.iter().map(|r| r.n).max().unwrap_or(1) as f64;
        let lmin = pts.iter().map(|r| r.ratio.log10()).fold(f64::INFINITY, f64::min).floor();
        let lmax = pts.iter().map(|r| r.ratio.log10()).fold(f64::NEG_INFINITY, f64::max).ceil();
        let (lmin, lmax) = if lmax > lmin { (lmin, lmax) } else { (lmin - 1.0, lmin + 1.0) };
        let span_n = if nmax > nmin { nmax - nmin } else { 1.0 };
        let px = |n: f64| x0 + (x1 - x0) * (n - nmin) / span_n;
        let py = |l: f64| y0 + (y1 - y0) * (l - lmin) / (lmax - lmin);
        let mut decade = lmin;
        while decade <= lmax {
            let y = py(decade);
            let _ = writeln!(
                s,
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" font-size="11" text-anchor="end">1e{}</text>"##,
                x0 - 6.0,
                y + 4.0,
                decade as i64
            );
            decade += 1.0;
        }
        let mut taus: Vec<f64> = pts.iter().map(|r| r.tau).collect();
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        for (i, tau) in taus.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let line: Vec<String> = pts
                .iter()
                .filter(|r| r.tau == *tau)
                .map(|r| format!("{:.2},{:.2}", px(r.n as f64), py(r.ratio.log10())))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">tau = {tau}</text>"#,
                x1 - 100.0,
                y1 + 16.0 * (i as f64 + 1.0)
            );
        }
        for r in &pts {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                px(r.n as f64),
                y0 + 16.0,
                r.n
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(rows: &[EnergyRow], path: &Path) -> Result<()> {
    std::fs::write(path, svg_string(rows))?;
    Ok(())
}
