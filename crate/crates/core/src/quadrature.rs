//! Gauss–Legendre rules and a globally adaptive panel integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

const PANEL_NODES: usize = 20;
const MAX_PANELS: usize = 20_000;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_NODES))
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn panel_value<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(t, wi)| wi * f(mid + half * t))
        .sum::<f64>()
        * half
}

fn make_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, coarse: f64) -> (Panel, Panel) {
    let m = 0.5 * (a + b);
    let left = panel_value(f, a, m);
    let right = panel_value(f, m, b);
    let err = (left + right - coarse).abs();
    (
        Panel {
            a,
            b: m,
            value: left,
            error: 0.5 * err,
        },
        Panel {
            a: m,
            b,
            value: right,
            error: 0.5 * err,
        },
    )
}

/// Integrates `f` over `[a, b]` with 20-point Gauss–Legendre panels, always
/// bisecting the panel with the largest error estimate, until the summed
/// estimate is below `max(rel_tol · |I|, abs_tol)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    // start from a few equal panels so narrow features near an end are seen
    let initial = 8;
    let mut panels = Vec::with_capacity(64);
    for i in 0..initial {
        let lo = a + (b - a) * i as f64 / initial as f64;
        let hi = a + (b - a) * (i + 1) as f64 / initial as f64;
        let coarse = panel_value(&mut f, lo, hi);
        let (l, r) = make_panel(&mut f, lo, hi, coarse);
        panels.push(l);
        panels.push(r);
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            return Ok(QuadResult {
                value: total,
                error: err,
                panels: panels.len(),
            });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                detail: format!("estimated error {err:e} on |I| = {:e}", total.abs()),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        if p.b - p.a <= 1e-15 * (b - a).abs() {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                detail: format!("panel width underflow near {}; estimated error {err:e}", p.a),
            });
        }
        let (l, r) = make_panel(&mut f, p.a, p.b, p.value);
        panels.push(l);
        panels.push(r);
    }
}
