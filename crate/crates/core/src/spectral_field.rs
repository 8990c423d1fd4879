//! Functions on the unit disk in the L²-orthonormal Dirichlet eigenbasis
//!
//! ```text
//! ψ_{m,k,cos}(r, θ) = c_{m,k} J_m(j_{m,k} r) cos(mθ),   ψ_{m,k,sin} = ... sin(mθ)
//! ```
//!
//! truncated at `m <= m_max`, `k <= k_max`, together with a tensor quadrature
//! grid (Gauss–Legendre in `r` with weight `r`, uniform in `θ`) used to move
//! between coefficients and point values.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::SobolevExponent;
use crate::quadrature::gauss_legendre_on;
use crate::specfun::{bessel_j_eval_wide, zeros, Order};

fn bessel_j(order: Order, x: f64) -> Result<f64> {
    Ok(bessel_j_eval_wide(order, x)?.j)
}

/// Largest accepted deviation of the discrete radial Gram matrices from the
/// identity before the radial grid is refined.
const RADIAL_GRAM_TOL: f64 = 1e-13;
const MAX_GRID_REFINEMENTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "cos" => Ok(Parity::Cos),
            "sin" => Ok(Parity::Sin),
            _ => Err(Error::Parse(format!("unknown parity {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisEntry {
    pub m: u32,
    pub parity: Parity,
    pub k: u32,
    /// `j_{m,k}`, the k-th zero of `J_m`.
    pub zero: f64,
    /// `Λ_{m,k} = j_{m,k}²`.
    pub lam: f64,
    pub norm_const: f64,
}

#[derive(Debug)]
pub struct BasisTable {
    m_max: u32,
    k_max: u32,
    entries: Vec<BasisEntry>,
    r_nodes: Vec<f64>,
    /// Gauss–Legendre weight times `r`.
    r_weights: Vec<f64>,
    theta: Vec<f64>,
    /// `radial[(m * k_max + k - 1) * n_r + i] = c_{m,k} J_m(j_{m,k} r_i)`.
    radial: Vec<f64>,
    /// `cos_table[m * n_theta + l] = cos(m θ_l)`, same for sine.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
    max_gram_deviation: f64,
}

/// Entries are ordered by `m`, then parity (`cos` before `sin`), then `k`.
pub fn build_basis(m_max: u32, k_max: u32) -> Result<Arc<BasisTable>> {
    if m_max < 1 || k_max < 1 {
        return Err(Error::Domain(format!(
            "truncation must be at least 1 x 1, got m_max = {m_max}, k_max = {k_max}"
        )));
    }
    let mut zero_table = Vec::with_capacity((m_max + 1) as usize);
    let mut norms = Vec::with_capacity(((m_max + 1) * k_max) as usize);
    for m in 0..=m_max {
        let order = Order::integer(m);
        let z: Vec<f64> = zeros(order, k_max as usize)?.iter().map(|r| r.value).collect();
        let angular = if m == 0 { 2.0 * PI } else { PI };
        for &zk in &z {
            // ∫_0^1 r J_m(j r)² dr = J_{m+1}(j)² / 2
            let jn = bessel_j(order.next(), zk)?;
            norms.push(1.0 / (0.5 * jn * jn * angular).sqrt());
        }
        zero_table.push(z);
    }
    let mut entries = Vec::with_capacity(((2 * m_max + 1) * k_max) as usize);
    for m in 0..=m_max {
        for parity in [Parity::Cos, Parity::Sin] {
            if m == 0 && parity == Parity::Sin {
                continue;
            }
            for k in 1..=k_max {
                let zero = zero_table[m as usize][(k - 1) as usize];
                entries.push(BasisEntry {
                    m,
                    parity,
                    k,
                    zero,
                    lam: zero * zero,
                    norm_const: norms[(m * k_max + k - 1) as usize],
                });
            }
        }
    }

    let n_theta = 64.max(4 * m_max as usize);
    let theta: Vec<f64> = (0..n_theta)
        .map(|l| 2.0 * PI * l as f64 / n_theta as f64)
        .collect();
    let mut cos_table = vec![0.0; (m_max as usize + 1) * n_theta];
    let mut sin_table = vec![0.0; (m_max as usize + 1) * n_theta];
    for m in 0..=m_max as usize {
        for (l, &t) in theta.iter().enumerate() {
            let (s, c) = (m as f64 * t).sin_cos();
            cos_table[m * n_theta + l] = c;
            sin_table[m * n_theta + l] = s;
        }
    }

    let mut n_r = 64.max(4 * k_max as usize);
    for attempt in 0..=MAX_GRID_REFINEMENTS {
        let (r_nodes, w) = gauss_legendre_on(n_r, 0.0, 1.0);
        let r_weights: Vec<f64> = r_nodes.iter().zip(&w).map(|(r, wi)| r * wi).collect();
        let mut radial = vec![0.0; (m_max as usize + 1) * k_max as usize * n_r];
        for m in 0..=m_max {
            let order = Order::integer(m);
            for k in 0..k_max as usize {
                let zero = zero_table[m as usize][k];
                let c = norms[m as usize * k_max as usize + k];
                let base = (m as usize * k_max as usize + k) * n_r;
                for (i, &r) in r_nodes.iter().enumerate() {
                    radial[base + i] = c * bessel_j(order, zero * r)?;
                }
            }
        }
        let table = BasisTable {
            m_max,
            k_max,
            entries: entries.clone(),
            r_nodes,
            r_weights,
            theta: theta.clone(),
            radial,
            cos_table: cos_table.clone(),
            sin_table: sin_table.clone(),
            max_gram_deviation: 0.0,
        };
        let dev = table.radial_gram_deviation();
        if dev <= RADIAL_GRAM_TOL || attempt == MAX_GRID_REFINEMENTS {
            return Ok(Arc::new(BasisTable {
                max_gram_deviation: dev,
                ..table
            }));
        }
        n_r = n_r * 5 / 4;
    }
    unreachable!("the last refinement attempt always returns")
}

impl BasisTable {
    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn n_r(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn grid_len(&self) -> usize {
        self.n_r() * self.n_theta()
    }

    /// Largest deviation of a discrete radial Gram matrix from the identity,
    /// measured when the grid was chosen.
    pub fn max_gram_deviation(&self) -> f64 {
        self.max_gram_deviation
    }

    /// Position of `(m, parity, k)` in the entry list.
    pub fn index(&self, m: u32, parity: Parity, k: u32) -> Option<usize> {
        if m > self.m_max || k < 1 || k > self.k_max || (m == 0 && parity == Parity::Sin) {
            return None;
        }
        let km = self.k_max as usize;
        let block = if m == 0 {
            0
        } else {
            1 + 2 * (m as usize - 1) + usize::from(parity == Parity::Sin)
        };
        Some(block * km + k as usize - 1)
    }

    fn radial_row(&self, m: u32, k: u32) -> &[f64] {
        let n_r = self.n_r();
        let base = (m as usize * self.k_max as usize + k as usize - 1) * n_r;
        &self.radial[base..base + n_r]
    }

    fn trig_row(&self, m: u32, parity: Parity) -> &[f64] {
        let n = self.n_theta();
        let t = match parity {
            Parity::Cos => &self.cos_table,
            Parity::Sin => &self.sin_table,
        };
        &t[m as usize * n..(m as usize + 1) * n]
    }

    fn radial_gram_deviation(&self) -> f64 {
        let angular_const = |m: u32| if m == 0 { 2.0 * PI } else { PI };
        let mut worst: f64 = 0.0;
        for m in 0..=self.m_max {
            for k in 1..=self.k_max {
                for k2 in k..=self.k_max {
                    let a = self.radial_row(m, k);
                    let b = self.radial_row(m, k2);
                    let g: f64 = a
                        .iter()
                        .zip(b)
                        .zip(&self.r_weights)
                        .map(|((x, y), w)| x * y * w)
                        .sum::<f64>()
                        * angular_const(m);
                    let want = if k == k2 { 1.0 } else { 0.0 };
                    worst = worst.max((g - want).abs());
                }
            }
        }
        worst
    }

    /// `∫_disk g` for grid values `g` (row-major, radius outer).
    pub fn integrate_grid(&self, values: &[f64]) -> f64 {
        let n_t = self.n_theta();
        let dtheta = 2.0 * PI / n_t as f64;
        values
            .chunks(n_t)
            .zip(&self.r_weights)
            .map(|(row, w)| w * row.iter().sum::<f64>())
            .sum::<f64>()
            * dtheta
    }

    /// Gram matrix of all entries under the grid quadrature. The grid is a
    /// tensor product, so each entry factors into a radial and an angular sum.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let km = self.k_max as usize;
        let blocks = 2 * self.m_max as usize + 1;
        let dtheta = 2.0 * PI / self.n_theta() as f64;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut g = vec![vec![0.0; self.len()]; self.len()];
        for ba in 0..blocks {
            let (ma, pa) = block_mode(ba);
            for bb in ba..blocks {
                let (mb, pb) = block_mode(bb);
                let ang = dtheta * dot(self.trig_row(ma, pa), self.trig_row(mb, pb));
                for ka in 1..=self.k_max {
                    let ra = self.radial_row(ma, ka);
                    for kb in 1..=self.k_max {
                        let rb = self.radial_row(mb, kb);
                        let rad: f64 = ra
                            .iter()
                            .zip(rb)
                            .zip(&self.r_weights)
                            .map(|((x, y), w)| x * y * w)
                            .sum();
                        let (i, j) = (ba * km + ka as usize - 1, bb * km + kb as usize - 1);
                        g[i][j] = rad * ang;
                        g[j][i] = rad * ang;
                    }
                }
            }
        }
        g
    }

    fn synth_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let n_r = self.n_r();
        let n_t = self.n_theta();
        let km = self.k_max as usize;
        let mut out = vec![0.0; n_r * n_t];
        let mut profile = vec![0.0; n_r];
        for block in 0..(2 * self.m_max as usize + 1) {
            let (m, parity) = block_mode(block);
            let c = &coeffs[block * km..(block + 1) * km];
            if c.iter().all(|v| *v == 0.0) {
                continue;
            }
            profile.iter_mut().for_each(|p| *p = 0.0);
            for (k, &ck) in c.iter().enumerate() {
                if ck == 0.0 {
                    continue;
                }
                for (p, rv) in profile.iter_mut().zip(self.radial_row(m, k as u32 + 1)) {
                    *p += ck * rv;
                }
            }
            let trig = self.trig_row(m, parity);
            for (row, &p) in out.chunks_mut(n_t).zip(&profile) {
                for (o, t) in row.iter_mut().zip(trig) {
                    *o += p * t;
                }
            }
        }
        out
    }

    fn analyze_values(&self, values: &[f64]) -> Vec<f64> {
        let n_t = self.n_theta();
        let km = self.k_max as usize;
        let dtheta = 2.0 * PI / n_t as f64;
        let mut out = vec![0.0; self.len()];
        let mut profile = vec![0.0; self.n_r()];
        for block in 0..(2 * self.m_max as usize + 1) {
            let (m, parity) = block_mode(block);
            let trig = self.trig_row(m, parity);
            for ((p, row), w) in profile.iter_mut().zip(values.chunks(n_t)).zip(&self.r_weights) {
                *p = w * dtheta * row.iter().zip(trig).map(|(v, t)| v * t).sum::<f64>();
            }
            for k in 0..km {
                out[block * km + k] = profile
                    .iter()
                    .zip(self.radial_row(m, k as u32 + 1))
                    .map(|(p, r)| p * r)
                    .sum();
            }
        }
        out
    }
}

fn block_mode(block: usize) -> (u32, Parity) {
    if block == 0 {
        (0, Parity::Cos)
    } else {
        let m = (block - 1) / 2 + 1;
        let parity = if (block - 1).is_multiple_of(2) {
            Parity::Cos
        } else {
            Parity::Sin
        };
        (m as u32, parity)
    }
}

/// A function on the disk as coefficients over a [`BasisTable`].
#[derive(Clone, Debug)]
pub struct Field {
    basis: Arc<BasisTable>,
    coeffs: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.coeffs == other.coeffs
    }
}

impl Field {
    pub fn zeros(basis: &Arc<BasisTable>) -> Self {
        Field {
            basis: Arc::clone(basis),
            coeffs: vec![0.0; basis.len()],
        }
    }

    pub fn from_coeffs(basis: &Arc<BasisTable>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(Field {
            basis: Arc::clone(basis),
            coeffs,
        })
    }

    /// The basis function at position `index`.
    pub fn unit(basis: &Arc<BasisTable>, index: usize) -> Self {
        let mut f = Field::zeros(basis);
        f.coeffs[index] = 1.0;
        f
    }

    pub fn basis(&self) -> &Arc<BasisTable> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.check_same(other)?;
        Ok(Field {
            basis: Arc::clone(&self.basis),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    fn check_same(&self, other: &Field) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                got: other.coeffs.len(),
            });
        }
        Ok(())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn l2_inner(&self, other: &Field) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// `⟨u, v⟩_{H¹₀} = Σ Λ u_i v_i`.
    pub fn h1_inner(&self, other: &Field) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.basis.entries())
            .map(|((a, b), e)| e.lam * a * b)
            .sum())
    }

    pub fn h1_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.basis.entries())
            .map(|(c, e)| e.lam * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u‖_{H¹₀} + ‖u‖_{L^q}`, the second term only when `q` is present.
    pub fn norm_v(&self, q: &SobolevExponent) -> f64 {
        let h1 = self.h1_norm();
        match q.q {
            None => h1,
            Some(q) => {
                let vals: Vec<f64> = synth(self).iter().map(|v| v.abs().powf(q)).collect();
                h1 + self.basis.integrate_grid(&vals).powf(1.0 / q)
            }
        }
    }

    /// Direct summation `Σ c_i ψ_i(r, θ)`.
    pub fn eval_at(&self, r: f64, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("radius must lie in [0, 1], got {r}")));
        }
        let mut acc = 0.0;
        for (c, e) in self.coeffs.iter().zip(self.basis.entries()) {
            if *c == 0.0 {
                continue;
            }
            let radial = e.norm_const * bessel_j(Order::integer(e.m), e.zero * r)?;
            acc += c * radial * angular(e.m, e.parity, theta);
        }
        Ok(acc)
    }

    /// `(u, ∂_r u, r^{-1} ∂_θ u)` at `(r, θ)`; the `r = 0` limits are used at
    /// the origin.
    pub fn eval_with_gradient(&self, r: f64, theta: f64) -> Result<(f64, f64, f64)> {
        let radii = RadialEval::new(&self.basis, r)?;
        Ok(radii.field_with_gradient(self, theta))
    }

    /// Text form: header `m_max k_max`, then `m parity k coeff` per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(40 * self.coeffs.len() + 16);
        let _ = writeln!(s, "{} {}", self.basis.m_max, self.basis.k_max);
        for (c, e) in self.coeffs.iter().zip(self.basis.entries()) {
            let _ = writeln!(s, "{} {} {} {:.16e}", e.m, e.parity.as_str(), e.k, c);
        }
        s
    }

    /// Parses the text form against `basis`; truncation and entry labels must
    /// match exactly.
    pub fn from_text(basis: &Arc<BasisTable>, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field file".into()))?;
        let dims: Vec<u32> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        if dims != [basis.m_max, basis.k_max] {
            return Err(Error::Parse(format!(
                "header {header:?} does not match truncation {} {}",
                basis.m_max, basis.k_max
            )));
        }
        let mut coeffs = vec![0.0; basis.len()];
        let mut seen = vec![false; basis.len()];
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 4 {
                return Err(Error::Parse(format!("expected `m parity k coeff`, got {line:?}")));
            }
            let m: u32 = t[0].parse().map_err(|_| Error::Parse(format!("bad m in {line:?}")))?;
            let parity = Parity::parse(t[1])?;
            let k: u32 = t[2].parse().map_err(|_| Error::Parse(format!("bad k in {line:?}")))?;
            let c: f64 = t[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient in {line:?}")))?;
            let idx = basis
                .index(m, parity, k)
                .ok_or_else(|| Error::Parse(format!("entry outside the basis: {line:?}")))?;
            if seen[idx] {
                return Err(Error::Parse(format!("duplicate entry {line:?}")));
            }
            seen[idx] = true;
            coeffs[idx] = c;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let e = basis.entries()[missing];
            return Err(Error::Parse(format!(
                "missing entry {} {} {}",
                e.m,
                e.parity.as_str(),
                e.k
            )));
        }
        Ok(Field {
            basis: Arc::clone(basis),
            coeffs,
        })
    }
}

fn angular(m: u32, parity: Parity, theta: f64) -> f64 {
    match parity {
        Parity::Cos => (m as f64 * theta).cos(),
        Parity::Sin => (m as f64 * theta).sin(),
    }
}

/// Values of every radial profile and its derivative at one radius, reused
/// across angles.
pub struct RadialEval<'a> {
    basis: &'a BasisTable,
    /// `c J_m(j r)` per entry.
    value: Vec<f64>,
    /// `c j J_m'(j r)` per entry.
    deriv: Vec<f64>,
    /// `c J_m(j r) / r` per entry (its limit at `r = 0`).
    over_r: Vec<f64>,
}

impl<'a> RadialEval<'a> {
    pub fn new(basis: &'a BasisTable, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("radius must lie in [0, 1], got {r}")));
        }
        let km = basis.k_max as usize;
        let per_m = basis.m_max as usize + 1;
        let mut v = vec![0.0; per_m * km];
        let mut d = vec![0.0; per_m * km];
        let mut o = vec![0.0; per_m * km];
        for m in 0..per_m {
            let order = Order::integer(m as u32);
            for k in 0..km {
                let i = m * km + k;
                let e = basis.entries()[basis.index(m as u32, Parity::Cos, k as u32 + 1).unwrap()];
                let ev = bessel_j_eval_wide(order, e.zero * r)?;
                v[i] = e.norm_const * ev.j;
                d[i] = e.norm_const * e.zero * ev.jp;
                o[i] = if r > 0.0 {
                    v[i] / r
                } else if m == 1 {
                    // J_1(x)/x -> 1/2
                    0.5 * e.norm_const * e.zero
                } else {
                    0.0
                };
            }
        }
        Ok(RadialEval {
            basis,
            value: v,
            deriv: d,
            over_r: o,
        })
    }

    /// `(u, ∂_r u, r^{-1} ∂_θ u)` at angle `theta`.
    pub fn field_with_gradient(&self, field: &Field, theta: f64) -> (f64, f64, f64) {
        let km = self.basis.k_max as usize;
        let (mut u, mut ur, mut ut) = (0.0, 0.0, 0.0);
        for (c, e) in field.coeffs().iter().zip(self.basis.entries()) {
            if *c == 0.0 {
                continue;
            }
            let i = e.m as usize * km + e.k as usize - 1;
            let mf = e.m as f64;
            let (s, co) = (mf * theta).sin_cos();
            let (a, da) = match e.parity {
                Parity::Cos => (co, -mf * s),
                Parity::Sin => (s, mf * co),
            };
            u += c * self.value[i] * a;
            ur += c * self.deriv[i] * a;
            ut += c * self.over_r[i] * da;
        }
        (u, ur, ut)
    }
}

/// Radial profiles `Σ_k c_{m,k} R_{m,k}` of one angular block at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockProfile {
    pub m: u32,
    pub parity: Parity,
    pub value: f64,
    /// Derivative in `r`.
    pub deriv: f64,
    /// `value / r` (its limit at `r = 0`).
    pub over_r: f64,
}

impl RadialEval<'_> {
    /// One profile per `(m, parity)` block, in entry order.
    pub fn profiles(&self, field: &Field) -> Vec<BlockProfile> {
        let km = self.basis.k_max as usize;
        let blocks = 2 * self.basis.m_max as usize + 1;
        (0..blocks)
            .map(|block| {
                let (m, parity) = block_mode(block);
                let c = &field.coeffs()[block * km..(block + 1) * km];
                let base = m as usize * km;
                let dot = |t: &[f64]| c.iter().zip(&t[base..base + km]).map(|(a, b)| a * b).sum();
                BlockProfile {
                    m,
                    parity,
                    value: dot(&self.value),
                    deriv: dot(&self.deriv),
                    over_r: dot(&self.over_r),
                }
            })
            .collect()
    }
}

/// Point values of `field` on the basis grid (radius outer, angle inner).
pub fn synth(field: &Field) -> Vec<f64> {
    field.basis.synth_coeffs(&field.coeffs)
}

/// Quadrature projection of grid values onto the basis; the adjoint of
/// [`synth`] under the grid quadrature.
pub fn analyze(values: &[f64], basis: &Arc<BasisTable>) -> Result<Field> {
    if values.len() != basis.grid_len() {
        return Err(Error::DimensionMismatch {
            expected: basis.grid_len(),
            got: values.len(),
        });
    }
    Ok(Field {
        basis: Arc::clone(basis),
        coeffs: basis.analyze_values(values),
    })
}

/// `i*`, the inverse of `-Δ` with Dirichlet conditions: divides by `Λ_{m,k}`.
pub fn apply_inv_laplacian(field: &Field) -> Field {
    Field {
        basis: Arc::clone(&field.basis),
        coeffs: field
            .coeffs
            .iter()
            .zip(field.basis.entries())
            .map(|(c, e)| c / e.lam)
            .collect(),
    }
}

/// The two-dimensional eigenspace `K_Λ` spanned by `(n, cos, 1)` and `(n, sin, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenspaceHandle {
    pub n: u32,
    pub indices: [usize; 2],
    /// `Λ = j_{n,1}²`.
    pub lam: f64,
}

impl EigenspaceHandle {
    pub fn new(basis: &BasisTable, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("angular degree must be >= 1".into()));
        }
        let ic = basis.index(n, Parity::Cos, 1);
        let is = basis.index(n, Parity::Sin, 1);
        match (ic, is) {
            (Some(c), Some(s)) => Ok(EigenspaceHandle {
                n,
                indices: [c, s],
                lam: basis.entries()[c].lam,
            }),
            _ => Err(Error::Domain(format!(
                "degree {n} is outside the basis (m_max = {})",
                basis.m_max
            ))),
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }
}

/// Orthogonal projection onto `K_Λ`.
pub fn project_k(field: &Field, handle: &EigenspaceHandle) -> Field {
    let mut out = Field::zeros(&field.basis);
    for &i in &handle.indices {
        out.coeffs[i] = field.coeffs[i];
    }
    out
}

/// Orthogonal projection onto the complement of `K_Λ`.
pub fn project_kperp(field: &Field, handle: &EigenspaceHandle) -> Field {
    let mut out = field.clone();
    for &i in &handle.indices {
        out.coeffs[i] = 0.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(basis: &Arc<BasisTable>, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::from_coeffs(basis, c).unwrap()
    }

    #[test]
    fn entry_counts_and_ordering() {
        assert_eq!(build_basis(1, 1).unwrap().len(), 3);
        let b = build_basis(2, 2).unwrap();
        assert_eq!(b.len(), 10);
        for (i, e) in b.entries().iter().enumerate() {
            assert_eq!(b.index(e.m, e.parity, e.k), Some(i));
        }
        assert!(b.entries().iter().all(|e| !(e.m == 0 && e.parity == Parity::Sin)));
        for w in b.entries().windows(2) {
            if w[0].m == w[1].m && w[0].parity == w[1].parity {
                assert!(w[0].lam < w[1].lam);
            }
        }
        assert!(build_basis(0, 3).is_err());
    }

    #[test]
    fn gram_is_identity() {
        let b = build_basis(6, 6).unwrap();
        let g = b.gram();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 5e-7, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn round_trip() {
        let b = build_basis(9, 8).unwrap();
        let f = random_field(&b, 42);
        let back = analyze(&synth(&f), &b).unwrap();
        let err = f
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
        let z = Field::zeros(&b);
        assert!(synth(&z).iter().all(|v| *v == 0.0));
        assert!(analyze(&[0.0; 3], &b).is_err());
    }

    #[test]
    fn parseval_on_grid() {
        let b = build_basis(8, 8).unwrap();
        let f = random_field(&b, 7);
        let sq: Vec<f64> = synth(&f).iter().map(|v| v * v).collect();
        let l2 = b.integrate_grid(&sq).sqrt();
        assert!((l2 - f.l2_norm()).abs() < 1e-8 * l2);
    }

    #[test]
    fn inverse_laplacian_and_projections() {
        let b = build_basis(4, 3).unwrap();
        let h = EigenspaceHandle::new(&b, 2).unwrap();
        let f = random_field(&b, 3);
        let g = apply_inv_laplacian(&f);
        for ((a, c), e) in f.coeffs().iter().zip(g.coeffs()).zip(b.entries()) {
            assert_eq!(*c, a / e.lam);
        }
        let v = random_field(&b, 4);
        assert_eq!(
            apply_inv_laplacian(&f).l2_inner(&v).unwrap(),
            f.l2_inner(&apply_inv_laplacian(&v)).unwrap()
        );
        let pk = project_k(&f, &h);
        let pp = project_kperp(&f, &h);
        assert_eq!(pk.axpy(1.0, &pp).unwrap().coeffs(), f.coeffs());
        assert_eq!(pk.h1_inner(&pp).unwrap(), 0.0);
        assert_eq!(project_k(&pk, &h), pk);
        assert!(EigenspaceHandle::new(&b, 5).is_err());
    }

    #[test]
    fn norms() {
        let b = build_basis(3, 3).unwrap();
        let q = SobolevExponent { d: 2, q: None };
        let i = b.index(2, Parity::Sin, 3).unwrap();
        let psi = Field::unit(&b, i);
        assert!((psi.norm_v(&q) - b.entries()[i].lam.sqrt()).abs() < 1e-14);
        assert_eq!(Field::zeros(&b).norm_v(&q), 0.0);
        let f = random_field(&b, 1);
        assert!((f.scaled(3.0).norm_v(&q) - 3.0 * f.norm_v(&q)).abs() < 1e-12 * f.norm_v(&q));
    }

    #[test]
    fn pointwise_evaluation() {
        let b = build_basis(5, 4).unwrap();
        let f = random_field(&b, 11);
        let grid = synth(&f);
        let (i, l) = (7, 13);
        let v = f.eval_at(b.r_nodes()[i], b.theta()[l]).unwrap();
        assert!((v - grid[i * b.n_theta() + l]).abs() < 1e-10);
        let edge = f.eval_at(1.0, 0.77).unwrap();
        assert!(edge.abs() < 1e-8 * f.h1_norm());
        let (u, _, _) = f.eval_with_gradient(0.3, 1.1).unwrap();
        assert!((u - f.eval_at(0.3, 1.1).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = build_basis(4, 4).unwrap();
        let f = random_field(&b, 5);
        let (r, t, h) = (0.45, 2.0, 1e-6);
        let (_, ur, ut) = f.eval_with_gradient(r, t).unwrap();
        let fr = (f.eval_at(r + h, t).unwrap() - f.eval_at(r - h, t).unwrap()) / (2.0 * h);
        let ft = (f.eval_at(r, t + h).unwrap() - f.eval_at(r, t - h).unwrap()) / (2.0 * h * r);
        assert!((ur - fr).abs() < 1e-6 * ur.abs().max(1.0));
        assert!((ut - ft).abs() < 1e-6 * ut.abs().max(1.0));
    }

    #[test]
    fn text_round_trip() {
        let b = build_basis(3, 2).unwrap();
        let f = random_field(&b, 9);
        let text = f.to_text();
        assert!(text.starts_with("3 2\n0 cos 1 "));
        let g = Field::from_text(&b, &text).unwrap();
        assert_eq!(g.coeffs(), f.coeffs());
        assert!(Field::from_text(&b, "3 3\n").is_err());
        assert!(Field::from_text(&b, "3 2\n0 cos 1 1.0\n").is_err());
    }
}
