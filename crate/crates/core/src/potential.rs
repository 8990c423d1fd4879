//! Polynomial-type potentials `F(s) = Σ b_i |s|^{p_i}` with `2 < p_1 < ... < p_k`,
//! their derivatives, and the exponent of the solution space `V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_MIN_EXP: f64 = -6.0;
const GRID_MAX_EXP: f64 = 3.0;
const GRID_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub b: f64,
    pub p: f64,
}

/// A validated potential with floor constant `b0`: `F(s) >= b0 |s|^{p_1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    terms: Vec<Term>,
    b0: f64,
}

impl PotentialSpec {
    /// Validates exponents and checks `F >= 0` and `F >= b0 |s|^{p_1}` on a
    /// log-spaced grid `±10^{-6} .. ±10^{3}`.
    pub fn new(terms: Vec<Term>, b0: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidPotential("at least one term is required".into()));
        }
        for t in &terms {
            if !t.b.is_finite() || !t.p.is_finite() {
                return Err(Error::InvalidPotential(format!("non-finite term {t:?}")));
            }
        }
        if terms[0].p <= 2.0 {
            return Err(Error::InvalidPotential(format!(
                "smallest exponent must exceed 2, got p1 = {}",
                terms[0].p
            )));
        }
        if let Some(w) = terms.windows(2).find(|w| w[1].p <= w[0].p) {
            return Err(Error::InvalidPotential(format!(
                "exponents must be strictly increasing, got {} then {}",
                w[0].p, w[1].p
            )));
        }
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(Error::InvalidPotential(format!("b0 must be positive, got {b0}")));
        }
        let spec = PotentialSpec { terms, b0 };
        for s in validation_grid() {
            let v = spec.f_big(s);
            if v < 0.0 {
                return Err(Error::InvalidPotential(format!("F({s:e}) = {v:e} is negative")));
            }
            let floor = b0 * s.abs().powf(spec.p1());
            // relative slack for rounding in the term sum
            if v < floor * (1.0 - 1e-12) {
                return Err(Error::InvalidPotential(format!(
                    "F({s:e}) = {v:e} is below b0 |s|^p1 = {floor:e}"
                )));
            }
        }
        Ok(spec)
    }

    /// Single-term potential `F(s) = b |s|^p` with floor constant `b0 = b`.
    pub fn single(b: f64, p: f64) -> Result<Self> {
        PotentialSpec::new(vec![Term { b, p }], b)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn p1(&self) -> f64 {
        self.terms[0].p
    }

    pub fn pk(&self) -> f64 {
        self.terms[self.terms.len() - 1].p
    }

    /// `F(s)`.
    pub fn f_big(&self, s: f64) -> f64 {
        let a = s.abs();
        self.terms.iter().map(|t| t.b * pow(a, t.p)).sum()
    }

    /// `f(s) = F'(s) = Σ b_i p_i |s|^{p_i - 2} s`.
    pub fn f(&self, s: f64) -> f64 {
        let a = s.abs();
        self.terms
            .iter()
            .map(|t| t.b * t.p * pow(a, t.p - 2.0) * s)
            .sum()
    }

    /// `f'(s) = Σ b_i p_i (p_i - 1) |s|^{p_i - 2}`.
    pub fn f_prime(&self, s: f64) -> f64 {
        let a = s.abs();
        self.terms
            .iter()
            .map(|t| t.b * t.p * (t.p - 1.0) * pow(a, t.p - 2.0))
            .sum()
    }

    /// The constant used for both `C` and `C'` in the growth bounds.
    pub fn growth_constant(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.b.abs() * t.p * (t.p - 1.0) + t.b.abs() * t.p)
            .sum()
    }

    /// Checks at `s` the three growth bounds
    ///
    /// ```text
    /// |F(s)|  <= C |s|^{p_1}     + C' |s|^{p_k}
    /// |f(s)|  <= C |s|^{p_1 - 1} + C' |s|^{p_k - 1}
    /// |f'(s)| <= C |s|^{p_1 - 2} + C' |s|^{p_k - 2}
    /// ```
    pub fn growth_check(&self, s: f64) -> bool {
        let c = self.growth_constant();
        let a = s.abs();
        let (p1, pk) = (self.p1(), self.pk());
        let bound = |shift: f64| c * a.powf(p1 - shift) + c * a.powf(pk - shift);
        let slack = 1.0 + 1e-12;
        self.f_big(s).abs() <= bound(0.0) * slack
            && self.f(s).abs() <= bound(1.0) * slack
            && self.f_prime(s).abs() <= bound(2.0) * slack
    }
}

/// `a^p` for `a >= 0`, exact repeated multiplication for small integer `p`.
fn pow(a: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && (0.0..=32.0).contains(&p) {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

fn validation_grid() -> impl Iterator<Item = f64> {
    (0..GRID_POINTS).flat_map(|i| {
        let e = GRID_MIN_EXP + (GRID_MAX_EXP - GRID_MIN_EXP) * i as f64 / (GRID_POINTS - 1) as f64;
        let s = 10f64.powf(e);
        [s, -s]
    })
}

/// Integrability exponent `q` of the space `V = H¹₀ ∩ L^q`; `None` when
/// `V = H¹₀` suffices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevExponent {
    pub d: u32,
    pub q: Option<f64>,
}

/// `q = d (p_k - 2) / 2` when `d >= 3` and `p_k` exceeds the critical
/// exponent `2d/(d-2)`; otherwise `None`.
pub fn sobolev_q(d: u32, spec: &PotentialSpec) -> Result<SobolevExponent> {
    sobolev_q_for(d, spec.pk())
}

pub(crate) fn sobolev_q_for(d: u32, pk: f64) -> Result<SobolevExponent> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
    }
    if d == 2 {
        return Ok(SobolevExponent { d, q: None });
    }
    let df = d as f64;
    let critical = 2.0 * df / (df - 2.0);
    if pk <= critical {
        return Ok(SobolevExponent { d, q: None });
    }
    let q = df * (pk - 2.0) / 2.0;
    debug_assert!(q > critical && q > pk);
    Ok(SobolevExponent { d, q: Some(q) })
}
