//! Run configuration read from a TOML file.
//!
//! ```toml
//! [potential]
//! terms = [{ b = 0.25, p = 4.0 }]
//! b0 = 0.25
//!
//! [solve]
//! n = 12
//! delta = 1e-3
//! m_max = 36      # optional, default 3n
//! k_max = 24      # optional
//! tol = 1e-12     # optional
//! max_iter = 200  # optional
//!
//! [sweep]
//! n_list = [8, 12, 16, 20]
//! tau_list = [0.5]
//! delta = 1e-3    # optional
//!
//! [linear]
//! d = 2
//! nu_min = 100.0
//! nu_max = 300.0
//! p_list = [2.0, 4.0, 6.0]
//! ```
//!
//! Every section is optional in the file; a command fails with a configuration
//! error when its section is missing. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ls_solver::LsConfig;
use crate::potential::{PotentialSpec, Term};

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSection>,
    pub solve: Option<SolveSection>,
    pub sweep: Option<SweepSection>,
    pub linear: Option<LinearSection>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub terms: Vec<Term>,
    pub b0: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub n: u32,
    pub delta: f64,
    pub m_max: Option<u32>,
    pub k_max: Option<u32>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<u32>,
    pub tau_list: Vec<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub d: u32,
    pub nu_min: f64,
    pub nu_max: f64,
    pub p_list: Vec<f64>,
}

pub const DEFAULT_SWEEP_DELTA: f64 = 1e-3;

impl RunConfig {
    /// Parses and validates every section that is present.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.potential.is_some() {
            self.potential_spec()?;
        }
        if let Some(s) = &self.solve {
            if s.n == 0 {
                return Err(Error::Config("solve.n must be >= 1".into()));
            }
            positive("solve.delta", s.delta)?;
            if let Some(t) = s.tol {
                positive("solve.tol", t)?;
            }
            if s.k_max == Some(0) || s.max_iter == Some(0) {
                return Err(Error::Config("solve.k_max and solve.max_iter must be >= 1".into()));
            }
            if let Some(m) = s.m_max {
                if m < s.n {
                    return Err(Error::Config(format!("solve.m_max = {m} is below n = {}", s.n)));
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.n_list.contains(&0) {
                return Err(Error::Config("sweep.n_list entries must be >= 1".into()));
            }
            if let Some(&t) = s.tau_list.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
                return Err(Error::Config(format!("sweep.tau_list entry {t} is outside (0, 1]")));
            }
            if let Some(d) = s.delta {
                positive("sweep.delta", d)?;
            }
        }
        if let Some(l) = &self.linear {
            if !(l.d == 2 || l.d == 3) {
                return Err(Error::Config(format!("linear.d must be 2 or 3, got {}", l.d)));
            }
            if !(l.nu_min.is_finite() && l.nu_max.is_finite() && l.nu_min >= 0.0) {
                return Err(Error::Config("linear.nu_min/nu_max must be finite and >= 0".into()));
            }
            if let Some(&p) = l.p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
                return Err(Error::Config(format!("linear.p_list entry {p} must be >= 1")));
            }
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let p = self
            .potential
            .as_ref()
            .ok_or_else(|| Error::Config("missing [potential] section".into()))?;
        PotentialSpec::new(p.terms.clone(), p.b0)
    }

    pub fn ls_config(&self) -> Result<LsConfig> {
        let s = self
            .solve
            .as_ref()
            .ok_or_else(|| Error::Config("missing [solve] section".into()))?;
        let mut cfg = LsConfig::new(s.n, s.delta, self.potential_spec()?);
        if let Some(m) = s.m_max {
            cfg.m_max = m;
        }
        if let Some(k) = s.k_max {
            cfg.k_max = k;
        }
        if let Some(t) = s.tol {
            cfg.tol_fixed_point = t;
        }
        if let Some(i) = s.max_iter {
            cfg.max_iter = i;
        }
        Ok(cfg)
    }

    pub fn sweep(&self) -> Result<&SweepSection> {
        self.sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))
    }

    pub fn linear(&self) -> Result<&LinearSection> {
        self.linear
            .as_ref()
            .ok_or_else(|| Error::Config("missing [linear] section".into()))
    }
}

impl LinearSection {
    /// Degrees `n` whose order `ν = n + d/2 - 1` lies in `[nu_min, nu_max]`.
    pub fn degrees(&self) -> Option<(u32, u32)> {
        let shift = 0.5 * self.d as f64 - 1.0;
        let lo = (self.nu_min - shift).ceil().max(0.0);
        let hi = (self.nu_max - shift).floor();
        (hi >= lo).then_some((lo as u32, hi as u32))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}
