//! Lyapunov–Schmidt construction of solutions to `-Δu + f(u) = λu` on the
//! unit disk bifurcating from the Dirichlet eigenvalue `Λ = j_{n,1}²`.
//!
//! Work is done in the rescaled unknown `ũ = M u`, which solves
//! `Δũ + λũ - M f(ũ/M) = 0`. Writing `ũ = w̃ + φ̃` with `w̃ ∈ K_Λ` and
//! `φ̃ ⊥ K_Λ`, the complement equation is solved for `φ̃(w̃)` by the
//! contraction
//!
//! ```text
//! T(φ) = -M A_λ^{-1} P⊥ i*[f((w̃ + φ)/M)],   A_λ = 1 - λ i*  on K_Λ⊥,
//! ```
//!
//! and `w̃` is a minimizer of the reduced energy `J̃(w̃) = Ẽ(w̃ + φ̃(w̃))`, where
//!
//! ```text
//! Ẽ(ũ) = ∫ ½|∇ũ|² - (λ/2) ũ² + M² F(ũ/M).
//! ```
//!
//! With `λ = Λ + δ`, `M = (2η/δ)^{1/(p_1-2)}` and
//! `η = b_0 π^{1-p_1/2} / 2^{p_1-1}`; the solution is `u = ũ/M`.
//!
//! All coordinates are with respect to the L²-orthonormal basis of
//! [`crate::spectral_field`], in which `i*` and `A_λ` are diagonal.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, SobolevExponent};
use crate::spectral_field::{
    analyze, apply_inv_laplacian, build_basis, project_kperp, synth, BasisTable,
    EigenspaceHandle, Field,
};

/// Guard on `|1 - λ/Λ_{m,k}|` below which `A_λ` is treated as singular.
const A_LAMBDA_GUARD: f64 = 1e-12;
/// Largest accepted ratio of successive fixed-point increments in the tail.
const TAIL_RATIO: f64 = 0.95;
const TAIL_LEN: usize = 5;
const MAX_M_DOUBLINGS: usize = 6;
const RAY_MIN: f64 = 1e-6;
const RAY_MAX: f64 = 0.5;
const RAY_SCAN_POINTS: usize = 24;
const GOLDEN_TOL: f64 = 1e-10;
const NEWTON_STEPS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct LsConfig {
    /// Angular degree selecting `Λ = j_{n,1}²`.
    pub n: u32,
    /// `λ - Λ`.
    pub delta: f64,
    pub spec: PotentialSpec,
    pub tol_fixed_point: f64,
    pub max_iter: usize,
    pub m_max: u32,
    pub k_max: u32,
}

impl LsConfig {
    /// Defaults: truncation `m_max = 3n`, `k_max = 24`; fixed-point tolerance
    /// `1e-12` on `H¹₀` increments; at most 200 iterations.
    pub fn new(n: u32, delta: f64, spec: PotentialSpec) -> Self {
        LsConfig {
            n,
            delta,
            spec,
            tol_fixed_point: 1e-12,
            max_iter: 200,
            m_max: (3 * n).max(1),
            k_max: 24,
        }
    }
}

/// `η = C_2 / 2^{p_1-1}` with the Hölder constant `C_2 = b_0 |B_1|^{1-p_1/2}`
/// of the unit disk.
pub fn eta_constant(spec: &PotentialSpec) -> f64 {
    let p1 = spec.p1();
    spec.b0() * PI.powf(1.0 - 0.5 * p1) / 2f64.powf(p1 - 1.0)
}

/// `M = (2η/δ)^{1/(p_1-2)}`.
pub fn scale_for_delta(eta: f64, delta: f64, p1: f64) -> f64 {
    (2.0 * eta / delta).powf(1.0 / (p1 - 2.0))
}

/// `δ = 2η M^{2-p_1}`, the inverse of [`scale_for_delta`].
pub fn delta_for_scale(eta: f64, big_m: f64, p1: f64) -> f64 {
    2.0 * eta * big_m.powf(2.0 - p1)
}

/// A configured problem: basis, eigenspace, and the derived constants.
#[derive(Clone, Debug)]
pub struct LsProblem {
    pub cfg: LsConfig,
    basis: Arc<BasisTable>,
    pub handle: EigenspaceHandle,
    pub eta: f64,
    /// `M`.
    pub big_m: f64,
    /// `λ = Λ + δ`.
    pub lam: f64,
    /// `½ min(Λ₊ - Λ, Λ - Λ₋)` over the eigenvalues of the basis.
    pub gap_guard: f64,
    /// `min |1 - λ/Λ_{m,k}|` over the complement entries.
    pub c_lambda: f64,
    /// `δ` actually used (differs from `cfg.delta` after `M` doublings).
    pub delta: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixedPointTrace {
    /// `‖φ_{k+1} - φ_k‖_{H¹₀}` per iteration.
    pub increments: Vec<f64>,
}

impl FixedPointTrace {
    /// Ratios of successive increments over the last (up to five) iterations.
    pub fn tail_ratios(&self) -> Vec<f64> {
        let inc = &self.increments;
        let start = inc.len().saturating_sub(TAIL_LEN + 1);
        inc[start..]
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub j_tilde: f64,
    pub g_tilde: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeTrace {
    /// Coarse scan of the canonical ray `w = t ψ_{n,1,cos}`.
    pub scan: Vec<RaySample>,
    pub t_min: f64,
    pub j_min: f64,
    /// Norm of the reduced gradient after each polishing step.
    pub gradient_norms: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientCheck {
    pub point: [f64; 2],
    pub analytic: [f64; 2],
    pub fd: [f64; 2],
}

impl GradientCheck {
    /// `‖analytic - fd‖ / ‖analytic‖`.
    pub fn rel_error(&self) -> f64 {
        let diff = norm2([self.analytic[0] - self.fd[0], self.analytic[1] - self.fd[1]]);
        diff / norm2(self.analytic).max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// `‖-Δu + f(u) - λu‖₂ / ‖λu‖₂`.
    pub residual_l2: f64,
    /// `|⟨w, φ⟩_{H¹₀}|`.
    pub ortho_h1: f64,
    /// `|⟨w, φ⟩_{L²}|`.
    pub ortho_l2: f64,
    pub contraction_rates: Vec<f64>,
    pub fixed_point_iterations: usize,
    pub j_tilde_value: f64,
    pub w_l2: f64,
    pub phi_vnorm: f64,
    /// Max-abs coordinate residuals of the complement and eigenspace equations.
    pub split_residuals: (f64, f64),
    pub t_min: f64,
    pub m_doublings: usize,
    pub gap_guard: f64,
    pub c_lambda: f64,
}

#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub n: u32,
    pub u: Field,
    pub lam: f64,
    /// `Λ`.
    pub lam_lin: f64,
    pub delta: f64,
    pub w: Field,
    pub phi: Field,
    pub big_m: f64,
    pub eta: f64,
    pub diagnostics: Diagnostics,
}

impl LsProblem {
    pub fn new(cfg: LsConfig) -> Result<Self> {
        let basis = build_basis(cfg.m_max, cfg.k_max)?;
        LsProblem::with_basis(cfg, basis)
    }

    /// Uses an existing basis, which must contain the degree `cfg.n`.
    pub fn with_basis(cfg: LsConfig, basis: Arc<BasisTable>) -> Result<Self> {
        if cfg.n < 1 {
            return Err(Error::Config("angular degree n must be >= 1".into()));
        }
        if !(cfg.delta > 0.0) || !cfg.delta.is_finite() {
            return Err(Error::Config(format!("delta must be positive, got {}", cfg.delta)));
        }
        if !(cfg.tol_fixed_point > 0.0) || cfg.max_iter == 0 {
            return Err(Error::Config("tolerance and iteration budget must be positive".into()));
        }
        let eta = eta_constant(&cfg.spec);
        let big_m = scale_for_delta(eta, cfg.delta, cfg.spec.p1());
        LsProblem::assemble(cfg, basis, eta, big_m)
    }

    fn assemble(cfg: LsConfig, basis: Arc<BasisTable>, eta: f64, big_m: f64) -> Result<Self> {
        let handle = EigenspaceHandle::new(&basis, cfg.n)?;
        let delta = delta_for_scale(eta, big_m, cfg.spec.p1());
        if !(big_m > 1.0) {
            return Err(Error::Config(format!(
                "scale M = {big_m} must exceed 1; delta = {} must be below 2 eta = {}",
                delta,
                2.0 * eta
            )));
        }
        let big_lam = handle.lam;
        let rel_tol = 1e-12 * big_lam;
        let above = basis
            .entries()
            .iter()
            .map(|e| e.lam)
            .filter(|l| *l > big_lam + rel_tol)
            .fold(f64::INFINITY, f64::min);
        let below = basis
            .entries()
            .iter()
            .map(|e| e.lam)
            .filter(|l| *l < big_lam - rel_tol)
            .fold(f64::NEG_INFINITY, f64::max);
        let gap_guard = 0.5 * (above - big_lam).min(big_lam - below);
        if !(delta < gap_guard) {
            return Err(Error::Config(format!(
                "delta = {delta} must be below half the spectral gap ({gap_guard})"
            )));
        }
        let lam = big_lam + delta;
        let c_lambda = basis
            .entries()
            .iter()
            .enumerate()
            .filter(|(i, _)| !handle.contains(*i))
            .map(|(_, e)| (1.0 - lam / e.lam).abs())
            .fold(f64::INFINITY, f64::min);
        Ok(LsProblem {
            cfg,
            basis,
            handle,
            eta,
            big_m,
            lam,
            gap_guard,
            c_lambda,
            delta,
        })
    }

    /// The same problem with `M` replaced (and `λ` recomputed from it).
    pub fn with_scale(&self, big_m: f64) -> Result<Self> {
        LsProblem::assemble(self.cfg.clone(), Arc::clone(&self.basis), self.eta, big_m)
    }

    pub fn basis(&self) -> &Arc<BasisTable> {
        &self.basis
    }

    /// `Λ`.
    pub fn big_lam(&self) -> f64 {
        self.handle.lam
    }

    fn v_exponent(&self) -> SobolevExponent {
        SobolevExponent { d: 2, q: None }
    }

    /// `w = c_cos ψ_{n,1,cos} + c_sin ψ_{n,1,sin}`.
    pub fn eigen_field(&self, c: [f64; 2]) -> Field {
        let mut w = Field::zeros(&self.basis);
        for (k, &i) in self.handle.indices.iter().enumerate() {
            w.coeffs_mut()[i] = c[k];
        }
        w
    }

    /// Coordinates of `analyze(f(v/M))`, the L² projection of `f(v/M)`.
    fn nonlinear_coeffs(&self, v: &Field) -> Result<Field> {
        let inv_m = 1.0 / self.big_m;
        let vals: Vec<f64> = synth(v)
            .into_iter()
            .map(|x| self.cfg.spec.f(x * inv_m))
            .collect();
        analyze(&vals, &self.basis)
    }

    /// `A_λ^{-1}` on `K_Λ⊥`: divides each coordinate by `1 - λ/Λ_{m,k}`.
    pub fn apply_a_inv_on_perp(&self, field: &Field) -> Result<Field> {
        let mut out = field.clone();
        for (i, (c, e)) in out
            .coeffs_mut()
            .iter_mut()
            .zip(self.basis.entries())
            .enumerate()
        {
            if self.handle.contains(i) {
                if *c != 0.0 {
                    return Err(Error::Domain(format!(
                        "input to A_lambda^-1 has a K_Lambda component at entry {i}"
                    )));
                }
                continue;
            }
            let gap = 1.0 - self.lam / e.lam;
            if gap.abs() < A_LAMBDA_GUARD {
                return Err(Error::SingularOperator { index: i, gap: gap.abs() });
            }
            *c /= gap;
        }
        Ok(out)
    }

    /// `A_λ φ = φ - λ i* φ`.
    pub fn apply_a(&self, field: &Field) -> Field {
        let mut out = field.clone();
        for (c, e) in out.coeffs_mut().iter_mut().zip(self.basis.entries()) {
            *c *= 1.0 - self.lam / e.lam;
        }
        out
    }

    /// `T(φ) = -M A_λ^{-1} P⊥ i*[f((w + φ)/M)]`.
    pub fn contraction_step(&self, w: &Field, phi: &Field) -> Result<Field> {
        let u = w.axpy(1.0, phi)?;
        let nl = self.nonlinear_coeffs(&u)?;
        let rhs = project_kperp(&apply_inv_laplacian(&nl), &self.handle);
        Ok(self.apply_a_inv_on_perp(&rhs)?.scaled(-self.big_m))
    }

    /// Fixed point `φ̃(w)` of [`Self::contraction_step`] from `φ = 0`.
    pub fn solve_phi(&self, w: &Field) -> Result<(Field, FixedPointTrace)> {
        let mut phi = Field::zeros(&self.basis);
        let mut trace = FixedPointTrace::default();
        let q = self.v_exponent();
        for _ in 0..self.cfg.max_iter {
            let next = self.contraction_step(w, &phi)?;
            let inc = next.axpy(-1.0, &phi)?.norm_v(&q);
            trace.increments.push(inc);
            phi = next;
            if !inc.is_finite() {
                break;
            }
            if inc <= self.cfg.tol_fixed_point {
                if let Some(r) = trace.tail_ratios().into_iter().find(|r| *r > TAIL_RATIO) {
                    return Err(Error::NoConvergence {
                        what: "complement fixed point",
                        detail: format!("increments not geometric: tail ratio {r}"),
                    });
                }
                return Ok((phi, trace));
            }
            let n = trace.increments.len();
            if n > TAIL_LEN && inc > trace.increments[n - 1 - TAIL_LEN] {
                break;
            }
        }
        Err(Error::NoConvergence {
            what: "complement fixed point",
            detail: format!(
                "last increment {:e} after {} iterations (M = {})",
                trace.increments.last().copied().unwrap_or(f64::NAN),
                trace.increments.len(),
                self.big_m
            ),
        })
    }

    fn potential_integral(&self, v: &Field) -> f64 {
        let inv_m = 1.0 / self.big_m;
        let vals: Vec<f64> = synth(v)
            .into_iter()
            .map(|x| self.cfg.spec.f_big(x * inv_m))
            .collect();
        self.big_m * self.big_m * self.basis.integrate_grid(&vals)
    }

    /// `½ Σ (Λ_i - λ) v_i²`, with `Λ_i - λ` formed as `(Λ_i - Λ) - δ`.
    fn quadratic_part(&self, v: &Field) -> f64 {
        let big_lam = self.big_lam();
        0.5 * v
            .coeffs()
            .iter()
            .zip(self.basis.entries())
            .map(|(c, e)| ((e.lam - big_lam) - self.delta) * c * c)
            .sum::<f64>()
    }

    /// `Ẽ(v)`.
    pub fn energy_tilde(&self, v: &Field) -> f64 {
        self.quadratic_part(v) + self.potential_integral(v)
    }

    /// `G̃(w) = ((Λ - λ)/2) ‖w‖₂² + M² ∫ F(w/M)`.
    pub fn g_tilde(&self, w: &Field) -> f64 {
        -0.5 * self.delta * w.l2_norm().powi(2) + self.potential_integral(w)
    }

    /// `R̃(w) = ∫ ½|∇φ|² - (λ/2)φ² + M² [F((w+φ)/M) - F(w/M)]`.
    pub fn r_tilde(&self, w: &Field, phi: &Field) -> Result<f64> {
        let u = w.axpy(1.0, phi)?;
        Ok(self.quadratic_part(phi) + self.potential_integral(&u) - self.potential_integral(w))
    }

    /// `J̃(w) = Ẽ(w + φ̃(w))`.
    pub fn j_tilde(&self, w: &Field) -> Result<f64> {
        let (phi, _) = self.solve_phi(w)?;
        Ok(self.energy_tilde(&w.axpy(1.0, &phi)?))
    }

    /// `J̃` along the canonical ray `w = t ψ_{n,1,cos}`.
    pub fn j_on_ray(&self, t: f64) -> Result<f64> {
        self.j_tilde(&self.eigen_field([t, 0.0]))
    }

    /// Partial derivatives of `J̃` with respect to the two L² coordinates of
    /// `w` in `K_Λ`. Equal to `⟨dẼ(ũ), ψ_i⟩ = (Λ - λ) w_i + M ⟨f(ũ/M), ψ_i⟩`
    /// at `ũ = w + φ̃(w)`, because `dẼ(ũ)` vanishes on `K_Λ⊥`.
    pub fn reduced_gradient(&self, w: &Field) -> Result<[f64; 2]> {
        let (phi, _) = self.solve_phi(w)?;
        let u = w.axpy(1.0, &phi)?;
        let nl = self.nonlinear_coeffs(&u)?;
        let [ic, is] = self.handle.indices;
        Ok([
            -self.delta * u.coeffs()[ic] + self.big_m * nl.coeffs()[ic],
            -self.delta * u.coeffs()[is] + self.big_m * nl.coeffs()[is],
        ])
    }

    /// Analytic reduced gradient at `w = c_cos ψ_cos + c_sin ψ_sin` next to
    /// central differences of `J̃` with step `h_rel ‖c‖`.
    pub fn gradient_check(&self, c: [f64; 2], h_rel: f64) -> Result<GradientCheck> {
        let analytic = self.reduced_gradient(&self.eigen_field(c))?;
        let h = h_rel * norm2(c).max(f64::MIN_POSITIVE);
        let mut fd = [0.0; 2];
        for (k, slot) in fd.iter_mut().enumerate() {
            let at = |x: f64| {
                let mut cc = c;
                cc[k] = x;
                self.j_tilde(&self.eigen_field(cc))
            };
            *slot = (at(c[k] + h)? - at(c[k] - h)?) / (2.0 * h);
        }
        Ok(GradientCheck { point: c, analytic, fd })
    }

    /// Minimizes `J̃` over the ray `t ∈ (0, ½]`: coarse scan, golden section
    /// to `1e-10` in `t`, then damped Newton on the 2-D reduced gradient.
    pub fn minimize_reduced(&self) -> Result<(Field, MinimizeTrace)> {
        let mut scan = Vec::with_capacity(RAY_SCAN_POINTS + 1);
        for i in 0..=RAY_SCAN_POINTS {
            let t = RAY_MIN + (RAY_MAX - RAY_MIN) * i as f64 / RAY_SCAN_POINTS as f64;
            let w = self.eigen_field([t, 0.0]);
            scan.push(RaySample {
                t,
                j_tilde: self.j_tilde(&w)?,
                g_tilde: self.g_tilde(&w),
            });
        }
        let (best, _) = scan
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, s)| {
                if s.j_tilde < acc.1 {
                    (i, s.j_tilde)
                } else {
                    acc
                }
            });
        if best == 0 || best == RAY_SCAN_POINTS {
            return Err(Error::BoundaryMinimizer { t: scan[best].t });
        }
        let (mut a, mut b) = (scan[best - 1].t, scan[best + 1].t);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.j_on_ray(x1)?;
        let mut f2 = self.j_on_ray(x2)?;
        while b - a > GOLDEN_TOL {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.j_on_ray(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.j_on_ray(x2)?;
            }
        }
        let mut c = [0.5 * (a + b), 0.0];
        let mut grad = self.reduced_gradient(&self.eigen_field(c))?;
        let mut gradient_norms = vec![norm2(grad)];
        for _ in 0..NEWTON_STEPS {
            let gn = norm2(grad);
            if gn == 0.0 {
                break;
            }
            let h = 1e-6 * c[0].abs().max(1e-3);
            let mut hess = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut cp = c;
                let mut cm = c;
                cp[k] += h;
                cm[k] -= h;
                let gp = self.reduced_gradient(&self.eigen_field(cp))?;
                let gm = self.reduced_gradient(&self.eigen_field(cm))?;
                for r in 0..2 {
                    hess[r][k] = (gp[r] - gm[r]) / (2.0 * h);
                }
            }
            // symmetrize the difference Hessian
            let off = 0.5 * (hess[0][1] + hess[1][0]);
            hess[0][1] = off;
            hess[1][0] = off;
            let det = hess[0][0] * hess[1][1] - off * off;
            if !(det.abs() > 0.0) {
                break;
            }
            let step = [
                (hess[1][1] * grad[0] - off * grad[1]) / det,
                (hess[0][0] * grad[1] - off * grad[0]) / det,
            ];
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let trial = [c[0] - damping * step[0], c[1] - damping * step[1]];
                let tg = self.reduced_gradient(&self.eigen_field(trial))?;
                if norm2(tg) < gn {
                    c = trial;
                    grad = tg;
                    accepted = true;
                    break;
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
            gradient_norms.push(norm2(grad));
        }
        let w = self.eigen_field(c);
        let t_min = w.l2_norm();
        let j_min = self.j_tilde(&w)?;
        let j_lo = self.j_on_ray(RAY_MIN)?;
        let j_hi = self.j_on_ray(RAY_MAX)?;
        if !(t_min > RAY_MIN && t_min < RAY_MAX - RAY_MIN && j_min < j_lo.min(j_hi)) {
            return Err(Error::BoundaryMinimizer { t: t_min });
        }
        Ok((
            w,
            MinimizeTrace {
                scan,
                t_min,
                j_min,
                gradient_norms,
            },
        ))
    }

    /// Max-abs coordinate residuals of
    /// `φ - λ i*φ + M P⊥ i*[f(ũ/M)] = 0` and `(1 - λ/Λ) w + M P i*[f(ũ/M)] = 0`.
    pub fn split_residuals(&self, w: &Field, phi: &Field) -> Result<(f64, f64)> {
        let u = w.axpy(1.0, phi)?;
        let nl = self.nonlinear_coeffs(&u)?;
        let (mut perp, mut par) = (0.0f64, 0.0f64);
        for (i, e) in self.basis.entries().iter().enumerate() {
            let m_term = self.big_m * nl.coeffs()[i] / e.lam;
            if self.handle.contains(i) {
                let r = (1.0 - self.lam / e.lam) * w.coeffs()[i] + m_term;
                par = par.max(r.abs());
            } else {
                let r = (1.0 - self.lam / e.lam) * phi.coeffs()[i] + m_term;
                perp = perp.max(r.abs());
            }
        }
        Ok((perp, par))
    }

    /// `‖-Δu + f(u) - λu‖₂ / ‖λu‖₂` with the nonlinear term projected onto the basis.
    pub fn relative_residual(&self, u: &Field) -> Result<f64> {
        let vals: Vec<f64> = synth(u).into_iter().map(|x| self.cfg.spec.f(x)).collect();
        let nl = analyze(&vals, &self.basis)?;
        let big_lam = self.big_lam();
        let res: f64 = u
            .coeffs()
            .iter()
            .zip(nl.coeffs())
            .zip(self.basis.entries())
            .map(|((c, n), e)| {
                let r = ((e.lam - big_lam) - self.delta) * c + n;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        Ok(res / (self.lam * u.l2_norm()))
    }

    /// Minimizes, solves the complement equation at the minimizer and
    /// undoes the rescaling.
    pub fn assemble_at_scale(&self, m_doublings: usize) -> Result<SolutionPair> {
        let (w_t, trace) = self.minimize_reduced()?;
        let (phi_t, fp) = self.solve_phi(&w_t)?;
        let u_t = w_t.axpy(1.0, &phi_t)?;
        let u = u_t.scaled(1.0 / self.big_m);
        let back = (2.0 * self.eta).powf(-1.0 / (self.cfg.spec.p1() - 2.0));
        let w = w_t.scaled(back);
        let phi = phi_t.scaled(back);
        let q = self.v_exponent();
        let diagnostics = Diagnostics {
            residual_l2: self.relative_residual(&u)?,
            ortho_h1: w.h1_inner(&phi)?.abs(),
            ortho_l2: w.l2_inner(&phi)?.abs(),
            contraction_rates: fp.tail_ratios(),
            fixed_point_iterations: fp.increments.len(),
            j_tilde_value: trace.j_min,
            w_l2: w.l2_norm(),
            phi_vnorm: phi.norm_v(&q),
            split_residuals: self.split_residuals(&w_t, &phi_t)?,
            t_min: trace.t_min,
            m_doublings,
            gap_guard: self.gap_guard,
            c_lambda: self.c_lambda,
        };
        Ok(SolutionPair {
            n: self.cfg.n,
            u,
            lam: self.lam,
            lam_lin: self.big_lam(),
            delta: self.delta,
            w,
            phi,
            big_m: self.big_m,
            eta: self.eta,
            diagnostics,
        })
    }

    /// [`Self::assemble_at_scale`], doubling `M` (shrinking `δ`) up to six
    /// times while the complement fixed point fails to converge.
    pub fn assemble_solution(&self) -> Result<SolutionPair> {
        let mut problem = self.clone();
        let mut doublings = 0;
        loop {
            match problem.assemble_at_scale(doublings) {
                Err(Error::NoConvergence { what, .. })
                    if what == "complement fixed point" && doublings < MAX_M_DOUBLINGS =>
                {
                    doublings += 1;
                    problem = problem.with_scale(2.0 * problem.big_m)?;
                }
                other => return other,
            }
        }
    }
}

/// Builds the basis, then [`LsProblem::assemble_solution`].
pub fn assemble_solution(cfg: &LsConfig) -> Result<SolutionPair> {
    LsProblem::new(cfg.clone())?.assemble_solution()
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

impl SolutionPair {
    /// Metadata line `n delta lambda M eta residual ortho` followed by the
    /// field text of `u`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            self.n,
            self.delta,
            self.lam,
            self.big_m,
            self.eta,
            self.diagnostics.residual_l2,
            self.diagnostics.ortho_h1
        );
        s.push_str(&self.u.to_text());
        s
    }
}

/// Parsed metadata line of a solution file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionHeader {
    pub n: u32,
    pub delta: f64,
    pub lam: f64,
    pub big_m: f64,
    pub eta: f64,
    pub residual: f64,
    pub ortho: f64,
}

/// Splits a solution file into its metadata and the field of `u`.
pub fn parse_solution(text: &str, basis: &Arc<BasisTable>) -> Result<(SolutionHeader, Field)> {
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("solution file has no metadata line".into()))?;
    let t: Vec<&str> = first.split_whitespace().collect();
    if t.len() != 7 {
        return Err(Error::Parse(format!("expected 7 metadata fields, got {first:?}")));
    }
    let num = |i: usize| -> Result<f64> {
        t[i].parse()
            .map_err(|_| Error::Parse(format!("bad metadata value {:?}", t[i])))
    };
    let header = SolutionHeader {
        n: t[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree {:?}", t[0])))?,
        delta: num(1)?,
        lam: num(2)?,
        big_m: num(3)?,
        eta: num(4)?,
        residual: num(5)?,
        ortho: num(6)?,
    };
    Ok((header, Field::from_text(basis, rest)?))
}
