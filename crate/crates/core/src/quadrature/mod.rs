//! Survival amplitude `A(τ) = ∫_{ξ₀}^∞ Ω(ξ) e^{-iη(ξ)τ} dξ` and its time derivative.
//!
//! Integration runs over the offset `d = ξ - ξ₀` with the endpoint factor
//! `d^α` absorbed into the first-panel rule. The phase is carried relative to
//! the endpoint, `(η - η₀)τ`, and `e^{-iη₀τ}` is applied once at the end, which
//! keeps the integrand free of large-argument trigonometric rounding at long
//! times. Panels advance the phase by at most `2π`.

mod panels;
mod rules;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mdd::MassDistribution;
use panels::{integrate, Layout, Outcome, RuleSet};

pub use rules::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointRule {
    JacobiWeighted,
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub target_abs_error: f64,
    pub max_panels: usize,
    pub truncation_tail_bound: f64,
    pub endpoint_rule: EndpointRule,
    pub panel_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            target_abs_error: 1e-12,
            max_panels: 100_000,
            truncation_tail_bound: 1e-14,
            endpoint_rule: EndpointRule::JacobiWeighted,
            panel_order: 15,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_error > 0.0) {
            return Err(Error::InvalidInput(format!(
                "target_abs_error must be > 0 (got {})",
                self.target_abs_error
            )));
        }
        if self.panel_order < 7 {
            return Err(Error::InvalidInput(format!(
                "panel_order must be >= 7 (got {})",
                self.panel_order
            )));
        }
        if self.max_panels == 0 {
            return Err(Error::InvalidInput("max_panels must be >= 1".to_string()));
        }
        if !(self.truncation_tail_bound > 0.0) {
            return Err(Error::InvalidInput(format!(
                "truncation_tail_bound must be > 0 (got {})",
                self.truncation_tail_bound
            )));
        }
        Ok(())
    }
}

/// Dimensionless momentum and mass bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub rho: f64,
    pub xi0: f64,
    pub eta0: f64,
}

impl Kinematics {
    pub fn new(rho: f64, xi0: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain(format!("rho must be >= 0 (got {rho})")));
        }
        if !(xi0 > 0.0) || !xi0.is_finite() {
            return Err(Error::domain(format!("xi0 must be > 0 (got {xi0})")));
        }
        Ok(Kinematics {
            rho,
            xi0,
            eta0: rho.hypot(xi0),
        })
    }

    pub fn for_mdd(mdd: &MassDistribution, rho: f64) -> Result<Self> {
        Self::new(rho, mdd.xi0())
    }

    /// `η(ξ) = √(ρ² + ξ²)`.
    pub fn eta(&self, xi: f64) -> f64 {
        self.rho.hypot(xi)
    }

    /// `η(ξ₀ + d) - η₀` without cancellation.
    pub fn eta_offset(&self, d: f64) -> f64 {
        let xi = self.xi0 + d;
        d * (2.0 * self.xi0 + d) / (self.eta(xi) + self.eta0)
    }

    /// `γ_L(ξ) = η(ξ)/ξ`.
    pub fn lorentz_factor(&self, xi: f64) -> f64 {
        self.eta(xi) / xi
    }

    /// `v(ξ) = ρ/η(ξ)`.
    pub fn velocity(&self, xi: f64) -> f64 {
        self.rho / self.eta(xi)
    }

    /// Velocity at the lower mass bound, `ρ/η₀`.
    pub fn endpoint_velocity(&self) -> f64 {
        self.rho / self.eta0
    }

    /// `χ_p = η₀/ξ₀`.
    pub fn chi(&self) -> f64 {
        self.eta0 / self.xi0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeValue {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Baseline,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Xi,
    Eta,
}

/// Reusable evaluator for one `(mdd, kinematics, config)` triple.
#[derive(Debug, Clone)]
pub struct AmplitudeIntegrator<'a> {
    mdd: &'a MassDistribution,
    kin: Kinematics,
    cfg: QuadratureConfig,
    rules: RuleSet,
    smooth_rules: RuleSet,
    style: Style,
}

impl<'a> AmplitudeIntegrator<'a> {
    pub fn new(mdd: &'a MassDistribution, kin: &Kinematics, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Self::build(mdd, kin, *cfg, Style::Baseline)
    }

    /// Independent evaluator: doubled node order, half-width shifted panels,
    /// tanh-sinh endpoint treatment and a tighter truncation.
    pub fn oracle(mdd: &'a MassDistribution, kin: &Kinematics) -> Result<Self> {
        let cfg = QuadratureConfig {
            target_abs_error: 1e-13,
            max_panels: 400_000,
            truncation_tail_bound: 1e-16,
            endpoint_rule: EndpointRule::TanhSinh,
            panel_order: 30,
        };
        Self::build(mdd, kin, cfg, Style::Oracle)
    }

    fn build(mdd: &'a MassDistribution, kin: &Kinematics, cfg: QuadratureConfig, style: Style) -> Result<Self> {
        if (kin.xi0 - mdd.xi0()).abs() > 1e-14 * mdd.xi0() {
            return Err(Error::InvalidInput(format!(
                "kinematics xi0 = {} does not match the density's xi0 = {}",
                kin.xi0,
                mdd.xi0()
            )));
        }
        Ok(AmplitudeIntegrator {
            mdd,
            kin: *kin,
            cfg,
            rules: RuleSet::new(cfg.panel_order, mdd.alpha(), cfg.endpoint_rule),
            smooth_rules: RuleSet::new(cfg.panel_order, 0.0, EndpointRule::JacobiWeighted),
            style,
        })
    }

    pub fn kinematics(&self) -> &Kinematics {
        &self.kin
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    /// `A(τ)` via the ξ-form.
    pub fn amplitude(&self, tau: f64) -> Result<AmplitudeValue> {
        check_tau(tau)?;
        self.amplitude_signed(tau, Form::Xi)
    }

    /// `A(τ)` via the η-form `∫_{η₀}^∞ (η/ξ) Ω(ξ(η)) e^{-iητ} dη`.
    pub fn amplitude_eta_form(&self, tau: f64) -> Result<AmplitudeValue> {
        check_tau(tau)?;
        self.amplitude_signed(tau, Form::Eta)
    }

    /// `A(-τ)`, evaluated with the phase sign flipped.
    pub fn amplitude_reflected(&self, tau: f64) -> Result<AmplitudeValue> {
        check_tau(tau)?;
        self.amplitude_signed(-tau, Form::Xi)
    }

    /// `∂_τ A(τ) = -i ∫ η Ω e^{-iητ} dξ`.
    pub fn derivative(&self, tau: f64) -> Result<AmplitudeValue> {
        Ok(self.pair(tau)?.1)
    }

    /// `(A(τ), ∂_τ A(τ))` sharing the amplitude pass.
    pub fn pair(&self, tau: f64) -> Result<(AmplitudeValue, AmplitudeValue)> {
        check_tau(tau)?;
        self.require_first_moment()?;
        let a = self.amplitude_signed(tau, Form::Xi)?;
        let kin = self.kin;
        let (layout, tail_error) = self.xi_layout(tau);
        let phase = move |d: f64| {
            let de = kin.eta_offset(d);
            de * Complex64::cis(-de * tau)
        };
        let r = |d: f64| phase(d) * self.mdd.regular_at_offset(d);
        let b = integrate(&r, &layout, &self.rules, self.cfg.target_abs_error, self.cfg.max_panels);
        let shift = Complex64::cis(-kin.eta0 * tau);
        let tilde_a = a.value * shift.conj();
        let value = Complex64::new(0.0, -1.0) * shift * (tilde_a * kin.eta0 + b.value);
        let abs_error = kin.eta0 * a.abs_error_estimate + b.abs_error + tail_error * kin.chi();
        let da = AmplitudeValue {
            value,
            abs_error_estimate: abs_error,
            tau,
        };
        if !b.converged || abs_error > self.cfg.target_abs_error * kin.eta0.max(1.0) {
            return Err(Error::ConvergenceFailure {
                tau,
                value,
                abs_error,
                target: self.cfg.target_abs_error * kin.eta0.max(1.0),
            });
        }
        Ok((a, da))
    }

    /// `∫ Ω η^k dξ` and its error estimate.
    pub fn moment(&self, k: u32) -> Result<(f64, f64)> {
        if !self.mdd.has_finite_moment(k) {
            return Err(Error::domain(format!(
                "moment {k} of {} diverges",
                self.mdd.name()
            )));
        }
        let kin = self.kin;
        let bound = self.cfg.truncation_tail_bound / kin.chi().powi(k as i32);
        let trunc = self.mdd.truncation(bound, k);
        let layout = Layout {
            length: trunc.upper - kin.xi0,
            cuts: self.cuts(self.mdd.feature_width()),
            max_width: self.mdd.feature_width(),
        };
        let r = |d: f64| Complex64::new(self.mdd.regular_at_offset(d) * kin.eta(kin.xi0 + d).powi(k as i32), 0.0);
        let out = integrate(&r, &layout, &self.rules, self.cfg.target_abs_error, self.cfg.max_panels);
        let err = out.abs_error + self.cfg.truncation_tail_bound;
        if !out.converged {
            return Err(Error::ConvergenceFailure {
                tau: 0.0,
                value: out.value,
                abs_error: err,
                target: self.cfg.target_abs_error,
            });
        }
        Ok((out.value.re, err))
    }

    fn require_first_moment(&self) -> Result<()> {
        if self.mdd.has_finite_moment(1) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "the first moment of {} diverges, so the amplitude derivative does not exist",
                self.mdd.name()
            )))
        }
    }

    fn panel_width(&self, tau: f64) -> f64 {
        let mut w = self.mdd.feature_width();
        if tau != 0.0 {
            w = w.min(2.0 * PI / tau.abs());
        }
        match self.style {
            Style::Baseline => w,
            Style::Oracle => 0.5 * w,
        }
    }

    /// Mandatory cuts in the offset variable.
    fn cuts(&self, width: f64) -> Vec<f64> {
        let mut cuts: Vec<f64> = self.mdd.breakpoints().iter().map(|b| b - self.kin.xi0).collect();
        if self.style == Style::Oracle {
            cuts.push(0.37 * width);
        }
        cuts
    }

    /// Layout in `d` and the bound on the discarded tail.
    fn xi_layout(&self, tau: f64) -> (Layout, f64) {
        let extra = u32::from(self.mdd.has_finite_moment(1));
        let bound = self.cfg.truncation_tail_bound / self.kin.chi();
        let trunc = self.mdd.truncation(bound, extra);
        let width = self.panel_width(tau);
        let layout = Layout {
            length: trunc.upper - self.kin.xi0,
            cuts: self.cuts(width),
            max_width: width,
        };
        let tail_error = if trunc.analytic_tail || self.mdd.support_end().is_some() {
            0.0
        } else {
            bound
        };
        (layout, tail_error)
    }

    fn amplitude_signed(&self, tau: f64, form: Form) -> Result<AmplitudeValue> {
        let kin = self.kin;
        let (layout, tail_error) = self.xi_layout(tau);
        let (main, tail) = match form {
            Form::Xi => {
                let r = |d: f64| Complex64::cis(-kin.eta_offset(d) * tau) * self.mdd.regular_at_offset(d);
                let main = integrate(&r, &layout, &self.rules, self.cfg.target_abs_error, self.cfg.max_panels);
                let tail = self.ray_tail(tau, layout.length, Form::Xi);
                (main, tail)
            }
            Form::Eta => {
                let eta_layout = self.eta_layout(&layout);
                let alpha = self.mdd.alpha();
                let r = |e: f64| {
                    // ξ(η) - ξ₀ = e(2η₀+e)/(ξ+ξ₀), so d^α = e^α ((2η₀+e)/(ξ+ξ₀))^α
                    let eta = kin.eta0 + e;
                    let xi = ((eta - kin.rho) * (eta + kin.rho)).sqrt();
                    let q = (2.0 * kin.eta0 + e) / (xi + kin.xi0);
                    let d = e * q;
                    let endpoint = if alpha == 0.0 { 1.0 } else { q.powf(alpha) };
                    Complex64::cis(-e * tau) * (eta / xi * endpoint * self.mdd.regular_at_offset(d))
                };
                let main = integrate(&r, &eta_layout, &self.rules, self.cfg.target_abs_error, self.cfg.max_panels);
                let tail = self.ray_tail(tau, layout.length, Form::Eta);
                (main, tail)
            }
        };
        let reduced = main.value + tail.map_or(Complex64::new(0.0, 0.0), |t| t.value);
        let value = reduced * Complex64::cis(-kin.eta0 * tau);
        let abs_error = main.abs_error + tail.map_or(0.0, |t| t.abs_error) + tail_error;
        let converged = main.converged && tail.is_none_or(|t| t.converged);
        if !converged || abs_error > self.cfg.target_abs_error {
            return Err(Error::ConvergenceFailure {
                tau,
                value,
                abs_error,
                target: self.cfg.target_abs_error,
            });
        }
        Ok(AmplitudeValue {
            value,
            abs_error_estimate: abs_error,
            tau,
        })
    }

    /// Maps the ξ layout to `e = η - η₀`. `dη ≤ dξ`, so the phase bound carries
    /// over; the feature width shrinks by `χ` because `dξ/dη ≤ χ`.
    fn eta_layout(&self, xi_layout: &Layout) -> Layout {
        let kin = self.kin;
        Layout {
            length: kin.eta_offset(xi_layout.length),
            cuts: xi_layout
                .cuts
                .iter()
                .filter(|&&c| c > 0.0)
                .map(|&c| kin.eta_offset(c))
                .collect(),
            max_width: xi_layout.max_width.min(self.mdd.feature_width() / kin.chi()),
        }
    }

    /// Remainder beyond the real-axis truncation for densities with an
    /// analytic continuation, integrated down a vertical ray into the
    /// half plane where `e^{-iητ}` decays.
    fn ray_tail(&self, tau: f64, length: f64, form: Form) -> Option<Outcome> {
        let trunc = self.mdd.truncation(self.cfg.truncation_tail_bound, 0);
        if !trunc.analytic_tail {
            return None;
        }
        let kin = self.kin;
        let sign = if tau < 0.0 { -1.0 } else { 1.0 };
        let x = kin.xi0 + length;
        let start = match form {
            Form::Xi => x,
            Form::Eta => kin.eta(x),
        };
        let c = start / (1.0 + start * tau.abs());
        let i = Complex64::new(0.0, 1.0);
        let r = |v: f64| {
            let s = c * v / (1.0 - v);
            let jac = c / ((1.0 - v) * (1.0 - v));
            let z = Complex64::new(start, -sign * s);
            let (eta, weight) = match form {
                Form::Xi => {
                    let eta = (z * z + kin.rho * kin.rho).sqrt();
                    (eta, self.mdd.density_complex(z).unwrap_or_default())
                }
                Form::Eta => {
                    let xi = (z * z - kin.rho * kin.rho).sqrt();
                    (z, z / xi * self.mdd.density_complex(xi).unwrap_or_default())
                }
            };
            let phase = (-i * (eta - kin.eta0) * tau).exp();
            -i * sign * jac * weight * phase
        };
        let layout = Layout {
            length: 1.0,
            cuts: Vec::new(),
            max_width: 0.125,
        };
        Some(integrate(
            &r,
            &layout,
            &self.smooth_rules,
            self.cfg.target_abs_error,
            self.cfg.max_panels,
        ))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must be finite and >= 0 (got {tau})")))
    }
}

pub fn amplitude(mdd: &MassDistribution, kin: &Kinematics, tau: f64, cfg: &QuadratureConfig) -> Result<AmplitudeValue> {
    AmplitudeIntegrator::new(mdd, kin, cfg)?.amplitude(tau)
}

pub fn amplitude_eta_form(
    mdd: &MassDistribution,
    kin: &Kinematics,
    tau: f64,
    cfg: &QuadratureConfig,
) -> Result<AmplitudeValue> {
    AmplitudeIntegrator::new(mdd, kin, cfg)?.amplitude_eta_form(tau)
}

pub fn amplitude_derivative(
    mdd: &MassDistribution,
    kin: &Kinematics,
    tau: f64,
    cfg: &QuadratureConfig,
) -> Result<AmplitudeValue> {
    AmplitudeIntegrator::new(mdd, kin, cfg)?.derivative(tau)
}

pub fn oracle_amplitude(mdd: &MassDistribution, kin: &Kinematics, tau: f64) -> Result<AmplitudeValue> {
    AmplitudeIntegrator::oracle(mdd, kin)?.amplitude(tau)
}

pub fn oracle_amplitude_derivative(mdd: &MassDistribution, kin: &Kinematics, tau: f64) -> Result<AmplitudeValue> {
    AmplitudeIntegrator::oracle(mdd, kin)?.derivative(tau)
}

/// `∫ Ω η^k dξ` (non-oscillatory).
pub fn moment(mdd: &MassDistribution, kin: &Kinematics, k: u32, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    AmplitudeIntegrator::new(mdd, kin, cfg)?.moment(k)
}

/// Amplitudes on a grid. Points are independent, so the result does not
/// depend on the thread count or evaluation order.
pub fn amplitude_series(
    mdd: &MassDistribution,
    kin: &Kinematics,
    grid: &TimeGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<AmplitudeValue>> {
    let integ = AmplitudeIntegrator::new(mdd, kin, cfg)?;
    collect_indexed(grid, |tau| integ.amplitude(tau))
}

pub fn amplitude_derivative_series(
    mdd: &MassDistribution,
    kin: &Kinematics,
    grid: &TimeGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<AmplitudeValue>> {
    let integ = AmplitudeIntegrator::new(mdd, kin, cfg)?;
    collect_indexed(grid, |tau| integ.derivative(tau))
}

fn collect_indexed<T, F>(grid: &TimeGrid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = grid.points().par_iter().map(|&tau| f(tau)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::AtGridPoint {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
