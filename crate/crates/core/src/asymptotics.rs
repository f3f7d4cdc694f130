//! Closed-form short- and long-time laws.
//!
//! Short times: `P ≈ 1 - π₀τ²`, `M ≈ a₀ - π₁τ²`, `Γ ≈ π₂τ`, with `a₀, a₁, a₂`
//! the moments of `η, η²/2, η³/6` under `Ω`.
//!
//! Long times are governed by the endpoint `ξ₀`:
//! `A ≈ c₀ e^{-i(π(1+α)/2 + η₀τ)} (χ_p/τ)^{1+α}`, `M ≈ M_p(∞)(1 + ζ_p τ^{-2})`
//! and `Γ ≈ 2(1+α)/τ`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::mdd::MassDistribution;
use crate::quadrature::{AmplitudeIntegrator, Kinematics, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeModel {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    /// Largest error estimate among the three moments.
    pub moment_error: f64,
}

impl ShortTimeModel {
    pub fn from_moments(a0: f64, a1: f64, a2: f64) -> Self {
        let pi0 = 2.0 * a1 - a0 * a0;
        ShortTimeModel {
            a0,
            a1,
            a2,
            pi0,
            pi1: a0 * a0 * a0 + 3.0 * (a2 - a0 * a1),
            pi2: 2.0 * pi0,
            moment_error: 0.0,
        }
    }
}

/// Moments of `η` under `Ω`. Requires three finite moments and a tail
/// `O(ξ^{-1-l₀})` with `l₀ > 5`.
pub fn short_time_model(mdd: &MassDistribution, kin: &Kinematics, cfg: &QuadratureConfig) -> Result<ShortTimeModel> {
    if !mdd.has_finite_moment(3) || !mdd.tail().decays_faster_than(5.0) {
        return Err(Error::domain(format!(
            "{} does not decay fast enough for the short-time expansion (needs l0 > 5)",
            mdd.name()
        )));
    }
    let cfg = QuadratureConfig {
        target_abs_error: cfg.target_abs_error.min(1e-12),
        ..*cfg
    };
    let integ = AmplitudeIntegrator::new(mdd, kin, &cfg)?;
    let (m1, e1) = integ.moment(1)?;
    let (m2, e2) = integ.moment(2)?;
    let (m3, e3) = integ.moment(3)?;
    let mut model = ShortTimeModel::from_moments(m1, 0.5 * m2, m3 / 6.0);
    model.moment_error = e1.max(e2).max(e3);
    Ok(model)
}

pub fn short_time_survival(model: &ShortTimeModel, tau: f64) -> f64 {
    1.0 - model.pi0 * tau * tau
}

pub fn short_time_mass(model: &ShortTimeModel, tau: f64) -> f64 {
    model.a0 - model.pi1 * tau * tau
}

pub fn short_time_rate(model: &ShortTimeModel, tau: f64) -> f64 {
    model.pi2 * tau
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTimeModel {
    pub alpha: f64,
    pub xi0: f64,
    pub rho: f64,
    /// `Γ(1+α) Ω₀(ξ₀)`.
    pub c0: f64,
    /// `√(1 + ρ²/ξ₀²)`.
    pub chi_p: f64,
    /// `√(ξ₀² + ρ²)`.
    pub m_p_inf: f64,
    /// `ξ₀`, the rest-frame limit.
    pub m_0_inf: f64,
    pub zeta_p: f64,
    /// Large-momentum variant of `zeta_p`.
    pub zeta_bar_p: f64,
    pub zeta_0: f64,
    pub kappa_p: f64,
    /// `ρ/η₀`.
    pub velocity: f64,
}

pub fn long_time_model(mdd: &MassDistribution, kin: &Kinematics) -> LongTimeModel {
    let alpha = mdd.alpha();
    let xi0 = kin.xi0;
    let rho = kin.rho;
    let s = 1.0 + alpha;
    let r = mdd.endpoint_log_derivative();
    let rho2 = rho * rho;
    let xi02 = xi0 * xi0;
    let chi_sq = 1.0 + rho2 / xi02;
    let c0 = (ln_gamma(s)).exp() * mdd.omega0_at_xi0();

    let zeta = |ratio: f64| s / xi0 * ((1.0 + 0.5 * alpha) / xi0 * ratio - r);
    let kappa_p = s * (2.0 + alpha) * rho2 / (xi02 * xi0)
        * (2.0 * r - (3.0 + alpha + (2.5 + alpha) * rho2 / xi02) / (xi0 * chi_sq));

    LongTimeModel {
        alpha,
        xi0,
        rho,
        c0,
        chi_p: chi_sq.sqrt(),
        m_p_inf: kin.eta0,
        m_0_inf: xi0,
        zeta_p: zeta(rho2 / (xi02 + rho2)),
        zeta_bar_p: zeta(1.0),
        zeta_0: -s * r / xi0,
        kappa_p,
        velocity: kin.endpoint_velocity(),
    }
}

impl LongTimeModel {
    fn exponent(&self) -> f64 {
        1.0 + self.alpha
    }
}

pub fn long_time_amplitude(model: &LongTimeModel, tau: f64) -> Complex64 {
    let s = model.exponent();
    let phase = FRAC_PI_2 * s + model.m_p_inf * tau;
    Complex64::cis(-phase) * (model.c0 * (model.chi_p / tau).powf(s))
}

pub fn long_time_survival(model: &LongTimeModel, tau: f64) -> f64 {
    model.c0 * model.c0 * (model.chi_p / tau).powf(2.0 * model.exponent())
}

/// `ρ ≫ ξ₀` form, with `χ_p` replaced by `ρ/ξ₀`.
pub fn long_time_survival_ultrarelativistic(model: &LongTimeModel, tau: f64) -> f64 {
    model.c0 * model.c0 * (model.rho / (model.xi0 * tau)).powf(2.0 * model.exponent())
}

/// `M_p(∞)(1 + ζ_p τ^{-2})`; at `ρ = 0` this is `ξ₀(1 + ζ₀τ^{-2})`.
pub fn asymptotic_mass(model: &LongTimeModel, tau: f64) -> f64 {
    model.m_p_inf * (1.0 + model.zeta_p / (tau * tau))
}

/// `ρ(1 + ζ̄_p τ^{-2})`, valid for `ρ ≫ ξ₀`.
pub fn asymptotic_mass_ultrarelativistic(model: &LongTimeModel, tau: f64) -> f64 {
    model.rho * (1.0 + model.zeta_bar_p / (tau * tau))
}

pub fn asymptotic_rate(model: &LongTimeModel, tau: f64) -> f64 {
    2.0 * model.exponent() / tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdd::{make_breit_wigner, make_toy_mdd};
    use proptest::prelude::*;

    fn model(alpha: f64, rho: f64) -> LongTimeModel {
        let mdd = make_toy_mdd(alpha, 1.0).unwrap();
        long_time_model(&mdd, &Kinematics::new(rho, 1.0).unwrap())
    }

    #[test]
    fn short_time_constants_for_toy() {
        let mdd = make_toy_mdd(0.0, 1.0).unwrap();
        let kin = Kinematics::new(0.0, 1.0).unwrap();
        let m = short_time_model(&mdd, &kin, &QuadratureConfig::default()).unwrap();
        // closed forms: a₀ = 1 + (e√π/2) erfc(1), ∫Ωξ² = 2
        assert!((m.a0 - 1.378_936_078_070_656_1).abs() < 1e-12);
        assert!((m.a1 - 1.0).abs() < 1e-12);
        assert_eq!(m.pi2, 2.0 * m.pi0);
        assert!(m.pi0 > 0.0);
    }

    #[test]
    fn short_time_rejects_power_tail() {
        let bw = make_breit_wigner(1.0, 0.2, 0.5).unwrap();
        let kin = Kinematics::new(0.0, 0.5).unwrap();
        assert!(matches!(
            short_time_model(&bw, &kin, &QuadratureConfig::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn short_time_laws() {
        let m = ShortTimeModel::from_moments(1.0, 0.75, 0.0);
        assert_eq!(m.pi0, 0.5);
        assert!((short_time_survival(&m, 0.1) - 0.995).abs() < 1e-15);
        assert_eq!(short_time_survival(&m, 0.0), 1.0);
        assert_eq!(short_time_mass(&m, 0.0), m.a0);
        assert_eq!(short_time_rate(&m, 0.0), 0.0);
    }

    #[test]
    fn long_time_constants() {
        let m = model(0.0, 0.0);
        assert_eq!(m.chi_p, 1.0);
        assert_eq!(m.kappa_p, 0.0);
        assert!((m.c0 - 2.0).abs() < 1e-15);
        assert!((m.zeta_0 - 1.0).abs() < 1e-15);
        assert_eq!(m.zeta_p, m.zeta_0);
        let m = model(0.0, 1.0);
        assert!((m.chi_p - 2f64.sqrt()).abs() < 1e-15);
        let m = model(0.0, 3.0);
        assert!((m.chi_p - 10f64.sqrt()).abs() < 1e-15);
        assert!((m.m_p_inf - 10f64.sqrt()).abs() < 1e-15);
        // frozen from the symbolic expression
        assert!((model(0.0, 2.0).kappa_p + 36.8).abs() < 1e-12);
        assert!((model(0.0, 3.0).kappa_p + 81.9).abs() < 1e-12);
    }

    #[test]
    fn long_time_survival_and_rate() {
        let m = model(0.0, 0.0);
        assert!((long_time_survival(&m, 100.0) - 4e-4).abs() < 1e-18);
        let m = model(1.0, 2.0);
        let a = long_time_amplitude(&m, 37.0);
        assert!((a.norm_sqr() / long_time_survival(&m, 37.0) - 1.0).abs() < 1e-14);
        assert!((asymptotic_rate(&m, 100.0) - 0.04).abs() < 1e-16);
        let m0 = model(2.0, 0.0);
        assert!((asymptotic_mass(&m0, 10.0) - (1.0 + m0.zeta_0 / 100.0)).abs() < 1e-15);
    }

    #[test]
    fn ultrarelativistic_limits() {
        let m = model(1.0, 1e4);
        let t = 150.0;
        assert!((long_time_survival_ultrarelativistic(&m, t) / long_time_survival(&m, t) - 1.0).abs() < 1e-7);
        assert!((m.zeta_p / m.zeta_bar_p - 1.0).abs() < 1e-7);
        assert!((asymptotic_mass_ultrarelativistic(&m, t) / asymptotic_mass(&m, t) - 1.0).abs() < 1e-7);
    }

    proptest! {
        #[test]
        fn chi_identities(alpha in 0.0f64..3.0, xi0 in 0.1f64..5.0, rho in 0.0f64..20.0) {
            let mdd = make_toy_mdd(alpha, xi0).unwrap();
            let kin = Kinematics::new(rho, xi0).unwrap();
            let m = long_time_model(&mdd, &kin);
            prop_assert!(m.chi_p >= 1.0);
            prop_assert!((m.chi_p * m.chi_p - (1.0 + rho * rho / (xi0 * xi0))).abs() <= 1e-12 * m.chi_p * m.chi_p);
            prop_assert!((m.chi_p - m.m_p_inf / m.m_0_inf).abs() <= 4.0 * f64::EPSILON * m.chi_p);
            let bigger = long_time_model(&mdd, &Kinematics::new(rho + 0.5, xi0).unwrap());
            prop_assert!(bigger.chi_p > m.chi_p);
        }
    }
}
