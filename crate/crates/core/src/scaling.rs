//! Long-time scaling law `P_p(τ) ≈ P_0(τ/χ_p)` and its `κ_p τ^{-2}` correction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::long_time_model;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mdd::MassDistribution;
use crate::observables::survival_probability;
use crate::quadrature::{AmplitudeIntegrator, Kinematics, QuadratureConfig};

pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln(value)`.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares line through `(ln τ, ln value)` for `τ` in `window`.
pub fn fit_power_law(series: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= window.0 && *t <= window.1) {
        if !(v > 0.0) || !(t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "power-law fit needs positive data (got {v} at tau = {t})"
            )));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    let (slope, intercept, residual) = least_squares(&xs, &ys)?;
    Ok(PowerLawFit {
        slope,
        intercept,
        residual,
        points: xs.len(),
    })
}

/// Returns (slope, intercept, rms residual).
fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            found: xs.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("fit abscissae are all equal".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (ss / n).sqrt()))
}

/// Mean of `(value - 1) τ²` over the window: the `τ^{-2}` coefficient of a
/// ratio tending to one.
pub fn fit_inverse_square_coefficient(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let vals: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .map(|(t, v)| (v - 1.0) * t * t)
        .collect();
    if vals.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            found: vals.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Limit of a series as `τ → ∞` by regressing it on `τ^{-2}`.
pub fn extrapolate_inverse_square(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .map(|(t, v)| (1.0 / (t * t), *v))
        .unzip();
    Ok(least_squares(&xs, &ys)?.1)
}

fn survivals(integ: &AmplitudeIntegrator<'_>, times: &[f64]) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = times
        .par_iter()
        .map(|&t| integ.amplitude(t).map(|a| survival_probability(&a)))
        .collect();
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

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("rho must be >= 0 (got {rho})")))
    }
}

/// `(τ, P_p(τ)/P_0(τ/χ_p))`, both survivals by direct quadrature.
pub fn scaling_ratio_curve(
    mdd: &MassDistribution,
    rho: f64,
    grid: &TimeGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    check_rho(rho)?;
    let moving = Kinematics::for_mdd(mdd, rho)?;
    let rest = Kinematics::for_mdd(mdd, 0.0)?;
    let chi = moving.chi();
    let pm = survivals(&AmplitudeIntegrator::new(mdd, &moving, cfg)?, grid.points())?;
    let scaled: Vec<f64> = grid.points().iter().map(|t| t / chi).collect();
    let p0 = survivals(&AmplitudeIntegrator::new(mdd, &rest, cfg)?, &scaled)?;
    Ok(ratio_series(grid, &pm, &p0))
}

/// `(τ, P_p(τ)/P_0(τ))`.
pub fn momentum_ratio_curve(
    mdd: &MassDistribution,
    rho: f64,
    grid: &TimeGrid,
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    check_rho(rho)?;
    let moving = Kinematics::for_mdd(mdd, rho)?;
    let rest = Kinematics::for_mdd(mdd, 0.0)?;
    let pm = survivals(&AmplitudeIntegrator::new(mdd, &moving, cfg)?, grid.points())?;
    let p0 = survivals(&AmplitudeIntegrator::new(mdd, &rest, cfg)?, grid.points())?;
    Ok(ratio_series(grid, &pm, &p0))
}

fn ratio_series(grid: &TimeGrid, num: &[f64], den: &[f64]) -> Vec<(f64, f64)> {
    grid.points()
        .iter()
        .zip(num.iter().zip(den))
        .map(|(t, (n, d))| (*t, n / d))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingOptions {
    pub window: (f64, f64),
    pub points: usize,
    pub kappa_tolerance: f64,
    pub slope_tolerance: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            window: (80.0, 200.0),
            points: 25,
            kappa_tolerance: 0.15,
            slope_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rho: f64,
    pub chi_p: f64,
    pub window: (f64, f64),
    pub ratio_curve: Vec<(f64, f64)>,
    pub fitted_correction_coeff: f64,
    pub predicted_kappa_p: f64,
    pub fitted_powerlaw_slope: f64,
    pub predicted_slope: f64,
    pub momentum_ratio_asymptote: f64,
    pub predicted_momentum_ratio: f64,
    pub kappa_pass: bool,
    pub slope_pass: bool,
    pub passed: bool,
}

/// Relative agreement, treating an exact zero prediction as needing an exact zero.
pub fn within_relative(measured: f64, predicted: f64, tol: f64) -> bool {
    (measured - predicted).abs() <= tol * predicted.abs()
}

pub fn verify_scaling(
    mdd: &MassDistribution,
    rho: f64,
    opts: &ScalingOptions,
    cfg: &QuadratureConfig,
) -> Result<ScalingReport> {
    check_rho(rho)?;
    let (lo, hi) = opts.window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!("scaling window must satisfy 0 < min < max (got {lo}..{hi})")));
    }
    let grid = TimeGrid::geometric(lo, hi, opts.points)?;
    let moving = Kinematics::for_mdd(mdd, rho)?;
    let rest = Kinematics::for_mdd(mdd, 0.0)?;
    let model = long_time_model(mdd, &moving);
    let chi = moving.chi();

    let moving_integ = AmplitudeIntegrator::new(mdd, &moving, cfg)?;
    let rest_integ = AmplitudeIntegrator::new(mdd, &rest, cfg)?;
    let pm = survivals(&moving_integ, grid.points())?;
    let scaled: Vec<f64> = grid.points().iter().map(|t| t / chi).collect();
    let p0_scaled = survivals(&rest_integ, &scaled)?;
    let p0 = survivals(&rest_integ, grid.points())?;

    let ratio_curve = ratio_series(&grid, &pm, &p0_scaled);
    let momentum_curve = ratio_series(&grid, &pm, &p0);
    let survival_curve: Vec<(f64, f64)> = grid.points().iter().copied().zip(pm.iter().copied()).collect();

    let fitted_correction_coeff = fit_inverse_square_coefficient(&ratio_curve, opts.window)?;
    let slope = fit_power_law(&survival_curve, opts.window)?.slope;
    let predicted_slope = -2.0 * (1.0 + mdd.alpha());
    let kappa_pass = within_relative(fitted_correction_coeff, model.kappa_p, opts.kappa_tolerance);
    let slope_pass = within_relative(slope, predicted_slope, opts.slope_tolerance);
    Ok(ScalingReport {
        rho,
        chi_p: model.chi_p,
        window: opts.window,
        ratio_curve,
        fitted_correction_coeff,
        predicted_kappa_p: model.kappa_p,
        fitted_powerlaw_slope: slope,
        predicted_slope,
        momentum_ratio_asymptote: extrapolate_inverse_square(&momentum_curve, opts.window)?,
        predicted_momentum_ratio: chi.powf(-predicted_slope),
        kappa_pass,
        slope_pass,
        passed: kappa_pass && slope_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdd::make_toy_mdd;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law_and_constant() {
        let series: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64 * 10.0, 3.0 * (k as f64 * 10.0).powi(-3))).collect();
        let fit = fit_power_law(&series, (0.0, 1e9)).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
        let flat: Vec<(f64, f64)> = series.iter().map(|(t, _)| (*t, 0.7)).collect();
        assert!(fit_power_law(&flat, (0.0, 1e9)).unwrap().slope.abs() < 1e-14);
    }

    #[test]
    fn fits_need_five_points() {
        let series: Vec<(f64, f64)> = (1..=4).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(
            fit_power_law(&series, (0.0, 10.0)),
            Err(Error::InsufficientData { found: 4, needed: 5 })
        ));
        assert!(fit_inverse_square_coefficient(&series, (0.0, 10.0)).is_err());
    }

    #[test]
    fn inverse_square_helpers() {
        let series: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let t = 50.0 + 10.0 * k as f64;
                (t, 5.0 + 2.0 / (t * t))
            })
            .collect();
        assert!((extrapolate_inverse_square(&series, (0.0, 1e3)).unwrap() - 5.0).abs() < 1e-10);
        let near_one: Vec<(f64, f64)> = series.iter().map(|(t, _)| (*t, 1.0 - 36.8 / (t * t))).collect();
        assert!((fit_inverse_square_coefficient(&near_one, (0.0, 1e3)).unwrap() + 36.8).abs() < 1e-9);
    }

    #[test]
    fn rest_frame_ratios_are_identically_one() {
        let mdd = make_toy_mdd(1.0, 1.0).unwrap();
        let grid = TimeGrid::linear(0.0, 30.0, 7).unwrap();
        let cfg = QuadratureConfig::default();
        for (_, r) in scaling_ratio_curve(&mdd, 0.0, &grid, &cfg).unwrap() {
            assert_eq!(r, 1.0);
        }
        for (_, r) in momentum_ratio_curve(&mdd, 0.0, &grid, &cfg).unwrap() {
            assert_eq!(r, 1.0);
        }
        let report = verify_scaling(&mdd, 0.0, &ScalingOptions::default(), &cfg).unwrap();
        assert_eq!(report.fitted_correction_coeff, 0.0);
        assert_eq!(report.predicted_kappa_p, 0.0);
        assert!(report.kappa_pass);
    }

    #[test]
    fn momentum_ratio_starts_at_one() {
        let mdd = make_toy_mdd(0.0, 1.0).unwrap();
        let grid = TimeGrid::single(0.0).unwrap();
        let r = momentum_ratio_curve(&mdd, 2.0, &grid, &QuadratureConfig::default()).unwrap();
        assert!((r[0].1 - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn power_law_fit_recovers_exponent(c in 0.1f64..10.0, k in -8.0f64..2.0) {
            let series: Vec<(f64, f64)> = (0..12).map(|i| {
                let t = 50.0 * 1.12f64.powi(i);
                (t, c * t.powf(k))
            }).collect();
            let fit = fit_power_law(&series, (1.0, 1e6)).unwrap();
            prop_assert!((fit.slope - k).abs() < 1e-9);
        }
    }
}
