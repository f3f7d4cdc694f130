//! Survival probability, instantaneous mass and instantaneous decay rate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mdd::MassDistribution;
use crate::quadrature::{AmplitudeIntegrator, AmplitudeValue, Kinematics, QuadratureConfig};

/// Ratios `∂A/A` are refused when `|A|` is within this factor of its error.
pub const CONDITIONING_FACTOR: f64 = 10.0;

pub fn survival_probability(a: &AmplitudeValue) -> f64 {
    a.value.norm_sqr()
}

/// First-order error bound of `|A|²`.
pub fn survival_error(a: &AmplitudeValue) -> f64 {
    2.0 * a.value.norm() * a.abs_error_estimate
}

fn log_derivative(a: &AmplitudeValue, da: &AmplitudeValue) -> Result<Complex64> {
    let modulus = a.value.norm();
    if !(modulus > CONDITIONING_FACTOR * a.abs_error_estimate) {
        return Err(Error::IllConditioned {
            tau: a.tau,
            modulus,
            abs_error: a.abs_error_estimate,
        });
    }
    Ok(da.value / a.value)
}

/// `M = -Im(∂A/A)`.
pub fn instantaneous_mass(a: &AmplitudeValue, da: &AmplitudeValue) -> Result<f64> {
    Ok(-log_derivative(a, da)?.im)
}

/// `Γ = -2 Re(∂A/A)`.
pub fn instantaneous_rate(a: &AmplitudeValue, da: &AmplitudeValue) -> Result<f64> {
    Ok(-2.0 * log_derivative(a, da)?.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Ok,
    /// `|A|` too small relative to its error for mass and rate.
    IllConditioned,
    /// Quadrature stopped on its panel budget; values are best effort.
    NotConverged,
    /// The density has no first moment, so `∂A` does not exist.
    DerivativeUnavailable,
}

impl PointFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::IllConditioned => "ill_conditioned",
            PointFlag::NotConverged => "not_converged",
            PointFlag::DerivativeUnavailable => "derivative_unavailable",
        }
    }
}

/// Observables on a time grid. Mass and rate are `None` at flagged points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub grid: Vec<f64>,
    pub survival: Vec<f64>,
    pub mass: Vec<Option<f64>>,
    pub rate: Vec<Option<f64>>,
    pub amplitude: Vec<AmplitudeValue>,
    pub derivative: Vec<Option<AmplitudeValue>>,
    /// `|A(τ)|`, the conditioning of the ratio `∂A/A`.
    pub condition: Vec<f64>,
    pub flags: Vec<PointFlag>,
}

impl DecayCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn all_ok(&self) -> bool {
        self.flags.iter().all(|f| *f == PointFlag::Ok)
    }

    pub fn any_not_converged(&self) -> bool {
        self.flags.contains(&PointFlag::NotConverged)
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    a: AmplitudeValue,
    da: Option<AmplitudeValue>,
    mass: Option<f64>,
    rate: Option<f64>,
    flag: PointFlag,
}

/// Best-effort value from a result, remembering whether it converged.
fn salvage(r: Result<AmplitudeValue>, tau: f64) -> Result<(AmplitudeValue, bool)> {
    match r {
        Ok(a) => Ok((a, true)),
        Err(Error::ConvergenceFailure { value, abs_error, .. }) => Ok((
            AmplitudeValue {
                value,
                abs_error_estimate: abs_error,
                tau,
            },
            false,
        )),
        Err(e) => Err(e),
    }
}

fn point(integ: &AmplitudeIntegrator<'_>, has_derivative: bool, tau: f64, strict: bool) -> Result<Point> {
    let fail = |r: Result<AmplitudeValue>| if strict { r.map(|a| (a, true)) } else { salvage(r, tau) };
    if !has_derivative {
        let (a, converged) = fail(integ.amplitude(tau))?;
        return Ok(Point {
            a,
            da: None,
            mass: None,
            rate: None,
            flag: if converged {
                PointFlag::DerivativeUnavailable
            } else {
                PointFlag::NotConverged
            },
        });
    }
    let (a, da) = match integ.pair(tau) {
        Ok(pair) => pair,
        Err(Error::ConvergenceFailure { .. }) if !strict => {
            let (a, _) = salvage(integ.amplitude(tau), tau)?;
            return Ok(Point {
                a,
                da: None,
                mass: None,
                rate: None,
                flag: PointFlag::NotConverged,
            });
        }
        Err(e) => return Err(e),
    };
    let (mass, rate) = match (instantaneous_mass(&a, &da), instantaneous_rate(&a, &da)) {
        (Ok(m), Ok(g)) => (Some(m), Some(g)),
        _ => (None, None),
    };
    let flag = if mass.is_some() { PointFlag::Ok } else { PointFlag::IllConditioned };
    Ok(Point {
        a,
        da: Some(da),
        mass,
        rate,
        flag,
    })
}

fn assemble(grid: &TimeGrid, points: Vec<Point>) -> DecayCurve {
    DecayCurve {
        grid: grid.points().to_vec(),
        survival: points.iter().map(|p| survival_probability(&p.a)).collect(),
        mass: points.iter().map(|p| p.mass).collect(),
        rate: points.iter().map(|p| p.rate).collect(),
        amplitude: points.iter().map(|p| p.a).collect(),
        derivative: points.iter().map(|p| p.da).collect(),
        condition: points.iter().map(|p| p.a.value.norm()).collect(),
        flags: points.iter().map(|p| p.flag).collect(),
    }
}

fn curve(mdd: &MassDistribution, kin: &Kinematics, grid: &TimeGrid, cfg: &QuadratureConfig, strict: bool) -> Result<DecayCurve> {
    let integ = AmplitudeIntegrator::new(mdd, kin, cfg)?;
    let has_derivative = mdd.has_finite_moment(1);
    let results: Vec<Result<Point>> = grid
        .points()
        .par_iter()
        .map(|&tau| point(&integ, has_derivative, tau, strict))
        .collect();
    let points = results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::AtGridPoint {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(grid, points))
}

/// Observables on `grid`. Quadrature failures abort with the grid index;
/// amplitude near-zeros are flagged.
pub fn decay_curve(mdd: &MassDistribution, kin: &Kinematics, grid: &TimeGrid, cfg: &QuadratureConfig) -> Result<DecayCurve> {
    curve(mdd, kin, grid, cfg, true)
}

/// As [`decay_curve`], but points whose quadrature ran out of panels keep
/// their best-effort values and are flagged `NotConverged`.
pub fn decay_curve_partial(
    mdd: &MassDistribution,
    kin: &Kinematics,
    grid: &TimeGrid,
    cfg: &QuadratureConfig,
) -> Result<DecayCurve> {
    curve(mdd, kin, grid, cfg, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdd::{make_breit_wigner, make_toy_mdd};

    const A0_TOY: f64 = 1.378_936_078_070_656_1;

    fn value(z: Complex64, err: f64) -> AmplitudeValue {
        AmplitudeValue {
            value: z,
            abs_error_estimate: err,
            tau: 1.0,
        }
    }

    #[test]
    fn survival_is_phase_invariant() {
        assert_eq!(survival_probability(&value(Complex64::new(1.0, 0.0), 0.0)), 1.0);
        for theta in [0.0, 0.3, 2.0, -1.1] {
            let p = survival_probability(&value(Complex64::from_polar(0.1, theta), 0.0));
            assert!((p - 0.01).abs() < 1e-17);
        }
        assert!((survival_error(&value(Complex64::new(0.5, 0.0), 1e-3)) - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn guard_refuses_near_zero_amplitude() {
        let a = value(Complex64::new(1e-13, 0.0), 1e-13);
        let da = value(Complex64::new(0.0, -1.0), 1e-13);
        assert!(matches!(instantaneous_mass(&a, &da), Err(Error::IllConditioned { .. })));
        assert!(matches!(instantaneous_rate(&a, &da), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn time_zero_point() {
        let mdd = make_toy_mdd(0.0, 1.0).unwrap();
        let kin = Kinematics::new(0.0, 1.0).unwrap();
        let c = decay_curve(&mdd, &kin, &TimeGrid::single(0.0).unwrap(), &QuadratureConfig::default()).unwrap();
        assert!((c.survival[0] - 1.0).abs() < 1e-12);
        assert!(c.rate[0].unwrap().abs() < 1e-12);
        assert!((c.mass[0].unwrap() - A0_TOY).abs() < 1e-11);
        assert_eq!(c.flags[0], PointFlag::Ok);
    }

    #[test]
    fn breit_wigner_curve_flags_missing_derivative() {
        let mdd = make_breit_wigner(1.0, 0.2, 0.5).unwrap();
        let kin = Kinematics::new(1.0, 0.5).unwrap();
        let grid = TimeGrid::linear(0.0, 5.0, 3).unwrap();
        let c = decay_curve(&mdd, &kin, &grid, &QuadratureConfig::default()).unwrap();
        assert!(c.flags.iter().all(|f| *f == PointFlag::DerivativeUnavailable));
        assert!(c.mass.iter().all(Option::is_none));
        assert!((c.survival[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_curve_keeps_best_effort_values() {
        let mdd = make_toy_mdd(0.0, 1.0).unwrap();
        let kin = Kinematics::new(0.0, 1.0).unwrap();
        let cfg = QuadratureConfig {
            max_panels: 20,
            ..QuadratureConfig::default()
        };
        let grid = TimeGrid::from_points(vec![1.0, 800.0]).unwrap();
        assert!(decay_curve(&mdd, &kin, &grid, &cfg).is_err());
        let c = decay_curve_partial(&mdd, &kin, &grid, &cfg).unwrap();
        assert_eq!(c.flags, vec![PointFlag::Ok, PointFlag::NotConverged]);
        assert!(c.mass[1].is_none());
        assert!(c.survival[1].is_finite());
    }
}
