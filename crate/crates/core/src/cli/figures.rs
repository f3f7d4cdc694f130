//! Datasets behind the figures: toy densities with `ξ₀ = 1`, one dataset per
//! labelled curve.

use rayon::prelude::*;

use crate::asymptotics::{
    asymptotic_mass, asymptotic_rate, long_time_model, long_time_survival, LongTimeModel,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mdd::make_toy_mdd;
use crate::observables::{decay_curve_partial, DecayCurve, PointFlag};
use crate::quadrature::{Kinematics, QuadratureConfig};

use super::output::Table;

pub const FIGURE_COUNT: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Survival,
    AbsLogSurvival,
    MomentumRatio,
    ScalingRatio,
    Mass,
    AbsLogMassDeviation,
    MassRatio,
    Rate,
    AbsLogRate,
    RateRatio,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::Survival => "P",
            Quantity::AbsLogSurvival => "abs_log_P",
            Quantity::MomentumRatio => "P_ratio",
            Quantity::ScalingRatio => "P_scaling_ratio",
            Quantity::Mass => "M",
            Quantity::AbsLogMassDeviation => "abs_log_abs_M_deviation",
            Quantity::MassRatio => "M_ratio",
            Quantity::Rate => "Gamma",
            Quantity::AbsLogRate => "abs_log_Gamma",
            Quantity::RateRatio => "Gamma_ratio",
        }
    }

    /// Abscissa is `ln τ` rather than `τ`.
    fn logarithmic(self) -> bool {
        matches!(
            self,
            Quantity::AbsLogSurvival | Quantity::AbsLogMassDeviation | Quantity::AbsLogRate
        )
    }

    fn needs_rest_frame(self) -> bool {
        matches!(
            self,
            Quantity::MomentumRatio | Quantity::ScalingRatio | Quantity::MassRatio | Quantity::RateRatio
        )
    }
}

struct FigureSpec {
    quantity: Quantity,
    /// Range of `τ`, or of `ln τ` for logarithmic quantities.
    range: (f64, f64),
    /// (label, alpha, rho)
    curves: Vec<(char, f64, f64)>,
}

fn labelled(pairs: &[(f64, f64)]) -> Vec<(char, f64, f64)> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(alpha, rho))| ((b'a' + k as u8) as char, alpha, rho))
        .collect()
}

fn fixed_alpha(alpha: f64, rhos: &[f64]) -> Vec<(char, f64, f64)> {
    labelled(&rhos.iter().map(|&r| (alpha, r)).collect::<Vec<_>>())
}

fn spec(n: u32) -> Result<FigureSpec> {
    use Quantity::*;
    let (quantity, range, curves) = match n {
        1 => (Survival, (0.0, 20.0), fixed_alpha(0.0, &[0.0, 1.0, 2.0, 3.0, 4.0])),
        2 => (Survival, (0.0, 15.0), fixed_alpha(1.0, &[0.0, 1.0, 2.0, 3.0, 4.0])),
        3 => (
            AbsLogSurvival,
            (-1.0, 5.0),
            labelled(&[
                (0.0, 5.0),
                (0.0, 3.0),
                (0.0, 0.0),
                (1.0, 5.0),
                (1.0, 2.0),
                (2.0, 4.0),
                (2.0, 2.0),
                (1.0, 0.0),
                (2.0, 0.0),
            ]),
        ),
        4 => (MomentumRatio, (0.0, 50.0), fixed_alpha(0.0, &[1.0, 2.0, 3.0, 4.0, 5.0])),
        5 => (
            MomentumRatio,
            (0.0, 50.0),
            labelled(&[(1.0, 2.0), (1.0, 3.0), (2.0, 2.0), (1.0, 4.0)]),
        ),
        6 => (ScalingRatio, (0.0, 50.0), fixed_alpha(0.0, &[5.0, 4.0, 3.0, 2.0, 1.0])),
        7 => (
            ScalingRatio,
            (0.0, 60.0),
            labelled(&[(2.0, 4.0), (1.0, 5.0), (2.0, 3.0), (1.0, 2.0), (1.0, 1.0)]),
        ),
        8 => (Mass, (0.0, 15.0), fixed_alpha(1.0, &[0.0, 1.0, 2.0, 3.0, 4.0])),
        9 => (Mass, (0.0, 15.0), fixed_alpha(2.0, &[0.0, 1.0, 2.0, 3.0, 4.0])),
        10 => (Rate, (0.0, 30.0), fixed_alpha(1.0, &[4.0, 3.0, 2.0, 1.0, 0.0])),
        11 => (Rate, (0.0, 30.0), fixed_alpha(2.0, &[4.0, 3.0, 2.0, 1.0, 0.0])),
        12 => (
            AbsLogMassDeviation,
            (1.0, 3.3),
            labelled(&[(2.0, 4.0), (2.0, 2.0), (1.0, 2.0), (2.0, 1.0), (0.0, 3.0), (0.0, 5.0)]),
        ),
        13 => (
            MassRatio,
            (0.0, 10.0),
            labelled(&[
                (1.0, 1.0),
                (0.0, 1.0),
                (1.0, 2.0),
                (0.0, 2.0),
                (2.0, 3.0),
                (1.0, 3.0),
                (1.0, 4.0),
                (0.0, 4.0),
            ]),
        ),
        14 => (
            AbsLogRate,
            (1.5, 3.8),
            labelled(&[
                (2.0, 0.0),
                (2.0, 2.0),
                (2.0, 4.0),
                (1.0, 0.0),
                (1.0, 2.0),
                (1.0, 5.0),
                (0.0, 0.0),
                (0.0, 3.0),
                (0.0, 5.0),
            ]),
        ),
        15 => (
            RateRatio,
            (0.0, 30.0),
            labelled(&[(1.0, 4.0), (2.0, 3.0), (2.0, 2.0), (0.0, 2.0), (0.0, 1.0)]),
        ),
        _ => {
            return Err(Error::InvalidInput(format!(
                "figure: number must be in 1..={FIGURE_COUNT} (got {n})"
            )))
        }
    };
    Ok(FigureSpec {
        quantity,
        range,
        curves,
    })
}

const LINEAR_STEP: f64 = 0.1;
const LOG_POINTS: usize = 116;

fn abscissae(spec: &FigureSpec) -> Vec<f64> {
    let (lo, hi) = spec.range;
    let count = if spec.quantity.logarithmic() {
        LOG_POINTS
    } else {
        ((hi - lo) / LINEAR_STEP).round() as usize + 1
    };
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { hi } else { lo + (hi - lo) * (k as f64 / last) })
        .collect()
}

/// One dataset per curve; the second value is false when any point fell
/// short of the quadrature target.
pub fn figure_tables(n: u32, cfg: &QuadratureConfig) -> Result<(Vec<(String, Table)>, bool)> {
    let spec = spec(n)?;
    let xs = abscissae(&spec);
    let taus: Vec<f64> = if spec.quantity.logarithmic() {
        xs.iter().map(|x| x.exp()).collect()
    } else {
        xs.clone()
    };
    let results: Vec<Result<(String, Table, bool)>> = spec
        .curves
        .par_iter()
        .map(|&(label, alpha, rho)| {
            let (table, converged) = curve_table(&spec, alpha, rho, &xs, &taus, cfg)?;
            Ok((format!("figure{n:02}_{label}"), table, converged))
        })
        .collect();
    let mut out = Vec::new();
    let mut all_converged = true;
    for r in results {
        let (name, table, converged) = r?;
        all_converged &= converged;
        out.push((name, table));
    }
    Ok((out, all_converged))
}

/// Parameters of every curve of figure `n`: (label, alpha, rho).
pub fn figure_curves(n: u32) -> Result<Vec<(char, f64, f64)>> {
    Ok(spec(n)?.curves)
}

fn curve_table(
    spec: &FigureSpec,
    alpha: f64,
    rho: f64,
    xs: &[f64],
    taus: &[f64],
    cfg: &QuadratureConfig,
) -> Result<(Table, bool)> {
    let mdd = make_toy_mdd(alpha, 1.0)?;
    let kin = Kinematics::for_mdd(&mdd, rho)?;
    let model = long_time_model(&mdd, &kin);
    let grid = TimeGrid::from_points(taus.to_vec())?;
    let moving = decay_curve_partial(&mdd, &kin, &grid, cfg)?;
    let rest = if spec.quantity.needs_rest_frame() {
        let rest_kin = Kinematics::for_mdd(&mdd, 0.0)?;
        let rest_grid = if spec.quantity == Quantity::ScalingRatio {
            TimeGrid::from_points(taus.iter().map(|t| t / kin.chi()).collect())?
        } else {
            grid.clone()
        };
        Some(decay_curve_partial(&mdd, &rest_kin, &rest_grid, cfg)?)
    } else {
        None
    };
    let converged = !moving.any_not_converged() && rest.as_ref().is_none_or(|r| !r.any_not_converged());

    let x_name = if spec.quantity.logarithmic() { "log_tau" } else { "tau" };
    let has_asymptote = asymptote(spec.quantity, &model, 1.0).is_some();
    let mut columns = vec![x_name.to_string(), spec.quantity.column().to_string()];
    if has_asymptote {
        columns.push("asymptote".to_string());
    }
    columns.push("flag".to_string());
    let mut table = Table::new(columns);
    for (k, (&x, &tau)) in xs.iter().zip(taus).enumerate() {
        let (value, flag) = point_value(spec.quantity, &model, &moving, rest.as_ref(), k);
        let mut row = vec![Some(x), value];
        if has_asymptote {
            row.push(if tau > 0.0 { asymptote(spec.quantity, &model, tau) } else { None });
        }
        table.push(row, flag.as_str());
    }
    Ok((table, converged))
}

fn worst(a: PointFlag, b: PointFlag) -> PointFlag {
    if a == PointFlag::Ok {
        b
    } else {
        a
    }
}

fn point_value(
    q: Quantity,
    model: &LongTimeModel,
    moving: &DecayCurve,
    rest: Option<&DecayCurve>,
    k: usize,
) -> (Option<f64>, PointFlag) {
    let flag = moving.flags[k];
    let both = |rest: &DecayCurve| worst(flag, rest.flags[k]);
    let ratio = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    };
    match q {
        Quantity::Survival => (Some(moving.survival[k]), flag),
        Quantity::AbsLogSurvival => (Some(moving.survival[k].ln().abs()), flag),
        Quantity::Mass => (moving.mass[k], flag),
        Quantity::Rate => (moving.rate[k], flag),
        Quantity::AbsLogMassDeviation => (
            moving.mass[k].map(|m| (m / model.m_p_inf - 1.0).abs().ln().abs()),
            flag,
        ),
        Quantity::AbsLogRate => (moving.rate[k].map(|g| g.ln().abs()), flag),
        Quantity::MomentumRatio | Quantity::ScalingRatio => {
            let rest = rest.expect("rest-frame curve");
            (Some(moving.survival[k] / rest.survival[k]), both(rest))
        }
        Quantity::MassRatio => {
            let rest = rest.expect("rest-frame curve");
            (ratio(moving.mass[k], rest.mass[k]), both(rest))
        }
        Quantity::RateRatio => {
            let rest = rest.expect("rest-frame curve");
            // 0/0 at τ = 0
            let v = if moving.grid[k] == 0.0 { None } else { ratio(moving.rate[k], rest.rate[k]) };
            (v, both(rest))
        }
    }
}

/// Closed-form long-time value of the plotted quantity at `τ > 0`.
fn asymptote(q: Quantity, model: &LongTimeModel, tau: f64) -> Option<f64> {
    match q {
        Quantity::Survival => Some(long_time_survival(model, tau)),
        Quantity::AbsLogSurvival => Some(long_time_survival(model, tau).ln().abs()),
        Quantity::MomentumRatio => Some(model.chi_p.powf(2.0 * (1.0 + model.alpha))),
        Quantity::ScalingRatio => Some(1.0 + model.kappa_p / (tau * tau)),
        Quantity::Mass => Some(asymptotic_mass(model, tau)),
        Quantity::AbsLogMassDeviation => {
            (model.zeta_p != 0.0).then(|| (model.zeta_p / (tau * tau)).abs().ln().abs())
        }
        Quantity::MassRatio => Some(model.chi_p),
        Quantity::Rate => Some(asymptotic_rate(model, tau)),
        Quantity::AbsLogRate => Some(asymptotic_rate(model, tau).ln().abs()),
        Quantity::RateRatio => Some(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_has_labelled_curves() {
        for n in 1..=FIGURE_COUNT {
            let s = spec(n).unwrap();
            assert!(!s.curves.is_empty());
            assert_eq!(s.curves[0].0, 'a');
        }
        assert!(spec(0).is_err());
        assert!(spec(16).is_err());
        assert_eq!(spec(3).unwrap().curves.len(), 9);
    }

    #[test]
    fn abscissae_cover_figure_ranges() {
        let xs = abscissae(&spec(1).unwrap());
        assert_eq!((xs[0], *xs.last().unwrap(), xs.len()), (0.0, 20.0, 201));
        let xs = abscissae(&spec(3).unwrap());
        assert_eq!(xs[0], -1.0);
        assert_eq!(*xs.last().unwrap(), 5.0);
    }
}
