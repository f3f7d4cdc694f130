//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reldecay::asymptotics::{long_time_model, short_time_model};
use reldecay::observables::{decay_curve, instantaneous_mass, instantaneous_rate, survival_probability};
use reldecay::quadrature::{amplitude, oracle_amplitude, AmplitudeIntegrator};
use reldecay::scaling::{fit_inverse_square_coefficient, fit_power_law, scaling_ratio_curve, within_relative};
use reldecay::{make_toy_mdd, Kinematics, MassDistribution, QuadratureConfig, TimeGrid};

fn report(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn toy(alpha: f64, xi0: f64) -> MassDistribution {
    make_toy_mdd(alpha, xi0).unwrap()
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn criterion_01_normalization() {
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        for xi0 in [0.5, 1.0, 2.0] {
            let mdd = toy(alpha, xi0);
            let kin = Kinematics::new(0.0, xi0).unwrap();
            let (norm, _) = AmplitudeIntegrator::oracle(&mdd, &kin).unwrap().moment(0).unwrap();
            worst = worst.max((norm - 1.0).abs());
        }
    }
    report(1, worst <= 1e-10, &format!("max |norm - 1| = {worst:.2e} (limit 1e-10)"));
}

#[test]
fn criterion_02_amplitude_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst_oracle: f64 = 0.0;
    let mut worst_forms: f64 = 0.0;
    for _ in 0..50 {
        let alpha = rng.gen_range(0.0..=2.0);
        let xi0 = rng.gen_range(0.5..=2.0);
        let rho = rng.gen_range(0.0..=5.0);
        let tau = rng.gen_range(0.0..=200.0);
        let mdd = toy(alpha, xi0);
        let kin = Kinematics::new(rho, xi0).unwrap();
        let integ = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap();
        let a = integ.amplitude(tau).unwrap();
        let o = oracle_amplitude(&mdd, &kin, tau).unwrap();
        worst_oracle = worst_oracle.max((a.value - o.value).norm());
        let e = integ.amplitude_eta_form(tau).unwrap();
        let combined = a.abs_error_estimate + e.abs_error_estimate;
        worst_forms = worst_forms.max((a.value - e.value).norm() / combined);
    }
    report(
        2,
        worst_oracle <= 1e-11 && worst_forms <= 1.0,
        &format!("max |baseline - oracle| = {worst_oracle:.2e} (limit 1e-11); max xi/eta gap over combined estimate = {worst_forms:.3} (limit 1)"),
    );
}

#[test]
fn criterion_03_derivative() {
    const H: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, 2.0] {
        let mdd = toy(alpha, 1.0);
        for rho in [0.0, 2.0, 5.0] {
            let kin = Kinematics::new(rho, 1.0).unwrap();
            let integ = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap();
            for tau in [0.1, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0, 50.0] {
                let d = integ.derivative(tau).unwrap().value;
                let fd = (integ.amplitude(tau + H).unwrap().value - integ.amplitude(tau - H).unwrap().value) / (2.0 * H);
                worst = worst.max((d - fd).norm() / d.norm());
            }
        }
    }
    report(3, worst <= 1e-6, &format!("max relative error = {worst:.2e} (limit 1e-6)"));
}

#[test]
fn criterion_04_short_time_laws() {
    let tau = 1e-2;
    let mdd = toy(0.0, 1.0);
    let mut pass = true;
    let mut detail = String::new();
    for rho in [0.0, 2.0] {
        let kin = Kinematics::new(rho, 1.0).unwrap();
        let model = short_time_model(&mdd, &kin, &cfg()).unwrap();
        let (a, da) = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap().pair(tau).unwrap();
        let p = survival_probability(&a);
        let m = instantaneous_mass(&a, &da).unwrap();
        let g = instantaneous_rate(&a, &da).unwrap();
        let e_p = ((1.0 - p) / (tau * tau) - model.pi0).abs() / model.pi0;
        let e_g = (g / tau - model.pi2).abs() / model.pi2;
        let e_m = ((model.a0 - m) / (tau * tau) - model.pi1).abs() / model.pi1;
        let exact = model.pi2 == 2.0 * model.pi0;
        pass &= e_p <= 1e-3 && e_g <= 1e-3 && e_m <= 1e-2 && exact;
        detail += &format!("[rho={rho}: P {e_p:.1e}, Gamma {e_g:.1e}, M {e_m:.1e}, pi2=2pi0 {exact}] ");
    }
    report(4, pass, detail.trim_end());
}

#[test]
fn criterion_05_long_time_exponent() {
    let grid = TimeGrid::geometric(50.0, 200.0, 31).unwrap();
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, 2.0] {
        let mdd = toy(alpha, 1.0);
        for rho in [0.0, 2.0, 5.0] {
            let kin = Kinematics::new(rho, 1.0).unwrap();
            let curve = decay_curve(&mdd, &kin, &grid, &cfg()).unwrap();
            let series: Vec<(f64, f64)> = grid.points().iter().copied().zip(curve.survival.iter().copied()).collect();
            let fit = fit_power_law(&series, (50.0, 200.0)).unwrap();
            let predicted = -2.0 * (1.0 + alpha);
            worst = worst.max((fit.slope - predicted).abs() / predicted.abs());
        }
    }
    report(5, worst <= 0.02, &format!("max relative slope deviation = {:.3}% (limit 2%)", 100.0 * worst));
}

#[test]
fn criterion_06_momentum_ratio() {
    let tau = 200.0;
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0] {
        let mdd = toy(alpha, 1.0);
        let p0 = survival_probability(&amplitude(&mdd, &Kinematics::new(0.0, 1.0).unwrap(), tau, &cfg()).unwrap());
        for rho in [1.0, 2.0, 3.0, 4.0] {
            let kin = Kinematics::new(rho, 1.0).unwrap();
            let pp = survival_probability(&amplitude(&mdd, &kin, tau, &cfg()).unwrap());
            let predicted = kin.chi().powf(2.0 * (1.0 + alpha));
            worst = worst.max((pp / p0 - predicted).abs() / predicted);
        }
    }
    report(6, worst <= 0.03, &format!("max relative deviation at tau=200 = {:.3}% (limit 3%)", 100.0 * worst));
}

#[test]
fn criterion_07_scaling_law() {
    let mdd = toy(0.0, 1.0);
    let grid = TimeGrid::geometric(80.0, 200.0, 25).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for rho in [2.0, 3.0] {
        let kin = Kinematics::new(rho, 1.0).unwrap();
        let kappa = long_time_model(&mdd, &kin).kappa_p;
        let ratio = scaling_ratio_curve(&mdd, rho, &grid, &cfg()).unwrap();
        let fitted = fit_inverse_square_coefficient(&ratio, (80.0, 200.0)).unwrap();
        let at_200 = ratio.last().unwrap().1;
        let kappa_ok = within_relative(fitted, kappa, 0.15);
        let end_ok = kappa.abs() / 200f64.powi(2) >= 0.01 || (at_200 - 1.0).abs() <= 0.01;
        pass &= kappa_ok && end_ok;
        detail += &format!("[rho={rho}: fitted {fitted:.3} vs kappa {kappa:.3}, ratio(200) - 1 = {:.2e}] ", at_200 - 1.0);
    }
    report(7, pass, detail.trim_end());
}

#[test]
fn criterion_08_mass_limit() {
    let grid = TimeGrid::geometric(50.0, 200.0, 31).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    let mut cases: Vec<(f64, f64)> = Vec::new();
    for alpha in [1.0, 2.0] {
        for rho in [0.0, 2.0, 4.0] {
            cases.push((alpha, rho));
        }
    }
    cases.push((0.0, 0.0));
    for (alpha, rho) in cases {
        let mdd = toy(alpha, 1.0);
        let kin = Kinematics::new(rho, 1.0).unwrap();
        let model = long_time_model(&mdd, &kin);
        let integ = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap();
        let (a, da) = integ.pair(100.0).unwrap();
        let m100 = instantaneous_mass(&a, &da).unwrap();
        let limit = (1.0 + rho * rho).sqrt();
        let m_ok = within_relative(m100, limit, 0.01);
        let curve = decay_curve(&mdd, &kin, &grid, &cfg()).unwrap();
        let series: Vec<(f64, f64)> = grid
            .points()
            .iter()
            .zip(&curve.mass)
            .map(|(t, m)| (*t, m.unwrap() / model.m_p_inf))
            .collect();
        let fitted = fit_inverse_square_coefficient(&series, (50.0, 200.0)).unwrap();
        let zeta_ok = within_relative(fitted, model.zeta_p, 0.10);
        let closed_ok = alpha != 0.0 || model.zeta_0 == 1.0;
        let ok = m_ok && zeta_ok && closed_ok;
        pass &= ok;
        detail += &format!(
            "[alpha={alpha} rho={rho}: M(100)/limit - 1 = {:.1e}, zeta fit {fitted:.4} vs {:.4}{}] ",
            m100 / limit - 1.0,
            model.zeta_p,
            if ok { "" } else { " FAIL" }
        );
    }
    report(8, pass, detail.trim_end());
}

#[test]
fn criterion_09_rate_law() {
    let tau = 100.0;
    let mut pass = true;
    let mut detail = String::new();
    for alpha in [0.0, 1.0, 2.0] {
        let mdd = toy(alpha, 1.0);
        let predicted = 2.0 * (1.0 + alpha);
        let rates: Vec<f64> = (0..=5)
            .map(|rho| {
                let kin = Kinematics::new(rho as f64, 1.0).unwrap();
                let (a, da) = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap().pair(tau).unwrap();
                instantaneous_rate(&a, &da).unwrap()
            })
            .collect();
        let worst = rates.iter().map(|g| (g * tau - predicted).abs() / predicted).fold(0.0, f64::max);
        let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = (max - min) / (rates.iter().sum::<f64>() / rates.len() as f64);
        pass &= worst <= 0.05 && spread <= 0.05;
        detail += &format!("[alpha={alpha}: law {:.2}%, spread {:.2}%] ", 100.0 * worst, 100.0 * spread);
    }
    report(9, pass, detail.trim_end());
}

#[test]
fn criterion_10_chi_identity() {
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        for xi0 in [0.5, 1.0, 2.0] {
            let mdd = toy(alpha, xi0);
            let rest = long_time_model(&mdd, &Kinematics::new(0.0, xi0).unwrap());
            for k in 0..=10 {
                let kin = Kinematics::new(0.5 * k as f64, xi0).unwrap();
                let m = long_time_model(&mdd, &kin);
                worst = worst.max((m.chi_p - m.m_p_inf / rest.m_0_inf).abs() / m.chi_p);
            }
        }
    }
    report(10, worst <= 4.0 * f64::EPSILON, &format!("max relative residual = {worst:.1e}"));
}

#[test]
fn criterion_11_reproducibility() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    for dir in [&first, &second] {
        for n in 1..=15 {
            let code = reldecay::cli::run([
                "reldecay",
                "--threads",
                "1",
                "--out",
                dir.path().to_str().unwrap(),
                "figure",
                &n.to_string(),
            ]);
            assert_eq!(code, 0, "figure {n}");
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(first.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mismatched: Vec<_> = names
        .iter()
        .filter(|n| std::fs::read(first.path().join(n)).unwrap() != std::fs::read(second.path().join(n)).ok().unwrap_or_default())
        .collect();
    let count = std::fs::read_dir(second.path()).unwrap().count();
    report(
        11,
        mismatched.is_empty() && count == names.len(),
        &format!("{} files compared, {} differ", names.len(), mismatched.len()),
    );
}
