use approx::assert_relative_eq;
use proptest::prelude::*;
use reldecay::asymptotics::{long_time_model, short_time_model, short_time_survival};
use reldecay::observables::{instantaneous_mass, survival_probability};
use reldecay::quadrature::{amplitude_series, AmplitudeIntegrator};
use reldecay::{make_breit_wigner, make_toy_mdd, Kinematics, QuadratureConfig, TimeGrid};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn survival_is_a_probability(alpha in 0.0..2.0f64, xi0 in 0.5..2.0f64, rho in 0.0..5.0f64, tau in 0.0..200.0f64) {
        let mdd = make_toy_mdd(alpha, xi0).unwrap();
        let kin = Kinematics::new(rho, xi0).unwrap();
        let integ = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap();
        let a = integ.amplitude(tau).unwrap();
        let p = survival_probability(&a);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        let back = integ.amplitude_reflected(tau).unwrap();
        prop_assert!((back.value - a.value.conj()).norm() <= 1e-13);
    }

    #[test]
    fn boost_only_slows_decay_at_late_times(alpha in 0.0..2.0f64, rho in 0.5..5.0f64) {
        let mdd = make_toy_mdd(alpha, 1.0).unwrap();
        let tau = 150.0;
        let rest = AmplitudeIntegrator::new(&mdd, &Kinematics::new(0.0, 1.0).unwrap(), &cfg()).unwrap();
        let moving = AmplitudeIntegrator::new(&mdd, &Kinematics::new(rho, 1.0).unwrap(), &cfg()).unwrap();
        let p0 = survival_probability(&rest.amplitude(tau).unwrap());
        let pp = survival_probability(&moving.amplitude(tau).unwrap());
        prop_assert!(pp > p0);
    }

    #[test]
    fn mass_starts_at_mean_energy(alpha in 0.0..2.0f64, rho in 0.0..5.0f64) {
        let mdd = make_toy_mdd(alpha, 1.0).unwrap();
        let kin = Kinematics::new(rho, 1.0).unwrap();
        let model = short_time_model(&mdd, &kin, &cfg()).unwrap();
        let (a, da) = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap().pair(0.0).unwrap();
        let m = instantaneous_mass(&a, &da).unwrap();
        prop_assert!((m - model.a0).abs() <= 1e-11 * model.a0);
        prop_assert!(model.a0 >= kin.eta0);
        prop_assert!(model.pi0 > 0.0);
    }
}

#[test]
fn short_time_survival_tracks_quadrature() {
    let mdd = make_toy_mdd(1.0, 1.0).unwrap();
    let kin = Kinematics::new(3.0, 1.0).unwrap();
    let model = short_time_model(&mdd, &kin, &cfg()).unwrap();
    let integ = AmplitudeIntegrator::new(&mdd, &kin, &cfg()).unwrap();
    for tau in [1e-3, 3e-3, 1e-2] {
        let p = survival_probability(&integ.amplitude(tau).unwrap());
        assert!((p - short_time_survival(&model, tau)).abs() <= 5.0 * tau.powi(3) * model.pi0);
    }
}

#[test]
fn breit_wigner_curve_is_well_behaved() {
    let mdd = make_breit_wigner(5.0, 0.2, 1.0).unwrap();
    let kin = Kinematics::new(2.0, 1.0).unwrap();
    let grid = TimeGrid::linear(0.0, 20.0, 41).unwrap();
    let amps = amplitude_series(&mdd, &kin, &grid, &cfg()).unwrap();
    assert_relative_eq!(amps[0].value.re, 1.0, epsilon = 1e-10);
    // exponential regime: P ≈ exp(-Γ̄ τ m0/η) for a narrow resonance
    let eta = (25.0f64 + 4.0).sqrt();
    let p10 = survival_probability(&amps[20]);
    assert_relative_eq!(p10, (-0.2 * 10.0 * 5.0 / eta).exp(), max_relative = 0.05);
}

#[test]
fn chi_and_endpoint_velocity_agree() {
    for rho in [0.0, 0.3, 1.0, 4.0] {
        for xi0 in [0.5, 1.0, 2.0] {
            let mdd = make_toy_mdd(0.5, xi0).unwrap();
            let kin = Kinematics::new(rho, xi0).unwrap();
            let m = long_time_model(&mdd, &kin);
            assert_relative_eq!(1.0 / (1.0 - m.velocity * m.velocity).sqrt(), m.chi_p, max_relative = 1e-14);
        }
    }
}
