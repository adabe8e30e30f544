use gradobs::observer::{assemble_error_matrix, estimate_decay_rate, simulate, spectral_abscissa, synthesize_gain, Integrator};
use gradobs::scenario::{canned, observer_system, simulation_options, ScenarioConfig, Variant, CANNED_NAMES};
use gradobs::sensors::{build_output_matrix, Sensor};
use gradobs::spectral::{DiffusionModel, DomainGeometry, Subregion, Truncation};
use gradobs::strategic::{check_strategic, cluster_eigenvalues, DEFAULT_CLUSTER_TOL};
use proptest::prelude::*;

#[test]
fn canned_configs_survive_a_json_round_trip() {
    for name in CANNED_NAMES {
        for variant in [Variant::Strategic, Variant::NonStrategic] {
            let config = canned(name, variant).unwrap();
            let back = ScenarioConfig::from_json(&config.to_json()).unwrap();
            assert_eq!(back.to_json(), config.to_json(), "{name}");
            let (a, b) = (config.build().unwrap(), back.build().unwrap());
            assert_eq!(a.model.eigenvalues(), b.model.eigenvalues());
            assert_eq!(a.x0, b.x0);
        }
    }
}

#[test]
fn rectangle_observer_converges_with_exact_integrator() {
    let mut config = canned("corollary_5_3_internal", Variant::Strategic).unwrap();
    config.observer.integrator = Integrator::Exact;
    config.observer.horizon = 40.0;
    config.observer.dt = 0.05;
    config.observer.output_every = 10;
    let scenario = config.build().unwrap();
    let report = check_strategic(&scenario.sensors, &scenario.model, &scenario.omega, config.unstable_margin).unwrap();
    assert!(report.verdict);
    let system = observer_system(&config, &scenario, false, 16).unwrap();
    let result = simulate(&system, &simulation_options(&config)).unwrap();
    let bound = -spectral_abscissa(&system.error_matrix());
    let rate = estimate_decay_rate(&result, 0.5).unwrap().rate;
    assert!((rate - bound).abs() < 0.15 * bound, "{rate} vs {bound}");
    assert!(result.err_h1_omega.last().unwrap() < &(1e-1 * result.err_h1_omega[0]));
}

fn example_model() -> DiffusionModel {
    DiffusionModel::new(DomainGeometry::interval(1.0).unwrap(), 0.01, 1.0, Truncation::OneD(16)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strategic_sensors_admit_a_stabilizing_gain(b in 0.02f64..0.98, mu in -4.0f64..-0.7) {
        let model = example_model();
        let omega = Subregion::interval(0.2, 0.8);
        let sensors = [Sensor::pointwise(&[b])];
        let report = check_strategic(&sensors, &model, &omega, 0.0).unwrap();
        prop_assume!(report.verdict && report.margin.unwrap() > 1e-2);
        let output = build_output_matrix(&sensors, &model).unwrap();
        let clusters = cluster_eigenvalues(model.eigenpairs(), DEFAULT_CLUSTER_TOL);
        let gain = synthesize_gain(&model, &output, &clusters, 0.0, mu).unwrap();
        let abscissa = spectral_abscissa(&assemble_error_matrix(&model, &output, &gain));
        let slowest_stable = model.eigenvalues()[3];
        prop_assert!((abscissa - mu.max(slowest_stable)).abs() < 1e-6 * abscissa.abs().max(1.0), "{abscissa}");
    }
}
