use exokit_core::benchsim::{
    simulate_backdrive, simulate_backdrive_sequence, simulate_grid, GridSpec, SineBackdriveSpec,
};
use exokit_core::sysid::{fit_inertia, fit_torque_model, SysidOptions};
use exokit_core::ActuatorParams;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn grid_round_trip_recovers_parameters() {
    let truth = ActuatorParams { bias: 0.05, ..ActuatorParams::paper_fit() };
    let trial = simulate_grid(&truth, &GridSpec::default(), 0.0, 1).unwrap();
    let fit = fit_torque_model(&trial.log, &SysidOptions::default()).unwrap();
    let p = fit.params;
    assert!((p.bias - truth.bias).abs() < 1e-6);
    for (got, want) in [
        (p.k_tau, truth.k_tau),
        (p.k_n, truth.k_n),
        (p.f_coulomb, truth.f_coulomb),
        (p.f_gear, truth.f_gear),
    ] {
        assert!(rel(got, want) < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn noisy_grid_is_within_two_percent() {
    let truth = ActuatorParams::paper_fit();
    let trial = simulate_grid(&truth, &GridSpec::default(), 0.1, 7).unwrap();
    let p = fit_torque_model(&trial.log, &SysidOptions::default()).unwrap().params;
    for (got, want) in [(p.k_tau, truth.k_tau), (p.k_n, truth.k_n), (p.f_coulomb, truth.f_coulomb), (p.f_gear, truth.f_gear)] {
        assert!(rel(got, want) < 0.02, "{got} vs {want}");
    }
}

#[test]
fn backdrive_round_trip_recovers_inertia() {
    let truth = ActuatorParams::paper_fit();
    let phases = [1.0, 1.5, 2.0].map(|freq| SineBackdriveSpec { freq, ..Default::default() });
    let log = simulate_backdrive_sequence(&phases, &truth, 0.0, 3).unwrap();
    let fit = fit_inertia(&log, &truth, &SysidOptions::default()).unwrap();
    assert!(rel(fit.inertia, truth.reflected_inertia) < 1e-4, "{}", fit.inertia);
    assert!(fit.rmse_after < fit.rmse_before);

    let single = simulate_backdrive(&SineBackdriveSpec::default(), &truth, 0.0, 3).unwrap();
    let fit = fit_inertia(&single, &truth, &SysidOptions::default()).unwrap();
    assert!(rel(fit.inertia, truth.reflected_inertia) < 1e-4, "{}", fit.inertia);
}
