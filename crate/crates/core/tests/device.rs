use approx::assert_relative_eq;
use proptest::prelude::*;
use sidebands::device::constants::{HBAR, K_B};
use sidebands::device::*;
use sidebands::model::MollowParams;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[test]
fn silicon_cantilever_numbers() {
    let r = DeviceParams::silicon().report().unwrap();
    assert!((r.omega_r / (TWO_PI * 5.0e6) - 1.0).abs() < 0.02, "omega_r {}", r.omega_r_hz);
    assert!((r.a0 / 5.7e-13 - 1.0).abs() < 0.05, "a0 {}", r.a0);
    assert!((r.lambda / (TWO_PI * 150e3) - 1.0).abs() < 0.15, "lambda {}", r.lambda_hz);
    assert!((r.n_th - 40.0).abs() < 2.0, "n_th {}", r.n_th);
    // Frozen values of the formulas for this preset.
    assert_relative_eq!(r.omega_r_hz, 5.010524e6, max_relative = 1e-6);
    assert_relative_eq!(r.a0, 5.757168e-13, max_relative = 1e-6);
    assert_relative_eq!(r.lambda_hz, 1.611575e5, max_relative = 1e-6);
    assert_relative_eq!(r.n_th, 41.08771, max_relative = 1e-6);
}

#[test]
fn diamond_beam_numbers() {
    let r = DeviceParams::diamond().report().unwrap();
    assert!((r.omega_r / (TWO_PI * 5.7e6) - 1.0).abs() < 0.10, "omega_r {}", r.omega_r_hz);
    assert!((r.a0 / 3.6e-15 - 1.0).abs() < 0.15, "a0 {}", r.a0);
    assert!(r.lambda_hz > 100.0 && r.lambda_hz < 1e4, "lambda {}", r.lambda_hz);
    assert!(r.provenance.unwrap().contains("diamond"));
}

#[test]
fn frequency_is_linear_in_thickness() {
    let d = DeviceParams::silicon();
    let thick = DeviceParams { t: 2.0 * d.t, ..d.clone() };
    assert_relative_eq!(fundamental_frequency(&thick), 2.0 * fundamental_frequency(&d), max_relative = 1e-14);
}

#[test]
fn zero_point_scales_with_mass() {
    let w = TWO_PI * 5e6;
    assert_relative_eq!(zero_point_from(4e-16, w), 0.5 * zero_point_from(1e-16, w), max_relative = 1e-14);
}

#[test]
fn coupling_vanishes_without_gradient() {
    let d = DeviceParams { gradient: 1e-300, ..DeviceParams::silicon() };
    assert!(magnetic_coupling(&d) < 1e-290);
    let zero = DeviceParams { gradient: 0.0, ..DeviceParams::silicon() };
    assert!(zero.validate().is_err());
}

#[test]
fn thermal_occupation_limits() {
    let w = TWO_PI * 5e6;
    assert_eq!(thermal_occupation(w, 0.0), 0.0);
    let t = 1e-5;
    let x = HBAR * w / (K_B * t);
    assert!(x > 20.0);
    assert_relative_eq!(thermal_occupation(w, t), (-x).exp(), max_relative = 1e-8);
    let n = thermal_occupation(w, 10e-3);
    assert!((n - 40.0).abs() < 2.0);
}

#[test]
fn config_rejects_unknown_keys() {
    let ok = r#"{"l":1e-6,"w":1e-7,"t":1e-7,"youngs_modulus":1e11,"density":2000,
        "gradient":1e6,"tip_distance":1e-8,"temperature":0.01}"#;
    let d: DeviceParams = serde_json::from_str(ok).unwrap();
    assert_eq!(d.g_s, 2.0);
    let bad = ok.replace("\"temperature\"", "\"temp\"");
    assert!(serde_json::from_str::<DeviceParams>(&bad).is_err());
}

#[test]
fn device_params_in_model_units() {
    let d = DeviceParams::silicon();
    let (p, scale) = device_mollow_params(&d, TWO_PI * 1.0e6, TWO_PI * 1.2e6).unwrap();
    assert_relative_eq!(p.lambda, 1.0, max_relative = 1e-14);
    assert_relative_eq!(p.omega_r * scale.lambda, fundamental_frequency(&d), max_relative = 1e-14);
}

proptest! {
    #[test]
    fn si_round_trip(omega in 1e3f64..1e9, delta_a in 1e3f64..1e9, lam in 1e2f64..1e7) {
        let scale = UnitScale { lambda: lam };
        let si = MollowParams { lambda: lam, omega, delta_a, omega_x: 3.0 * omega, ..MollowParams::default() };
        let back = scale.mollow_to_si(&scale.mollow_from_si(&si));
        for (a, b) in [(si.lambda, back.lambda), (si.omega, back.omega), (si.delta_a, back.delta_a), (si.omega_x, back.omega_x)] {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }

    #[test]
    fn occupation_increases_with_temperature(t in 1e-4f64..1.0, f in 1.01f64..3.0) {
        let w = TWO_PI * 5e6;
        prop_assert!(thermal_occupation(w, f * t) > thermal_occupation(w, t));
    }

    #[test]
    fn zero_point_decreases_with_frequency(w in 1e5f64..1e9, f in 1.01f64..3.0) {
        prop_assert!(zero_point_from(1e-16, f * w) < zero_point_from(1e-16, w));
    }
}
