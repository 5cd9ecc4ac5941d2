use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use ndarray::Array1;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use sidebands::dynamics::{Channel, EvolveOptions, LindbladModel, SteadyOptions};
use sidebands::hilbert::{
    cat_state, coherent_state, fock_op, FockKind, HilbertSpace, Operator, Parity, QuantumState,
};
use sidebands::model::build_cat_interaction;
use sidebands::observables::*;

fn fock(n: usize, cutoff: usize) -> QuantumState {
    QuantumState::basis(HilbertSpace::oscillator(cutoff).unwrap(), 0, n).unwrap()
}

fn laguerre(n: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let l2 = ((2 * k + 1) as f64 - x) * l1 - k as f64 * l0;
        let l2 = l2 / (k + 1) as f64;
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn alpha(x: f64, p: f64) -> C64 {
    C64::new(x, p) / 2f64.sqrt()
}

#[test]
fn populations_and_parity_of_fock_states() {
    let s = fock(3, 8);
    let pops = number_populations(&s);
    assert_abs_diff_eq!(pops[3], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(parity_expectation(&s), -1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(mean_phonon_number(&s), 3.0, epsilon = 1e-14);
}

#[test]
fn cat_parity_is_exact() {
    let space = HilbertSpace::oscillator(40).unwrap();
    let even = cat_state(C64::new(3.0, 0.0), Parity::Even, space).unwrap();
    let odd = cat_state(C64::new(3.0, 0.0), Parity::Odd, space).unwrap();
    assert_abs_diff_eq!(parity_expectation(&even), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(parity_expectation(&odd), -1.0, epsilon = 1e-12);
}

#[test]
fn wigner_of_fock_states_matches_laguerre_form() {
    let spec = WignerSpec::square(3.0, 9);
    for n in 0..4 {
        let w = wigner(&fock(n, 10), &spec).unwrap();
        for (i, x) in w.x.iter().enumerate() {
            for (j, p) in w.p.iter().enumerate() {
                let r2 = alpha(*x, *p).norm_sqr();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let exact = 2.0 / PI * sign * (-2.0 * r2).exp() * laguerre(n, 4.0 * r2);
                assert_abs_diff_eq!(w.at(i, j), exact, epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn wigner_origin_values() {
    let spec = WignerSpec { x: Axis::new(0.0, 0.0, 1), p: Axis::new(0.0, 0.0, 1), padded_dim: None };
    assert_abs_diff_eq!(wigner(&fock(0, 5), &spec).unwrap().at(0, 0), 2.0 / PI, epsilon = 1e-12);
    assert_abs_diff_eq!(wigner(&fock(1, 5), &spec).unwrap().at(0, 0), -2.0 / PI, epsilon = 1e-12);
}

#[test]
fn wigner_of_even_cat_matches_closed_form() {
    let beta = C64::new(2.0, 0.0);
    let space = HilbertSpace::oscillator(30).unwrap();
    let cat = cat_state(beta, Parity::Even, space).unwrap();
    let w = wigner(&cat, &WignerSpec::square(4.5, 19)).unwrap();
    let norm = 1.0 / (2.0 * (1.0 + (-2.0 * beta.norm_sqr()).exp()));
    for (i, x) in w.x.iter().enumerate() {
        for (j, p) in w.p.iter().enumerate() {
            let a = alpha(*x, *p);
            let interference = 2.0 * (-2.0 * a.norm_sqr()).exp() * (4.0 * (a * beta.conj()).im).cos();
            let exact = 2.0 / PI
                * norm
                * ((-2.0 * (a - beta).norm_sqr()).exp() + (-2.0 * (a + beta).norm_sqr()).exp() + interference);
            assert_abs_diff_eq!(w.at(i, j), exact, epsilon = 1e-8);
        }
    }
    let fine = wigner(&cat, &WignerSpec::square(6.0, 61)).unwrap();
    assert_abs_diff_eq!(fine.normalization(), 1.0, epsilon = 1e-4);
}

#[test]
fn wigner_origin_is_scaled_parity() {
    let space = HilbertSpace::oscillator(30).unwrap();
    let spec = WignerSpec { x: Axis::new(0.0, 0.0, 1), p: Axis::new(0.0, 0.0, 1), padded_dim: None };
    let s = coherent_state(C64::new(0.7, -0.4), space).unwrap();
    let w0 = wigner(&s, &spec).unwrap().at(0, 0);
    assert_abs_diff_eq!(w0, 2.0 / PI * parity_expectation(&s), epsilon = 1e-12);
}

#[test]
fn wigner_warns_outside_supported_region() {
    let w = wigner(&fock(0, 6), &WignerSpec::square(4.0, 3)).unwrap();
    assert!(!w.warnings.is_empty());
    let w = wigner(&fock(0, 40), &WignerSpec::square(2.0, 3)).unwrap();
    assert!(w.warnings.is_empty());
}

#[test]
fn coherent_state_has_no_fringes_and_cat_does() {
    let space = HilbertSpace::oscillator(40).unwrap();
    let beta = C64::new(3.0, 0.0);
    let coh = coherent_state(beta, space).unwrap();
    assert!(fringe_contrast(&coh).unwrap() < 1e-3);
    let cat = cat_state(beta, Parity::Even, space).unwrap();
    assert_abs_diff_eq!(fringe_contrast(&cat).unwrap(), 1.0, epsilon = 1e-6);
}

#[test]
fn cat_fidelity_of_cat_is_one() {
    let space = HilbertSpace::oscillator(40).unwrap();
    let beta = C64::new(2.5, 1.0);
    let cat = cat_state(beta, Parity::Odd, space).unwrap();
    assert_abs_diff_eq!(cat_fidelity(&cat, beta, Parity::Odd).unwrap(), 1.0, epsilon = 1e-12);
    assert!(cat_fidelity(&cat, beta, Parity::Even).unwrap() < 1e-12);
}

#[test]
fn cat_fidelity_traces_out_the_spin() {
    let space = HilbertSpace::qubit(40).unwrap();
    let beta = C64::new(2.0, 0.0);
    let fock_amps = sidebands::hilbert::cat_amplitudes(beta, Parity::Even, 40).unwrap();
    let spin = Array1::from(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let s = QuantumState::product(space, &spin, &fock_amps).unwrap();
    assert_abs_diff_eq!(cat_fidelity(&s, beta, Parity::Even).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn dark_state_residual_vanishes_for_the_cat_dark_state() {
    // (lambda2 a^2 + omega0) psi = 0 with beta^2 = -omega0 / lambda2, spin in the lower level.
    let space = HilbertSpace::qubit(45).unwrap();
    let (l2, o0) = (-0.02, 0.2);
    let h = build_cat_interaction(l2, o0, space).unwrap();
    let beta = C64::new((-o0 / l2).sqrt(), 0.0);
    let amps = sidebands::hilbert::cat_amplitudes(beta, Parity::Even, 45).unwrap();
    let spin = Array1::from(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let s = QuantumState::product(space, &spin, &amps).unwrap();
    assert!(dark_state_residual(&h, &s).unwrap() < 1e-6);
    let bright = QuantumState::basis(space, 0, 0).unwrap();
    assert!(dark_state_residual(&h, &bright).unwrap() > 0.1);
}

fn damped_oscillator(cutoff: usize, drive: f64, kappa: f64, n_th: f64) -> LindbladModel {
    let space = HilbertSpace::oscillator(cutoff).unwrap();
    let a = fock_op(FockKind::Annihilate, space);
    let x = a.add(&a.dagger()).unwrap().scale_re(drive);
    let h = Operator::hermitian(space, x.into_matrix()).unwrap();
    LindbladModel::new(
        h,
        vec![
            Channel { rate: kappa * (n_th + 1.0), op: a.clone(), label: "damping".into() },
            Channel { rate: kappa * n_th, op: a.dagger(), label: "absorption".into() },
        ],
    )
    .unwrap()
}

#[test]
fn coherent_steady_state_is_uncorrelated() {
    let model = damped_oscillator(25, 0.5, 1.0, 0.0);
    let taus = [0.0, 0.5, 2.0];
    for n in 1..=3 {
        let g = g2_generalized(&model, n, &taus, &SteadyOptions::default(), &EvolveOptions::default())
            .unwrap();
        for v in &g.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-6);
        }
    }
}

#[test]
fn thermal_state_bunches() {
    // Thermal moments <a^dag^k a^k> = k! nbar^k, so g_n(0) = (2n)! / (n!)^2;
    // first order decays as 1 + exp(-kappa tau).
    let model = damped_oscillator(60, 0.0, 1.0, 0.5);
    let taus = [0.0, 0.3, 1.0];
    let g = g2_generalized(&model, 1, &taus, &SteadyOptions::default(), &EvolveOptions::default())
        .unwrap();
    assert_abs_diff_eq!(g.g0, 2.0, epsilon = 1e-6);
    for (t, v) in taus.iter().zip(&g.values) {
        assert_abs_diff_eq!(*v, 1.0 + (-t).exp(), epsilon = 1e-5);
    }
    for (n, exact) in [(2, 6.0), (3, 20.0)] {
        let g = g2_generalized(&model, n, &[0.0], &SteadyOptions::default(), &EvolveOptions::default())
            .unwrap();
        assert_abs_diff_eq!(g.g0, exact, epsilon = 1e-4 * exact);
    }
}

#[test]
fn correlations_relax_to_one() {
    let model = damped_oscillator(40, 0.3, 1.0, 0.5);
    let g = g2_generalized(&model, 2, &[0.0, 10.0], &SteadyOptions::default(), &EvolveOptions::default())
        .unwrap();
    assert!(g.g0 > 1.05);
    assert_abs_diff_eq!(g.values[1], 1.0, epsilon = 0.05);
}

#[test]
fn correlations_are_invariant_under_time_rescaling() {
    let model = damped_oscillator(30, 0.4, 1.0, 0.3);
    let s = 3.0;
    let fast = model.rescaled(s).unwrap();
    let taus = [0.0, 0.2, 0.7];
    let scaled: Vec<f64> = taus.iter().map(|t| t / s).collect();
    let opts = (SteadyOptions::default(), EvolveOptions::default());
    let a = g2_generalized(&model, 2, &taus, &opts.0, &opts.1).unwrap();
    let b = g2_generalized(&fast, 2, &scaled, &opts.0, &opts.1).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert_abs_diff_eq!(*x, *y, epsilon = 1e-6);
    }
}

#[test]
fn vacuum_correlation_is_undefined() {
    let model = damped_oscillator(6, 0.0, 1.0, 0.0);
    let err = g2_generalized(&model, 2, &[0.0], &SteadyOptions::default(), &EvolveOptions::default());
    assert!(matches!(err, Err(sidebands::Error::UndefinedCorrelation(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cat_parity_selection(re in -3.0f64..3.0, im in -3.0f64..3.0, odd in any::<bool>()) {
        let beta = C64::new(re, im);
        prop_assume!(beta.norm() > 0.3);
        let space = HilbertSpace::oscillator(60).unwrap();
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let s = cat_state(beta, parity, space).unwrap();
        let pops = number_populations(&s);
        let wrong = if odd { 0 } else { 1 };
        for n in (wrong..pops.len()).step_by(2) {
            prop_assert!(pops[n] < 1e-15);
        }
        prop_assert!((parity_expectation(&s) - parity.sign()).abs() < 1e-12);
    }

    #[test]
    fn wigner_is_bounded(n in 0usize..6, x in -3.0f64..3.0, p in -3.0f64..3.0) {
        let spec = WignerSpec { x: Axis::new(x, x, 1), p: Axis::new(p, p, 1), padded_dim: None };
        let w = wigner(&fock(n, 8), &spec).unwrap().at(0, 0);
        prop_assert!(w.abs() <= 2.0 / PI + 1e-10);
    }
}

#[test]
fn wigner_of_complex_coherent_state_is_displaced_gaussian() {
    let beta = C64::new(1.0, -0.6);
    let space = HilbertSpace::oscillator(30).unwrap();
    let s = coherent_state(beta, space).unwrap();
    let w = wigner(&s, &WignerSpec::square(3.0, 13)).unwrap();
    for (i, x) in w.x.iter().enumerate() {
        for (j, p) in w.p.iter().enumerate() {
            let exact = 2.0 / PI * (-2.0 * (alpha(*x, *p) - beta).norm_sqr()).exp();
            assert_abs_diff_eq!(w.at(i, j), exact, epsilon = 1e-9);
        }
    }
}
