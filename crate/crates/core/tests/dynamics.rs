use approx::assert_abs_diff_eq;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sidebands::dynamics::*;
use sidebands::hilbert::{
    cat_amplitudes, fock_op, spin_op, FockKind, HilbertSpace, Operator, Parity, QuantumState, SpinKind,
};
use sidebands::linalg;
use sidebands::model::{build_cat_interaction, qubit_level};
use sidebands::observables::{mean_phonon_number, number_populations, parity_expectation};

fn oscillator_model(cutoff: usize, h: Operator, gamma: f64, n_th: f64) -> LindbladModel {
    let space = HilbertSpace::oscillator(cutoff).unwrap();
    let a = fock_op(FockKind::Annihilate, space);
    LindbladModel::new(
        h,
        vec![
            Channel { rate: (n_th + 1.0) * gamma, op: a.clone(), label: "damping".into() },
            Channel { rate: n_th * gamma, op: a.dagger(), label: "absorption".into() },
        ],
    )
    .unwrap()
}

fn zero_h(cutoff: usize) -> Operator {
    Operator::zeros(HilbertSpace::oscillator(cutoff).unwrap())
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Array2<C64> {
    let m = Array2::from_shape_fn((d, d), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&m + &linalg::dagger(&m)).mapv(|z| z * 0.5)
}

fn random_model(seed: u64) -> (LindbladModel, QuantumState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = HilbertSpace::qubit(3).unwrap();
    let d = space.dim();
    let h = Operator::hermitian(space, random_hermitian(&mut rng, d)).unwrap();
    let channels = (0..2)
        .map(|k| {
            let c = Array2::from_shape_fn((d, d), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            Channel { rate: rng.random::<f64>(), op: Operator::new(space, c).unwrap(), label: format!("c{k}") }
        })
        .collect();
    let psi = ndarray::Array1::from_shape_fn(d, |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let state = QuantumState::pure_normalized(space, psi).unwrap().to_density();
    (LindbladModel::new(h, channels).unwrap(), state)
}

#[test]
fn channel_sets_per_variant() {
    let space = HilbertSpace::qubit(6).unwrap();
    let h = Operator::zeros(space);
    let d = DissipationParams { gamma_s: 1e-3, gamma_m: 5e-5, n_th: 40.0, gamma_0: 0.0 };
    let cat = make_model(h.clone(), &d, Variant::Cat).unwrap();
    assert_eq!(cat.channels().len(), 2);
    let fock = make_model(h.clone(), &d, Variant::Fock).unwrap();
    let rate = |label: &str| fock.channels().iter().find(|c| c.label == label).unwrap().rate;
    assert_abs_diff_eq!(rate("damping"), 41.0 * 5e-5, epsilon = 1e-15);
    assert_abs_diff_eq!(rate("absorption"), 40.0 * 5e-5, epsilon = 1e-15);
    let corr = make_model(h.clone(), &DissipationParams { gamma_0: 10.0, ..d }, Variant::Correlation).unwrap();
    let labels: Vec<_> = corr.channels().iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["dephasing", "spin_decay", "damping"]);
    let bad = DissipationParams { gamma_s: -1.0, ..d };
    assert!(make_model(h, &bad, Variant::Cat).is_err());
}

#[test]
fn phonon_decay_is_exponential() {
    let model = oscillator_model(4, zero_h(4), 0.7, 0.0);
    let rho0 = QuantumState::basis(model.space(), 0, 1).unwrap();
    let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.5).collect();
    let ev = lindblad_evolve(&model, &rho0, &times, &EvolveOptions::default()).unwrap();
    for (t, s) in times.iter().zip(&ev.states) {
        assert_abs_diff_eq!(number_populations(s)[1], (-0.7 * t).exp(), epsilon = 1e-6);
    }
}

#[test]
fn thermal_bath_relaxes_to_bose_occupation() {
    // Cutoff well above n_th so the truncated detailed-balance fixed point is close to n_th.
    let n_th = 2.0;
    let model = oscillator_model(60, zero_h(60), 1.0, n_th);
    let rho0 = QuantumState::basis(model.space(), 0, 0).unwrap();
    let ev = lindblad_evolve(&model, &rho0, &[0.0, 30.0], &EvolveOptions::default()).unwrap();
    assert_abs_diff_eq!(mean_phonon_number(ev.last()), n_th, epsilon = 0.01 * n_th);

    let ss = steady_state(&model, &SteadyOptions::default()).unwrap();
    assert_eq!(ss.method, SteadyMethod::Direct);
    assert!(ss.residual < 1e-9);
    let pops = number_populations(&ss.state);
    let x = n_th / (n_th + 1.0);
    // Truncated geometric distribution.
    let z: f64 = (0..60).map(|k| x.powi(k)).sum();
    for (k, p) in pops.iter().enumerate() {
        assert_abs_diff_eq!(*p, x.powi(k as i32) / z, epsilon = 1e-10);
    }
}

#[test]
fn pure_decay_steady_state_is_vacuum() {
    let model = oscillator_model(8, zero_h(8), 1.0, 0.0);
    let ss = steady_state(&model, &SteadyOptions::default()).unwrap();
    assert_abs_diff_eq!(number_populations(&ss.state)[0], 1.0, epsilon = 1e-12);
}

#[test]
fn steady_state_falls_back_to_propagation() {
    let model = oscillator_model(8, zero_h(8), 1.0, 0.5);
    let opts = SteadyOptions { max_direct_dim: 4, ..SteadyOptions::default() };
    let ss = steady_state(&model, &opts).unwrap();
    assert_eq!(ss.method, SteadyMethod::Propagation);
    let direct = steady_state(&model, &SteadyOptions::default()).unwrap();
    let diff = &ss.state.density_matrix() - &direct.state.density_matrix();
    assert!(linalg::frobenius(&diff) < 1e-8);
}

#[test]
fn unitary_evolution_conserves_purity() {
    let space = HilbertSpace::qubit(5).unwrap();
    let sx = spin_op(SpinKind::SigmaX, space).unwrap();
    let a = fock_op(FockKind::Annihilate, space);
    let h = sx.add(&a.add(&a.dagger()).unwrap().scale_re(0.3)).unwrap();
    let h = Operator::hermitian(space, h.into_matrix()).unwrap();
    let model = LindbladModel::unitary(h).unwrap();
    let rho0 = QuantumState::basis(space, 0, 2).unwrap();
    let ev = lindblad_evolve(&model, &rho0, &[0.0, 1.0, 4.0], &EvolveOptions::default()).unwrap();
    for s in &ev.states {
        assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-7);
    }
}

#[test]
fn tolerance_failure_reports_the_time() {
    let (model, rho0) = random_model(3);
    let opts = EvolveOptions {
        tolerances: Tolerances { max_steps: 3, ..Tolerances::default() },
        ..EvolveOptions::default()
    };
    match lindblad_evolve(&model, &rho0, &[0.0, 50.0], &opts) {
        Err(sidebands::Error::Integration { time, .. }) => assert!(time > 0.0 && time < 50.0),
        other => panic!("expected an integration error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_preserves_trace_hermiticity_positivity(seed in 0u64..10_000) {
        let (model, rho0) = random_model(seed);
        let ev = lindblad_evolve(&model, &rho0, &[0.0, 0.5, 2.0, 5.0], &EvolveOptions::default()).unwrap();
        prop_assert!(ev.max_trace_error < 1e-8);
        prop_assert!(ev.min_eigenvalue > -1e-7);
        for s in &ev.states {
            prop_assert!(linalg::hermitian_deviation(&s.density_matrix()) < 1e-12);
        }
    }

    #[test]
    fn evolution_is_linear(seed in 0u64..10_000, w in 0.0f64..1.0) {
        let (model, r1) = random_model(seed);
        let (_, r2) = random_model(seed + 1);
        let r2 = QuantumState::density(model.space(), r2.density_matrix()).unwrap();
        let mix = QuantumState::density(
            model.space(),
            &r1.density_matrix() * C64::new(w, 0.0) + &r2.density_matrix() * C64::new(1.0 - w, 0.0),
        ).unwrap();
        let times = [0.0, 1.5];
        let opts = EvolveOptions::default();
        let e1 = lindblad_evolve(&model, &r1, &times, &opts).unwrap();
        let e2 = lindblad_evolve(&model, &r2, &times, &opts).unwrap();
        let em = lindblad_evolve(&model, &mix, &times, &opts).unwrap();
        let combo = &e1.last().density_matrix() * C64::new(w, 0.0)
            + &e2.last().density_matrix() * C64::new(1.0 - w, 0.0);
        prop_assert!(linalg::max_abs(&(&combo - &em.last().density_matrix())) < 1e-7);
    }

    #[test]
    fn trajectories_are_deterministic(seed in any::<u64>()) {
        let (model, _) = random_model(7);
        let space = model.space();
        let psi = QuantumState::basis(space, 0, 1).unwrap();
        let n = fock_op(FockKind::Number, space);
        let times: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let opts = TrajectoryOptions { record_states: true, ..TrajectoryOptions::default() };
        let a = mcwf_trajectory(&model, &psi, &times, seed, &[n.clone()], &opts).unwrap();
        let b = mcwf_trajectory(&model, &psi, &times, seed, &[n], &opts).unwrap();
        prop_assert_eq!(&a.expectations, &b.expectations);
        let ta: Vec<u64> = a.jumps.iter().map(|j| j.time.to_bits()).collect();
        let tb: Vec<u64> = b.jumps.iter().map(|j| j.time.to_bits()).collect();
        prop_assert_eq!(ta, tb);
        prop_assert!(a.jumps.windows(2).all(|w| w[1].time > w[0].time));
        for s in a.states.as_ref().unwrap() {
            prop_assert!((s.trace() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn trajectory_without_channels_is_unitary() {
    let space = HilbertSpace::qubit(3).unwrap();
    let h = Operator::hermitian(space, spin_op(SpinKind::SigmaX, space).unwrap().into_matrix()).unwrap();
    let model = LindbladModel::unitary(h).unwrap();
    let psi = QuantumState::basis(space, 0, 0).unwrap();
    let sz = spin_op(SpinKind::SigmaZ, space).unwrap();
    let times: Vec<f64> = (0..8).map(|k| k as f64 * 0.25).collect();
    let rec = mcwf_trajectory(&model, &psi, &times, 1, &[sz], &TrajectoryOptions::default()).unwrap();
    assert!(rec.jumps.is_empty());
    for (t, v) in times.iter().zip(&rec.expectations[0]) {
        assert_abs_diff_eq!(*v, (2.0 * t).cos(), epsilon = 1e-10);
    }
}

/// Asymptotic Kolmogorov distribution, P(D > d) for sample size n.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lam * lam).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[test]
fn waiting_times_follow_exponential_law() {
    let gamma = 1.3;
    let model = oscillator_model(3, zero_h(3), gamma, 0.0);
    let psi = QuantumState::basis(model.space(), 0, 1).unwrap();
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
    let solver = TrajectorySolver::new(&model, &times, 10).unwrap();
    let mut waits: Vec<f64> = (0..10_000u64)
        .map(|seed| {
            let rec = solver.run(&psi, seed, &[], &TrajectoryOptions::default()).unwrap();
            assert_eq!(rec.jumps.len(), 1);
            rec.jumps[0].time
        })
        .collect();
    waits.sort_by(f64::total_cmp);
    let n = waits.len();
    let d = waits
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let cdf = 1.0 - (-gamma * t).exp();
            (cdf - i as f64 / n as f64).abs().max((cdf - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    let p = ks_p_value(d, n);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn jump_on_cat_flips_parity() {
    let n = 30;
    let space = HilbertSpace::qubit(n).unwrap();
    let (l2, o0) = (-0.02, 0.2);
    let h = build_cat_interaction(l2, o0, space).unwrap();
    let d = DissipationParams { gamma_s: 0.001, gamma_m: 0.01, n_th: 0.0, gamma_0: 0.0 };
    let model = make_model(h, &d, Variant::Cat).unwrap();
    let beta = C64::new((-o0 / l2).sqrt(), 0.0);
    let amps = cat_amplitudes(beta, Parity::Even, n).unwrap();
    let psi = QuantumState::product(space, &qubit_level(1), &amps).unwrap();
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * 5.0).collect();
    let opts = TrajectoryOptions { record_jump_states: true, ..TrajectoryOptions::default() };
    let mut seen = 0;
    for seed in 0..5 {
        let rec = mcwf_trajectory(&model, &psi, &times, seed, &[], &opts).unwrap();
        for j in rec.jumps.iter().filter(|j| j.label == "damping") {
            let before = QuantumState::pure_normalized(space, j.before.clone().unwrap()).unwrap();
            let after = QuantumState::pure(space, j.after.clone().unwrap()).unwrap();
            let (pb, pa) = (parity_expectation(&before), parity_expectation(&after));
            assert!(pb.abs() > 1.0 - 1e-9);
            assert_abs_diff_eq!(pa, -pb, epsilon = 1e-9);
            seen += 1;
        }
    }
    assert!(seen > 0);
}

fn driven_qubit_model() -> (LindbladModel, QuantumState, Vec<Operator>) {
    let space = HilbertSpace::qubit(4).unwrap();
    let sx = spin_op(SpinKind::SigmaX, space).unwrap();
    let a = fock_op(FockKind::Annihilate, space);
    let sm = spin_op(SpinKind::SigmaMinus, space).unwrap();
    let coupling = sm.compose(&a.dagger()).unwrap();
    let h = sx.add(&coupling.add(&coupling.dagger()).unwrap().scale_re(0.5)).unwrap();
    let h = Operator::hermitian(space, h.into_matrix()).unwrap();
    let model = LindbladModel::new(
        h,
        vec![
            Channel { rate: 0.4, op: sm, label: "spin_decay".into() },
            Channel { rate: 0.3, op: a, label: "damping".into() },
        ],
    )
    .unwrap();
    let psi = QuantumState::basis(space, 1, 0).unwrap();
    let obs = vec![fock_op(FockKind::Number, space), spin_op(SpinKind::SigmaZ, space).unwrap()];
    (model, psi, obs)
}

#[test]
fn ensemble_agrees_with_master_equation() {
    let (model, psi, obs) = driven_qubit_model();
    let times: Vec<f64> = (0..=16).map(|k| k as f64 * 0.5).collect();
    let ens = trajectory_ensemble(&model, &psi, &times, 500, 100, &obs, &TrajectoryOptions::default()).unwrap();
    let ev = lindblad_evolve(&model, &psi.to_density(), &times, &EvolveOptions::default()).unwrap();
    // Per-point z-scores; a 3-sigma excursion somewhere among 32 correlated
    // points is expected now and then, so the bound here is 4 sigma plus a
    // check on the typical size.
    let mut zs = Vec::new();
    for (k, o) in obs.iter().enumerate() {
        let exact = ev.expect(o).unwrap();
        for i in 1..times.len() {
            let z = (ens.mean[k][i] - exact[i]).abs() / ens.stderr[k][i];
            assert!(z < 4.0, "obs {k} t = {}: z = {z}", times[i]);
            zs.push(z);
        }
    }
    let mean_z = zs.iter().sum::<f64>() / zs.len() as f64;
    assert!(mean_z < 1.2, "mean |z| = {mean_z}");
}

#[test]
fn single_member_ensemble_is_the_trajectory() {
    let (model, psi, obs) = driven_qubit_model();
    let times: Vec<f64> = (0..=6).map(|k| k as f64).collect();
    let ens = trajectory_ensemble(&model, &psi, &times, 1, 42, &obs, &TrajectoryOptions::default()).unwrap();
    let rec = mcwf_trajectory(&model, &psi, &times, 42, &obs, &TrajectoryOptions::default()).unwrap();
    assert_eq!(ens.mean, rec.expectations);
    assert!(ens.stderr.iter().flatten().all(|s| *s == 0.0));
}

#[test]
fn standard_error_shrinks_with_ensemble_size() {
    let (model, psi, obs) = driven_qubit_model();
    let times = [0.0, 3.0];
    let small = trajectory_ensemble(&model, &psi, &times, 400, 0, &obs, &TrajectoryOptions::default()).unwrap();
    let large = trajectory_ensemble(&model, &psi, &times, 800, 10_000, &obs, &TrajectoryOptions::default()).unwrap();
    let ratio = large.stderr[0][1] / small.stderr[0][1];
    assert!((ratio - 0.5f64.sqrt()).abs() < 0.1, "ratio {ratio}");
}
