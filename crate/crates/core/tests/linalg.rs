use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sidebands::linalg::*;

fn random(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> Array2<C64> {
    let m = random(rng, n);
    (&m + &dagger(&m)).mapv(|z| z * 0.5)
}

#[test]
fn eigh_of_complex_hermitian_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 5, 17] {
        let h = hermitian(&mut rng, n);
        let (w, v) = eigh(&h).unwrap();
        let lhs = h.dot(&v);
        let rhs = &v * &w.mapv(|x| C64::new(x, 0.0));
        assert!(max_abs(&(&lhs - &rhs)) < 1e-12);
        assert!(w.windows(2).into_iter().all(|p| p[0] <= p[1]));
    }
}

#[test]
fn sigma_y_eigenvector_phase() {
    let i = C64::new(0.0, 1.0);
    let sy = ndarray::array![[ZERO, -i], [i, ZERO]];
    let (w, v) = eigh(&sy).unwrap();
    assert!((w[1] - 1.0).abs() < 1e-15);
    // +1 eigenvector is (1, i)/sqrt(2) up to a global phase.
    let ratio = v[[1, 1]] / v[[0, 1]];
    assert!((ratio - i).norm() < 1e-14);
}

#[test]
fn pade_and_spectral_exponentials_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = hermitian(&mut rng, 9).mapv(|z| z * 6.0);
    let t = 0.83;
    let a = expm(&h.mapv(|z| z * C64::new(0.0, -t))).unwrap();
    let b = expm_hermitian(&h, t).unwrap();
    assert!(max_abs(&(&a - &b)) < 1e-11);
    let u = a.dot(&dagger(&a));
    assert!(max_abs(&(&u - &identity(9))) < 1e-11);
}

#[test]
fn expm_of_nilpotent() {
    let mut m = Array2::zeros((3, 3));
    m[[0, 1]] = C64::new(2.0, 1.0);
    let e = expm(&m).unwrap();
    assert!((e[[0, 1]] - C64::new(2.0, 1.0)).norm() < 1e-14);
    assert!((e[[0, 0]] - ONE).norm() < 1e-14);
}

#[test]
fn complex_solve_in_row_major_storage() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random(&mut rng, 12);
    let x = Array1::from_shape_fn(12, |k| C64::new(k as f64, 1.0 - k as f64));
    let b = a.dot(&x);
    let got = a.solve_into(b).unwrap();
    assert!(got.iter().zip(x.iter()).all(|(p, q)| (p - q).norm() < 1e-10));
}
