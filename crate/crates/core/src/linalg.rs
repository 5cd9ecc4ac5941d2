//! Dense complex linear algebra shared by the builders and solvers.

use ndarray::{Array1, Array2, ArrayRef2, ShapeBuilder, Zip};
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;

use crate::error::Result;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn dagger(m: &ArrayRef2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, ONE)
}

/// Largest entry of |M - M^dag|.
pub fn hermitian_deviation(m: &ArrayRef2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Replace `m` by (M + M^dag)/2 in place.
pub fn symmetrize(m: &mut Array2<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &ArrayRef2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    // LAPACK sees a row-major buffer as the transpose, which for a Hermitian
    // matrix conjugates the eigenvectors; hand it column-major storage.
    let mut h = Array2::zeros(m.raw_dim().f());
    h.assign(m);
    symmetrize(&mut h);
    let (w, v) = h.eigh(UPLO::Lower)?;
    Ok((w, v))
}

pub fn eigvalsh(m: &ArrayRef2<C64>) -> Result<Array1<f64>> {
    Ok(eigh(m)?.0)
}

pub fn trace(m: &ArrayRef2<C64>) -> C64 {
    m.diag().sum()
}

pub fn frobenius(m: &ArrayRef2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ArrayRef2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn one_norm(m: &ArrayRef2<C64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a general complex matrix.
///
/// Scaling and squaring with a degree-13 Pade approximant (Higham 2005).
pub fn expm(m: &ArrayRef2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    let theta13 = 5.371920351148152;
    let norm = one_norm(m);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.mapv(|z| z / 2f64.powi(s));
    let b = &PADE13;
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let c = |k: usize| C64::new(b[k], 0.0);
    let inner_u = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u_poly = a6.dot(&inner_u) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = a.dot(&u_poly);
    let inner_v = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = a6.dot(&inner_v) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let p = &v + &u;
    let q = (&v - &u).inv()?;
    let mut r = q.dot(&p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// exp(-i t H) for Hermitian H via its eigendecomposition.
pub fn expm_hermitian(h: &ArrayRef2<C64>, t: f64) -> Result<Array2<C64>> {
    let (w, v) = eigh(h)?;
    let mut vd = v.clone();
    Zip::from(vd.columns_mut()).and(&w).for_each(|mut col, &e| {
        let ph = C64::from_polar(1.0, -e * t);
        col.mapv_inplace(|z| z * ph);
    });
    Ok(vd.dot(&dagger(&v)))
}

pub fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
