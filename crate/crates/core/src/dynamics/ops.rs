//! Matrix kernels for the propagators: dense or row-sparse storage chosen by fill.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg::ZERO;

#[derive(Clone, Debug)]
pub(crate) enum Op {
    Dense { a: Array2<C64>, ad: Array2<C64> },
    Sparse { n: usize, entries: Vec<(usize, usize, C64)> },
}

impl Op {
    pub fn new(m: &Array2<C64>) -> Self {
        let n = m.nrows();
        let entries: Vec<(usize, usize, C64)> = m
            .indexed_iter()
            .filter(|(_, z)| **z != ZERO)
            .map(|((i, j), z)| (i, j, *z))
            .collect();
        if entries.len() * 4 <= n * n {
            Op::Sparse { n, entries }
        } else {
            Op::Dense { a: m.clone(), ad: m.t().mapv(|z| z.conj()) }
        }
    }

    /// out += alpha A X
    pub fn left(&self, alpha: C64, x: &Array2<C64>, out: &mut Array2<C64>) {
        match self {
            Op::Dense { a, .. } => general_mat_mul(alpha, a, x, C64::new(1.0, 0.0), out),
            Op::Sparse { entries, .. } => {
                for &(i, k, v) in entries {
                    let c = alpha * v;
                    let src = x.row(k);
                    let mut dst = out.row_mut(i);
                    dst.zip_mut_with(&src, |d, s| *d += c * s);
                }
            }
        }
    }

    /// out += alpha X A^dag
    pub fn right_dagger(&self, alpha: C64, x: &Array2<C64>, out: &mut Array2<C64>) {
        match self {
            Op::Dense { ad, .. } => general_mat_mul(alpha, x, ad, C64::new(1.0, 0.0), out),
            Op::Sparse { entries, .. } => {
                // (X A^dag)_{ij} = sum_k X_{ik} conj(A_{jk})
                for &(j, k, v) in entries {
                    let c = alpha * v.conj();
                    let src = x.column(k);
                    let mut dst = out.column_mut(j);
                    dst.zip_mut_with(&src, |d, s| *d += c * s);
                }
            }
        }
    }

    pub fn apply(&self, psi: &Array1<C64>) -> Array1<C64> {
        match self {
            Op::Dense { a, .. } => a.dot(psi),
            Op::Sparse { n, entries } => {
                let mut out = Array1::from_elem(*n, ZERO);
                for &(i, k, v) in entries {
                    out[i] += v * psi[k];
                }
                out
            }
        }
    }

    /// C X C^dag accumulated into out.
    pub fn sandwich(&self, x: &Array2<C64>, scratch: &mut Array2<C64>, out: &mut Array2<C64>) {
        scratch.fill(ZERO);
        self.left(C64::new(1.0, 0.0), x, scratch);
        self.right_dagger(C64::new(1.0, 0.0), scratch, out);
    }
}
