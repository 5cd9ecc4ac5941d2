//! Adaptive Dormand-Prince 5(4) integrator for matrix-valued ODEs.

use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 50_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

fn err_norm(err: &Array2<C64>, y0: &Array2<C64>, y1: &Array2<C64>, tol: &Tolerances) -> f64 {
    let mut acc = 0.0;
    Zip::from(err).and(y0).and(y1).for_each(|e, a, b| {
        let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
        acc += (e.norm() / sc).powi(2);
    });
    (acc / err.len() as f64).sqrt()
}

/// Integrates y' = f(t, y) from `times[0]`, landing exactly on every output time.
///
/// `f(t, y, dy)` overwrites `dy`; `post_step` runs on each accepted state
/// (used to re-impose Hermiticity); `output(k, y)` sees the state at `times[k]`.
pub fn integrate<F, P, O>(
    mut f: F,
    mut y: Array2<C64>,
    times: &[f64],
    tol: &Tolerances,
    mut post_step: P,
    mut output: O,
) -> Result<Stats>
where
    F: FnMut(f64, &Array2<C64>, &mut Array2<C64>),
    P: FnMut(&mut Array2<C64>),
    O: FnMut(usize, &Array2<C64>) -> Result<()>,
{
    let mut stats = Stats::default();
    if times.is_empty() {
        return Ok(stats);
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("output times must be non-decreasing".into()));
    }
    let shape = y.raw_dim();
    let mut k: Vec<Array2<C64>> = (0..7).map(|_| Array2::zeros(shape.clone())).collect();
    let mut stage = Array2::zeros(shape.clone());
    let mut y_new = Array2::zeros(shape.clone());
    let mut err = Array2::zeros(shape);

    let mut t = times[0];
    output(0, &y)?;
    f(t, &y, &mut k[0]);

    // Starting step (Hairer, Norsett & Wanner II.4).
    let span = times[times.len() - 1] - t;
    let d0 = err_norm(&y, &y, &y, tol);
    let d1 = err_norm(&k[0], &y, &y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    if span > 0.0 {
        h = h.min(span);
    }

    for (idx, &t_out) in times.iter().enumerate().skip(1) {
        while t < t_out {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(Error::Integration { time: t, reason: "step budget exhausted".into() });
            }
            let remaining = t_out - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Integration { time: t, reason: format!("step size {step:e} underflow") });
            }

            for s in 1..7 {
                stage.assign(&y);
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        stage.scaled_add(C64::new(step * a, 0.0), kj);
                    }
                }
                f(t + C[s] * step, &stage, &mut k[s]);
                if s == 6 {
                    y_new.assign(&stage);
                }
            }
            err.fill(C64::new(0.0, 0.0));
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    err.scaled_add(C64::new(step * E[j], 0.0), kj);
                }
            }
            let en = err_norm(&err, &y, &y_new, tol);
            if !en.is_finite() {
                return Err(Error::Integration { time: t, reason: "non-finite state".into() });
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            if en <= 1.0 {
                t = if last { t_out } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                post_step(&mut y);
                f(t, &y, &mut k[0]);
                stats.accepted += 1;
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor.min(1.0));
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        output(idx, &y)?;
    }
    Ok(stats)
}

/// Re-impose Hermiticity.
pub fn hermitize(y: &mut Array2<C64>) {
    linalg::symmetrize(y);
}
