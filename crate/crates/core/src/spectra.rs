//! Eigenvalue sweeps over the drive amplitude and avoided-crossing extraction.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, Operator};
use crate::linalg;
use crate::model::{build_dressed_mollow, MollowParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSweep {
    pub label: String,
    pub omegas: Vec<f64>,
    /// Sorted eigenvalues per grid point, lowest `skip..skip+take` retained.
    pub levels: Vec<Vec<f64>>,
    pub skip: usize,
}

impl SpectrumSweep {
    pub fn to_csv(&self) -> String {
        let k = self.levels.first().map_or(0, |l| l.len());
        let mut out = String::from("Omega");
        for j in 0..k {
            out.push_str(&format!(",E_{}", self.skip + j + 1));
        }
        out.push('\n');
        for (w, row) in self.omegas.iter().zip(&self.levels) {
            out.push_str(&format!("{w:.10e}"));
            for e in row {
                out.push_str(&format!(",{e:.12e}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Eigenvalues of `builder(Omega)` over a uniform grid, evaluated in parallel.
///
/// `take = None` keeps every level above the first `skip`.
pub fn sweep<F>(
    label: &str,
    builder: F,
    omega_range: (f64, f64),
    resolution: usize,
    skip: usize,
    take: Option<usize>,
) -> Result<SpectrumSweep>
where
    F: Fn(f64) -> Result<Operator> + Sync,
{
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution {resolution} < 3")));
    }
    let omegas = linspace(omega_range.0, omega_range.1, resolution);
    let levels = omegas
        .par_iter()
        .map(|&w| -> Result<Vec<f64>> {
            let h = builder(w)?;
            let dev = h.hermitian_deviation();
            if dev >= 1e-12 {
                return Err(Error::NotHermitian(dev));
            }
            let ev = linalg::eigvalsh(h.matrix())?;
            let end = take.map_or(ev.len(), |t| (skip + t).min(ev.len()));
            Ok(ev.iter().skip(skip).take(end.saturating_sub(skip)).copied().collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumSweep { label: label.to_string(), omegas, levels, skip })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingReport {
    pub n: usize,
    pub omega_star: f64,
    pub gap: f64,
    pub predicted_omega: f64,
    pub window: (f64, f64),
    /// Smallest adjacent-point overlap seen while tracking.
    pub min_overlap: f64,
}

fn overlap(v: &Array2<C64>, k: usize, w: &Array1<C64>) -> f64 {
    v.column(k).iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
}

fn best_match(v: &Array2<C64>, w: &Array1<C64>, exclude: Option<usize>) -> (usize, f64) {
    (0..v.ncols())
        .filter(|&k| Some(k) != exclude)
        .map(|k| (k, overlap(v, k, w)))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// Splitting of the two eigenvectors that carry the most weight in span{u, w}.
fn pair_gap(h: &Operator, u: &Array1<C64>, w: &Array1<C64>) -> Result<f64> {
    let (e, v) = linalg::eigh(h.matrix())?;
    let mut weights: Vec<(usize, f64)> =
        (0..v.ncols()).map(|k| (k, overlap(&v, k, u) + overlap(&v, k, w))).collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok((e[weights[0].0] - e[weights[1].0]).abs())
}

/// Locate the avoided crossing between the dressed levels adiabatically
/// connected to the bare states `bare_a` and `bare_b` inside `window`.
pub fn find_crossing<F>(
    builder: F,
    n: usize,
    bare_a: usize,
    bare_b: usize,
    window: (f64, f64),
    resolution: usize,
    predicted_omega: f64,
) -> Result<CrossingReport>
where
    F: Fn(f64) -> Result<Operator> + Sync,
{
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution {resolution} < 3")));
    }
    let omegas = linspace(window.0, window.1, resolution);
    let decomps = omegas
        .par_iter()
        .map(|&w| -> Result<(Array1<f64>, Array2<C64>)> {
            let h = builder(w)?;
            let dev = h.hermitian_deviation();
            if dev >= 1e-12 {
                return Err(Error::NotHermitian(dev));
            }
            linalg::eigh(h.matrix())
        })
        .collect::<Result<Vec<_>>>()?;

    let dim = decomps[0].1.nrows();
    let unit = |i: usize| {
        let mut e = Array1::from_elem(dim, C64::new(0.0, 0.0));
        e[i] = C64::new(1.0, 0.0);
        e
    };
    let (mut ka, oa) = best_match(&decomps[0].1, &unit(bare_a), None);
    let (mut kb, ob) = best_match(&decomps[0].1, &unit(bare_b), Some(ka));
    let mut min_overlap = oa.min(ob);
    if min_overlap < 0.3 {
        return Err(Error::TrackingLost { omega: omegas[0], overlap: min_overlap });
    }
    let mut tracked = vec![(ka, kb)];
    for i in 1..omegas.len() {
        let prev = &decomps[i - 1].1;
        let va = prev.column(ka).to_owned();
        let vb = prev.column(kb).to_owned();
        let (na, sa) = best_match(&decomps[i].1, &va, None);
        let (nb, sb) = best_match(&decomps[i].1, &vb, Some(na));
        let worst = sa.min(sb);
        min_overlap = min_overlap.min(worst);
        if worst < 0.3 {
            return Err(Error::TrackingLost { omega: omegas[i], overlap: worst });
        }
        ka = na;
        kb = nb;
        tracked.push((ka, kb));
    }

    let gaps: Vec<f64> = tracked
        .iter()
        .zip(&decomps)
        .map(|(&(a, b), (e, _))| (e[a] - e[b]).abs())
        .collect();
    let imin = gaps
        .iter()
        .enumerate()
        .fold(0, |best, (i, g)| if *g < gaps[best] { i } else { best });
    if imin == 0 || imin == gaps.len() - 1 {
        return Err(Error::MinimumAtBoundary(omegas[imin]));
    }

    let (a, b) = tracked[imin];
    let u = decomps[imin].1.column(a).to_owned();
    let w = decomps[imin].1.column(b).to_owned();
    let gap_at = |omega: f64| -> Result<f64> { pair_gap(&builder(omega)?, &u, &w) };

    let (mut lo, mut hi) = (omegas[imin - 1], omegas[imin + 1]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = gap_at(x1)?;
    let mut f2 = gap_at(x2)?;
    while hi - lo > 1e-9 * (1.0 + hi.abs()) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = gap_at(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = gap_at(x2)?;
        }
    }
    let omega_star = 0.5 * (lo + hi);
    let gap = gap_at(omega_star)?;
    Ok(CrossingReport { n, omega_star, gap, predicted_omega, window, min_overlap })
}

/// Crossing between |+,0> and |-,n> of the dressed Mollow Hamiltonian near 2 Omega = n Delta_a.
pub fn find_mollow_crossing(
    n: usize,
    lambda: f64,
    delta_a: f64,
    cutoff: usize,
    resolution: usize,
) -> Result<CrossingReport> {
    let space = HilbertSpace::qubit(cutoff)?;
    if n == 0 || n >= cutoff {
        return Err(Error::InvalidArgument(format!("order {n} outside cutoff {cutoff}")));
    }
    let predicted = n as f64 * delta_a / 2.0;
    let window = (predicted - delta_a / 4.0, predicted + delta_a / 4.0);
    let builder = move |omega: f64| {
        build_dressed_mollow(&MollowParams { lambda, omega, delta_a, ..MollowParams::default() }, space)
    };
    find_crossing(builder, n, space.index(0, 0), space.index(1, n), window, resolution, predicted)
}
