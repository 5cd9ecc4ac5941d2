//! Photon-counting quantum-jump trajectories.
//!
//! Between jumps the unnormalized state follows exp(-i Heff t). Propagators
//! for the output interval h and its dyadic fractions h/2^k are tabulated
//! once, so the norm crossing of a pre-drawn threshold is located by binary
//! lifting to h/2^levels without any ODE error.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::LindbladModel;
use super::ops::Op;
use crate::error::{Error, Result};
use crate::hilbert::{vec_norm, Operator, QuantumState};
use crate::linalg::{self, I};

#[derive(Clone, Copy, Debug)]
pub struct TrajectoryOptions {
    /// Jump times are resolved to (output interval) / 2^levels.
    pub levels: u32,
    pub record_states: bool,
    pub record_jump_states: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { levels: 10, record_states: false, record_jump_states: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
    pub label: String,
    #[serde(skip)]
    pub before: Option<Array1<C64>>,
    #[serde(skip)]
    pub after: Option<Array1<C64>>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub times: Vec<f64>,
    /// expectations[k][i]: observable k at times[i].
    pub expectations: Vec<Vec<f64>>,
    pub jumps: Vec<JumpEvent>,
    pub states: Option<Vec<QuantumState>>,
}

/// Precomputed non-Hermitian propagators for one model and time grid.
pub struct TrajectorySolver {
    model: LindbladModel,
    times: Vec<f64>,
    levels: u32,
    collapse: Vec<Op>,
    /// Index into `model.channels()` for each entry of `collapse`.
    channel_index: Vec<usize>,
    /// Per distinct interval length: U[b] = exp(-i Heff tick 2^b), b = 0..=levels.
    tables: BTreeMap<u64, Vec<Array2<C64>>>,
}

fn interval_key(h: f64) -> u64 {
    h.to_bits()
}

impl TrajectorySolver {
    pub fn new(model: &LindbladModel, times: &[f64], levels: u32) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("no output times".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("output times must be strictly increasing".into()));
        }
        if levels > 20 {
            return Err(Error::InvalidArgument(format!("levels {levels} > 20")));
        }
        let heff = model.effective_hamiltonian();
        let mut tables = BTreeMap::new();
        for w in times.windows(2) {
            let h = w[1] - w[0];
            let key = interval_key(h);
            if tables.contains_key(&key) {
                continue;
            }
            let tick = h / f64::from(1u32 << levels);
            let mut table = Vec::with_capacity(levels as usize + 1);
            let base = linalg::expm(&heff.mapv(|z| -I * z * tick))?;
            table.push(base);
            for b in 1..=levels as usize {
                let prev = &table[b - 1];
                let next = prev.dot(prev);
                table.push(next);
            }
            tables.insert(key, table);
        }
        let mut collapse = Vec::new();
        let mut channel_index = Vec::new();
        for (k, ch) in model.channels().iter().enumerate() {
            if ch.rate > 0.0 {
                collapse.push(Op::new(&ch.op.matrix().mapv(|z| z * ch.rate.sqrt())));
                channel_index.push(k);
            }
        }
        Ok(Self {
            model: model.clone(),
            times: times.to_vec(),
            levels,
            collapse,
            channel_index,
            tables,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Advance `psi` by `ticks` (< 2^(levels+1)) using the binary table.
    fn advance(table: &[Array2<C64>], psi: &Array1<C64>, ticks: u64) -> Array1<C64> {
        let mut out = psi.clone();
        for (b, u) in table.iter().enumerate() {
            if ticks & (1 << b) != 0 {
                out = u.dot(&out);
            }
        }
        out
    }

    pub fn run(
        &self,
        psi0: &QuantumState,
        seed: u64,
        observables: &[Operator],
        opts: &TrajectoryOptions,
    ) -> Result<TrajectoryRecord> {
        let space = self.model.space();
        let psi_init = psi0
            .vector()
            .ok_or_else(|| Error::InvalidArgument("trajectory needs a pure initial state".into()))?;
        if psi0.space() != space {
            return Err(Error::DimensionMismatch("initial state lives on a different space".into()));
        }
        for o in observables {
            if o.space() != space {
                return Err(Error::DimensionMismatch("observable on a different space".into()));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| 1.0 - rng.random::<f64>();

        let full: u64 = 1 << self.levels;
        let mut psi = psi_init.mapv(|z| z / vec_norm(psi_init));
        let mut threshold = draw(&mut rng);
        let mut jumps = Vec::new();
        let mut expectations = vec![Vec::with_capacity(self.times.len()); observables.len()];
        let mut states = opts.record_states.then(Vec::new);

        let record = |psi: &Array1<C64>,
                      expectations: &mut Vec<Vec<f64>>,
                      states: &mut Option<Vec<QuantumState>>|
         -> Result<()> {
            let norm = vec_norm(psi);
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Integration { time: f64::NAN, reason: "state norm underflow".into() });
            }
            let unit = psi.mapv(|z| z / norm);
            for (k, o) in observables.iter().enumerate() {
                let opsi = o.matrix().dot(&unit);
                let v: C64 = unit.iter().zip(opsi.iter()).map(|(a, b)| a.conj() * b).sum();
                expectations[k].push(v.re);
            }
            if let Some(s) = states {
                s.push(QuantumState::pure_unchecked(space, unit));
            }
            Ok(())
        };

        record(&psi, &mut expectations, &mut states)?;
        for w in self.times.windows(2) {
            let (t_start, h) = (w[0], w[1] - w[0]);
            let table = &self.tables[&interval_key(h)];
            let tick = h / full as f64;
            let mut pos: u64 = 0;
            loop {
                let remaining = full - pos;
                let end = Self::advance(table, &psi, remaining);
                if vec_norm(&end).powi(2) > threshold {
                    psi = end;
                    break;
                }
                // Largest number of ticks that keeps the norm above threshold.
                let mut phi = psi.clone();
                let mut step: u64 = 0;
                for b in (0..=self.levels as usize).rev() {
                    let s = 1u64 << b;
                    if step + s >= remaining {
                        continue;
                    }
                    let cand = table[b].dot(&phi);
                    if vec_norm(&cand).powi(2) > threshold {
                        phi = cand;
                        step += s;
                    }
                }
                let at_jump = table[0].dot(&phi);
                pos += step + 1;
                let t_jump = t_start + pos as f64 * tick;

                let weights: Vec<f64> =
                    self.collapse.iter().map(|c| vec_norm(&c.apply(&at_jump)).powi(2)).collect();
                let total: f64 = weights.iter().sum();
                if !(total > 0.0) || !total.is_finite() {
                    return Err(Error::Integration {
                        time: t_jump,
                        reason: "norm decayed with no active jump channel".into(),
                    });
                }
                let mut pick = rng.random::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (k, wk) in weights.iter().enumerate() {
                    if pick < *wk {
                        chosen = k;
                        break;
                    }
                    pick -= wk;
                }
                let jumped = self.collapse[chosen].apply(&at_jump);
                let jn = vec_norm(&jumped);
                let after = jumped.mapv(|z| z / jn);
                let label = self.model.channels()[self.channel_index[chosen]].label.clone();
                jumps.push(JumpEvent {
                    time: t_jump,
                    channel: self.channel_index[chosen],
                    label,
                    before: opts.record_jump_states.then(|| at_jump.mapv(|z| z / vec_norm(&at_jump))),
                    after: opts.record_jump_states.then(|| after.clone()),
                });
                psi = after;
                threshold = draw(&mut rng);
                if pos == full {
                    break;
                }
            }
            record(&psi, &mut expectations, &mut states).map_err(|e| match e {
                Error::Integration { reason, .. } => Error::Integration { time: w[1], reason },
                other => other,
            })?;
        }
        Ok(TrajectoryRecord { seed, times: self.times.clone(), expectations, jumps, states })
    }
}

pub fn mcwf_trajectory(
    model: &LindbladModel,
    psi0: &QuantumState,
    times: &[f64],
    seed: u64,
    observables: &[Operator],
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord> {
    TrajectorySolver::new(model, times, opts.levels)?.run(psi0, seed, observables, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub seed0: u64,
    /// mean[k][i] and stderr[k][i] for observable k at times[i].
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub total_jumps: usize,
}

/// Averages trajectories with seeds seed0 .. seed0 + n_traj - 1, run in parallel.
pub fn trajectory_ensemble(
    model: &LindbladModel,
    psi0: &QuantumState,
    times: &[f64],
    n_traj: usize,
    seed0: u64,
    observables: &[Operator],
    opts: &TrajectoryOptions,
) -> Result<EnsembleResult> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be >= 1".into()));
    }
    let solver = TrajectorySolver::new(model, times, opts.levels)?;
    let lean = TrajectoryOptions { record_states: false, record_jump_states: false, ..*opts };
    let records = (0..n_traj as u64)
        .into_par_iter()
        .map(|k| solver.run(psi0, seed0 + k, observables, &lean))
        .collect::<Result<Vec<_>>>()?;
    let nt = times.len();
    let mut mean = vec![vec![0.0; nt]; observables.len()];
    let mut stderr = vec![vec![0.0; nt]; observables.len()];
    for k in 0..observables.len() {
        for i in 0..nt {
            let xs: Vec<f64> = records.iter().map(|r| r.expectations[k][i]).collect();
            let m = xs.iter().sum::<f64>() / n_traj as f64;
            mean[k][i] = m;
            stderr[k][i] = if n_traj > 1 {
                let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n_traj - 1) as f64;
                (var / n_traj as f64).sqrt()
            } else {
                0.0
            };
        }
    }
    Ok(EnsembleResult {
        times: times.to_vec(),
        n_traj,
        seed0,
        mean,
        stderr,
        total_jumps: records.iter().map(|r| r.jumps.len()).sum(),
    })
}
