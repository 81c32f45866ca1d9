//! Haar-random interferometers and Monte-Carlo statistics of output-state
//! cumulants.
//!
//! Each trial draws one unitary from its own ChaCha20 stream, selected by
//! `(seed, trial)`. The same unitary is applied to every filling `K` and, in
//! [`family_sweep`], to every state family, so comparisons use common random
//! numbers. Trials run in parallel but are folded into the running
//! statistics in trial order, which makes results independent of the thread
//! count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, StateFamily};
use crate::moments::cumulant_via_montrealer;
use crate::{CMatrix, C64};

/// Highest cumulant order a Monte-Carlo run may request.
pub const MAX_MC_ORDER: usize = 4;

/// Haar-distributed `ell × ell` unitary: a complex Ginibre matrix made
/// unitary by QR, with column `j` multiplied by the phase of `R_jj`.
pub fn haar_unitary<R: Rng + ?Sized>(ell: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(ell, ell, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..ell {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..ell {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// The interferometer used by trial `trial`.
pub fn trial_unitary(seed: u64, trial: u64, ell: usize) -> CMatrix {
    haar_unitary(ell, &mut trial_rng(seed, trial))
}

/// A Monte-Carlo experiment: `K` copies of a single-mode state from
/// `family` in the first `K` of `ell` modes, sent through Haar-random
/// interferometers. The order-`r` cumulant is recorded over output modes
/// `0..r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub ell: usize,
    pub k_values: Vec<usize>,
    pub family: StateFamily,
    pub nbar: f64,
    pub orders: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        if self.ell == 0 {
            return bad("ell must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.k_values.is_empty() || self.orders.is_empty() {
            return bad("k_values and orders must be non-empty".into());
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k > self.ell) {
            return bad(format!("K = {k} exceeds ell = {}", self.ell));
        }
        if let Some(r) = self.orders.iter().find(|&&r| r == 0 || r > MAX_MC_ORDER || r > self.ell) {
            return bad(format!("order {r} must lie in 1..={} and not exceed ell", MAX_MC_ORDER));
        }
        self.family.eccentricity(self.nbar)?;
        Ok(())
    }
}

/// One-pass mean and variance accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; zero for fewer than two samples.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0).sqrt()
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std() / (self.count as f64).sqrt()
        }
    }
}

/// Statistics of one `(K, order)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub k: usize,
    pub order: usize,
    pub mean: f64,
    pub std: f64,
    pub trials: u64,
}

impl StatsRow {
    pub fn std_error(&self) -> f64 {
        self.std / (self.trials as f64).sqrt()
    }
}

/// Result of [`run_mc`], one row per `(K, order)` in configuration order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulantStats {
    pub family: StateFamily,
    pub ell: usize,
    pub nbar: f64,
    pub seed: u64,
    pub rows: Vec<StatsRow>,
}

impl CumulantStats {
    pub fn get(&self, k: usize, order: usize) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.k == k && r.order == order)
    }
}

fn trial_values(config: &McConfig, inputs: &[GaussianState], trial: u64) -> Result<Vec<f64>> {
    let u = trial_unitary(config.seed, trial, config.ell);
    let mut out = Vec::with_capacity(inputs.len() * config.orders.len());
    for input in inputs {
        let output = input.apply_interferometer(&u)?;
        for &r in &config.orders {
            let modes: Vec<usize> = (0..r).collect();
            out.push(cumulant_via_montrealer(&output, &modes)?);
        }
    }
    Ok(out)
}

/// Runs the experiment described by `config`.
pub fn run_mc(config: &McConfig) -> Result<CumulantStats> {
    config.validate()?;
    let inputs: Vec<GaussianState> = config
        .k_values
        .iter()
        .map(|&k| GaussianState::from_family(config.family, config.nbar, k, config.ell))
        .collect::<Result<_>>()?;
    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| trial_values(config, &inputs, t))
        .collect::<Result<_>>()?;
    let cells = config.k_values.len() * config.orders.len();
    let mut acc = vec![RunningStats::default(); cells];
    for values in &per_trial {
        for (a, &v) in acc.iter_mut().zip(values) {
            a.push(v);
        }
    }
    let mut rows = Vec::with_capacity(cells);
    for (ki, &k) in config.k_values.iter().enumerate() {
        for (oi, &order) in config.orders.iter().enumerate() {
            let a = &acc[ki * config.orders.len() + oi];
            rows.push(StatsRow { k, order, mean: a.mean(), std: a.std(), trials: a.count() });
        }
    }
    Ok(CumulantStats { family: config.family, ell: config.ell, nbar: config.nbar, seed: config.seed, rows })
}

/// Runs `base` once per family with the same seed, so every family sees the
/// same sequence of interferometers.
pub fn family_sweep(base: &McConfig, families: &[StateFamily]) -> Result<Vec<CumulantStats>> {
    families
        .iter()
        .map(|&family| run_mc(&McConfig { family, ..base.clone() }))
        .collect()
}
