//! Repeated randomized handshakes and the empirical statistics they yield.
//!
//! Trial `i` draws from its own ChaCha8 stream: the generator is seeded with
//! `seed_from_u64(base_seed)` and switched to stream `i`. Results therefore do
//! not depend on how trials are scheduled across threads, and per-trial
//! outputs are reduced in trial order.

use std::f64::consts::{FRAC_2_PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{MobilityModel, NodeRealization, ParameterVector, SystemConfig};
use crate::protocol::{build_schedule, run_oac_phase, run_sync_phase};
use crate::theory::{cdf_abs_deviation, rmse_theory, VarianceBreakdown};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const SMOKE_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub n_trials: u64,
    pub base_seed: u64,
    pub record_breakdown: bool,
    /// 1-based node indices.
    pub nodes_of_interest: Vec<usize>,
    pub symbols_of_interest: Vec<usize>,
}

impl TrialPlan {
    /// Node 1 (the node with the longest handshake) on every symbol.
    pub fn for_config(config: &SystemConfig, n_trials: u64, base_seed: u64) -> Self {
        Self {
            n_trials,
            base_seed,
            record_breakdown: false,
            nodes_of_interest: vec![1],
            symbols_of_interest: (0..config.num_oac_symbols).collect(),
        }
    }

    pub fn validate(&self, config: &SystemConfig) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidPlan("n_trials must be at least 1".into()));
        }
        if self.nodes_of_interest.is_empty() || self.symbols_of_interest.is_empty() {
            return Err(Error::InvalidPlan("nodes and symbols of interest must be non-empty".into()));
        }
        if let Some(k) = self.nodes_of_interest.iter().find(|&&k| k == 0 || k > config.num_nodes) {
            return Err(Error::InvalidPlan(format!("node {k} outside 1..={}", config.num_nodes)));
        }
        if let Some(m) = self.symbols_of_interest.iter().find(|&&m| m >= config.num_oac_symbols) {
            return Err(Error::InvalidPlan(format!("symbol {m} outside 0..{}", config.num_oac_symbols)));
        }
        Ok(())
    }
}

/// Random stream of trial `trial`.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial);
    rng
}

/// Draws one speed from the configured mobility model.
pub fn draw_speed<R: Rng + ?Sized>(mobility: &MobilityModel, rng: &mut R) -> f64 {
    match *mobility {
        MobilityModel::Static => 0.0,
        MobilityModel::FixedSpeed { speed } => speed,
        MobilityModel::RayleighSpeed { mean_speed } => {
            // Mean of Rayleigh(s) is s·sqrt(π/2).
            let scale = mean_speed * FRAC_2_PI.sqrt();
            let u = 1.0 - rng.random::<f64>();
            scale * (-2.0 * u.ln()).sqrt()
        }
    }
}

/// Draws impairments for every node of `config`.
pub fn draw_realization<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Vec<NodeRealization> {
    let cfo_std = config.cfo_var.sqrt();
    (1..=config.num_nodes)
        .map(|index| {
            let z: f64 = rng.sample(StandardNormal);
            NodeRealization {
                index,
                cfo: cfo_std * z,
                phase_offset: rng.random_range(0.0..TAU),
                speed: draw_speed(&config.mobility, rng),
                path_angle: rng.random_range(0.0..TAU),
                dl_init_phase: rng.random_range(0.0..TAU),
                ul_init_phase: rng.random_range(0.0..TAU),
            }
        })
        .collect()
}

/// Root mean square of the unwrapped error components over the trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownStats {
    pub rms_cfo: f64,
    pub rms_mob: f64,
    pub rms_noise: f64,
}

/// Statistics of one (node, symbol) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub k: usize,
    pub m: usize,
    /// RMS of the wrapped deviation.
    pub rmse: f64,
    pub n: u64,
    /// |deviation| of every trial, ascending.
    pub abs_deviation: Vec<f64>,
    pub theory: VarianceBreakdown,
    pub breakdown: Option<BreakdownStats>,
}

impl CellStats {
    pub fn rel_err(&self) -> f64 {
        (self.rmse - self.theory.sigma).abs() / self.theory.sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationStats {
    /// Ordered by k, then m, following the plan.
    pub cells: Vec<CellStats>,
}

impl DeviationStats {
    pub fn cell(&self, k: usize, m: usize) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.k == k && c.m == m)
    }
}

struct TrialRecord {
    deviations: Vec<f64>,
    breakdown: Vec<[f64; 3]>,
}

fn run_one(config: &SystemConfig, plan: &TrialPlan, schedule: &crate::protocol::Schedule, trial: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(plan.base_seed, trial);
    let nodes = draw_realization(config, &mut rng);
    let estimates = run_sync_phase(config, &nodes, schedule, &mut rng)?;
    let params = vec![ParameterVector::ones(config.num_oac_symbols); config.num_nodes];
    let outcome = run_oac_phase(config, &nodes, schedule, &estimates, &params, &mut rng, plan.record_breakdown)?;

    let mut deviations = Vec::with_capacity(plan.nodes_of_interest.len() * plan.symbols_of_interest.len());
    let mut breakdown = Vec::new();
    for &k in &plan.nodes_of_interest {
        for &m in &plan.symbols_of_interest {
            let d = outcome.deviation(k, m);
            if !d.is_finite() {
                return Err(Error::NonFiniteTrial { trial });
            }
            deviations.push(d);
            if let Some(b) = &outcome.breakdown {
                let e = b[k - 1][m];
                breakdown.push([e.cfo, e.mobility, e.noise]);
            }
        }
    }
    Ok(TrialRecord { deviations, breakdown })
}

/// Runs `plan.n_trials` independent handshakes in parallel.
pub fn run_trials(config: &SystemConfig, plan: &TrialPlan) -> Result<DeviationStats> {
    config.validate()?;
    plan.validate(config)?;
    let schedule = build_schedule(config)?;

    let records = (0..plan.n_trials)
        .into_par_iter()
        .map(|trial| run_one(config, plan, &schedule, trial))
        .collect::<Result<Vec<_>>>()?;

    let cells_per_trial = plan.nodes_of_interest.len() * plan.symbols_of_interest.len();
    let n = plan.n_trials;
    let mut cells = Vec::with_capacity(cells_per_trial);
    let mut idx = 0;
    for &k in &plan.nodes_of_interest {
        for &m in &plan.symbols_of_interest {
            let mut sum_sq = 0.0;
            let mut abs_deviation = Vec::with_capacity(records.len());
            let mut comp_sq = [0.0f64; 3];
            for r in &records {
                let d = r.deviations[idx];
                sum_sq += d * d;
                abs_deviation.push(d.abs());
                if plan.record_breakdown {
                    for (acc, e) in comp_sq.iter_mut().zip(r.breakdown[idx]) {
                        *acc += e * e;
                    }
                }
            }
            abs_deviation.sort_by(f64::total_cmp);
            let nf = n as f64;
            let breakdown = plan.record_breakdown.then(|| BreakdownStats {
                rms_cfo: (comp_sq[0] / nf).sqrt(),
                rms_mob: (comp_sq[1] / nf).sqrt(),
                rms_noise: (comp_sq[2] / nf).sqrt(),
            });
            cells.push(CellStats {
                k,
                m,
                rmse: (sum_sq / nf).sqrt(),
                n,
                abs_deviation,
                theory: rmse_theory(k, m, config),
                breakdown,
            });
            idx += 1;
        }
    }
    Ok(DeviationStats { cells })
}

/// Fraction of `samples` (ascending) that are ≤ each grid point.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    Ok(grid.iter().map(|&theta| samples.partition_point(|&x| x <= theta) as f64 / n).collect())
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples`
/// (ascending) and an arbitrary continuous CDF.
pub fn ks_distance_with(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(sup)
}

/// KS distance against the analytic absolute-deviation CDF with spread `sigma`.
pub fn ks_distance(samples: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveSigma(sigma));
    }
    ks_distance_with(samples, |x| cdf_abs_deviation(x, sigma))
}
