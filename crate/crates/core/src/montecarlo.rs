//! Simulation study over settings × α × T × replications, summary statistics,
//! standard-deviation decay fits and shuffle-based bias correction.
//!
//! Every replication draws from its own ChaCha stream, selected by the
//! master seed and the cell coordinates `(setting, α index, T index, rep)`.
//! Any subset of cells can therefore be recomputed in isolation, and the
//! output does not depend on how work is scheduled across threads.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorId, PreparedPair};
use crate::fit::ols_slope;
use crate::scalar::Real;
use crate::series_gen::{generate_pair, SeriesPair, SettingTag, SimulationSetting};

pub const MIN_LENGTH: usize = 100;
pub const MIN_SHUFFLES: usize = 20;
/// Largest tolerated fraction of failed re-estimates in a shuffle correction.
pub const MAX_SHUFFLE_FAILURE_RATE: f64 = 0.2;

/// α grid 1.1, 1.2, …, 2.0.
pub fn default_alphas() -> Vec<f64> {
    (11..=20).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Quick,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Scale::Quick),
            "full" => Ok(Scale::Full),
            other => Err(Error::invalid(format!("unknown scale preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub settings: Vec<SettingTag>,
    pub alphas: Vec<f64>,
    pub lengths: Vec<usize>,
    pub n_reps: usize,
    pub estimators: Vec<EstimatorId>,
    pub estimator_config: EstimatorConfig,
    pub master_seed: u64,
    pub true_h: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl ExperimentConfig {
    /// The complete study: both settings, ten α values, four lengths,
    /// 1000 replications.
    pub fn full() -> Self {
        Self {
            settings: SettingTag::ALL.to_vec(),
            alphas: default_alphas(),
            lengths: vec![500, 1000, 5000, 10_000],
            n_reps: 1000,
            estimators: EstimatorId::ALL.to_vec(),
            estimator_config: EstimatorConfig::default(),
            master_seed: 1,
            true_h: 0.5,
        }
    }

    /// Desk-scale preset: 200 replications, T ∈ {500, 1000, 5000}.
    pub fn quick() -> Self {
        Self { n_reps: 200, lengths: vec![500, 1000, 5000], ..Self::full() }
    }

    pub fn preset(scale: Scale) -> Self {
        match scale {
            Scale::Quick => Self::quick(),
            Scale::Full => Self::full(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&crate::io::read_text(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_reps < 2 {
            return fail(format!("n_reps must be >= 2, got {}", self.n_reps));
        }
        if self.settings.is_empty() || self.alphas.is_empty() || self.lengths.is_empty() {
            return fail("settings, alphas and lengths must be non-empty".into());
        }
        if self.estimators.is_empty() {
            return fail("at least one estimator is required".into());
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
            return fail(format!("alpha {a} outside (0, 2]"));
        }
        if let Some(t) = self.lengths.iter().find(|&&t| t < MIN_LENGTH) {
            return fail(format!("length {t} below the minimum of {MIN_LENGTH}"));
        }
        if self.alphas.len() > u16::MAX as usize
            || self.lengths.len() > u8::MAX as usize
            || self.n_reps > u32::MAX as usize
        {
            return fail("grid too large for per-cell stream derivation".into());
        }
        if !self.true_h.is_finite() {
            return fail("true_h must be finite".into());
        }
        self.estimator_config.freq.validate()?;
        Ok(())
    }

    /// Requested estimators in canonical order, without duplicates.
    pub fn estimator_order(&self) -> Vec<EstimatorId> {
        EstimatorId::ALL
            .into_iter()
            .filter(|id| self.estimators.contains(id))
            .collect()
    }

    pub fn record_count(&self) -> usize {
        self.settings.len() * self.alphas.len() * self.lengths.len() * self.n_reps * self.estimator_order().len()
    }
}

fn setting_index(tag: SettingTag) -> u64 {
    match tag {
        SettingTag::SettingI => 0,
        SettingTag::SettingII => 1,
    }
}

/// Random stream of one replication, determined by the master seed and the
/// cell coordinates only.
pub fn cell_rng(master_seed: u64, setting: SettingTag, alpha_idx: usize, len_idx: usize, rep: usize) -> ChaCha8Rng {
    let stream = setting_index(setting) << 56
        | (alpha_idx as u64 & 0xffff) << 40
        | (len_idx as u64 & 0xff) << 32
        | (rep as u64 & 0xffff_ffff);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok(f64),
    /// Failure tag, e.g. `estimation` or `scale_too_large`.
    Failed(String),
}

impl Outcome {
    pub fn h_hat(&self) -> Option<f64> {
        match self {
            Outcome::Ok(h) => Some(*h),
            Outcome::Failed(_) => None,
        }
    }

    pub fn status(&self) -> String {
        match self {
            Outcome::Ok(_) => "ok".into(),
            Outcome::Failed(kind) => format!("failed:{kind}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub estimator: EstimatorId,
    pub setting: SettingTag,
    pub alpha: f64,
    pub len: usize,
    pub rep: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    setting: SettingTag,
    alpha_idx: usize,
    len_idx: usize,
    rep: usize,
}

fn run_task(cfg: &ExperimentConfig, ids: &[EstimatorId], task: Task) -> Vec<EstimateRecord> {
    let alpha = cfg.alphas[task.alpha_idx];
    let len = cfg.lengths[task.len_idx];
    let mut rng = cell_rng(cfg.master_seed, task.setting, task.alpha_idx, task.len_idx, task.rep);
    let pair = SimulationSetting::new(task.setting, alpha).and_then(|s| generate_pair::<f64, _>(&s, len, &mut rng));
    let record = |estimator, outcome| EstimateRecord {
        estimator,
        setting: task.setting,
        alpha,
        len,
        rep: task.rep,
        outcome,
    };
    match pair {
        Ok(pair) => {
            let prepared = PreparedPair::new(&pair, &cfg.estimator_config);
            ids.iter()
                .map(|&id| {
                    let outcome = match prepared.estimate(id) {
                        Ok(h) => Outcome::Ok(h),
                        Err(e) => Outcome::Failed(e.kind().into()),
                    };
                    record(id, outcome)
                })
                .collect()
        }
        Err(e) => ids
            .iter()
            .map(|&id| record(id, Outcome::Failed(e.kind().into())))
            .collect(),
    }
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<EstimateRecord>> {
    run_experiment_with(cfg, |_, _| {})
}

/// Runs the experiment, calling `progress(done, total)` after each
/// replication. Records come back in canonical order (setting, α, T,
/// replication, estimator) whatever the degree of parallelism.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, progress: F) -> Result<Vec<EstimateRecord>>
where
    F: Fn(usize, usize) + Sync,
{
    cfg.validate()?;
    let ids = cfg.estimator_order();
    let tasks: Vec<Task> = cfg
        .settings
        .iter()
        .flat_map(|&setting| {
            (0..cfg.alphas.len()).flat_map(move |alpha_idx| {
                (0..cfg.lengths.len()).flat_map(move |len_idx| {
                    (0..cfg.n_reps).map(move |rep| Task { setting, alpha_idx, len_idx, rep })
                })
            })
        })
        .collect();
    let total = tasks.len();
    let done = AtomicUsize::new(0);
    let nested: Vec<Vec<EstimateRecord>> = tasks
        .par_iter()
        .map(|&task| {
            let out = run_task(cfg, &ids, task);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            out
        })
        .collect();
    Ok(nested.into_iter().flatten().collect())
}

/// Runs the experiment on a dedicated pool of `threads` workers.
pub fn run_experiment_parallel<F>(cfg: &ExperimentConfig, threads: usize, progress: F) -> Result<Vec<EstimateRecord>>
where
    F: Fn(usize, usize) + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_experiment_with(cfg, progress))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
    pub mse: f64,
}

/// Per-cell aggregate; `stats` is `None` for cells with fewer than two
/// successful estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: EstimatorId,
    pub setting: SettingTag,
    pub alpha: f64,
    pub len: usize,
    pub n_ok: usize,
    pub stats: Option<SummaryStats>,
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at one-based position `h = (n − 1)p + 1`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summary_stats(values: &[f64], true_h: f64) -> Option<SummaryStats> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let mse = values.iter().map(|v| (v - true_h).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(SummaryStats {
        mean,
        bias: mean - true_h,
        sd: (ss / (n - 1.0)).sqrt(),
        q025: quantile_sorted(&sorted, 0.025),
        q975: quantile_sorted(&sorted, 0.975),
        mse,
    })
}

/// Aggregates records per (estimator, setting, α, T) cell. Rows are ordered
/// by estimator, setting, α and T.
pub fn summarize(records: &[EstimateRecord], true_h: f64) -> Vec<SummaryRow> {
    let mut keys: Vec<(EstimatorId, SettingTag, f64, usize)> = records
        .iter()
        .map(|r| (r.estimator, r.setting, r.alpha, r.len))
        .collect();
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    keys.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2.to_bits() == b.2.to_bits() && a.3 == b.3);

    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); keys.len()];
    for r in records {
        let key = (r.estimator, r.setting, r.alpha, r.len);
        let idx = keys
            .binary_search_by(|k| {
                k.0.cmp(&key.0)
                    .then(k.1.cmp(&key.1))
                    .then(k.2.total_cmp(&key.2))
                    .then(k.3.cmp(&key.3))
            })
            .expect("key collected above");
        if let Some(h) = r.outcome.h_hat() {
            buckets[idx].push(h);
        }
    }
    keys.into_iter()
        .zip(buckets)
        .map(|((estimator, setting, alpha, len), values)| SummaryRow {
            estimator,
            setting,
            alpha,
            len,
            n_ok: values.len(),
            stats: summary_stats(&values, true_h),
        })
        .collect()
}

/// Slope of `log sd` against `log T` over the rows of one
/// (estimator, setting, α) family.
pub fn sd_decay_fit(rows: &[SummaryRow], estimator: EstimatorId, setting: SettingTag, alpha: f64) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.estimator == estimator && r.setting == setting && (r.alpha - alpha).abs() < 1e-12)
        .filter_map(|r| r.stats.map(|s| (r.len, s.sd)))
        .filter(|&(_, sd)| sd > 0.0)
        .map(|(len, sd)| ((len as f64).ln(), sd.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::estimation(format!(
            "{estimator} setting {setting} alpha {alpha}: {} lengths available, need 3",
            xs.len()
        )));
    }
    ols_slope(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleCorrection<T> {
    pub raw: T,
    /// Mean shuffled estimate minus 0.5.
    pub bias: T,
    pub corrected: T,
    pub n_ok: usize,
    pub n_failed: usize,
}

/// Bias-corrects an estimate by re-estimating on pairs whose legs are
/// independently permuted. Permutation keeps the marginals and destroys all
/// temporal and cross structure, so the shuffled estimates measure the
/// estimator's drift away from 0.5 caused by the marginals alone.
pub fn shuffle_bias_correct<T: Real, R: Rng + ?Sized>(
    pair: &SeriesPair<T>,
    estimator: EstimatorId,
    cfg: &EstimatorConfig,
    n_shuffles: usize,
    rng: &mut R,
) -> Result<ShuffleCorrection<T>> {
    if n_shuffles < MIN_SHUFFLES {
        return Err(Error::invalid(format!("need at least {MIN_SHUFFLES} shuffles, got {n_shuffles}")));
    }
    let raw = cfg.estimate(estimator, pair)?;
    let (mut x, mut y) = (pair.x().to_vec(), pair.y().to_vec());
    let mut shuffled = Vec::with_capacity(n_shuffles);
    let mut n_failed = 0;
    for _ in 0..n_shuffles {
        x.shuffle(rng);
        y.shuffle(rng);
        let p = SeriesPair::new(x.clone(), y.clone())?;
        match cfg.estimate(estimator, &p) {
            Ok(h) => shuffled.push(h),
            Err(_) => n_failed += 1,
        }
    }
    if n_failed as f64 > MAX_SHUFFLE_FAILURE_RATE * n_shuffles as f64 {
        return Err(Error::estimation(format!(
            "{n_failed} of {n_shuffles} shuffled estimates failed"
        )));
    }
    let mean = shuffled.iter().copied().sum::<T>() / T::count(shuffled.len());
    let bias = mean - T::lit(0.5);
    Ok(ShuffleCorrection { raw, bias, corrected: raw - bias, n_ok: shuffled.len(), n_failed })
}
