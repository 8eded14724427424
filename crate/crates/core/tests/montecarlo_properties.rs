use proptest::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xhurst::estimators::{EstimatorConfig, EstimatorId};
use xhurst::montecarlo::{
    cell_rng, run_experiment, shuffle_bias_correct, summarize, EstimateRecord, ExperimentConfig, Outcome,
};
use xhurst::series_gen::generate_pair;
use xhurst::{SettingTag, SimulationSetting};

fn record(estimator: EstimatorId, alpha: f64, len: usize, rep: usize, h: Option<f64>) -> EstimateRecord {
    EstimateRecord {
        estimator,
        setting: SettingTag::SettingI,
        alpha,
        len,
        rep,
        outcome: h.map_or_else(|| Outcome::Failed("estimation".into()), Outcome::Ok),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    sab / (saa * sbb).sqrt()
}

/// Naive per-cell recomputation: linear scan for the cell, textbook formulas.
fn naive_cell(records: &[EstimateRecord], id: EstimatorId, alpha: f64, true_h: f64) -> Option<[f64; 6]> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.estimator == id && r.alpha == alpha)
        .filter_map(|r| r.outcome.h_hat())
        .collect();
    let n = v.len();
    if n < 2 {
        return None;
    }
    let m = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    let mse = v.iter().map(|x| (x - true_h) * (x - true_h)).sum::<f64>() / n as f64;
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let pos = 1.0 + (n - 1) as f64 * p;
        let k = pos.floor() as usize;
        if k >= n {
            v[n - 1]
        } else {
            v[k - 1] + (pos - k as f64) * (v[k] - v[k - 1])
        }
    };
    Some([m, m - true_h, var.sqrt(), q(0.025), q(0.975), mse])
}

fn records_strategy() -> impl Strategy<Value = Vec<EstimateRecord>> {
    let one = (0usize..3, 0usize..2, prop::option::weighted(0.9, 0.0f64..1.5));
    prop::collection::vec(one, 1..120).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(rep, (e, a, h))| {
                let id = [EstimatorId::Dcca, EstimatorId::Ape, EstimatorId::Lxw][e];
                record(id, [1.2, 1.8][a], 500, rep, h)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn mse_decomposes(values in prop::collection::vec(-2.0f64..3.0, 2..300), true_h in 0.0f64..1.0) {
        let records: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &h)| record(EstimatorId::Xpe, 1.5, 1000, i, Some(h)))
            .collect();
        let rows = summarize(&records, true_h);
        prop_assert_eq!(rows.len(), 1);
        let s = rows[0].stats.unwrap();
        let n = rows[0].n_ok as f64;
        prop_assert!((s.mse - (s.bias * s.bias + s.sd * s.sd * (n - 1.0) / n)).abs() < 1e-9);
    }

    #[test]
    fn summarize_matches_naive(records in records_strategy(), true_h in 0.3f64..0.7) {
        let rows = summarize(&records, true_h);
        for row in &rows {
            let n_ok = records
                .iter()
                .filter(|r| r.estimator == row.estimator && r.alpha == row.alpha && r.outcome.h_hat().is_some())
                .count();
            prop_assert_eq!(row.n_ok, n_ok);
            match (row.stats, naive_cell(&records, row.estimator, row.alpha, true_h)) {
                (None, None) => {}
                (Some(s), Some(expect)) => {
                    let got = [s.mean, s.bias, s.sd, s.q025, s.q975, s.mse];
                    for (g, e) in got.iter().zip(expect) {
                        prop_assert!((g - e).abs() < 1e-12, "{} vs {}", g, e);
                    }
                }
                other => prop_assert!(false, "cell presence differs: {:?}", other),
            }
        }
    }

    #[test]
    fn quantiles_bracket_mean(values in prop::collection::vec(0.0f64..1.0, 40..400)) {
        let records: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &h)| record(EstimatorId::Hxa, 2.0, 500, i, Some(h)))
            .collect();
        let s = summarize(&records, 0.5)[0].stats.unwrap();
        prop_assert!(s.q025 <= s.mean && s.mean <= s.q975);
    }
}

#[test]
fn distinct_cells_draw_unrelated_streams() {
    // One cell pair over 200 reps gives |ρ̂| ≥ 0.1 about 15% of the time
    // even under exact independence, so the bound is applied to the RMS
    // correlation over all 45 pairs of α cells.
    let cfg = ExperimentConfig {
        settings: vec![SettingTag::SettingII],
        lengths: vec![500],
        n_reps: 200,
        estimators: vec![EstimatorId::Dcca, EstimatorId::Ape],
        ..ExperimentConfig::quick()
    };
    let records = run_experiment(&cfg).unwrap();
    for id in [EstimatorId::Dcca, EstimatorId::Ape] {
        let series: Vec<Vec<f64>> = cfg
            .alphas
            .iter()
            .map(|&a| {
                records
                    .iter()
                    .filter(|r| r.estimator == id && r.alpha == a)
                    .map(|r| r.outcome.h_hat().unwrap())
                    .collect()
            })
            .collect();
        let mut squares = Vec::new();
        for i in 0..series.len() {
            for j in i + 1..series.len() {
                assert_eq!(series[i].len(), 200);
                squares.push(pearson(&series[i], &series[j]).powi(2));
            }
        }
        assert_eq!(squares.len(), 45);
        let rms = mean(&squares).sqrt();
        assert!(rms < 0.1, "{id}: rms rho = {rms}");
    }

    // raw streams of neighbouring cells share no output words
    let words = |mut r: ChaCha8Rng| (0..4096).map(|_| r.next_u64()).collect::<std::collections::HashSet<_>>();
    let base = words(cell_rng(1, SettingTag::SettingI, 0, 0, 0));
    for other in [
        cell_rng(1, SettingTag::SettingII, 0, 0, 0),
        cell_rng(1, SettingTag::SettingI, 1, 0, 0),
        cell_rng(1, SettingTag::SettingI, 0, 1, 0),
        cell_rng(1, SettingTag::SettingI, 0, 0, 1),
        cell_rng(2, SettingTag::SettingI, 0, 0, 0),
    ] {
        assert!(base.is_disjoint(&words(other)));
    }
}

fn shuffle_means(setting: SettingTag, alpha: f64, id: EstimatorId, seeds: u64, base: u64) -> (f64, f64) {
    let cfg = EstimatorConfig::default();
    let setting = SimulationSetting::new(setting, alpha).unwrap();
    let (mut raw, mut corrected) = (Vec::new(), Vec::new());
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(base + seed);
        let pair = generate_pair::<f64, _>(&setting, 1000, &mut rng).unwrap();
        let c = shuffle_bias_correct(&pair, id, &cfg, 50, &mut rng).unwrap();
        assert_eq!(c.n_ok + c.n_failed, 50);
        raw.push(c.raw);
        corrected.push(c.corrected);
    }
    (mean(&raw), mean(&corrected))
}

#[test]
fn shuffle_leaves_gaussian_pairs_alone() {
    for id in EstimatorId::TIME_DOMAIN {
        let (raw, corrected) = shuffle_means(SettingTag::SettingII, 2.0, id, 50, 100);
        assert!((raw - corrected).abs() <= 0.02, "{id}: raw {raw} corrected {corrected}");
    }
}

#[test]
fn shuffle_removes_heavy_tail_bias() {
    let (raw, corrected) = shuffle_means(SettingTag::SettingII, 1.1, EstimatorId::Dcca, 100, 200);
    assert!(raw >= 0.55, "raw {raw}");
    assert!((corrected - 0.5).abs() <= 0.05, "corrected {corrected}");
}

#[test]
fn shuffle_barely_moves_ape() {
    let (raw, corrected) = shuffle_means(SettingTag::SettingII, 1.1, EstimatorId::Ape, 50, 300);
    assert!((raw - corrected).abs() < 0.01, "raw {raw} corrected {corrected}");
}
