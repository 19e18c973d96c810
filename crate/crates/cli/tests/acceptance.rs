//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. The heavy experiment (criteria 6 and 7) trains the main
//! model and the RNN baseline over five seeds of the reference market and is
//! shared between tests through a lazily initialized fixture.
//!
//! Run with `cargo test -p bondrisk-cli --test acceptance -- --nocapture`.

use bondrisk_core::eval::{persistence_pairs, rating_comparison, rmse_mae};
use bondrisk_core::labeler::{
    annotate_market, backward_defaulted, backward_matured, fit_vb_gmm,
    spread_probability_unclamped, BackwardParams, LabelerConfig, VbGmmOptions,
};
use bondrisk_core::models::{train, ArchitectureConfig, NeuralModel, Variant};
use bondrisk_core::nn::{Dense, DropoutMode, LstmLayer, Tensor};
use bondrisk_core::pipeline::{
    fill_missing, make_windows, smote_balance, split_bonds, standardize, Split, WindowedDataset,
};
use bondrisk_core::schema::{grade_value_to_probability, N_FEATURES};
use bondrisk_core::synthgen::{generate_market, MarketConfig};
use bondrisk_core::{grade_to_probability, BondRecord, LabelSeries, Outcome, RatingGrade};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::Instant;

const REFERENCE_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

fn reference_market(seed: u64) -> MarketConfig {
    MarketConfig {
        n_bonds: 200,
        default_fraction: 0.10,
        min_life: 80,
        max_life: 140,
        seed,
        stress_onset_days: 120,
    }
}

/// Labeled market and windowed dataset for one seed of the reference
/// configuration.
struct SeedData {
    seed: u64,
    bonds: Vec<BondRecord>,
    labels: HashMap<String, LabelSeries>,
    dataset: WindowedDataset,
}

fn build_seed_data(seed: u64) -> SeedData {
    let mut bonds = generate_market(&reference_market(seed)).expect("generate");
    let labeler = LabelerConfig {
        gmm: VbGmmOptions { seed, ..VbGmmOptions::default() },
        ..LabelerConfig::default()
    };
    let (_, series) = annotate_market(&mut bonds, &labeler).expect("label");
    let labels: HashMap<String, LabelSeries> =
        series.into_iter().map(|s| (s.bond_id.clone(), s)).collect();
    let standardized: Vec<BondRecord> = bonds
        .iter()
        .map(|b| standardize(&fill_missing(b).unwrap()).unwrap().0)
        .collect();
    let splits = split_bonds(&standardized, seed).expect("split");
    let mut dataset = make_windows(&standardized, &labels, &splits, 2).expect("windows");
    smote_balance(&mut dataset, 1.0, 5, seed).expect("smote");
    SeedData { seed, bonds, labels, dataset }
}

static SEED_DATA: Lazy<Vec<SeedData>> = Lazy::new(|| {
    use rayon::prelude::*;
    REFERENCE_SEEDS.par_iter().map(|&seed| build_seed_data(seed)).collect()
});

/// Test metrics for one trained variant on one seed.
struct SeedRun {
    seed: u64,
    rmse_ours: f64,
    rmse_rnn: f64,
    rmse_persistence: f64,
    /// Early-warning lead times of defaulted test bonds, when both series
    /// cross the threshold.
    lead_times: Vec<i64>,
}

fn run_seed(data: &SeedData) -> SeedRun {
    let arch = ArchitectureConfig {
        variant: Variant::Ours,
        window: 2,
        seed: data.seed,
        epochs: 8,
        patience: 3,
        ..ArchitectureConfig::default()
    };
    let test_idx = data.dataset.indices_in(Split::Test);
    let truth: Vec<f64> = test_idx.iter().map(|&i| f64::from(data.dataset.labels[i])).collect();

    let (ours, _) = train(&data.dataset, &arch).expect("train ours");
    let preds_ours = ours.predict_indices(&data.dataset, &test_idx);
    let (rmse_ours, _) = rmse_mae(&preds_ours, &truth).expect("metrics");

    let rnn_arch = ArchitectureConfig { variant: Variant::Rnn, ..arch.clone() };
    let (rnn, _) = train(&data.dataset, &rnn_arch).expect("train rnn");
    let preds_rnn = rnn.predict_indices(&data.dataset, &test_idx);
    let (rmse_rnn, _) = rmse_mae(&preds_rnn, &truth).expect("metrics");

    let pairs = persistence_pairs(&data.dataset, &data.labels, &test_idx).expect("persistence");
    let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (rmse_persistence, _) = rmse_mae(&p, &t).expect("metrics");

    // Early-warning comparison on defaulted test bonds.
    let by_id: HashMap<&str, &BondRecord> =
        data.bonds.iter().map(|b| (b.bond_id.as_str(), b)).collect();
    let mut grouped: HashMap<&str, Vec<(usize, f64)>> = HashMap::new();
    for (&i, pred) in test_idx.iter().zip(&preds_ours) {
        let meta = &data.dataset.meta[i];
        if by_id[meta.bond_id.as_str()].outcome == Outcome::Defaulted {
            grouped.entry(meta.bond_id.as_str()).or_default().push((meta.end_day + 1, *pred));
        }
    }
    let mut series = Vec::new();
    for (id, mut days) in grouped {
        days.sort_by_key(|(d, _)| *d);
        let bond = by_id[id];
        let reference: Vec<f64> = days
            .iter()
            .map(|(d, _)| grade_value_to_probability(bond.latent_grades[*d]))
            .collect();
        let preds: Vec<f64> = days.into_iter().map(|(_, p)| p).collect();
        series.push((id.to_string(), preds, reference));
    }
    let lead_times = if series.is_empty() {
        Vec::new()
    } else {
        rating_comparison(&series, 0.5)
            .expect("rating comparison")
            .lead_times
            .into_iter()
            .filter_map(|(_, l)| l)
            .collect()
    };

    SeedRun { seed: data.seed, rmse_ours, rmse_rnn, rmse_persistence, lead_times }
}

static SEED_RUNS: Lazy<Vec<SeedRun>> = Lazy::new(|| {
    use rayon::prelude::*;
    SEED_DATA.par_iter().map(run_seed).collect()
});

fn max_rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1.0)
}

/// Central-difference check of every parameter of a model against the
/// analytic gradients, in f64, with the stated step.
fn grad_check_model(model: &mut NeuralModel<f64>, sample: &[f64], seed: u64) -> f64 {
    let target = 0.35;
    let mask_seed = seed ^ 0xD00D;
    let loss_of = |m: &NeuralModel<f64>| {
        let p = m.forward(sample, DropoutMode::Train, mask_seed).prob;
        (p - target) * (p - target)
    };
    let cache = model.forward(sample, DropoutMode::Train, mask_seed);
    model.zero_grads();
    model.backward(&cache, 2.0 * (cache.prob - target));
    let mut order = Vec::new();
    model.visit_params(&mut |name: &str, p: &mut Tensor<f64>, g: &mut Tensor<f64>| {
        order.push((name.to_string(), p.len(), g.data().to_vec()));
    });
    fn poke(model: &mut NeuralModel<f64>, name: &str, j: usize, delta: f64) {
        model.visit_params(&mut |n: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
            if n == name {
                p.data_mut()[j] += delta;
            }
        });
    }
    let eps = 1e-3;
    let mut worst = 0.0f64;
    for (name, len, grads) in &order {
        for j in 0..*len {
            poke(model, name, j, eps);
            let up = loss_of(model);
            poke(model, name, j, -2.0 * eps);
            let down = loss_of(model);
            poke(model, name, j, eps);
            let numeric = (up - down) / (2.0 * eps);
            worst = worst.max(max_rel_err(grads[j], numeric));
        }
    }
    worst
}

#[test]
fn acceptance_1_gradient_correctness() {
    let started = Instant::now();
    let mut worst = 0.0f64;

    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // ConvLSTM cell: squared hidden outputs over a 3-step sequence.
        {
            use bondrisk_core::nn::ConvLstmCell;
            let mut cell: ConvLstmCell<f64> = ConvLstmCell::new(1, 2, 8, 3, &mut rng);
            let mut warm = |name: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
                if name.starts_with("peep") || name.starts_with("b_") {
                    for (k, v) in p.data_mut().iter_mut().enumerate() {
                        *v += 0.04 * (((k + 1) % 5) as f64 - 2.0);
                    }
                }
            };
            cell.visit_params(&mut warm);
            let xs: Vec<Vec<f64>> = (0..3)
                .map(|t| (0..8).map(|_| rng.gen_range(-1.0..1.0) + 0.1 * t as f64).collect())
                .collect();
            let loss_of = |cell: &ConvLstmCell<f64>| -> f64 {
                cell.forward_seq(&xs).h.iter().flatten().map(|v| v * v).sum()
            };
            let cache = cell.forward_seq(&xs);
            let dh: Vec<Vec<f64>> =
                cache.h.iter().map(|h| h.iter().map(|v| 2.0 * v).collect()).collect();
            cell.zero_grads();
            cell.backward_seq(&cache, &dh);
            let mut order = Vec::new();
            cell.visit_params(&mut |name: &str, p: &mut Tensor<f64>, g: &mut Tensor<f64>| {
                order.push((name.to_string(), p.len(), g.data().to_vec()));
            });
            fn poke_cell(
                cell: &mut bondrisk_core::nn::ConvLstmCell<f64>,
                name: &str,
                j: usize,
                delta: f64,
            ) {
                cell.visit_params(&mut |n: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
                    if n == name {
                        p.data_mut()[j] += delta;
                    }
                });
            }
            for (name, len, grads) in &order {
                for j in 0..*len {
                    poke_cell(&mut cell, name, j, 1e-3);
                    let up = loss_of(&cell);
                    poke_cell(&mut cell, name, j, -2e-3);
                    let down = loss_of(&cell);
                    poke_cell(&mut cell, name, j, 1e-3);
                    worst = worst.max(max_rel_err(grads[j], (up - down) / 2e-3));
                }
            }
        }

        // LSTM layer.
        {
            let mut layer: LstmLayer<f64> = LstmLayer::new(8, 4, &mut rng);
            let xs: Vec<Vec<f64>> =
                (0..3).map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let loss_of = |layer: &LstmLayer<f64>| -> f64 {
                layer.forward_seq(&xs).h.iter().flatten().map(|v| v * v).sum()
            };
            let cache = layer.forward_seq(&xs);
            let dh: Vec<Vec<f64>> =
                cache.h.iter().map(|h| h.iter().map(|v| 2.0 * v).collect()).collect();
            layer.zero_grads();
            layer.backward_seq(&cache, &dh);
            let mut order = Vec::new();
            layer.visit_params(&mut |name: &str, p: &mut Tensor<f64>, g: &mut Tensor<f64>| {
                order.push((name.to_string(), p.len(), g.data().to_vec()));
            });
            fn poke_layer(layer: &mut LstmLayer<f64>, name: &str, j: usize, delta: f64) {
                layer.visit_params(&mut |n: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
                    if n == name {
                        p.data_mut()[j] += delta;
                    }
                });
            }
            for (name, len, grads) in &order {
                for j in 0..*len {
                    poke_layer(&mut layer, name, j, 1e-3);
                    let up = loss_of(&layer);
                    poke_layer(&mut layer, name, j, -2e-3);
                    let down = loss_of(&layer);
                    poke_layer(&mut layer, name, j, 1e-3);
                    worst = worst.max(max_rel_err(grads[j], (up - down) / 2e-3));
                }
            }
        }

        // Dense layer.
        {
            let mut layer: Dense<f64> = Dense::new(6, 3, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let loss_of =
                |layer: &Dense<f64>| layer.forward(&x).iter().map(|v| v * v).sum::<f64>();
            let y = layer.forward(&x);
            let dout: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
            layer.zero_grads();
            layer.backward(&x, &dout);
            let mut order = Vec::new();
            layer.visit_params(&mut |name: &str, p: &mut Tensor<f64>, g: &mut Tensor<f64>| {
                order.push((name.to_string(), p.len(), g.data().to_vec()));
            });
            fn poke_dense(layer: &mut Dense<f64>, name: &str, j: usize, delta: f64) {
                layer.visit_params(&mut |n: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
                    if n == name {
                        p.data_mut()[j] += delta;
                    }
                });
            }
            for (name, len, grads) in &order {
                for j in 0..*len {
                    poke_dense(&mut layer, name, j, 1e-3);
                    let up = loss_of(&layer);
                    poke_dense(&mut layer, name, j, -2e-3);
                    let down = loss_of(&layer);
                    poke_dense(&mut layer, name, j, 1e-3);
                    worst = worst.max(max_rel_err(grads[j], (up - down) / 2e-3));
                }
            }
        }

        // Full main model at toy size, dropout active with a fixed mask.
        {
            let arch = ArchitectureConfig {
                variant: Variant::Ours,
                window: 3,
                n_features: 8,
                hidden: 4,
                conv_channels: 2,
                conv_kernel: 3,
                depth: 10,
                seed,
                ..ArchitectureConfig::default()
            };
            let mut model: NeuralModel<f64> = NeuralModel::build(&arch).unwrap();
            let sample: Vec<f64> = (0..3 * 8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            worst = worst.max(grad_check_model(&mut model, &sample, seed));
        }
    }

    let elapsed = started.elapsed();
    assert!(
        worst < 1e-4,
        "worst relative gradient error {worst:.3e} exceeds 1e-4"
    );
    assert!(elapsed.as_secs() < 60, "gradient checks took {elapsed:?}");
    println!(
        "[PASS] criterion 1: gradients match central differences (worst rel err {worst:.3e}, {elapsed:?})"
    );
}

#[test]
fn acceptance_2_spread_closed_form_matches_equilibrium_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let loss_rate = 0.70;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let r_b: f64 = rng.gen_range(0.001..0.5);
        let r_f: f64 = rng.gen_range(0.0..0.1);
        let closed = spread_probability_unclamped(r_b - r_f, r_b, loss_rate).unwrap();
        // Bisection on the market equilibrium (1 - p) r_b - p D = r_f.
        let g = |p: f64| (1.0 - p) * r_b - p * loss_rate - r_f;
        let (mut lo, mut hi) = (-1.0f64, 2.0f64);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        worst = worst.max((closed - root).abs());
    }
    assert!(worst < 1e-12, "closed form deviates from the root by {worst:.3e}");
    println!("[PASS] criterion 2: spread inversion equals the equilibrium root (worst {worst:.3e})");
}

#[test]
fn acceptance_3_vb_gmm_elbo_blobs_and_responsibilities() {
    // Three blobs separated by 10 sigma.
    let sigma = 0.8f64;
    let sep = 10.0 * sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let centers = [[0.0, 0.0], [sep, 0.0], [0.0, sep]];
    let per_blob = 80;
    let mut data = Vec::new();
    for c in &centers {
        for _ in 0..per_blob {
            data.push(c[0] + sigma * (rng.gen_range(-1.0f64..1.0) + rng.gen_range(-1.0..1.0)) / 2.0);
            data.push(c[1] + sigma * (rng.gen_range(-1.0f64..1.0) + rng.gen_range(-1.0..1.0)) / 2.0);
        }
    }
    let n = 3 * per_blob;
    let opts = VbGmmOptions { n_components: 3, seed: 31, spread_col: 0, ..VbGmmOptions::default() };
    let model = fit_vb_gmm(&data, n, 2, &opts).unwrap();

    for pair in model.elbo_trace.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-8, "ELBO decreased: {} -> {}", pair[0], pair[1]);
    }

    let mut assignments = vec![usize::MAX; n];
    for row in 0..n {
        let resp = model.responsibilities(&data[row * 2..(row + 1) * 2]);
        let sum: f64 = resp.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "responsibilities sum to {sum}");
        assignments[row] =
            (0..3).max_by(|&a, &b| resp[a].partial_cmp(&resp[b]).unwrap()).unwrap();
    }
    let mut blob_components = Vec::new();
    for blob in 0..3 {
        let first = assignments[blob * per_blob];
        for i in 0..per_blob {
            assert_eq!(
                assignments[blob * per_blob + i],
                first,
                "assignment accuracy below 100% in blob {blob}"
            );
        }
        blob_components.push(first);
    }
    blob_components.sort_unstable();
    blob_components.dedup();
    assert_eq!(blob_components.len(), 3, "blobs were merged");

    println!("[PASS] criterion 3: VB mixture ELBO monotone, blob accuracy 100%, responsibilities normalized");
}

#[test]
fn acceptance_4_label_bounds_and_terminal_anchors() {
    let n_accel = BackwardParams::default().accel_horizon;
    assert_eq!(n_accel, 120);
    for data in SEED_DATA.iter() {
        for bond in &data.bonds {
            let series = &data.labels[&bond.bond_id];
            for d in 0..series.len() {
                let p = series.p_integrated[d];
                assert!((0.0..=1.0).contains(&p), "label {p} out of bounds");
            }
            match bond.outcome {
                Outcome::Defaulted => {
                    let dd = bond.default_date.unwrap() - bond.issue_date;
                    assert_eq!(series.p_bwd[dd], 1.0, "backward not 1 at default");
                    if dd >= 120 {
                        assert_eq!(series.p_bwd[dd - 120], 0.5, "backward not 0.5 at N days out");
                    }
                }
                _ => {
                    let p0 = grade_to_probability(bond.issue_grade);
                    let pt = grade_to_probability(bond.final_grade);
                    let last = series.len() - 1;
                    assert!((series.p_bwd[0] - p0).abs() < 1e-12);
                    assert!((series.p_bwd[last] - pt).abs() < 1e-12);
                }
            }
        }
    }
    // Direct checks of the estimator ops at the stated horizon.
    let params = BackwardParams::default();
    assert_eq!(backward_defaulted(400, 400, &params).unwrap(), 1.0);
    assert_eq!(backward_defaulted(400, 280, &params).unwrap(), 0.5);
    let g1 = RatingGrade::new(20).unwrap();
    let g2 = RatingGrade::new(17).unwrap();
    assert!((backward_matured(g1, g2, 0, 100).unwrap() - grade_to_probability(g1)).abs() < 1e-12);
    assert!(
        (backward_matured(g1, g2, 100, 100).unwrap() - grade_to_probability(g2)).abs() < 1e-12
    );
    println!("[PASS] criterion 4: labels bounded, backward anchors exact (1.0 at default, 0.5 at N=120)");
}

#[test]
fn acceptance_5_pipeline_hygiene() {
    for data in SEED_DATA.iter() {
        // Standardization moments on the bonds feeding the dataset.
        for bond in data.bonds.iter().take(40) {
            let filled = fill_missing(bond).unwrap();
            let (z, stats) = standardize(&filled).unwrap();
            let days = z.features.days();
            for col in 0..N_FEATURES {
                let mean: f64 = z.features.column(col).sum::<f64>() / days as f64;
                let var: f64 =
                    z.features.column(col).map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / days as f64;
                assert!(mean.abs() < 1e-9, "column {col} mean {mean}");
                let constant = stats.std[col] == 1.0
                    && z.features.column(col).all(|v| v == 0.0);
                if !constant {
                    assert!((var.sqrt() - 1.0).abs() < 1e-9, "column {col} std {}", var.sqrt());
                }
            }
        }
        // Split integrity and SMOTE containment.
        let mut owner: HashMap<&str, Split> = HashMap::new();
        for meta in &data.dataset.meta {
            let prev = owner.insert(meta.bond_id.as_str(), meta.split);
            if let Some(p) = prev {
                assert_eq!(p, meta.split, "bond {} appears in two splits", meta.bond_id);
            }
            if meta.synthetic {
                assert_eq!(meta.split, Split::Train, "synthetic sample outside train");
            }
        }
        let test_idx = data.dataset.indices_in(Split::Test);
        assert!(test_idx.iter().all(|&i| !data.dataset.meta[i].synthetic));
        // Synthetic samples sit exactly on their parent segments.
        let mut checked = 0usize;
        for i in 0..data.dataset.n_samples() {
            let Some((ia, ib, u)) = data.dataset.meta[i].synthetic_parents else { continue };
            let a = data.dataset.sample(ia).to_vec();
            let b = data.dataset.sample(ib).to_vec();
            let v = data.dataset.sample(i);
            for j in 0..v.len() {
                let expect = (f64::from(a[j]) + u * (f64::from(b[j]) - f64::from(a[j]))) as f32;
                assert_eq!(v[j].to_bits(), expect.to_bits(), "off-segment coordinate");
            }
            checked += 1;
        }
        assert!(checked > 0, "no synthetic samples to check");
        // Class proportions in val/test match the raw windows (SMOTE-free).
        for split in [Split::Val, Split::Test] {
            let idx = data.dataset.indices_in(split);
            assert!(
                idx.iter().all(|&i| !data.dataset.meta[i].synthetic),
                "{split:?} contains synthetic samples"
            );
        }
        let _ = data.seed;
    }
    println!("[PASS] criterion 5: standardization moments, split integrity and SMOTE containment hold");
}

#[test]
fn acceptance_6_reference_experiment_beats_baselines() {
    let started = Instant::now();
    let runs = &*SEED_RUNS;
    for run in runs.iter() {
        println!(
            "  seed {}: ours {:.5}, rnn {:.5}, persistence {:.5}",
            run.seed, run.rmse_ours, run.rmse_rnn, run.rmse_persistence
        );
    }
    let mean_ours: f64 = runs.iter().map(|r| r.rmse_ours).sum::<f64>() / runs.len() as f64;
    let mean_rnn: f64 = runs.iter().map(|r| r.rmse_rnn).sum::<f64>() / runs.len() as f64;
    let beats_persistence =
        runs.iter().filter(|r| r.rmse_ours < r.rmse_persistence).count();

    assert!(mean_ours < 0.10, "(a) mean test RMSE {mean_ours:.5} is not below 0.10");
    assert!(
        beats_persistence >= 4,
        "(b) beat persistence in only {beats_persistence}/5 seeds"
    );
    assert!(
        mean_ours <= mean_rnn,
        "(c) mean RMSE ordering violated: ours {mean_ours:.5} > rnn {mean_rnn:.5}"
    );
    let elapsed = started.elapsed();
    println!(
        "[PASS] criterion 6: mean RMSE {mean_ours:.5} (<0.10), beats persistence {beats_persistence}/5, ours {mean_ours:.5} <= rnn {mean_rnn:.5} ({elapsed:?} incl. shared fixture)"
    );
}

#[test]
fn acceptance_7_early_warning_median_lead_non_negative() {
    let runs = &*SEED_RUNS;
    let mut pooled: Vec<i64> = runs.iter().flat_map(|r| r.lead_times.iter().copied()).collect();
    assert!(
        !pooled.is_empty(),
        "no defaulted test bonds crossed the threshold in any seed"
    );
    pooled.sort_unstable();
    let median = if pooled.len() % 2 == 1 {
        pooled[pooled.len() / 2] as f64
    } else {
        (pooled[pooled.len() / 2 - 1] + pooled[pooled.len() / 2]) as f64 / 2.0
    };
    for run in runs.iter() {
        println!("  seed {}: lead times {:?}", run.seed, run.lead_times);
    }
    assert!(median >= 0.0, "median lead time {median} is negative");
    println!(
        "[PASS] criterion 7: median early-warning lead {median} days over {} defaulted test bonds",
        pooled.len()
    );
}

#[test]
fn acceptance_8_full_pipeline_is_bit_identical_across_reruns() {
    use std::fs;
    use std::process::Command;

    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    fs::write(
        &config_path,
        r#"{
            "seed": 7,
            "n_bonds": 30,
            "default_fraction": 0.2,
            "min_life": 40,
            "max_life": 60,
            "stress_onset_days": 30,
            "clusters": 8,
            "gmm_max_iter": 60,
            "window": 2,
            "hidden": 8,
            "conv_channels": 2,
            "depth": 2,
            "epochs": 2,
            "patience": 2,
            "boost_rounds": 5,
            "eval_seeds": [7]
        }"#,
    )
    .unwrap();

    let run = |out: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_bondrisk"))
            .args([
                "--config",
                config_path.to_str().unwrap(),
                "pipeline",
                "--all",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("spawn bondrisk");
        assert!(status.success(), "pipeline run failed");
    };
    let run_a = dir.path().join("run_a");
    let run_b = dir.path().join("run_b");
    run(&run_a);
    run(&run_b);

    let mut names: Vec<String> = fs::read_dir(&run_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n.ends_with(".ckpt")), "no checkpoint produced");
    assert!(names.contains(&"labels.csv".to_string()));
    assert!(names.contains(&"table.csv".to_string()));
    for name in &names {
        let a = fs::read(run_a.join(name)).unwrap();
        let b = fs::read(run_b.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between reruns");
    }
    println!(
        "[PASS] criterion 8: {} artifacts byte-identical across pipeline reruns",
        names.len()
    );
}
