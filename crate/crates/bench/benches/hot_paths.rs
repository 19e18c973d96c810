//! Hot-path benchmarks: the ConvLSTM step, mixture fitting, labeling and
//! SMOTE, at sizes matching one training sample or one small market.

use bondrisk_core::labeler::{fit_vb_gmm, spread_probability, SpreadParams, VbGmmOptions};
use bondrisk_core::models::{ArchitectureConfig, NeuralModel, Variant};
use bondrisk_core::nn::DropoutMode;
use bondrisk_core::pipeline::{make_windows, smote_balance, split_bonds};
use bondrisk_core::schema::N_FEATURES;
use bondrisk_core::synthgen::{generate_market, MarketConfig};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn bench_convlstm_forward_backward(c: &mut Criterion) {
    let arch = ArchitectureConfig {
        variant: Variant::Ours,
        window: 2,
        seed: 1,
        ..ArchitectureConfig::default()
    };
    let mut model: NeuralModel<f32> = NeuralModel::build(&arch).unwrap();
    let sample: Vec<f32> = (0..2 * N_FEATURES).map(|i| ((i % 13) as f32) * 0.1 - 0.6).collect();
    c.bench_function("ours_forward_infer", |b| {
        b.iter(|| black_box(model.forward(black_box(&sample), DropoutMode::Infer, 0).prob))
    });
    c.bench_function("ours_forward_backward", |b| {
        b.iter(|| {
            let cache = model.forward(black_box(&sample), DropoutMode::Train, 7);
            model.zero_grads();
            model.backward(&cache, 0.1);
        })
    });
}

fn bench_vb_gmm(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 2000;
    let d = 52;
    let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let opts = VbGmmOptions { n_components: 8, max_iter: 20, seed: 5, spread_col: 51, ..VbGmmOptions::default() };
    c.bench_function("vb_gmm_2000x52_k8_20it", |b| {
        b.iter(|| black_box(fit_vb_gmm(black_box(&data), n, d, &opts).unwrap()))
    });
}

fn bench_spread_labeling(c: &mut Criterion) {
    let days = 250;
    let yields: Vec<f64> = (0..days).map(|t| 0.07 + 0.01 * ((t as f64) * 0.05).sin()).collect();
    let riskfree = vec![0.028; days];
    let params = SpreadParams::default();
    c.bench_function("spread_probability_250d", |b| {
        b.iter(|| black_box(spread_probability(&yields, &riskfree, &params).unwrap()))
    });
}

fn bench_windowing_and_smote(c: &mut Criterion) {
    let config = MarketConfig {
        n_bonds: 40,
        default_fraction: 0.2,
        min_life: 60,
        max_life: 90,
        seed: 9,
        stress_onset_days: 40,
    };
    let bonds = generate_market(&config).unwrap();
    let filled: Vec<_> = bonds
        .iter()
        .map(|b| bondrisk_core::pipeline::fill_missing(b).unwrap())
        .map(|b| bondrisk_core::pipeline::standardize(&b).unwrap().0)
        .collect();
    let labels: HashMap<_, _> = filled
        .iter()
        .map(|b| {
            let n = b.n_days();
            let series = bondrisk_core::LabelSeries {
                bond_id: b.bond_id.clone(),
                p_gmm: vec![0.1; n],
                p_cs: vec![0.1; n],
                p_bwd: vec![0.1; n],
                p_integrated: (0..n).map(|d| 0.05 + 0.8 * d as f64 / n as f64).collect(),
            };
            (b.bond_id.clone(), series)
        })
        .collect();
    let splits = split_bonds(&filled, 3).unwrap();
    c.bench_function("windows_plus_smote_40bonds", |b| {
        b.iter(|| {
            let mut ds = make_windows(&filled, &labels, &splits, 5).unwrap();
            smote_balance(&mut ds, 1.0, 5, 3).unwrap();
            black_box(ds.n_samples())
        })
    });
}

criterion_group!(
    benches,
    bench_convlstm_forward_backward,
    bench_vb_gmm,
    bench_spread_labeling,
    bench_windowing_and_smote
);
criterion_main!(benches);
