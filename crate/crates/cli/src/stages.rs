//! Stage runners. Every stage reads explicit input artifacts, writes its
//! outputs plus a manifest with content hashes, and never mutates inputs.

use crate::config::RunConfig;
use bondrisk_core::eval::{
    mark_top2, persistence_pairs, rating_comparison, rmse_mae, write_grid_csv,
    write_predictions_csv, GridCell, RatingComparison,
};
use bondrisk_core::labeler::{annotate_market, read_labels_csv, write_labels_csv};
use bondrisk_core::manifest::{sha256_bytes, Manifest};
use bondrisk_core::models::{
    load_checkpoint, rolling_predict, save_checkpoint, train, TrainReport, Variant,
};
use bondrisk_core::pipeline::{
    fill_missing, load_dataset, make_windows, save_dataset, smote_balance, split_bonds,
    standardize, Split, WindowedDataset,
};
use bondrisk_core::schema::{
    grade_value_to_probability, read_bonds_jsonl, write_bonds_jsonl, COL_PRIOR_DEFAULT_PROB,
};
use bondrisk_core::synthgen::generate_market;
use bondrisk_core::{build_default_registry, BondRecord, CoreError, LabelSeries, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

pub fn registry_hash() -> String {
    sha256_bytes(build_default_registry().canonical_json().as_bytes())
}

fn manifest_for(stage: &str, config: &RunConfig) -> Result<Manifest> {
    Ok(Manifest::new(stage, config.seed, serde_json::to_value(config)?))
}

fn write_manifest(mut manifest: Manifest, outputs: &[&Path], dir_hint: &Path) -> Result<()> {
    for out in outputs {
        manifest.add_output(out)?;
    }
    let path = dir_hint.join(format!("manifest_{}.json", manifest.stage));
    manifest.write(&path)
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

pub fn run_generate(config: &RunConfig, out: &Path) -> Result<()> {
    let bonds = generate_market(&config.market_config())?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    write_bonds_jsonl(out, &bonds)?;
    let manifest = manifest_for("generate", config)?;
    write_manifest(manifest, &[out], &parent_dir(out))?;
    println!("generate: wrote {} bonds to {}", bonds.len(), out.display());
    Ok(())
}

pub fn run_label(
    config: &RunConfig,
    bonds_in: &Path,
    labels_out: &Path,
    bonds_out: &Path,
) -> Result<()> {
    let mut bonds = read_bonds_jsonl(bonds_in)?;
    let labeler = config.labeler_config()?;
    let (_, series) = annotate_market(&mut bonds, &labeler)?;
    write_labels_csv(labels_out, &series)?;
    write_bonds_jsonl(bonds_out, &bonds)?;
    let mut manifest = manifest_for("label", config)?;
    manifest.add_input(bonds_in)?;
    write_manifest(manifest, &[labels_out, bonds_out], &parent_dir(labels_out))?;
    println!(
        "label: annotated {} bonds -> {} and {}",
        bonds.len(),
        labels_out.display(),
        bonds_out.display()
    );
    Ok(())
}

/// Shared by preprocess and evaluation paths: fill and standardize every
/// bond, keeping the per-bond moments.
pub fn standardize_all(bonds: &[BondRecord]) -> Result<Vec<(BondRecord, Vec<f64>, Vec<f64>)>> {
    bonds
        .iter()
        .map(|bond| {
            let filled = fill_missing(bond)?;
            let (z, stats) = standardize(&filled)?;
            Ok((z, stats.mean, stats.std))
        })
        .collect()
}

pub fn build_dataset(
    config: &RunConfig,
    bonds: &[BondRecord],
    labels: &[LabelSeries],
    window: usize,
) -> Result<WindowedDataset> {
    let label_map: HashMap<String, LabelSeries> =
        labels.iter().map(|s| (s.bond_id.clone(), s.clone())).collect();
    let standardized: Vec<BondRecord> =
        standardize_all(bonds)?.into_iter().map(|(z, _, _)| z).collect();
    let splits = split_bonds(&standardized, config.seed)?;
    let mut dataset = make_windows(&standardized, &label_map, &splits, window)?;
    smote_balance(&mut dataset, config.smote_ratio, config.k_neighbors, config.seed)?;
    Ok(dataset)
}

pub fn run_preprocess(
    config: &RunConfig,
    bonds_in: &Path,
    labels_in: &Path,
    window: usize,
    out: &Path,
) -> Result<()> {
    let bonds = read_bonds_jsonl(bonds_in)?;
    let labels = read_labels_csv(labels_in)?;
    let dataset = build_dataset(config, &bonds, &labels, window)?;
    save_dataset(out, &dataset, config.seed, &registry_hash())?;
    let mut manifest = manifest_for("preprocess", config)?;
    manifest.add_input(bonds_in)?;
    manifest.add_input(labels_in)?;
    write_manifest(manifest, &[out], &parent_dir(out))?;
    println!(
        "preprocess: {} samples (window {window}, {} bonds skipped) -> {}",
        dataset.n_samples(),
        dataset.skipped_bonds,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_train(
    config: &RunConfig,
    dataset_in: &Path,
    variant: Option<Variant>,
    window: Option<usize>,
    seed: Option<u64>,
    out: &Path,
    trace_out: Option<&Path>,
) -> Result<()> {
    let (dataset, _, hash) = load_dataset(dataset_in)?;
    if let Some(w) = window {
        if w != dataset.window {
            return Err(CoreError::Config(format!(
                "requested window {w} but the dataset was preprocessed at {}",
                dataset.window
            )));
        }
    }
    let arch = config.architecture(variant, Some(dataset.window), seed)?;
    let (mut model, report) = train(&dataset, &arch)?;
    save_checkpoint(out, &mut model, &report, &hash)?;
    if let Some(trace_path) = trace_out {
        write_trace_csv(trace_path, &report)?;
    }
    let mut manifest = manifest_for("train", config)?;
    manifest.add_input(dataset_in)?;
    let mut outputs: Vec<&Path> = vec![out];
    if let Some(t) = trace_out {
        outputs.push(t);
    }
    write_manifest(manifest, &outputs, &parent_dir(out))?;
    println!(
        "train: {} (window {}) best epoch {} val loss {:.6} -> {}",
        arch.variant,
        arch.window,
        report.best_epoch,
        report.best_val_loss,
        out.display()
    );
    Ok(())
}

fn write_trace_csv(path: &Path, report: &TrainReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "train_loss", "val_loss"])?;
    for e in &report.trace {
        w.write_record([
            e.epoch.to_string(),
            format!("{}", e.train_loss),
            format!("{}", e.val_loss),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_predict(
    config: &RunConfig,
    ckpt: &Path,
    dataset_in: &Path,
    out: &Path,
    rolling_bonds: Option<&Path>,
) -> Result<()> {
    let (model, _) = load_checkpoint(ckpt)?;
    let (dataset, _, _) = load_dataset(dataset_in)?;
    let mut manifest = manifest_for("predict", config)?;
    manifest.add_input(ckpt)?;
    manifest.add_input(dataset_in)?;

    if let Some(bonds_path) = rolling_bonds {
        let bonds = read_bonds_jsonl(bonds_path)?;
        manifest.add_input(bonds_path)?;
        let test_bonds: std::collections::HashSet<&str> = dataset
            .meta
            .iter()
            .filter(|m| m.split == Split::Test)
            .map(|m| m.bond_id.as_str())
            .collect();
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(["bond_id", "day", "prediction"])?;
        for bond in bonds.iter().filter(|b| test_bonds.contains(b.bond_id.as_str())) {
            let filled = fill_missing(bond)?;
            let (z, stats) = standardize(&filled)?;
            let rows: Vec<f32> = z.features.values().iter().map(|v| *v as f32).collect();
            let preds = rolling_predict(
                &model,
                &rows,
                z.features.days(),
                stats.mean[COL_PRIOR_DEFAULT_PROB],
                stats.std[COL_PRIOR_DEFAULT_PROB],
                config.prior_init,
            )?;
            let window = dataset.window;
            for (i, p) in preds.iter().enumerate() {
                w.write_record([bond.bond_id.clone(), (window + i).to_string(), format!("{p}")])?;
            }
        }
        w.flush()?;
    } else {
        let test_idx = dataset.indices_in(Split::Test);
        let preds = model.predict_indices(&dataset, &test_idx);
        let rows: Vec<(String, usize, f64, f64)> = test_idx
            .iter()
            .zip(&preds)
            .map(|(&i, p)| {
                let meta = &dataset.meta[i];
                (meta.bond_id.clone(), meta.end_day + 1, f64::from(dataset.labels[i]), *p)
            })
            .collect();
        write_predictions_csv(out, &rows)?;
    }
    write_manifest(manifest, &[out], &parent_dir(out))?;
    println!("predict: wrote {}", out.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalCell {
    pub variant: Variant,
    pub window: usize,
    pub seed: u64,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EvalSummary<'a> {
    variant: Variant,
    window: usize,
    seed: u64,
    rmse: f64,
    mae: f64,
    persistence_rmse: Option<f64>,
    regression: Option<&'a RatingComparison>,
}

/// Evaluates a checkpoint on the dataset's untouched test split, optionally
/// comparing against the latent-grade reference path when bonds and labels
/// are supplied.
#[allow(clippy::too_many_arguments)]
pub fn run_evaluate(
    config: &RunConfig,
    ckpt: &Path,
    dataset_in: &Path,
    bonds_in: Option<&Path>,
    labels_in: Option<&Path>,
    out: &Path,
    cell_out: Option<&Path>,
    plot_out: Option<&Path>,
) -> Result<()> {
    let (model, header) = load_checkpoint(ckpt)?;
    let (dataset, seed, _) = load_dataset(dataset_in)?;
    let test_idx = dataset.indices_in(Split::Test);
    if test_idx.iter().any(|&i| dataset.meta[i].synthetic) {
        return Err(CoreError::Domain("test split contains synthetic samples".into()));
    }
    let truth: Vec<f64> = test_idx.iter().map(|&i| f64::from(dataset.labels[i])).collect();
    let preds = model.predict_indices(&dataset, &test_idx);
    let (rmse, mae) = rmse_mae(&preds, &truth)?;

    let mut manifest = manifest_for("evaluate", config)?;
    manifest.add_input(ckpt)?;
    manifest.add_input(dataset_in)?;

    let persistence = if let Some(labels_path) = labels_in {
        let labels = read_labels_csv(labels_path)?;
        manifest.add_input(labels_path)?;
        let map: HashMap<String, LabelSeries> =
            labels.into_iter().map(|s| (s.bond_id.clone(), s)).collect();
        let pairs = persistence_pairs(&dataset, &map, &test_idx)?;
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        Some(rmse_mae(&p, &t)?.0)
    } else {
        None
    };

    let comparison = if let Some(bonds_path) = bonds_in {
        let bonds = read_bonds_jsonl(bonds_path)?;
        manifest.add_input(bonds_path)?;
        let series = reference_series(&bonds, &dataset, &test_idx, &preds)?;
        let cmp = rating_comparison(&series, config.warning_threshold)?;
        if let Some(plot_path) = plot_out {
            write_plot_csv(plot_path, &bonds, &dataset, &series)?;
        }
        Some(cmp)
    } else {
        None
    };

    let variant = header
        .boosting_model
        .as_ref()
        .map(|_| Variant::Boosting)
        .unwrap_or(header.arch.variant);
    let summary = EvalSummary {
        variant,
        window: dataset.window,
        seed,
        rmse,
        mae,
        persistence_rmse: persistence,
        regression: comparison.as_ref(),
    };
    write_report_csv(out, &summary)?;
    let mut outputs: Vec<&Path> = vec![out];
    if let Some(cell_path) = cell_out {
        let cell = EvalCell { variant, window: dataset.window, seed, rmse, mae };
        fs::write(cell_path, serde_json::to_string_pretty(&cell)?)?;
        outputs.push(cell_path);
    }
    if let Some(p) = plot_out {
        if bonds_in.is_some() {
            outputs.push(p);
        }
    }
    write_manifest(manifest, &outputs, &parent_dir(out))?;
    println!("evaluate: rmse {rmse:.5} mae {mae:.5} -> {}", out.display());
    Ok(())
}

/// Per-bond aligned (prediction, latent-grade reference) series over the
/// test split, ordered by day.
pub fn reference_series(
    bonds: &[BondRecord],
    dataset: &WindowedDataset,
    test_idx: &[usize],
    preds: &[f64],
) -> Result<Vec<(String, Vec<f64>, Vec<f64>)>> {
    let by_id: HashMap<&str, &BondRecord> =
        bonds.iter().map(|b| (b.bond_id.as_str(), b)).collect();
    let mut grouped: HashMap<&str, Vec<(usize, f64)>> = HashMap::new();
    for (&i, p) in test_idx.iter().zip(preds) {
        let meta = &dataset.meta[i];
        grouped.entry(meta.bond_id.as_str()).or_default().push((meta.end_day + 1, *p));
    }
    let mut out = Vec::new();
    let mut ids: Vec<&str> = grouped.keys().copied().collect();
    ids.sort_unstable();
    for id in ids {
        let bond = by_id
            .get(id)
            .ok_or_else(|| CoreError::MissingInput(format!("bond {id} for reference path")))?;
        let mut days = grouped.remove(id).unwrap();
        days.sort_by_key(|(d, _)| *d);
        let reference: Vec<f64> = days
            .iter()
            .map(|(d, _)| grade_value_to_probability(bond.latent_grades[*d]))
            .collect();
        let preds: Vec<f64> = days.into_iter().map(|(_, p)| p).collect();
        out.push((id.to_string(), preds, reference));
    }
    Ok(out)
}

fn write_plot_csv(
    path: &Path,
    bonds: &[BondRecord],
    dataset: &WindowedDataset,
    series: &[(String, Vec<f64>, Vec<f64>)],
) -> Result<()> {
    let _ = bonds;
    let window = dataset.window;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bond_id", "day", "predicted_p", "reference_p"])?;
    for (bond_id, preds, reference) in series {
        for (i, (p, r)) in preds.iter().zip(reference).enumerate() {
            w.write_record([
                bond_id.clone(),
                (window + i).to_string(),
                format!("{p}"),
                format!("{r}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_report_csv(path: &Path, summary: &EvalSummary<'_>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "window",
        "seed",
        "rmse",
        "mae",
        "persistence_rmse",
        "slope",
        "intercept",
        "r2",
        "median_lead_days",
    ])?;
    let (slope, intercept, r2, lead) = match summary.regression {
        Some(cmp) => (
            format!("{}", cmp.regression.slope),
            format!("{}", cmp.regression.intercept),
            cmp.regression.r2.map(|v| format!("{v}")).unwrap_or_default(),
            cmp.median_lead().map(|v| format!("{v}")).unwrap_or_default(),
        ),
        None => (String::new(), String::new(), String::new(), String::new()),
    };
    w.write_record([
        summary.variant.to_string(),
        summary.window.to_string(),
        summary.seed.to_string(),
        format!("{}", summary.rmse),
        format!("{}", summary.mae),
        summary.persistence_rmse.map(|v| format!("{v}")).unwrap_or_default(),
        slope,
        intercept,
        r2,
        lead,
    ])?;
    w.flush()?;
    Ok(())
}

/// Aggregates per-seed cell files (written by `evaluate --cell`) into the
/// comparison table with top-2 marks per window column.
pub fn run_report(config: &RunConfig, grid_dir: &Path, out: &Path) -> Result<()> {
    if !grid_dir.is_dir() {
        return Err(CoreError::MissingInput(grid_dir.display().to_string()));
    }
    let mut cells: Vec<EvalCell> = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(grid_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("cell_") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .collect();
    entries.sort();
    for path in entries {
        let text = fs::read_to_string(&path)?;
        cells.push(serde_json::from_str(&text).map_err(|e| {
            CoreError::Config(format!("cell file {}: {e}", path.display()))
        })?);
    }
    if cells.is_empty() {
        return Err(CoreError::MissingInput(format!(
            "no cell_*.json files under {}",
            grid_dir.display()
        )));
    }
    let variant_order = [Variant::Boosting, Variant::Rnn, Variant::Lstm, Variant::PConvLstm, Variant::Ours];
    let mut windows: Vec<usize> = cells.iter().map(|c| c.window).collect();
    windows.sort_unstable();
    windows.dedup();
    let mut grid: Vec<GridCell> = Vec::new();
    for &window in &windows {
        for &variant in &variant_order {
            let vals: Vec<&EvalCell> = cells
                .iter()
                .filter(|c| c.window == window && c.variant == variant)
                .collect();
            if vals.is_empty() {
                continue;
            }
            let rmses: Vec<f64> = vals.iter().map(|c| c.rmse).collect();
            let maes: Vec<f64> = vals.iter().map(|c| c.mae).collect();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let std = |v: &[f64], m: f64| {
                (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
            };
            let (rm, mm) = (mean(&rmses), mean(&maes));
            grid.push(GridCell {
                variant,
                window,
                rmse_mean: rm,
                rmse_std: std(&rmses, rm),
                mae_mean: mm,
                mae_std: std(&maes, mm),
                n_seeds: vals.len(),
                top2_rmse: false,
                top2_mae: false,
            });
        }
    }
    mark_top2(&mut grid, &variant_order, &windows);
    write_grid_csv(out, &grid)?;
    let manifest = manifest_for("report", config)?;
    write_manifest(manifest, &[out], &parent_dir(out))?;
    println!("report: {} cells -> {}", grid.len(), out.display());
    Ok(())
}

/// Runs the whole chain into one directory with a manifest per stage.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let bonds = out_dir.join("bonds.jsonl");
    run_generate(config, &bonds)?;
    let labels = out_dir.join("labels.csv");
    let labeled = out_dir.join("bonds_labeled.jsonl");
    run_label(config, &bonds, &labels, &labeled)?;
    let dataset = out_dir.join(format!("dataset_w{}.bin", config.window));
    run_preprocess(config, &labeled, &labels, config.window, &dataset)?;
    let variant: Variant = config.variant.parse()?;
    let ckpt = out_dir.join(format!("model_{}_w{}.ckpt", variant, config.window));
    let trace = out_dir.join("trace.csv");
    run_train(config, &dataset, Some(variant), None, None, &ckpt, Some(&trace))?;
    let predictions = out_dir.join("predictions.csv");
    run_predict(config, &ckpt, &dataset, &predictions, None)?;
    let report = out_dir.join("report.csv");
    let cell = out_dir.join(format!("cell_{}_w{}_s{}.json", variant, config.window, config.seed));
    let plot = out_dir.join("plot.csv");
    run_evaluate(
        config,
        &ckpt,
        &dataset,
        Some(&labeled),
        Some(&labels),
        &report,
        Some(&cell),
        Some(&plot),
    )?;
    let table = out_dir.join("table.csv");
    run_report(config, out_dir, &table)?;
    println!("pipeline: artifacts in {}", out_dir.display());
    Ok(())
}
