//! Evaluation: RMSE/MAE, the variant-by-window comparison grid, and the
//! rating-comparison analysis with early-warning lead times.

use crate::error::{CoreError, Result};
use crate::models::{train, ArchitectureConfig, Variant};
use crate::pipeline::{Split, WindowedDataset};
use crate::schema::LabelSeries;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

pub fn rmse_mae(pred: &[f64], truth: &[f64]) -> Result<(f64, f64)> {
    if pred.len() != truth.len() {
        return Err(CoreError::Shape(format!(
            "{} predictions vs {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(CoreError::Domain("metrics of an empty set are undefined".into()));
    }
    let n = pred.len() as f64;
    let mut sq = 0.0;
    let mut ab = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        let e = p - t;
        sq += e * e;
        ab += e.abs();
    }
    Ok(((sq / n).sqrt(), ab / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionStats {
    pub slope: f64,
    pub intercept: f64,
    /// Absent when the reference series is constant.
    pub r2: Option<f64>,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionStats> {
    if x.len() != y.len() || x.is_empty() {
        return Err(CoreError::Shape("regression needs equal non-empty series".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xv, yv) in x.iter().zip(y) {
        sxx += (xv - mx) * (xv - mx);
        sxy += (xv - mx) * (yv - my);
        syy += (yv - my) * (yv - my);
    }
    if sxx == 0.0 {
        return Ok(RegressionStats { slope: 0.0, intercept: my, r2: None });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { Some(1.0) } else { Some(sxy * sxy / (sxx * syy)) };
    Ok(RegressionStats { slope, intercept, r2 })
}

/// First index at which the series reaches the threshold.
fn first_crossing(series: &[f64], threshold: f64) -> Option<usize> {
    series.iter().position(|v| *v >= threshold)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingComparison {
    pub regression: RegressionStats,
    /// Per-bond early-warning lead: reference crossing day minus prediction
    /// crossing day, positive when the model warns earlier. Absent when
    /// either series never crosses the threshold.
    pub lead_times: Vec<(String, Option<i64>)>,
    pub threshold: f64,
}

impl RatingComparison {
    pub fn median_lead(&self) -> Option<f64> {
        let mut known: Vec<i64> = self.lead_times.iter().filter_map(|(_, l)| *l).collect();
        if known.is_empty() {
            return None;
        }
        known.sort_unstable();
        let n = known.len();
        Some(if n % 2 == 1 {
            known[n / 2] as f64
        } else {
            (known[n / 2 - 1] + known[n / 2]) as f64 / 2.0
        })
    }
}

/// Compares daily predictions against a reference probability path.
/// `series` carries, per bond, aligned (predictions, reference) pairs; the
/// regression pools every day of every bond.
pub fn rating_comparison(
    series: &[(String, Vec<f64>, Vec<f64>)],
    threshold: f64,
) -> Result<RatingComparison> {
    let mut all_pred = Vec::new();
    let mut all_ref = Vec::new();
    let mut lead_times = Vec::new();
    for (bond_id, pred, reference) in series {
        if pred.len() != reference.len() {
            return Err(CoreError::Shape(format!(
                "bond {bond_id}: {} predictions vs {} reference days",
                pred.len(),
                reference.len()
            )));
        }
        all_pred.extend_from_slice(pred);
        all_ref.extend_from_slice(reference);
        let lead = match (first_crossing(reference, threshold), first_crossing(pred, threshold)) {
            (Some(r), Some(p)) => Some(r as i64 - p as i64),
            _ => None,
        };
        lead_times.push((bond_id.clone(), lead));
    }
    let regression = ols(&all_ref, &all_pred)?;
    Ok(RatingComparison { regression, lead_times, threshold })
}

/// Persistence baseline: predict tomorrow's label with today's. Returns
/// (prediction, truth) pairs over the given sample indices.
pub fn persistence_pairs(
    dataset: &WindowedDataset,
    labels: &HashMap<String, LabelSeries>,
    indices: &[usize],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let meta = &dataset.meta[i];
        let series = labels.get(&meta.bond_id).ok_or_else(|| {
            CoreError::MissingInput(format!("labels for bond {}", meta.bond_id))
        })?;
        let pred = series.p_integrated[meta.end_day];
        out.push((pred, f64::from(dataset.labels[i])));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub variant: Variant,
    pub window: usize,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub n_seeds: usize,
    pub top2_rmse: bool,
    pub top2_mae: bool,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains every (variant, window, seed) combination and evaluates each on
/// the untouched test split of the matching dataset. Top-2 flags mark the
/// two best means per window column, ties broken by variant order.
pub fn comparison_grid(
    datasets: &HashMap<usize, WindowedDataset>,
    variants: &[Variant],
    windows: &[usize],
    seeds: &[u64],
    base: &ArchitectureConfig,
) -> Result<Vec<GridCell>> {
    let mut cells = Vec::new();
    for &window in windows {
        let dataset = datasets.get(&window).ok_or_else(|| {
            CoreError::MissingInput(format!("preprocessed dataset for window {window}"))
        })?;
        let test_idx = dataset.indices_in(Split::Test);
        if test_idx.iter().any(|&i| dataset.meta[i].synthetic) {
            return Err(CoreError::Domain("test split contains synthetic samples".into()));
        }
        let truth: Vec<f64> = test_idx.iter().map(|&i| f64::from(dataset.labels[i])).collect();
        for &variant in variants {
            let mut rmses = Vec::new();
            let mut maes = Vec::new();
            for &seed in seeds {
                let arch = ArchitectureConfig { variant, window, seed, ..base.clone() };
                let (model, _) = train(dataset, &arch)?;
                let preds = model.predict_indices(dataset, &test_idx);
                let (rmse, mae) = rmse_mae(&preds, &truth)?;
                rmses.push(rmse);
                maes.push(mae);
            }
            let (rmse_mean, rmse_std) = mean_std(&rmses);
            let (mae_mean, mae_std) = mean_std(&maes);
            cells.push(GridCell {
                variant,
                window,
                rmse_mean,
                rmse_std,
                mae_mean,
                mae_std,
                n_seeds: seeds.len(),
                top2_rmse: false,
                top2_mae: false,
            });
        }
    }
    mark_top2(&mut cells, variants, windows);
    Ok(cells)
}

/// Flags the two lowest means per window for each metric. Ranking is
/// strictly by value; exact ties resolve by variant order.
pub fn mark_top2(cells: &mut [GridCell], variants: &[Variant], windows: &[usize]) {
    let variant_rank = |v: Variant| variants.iter().position(|x| *x == v).unwrap_or(usize::MAX);
    for &window in windows {
        for metric in 0..2 {
            let mut col: Vec<(usize, f64, usize)> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.window == window)
                .map(|(i, c)| {
                    let value = if metric == 0 { c.rmse_mean } else { c.mae_mean };
                    (i, value, variant_rank(c.variant))
                })
                .collect();
            col.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.2.cmp(&b.2)));
            for (rank, (idx, _, _)) in col.into_iter().enumerate() {
                if rank < 2 {
                    if metric == 0 {
                        cells[idx].top2_rmse = true;
                    } else {
                        cells[idx].top2_mae = true;
                    }
                }
            }
        }
    }
}

pub fn write_grid_csv(path: &Path, cells: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant", "window", "rmse_mean", "rmse_std", "mae_mean", "mae_std", "n_seeds",
        "top2_rmse", "top2_mae",
    ])?;
    for c in cells {
        w.write_record([
            c.variant.to_string(),
            c.window.to_string(),
            format!("{}", c.rmse_mean),
            format!("{}", c.rmse_std),
            format!("{}", c.mae_mean),
            format!("{}", c.mae_std),
            c.n_seeds.to_string(),
            c.top2_rmse.to_string(),
            c.top2_mae.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid_csv(path: &Path) -> Result<Vec<GridCell>> {
    if !path.exists() {
        return Err(CoreError::MissingInput(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| CoreError::Domain(format!("bad float {:?}", &rec[i])))
        };
        out.push(GridCell {
            variant: rec[0].parse()?,
            window: rec[1].parse().map_err(|_| CoreError::Domain("bad window".into()))?,
            rmse_mean: parse(2)?,
            rmse_std: parse(3)?,
            mae_mean: parse(4)?,
            mae_std: parse(5)?,
            n_seeds: rec[6].parse().map_err(|_| CoreError::Domain("bad n_seeds".into()))?,
            top2_rmse: rec[7] == *"true",
            top2_mae: rec[8] == *"true",
        });
    }
    Ok(out)
}

/// Per-sample prediction rows for external plotting.
pub fn write_predictions_csv(
    path: &Path,
    rows: &[(String, usize, f64, f64)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bond_id", "day", "label", "prediction"])?;
    for (bond_id, day, label, pred) in rows {
        w.write_record([
            bond_id.clone(),
            day.to_string(),
            format!("{label}"),
            format!("{pred}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
