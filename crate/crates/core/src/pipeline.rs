//! Preprocessing: missing-value fill, per-bond standardization, sliding
//! windows, bond-level splits, and SMOTE balancing of the training set.

use crate::error::{CoreError, Result};
use crate::schema::{BondRecord, LabelSeries, N_FEATURES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which split a bond (and all of its windows) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// High-risk bonds are the defaulted and low-rated-active ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskClass {
    High,
    Low,
}

/// Provenance of one window sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub bond_id: String,
    /// Local day index (within the bond) of the window's last row.
    pub end_day: usize,
    pub risk_class: RiskClass,
    pub split: Split,
    /// True for SMOTE-generated samples.
    pub synthetic: bool,
    /// For synthetic samples: (base index, neighbour index, interpolation
    /// coefficient) within this dataset.
    #[serde(default)]
    pub synthetic_parents: Option<(usize, usize, f64)>,
}

/// Windowed tensors with aligned next-day labels.
///
/// `inputs` is row-major `(n_samples, window, N_FEATURES)`; each sample's
/// label is the integrated probability of the day after the window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub window: usize,
    pub inputs: Vec<f32>,
    pub labels: Vec<f32>,
    pub meta: Vec<SampleMeta>,
    /// Bonds too short to produce a single window.
    pub skipped_bonds: usize,
}

impl WindowedDataset {
    pub fn n_samples(&self) -> usize {
        self.meta.len()
    }

    pub fn sample_len(&self) -> usize {
        self.window * N_FEATURES
    }

    pub fn sample(&self, idx: usize) -> &[f32] {
        let len = self.sample_len();
        &self.inputs[idx * len..(idx + 1) * len]
    }

    pub fn indices_in(&self, split: Split) -> Vec<usize> {
        (0..self.n_samples()).filter(|&i| self.meta[i].split == split).collect()
    }
}

/// Per-feature mean and standard deviation recorded by [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fills absent cells column by column: interior gaps by linear
/// interpolation, leading and trailing gaps by extending the nearest
/// observed value. Errors when a column has no observed value at all.
pub fn fill_missing(bond: &BondRecord) -> Result<BondRecord> {
    let days = bond.features.days();
    let mut out = bond.clone();
    for col in 0..N_FEATURES {
        let observed: Vec<usize> = (0..days).filter(|&d| !bond.features.is_absent(d, col)).collect();
        if observed.is_empty() {
            let name = crate::schema::build_default_registry().entries[col].name.clone();
            return Err(CoreError::EmptyColumn(format!("{name} (bond {})", bond.bond_id)));
        }
        let first = observed[0];
        let last = *observed.last().unwrap();
        for d in 0..first {
            out.features.set(d, col, bond.features.get(first, col));
        }
        for d in last + 1..days {
            out.features.set(d, col, bond.features.get(last, col));
        }
        for pair in observed.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if hi > lo + 1 {
                let a = bond.features.get(lo, col);
                let b = bond.features.get(hi, col);
                for d in lo + 1..hi {
                    let t = (d - lo) as f64 / (hi - lo) as f64;
                    out.features.set(d, col, a + t * (b - a));
                }
            }
        }
    }
    Ok(out)
}

/// Standardizes each column over the bond's own full period using the
/// population standard deviation. Constant columns map to all zeros and
/// their recorded std is 1 so the transform stays invertible.
pub fn standardize(bond: &BondRecord) -> Result<(BondRecord, FeatureStats)> {
    let days = bond.features.days();
    let mut out = bond.clone();
    let mut mean = vec![0.0; N_FEATURES];
    let mut std = vec![0.0; N_FEATURES];
    for col in 0..N_FEATURES {
        let mut sum = 0.0;
        for d in 0..days {
            let v = bond.features.get(d, col);
            if v.is_nan() {
                return Err(CoreError::Domain(format!(
                    "bond {}: absent cell at day {d} column {col}; run fill first",
                    bond.bond_id
                )));
            }
            sum += v;
        }
        let mu = sum / days as f64;
        let var = (0..days).map(|d| (bond.features.get(d, col) - mu).powi(2)).sum::<f64>()
            / days as f64;
        let sigma = var.sqrt();
        mean[col] = mu;
        if sigma == 0.0 {
            std[col] = 1.0;
            for d in 0..days {
                out.features.set(d, col, 0.0);
            }
        } else {
            std[col] = sigma;
            for d in 0..days {
                out.features.set(d, col, (bond.features.get(d, col) - mu) / sigma);
            }
        }
    }
    Ok((out, FeatureStats { mean, std }))
}

/// Assigns each bond to train/val/test, independently within each risk
/// class, shuffling by seed and splitting 80/10/10 by bond count. The
/// rounding residue goes to train. Splitting is always by bond so no bond
/// contributes windows to two splits.
pub fn split_bonds(bonds: &[BondRecord], seed: u64) -> Result<HashMap<String, Split>> {
    let mut assignment = HashMap::new();
    for (class, high) in [(RiskClass::High, true), (RiskClass::Low, false)] {
        let mut ids: Vec<&str> = bonds
            .iter()
            .filter(|b| b.outcome.is_high_risk() == high)
            .map(|b| b.bond_id.as_str())
            .collect();
        if ids.len() < 3 {
            return Err(CoreError::Config(format!(
                "risk class {class:?} has only {} bonds; need at least 3 to populate all splits",
                ids.len()
            )));
        }
        // Distinct stream per class so adding bonds to one class does not
        // reshuffle the other.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (class as u64).wrapping_mul(0x9E3779B97F4A7C15));
        ids.shuffle(&mut rng);
        let n = ids.len();
        let n_val = n / 10;
        let n_test = n / 10;
        let n_train = n - n_val - n_test;
        for (i, id) in ids.iter().enumerate() {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            assignment.insert((*id).to_string(), split);
        }
    }
    Ok(assignment)
}

/// Slides a length-`window` window over each bond and pairs it with the
/// next day's integrated label. A bond with `T` days yields `T - window`
/// samples; bonds with `T <= window` are counted as skipped.
pub fn make_windows(
    bonds: &[BondRecord],
    labels: &HashMap<String, LabelSeries>,
    splits: &HashMap<String, Split>,
    window: usize,
) -> Result<WindowedDataset> {
    if window == 0 {
        return Err(CoreError::Config("window size must be at least 1".into()));
    }
    let mut inputs = Vec::new();
    let mut out_labels = Vec::new();
    let mut meta = Vec::new();
    let mut skipped = 0usize;
    for bond in bonds {
        let series = labels.get(&bond.bond_id).ok_or_else(|| {
            CoreError::MissingInput(format!("labels for bond {}", bond.bond_id))
        })?;
        let split = *splits.get(&bond.bond_id).ok_or_else(|| {
            CoreError::MissingInput(format!("split assignment for bond {}", bond.bond_id))
        })?;
        let days = bond.features.days();
        if series.len() != days {
            return Err(CoreError::Shape(format!(
                "bond {}: {} labels for {} days",
                bond.bond_id,
                series.len(),
                days
            )));
        }
        if days <= window {
            skipped += 1;
            continue;
        }
        let risk_class = if bond.outcome.is_high_risk() { RiskClass::High } else { RiskClass::Low };
        for end in window - 1..days - 1 {
            for d in end + 1 - window..=end {
                inputs.extend(bond.features.row(d).iter().map(|v| *v as f32));
            }
            out_labels.push(series.p_integrated[end + 1] as f32);
            meta.push(SampleMeta {
                bond_id: bond.bond_id.clone(),
                end_day: end,
                risk_class,
                split,
                synthetic: false,
                synthetic_parents: None,
            });
        }
    }
    Ok(WindowedDataset { window, inputs, labels: out_labels, meta, skipped_bonds: skipped })
}

/// SMOTE over the flattened window vectors of the training split.
///
/// Each synthetic sample interpolates a real high-risk training sample
/// toward one of its `k_neighbors` nearest high-risk neighbours with a
/// uniform coefficient; labels interpolate with the same coefficient.
/// Samples are appended until the high-to-low count ratio in train reaches
/// `target_ratio`. Validation and test samples are never touched.
pub fn smote_balance(
    dataset: &mut WindowedDataset,
    target_ratio: f64,
    k_neighbors: usize,
    seed: u64,
) -> Result<usize> {
    if target_ratio <= 0.0 {
        return Err(CoreError::Config("SMOTE target ratio must be positive".into()));
    }
    let train: Vec<usize> = dataset.indices_in(Split::Train);
    let minority: Vec<usize> = train
        .iter()
        .copied()
        .filter(|&i| dataset.meta[i].risk_class == RiskClass::High)
        .collect();
    let majority = train.len() - minority.len();
    if minority.len() < k_neighbors + 1 {
        return Err(CoreError::Config(format!(
            "SMOTE needs at least {} high-risk training samples, found {}",
            k_neighbors + 1,
            minority.len()
        )));
    }
    let want = (target_ratio * majority as f64).ceil() as usize;
    let n_new = want.saturating_sub(minority.len());
    if n_new == 0 {
        return Ok(0);
    }

    // k nearest high-risk neighbours of each high-risk sample, by Euclidean
    // distance over the flattened window.
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(minority.len());
    for (a, &ia) in minority.iter().enumerate() {
        let va = dataset.sample(ia);
        let mut dists: Vec<(f64, usize)> = minority
            .iter()
            .enumerate()
            .filter(|(b, _)| *b != a)
            .map(|(b, &ib)| {
                let vb = dataset.sample(ib);
                let d: f64 = va
                    .iter()
                    .zip(vb)
                    .map(|(x, y)| {
                        let diff = f64::from(*x) - f64::from(*y);
                        diff * diff
                    })
                    .sum();
                (d, b)
            })
            .collect();
        dists.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
        neighbors.push(dists.into_iter().take(k_neighbors).map(|(_, b)| b).collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..n_new {
        let a = s % minority.len();
        let ia = minority[a];
        let nb = neighbors[a][rng.gen_range(0..neighbors[a].len())];
        let ib = minority[nb];
        let u: f64 = rng.gen_range(0.0..1.0);
        let base = dataset.sample(ia).to_vec();
        let other = dataset.sample(ib).to_vec();
        for (x, y) in base.iter().zip(&other) {
            let v = f64::from(*x) + u * (f64::from(*y) - f64::from(*x));
            dataset.inputs.push(v as f32);
        }
        let la = f64::from(dataset.labels[ia]);
        let lb = f64::from(dataset.labels[ib]);
        dataset.labels.push((la + u * (lb - la)) as f32);
        dataset.meta.push(SampleMeta {
            bond_id: dataset.meta[ia].bond_id.clone(),
            end_day: dataset.meta[ia].end_day,
            risk_class: RiskClass::High,
            split: Split::Train,
            synthetic: true,
            synthetic_parents: Some((ia, ib, u)),
        });
    }
    Ok(n_new)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetHeader {
    version: u32,
    window: usize,
    n_features: usize,
    n_samples: usize,
    seed: u64,
    registry_hash: String,
    split_counts: HashMap<String, usize>,
    skipped_bonds: usize,
    meta: Vec<SampleMeta>,
}

/// Persists the dataset as a JSON header plus little-endian float32 blobs:
/// the input tensor `(n_samples, window, n_features)` followed by the label
/// vector.
pub fn save_dataset(
    path: &std::path::Path,
    dataset: &WindowedDataset,
    seed: u64,
    registry_hash: &str,
) -> Result<()> {
    let mut split_counts = HashMap::new();
    for meta in &dataset.meta {
        let key = format!("{:?}", meta.split).to_lowercase();
        *split_counts.entry(key).or_insert(0) += 1;
    }
    let header = DatasetHeader {
        version: 1,
        window: dataset.window,
        n_features: N_FEATURES,
        n_samples: dataset.n_samples(),
        seed,
        registry_hash: registry_hash.to_string(),
        split_counts,
        skipped_bonds: dataset.skipped_bonds,
        meta: dataset.meta.clone(),
    };
    let mut blob = crate::container::f32s_to_bytes(&dataset.inputs);
    blob.extend_from_slice(&crate::container::f32s_to_bytes(&dataset.labels));
    crate::container::write_container(path, &header, &blob)
}

/// Loads a dataset saved by [`save_dataset`], returning the recorded seed
/// and registry hash alongside it.
pub fn load_dataset(path: &std::path::Path) -> Result<(WindowedDataset, u64, String)> {
    let (header, blob): (DatasetHeader, Vec<u8>) = crate::container::read_container(path)?;
    let floats = crate::container::bytes_to_f32s(&blob)?;
    let input_len = header.n_samples * header.window * header.n_features;
    if floats.len() != input_len + header.n_samples {
        return Err(CoreError::Shape(format!(
            "dataset blob holds {} floats, header promises {}",
            floats.len(),
            input_len + header.n_samples
        )));
    }
    if header.n_features != N_FEATURES {
        return Err(CoreError::Shape(format!(
            "dataset was written with {} features, this build uses {}",
            header.n_features,
            N_FEATURES
        )));
    }
    let inputs = floats[..input_len].to_vec();
    let labels = floats[input_len..].to_vec();
    let dataset = WindowedDataset {
        window: header.window,
        inputs,
        labels,
        meta: header.meta,
        skipped_bonds: header.skipped_bonds,
    };
    Ok((dataset, header.seed, header.registry_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FeatureMatrix, Outcome, RatingGrade};

    fn bond_with_column(col: usize, vals: &[f64]) -> BondRecord {
        let days = vals.len();
        let mut m = FeatureMatrix::absent(days);
        for d in 0..days {
            for c in 0..N_FEATURES {
                m.set(d, c, 1.0);
            }
            m.set(d, col, vals[d]);
        }
        BondRecord {
            bond_id: "t".into(),
            issue_date: 0,
            end_date: days - 1,
            outcome: Outcome::Matured,
            issue_grade: RatingGrade::new(20).unwrap(),
            final_grade: RatingGrade::new(20).unwrap(),
            default_date: None,
            industry_id: 0,
            region_id: 0,
            features: m,
            latent_grades: vec![20.0; days],
        }
    }

    #[test]
    fn interior_gap_interpolates_linearly() {
        let mut bond = bond_with_column(5, &[1.0, 2.0, 3.0]);
        bond.features.set(1, 5, f64::NAN);
        let filled = fill_missing(&bond).unwrap();
        assert_eq!(filled.features.get(1, 5), 2.0);
    }

    #[test]
    fn edge_gaps_extend_nearest() {
        let mut bond = bond_with_column(5, &[0.0, 5.0]);
        bond.features.set(0, 5, f64::NAN);
        let filled = fill_missing(&bond).unwrap();
        assert_eq!(filled.features.get(0, 5), 5.0);
        assert_eq!(filled.features.get(1, 5), 5.0);
    }

    #[test]
    fn fully_absent_column_errors_with_name() {
        let mut bond = bond_with_column(5, &[1.0, 1.0]);
        bond.features.set(0, 5, f64::NAN);
        bond.features.set(1, 5, f64::NAN);
        let err = fill_missing(&bond).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("RMB to USD exchange rate"), "got {msg}");
    }

    #[test]
    fn standardize_matches_hand_computation() {
        let bond = bond_with_column(3, &[1.0, 2.0, 3.0]);
        let (z, stats) = standardize(&bond).unwrap();
        assert!((stats.mean[3] - 2.0).abs() < 1e-12);
        assert!((stats.std[3] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((z.features.get(0, 3) + 1.224744871391589).abs() < 1e-9);
        assert!(z.features.get(1, 3).abs() < 1e-12);
        assert!((z.features.get(2, 3) - 1.224744871391589).abs() < 1e-9);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let bond = bond_with_column(3, &[4.0, 4.0, 4.0]);
        let (z, stats) = standardize(&bond).unwrap();
        for d in 0..3 {
            assert_eq!(z.features.get(d, 3), 0.0);
        }
        assert_eq!(stats.std[3], 1.0);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_std() {
        let bond = bond_with_column(3, &[1.0, 4.0, 2.0, 8.0, 5.0, 9.0, 3.0]);
        let (z, _) = standardize(&bond).unwrap();
        let days = 7;
        for col in [3usize] {
            let mean: f64 = z.features.column(col).sum::<f64>() / days as f64;
            let var: f64 =
                z.features.column(col).map(|v| (v - mean).powi(2)).sum::<f64>() / days as f64;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    fn market(n_low: usize, n_high: usize, days: usize) -> (Vec<BondRecord>, HashMap<String, LabelSeries>) {
        let mut bonds = Vec::new();
        let mut labels = HashMap::new();
        for i in 0..n_low + n_high {
            let high = i >= n_low;
            let mut m = FeatureMatrix::absent(days);
            for d in 0..days {
                for c in 0..N_FEATURES {
                    m.set(d, c, (i * 31 + d * 7 + c) as f64 * 0.01);
                }
            }
            let id = format!("b{i:03}");
            bonds.push(BondRecord {
                bond_id: id.clone(),
                issue_date: 0,
                end_date: days - 1,
                outcome: if high { Outcome::Defaulted } else { Outcome::Matured },
                issue_grade: RatingGrade::new(19).unwrap(),
                final_grade: RatingGrade::new(if high { 2 } else { 18 }).unwrap(),
                default_date: if high { Some(days - 1) } else { None },
                industry_id: 0,
                region_id: 0,
                features: m,
                latent_grades: vec![15.0; days],
            });
            let p: Vec<f64> = (0..days).map(|d| 0.1 + 0.8 * d as f64 / days as f64).collect();
            labels.insert(
                id.clone(),
                LabelSeries { bond_id: id, p_gmm: p.clone(), p_cs: p.clone(), p_bwd: p.clone(), p_integrated: p },
            );
        }
        (bonds, labels)
    }

    #[test]
    fn window_counts_and_alignment() {
        let (bonds, labels) = market(4, 4, 10);
        let splits = split_bonds_stub(&bonds);
        let ds = make_windows(&bonds, &labels, &splits, 2).unwrap();
        // 8 bonds, 10 days each, window 2 -> 8 samples per bond.
        assert_eq!(ds.n_samples(), 8 * 8);
        assert_eq!(ds.skipped_bonds, 0);
        for i in 0..ds.n_samples() {
            let meta = &ds.meta[i];
            let series = &labels[&meta.bond_id];
            assert_eq!(f64::from(ds.labels[i]), series.p_integrated[meta.end_day + 1] as f32 as f64);
        }
    }

    fn split_bonds_stub(bonds: &[BondRecord]) -> HashMap<String, Split> {
        bonds
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let split = match i % 5 {
                    0 => Split::Val,
                    1 => Split::Test,
                    _ => Split::Train,
                };
                (b.bond_id.clone(), split)
            })
            .collect()
    }

    #[test]
    fn short_bonds_are_skipped_with_a_count() {
        let (bonds, labels) = market(2, 1, 4);
        let splits = split_bonds_stub(&bonds);
        let ds = make_windows(&bonds, &labels, &splits, 5).unwrap();
        assert_eq!(ds.n_samples(), 0);
        assert_eq!(ds.skipped_bonds, 3);
    }

    #[test]
    fn split_ratios_follow_the_80_10_10_rule() {
        let (bonds, _) = market(100, 20, 40);
        let splits = split_bonds(&bonds, 7).unwrap();
        let count = |split: Split, high: bool| {
            bonds
                .iter()
                .filter(|b| b.outcome.is_high_risk() == high && splits[&b.bond_id] == split)
                .count()
        };
        assert_eq!(count(Split::Train, false), 80);
        assert_eq!(count(Split::Val, false), 10);
        assert_eq!(count(Split::Test, false), 10);
        assert_eq!(count(Split::Train, true), 16);
        assert_eq!(count(Split::Val, true), 2);
        assert_eq!(count(Split::Test, true), 2);
        // Determinism.
        assert_eq!(splits, split_bonds(&bonds, 7).unwrap());
        assert_ne!(splits, split_bonds(&bonds, 8).unwrap());
    }

    #[test]
    fn ten_bonds_split_eight_one_one() {
        let (bonds, _) = market(10, 3, 40);
        let splits = split_bonds(&bonds, 1).unwrap();
        let low: Vec<_> = bonds.iter().filter(|b| !b.outcome.is_high_risk()).collect();
        let train = low.iter().filter(|b| splits[&b.bond_id] == Split::Train).count();
        let val = low.iter().filter(|b| splits[&b.bond_id] == Split::Val).count();
        let test = low.iter().filter(|b| splits[&b.bond_id] == Split::Test).count();
        assert_eq!((train, val, test), (8, 1, 1));
    }

    #[test]
    fn tiny_risk_class_cannot_split() {
        let (bonds, _) = market(10, 2, 40);
        assert!(split_bonds(&bonds, 0).is_err());
    }

    #[test]
    fn smote_reaches_the_target_ratio_exactly() {
        let (bonds, labels) = market(25, 8, 20);
        let splits: HashMap<String, Split> =
            bonds.iter().map(|b| (b.bond_id.clone(), Split::Train)).collect();
        let mut ds = make_windows(&bonds, &labels, &splits, 2).unwrap();
        let minority_before = ds.meta.iter().filter(|m| m.risk_class == RiskClass::High).count();
        let majority = ds.n_samples() - minority_before;
        let added = smote_balance(&mut ds, 1.0, 5, 3).unwrap();
        assert_eq!(added, majority - minority_before);
        let minority_after = ds.meta.iter().filter(|m| m.risk_class == RiskClass::High).count();
        assert_eq!(minority_after, majority);
    }

    #[test]
    fn smote_synthetics_sit_exactly_on_parent_segments() {
        let (bonds, labels) = market(25, 8, 20);
        let splits: HashMap<String, Split> =
            bonds.iter().map(|b| (b.bond_id.clone(), Split::Train)).collect();
        let mut ds = make_windows(&bonds, &labels, &splits, 2).unwrap();
        smote_balance(&mut ds, 0.8, 5, 9).unwrap();
        let mut checked = 0;
        for i in 0..ds.n_samples() {
            let Some((ia, ib, u)) = ds.meta[i].synthetic_parents else { continue };
            assert!(ds.meta[i].synthetic);
            let a = ds.sample(ia).to_vec();
            let b = ds.sample(ib).to_vec();
            let v = ds.sample(i);
            for j in 0..v.len() {
                let expect = (f64::from(a[j]) + u * (f64::from(b[j]) - f64::from(a[j]))) as f32;
                assert_eq!(v[j].to_bits(), expect.to_bits(), "sample {i} coord {j}");
            }
            let el = (f64::from(ds.labels[ia]) + u * (f64::from(ds.labels[ib]) - f64::from(ds.labels[ia]))) as f32;
            assert_eq!(ds.labels[i].to_bits(), el.to_bits());
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn smote_never_touches_val_or_test() {
        let (bonds, labels) = market(40, 12, 20);
        let splits = split_bonds(&bonds, 5).unwrap();
        let mut ds = make_windows(&bonds, &labels, &splits, 2).unwrap();
        let before: Vec<SampleMeta> = ds
            .meta
            .iter()
            .filter(|m| m.split != Split::Train)
            .cloned()
            .collect();
        smote_balance(&mut ds, 1.0, 5, 1).unwrap();
        let after: Vec<SampleMeta> =
            ds.meta.iter().filter(|m| m.split != Split::Train).cloned().collect();
        assert_eq!(before, after);
        assert!(ds
            .meta
            .iter()
            .filter(|m| m.synthetic)
            .all(|m| m.split == Split::Train));
    }

    #[test]
    fn smote_needs_enough_minority_samples() {
        let (bonds, labels) = market(10, 1, 8);
        let splits: HashMap<String, Split> =
            bonds.iter().map(|b| (b.bond_id.clone(), Split::Train)).collect();
        let mut ds = make_windows(&bonds, &labels, &splits, 2).unwrap();
        assert!(smote_balance(&mut ds, 1.0, 30, 1).is_err());
    }

    #[test]
    fn dataset_container_round_trips() {
        let (bonds, labels) = market(12, 5, 15);
        let splits = split_bonds(&bonds, 2).unwrap();
        let mut ds = make_windows(&bonds, &labels, &splits, 3).unwrap();
        smote_balance(&mut ds, 0.5, 3, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.bin");
        save_dataset(&path, &ds, 42, "hashhash").unwrap();
        let (back, seed, hash) = load_dataset(&path).unwrap();
        assert_eq!(ds, back);
        assert_eq!(seed, 42);
        assert_eq!(hash, "hashhash");
    }
}
