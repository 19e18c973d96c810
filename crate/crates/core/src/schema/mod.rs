//! Bond data model, the 53-feature index registry, and the 22-grade scale.

mod registry;
mod serialize;

pub use registry::{build_default_registry, FeatureDimension, FeatureRegistry, FeatureSpec, FillRule, NativeFrequency};
pub use serialize::{
    read_bonds_csv_dir, read_bonds_jsonl, write_bonds_csv_dir, write_bonds_jsonl,
};

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Number of feature columns per trading day.
pub const N_FEATURES: usize = 53;
/// Number of clustering features (everything except the prior-probability column).
pub const N_CLUSTER_FEATURES: usize = 52;
/// Number of rating grades. Grade 1 is the riskiest, 22 the safest.
pub const N_GRADES: u8 = 22;

// Column indexes (0-based) into a bond's feature matrix.
pub const COL_TREASURY_RATE: usize = 7;
pub const COL_INDUSTRY_CODE: usize = 9;
pub const COL_INDUSTRY_DEFAULT_RATE: usize = 10;
pub const COL_REGION_DEFAULT_RATE: usize = 11;
pub const COL_RESIDUAL_MATURITY: usize = 49;
pub const COL_YIELD_TO_MATURITY: usize = 50;
pub const COL_RISK_SPREAD: usize = 51;
pub const COL_PRIOR_DEFAULT_PROB: usize = 52;

/// One of the 22 rating grades. Higher grade means lower risk: grade 1 sits
/// at the distressed end of the scale (roughly a D rating) and grade 22 at
/// the safest end (roughly AAA+).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatingGrade(u8);

impl RatingGrade {
    pub fn new(grade: u8) -> Result<Self> {
        if (1..=N_GRADES).contains(&grade) {
            Ok(Self(grade))
        } else {
            Err(CoreError::Domain(format!(
                "rating grade must be in [1, {N_GRADES}], got {grade}"
            )))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// Calibrated affine transfer feeding the logistic map. The slope anchors
/// grade 1 at probability 0.99 and grade 22 at 0.01, and makes the curve
/// symmetric about the scale midpoint 11.5.
fn grade_transfer(grade: f64) -> f64 {
    let beta = 99f64.ln() / 10.5;
    beta * (11.5 - grade)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Maps a rating grade to a default probability via the logistic curve.
/// Strictly decreasing in the grade; grade 1 maps to 0.99, grade 22 to 0.01.
pub fn grade_to_probability(grade: RatingGrade) -> f64 {
    grade_value_to_probability(f64::from(grade.value()))
}

/// Continuous extension of [`grade_to_probability`] used for latent grade
/// paths that move between integer grades.
pub fn grade_value_to_probability(grade: f64) -> f64 {
    logistic(grade_transfer(grade))
}

/// Terminal state of a bond in the sample universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Reached maturity without defaulting.
    Matured,
    /// Materially defaulted before or at its scheduled end.
    Defaulted,
    /// Still alive but rated below A; treated as high risk.
    LowRatedActive,
}

impl Outcome {
    pub fn is_high_risk(self) -> bool {
        matches!(self, Outcome::Defaulted | Outcome::LowRatedActive)
    }
}

/// Per-bond feature matrix: `days` rows by [`N_FEATURES`] columns, row-major.
/// Absent cells are encoded as NaN in memory and as explicit nulls on disk;
/// they are resolved only by the fill stage of the pipeline.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    days: usize,
    values: Vec<f64>,
}

// Bitwise comparison so that absent markers compare equal to themselves.
impl PartialEq for FeatureMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.days == other.days
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl FeatureMatrix {
    pub fn absent(days: usize) -> Self {
        Self { days, values: vec![f64::NAN; days * N_FEATURES] }
    }

    pub fn from_values(days: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != days * N_FEATURES {
            return Err(CoreError::Shape(format!(
                "feature matrix expects {} values for {} days, got {}",
                days * N_FEATURES,
                days,
                values.len()
            )));
        }
        Ok(Self { days, values })
    }

    pub fn days(&self) -> usize {
        self.days
    }

    pub fn get(&self, day: usize, col: usize) -> f64 {
        self.values[day * N_FEATURES + col]
    }

    pub fn set(&mut self, day: usize, col: usize, value: f64) {
        self.values[day * N_FEATURES + col] = value;
    }

    /// Returns true when the cell holds the absent marker.
    pub fn is_absent(&self, day: usize, col: usize) -> bool {
        self.get(day, col).is_nan()
    }

    pub fn row(&self, day: usize) -> &[f64] {
        &self.values[day * N_FEATURES..(day + 1) * N_FEATURES]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.days).map(move |d| self.get(d, col))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One bond's static attributes plus its per-trading-day feature matrix.
///
/// `issue_date` and `end_date` are indexes on a shared market-wide trading
/// day axis; the feature matrix covers every day in `[issue_date, end_date]`.
/// `latent_grades` carries the generator's ground-truth continuous grade
/// path. It is not one of the 53 features and exists only so evaluations can
/// compare predictions against a known reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BondRecord {
    pub bond_id: String,
    pub issue_date: usize,
    pub end_date: usize,
    pub outcome: Outcome,
    pub issue_grade: RatingGrade,
    pub final_grade: RatingGrade,
    pub default_date: Option<usize>,
    pub industry_id: u16,
    pub region_id: u16,
    pub features: FeatureMatrix,
    pub latent_grades: Vec<f64>,
}

impl BondRecord {
    /// Number of trading days the bond lives, `end_date - issue_date + 1`.
    pub fn n_days(&self) -> usize {
        self.end_date - self.issue_date + 1
    }

    /// Day offset within the bond's own matrix for a global trading day.
    pub fn local_day(&self, global_day: usize) -> Option<usize> {
        if global_day >= self.issue_date && global_day <= self.end_date {
            Some(global_day - self.issue_date)
        } else {
            None
        }
    }

    /// Checks the structural invariants that every well-formed record obeys.
    pub fn validate(&self) -> Result<()> {
        if self.end_date < self.issue_date {
            return Err(CoreError::Domain(format!(
                "bond {}: end_date {} precedes issue_date {}",
                self.bond_id, self.end_date, self.issue_date
            )));
        }
        if self.features.days() != self.n_days() {
            return Err(CoreError::Shape(format!(
                "bond {}: feature matrix covers {} days but the bond lives {}",
                self.bond_id,
                self.features.days(),
                self.n_days()
            )));
        }
        if self.latent_grades.len() != self.n_days() {
            return Err(CoreError::Shape(format!(
                "bond {}: latent grade path has {} entries for {} days",
                self.bond_id,
                self.latent_grades.len(),
                self.n_days()
            )));
        }
        match (self.outcome, self.default_date) {
            (Outcome::Defaulted, Some(d)) => {
                if !(self.issue_date < d && d <= self.end_date) {
                    return Err(CoreError::Domain(format!(
                        "bond {}: default date {} outside (issue {}, end {}]",
                        self.bond_id, d, self.issue_date, self.end_date
                    )));
                }
            }
            (Outcome::Defaulted, None) => {
                return Err(CoreError::Domain(format!(
                    "bond {}: defaulted without a default date",
                    self.bond_id
                )));
            }
            (_, Some(_)) => {
                return Err(CoreError::Domain(format!(
                    "bond {}: default date present on a non-defaulted bond",
                    self.bond_id
                )));
            }
            (_, None) => {}
        }
        Ok(())
    }
}

/// Per-bond daily probabilities from each estimator plus the integrated label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSeries {
    pub bond_id: String,
    pub p_gmm: Vec<f64>,
    pub p_cs: Vec<f64>,
    pub p_bwd: Vec<f64>,
    pub p_integrated: Vec<f64>,
}

impl LabelSeries {
    pub fn len(&self) -> usize {
        self.p_integrated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_integrated.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p_integrated.len();
        if self.p_gmm.len() != n || self.p_cs.len() != n || self.p_bwd.len() != n {
            return Err(CoreError::Shape(format!(
                "label series for {} has inconsistent lengths",
                self.bond_id
            )));
        }
        for series in [&self.p_gmm, &self.p_cs, &self.p_bwd, &self.p_integrated] {
            if series.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(CoreError::Domain(format!(
                    "label series for {} leaves [0, 1]",
                    self.bond_id
                )));
            }
        }
        Ok(())
    }
}
