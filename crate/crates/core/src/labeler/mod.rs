//! Daily default-probability annotation.
//!
//! Three estimators run per bond: cluster-grade mapping from a variational
//! Gaussian mixture, credit-spread inversion under a market equilibrium
//! condition, and an outcome-backward trend anchored at the bond's known
//! terminal state. A fixed-weight average integrates them into the daily
//! label, and the previous day's label is written into the prior-probability
//! feature column.

mod vbgmm;

pub use vbgmm::{fit_vb_gmm, gmm_probability, GmmModel, VbGmmOptions};

use crate::error::{CoreError, Result};
use crate::pipeline::{fill_missing, standardize};
use crate::schema::{
    grade_to_probability, BondRecord, LabelSeries, Outcome, RatingGrade, COL_PRIOR_DEFAULT_PROB,
    COL_TREASURY_RATE, COL_YIELD_TO_MATURITY, N_CLUSTER_FEATURES,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Credit-spread estimator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadParams {
    /// Default loss rate (one minus the recovery rate).
    pub loss_rate: f64,
    pub floor: f64,
    pub cap: f64,
    /// Trailing moving-average window over the raw spread, in trading days.
    pub ma_window: usize,
}

impl Default for SpreadParams {
    fn default() -> Self {
        Self { loss_rate: 0.70, floor: 0.05, cap: 1.0, ma_window: 5 }
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.floor > 0.0 && self.floor < self.cap && self.cap <= 1.0) {
            return Err(CoreError::Config(format!(
                "spread clamp must satisfy 0 < floor < cap <= 1, got [{}, {}]",
                self.floor, self.cap
            )));
        }
        if self.ma_window == 0 {
            return Err(CoreError::Config("moving-average window must be >= 1".into()));
        }
        if self.loss_rate <= 0.0 {
            return Err(CoreError::Config("loss rate must be positive".into()));
        }
        Ok(())
    }
}

/// Backward-trend parameters for defaulted bonds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackwardParams {
    /// Estimated length of the default-risk acceleration phase, trading days.
    pub accel_horizon: u32,
}

impl Default for BackwardParams {
    fn default() -> Self {
        Self { accel_horizon: 120 }
    }
}

impl BackwardParams {
    pub fn validate(&self) -> Result<()> {
        if self.accel_horizon == 0 {
            return Err(CoreError::Config("acceleration horizon must be positive".into()));
        }
        Ok(())
    }
}

/// Weights of the three estimators in the integrated label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombineWeights {
    pub gmm: f64,
    pub cs: f64,
    pub bwd: f64,
    /// Prior default probability written to the first day's feature row.
    pub prior_init: f64,
}

impl Default for CombineWeights {
    fn default() -> Self {
        Self { gmm: 0.3, cs: 0.3, bwd: 0.4, prior_init: 0.5 }
    }
}

impl CombineWeights {
    pub fn validate(&self) -> Result<()> {
        if self.gmm < 0.0 || self.cs < 0.0 || self.bwd < 0.0 {
            return Err(CoreError::Config("combination weights must be non-negative".into()));
        }
        if self.gmm + self.cs + self.bwd != 1.0 {
            return Err(CoreError::Config(format!(
                "combination weights must sum to 1 exactly, got {}",
                self.gmm + self.cs + self.bwd
            )));
        }
        if !(0.0..=1.0).contains(&self.prior_init) {
            return Err(CoreError::Config("prior initialization must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Closed-form spread inversion before clamping: the probability that makes
/// the expected return of the risky bond equal the risk-free rate.
pub fn spread_probability_unclamped(cs: f64, bond_yield: f64, loss_rate: f64) -> Result<f64> {
    let denom = bond_yield + loss_rate;
    if denom <= 0.0 {
        return Err(CoreError::Numerical(format!(
            "bond yield {bond_yield} makes the spread denominator non-positive"
        )));
    }
    Ok(cs / denom)
}

/// Credit-spread default probability series.
///
/// Computes the spread against the risk-free series, smooths it with a
/// trailing moving average, divides by yield plus loss rate and clamps the
/// result into `[floor, cap]`.
pub fn spread_probability(
    yields: &[f64],
    riskfree: &[f64],
    params: &SpreadParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    if yields.len() != riskfree.len() {
        return Err(CoreError::Shape(format!(
            "yield series has {} days, risk-free has {}",
            yields.len(),
            riskfree.len()
        )));
    }
    let cs: Vec<f64> = yields.iter().zip(riskfree).map(|(b, f)| b - f).collect();
    let mut out = Vec::with_capacity(cs.len());
    let mut running = 0.0;
    for t in 0..cs.len() {
        running += cs[t];
        if t >= params.ma_window {
            running -= cs[t - params.ma_window];
        }
        let window_len = (t + 1).min(params.ma_window) as f64;
        let smoothed = running / window_len;
        let raw = spread_probability_unclamped(smoothed, yields[t], params.loss_rate)?;
        let clamped = if raw >= params.cap {
            params.cap
        } else if raw < params.floor {
            params.floor
        } else {
            raw
        };
        out.push(clamped);
    }
    Ok(out)
}

/// Backward default probability of a defaulted bond at `day`, where both
/// days are indexes on the same axis and `day` must not pass the default.
pub fn backward_defaulted(default_date: usize, day: usize, params: &BackwardParams) -> Result<f64> {
    params.validate()?;
    if day > default_date {
        return Err(CoreError::Domain(format!(
            "day {day} is after the default date {default_date}"
        )));
    }
    let n = f64::from(params.accel_horizon);
    let t_i = (default_date - day) as f64;
    Ok(n / (n + t_i))
}

/// Backward default probability of a matured (or still active low-rated)
/// bond: linear interpolation between the issue-grade and final-grade
/// probabilities over the bond's life.
pub fn backward_matured(
    issue_grade: RatingGrade,
    final_grade: RatingGrade,
    elapsed: usize,
    total: usize,
) -> Result<f64> {
    if total == 0 {
        return Err(CoreError::Domain("interpolation span must be positive".into()));
    }
    if elapsed > total {
        return Err(CoreError::Domain(format!(
            "elapsed {elapsed} exceeds the total span {total}"
        )));
    }
    let p0 = grade_to_probability(issue_grade);
    let p_t = grade_to_probability(final_grade);
    Ok(elapsed as f64 * (p_t - p0) / total as f64 + p0)
}

/// Annotates one bond with all three estimators and the integrated label,
/// and writes the previous day's integrated label into the
/// prior-default-probability feature column (0.5 on the first day).
///
/// The spread path reads the raw filled yields; the mixture path reads the
/// bond's standardized rows with the prior column excluded.
pub fn annotate(
    bond: &mut BondRecord,
    gmm: &GmmModel,
    spread: &SpreadParams,
    backward: &BackwardParams,
    weights: &CombineWeights,
) -> Result<LabelSeries> {
    weights.validate()?;
    backward.validate()?;
    let filled = fill_missing(bond)?;
    let (standardized, _) = standardize(&filled)?;
    let days = filled.features.days();

    let mut p_gmm = Vec::with_capacity(days);
    let mut row = vec![0.0; N_CLUSTER_FEATURES];
    for d in 0..days {
        row.copy_from_slice(&standardized.features.row(d)[..N_CLUSTER_FEATURES]);
        p_gmm.push(gmm_probability(gmm, &row));
    }

    let yields: Vec<f64> = filled.features.column(COL_YIELD_TO_MATURITY).collect();
    let riskfree: Vec<f64> = filled.features.column(COL_TREASURY_RATE).collect();
    let p_cs = spread_probability(&yields, &riskfree, spread)?;

    let mut p_bwd = Vec::with_capacity(days);
    match bond.outcome {
        Outcome::Defaulted => {
            let dd = bond.default_date.expect("validated defaulted bond") - bond.issue_date;
            for d in 0..days {
                // Saturated at 1 past the default date.
                let p = if d <= dd { backward_defaulted(dd, d, backward)? } else { 1.0 };
                p_bwd.push(p);
            }
        }
        Outcome::Matured | Outcome::LowRatedActive => {
            let span = days - 1;
            for d in 0..days {
                let p = if span == 0 {
                    grade_to_probability(bond.final_grade)
                } else {
                    backward_matured(bond.issue_grade, bond.final_grade, d, span)?
                };
                p_bwd.push(p);
            }
        }
    }

    let p_integrated: Vec<f64> = (0..days)
        .map(|d| weights.gmm * p_gmm[d] + weights.cs * p_cs[d] + weights.bwd * p_bwd[d])
        .collect();

    bond.features.set(0, COL_PRIOR_DEFAULT_PROB, weights.prior_init);
    for d in 1..days {
        bond.features.set(d, COL_PRIOR_DEFAULT_PROB, p_integrated[d - 1]);
    }

    let series = LabelSeries {
        bond_id: bond.bond_id.clone(),
        p_gmm,
        p_cs,
        p_bwd,
        p_integrated,
    };
    series.validate()?;
    Ok(series)
}

/// Full labeling configuration with the documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelerConfig {
    pub gmm: VbGmmOptions,
    pub spread: SpreadParams,
    pub backward: BackwardParams,
    pub weights: CombineWeights,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        Self {
            gmm: VbGmmOptions::default(),
            spread: SpreadParams::default(),
            backward: BackwardParams::default(),
            weights: CombineWeights::default(),
        }
    }
}

/// Fits the mixture on every bond-day row of the market (standardized,
/// prior column excluded) and annotates all bonds. Bonds are annotated in
/// parallel against the shared read-only model; output order follows input
/// order, so results are deterministic.
pub fn annotate_market(
    bonds: &mut [BondRecord],
    config: &LabelerConfig,
) -> Result<(GmmModel, Vec<LabelSeries>)> {
    config.spread.validate()?;
    config.backward.validate()?;
    config.weights.validate()?;

    let mut rows: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for bond in bonds.iter() {
        let filled = fill_missing(bond)?;
        let (standardized, _) = standardize(&filled)?;
        for d in 0..standardized.features.days() {
            rows.extend_from_slice(&standardized.features.row(d)[..N_CLUSTER_FEATURES]);
            n += 1;
        }
    }
    let mut gmm_opts = config.gmm.clone();
    // The clustering input drops the prior column, so the spread coordinate
    // is the last column of the 52-wide view.
    gmm_opts.spread_col = crate::schema::COL_RISK_SPREAD;
    let model = fit_vb_gmm(&rows, n, N_CLUSTER_FEATURES, &gmm_opts)?;

    let series: Result<Vec<LabelSeries>> = bonds
        .par_iter_mut()
        .map(|bond| annotate(bond, &model, &config.spread, &config.backward, &config.weights))
        .collect();
    Ok((model, series?))
}

/// Writes label series as CSV rows of (bond_id, day, p_gmm, p_cs, p_bwd,
/// p_integrated), with `day` local to each bond.
pub fn write_labels_csv(path: &std::path::Path, series: &[LabelSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bond_id", "day", "p_gmm", "p_cs", "p_bwd", "p_integrated"])?;
    for s in series {
        for d in 0..s.len() {
            w.write_record([
                s.bond_id.clone(),
                d.to_string(),
                format!("{}", s.p_gmm[d]),
                format!("{}", s.p_cs[d]),
                format!("{}", s.p_bwd[d]),
                format!("{}", s.p_integrated[d]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_csv(path: &std::path::Path) -> Result<Vec<LabelSeries>> {
    if !path.exists() {
        return Err(CoreError::MissingInput(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut out: Vec<LabelSeries> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let bond_id = rec[0].to_string();
        if out.last().map(|s| s.bond_id.as_str()) != Some(bond_id.as_str()) {
            out.push(LabelSeries {
                bond_id: bond_id.clone(),
                p_gmm: Vec::new(),
                p_cs: Vec::new(),
                p_bwd: Vec::new(),
                p_integrated: Vec::new(),
            });
        }
        let series = out.last_mut().unwrap();
        let parse = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| {
                CoreError::Domain(format!("labels for {bond_id}: bad float {:?}", &rec[i]))
            })
        };
        series.p_gmm.push(parse(2)?);
        series.p_cs.push(parse(3)?);
        series.p_bwd.push(parse(4)?);
        series.p_integrated.push(parse(5)?);
    }
    Ok(out)
}
