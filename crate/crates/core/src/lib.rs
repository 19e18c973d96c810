//! Credit-bond default-risk engine.
//!
//! The crate covers the full experiment chain for day-by-day default
//! probability forecasting on a synthetic credit-bond market:
//!
//! - [`schema`]: bond data model, the 53-feature index registry, and the
//!   22-grade rating scale with its logistic probability map.
//! - [`synthgen`]: seeded generator for a desk-scale bond market with
//!   correlated daily features and known ground-truth distress paths.
//! - [`labeler`]: three default-probability estimators (variational Bayes
//!   Gaussian mixture, credit-spread inversion, outcome-backward trend) and
//!   their weighted integration into daily labels.
//! - [`pipeline`]: missing-value fill, per-bond standardization, sliding
//!   windows, bond-level 8:1:1 splits, and SMOTE balancing of the train set.
//! - [`nn`]: a small dependency-free neural engine (1-D ConvLSTM, stacked
//!   LSTM, dropout, dense, MSE, RMSProp) with hand-derived backward passes.
//! - [`models`]: the forecaster architecture, four baselines, and the
//!   training loop with checkpointing.
//! - [`eval`]: RMSE/MAE, the variant-by-window comparison grid, and the
//!   rating-comparison analysis with early-warning lead times.

pub mod container;
pub mod error;
pub mod eval;
pub mod labeler;
pub mod manifest;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod schema;
pub mod synthgen;

pub use error::{CoreError, Result};
pub use schema::{
    build_default_registry, grade_to_probability, BondRecord, FeatureRegistry, LabelSeries,
    Outcome, RatingGrade,
};
