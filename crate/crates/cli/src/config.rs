//! Run configuration: a flat JSON document whose values individual flags
//! override. Every stage embeds the resolved configuration in its manifest.

use bondrisk_core::labeler::{BackwardParams, CombineWeights, LabelerConfig, SpreadParams, VbGmmOptions};
use bondrisk_core::models::{ArchitectureConfig, GbrtParams, Variant};
use bondrisk_core::nn::optim::RmsPropConfig;
use bondrisk_core::synthgen::MarketConfig;
use bondrisk_core::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Global seed; every stage derives its randomness from it.
    pub seed: u64,
    pub n_bonds: usize,
    pub default_fraction: f64,
    pub min_life: usize,
    pub max_life: usize,
    pub stress_onset_days: usize,

    pub clusters: usize,
    pub gmm_max_iter: usize,
    pub omega: usize,
    pub loss_rate: f64,
    pub spread_floor: f64,
    pub spread_cap: f64,
    pub n_accel: u32,
    pub weights: [f64; 3],
    pub prior_init: f64,

    pub window: usize,
    pub windows: Vec<usize>,
    pub smote_ratio: f64,
    pub k_neighbors: usize,

    pub variant: String,
    pub hidden: usize,
    pub conv_channels: usize,
    pub conv_kernel: usize,
    pub depth: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub boost_rounds: usize,
    pub boost_depth: usize,
    pub boost_shrinkage: f64,

    pub eval_seeds: Vec<u64>,
    pub warning_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_bonds: 200,
            default_fraction: 0.10,
            min_life: 80,
            max_life: 140,
            stress_onset_days: 120,
            clusters: 22,
            gmm_max_iter: 200,
            omega: 5,
            loss_rate: 0.70,
            spread_floor: 0.05,
            spread_cap: 1.0,
            n_accel: 120,
            weights: [0.3, 0.3, 0.4],
            prior_init: 0.5,
            window: 2,
            windows: vec![2, 5, 7, 10],
            smote_ratio: 1.0,
            k_neighbors: 5,
            variant: "ours".into(),
            hidden: 32,
            conv_channels: 8,
            conv_kernel: 3,
            depth: 10,
            epochs: 50,
            batch_size: 2,
            patience: 10,
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-7,
            boost_rounds: 200,
            boost_depth: 3,
            boost_shrinkage: 0.1,
            eval_seeds: vec![0, 1, 2, 3, 4],
            warning_threshold: 0.5,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(CoreError::MissingInput(path.display().to_string()));
        }
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CoreError::Config(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = self.market_config().validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.labeler_config().and_then(|c| {
            c.spread.validate()?;
            c.backward.validate()?;
            c.weights.validate()
        }) {
            problems.push(e.to_string());
        }
        if self.window == 0 || self.windows.is_empty() {
            problems.push("window sizes must be positive and non-empty".into());
        }
        if self.smote_ratio <= 0.0 {
            problems.push("smote_ratio must be positive".into());
        }
        if let Err(e) = self.architecture(None, None, None).and_then(|a| a.validate()) {
            problems.push(e.to_string());
        }
        if self.eval_seeds.is_empty() {
            problems.push("eval_seeds must be non-empty".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Config(problems.join("; ")))
        }
    }

    pub fn market_config(&self) -> MarketConfig {
        MarketConfig {
            n_bonds: self.n_bonds,
            default_fraction: self.default_fraction,
            min_life: self.min_life,
            max_life: self.max_life,
            seed: self.seed,
            stress_onset_days: self.stress_onset_days,
        }
    }

    pub fn labeler_config(&self) -> Result<LabelerConfig> {
        Ok(LabelerConfig {
            gmm: VbGmmOptions {
                n_components: self.clusters,
                max_iter: self.gmm_max_iter,
                seed: self.seed,
                ..VbGmmOptions::default()
            },
            spread: SpreadParams {
                loss_rate: self.loss_rate,
                floor: self.spread_floor,
                cap: self.spread_cap,
                ma_window: self.omega,
            },
            backward: BackwardParams { accel_horizon: self.n_accel },
            weights: CombineWeights {
                gmm: self.weights[0],
                cs: self.weights[1],
                bwd: self.weights[2],
                prior_init: self.prior_init,
            },
        })
    }

    pub fn architecture(
        &self,
        variant: Option<Variant>,
        window: Option<usize>,
        seed: Option<u64>,
    ) -> Result<ArchitectureConfig> {
        let variant = match variant {
            Some(v) => v,
            None => self.variant.parse()?,
        };
        let mut arch = ArchitectureConfig {
            variant,
            window: window.unwrap_or(self.window),
            hidden: self.hidden,
            conv_channels: self.conv_channels,
            conv_kernel: self.conv_kernel,
            depth: self.depth,
            epochs: self.epochs,
            batch_size: self.batch_size,
            patience: self.patience,
            seed: seed.unwrap_or(self.seed),
            optimizer: RmsPropConfig {
                learning_rate: self.learning_rate,
                rho: self.rho,
                epsilon: self.epsilon,
            },
            boosting: GbrtParams {
                rounds: self.boost_rounds,
                max_depth: self.boost_depth,
                shrinkage: self.boost_shrinkage,
                min_leaf: 1,
            },
            ..ArchitectureConfig::default()
        };
        if self.depth != arch.dropout_schedule.len() {
            // Stretch the documented schedule pattern onto other depths:
            // first third at 0.5, last layer 0.125, the rest 0.25.
            arch.dropout_schedule = (0..self.depth)
                .map(|i| {
                    if i + 1 == self.depth {
                        0.125
                    } else if i < self.depth.div_ceil(3).min(3) {
                        0.5
                    } else {
                        0.25
                    }
                })
                .collect();
        }
        Ok(arch)
    }
}
