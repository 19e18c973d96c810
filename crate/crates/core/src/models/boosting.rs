//! Gradient-boosted regression trees on flattened window vectors.
//!
//! Squared-error boosting: each round fits a depth-limited regression tree
//! to the current residuals with exact greedy variance-reduction splits,
//! then shrinks its contribution.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GbrtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub min_leaf: usize,
}

impl Default for GbrtParams {
    fn default() -> Self {
        Self { rounds: 200, max_depth: 3, shrinkage: 0.1, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f32]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    idx = if f64::from(x[*feature]) <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GbrtModel {
    pub base: f64,
    pub shrinkage: f64,
    pub trees: Vec<Tree>,
    pub n_features: usize,
}

impl GbrtModel {
    pub fn predict(&self, x: &[f32]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features);
        let mut acc = self.base;
        for tree in &self.trees {
            acc += self.shrinkage * tree.predict(x);
        }
        acc
    }
}

struct TreeBuilder<'a> {
    data: &'a [f32],
    n_features: usize,
    residuals: &'a [f64],
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    fn build(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let mean = indices.iter().map(|&i| self.residuals[i]).sum::<f64>() / indices.len() as f64;
        if depth == 0 || indices.len() < 2 * self.min_leaf.max(1) {
            self.nodes.push(Node::Leaf { value: mean });
            return self.nodes.len() - 1;
        }
        let Some((feature, threshold)) = self.best_split(&indices) else {
            self.nodes.push(Node::Leaf { value: mean });
            return self.nodes.len() - 1;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| f64::from(self.row(i)[feature]) <= threshold);
        let placeholder = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });
        let left = self.build(left_idx, depth - 1);
        let right = self.build(right_idx, depth - 1);
        self.nodes[placeholder] = Node::Split { feature, threshold, left, right };
        placeholder
    }

    /// Exact greedy best split by squared-error reduction.
    fn best_split(&self, indices: &[usize]) -> Option<(usize, f64)> {
        let n = indices.len() as f64;
        let total: f64 = indices.iter().map(|&i| self.residuals[i]).sum();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order: Vec<usize> = indices.to_vec();
        for feature in 0..self.n_features {
            order.sort_by(|&a, &b| {
                self.row(a)[feature]
                    .partial_cmp(&self.row(b)[feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            let mut left_n = 0.0;
            for w in 0..order.len() - 1 {
                let i = order[w];
                left_sum += self.residuals[i];
                left_n += 1.0;
                let a = self.row(order[w])[feature];
                let b = self.row(order[w + 1])[feature];
                if a == b {
                    continue;
                }
                if (left_n as usize) < self.min_leaf || (indices.len() - left_n as usize) < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let right_n = n - left_n;
                // Variance reduction up to constants: sum^2/n of children.
                let gain = left_sum * left_sum / left_n + right_sum * right_sum / right_n
                    - total * total / n;
                if gain > best.map_or(1e-12, |(_, _, g)| g) {
                    let threshold = f64::from(a) + (f64::from(b) - f64::from(a)) / 2.0;
                    best = Some((feature, threshold, gain));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }
}

pub fn fit_gbrt(
    data: &[f32],
    labels: &[f32],
    n_features: usize,
    params: &GbrtParams,
) -> Result<GbrtModel> {
    if n_features == 0 || data.len() % n_features != 0 {
        return Err(CoreError::Shape("data length not a multiple of the feature width".into()));
    }
    let n = data.len() / n_features;
    if n != labels.len() || n == 0 {
        return Err(CoreError::Shape(format!("{n} rows vs {} labels", labels.len())));
    }
    let base = labels.iter().map(|v| f64::from(*v)).sum::<f64>() / n as f64;
    let mut pred = vec![base; n];
    let mut trees = Vec::with_capacity(params.rounds);
    for _ in 0..params.rounds {
        let residuals: Vec<f64> =
            (0..n).map(|i| f64::from(labels[i]) - pred[i]).collect();
        let mut builder = TreeBuilder {
            data,
            n_features,
            residuals: &residuals,
            min_leaf: params.min_leaf,
            nodes: Vec::new(),
        };
        let root = builder.build((0..n).collect(), params.max_depth);
        debug_assert_eq!(root, 0);
        let tree = Tree { nodes: builder.nodes };
        for i in 0..n {
            pred[i] += params.shrinkage * tree.predict(&data[i * n_features..(i + 1) * n_features]);
        }
        trees.push(tree);
    }
    Ok(GbrtModel { base, shrinkage: params.shrinkage, trees, n_features })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rounds_predicts_the_label_mean() {
        let data: Vec<f32> = vec![0.0, 1.0, 2.0, 3.0];
        let labels: Vec<f32> = vec![1.0, 2.0, 3.0, 6.0];
        let params = GbrtParams { rounds: 0, ..GbrtParams::default() };
        let model = fit_gbrt(&data, &labels, 1, &params).unwrap();
        for i in 0..4 {
            assert_eq!(model.predict(&data[i..=i]), 3.0);
        }
    }

    #[test]
    fn fits_a_step_function() {
        let data: Vec<f32> = (0..100).map(|i| i as f32 / 100.0).collect();
        let labels: Vec<f32> = data.iter().map(|&x| if x < 0.5 { 0.1 } else { 0.9 }).collect();
        let params = GbrtParams { rounds: 50, max_depth: 2, shrinkage: 0.3, min_leaf: 1 };
        let model = fit_gbrt(&data, &labels, 1, &params).unwrap();
        for i in 0..100 {
            let p = model.predict(&data[i..=i]);
            assert!((p - f64::from(labels[i])).abs() < 0.05, "x={i} p={p}");
        }
    }

    #[test]
    fn reduces_training_error_monotonically_in_rounds() {
        let n = 200;
        let data: Vec<f32> = (0..n * 2).map(|i| ((i * 37) % 97) as f32 / 97.0).collect();
        let labels: Vec<f32> = (0..n)
            .map(|i| {
                let a = data[i * 2];
                let b = data[i * 2 + 1];
                (a * a + 0.5 * b).sin()
            })
            .collect();
        let mse_at = |rounds: usize| -> f64 {
            let params = GbrtParams { rounds, max_depth: 3, shrinkage: 0.1, min_leaf: 1 };
            let model = fit_gbrt(&data, &labels, 2, &params).unwrap();
            (0..n)
                .map(|i| {
                    let p = model.predict(&data[i * 2..(i + 1) * 2]);
                    (p - f64::from(labels[i])).powi(2)
                })
                .sum::<f64>()
                / n as f64
        };
        let a = mse_at(5);
        let b = mse_at(40);
        let c = mse_at(150);
        assert!(b < a);
        assert!(c < b);
    }
}
