//! Mean squared error with the per-bond double normalization: each bond's
//! errors are averaged over its own days first, then bonds are averaged
//! with equal weight.

use super::Scalar;
use crate::error::{CoreError, Result};

pub fn mse_loss<F: Scalar>(pred_per_bond: &[Vec<F>], label_per_bond: &[Vec<F>]) -> Result<F> {
    if pred_per_bond.len() != label_per_bond.len() {
        return Err(CoreError::Shape(format!(
            "{} prediction series vs {} label series",
            pred_per_bond.len(),
            label_per_bond.len()
        )));
    }
    if pred_per_bond.is_empty() {
        return Err(CoreError::Domain("loss of an empty set is undefined".into()));
    }
    let mut total = F::ZERO;
    for (pred, label) in pred_per_bond.iter().zip(label_per_bond) {
        if pred.len() != label.len() || pred.is_empty() {
            return Err(CoreError::Shape(
                "per-bond prediction and label series must be equal-length and non-empty".into(),
            ));
        }
        let mut bond_sum = F::ZERO;
        for (p, y) in pred.iter().zip(label) {
            let e = *p - *y;
            bond_sum += e * e;
        }
        total += bond_sum / F::from_f64(pred.len() as f64);
    }
    Ok(total / F::from_f64(pred_per_bond.len() as f64))
}

/// Gradient of [`mse_loss`] with respect to the predictions.
pub fn mse_loss_grad<F: Scalar>(
    pred_per_bond: &[Vec<F>],
    label_per_bond: &[Vec<F>],
) -> Vec<Vec<F>> {
    let n = F::from_f64(pred_per_bond.len() as f64);
    pred_per_bond
        .iter()
        .zip(label_per_bond)
        .map(|(pred, label)| {
            let t = F::from_f64(pred.len() as f64);
            pred.iter()
                .zip(label)
                .map(|(p, y)| (F::ONE + F::ONE) * (*p - *y) / (n * t))
                .collect()
        })
        .collect()
}
