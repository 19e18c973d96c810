//! Variational Bayes fitting of a diagonal-covariance Gaussian mixture.
//!
//! Conjugate model: symmetric Dirichlet prior on the mixing weights and an
//! independent Normal-Gamma prior per component and dimension, centered on
//! the pooled data mean and variance. Coordinate ascent alternates between
//! responsibilities (E-step) and posterior parameter updates (M-step); the
//! evidence lower bound is computed after every E-step and must never
//! decrease.

use crate::error::{CoreError, Result};
use crate::schema::{grade_to_probability, RatingGrade, N_GRADES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VbGmmOptions {
    /// Number of mixture components; at most the number of rating grades.
    pub n_components: usize,
    pub max_iter: usize,
    /// Stop once the evidence lower bound improves by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Lower bound on the expected variance of any component dimension.
    pub variance_floor: f64,
    /// Column whose posterior mean orders components into grades
    /// (the standardized risk-spread coordinate in labeling use).
    pub spread_col: usize,
}

impl Default for VbGmmOptions {
    fn default() -> Self {
        Self {
            n_components: 22,
            max_iter: 200,
            tol: 1e-6,
            seed: 0,
            variance_floor: 1e-6,
            spread_col: crate::schema::COL_RISK_SPREAD,
        }
    }
}

/// Fitted variational posterior over a Gaussian mixture, with the
/// component-to-grade assignment used for probability mapping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmModel {
    pub n_features: usize,
    /// Posterior expected mixing weights, a simplex vector.
    pub weights: Vec<f64>,
    /// Posterior mean vectors, one per component.
    pub means: Vec<Vec<f64>>,
    /// Posterior expected variances per component and dimension.
    pub variances: Vec<Vec<f64>>,
    // Variational posterior parameters.
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma_shape: Vec<f64>,
    gamma_rate: Vec<Vec<f64>>,
    /// Grade assigned to each component; grade 1 is the riskiest.
    pub grade_order: Vec<RatingGrade>,
    pub elbo_trace: Vec<f64>,
    pub converged: bool,
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// Posterior responsibilities of one observation, summing to 1.
    pub fn responsibilities(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.n_features, "observation width mismatch");
        let k = self.n_components();
        let alpha_sum: f64 = self.alpha.iter().sum();
        let mut ln_rho = vec![0.0; k];
        for c in 0..k {
            ln_rho[c] = self.ln_rho(row, c, alpha_sum);
        }
        let max = ln_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in ln_rho.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in ln_rho.iter_mut() {
            *v /= sum;
        }
        ln_rho
    }

    fn ln_rho(&self, row: &[f64], c: usize, alpha_sum: f64) -> f64 {
        let d = self.n_features;
        let e_ln_pi = digamma(self.alpha[c]) - digamma(alpha_sum);
        let shape = self.gamma_shape[c];
        let mut acc = 0.0;
        for j in 0..d {
            let rate = self.gamma_rate[c][j];
            let e_ln_lambda = digamma(shape) - rate.ln();
            let diff = row[j] - self.means[c][j];
            acc += e_ln_lambda - LN_2PI - (shape / rate) * diff * diff - 1.0 / self.beta[c];
        }
        e_ln_pi + 0.5 * acc
    }
}

/// Assigns an observation to its argmax-responsibility component and maps
/// that component's grade through the logistic grade curve. Responsibility
/// ties resolve toward the riskier (lower) grade.
pub fn gmm_probability(model: &GmmModel, row: &[f64]) -> f64 {
    let resp = model.responsibilities(row);
    let mut best = 0usize;
    for c in 1..resp.len() {
        let better = resp[c] > resp[best]
            || (resp[c] == resp[best] && model.grade_order[c] < model.grade_order[best]);
        if better {
            best = c;
        }
    }
    grade_to_probability(model.grade_order[best])
}

/// Fits the mixture on `n` observations of width `d`, stored row-major.
pub fn fit_vb_gmm(data: &[f64], n: usize, d: usize, opts: &VbGmmOptions) -> Result<GmmModel> {
    let k = opts.n_components;
    if k == 0 || k > usize::from(N_GRADES) {
        return Err(CoreError::Config(format!(
            "n_components must be in [1, {N_GRADES}], got {k}"
        )));
    }
    if n < k {
        return Err(CoreError::Config(format!(
            "need at least {k} observations to fit {k} components, got {n}"
        )));
    }
    if data.len() != n * d {
        return Err(CoreError::Shape(format!(
            "data length {} does not match {n} x {d}",
            data.len()
        )));
    }
    if opts.spread_col >= d {
        return Err(CoreError::Config(format!(
            "spread column {} out of range for {d} features",
            opts.spread_col
        )));
    }

    // Priors: weakest-information defaults centered on the pooled data.
    let alpha0 = 1.0 / k as f64;
    let beta0 = 1.0;
    let a0 = 1.0;
    let mut m0 = vec![0.0; d];
    for row in 0..n {
        for j in 0..d {
            m0[j] += data[row * d + j];
        }
    }
    for v in m0.iter_mut() {
        *v /= n as f64;
    }
    let mut b0 = vec![0.0; d];
    for row in 0..n {
        for j in 0..d {
            let diff = data[row * d + j] - m0[j];
            b0[j] += diff * diff;
        }
    }
    for v in b0.iter_mut() {
        *v = (*v / n as f64).max(opts.variance_floor) * a0;
    }

    let mut state = Posterior {
        alpha: vec![alpha0; k],
        beta: vec![beta0; k],
        m: vec![m0.clone(); k],
        a: vec![a0; k],
        b: vec![b0.clone(); k],
    };

    // Seeded k-means++ style initialization: hard-assign to spread centers,
    // then take one M-step before the first E-step.
    let centers = init_centers(data, n, d, k, opts.seed);
    let mut resp = vec![0.0; n * k];
    for row in 0..n {
        let x = &data[row * d..(row + 1) * d];
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let dist: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        resp[row * k + best] = 1.0;
    }
    m_step(data, n, d, k, &resp, alpha0, beta0, &m0, a0, &b0, opts.variance_floor, &mut state);

    let mut elbo_trace = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let sum_lse = e_step(data, n, d, k, &state, &mut resp);
        let elbo = sum_lse - kl_terms(&state, alpha0, beta0, &m0, a0, &b0, k, d);
        if let Some(prev) = elbo_trace.last() {
            if elbo - prev < opts.tol {
                elbo_trace.push(elbo);
                converged = true;
                break;
            }
        }
        elbo_trace.push(elbo);
        m_step(data, n, d, k, &resp, alpha0, beta0, &m0, a0, &b0, opts.variance_floor, &mut state);
    }

    let alpha_sum: f64 = state.alpha.iter().sum();
    let weights: Vec<f64> = state.alpha.iter().map(|a| a / alpha_sum).collect();
    let variances: Vec<Vec<f64>> = (0..k)
        .map(|c| state.b[c].iter().map(|b| b / state.a[c]).collect())
        .collect();

    // Riskiest component (highest spread coordinate) takes grade 1.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| {
        state.m[y][opts.spread_col]
            .partial_cmp(&state.m[x][opts.spread_col])
            .unwrap()
            .then(x.cmp(&y))
    });
    let mut grade_order = vec![RatingGrade::new(1).unwrap(); k];
    for (rank, &comp) in order.iter().enumerate() {
        grade_order[comp] = RatingGrade::new((rank + 1) as u8)?;
    }

    Ok(GmmModel {
        n_features: d,
        weights,
        means: state.m,
        variances,
        alpha: state.alpha,
        beta: state.beta,
        gamma_shape: state.a,
        gamma_rate: state.b,
        grade_order,
        elbo_trace,
        converged,
    })
}

struct Posterior {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    m: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<Vec<f64>>,
}

fn init_centers(data: &[f64], n: usize, d: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centers.push(data[first * d..(first + 1) * d].to_vec());
    let mut dist2 = vec![f64::INFINITY; n];
    while centers.len() < k {
        let latest = centers.last().unwrap();
        let mut total = 0.0;
        for row in 0..n {
            let x = &data[row * d..(row + 1) * d];
            let dd: f64 = x.iter().zip(latest).map(|(a, b)| (a - b) * (a - b)).sum();
            if dd < dist2[row] {
                dist2[row] = dd;
            }
            total += dist2[row];
        }
        let pick = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (row, &w) in dist2.iter().enumerate() {
                if target < w {
                    chosen = row;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.push(data[pick * d..(pick + 1) * d].to_vec());
    }
    centers
}

/// Computes responsibilities in place; returns the sum of per-row
/// log-sum-exp terms used by the evidence lower bound.
fn e_step(data: &[f64], n: usize, d: usize, k: usize, state: &Posterior, resp: &mut [f64]) -> f64 {
    let alpha_sum: f64 = state.alpha.iter().sum();
    let dig_alpha_sum = digamma(alpha_sum);
    // Per-component constants of the log-density.
    let mut constants = vec![0.0; k];
    let mut prec = vec![0.0; k * d];
    for c in 0..k {
        let mut acc = digamma(state.alpha[c]) - dig_alpha_sum;
        let dig_a = digamma(state.a[c]);
        for j in 0..d {
            let rate = state.b[c][j];
            acc += 0.5 * (dig_a - rate.ln() - LN_2PI - 1.0 / state.beta[c]);
            prec[c * d + j] = state.a[c] / rate;
        }
        constants[c] = acc;
    }

    let mut sum_lse = 0.0;
    let mut ln_rho = vec![0.0; k];
    for row in 0..n {
        let x = &data[row * d..(row + 1) * d];
        for c in 0..k {
            let mut quad = 0.0;
            let m = &state.m[c];
            let p = &prec[c * d..(c + 1) * d];
            for j in 0..d {
                let diff = x[j] - m[j];
                quad += p[j] * diff * diff;
            }
            ln_rho[c] = constants[c] - 0.5 * quad;
        }
        let max = ln_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in ln_rho.iter() {
            sum += (v - max).exp();
        }
        let lse = max + sum.ln();
        sum_lse += lse;
        for (c, v) in ln_rho.iter().enumerate() {
            resp[row * k + c] = (v - lse).exp();
        }
    }
    sum_lse
}

#[allow(clippy::too_many_arguments)]
fn m_step(
    data: &[f64],
    n: usize,
    d: usize,
    k: usize,
    resp: &[f64],
    alpha0: f64,
    beta0: f64,
    m0: &[f64],
    a0: f64,
    b0: &[f64],
    variance_floor: f64,
    state: &mut Posterior,
) {
    let mut nk = vec![0.0; k];
    let mut xbar = vec![0.0; k * d];
    for row in 0..n {
        let x = &data[row * d..(row + 1) * d];
        for c in 0..k {
            let r = resp[row * k + c];
            if r == 0.0 {
                continue;
            }
            nk[c] += r;
            for j in 0..d {
                xbar[c * d + j] += r * x[j];
            }
        }
    }
    for c in 0..k {
        let denom = nk[c].max(1e-300);
        for j in 0..d {
            xbar[c * d + j] /= denom;
        }
    }
    let mut s = vec![0.0; k * d];
    for row in 0..n {
        let x = &data[row * d..(row + 1) * d];
        for c in 0..k {
            let r = resp[row * k + c];
            if r == 0.0 {
                continue;
            }
            for j in 0..d {
                let diff = x[j] - xbar[c * d + j];
                s[c * d + j] += r * diff * diff;
            }
        }
    }
    for c in 0..k {
        state.alpha[c] = alpha0 + nk[c];
        state.beta[c] = beta0 + nk[c];
        state.a[c] = a0 + 0.5 * nk[c];
        let shrink = beta0 * nk[c] / (beta0 + nk[c]);
        for j in 0..d {
            let xb = xbar[c * d + j];
            state.m[c][j] = (beta0 * m0[j] + nk[c] * xb) / state.beta[c];
            let centered = xb - m0[j];
            let b = b0[j] + 0.5 * (s[c * d + j] + shrink * centered * centered);
            state.b[c][j] = b.max(variance_floor * state.a[c]);
        }
    }
}

fn kl_terms(
    state: &Posterior,
    alpha0: f64,
    beta0: f64,
    m0: &[f64],
    a0: f64,
    b0: &[f64],
    k: usize,
    d: usize,
) -> f64 {
    // Dirichlet KL.
    let alpha_sum: f64 = state.alpha.iter().sum();
    let dig_sum = digamma(alpha_sum);
    let mut kl = ln_gamma(alpha_sum) - ln_gamma(k as f64 * alpha0);
    for c in 0..k {
        kl += -ln_gamma(state.alpha[c])
            + ln_gamma(alpha0)
            + (state.alpha[c] - alpha0) * (digamma(state.alpha[c]) - dig_sum);
    }
    // Normal-Gamma KL per component and dimension.
    for c in 0..k {
        let beta = state.beta[c];
        let a = state.a[c];
        let dig_a = digamma(a);
        for j in 0..d {
            let b = state.b[c][j];
            let mean_diff = state.m[c][j] - m0[j];
            kl += 0.5 * ((beta / beta0).ln() + beta0 / beta - 1.0 + beta0 * (a / b) * mean_diff * mean_diff);
            kl += (a - a0) * dig_a - ln_gamma(a) + ln_gamma(a0)
                + a0 * (b / b0[j]).ln()
                + a * (b0[j] - b) / b;
        }
    }
    kl
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(centers: &[&[f64]], per_blob: usize, noise: f64, seed: u64) -> (Vec<f64>, usize, usize) {
        let d = centers[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        for center in centers {
            for _ in 0..per_blob {
                for j in 0..d {
                    let eps: f64 = rng.gen_range(-1.0..1.0);
                    data.push(center[j] + noise * eps);
                }
            }
        }
        (data, centers.len() * per_blob, d)
    }

    fn blob_opts(k: usize, seed: u64) -> VbGmmOptions {
        VbGmmOptions { n_components: k, seed, spread_col: 0, ..VbGmmOptions::default() }
    }

    #[test]
    fn two_separated_blobs_get_one_hot_responsibilities() {
        // Blob half-width 1.0 with centers 20 apart along each axis.
        let (data, n, d) = blobs(&[&[0.0, 0.0, 0.0], &[20.0, 20.0, 20.0]], 60, 1.0, 1);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(2, 9)).unwrap();
        for row in 0..n {
            let resp = model.responsibilities(&data[row * d..(row + 1) * d]);
            let max = resp.iter().cloned().fold(0.0, f64::max);
            assert!(max >= 0.999, "row {row} responsibilities not one-hot: {resp:?}");
        }
    }

    #[test]
    fn three_blobs_assign_with_full_accuracy() {
        let (data, n, d) = blobs(&[&[0.0, 0.0], &[30.0, 0.0], &[0.0, 30.0]], 50, 1.0, 3);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(3, 4)).unwrap();
        // Points of a blob must share a component, distinct across blobs.
        let assign: Vec<usize> = (0..n)
            .map(|row| {
                let r = model.responsibilities(&data[row * d..(row + 1) * d]);
                (0..3).max_by(|&a, &b| r[a].partial_cmp(&r[b]).unwrap()).unwrap()
            })
            .collect();
        for blob in 0..3 {
            let first = assign[blob * 50];
            for i in 0..50 {
                assert_eq!(assign[blob * 50 + i], first, "blob {blob} split across components");
            }
        }
        assert_eq!(assign.iter().collect::<std::collections::HashSet<_>>().len(), 3);
    }

    #[test]
    fn elbo_is_non_decreasing() {
        let (data, n, d) = blobs(&[&[0.0, 1.0], &[4.0, -2.0], &[-3.0, 2.0]], 40, 2.0, 7);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(5, 11)).unwrap();
        for pair in model.elbo_trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-8,
                "ELBO decreased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
        assert!(model.elbo_trace.len() >= 2);
    }

    #[test]
    fn responsibilities_sum_to_one() {
        let (data, n, d) = blobs(&[&[0.0], &[2.0]], 100, 1.5, 2);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(4, 5)).unwrap();
        for row in 0..n {
            let r = model.responsibilities(&data[row * d..(row + 1) * d]);
            let sum: f64 = r.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_row_collapses_spare_component() {
        let n = 1000;
        let data: Vec<f64> = (0..n).flat_map(|_| [1.5, -0.5]).collect();
        let model = fit_vb_gmm(&data, n, 2, &blob_opts(2, 3)).unwrap();
        let min = model.weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = model.weights.iter().cloned().fold(0.0, f64::max);
        assert!(min < 1e-3, "spare component kept weight {min}");
        assert!(max > 0.99);
    }

    #[test]
    fn grade_order_follows_spread_coordinate() {
        // Three blobs with distinct spread-coordinate levels; riskiest
        // (highest spread) must take grade 1.
        let (data, n, d) = blobs(&[&[5.0, 0.0], &[0.0, 0.0], &[-5.0, 0.0]], 40, 0.3, 8);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(3, 2)).unwrap();
        let mut by_grade: Vec<(u8, f64)> = model
            .grade_order
            .iter()
            .zip(&model.means)
            .map(|(g, m)| (g.value(), m[0]))
            .collect();
        by_grade.sort_by_key(|(g, _)| *g);
        assert!(by_grade[0].1 > by_grade[1].1);
        assert!(by_grade[1].1 > by_grade[2].1);
    }

    #[test]
    fn probability_at_component_mean_uses_its_grade() {
        let (data, n, d) = blobs(&[&[6.0, 1.0], &[-6.0, -1.0]], 80, 0.5, 12);
        let model = fit_vb_gmm(&data, n, d, &blob_opts(2, 7)).unwrap();
        for c in 0..2 {
            let p = gmm_probability(&model, &model.means[c].clone());
            let expected = grade_to_probability(model.grade_order[c]);
            assert!((p - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (data, n, d) = blobs(&[&[0.0, 3.0], &[3.0, 0.0]], 50, 1.0, 5);
        let a = fit_vb_gmm(&data, n, d, &blob_opts(4, 42)).unwrap();
        let b = fit_vb_gmm(&data, n, d, &blob_opts(4, 42)).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.means, b.means);
        assert_eq!(a.elbo_trace, b.elbo_trace);
    }

    #[test]
    fn rejects_bad_configurations() {
        let data = vec![0.0; 10];
        assert!(fit_vb_gmm(&data, 10, 1, &blob_opts(23, 0)).is_err());
        assert!(fit_vb_gmm(&data, 10, 1, &blob_opts(0, 0)).is_err());
        let small = vec![0.0; 2];
        assert!(fit_vb_gmm(&small, 2, 1, &blob_opts(3, 0)).is_err());
    }
}
