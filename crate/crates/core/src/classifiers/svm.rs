//! Hinge-loss SVMs trained by seeded stochastic subgradient descent with
//! step size 1/(lambda * t): a primal linear solver and a kernelized
//! variant with the Gaussian kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Hyperparams, Standardizer};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    pub lambda: f64,
    pub epochs: usize,
}

impl LinearSvmModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, standardized_row: &[f64]) -> f64 {
        let dot: f64 = self
            .weights
            .iter()
            .zip(standardized_row)
            .map(|(w, v)| w * v)
            .sum();
        dot + self.bias
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        let xs = self.standardizer.transform(x);
        xs.rows_iter()
            .map(|row| u8::from(self.decision(row) > 0.0))
            .collect()
    }
}

fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// Pegasos-style primal solver: per step a uniformly sampled example, weight
/// decay (1 - 1/t), and a hinge update when the margin is violated. The bias
/// stays unregularized.
pub fn fit_linear(x: &Matrix, y: &[u8], hp: &Hyperparams, seed: u64) -> LinearSvmModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let ys = signed(y);
    let n = xs.n_rows();
    let d = xs.n_cols();
    let lambda = hp.linear_svm_lambda;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let steps = hp.linear_svm_epochs * n;
    for t in 1..=steps {
        let i = rng.gen_range(0..n);
        let row = xs.row(i);
        let eta = 1.0 / (lambda * t as f64);
        let margin = ys[i] * (w.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + b);
        let decay = 1.0 - 1.0 / t as f64;
        for wv in &mut w {
            *wv *= decay;
        }
        if margin < 1.0 {
            let scale = eta * ys[i];
            for (wv, v) in w.iter_mut().zip(row) {
                *wv += scale * v;
            }
            b += scale;
        }
    }

    LinearSvmModel {
        weights: w,
        bias: b,
        standardizer,
        lambda,
        epochs: hp.linear_svm_epochs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSvmModel {
    pub standardizer: Standardizer,
    pub train_rows: usize,
    pub train_cols: usize,
    /// Standardized training set, row-major.
    pub train_data: Vec<f64>,
    /// Labels mapped to +-1.
    pub train_targets: Vec<f64>,
    /// Margin-violation counts per training point (dual-style coefficients).
    pub alphas: Vec<u64>,
    pub gamma: f64,
    pub lambda: f64,
    /// Final decision-function scale 1 / (lambda * total steps).
    pub coef_scale: f64,
}

impl RbfSvmModel {
    pub fn n_features(&self) -> usize {
        self.train_cols
    }

    fn kernel_sum(&self, row: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.train_rows {
            if self.alphas[i] == 0 {
                continue;
            }
            let t = &self.train_data[i * self.train_cols..(i + 1) * self.train_cols];
            let mut d2 = 0.0;
            for (a, b) in row.iter().zip(t) {
                let c = a - b;
                d2 += c * c;
            }
            s += self.alphas[i] as f64 * self.train_targets[i] * (-self.gamma * d2).exp();
        }
        s
    }

    pub fn decision(&self, standardized_row: &[f64]) -> f64 {
        self.coef_scale * self.kernel_sum(standardized_row)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        let xs = self.standardizer.transform(x);
        xs.rows_iter()
            .map(|row| u8::from(self.decision(row) > 0.0))
            .collect()
    }
}

/// Kernelized variant of the same subgradient scheme. The weight vector is
/// never materialized; margin-violation counts over a precomputed Gram
/// matrix stand in for it.
pub fn fit_rbf(x: &Matrix, y: &[u8], hp: &Hyperparams, seed: u64) -> RbfSvmModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let ys = signed(y);
    let n = xs.n_rows();
    let d = xs.n_cols();
    let lambda = hp.rbf_svm_lambda;

    let gamma = hp.rbf_svm_gamma.unwrap_or_else(|| {
        // 1 / (d * mean feature variance) on the kernel's input features
        let n_f = n as f64;
        let mut var_sum = 0.0;
        for j in 0..d {
            let col_mean: f64 = (0..n).map(|i| xs.get(i, j)).sum::<f64>() / n_f;
            let v: f64 = (0..n)
                .map(|i| {
                    let c = xs.get(i, j) - col_mean;
                    c * c
                })
                .sum::<f64>()
                / n_f;
            var_sum += v;
        }
        let mean_var = var_sum / d as f64;
        if mean_var > 0.0 {
            1.0 / (d as f64 * mean_var)
        } else {
            1.0
        }
    });

    // Gram matrix; n stays at desk scale so the quadratic memory is fine
    let mut gram = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let mut d2 = 0.0;
            for (a, b) in xs.row(i).iter().zip(xs.row(j)) {
                let c = a - b;
                d2 += c * c;
            }
            let k = (-gamma * d2).exp();
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alphas = vec![0u64; n];
    let steps = hp.rbf_svm_epochs * n;
    for t in 1..=steps {
        let i = rng.gen_range(0..n);
        let krow = &gram[i * n..(i + 1) * n];
        let mut s = 0.0;
        for j in 0..n {
            if alphas[j] != 0 {
                s += alphas[j] as f64 * ys[j] * krow[j];
            }
        }
        let margin = ys[i] * s / (lambda * t as f64);
        if margin < 1.0 {
            alphas[i] += 1;
        }
    }

    RbfSvmModel {
        standardizer,
        train_rows: n,
        train_cols: d,
        train_data: xs.data().to_vec(),
        train_targets: ys,
        alphas,
        gamma,
        lambda,
        coef_scale: 1.0 / (lambda * steps as f64),
    }
}
