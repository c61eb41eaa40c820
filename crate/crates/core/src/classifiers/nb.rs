//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::Hyperparams;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub log_priors: [f64; 2],
    /// Per-class, per-feature means.
    pub means: [Vec<f64>; 2],
    /// Per-class, per-feature variances including the smoothing term.
    pub variances: [Vec<f64>; 2],
    /// Smoothing actually applied: factor times the largest column variance.
    pub epsilon: f64,
}

impl NbModel {
    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        x.rows_iter()
            .map(|row| {
                let mut scores = self.log_priors;
                // epsilon == 0 means every training feature was constant:
                // likelihoods carry no information, priors decide
                if self.epsilon > 0.0 {
                    for class in 0..2 {
                        for ((v, m), var) in row
                            .iter()
                            .zip(&self.means[class])
                            .zip(&self.variances[class])
                        {
                            let diff = v - m;
                            scores[class] -= 0.5
                                * ((2.0 * std::f64::consts::PI * var).ln()
                                    + diff * diff / var);
                        }
                    }
                }
                u8::from(scores[1] > scores[0])
            })
            .collect()
    }
}

pub fn fit(x: &Matrix, y: &[u8], hp: &Hyperparams) -> NbModel {
    let n = x.n_rows();
    let d = x.n_cols();
    let counts = [
        y.iter().filter(|&&l| l == 0).count(),
        y.iter().filter(|&&l| l == 1).count(),
    ];

    let mut means = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in x.rows_iter().zip(y) {
        for (m, v) in means[label as usize].iter_mut().zip(row) {
            *m += v;
        }
    }
    for class in 0..2 {
        for m in &mut means[class] {
            *m /= counts[class] as f64;
        }
    }

    let mut variances = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in x.rows_iter().zip(y) {
        let class = label as usize;
        for ((s, v), m) in variances[class].iter_mut().zip(row).zip(&means[class]) {
            let c = v - m;
            *s += c * c;
        }
    }
    for class in 0..2 {
        for s in &mut variances[class] {
            *s /= counts[class] as f64;
        }
    }

    // smoothing scale: the largest total column variance
    let mut grand_mean = vec![0.0; d];
    for row in x.rows_iter() {
        for (m, v) in grand_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut grand_mean {
        *m /= n as f64;
    }
    let mut max_var: f64 = 0.0;
    for j in 0..d {
        let mut s = 0.0;
        for i in 0..n {
            let c = x.get(i, j) - grand_mean[j];
            s += c * c;
        }
        max_var = max_var.max(s / n as f64);
    }
    let epsilon = hp.nb_var_smoothing * max_var;
    for class in 0..2 {
        for v in &mut variances[class] {
            *v += epsilon;
        }
    }

    NbModel {
        log_priors: [
            (counts[0] as f64 / n as f64).ln(),
            (counts[1] as f64 / n as f64).ln(),
        ],
        means,
        variances,
        epsilon,
    }
}
