//! Discrete AdaBoost over depth-1 stumps.

use serde::{Deserialize, Serialize};

use super::Hyperparams;
use crate::matrix::Matrix;

/// One decision stump: sign(+1) on the right of the threshold when
/// `right_is_positive`, flipped otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub right_is_positive: bool,
    pub alpha: f64,
}

impl Stump {
    fn eval(&self, row: &[f64]) -> f64 {
        let right = row[self.feature] > self.threshold;
        if right == self.right_is_positive {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub n_features: usize,
    pub stumps: Vec<Stump>,
    /// Sample weights after the final round (training diagnostics).
    pub sample_weights: Vec<f64>,
}

impl AdaBoostModel {
    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        x.rows_iter()
            .map(|row| {
                let score: f64 = self.stumps.iter().map(|s| s.alpha * s.eval(row)).sum();
                u8::from(score > 0.0)
            })
            .collect()
    }
}

/// Exhaustive weighted-error stump search: every feature, thresholds at the
/// midpoints of consecutive distinct sorted values, both polarities. Ties
/// keep the first candidate in (feature, threshold, polarity) scan order.
fn best_stump(x: &Matrix, ys: &[f64], w: &[f64]) -> Option<(Stump, f64)> {
    let n = x.n_rows();
    let mut best: Option<(Stump, f64)> = None;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for f in 0..x.n_cols() {
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| {
            x.get(a, f)
                .partial_cmp(&x.get(b, f))
                .expect("features are finite")
                .then_with(|| a.cmp(&b))
        });
        // total positive-class weight to the right of the boundary
        let mut pos_left = 0.0;
        let mut neg_left = 0.0;
        let pos_total: f64 = order
            .iter()
            .map(|&i| if ys[i] > 0.0 { w[i] } else { 0.0 })
            .sum();
        let neg_total: f64 = order
            .iter()
            .map(|&i| if ys[i] < 0.0 { w[i] } else { 0.0 })
            .sum();
        for k in 0..n - 1 {
            let i = order[k];
            if ys[i] > 0.0 {
                pos_left += w[i];
            } else {
                neg_left += w[i];
            }
            let v = x.get(i, f);
            let next = x.get(order[k + 1], f);
            if v < next {
                let mut threshold = 0.5 * (v + next);
                if threshold >= next {
                    threshold = v;
                }
                // polarity A: right side predicts +1
                let err_a = pos_left + (neg_total - neg_left);
                let err_b = neg_left + (pos_total - pos_left);
                for (err, right_is_positive) in [(err_a, true), (err_b, false)] {
                    if best.as_ref().is_none_or(|(_, e)| err < *e) {
                        best = Some((
                            Stump {
                                feature: f,
                                threshold,
                                right_is_positive,
                                alpha: 0.0,
                            },
                            err,
                        ));
                    }
                }
            }
        }
    }
    best
}

pub fn fit(x: &Matrix, y: &[u8], hp: &Hyperparams) -> AdaBoostModel {
    let n = x.n_rows();
    let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();

    for _ in 0..hp.adaboost_rounds {
        let Some((mut stump, eps)) = best_stump(x, &ys, &w) else {
            break; // no distinct values anywhere: nothing to split on
        };
        // a zero-error stump would get infinite weight; clamp so the vote
        // stays finite and serializable while still dominating
        let eps_for_alpha = eps.max(1e-10);
        stump.alpha = 0.5 * ((1.0 - eps_for_alpha) / eps_for_alpha).ln();
        let alpha = stump.alpha;
        let eval: Vec<f64> = (0..n).map(|i| stump.eval(x.row(i))).collect();
        stumps.push(stump);
        if eps == 0.0 || eps >= 0.5 {
            break; // recorded, then stop
        }
        let mut total = 0.0;
        for i in 0..n {
            w[i] *= (-alpha * ys[i] * eval[i]).exp();
            total += w[i];
        }
        for wi in &mut w {
            *wi /= total;
        }
    }

    AdaBoostModel {
        n_features: x.n_cols(),
        stumps,
        sample_weights: w,
    }
}
