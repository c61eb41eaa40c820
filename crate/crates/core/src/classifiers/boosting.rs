//! Stagewise additive logistic-loss boosting: first-order trees with Newton
//! leaves, and the regularized second-order variant.

use serde::{Deserialize, Serialize};

use super::tree::{
    grow, FeatureSampler, GrowParams, SecondOrderCriterion, Tree, VarianceCriterion,
};
use super::Hyperparams;
use crate::matrix::Matrix;

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn log_odds(y: &[u8]) -> f64 {
    let p = y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64;
    (p / (1.0 - p)).ln()
}

fn log_loss(scores: &[f64], y: &[u8]) -> f64 {
    let mut loss = 0.0;
    for (&f, &label) in scores.iter().zip(y) {
        let p = sigmoid(f).clamp(1e-15, 1.0 - 1e-15);
        loss -= if label == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    loss / y.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Training log-loss after each round (diagnostics).
    pub round_losses: Vec<f64>,
}

impl BoostModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        x.rows_iter()
            .map(|row| u8::from(self.decision(row) > 0.0))
            .collect()
    }
}

/// Gradient boosting: each round fits a depth-limited regression tree with
/// variance-reduction splits to the residuals `y - sigmoid(F)`, and each
/// leaf takes the Newton step `sum(residual) / sum(sigma (1 - sigma))`.
pub fn fit_gradient(x: &Matrix, y: &[u8], hp: &Hyperparams) -> BoostModel {
    let n = x.n_rows();
    let base = log_odds(y);
    let mut scores = vec![base; n];
    let mut trees = Vec::with_capacity(hp.gb_trees);
    let mut round_losses = Vec::with_capacity(hp.gb_trees);
    let rows: Vec<usize> = (0..n).collect();
    let params = GrowParams {
        max_depth: Some(hp.gb_depth),
        min_gain: 0.0,
    };

    let mut residuals = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    for _ in 0..hp.gb_trees {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            residuals[i] = f64::from(y[i]) - p;
            hessians[i] = p * (1.0 - p);
        }
        let criterion = VarianceCriterion {
            targets: &residuals,
            hessians: Some(&hessians),
        };
        let tree = grow(x, &rows, &criterion, &params, &mut FeatureSampler::All);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += hp.gb_learning_rate * tree.eval(x.row(i));
        }
        trees.push(tree);
        round_losses.push(log_loss(&scores, y));
    }

    BoostModel {
        n_features: x.n_cols(),
        base_score: base,
        learning_rate: hp.gb_learning_rate,
        trees,
        round_losses,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderModel {
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub reg_lambda: f64,
    pub min_split_gain: f64,
    pub trees: Vec<Tree>,
    /// Training log-loss after each round (diagnostics).
    pub round_losses: Vec<f64>,
}

impl SecondOrderModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        x.rows_iter()
            .map(|row| u8::from(self.decision(row) > 0.0))
            .collect()
    }
}

/// Second-order boosting with the regularized gain
/// `1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)]` and leaf
/// weight `-G/(H+l)`; splits whose gain does not exceed `min_split_gain` are
/// rejected.
pub fn fit_second_order(x: &Matrix, y: &[u8], hp: &Hyperparams) -> SecondOrderModel {
    let n = x.n_rows();
    let base = log_odds(y);
    let mut scores = vec![base; n];
    let mut trees = Vec::with_capacity(hp.second_order_trees);
    let mut round_losses = Vec::with_capacity(hp.second_order_trees);
    let rows: Vec<usize> = (0..n).collect();
    let params = GrowParams {
        max_depth: Some(hp.second_order_depth),
        min_gain: hp.second_order_min_split_gain,
    };

    let mut gradients = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    for _ in 0..hp.second_order_trees {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            gradients[i] = p - f64::from(y[i]);
            hessians[i] = p * (1.0 - p);
        }
        let criterion = SecondOrderCriterion {
            gradients: &gradients,
            hessians: &hessians,
            reg_lambda: hp.second_order_reg_lambda,
        };
        let tree = grow(x, &rows, &criterion, &params, &mut FeatureSampler::All);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += hp.second_order_learning_rate * tree.eval(x.row(i));
        }
        trees.push(tree);
        round_losses.push(log_loss(&scores, y));
    }

    SecondOrderModel {
        n_features: x.n_cols(),
        base_score: base,
        learning_rate: hp.second_order_learning_rate,
        reg_lambda: hp.second_order_reg_lambda,
        min_split_gain: hp.second_order_min_split_gain,
        trees,
        round_losses,
    }
}
