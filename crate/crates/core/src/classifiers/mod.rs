//! The eight classifier families behind one fit/predict contract.
//!
//! Every fit is deterministic given `(x, y, hyperparams, seed)`; predict is
//! a pure function of the model and input. Families that are sensitive to
//! feature scale (knn and both SVMs) standardize with statistics computed on
//! their training rows and carry those statistics in the model; tree
//! ensembles and naive Bayes consume raw features.

mod adaboost;
mod boosting;
mod forest;
mod knn;
mod nb;
mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use adaboost::{AdaBoostModel, Stump};
pub use boosting::{BoostModel, SecondOrderModel};
pub use forest::ForestModel;
pub use knn::KnnModel;
pub use nb::NbModel;
pub use svm::{LinearSvmModel, RbfSvmModel};

/// The classifier roster, one per accuracy-table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianNb,
    Knn,
    LinearSvm,
    RbfSvm,
    #[serde(rename = "adaboost")]
    AdaBoost,
    RandomForest,
    GradientBoost,
    SecondOrderBoost,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 8] = [
        ClassifierKind::GaussianNb,
        ClassifierKind::Knn,
        ClassifierKind::LinearSvm,
        ClassifierKind::RbfSvm,
        ClassifierKind::AdaBoost,
        ClassifierKind::RandomForest,
        ClassifierKind::GradientBoost,
        ClassifierKind::SecondOrderBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::RbfSvm => "rbf_svm",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::GradientBoost => "gradient_boost",
            ClassifierKind::SecondOrderBoost => "second_order_boost",
        }
    }

    /// Accepts the canonical name and a few common short forms.
    pub fn parse(s: &str) -> Result<Self> {
        let kind = match s {
            "gaussian_nb" | "gnb" => ClassifierKind::GaussianNb,
            "knn" => ClassifierKind::Knn,
            "linear_svm" => ClassifierKind::LinearSvm,
            "rbf_svm" => ClassifierKind::RbfSvm,
            "adaboost" => ClassifierKind::AdaBoost,
            "random_forest" => ClassifierKind::RandomForest,
            "gradient_boost" => ClassifierKind::GradientBoost,
            "second_order_boost" => ClassifierKind::SecondOrderBoost,
            other => {
                let valid: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::Argument(format!(
                    "unknown classifier `{other}`; valid names: {}",
                    valid.join(", ")
                )));
            }
        };
        Ok(kind)
    }
}

/// Hyperparameters for every family, echoed into run reports so results are
/// self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub knn_k: usize,
    pub linear_svm_lambda: f64,
    pub linear_svm_epochs: usize,
    pub rbf_svm_lambda: f64,
    pub rbf_svm_epochs: usize,
    /// `None` selects `1 / (d * mean feature variance)` at fit time.
    pub rbf_svm_gamma: Option<f64>,
    pub adaboost_rounds: usize,
    pub forest_trees: usize,
    pub forest_max_depth: Option<usize>,
    /// `None` selects `ceil(sqrt(d))` at fit time.
    pub forest_features_per_split: Option<usize>,
    pub forest_bootstrap: bool,
    pub gb_trees: usize,
    pub gb_depth: usize,
    pub gb_learning_rate: f64,
    pub second_order_trees: usize,
    pub second_order_depth: usize,
    pub second_order_learning_rate: f64,
    pub second_order_reg_lambda: f64,
    pub second_order_min_split_gain: f64,
    /// Variance-smoothing factor, multiplied by the largest column variance.
    pub nb_var_smoothing: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            knn_k: 5,
            linear_svm_lambda: 1e-4,
            linear_svm_epochs: 100,
            rbf_svm_lambda: 1e-4,
            rbf_svm_epochs: 100,
            rbf_svm_gamma: None,
            adaboost_rounds: 100,
            forest_trees: 100,
            forest_max_depth: None,
            forest_features_per_split: None,
            forest_bootstrap: true,
            gb_trees: 100,
            gb_depth: 3,
            gb_learning_rate: 0.1,
            second_order_trees: 100,
            second_order_depth: 3,
            second_order_learning_rate: 0.1,
            second_order_reg_lambda: 1.0,
            second_order_min_split_gain: 0.0,
            nb_var_smoothing: 1e-9,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("knn_k", self.knn_k),
            ("linear_svm_epochs", self.linear_svm_epochs),
            ("rbf_svm_epochs", self.rbf_svm_epochs),
            ("adaboost_rounds", self.adaboost_rounds),
            ("forest_trees", self.forest_trees),
            ("gb_trees", self.gb_trees),
            ("gb_depth", self.gb_depth),
            ("second_order_trees", self.second_order_trees),
            ("second_order_depth", self.second_order_depth),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::config(name, "must be >= 1"));
            }
        }
        for (name, v) in [
            ("gb_learning_rate", self.gb_learning_rate),
            ("second_order_learning_rate", self.second_order_learning_rate),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(name, "must lie in (0, 1]"));
            }
        }
        for (name, v) in [
            ("linear_svm_lambda", self.linear_svm_lambda),
            ("rbf_svm_lambda", self.rbf_svm_lambda),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be > 0"));
            }
        }
        if let Some(g) = self.rbf_svm_gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::config("rbf_svm_gamma", "must be > 0"));
            }
        }
        if !(self.second_order_reg_lambda >= 0.0) {
            return Err(Error::config("second_order_reg_lambda", "must be >= 0"));
        }
        if !(self.second_order_min_split_gain >= 0.0) {
            return Err(Error::config("second_order_min_split_gain", "must be >= 0"));
        }
        if !(self.nb_var_smoothing >= 0.0) {
            return Err(Error::config("nb_var_smoothing", "must be >= 0"));
        }
        Ok(())
    }
}

/// Per-feature train mean and standard deviation, applied before distance
/// or margin computations. Constant features keep a unit divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.n_rows().max(1) as f64;
        let d = x.n_cols();
        let mut mean = vec![0.0; d];
        for row in x.rows_iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in x.rows_iter() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                let c = v - m;
                *s += c * c;
            }
        }
        let std = var
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            let row = out.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}

/// Learned parameters for one classifier, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    GaussianNb(NbModel),
    Knn(KnnModel),
    LinearSvm(LinearSvmModel),
    RbfSvm(RbfSvmModel),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostModel),
    RandomForest(ForestModel),
    GradientBoost(BoostModel),
    SecondOrderBoost(SecondOrderModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::GaussianNb(_) => ClassifierKind::GaussianNb,
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::LinearSvm(_) => ClassifierKind::LinearSvm,
            TrainedModel::RbfSvm(_) => ClassifierKind::RbfSvm,
            TrainedModel::AdaBoost(_) => ClassifierKind::AdaBoost,
            TrainedModel::RandomForest(_) => ClassifierKind::RandomForest,
            TrainedModel::GradientBoost(_) => ClassifierKind::GradientBoost,
            TrainedModel::SecondOrderBoost(_) => ClassifierKind::SecondOrderBoost,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("models serialize infallibly")
    }

    pub fn from_json(s: &str) -> Result<TrainedModel> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("model json: {e}")))
    }
}

fn check_fit_inputs(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Argument(format!(
            "x has {} rows but y has {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::Argument("fit needs a non-empty matrix".into()));
    }
    if !x.all_finite() {
        return Err(Error::Argument("fit needs finite features".into()));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::Argument(format!("label {bad} is not binary")));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Argument(
            "fit needs both labels present in y".into(),
        ));
    }
    Ok(())
}

/// Fits a model of the requested family. `seed` only matters to the
/// families that draw randomness (both SVMs and the forest).
pub fn fit(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[u8],
    hp: &Hyperparams,
    seed: u64,
) -> Result<TrainedModel> {
    hp.validate()?;
    check_fit_inputs(x, y)?;
    Ok(match kind {
        ClassifierKind::GaussianNb => TrainedModel::GaussianNb(nb::fit(x, y, hp)),
        ClassifierKind::Knn => TrainedModel::Knn(knn::fit(x, y, hp)),
        ClassifierKind::LinearSvm => TrainedModel::LinearSvm(svm::fit_linear(x, y, hp, seed)),
        ClassifierKind::RbfSvm => TrainedModel::RbfSvm(svm::fit_rbf(x, y, hp, seed)),
        ClassifierKind::AdaBoost => TrainedModel::AdaBoost(adaboost::fit(x, y, hp)),
        ClassifierKind::RandomForest => TrainedModel::RandomForest(forest::fit(x, y, hp, seed)),
        ClassifierKind::GradientBoost => TrainedModel::GradientBoost(boosting::fit_gradient(x, y, hp)),
        ClassifierKind::SecondOrderBoost => {
            TrainedModel::SecondOrderBoost(boosting::fit_second_order(x, y, hp))
        }
    })
}

/// Predicts a label per row. Pure and deterministic; applies the model's
/// stored standardization first when the family carries one.
pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<u8>> {
    let expect = match model {
        TrainedModel::GaussianNb(m) => m.n_features(),
        TrainedModel::Knn(m) => m.n_features(),
        TrainedModel::LinearSvm(m) => m.n_features(),
        TrainedModel::RbfSvm(m) => m.n_features(),
        TrainedModel::AdaBoost(m) => m.n_features,
        TrainedModel::RandomForest(m) => m.n_features,
        TrainedModel::GradientBoost(m) => m.n_features,
        TrainedModel::SecondOrderBoost(m) => m.n_features,
    };
    if x.n_cols() != expect {
        return Err(Error::Argument(format!(
            "model expects {expect} features, input has {}",
            x.n_cols()
        )));
    }
    Ok(match model {
        TrainedModel::GaussianNb(m) => m.predict(x),
        TrainedModel::Knn(m) => m.predict(x),
        TrainedModel::LinearSvm(m) => m.predict(x),
        TrainedModel::RbfSvm(m) => m.predict(x),
        TrainedModel::AdaBoost(m) => m.predict(x),
        TrainedModel::RandomForest(m) => m.predict(x),
        TrainedModel::GradientBoost(m) => m.predict(x),
        TrainedModel::SecondOrderBoost(m) => m.predict(x),
    })
}

/// Fraction of matching labels, in `[0, 1]`.
pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Argument(format!(
            "accuracy needs equal non-empty inputs (got {} and {})",
            pred.len(),
            truth.len()
        )));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

#[cfg(test)]
pub(crate) mod testdata {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Two Gaussian blobs separated by `sep` standard deviations per axis.
    pub fn blobs(n: usize, d: usize, sep: f64, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % 2) as u8;
            let centre = if label == 1 { sep / 2.0 } else { -sep / 2.0 };
            for _ in 0..d {
                let v: f64 = rng.sample(StandardNormal);
                data.push(centre + v);
            }
            y.push(label);
        }
        (Matrix::from_vec(n, d, data).unwrap(), y)
    }

    /// Four-cluster XOR layout: label = cluster-x sign XOR cluster-y sign.
    pub fn xor_clusters(n: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * 2);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let cx = if i % 2 == 0 { -2.0 } else { 2.0 };
            let cy = if (i / 2) % 2 == 0 { -2.0 } else { 2.0 };
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            data.push(cx + 0.4 * nx);
            data.push(cy + 0.4 * ny);
            y.push(u8::from((cx > 0.0) != (cy > 0.0)));
        }
        (Matrix::from_vec(n, 2, data).unwrap(), y)
    }

    pub fn train_test(
        x: &Matrix,
        y: &[u8],
        frac: f64,
    ) -> (Matrix, Vec<u8>, Matrix, Vec<u8>) {
        let cut = (x.n_rows() as f64 * frac) as usize;
        let train_idx: Vec<usize> = (0..cut).collect();
        let test_idx: Vec<usize> = (cut..x.n_rows()).collect();
        (
            x.select_rows(&train_idx),
            train_idx.iter().map(|&i| y[i]).collect(),
            x.select_rows(&test_idx),
            test_idx.iter().map(|&i| y[i]).collect(),
        )
    }
}
