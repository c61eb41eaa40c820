//! Random forest: bagged Gini CART trees with per-split feature sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, FeatureSampler, GiniCriterion, GrowParams, Tree};
use super::Hyperparams;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        x.rows_iter()
            .map(|row| {
                let ones = self
                    .trees
                    .iter()
                    .filter(|t| t.eval(row) > 0.5)
                    .count();
                // vote ties go to label 0
                u8::from(2 * ones > self.trees.len())
            })
            .collect()
    }
}

/// Derives one generator per tree from (seed, tree index), so parallel and
/// sequential builds would consume identical streams.
fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(tree_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"twoheads");
    ChaCha8Rng::from_seed(key)
}

pub fn fit(x: &Matrix, y: &[u8], hp: &Hyperparams, seed: u64) -> ForestModel {
    let n = x.n_rows();
    let d = x.n_cols();
    let m = hp
        .forest_features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d);
    let criterion = GiniCriterion { labels: y };
    let params = GrowParams {
        max_depth: hp.forest_max_depth,
        min_gain: 0.0,
    };

    let trees = (0..hp.forest_trees)
        .map(|ti| {
            let mut rng = tree_rng(seed, ti);
            let rows: Vec<usize> = if hp.forest_bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut sampler = if m >= d {
                FeatureSampler::All
            } else {
                FeatureSampler::Random { m, rng: &mut rng }
            };
            grow(x, &rows, &criterion, &params, &mut sampler)
        })
        .collect();

    ForestModel {
        n_features: d,
        trees,
    }
}

#[cfg(test)]
mod tests {
    use super::super::tree::VarianceCriterion;
    use super::super::{accuracy, testdata};
    use super::*;

    #[test]
    fn degenerate_forest_equals_single_cart() {
        // one tree, no bootstrap, all features considered: must match a
        // deterministic CART; oracle = the boosting tree grower run on the
        // labels with variance splits (proportional to Gini on binary
        // targets) and mean leaves
        let (x, y) = testdata::blobs(80, 3, 2.0, 31);
        let hp = Hyperparams {
            forest_trees: 1,
            forest_bootstrap: false,
            forest_features_per_split: Some(3),
            ..Hyperparams::default()
        };
        let forest = fit(&x, &y, &hp, 0);

        let targets: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
        let crit = VarianceCriterion {
            targets: &targets,
            hessians: None,
        };
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let cart = grow(
            &x,
            &rows,
            &crit,
            &GrowParams {
                max_depth: None,
                min_gain: 0.0,
            },
            &mut FeatureSampler::All,
        );

        let (probe, _) = testdata::blobs(60, 3, 2.0, 77);
        for i in 0..probe.n_rows() {
            let f = forest.predict(&probe.select_rows(&[i]))[0];
            let c = u8::from(cart.eval(probe.row(i)) > 0.5);
            assert_eq!(f, c, "row {i}");
        }
    }

    #[test]
    fn seeds_control_but_do_not_derail() {
        let (x, y) = testdata::blobs(300, 4, 4.0, 41);
        let (xt, yt, xs, ys) = testdata::train_test(&x, &y, 0.7);
        let hp = Hyperparams::default();
        let a = fit(&xt, &yt, &hp, 0);
        let b = fit(&xt, &yt, &hp, 0);
        assert_eq!(a, b);
        let c = fit(&xt, &yt, &hp, 1);
        assert_ne!(a, c, "different seed should bootstrap differently");
        for model in [a, c] {
            let acc = accuracy(&model.predict(&xs), &ys).unwrap();
            assert!(acc >= 0.95, "accuracy {acc}");
        }
    }
}
