//! k-nearest-neighbour majority vote on standardized features.

use serde::{Deserialize, Serialize};

use super::{Hyperparams, Standardizer};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    pub train_rows: usize,
    pub train_cols: usize,
    /// Standardized training set, row-major.
    pub train_data: Vec<f64>,
    pub train_labels: Vec<u8>,
}

impl KnnModel {
    pub fn n_features(&self) -> usize {
        self.train_cols
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        let q = self.standardizer.transform(x);
        let k = self.k.min(self.train_rows);
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(self.train_rows);
        q.rows_iter()
            .map(|row| {
                dists.clear();
                for i in 0..self.train_rows {
                    let t = &self.train_data[i * self.train_cols..(i + 1) * self.train_cols];
                    let mut d = 0.0;
                    for (a, b) in row.iter().zip(t) {
                        let c = a - b;
                        d += c * c;
                    }
                    dists.push((d, i));
                }
                // distance ties break toward the lower training-row index
                dists.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let votes1 = dists[..k]
                    .iter()
                    .filter(|(_, i)| self.train_labels[*i] == 1)
                    .count();
                // vote ties go to label 0
                u8::from(2 * votes1 > k)
            })
            .collect()
    }
}

pub fn fit(x: &Matrix, y: &[u8], hp: &Hyperparams) -> KnnModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    KnnModel {
        k: hp.knn_k,
        standardizer,
        train_rows: xs.n_rows(),
        train_cols: xs.n_cols(),
        train_data: xs.data().to_vec(),
        train_labels: y.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp_k(k: usize) -> Hyperparams {
        Hyperparams {
            knn_k: k,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn k1_memorizes_training_points() {
        let x = Matrix::from_vec(4, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let y = vec![0u8, 1, 1, 0];
        let model = fit(&x, &y, &hp_k(1));
        assert_eq!(model.predict(&x), y);
    }

    #[test]
    fn majority_of_three() {
        // neighbours of the origin query are labelled {0, 0, 1}
        let x = Matrix::from_vec(3, 1, vec![0.1, -0.1, 0.2]).unwrap();
        let y = vec![0u8, 0, 1];
        let model = fit(&x, &y, &hp_k(3));
        let q = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        assert_eq!(model.predict(&q), vec![0]);
    }

    #[test]
    fn matches_brute_force_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 50;
        let d = 4;
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
        let x = Matrix::from_vec(n, d, data).unwrap();
        let model = fit(&x, &y, &hp_k(5));

        let qdata: Vec<f64> = (0..20 * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = Matrix::from_vec(20, d, qdata).unwrap();
        let pred = model.predict(&q);

        // independent exhaustive search over all pairs on the standardized
        // coordinates
        let xs = model.standardizer.transform(&x);
        let qs = model.standardizer.transform(&q);
        for (qi, expect) in pred.iter().enumerate() {
            let mut pairs: Vec<(f64, usize)> = (0..n)
                .map(|ti| {
                    let d2: f64 = qs
                        .row(qi)
                        .iter()
                        .zip(xs.row(ti))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d2, ti)
                })
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let votes = pairs[..5].iter().filter(|(_, t)| y[*t] == 1).count();
            assert_eq!(*expect, u8::from(2 * votes > 5), "query {qi}");
        }
    }
}
