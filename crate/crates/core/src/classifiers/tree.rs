//! Shared binary decision-tree grower.
//!
//! One recursive grower serves three split criteria: Gini impurity (random
//! forest), variance reduction with optional Newton leaves (gradient
//! boosting), and the regularized second-order gain. Candidate features are
//! scanned in ascending index and thresholds in ascending value, so equal
//! gains always resolve to the lowest feature index and lowest threshold.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl Tree {
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut idx = self.root;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Node statistics a criterion accumulates during threshold sweeps.
pub trait Criterion {
    type Stats: Clone;

    fn stats_of(&self, rows: &[usize]) -> Self::Stats;
    fn add(&self, stats: &mut Self::Stats, row: usize);
    fn remove(&self, stats: &mut Self::Stats, row: usize);
    /// Split gain; the grower splits only when this strictly exceeds
    /// `min_gain`.
    fn gain(&self, parent: &Self::Stats, left: &Self::Stats, right: &Self::Stats) -> f64;
    fn leaf_value(&self, stats: &Self::Stats) -> f64;
    /// True when no split of this node can help (e.g. a single-class node).
    fn is_pure(&self, stats: &Self::Stats) -> bool;
}

/// Gini-impurity criterion over binary labels.
pub struct GiniCriterion<'a> {
    pub labels: &'a [u8],
}

#[derive(Clone)]
pub struct GiniStats {
    n: usize,
    ones: usize,
}

impl GiniStats {
    fn weighted_impurity(&self) -> f64 {
        // n * gini = n - (c0^2 + c1^2) / n
        if self.n == 0 {
            return 0.0;
        }
        let c0 = (self.n - self.ones) as f64;
        let c1 = self.ones as f64;
        self.n as f64 - (c0 * c0 + c1 * c1) / self.n as f64
    }
}

impl Criterion for GiniCriterion<'_> {
    type Stats = GiniStats;

    fn stats_of(&self, rows: &[usize]) -> GiniStats {
        let ones = rows.iter().filter(|&&r| self.labels[r] == 1).count();
        GiniStats {
            n: rows.len(),
            ones,
        }
    }

    fn add(&self, stats: &mut GiniStats, row: usize) {
        stats.n += 1;
        stats.ones += usize::from(self.labels[row] == 1);
    }

    fn remove(&self, stats: &mut GiniStats, row: usize) {
        stats.n -= 1;
        stats.ones -= usize::from(self.labels[row] == 1);
    }

    fn gain(&self, parent: &GiniStats, left: &GiniStats, right: &GiniStats) -> f64 {
        parent.weighted_impurity() - left.weighted_impurity() - right.weighted_impurity()
    }

    fn leaf_value(&self, stats: &GiniStats) -> f64 {
        // majority label, ties to 0
        if 2 * stats.ones > stats.n {
            1.0
        } else {
            0.0
        }
    }

    fn is_pure(&self, stats: &GiniStats) -> bool {
        stats.ones == 0 || stats.ones == stats.n
    }
}

/// Variance-reduction criterion over real targets. With `hessians` present
/// the leaf value is the Newton step `sum(target) / sum(hessian)`; without,
/// the plain mean.
pub struct VarianceCriterion<'a> {
    pub targets: &'a [f64],
    pub hessians: Option<&'a [f64]>,
}

#[derive(Clone)]
pub struct VarianceStats {
    n: usize,
    sum: f64,
    sum_sq: f64,
    hess_sum: f64,
}

impl VarianceStats {
    fn sse(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.sum_sq - self.sum * self.sum / self.n as f64
    }
}

impl Criterion for VarianceCriterion<'_> {
    type Stats = VarianceStats;

    fn stats_of(&self, rows: &[usize]) -> VarianceStats {
        let mut s = VarianceStats {
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
            hess_sum: 0.0,
        };
        for &r in rows {
            self.add(&mut s, r);
        }
        s
    }

    fn add(&self, s: &mut VarianceStats, row: usize) {
        let t = self.targets[row];
        s.n += 1;
        s.sum += t;
        s.sum_sq += t * t;
        if let Some(h) = self.hessians {
            s.hess_sum += h[row];
        }
    }

    fn remove(&self, s: &mut VarianceStats, row: usize) {
        let t = self.targets[row];
        s.n -= 1;
        s.sum -= t;
        s.sum_sq -= t * t;
        if let Some(h) = self.hessians {
            s.hess_sum -= h[row];
        }
    }

    fn gain(&self, parent: &VarianceStats, left: &VarianceStats, right: &VarianceStats) -> f64 {
        parent.sse() - left.sse() - right.sse()
    }

    fn leaf_value(&self, s: &VarianceStats) -> f64 {
        if self.hessians.is_some() {
            if s.hess_sum > 0.0 {
                s.sum / s.hess_sum
            } else {
                0.0
            }
        } else if s.n > 0 {
            s.sum / s.n as f64
        } else {
            0.0
        }
    }

    fn is_pure(&self, s: &VarianceStats) -> bool {
        s.sse() <= 0.0
    }
}

/// Regularized second-order criterion on logistic gradients/hessians:
/// gain = 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)],
/// leaf = -G/(H+l).
pub struct SecondOrderCriterion<'a> {
    pub gradients: &'a [f64],
    pub hessians: &'a [f64],
    pub reg_lambda: f64,
}

#[derive(Clone)]
pub struct SecondOrderStats {
    g_sum: f64,
    h_sum: f64,
}

impl SecondOrderCriterion<'_> {
    fn score(&self, s: &SecondOrderStats) -> f64 {
        let denom = s.h_sum + self.reg_lambda;
        if denom > 0.0 {
            s.g_sum * s.g_sum / denom
        } else {
            0.0
        }
    }
}

impl Criterion for SecondOrderCriterion<'_> {
    type Stats = SecondOrderStats;

    fn stats_of(&self, rows: &[usize]) -> SecondOrderStats {
        let mut s = SecondOrderStats {
            g_sum: 0.0,
            h_sum: 0.0,
        };
        for &r in rows {
            self.add(&mut s, r);
        }
        s
    }

    fn add(&self, s: &mut SecondOrderStats, row: usize) {
        s.g_sum += self.gradients[row];
        s.h_sum += self.hessians[row];
    }

    fn remove(&self, s: &mut SecondOrderStats, row: usize) {
        s.g_sum -= self.gradients[row];
        s.h_sum -= self.hessians[row];
    }

    fn gain(
        &self,
        parent: &SecondOrderStats,
        left: &SecondOrderStats,
        right: &SecondOrderStats,
    ) -> f64 {
        0.5 * (self.score(left) + self.score(right) - self.score(parent))
    }

    fn leaf_value(&self, s: &SecondOrderStats) -> f64 {
        let denom = s.h_sum + self.reg_lambda;
        if denom > 0.0 {
            -s.g_sum / denom
        } else {
            0.0
        }
    }

    fn is_pure(&self, _s: &SecondOrderStats) -> bool {
        false
    }
}

/// Where split candidates come from: every feature, or a per-split uniform
/// sample without replacement.
pub enum FeatureSampler<'a> {
    All,
    Random { m: usize, rng: &'a mut ChaCha8Rng },
}

impl FeatureSampler<'_> {
    fn candidates(&mut self, n_features: usize) -> Vec<usize> {
        match self {
            FeatureSampler::All => (0..n_features).collect(),
            FeatureSampler::Random { m, rng } => {
                let m = (*m).min(n_features);
                let mut idx: Vec<usize> = sample(*rng, n_features, m).into_vec();
                // ascending scan order keeps tie-breaking independent of
                // the sample order
                idx.sort_unstable();
                idx
            }
        }
    }
}

pub struct GrowParams {
    pub max_depth: Option<usize>,
    /// A split must strictly exceed this gain to be taken.
    pub min_gain: f64,
}

/// Grows a tree on the given rows (duplicates allowed, e.g. bootstrap
/// samples). Deterministic given the sampler's generator state.
pub fn grow<C: Criterion>(
    x: &Matrix,
    rows: &[usize],
    criterion: &C,
    params: &GrowParams,
    sampler: &mut FeatureSampler<'_>,
) -> Tree {
    let mut nodes = Vec::new();
    let root = grow_node(x, rows, criterion, params, sampler, 0, &mut nodes);
    Tree { nodes, root }
}

fn grow_node<C: Criterion>(
    x: &Matrix,
    rows: &[usize],
    criterion: &C,
    params: &GrowParams,
    sampler: &mut FeatureSampler<'_>,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let stats = criterion.stats_of(rows);
    let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
    if rows.len() < 2 || criterion.is_pure(&stats) || depth_capped {
        nodes.push(Node::Leaf {
            value: criterion.leaf_value(&stats),
        });
        return nodes.len() - 1;
    }

    let mut best: Option<(f64, usize, f64)> = None;
    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for f in sampler.candidates(x.n_cols()) {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_by(|&a, &b| {
            x.get(a, f)
                .partial_cmp(&x.get(b, f))
                .expect("features are finite")
                .then_with(|| a.cmp(&b))
        });
        let mut left = criterion.stats_of(&[]);
        let mut right = stats.clone();
        for w in 0..order.len() - 1 {
            criterion.add(&mut left, order[w]);
            criterion.remove(&mut right, order[w]);
            let v = x.get(order[w], f);
            let next = x.get(order[w + 1], f);
            if v < next {
                let mut threshold = 0.5 * (v + next);
                // guard against the midpoint rounding up onto `next`
                if threshold >= next {
                    threshold = v;
                }
                let gain = criterion.gain(&stats, &left, &right);
                if best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, f, threshold));
                }
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > params.min_gain => {
            let mut left_rows = Vec::new();
            let mut right_rows = Vec::new();
            for &r in rows {
                if x.get(r, feature) <= threshold {
                    left_rows.push(r);
                } else {
                    right_rows.push(r);
                }
            }
            debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
            let left = grow_node(x, &left_rows, criterion, params, sampler, depth + 1, nodes);
            let right = grow_node(x, &right_rows, criterion, params, sampler, depth + 1, nodes);
            nodes.push(Node::Split {
                feature,
                threshold,
                left,
                right,
            });
            nodes.len() - 1
        }
        _ => {
            nodes.push(Node::Leaf {
                value: criterion.leaf_value(&stats),
            });
            nodes.len() - 1
        }
    }
}
