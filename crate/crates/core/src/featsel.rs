//! Univariate ANOVA-F scoring and top-k selection.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One-way ANOVA F-value over two or more groups.
///
/// `F = [sum_j n_j (mean_j - grand)^2 / (g-1)] / [sum_j sum_i (x_ji - mean_j)^2 / (N-g)]`
///
/// A zero denominator returns `+inf` when the numerator is positive and `0`
/// when both are zero.
pub fn anova_f(groups: &[&[f64]]) -> Result<f64> {
    let g = groups.len();
    if g < 2 {
        return Err(Error::Argument("anova_f needs at least 2 groups".into()));
    }
    if groups.iter().any(|gr| gr.is_empty()) {
        return Err(Error::Argument("anova_f groups must be non-empty".into()));
    }
    let n_total: usize = groups.iter().map(|gr| gr.len()).sum();
    if n_total <= g {
        return Err(Error::Argument(format!(
            "anova_f needs N > g (got N = {n_total}, g = {g})"
        )));
    }

    let grand: f64 =
        groups.iter().flat_map(|gr| gr.iter()).sum::<f64>() / n_total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for gr in groups {
        let mean = gr.iter().sum::<f64>() / gr.len() as f64;
        ss_between += gr.len() as f64 * (mean - grand) * (mean - grand);
        ss_within += gr.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    }
    let df1 = (g - 1) as f64;
    let df2 = (n_total - g) as f64;
    if ss_within == 0.0 {
        return Ok(if ss_between > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok((ss_between / df1) / (ss_within / df2))
}

/// Fitted selector: per-feature F-scores and the chosen top-k index set.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorModel {
    /// Per-feature F-value; `+inf` marks perfect separation.
    pub scores: Vec<f64>,
    /// Number of features kept (after clamping).
    pub k: usize,
    /// Selected feature indices, strictly increasing.
    pub selected: Vec<usize>,
    /// Number of training rows the fit saw.
    pub fitted_on: usize,
    /// Set when the requested k exceeded the feature count and was clamped.
    pub warning: Option<String>,
}

/// Scores every column of `x` (training rows only) with [`anova_f`] grouped
/// by label and keeps the top-k, ties broken toward the lower index.
pub fn fit_selector(x: &Matrix, y: &[u8], k: usize) -> Result<SelectorModel> {
    if x.n_rows() != y.len() {
        return Err(Error::Argument(format!(
            "row count {} does not match label count {}",
            x.n_rows(),
            y.len()
        )));
    }
    if k == 0 {
        return Err(Error::Argument("k must be >= 1".into()));
    }
    let has0 = y.contains(&0);
    let has1 = y.contains(&1);
    if !has0 || !has1 {
        return Err(Error::Stratification(
            "selector fit needs both labels in y".into(),
        ));
    }

    let n_features = x.n_cols();
    let mut g0 = Vec::new();
    let mut g1 = Vec::new();
    let mut scores = Vec::with_capacity(n_features);
    for j in 0..n_features {
        g0.clear();
        g1.clear();
        for (i, &label) in y.iter().enumerate() {
            let v = x.get(i, j);
            if label == 0 {
                g0.push(v);
            } else {
                g1.push(v);
            }
        }
        scores.push(anova_f(&[&g0, &g1])?);
    }

    let (k_eff, warning) = if k > n_features {
        (
            n_features,
            Some(format!("requested k = {k} clamped to {n_features} features")),
        )
    } else {
        (k, None)
    };
    let mut order: Vec<usize> = (0..n_features).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("F-scores are never NaN")
            .then_with(|| a.cmp(&b))
    });
    let mut selected: Vec<usize> = order[..k_eff].to_vec();
    selected.sort_unstable();

    Ok(SelectorModel {
        scores,
        k: k_eff,
        selected,
        fitted_on: x.n_rows(),
        warning,
    })
}

/// Restricts `x` to the model's selected columns, ascending.
pub fn transform(x: &Matrix, model: &SelectorModel) -> Result<Matrix> {
    if x.n_cols() != model.scores.len() {
        return Err(Error::Argument(format!(
            "matrix has {} columns but the selector was fitted on {}",
            x.n_cols(),
            model.scores.len()
        )));
    }
    Ok(x.select_cols(&model.selected))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_f() {
        // SSB = 13.5 with df1 = 1; SSW = 4 with df2 = 4 -> F = 13.5
        let f = anova_f(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert!((f - 13.5).abs() < 1e-12, "{f}");
    }

    #[test]
    fn degenerate_groups() {
        let f = anova_f(&[&[1.0, 2.0], &[1.0, 2.0]]).unwrap();
        assert_eq!(f, 0.0);
        let f = anova_f(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        assert!(f.is_infinite() && f > 0.0);
        // identical constant groups: both sums of squares are zero
        let f = anova_f(&[&[3.0, 3.0], &[3.0, 3.0]]).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn argument_errors() {
        assert!(anova_f(&[&[1.0, 2.0]]).is_err());
        assert!(anova_f(&[&[1.0], &[][..]]).is_err());
        assert!(anova_f(&[&[1.0], &[2.0]]).is_err()); // N == g
    }

    #[test]
    fn perfect_feature_selected_first() {
        // column 0 equals the label; column 1 is constant
        let y = vec![0u8, 0, 1, 1];
        let x = Matrix::from_vec(4, 3, vec![
            0.0, 5.0, 0.3, //
            0.0, 5.0, 0.1, //
            1.0, 5.0, 0.2, //
            1.0, 5.0, 0.4,
        ])
        .unwrap();
        let m = fit_selector(&x, &y, 1).unwrap();
        assert!(m.scores[0].is_infinite());
        assert_eq!(m.scores[1], 0.0);
        assert_eq!(m.selected, vec![0]);
        assert_eq!(m.fitted_on, 4);
        assert!(m.warning.is_none());
    }

    #[test]
    fn k_clamps_with_warning() {
        let y = vec![0u8, 1, 0, 1];
        let x = Matrix::from_vec(4, 2, vec![0.0, 1.0, 1.0, 0.0, 0.1, 0.9, 0.9, 0.2]).unwrap();
        let m = fit_selector(&x, &y, 10).unwrap();
        assert_eq!(m.k, 2);
        assert_eq!(m.selected, vec![0, 1]);
        assert!(m.warning.is_some());
    }

    #[test]
    fn single_label_is_stratification_error() {
        let y = vec![1u8; 4];
        let x = Matrix::zeros(4, 2);
        assert!(matches!(
            fit_selector(&x, &y, 1),
            Err(Error::Stratification(_))
        ));
    }

    #[test]
    fn infinite_scores_tie_break_by_index() {
        // columns 1 and 2 both equal the label -> both +inf, lower index wins
        let y = vec![0u8, 0, 1, 1];
        let x = Matrix::from_vec(4, 3, vec![
            0.3, 0.0, 0.0, //
            0.1, 0.0, 0.0, //
            0.2, 1.0, 1.0, //
            0.4, 1.0, 1.0,
        ])
        .unwrap();
        let m = fit_selector(&x, &y, 1).unwrap();
        assert_eq!(m.selected, vec![1]);
    }

    #[test]
    fn transform_identity_and_single_column() {
        let y = vec![0u8, 1, 0, 1];
        let x = Matrix::from_vec(4, 2, vec![0.0, 9.0, 1.0, 8.0, 0.2, 9.1, 0.8, 8.2]).unwrap();
        let all = fit_selector(&x, &y, 2).unwrap();
        assert_eq!(transform(&x, &all).unwrap(), x);

        let one = fit_selector(&x, &y, 1).unwrap();
        let t = transform(&x, &one).unwrap();
        assert_eq!(t.n_cols(), 1);
        assert_eq!(t.col(0), x.col(one.selected[0]));

        let wrong = Matrix::zeros(4, 5);
        assert!(transform(&wrong, &one).is_err());
    }
}
