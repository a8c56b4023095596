//! Linear classifiers: L2-regularized multinomial logistic regression by
//! gradient descent with backtracking, and a one-vs-rest linear SVM trained
//! by projected subgradient descent on the hinge loss.
//!
//! Features are standardized internally with train statistics; weights live
//! in standardized space.

use super::{Budget, OpError};
use crate::dataset::Dataset;
use crate::stats;

const LOGISTIC_EPOCHS: usize = 150;
const SVM_EPOCHS: usize = 250;
pub(super) const RFE_RANKER_EPOCHS: usize = 80;
const RFE_RANKER_REG: f64 = 1.0;

#[derive(Debug, Clone)]
pub(super) struct LinearModel {
    /// class_count rows of (m weights + bias).
    weights: Vec<Vec<f64>>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

fn standardization(ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let means: Vec<f64> = ds.columns().iter().map(|c| stats::mean(c)).collect();
    let stds: Vec<f64> = ds
        .columns()
        .iter()
        .map(|c| {
            let s = stats::variance(c).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    (means, stds)
}

fn standardized_rows(ds: &Dataset, means: &[f64], stds: &[f64]) -> Vec<Vec<f64>> {
    (0..ds.n_rows())
        .map(|i| {
            ds.columns()
                .iter()
                .enumerate()
                .map(|(j, c)| (c[i] - means[j]) / stds[j])
                .collect()
        })
        .collect()
}

/// Multinomial softmax cross-entropy with L2 penalty on non-bias weights.
///
/// `w` is `class_count * (m + 1)` flat (bias last per class); rows carry `m`
/// features. Returns (loss, gradient); the analytic gradient here is the one
/// checked against finite differences in the test suite.
pub fn logistic_loss_grad(
    w: &[f64],
    rows: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let n = rows.len();
    let m = rows[0].len();
    let stride = m + 1;
    assert_eq!(w.len(), class_count * stride);
    let mut grad = vec![0.0; w.len()];
    let mut loss = 0.0;
    let mut scores = vec![0.0; class_count];
    for (row, &y) in rows.iter().zip(labels) {
        for k in 0..class_count {
            let wk = &w[k * stride..(k + 1) * stride];
            let mut s = wk[m];
            for (j, &x) in row.iter().enumerate() {
                s += wk[j] * x;
            }
            scores[k] = s;
        }
        let mx = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = scores.iter().map(|s| (s - mx).exp()).sum();
        loss -= scores[y] - mx - z.ln();
        for k in 0..class_count {
            let p = (scores[k] - mx).exp() / z;
            let coef = p - if k == y { 1.0 } else { 0.0 };
            let gk = &mut grad[k * stride..(k + 1) * stride];
            for (j, &x) in row.iter().enumerate() {
                gk[j] += coef * x;
            }
            gk[m] += coef;
        }
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    for g in grad.iter_mut() {
        *g *= inv_n;
    }
    // L2 on weights only, not biases
    for k in 0..class_count {
        for j in 0..m {
            let wv = w[k * stride + j];
            loss += 0.5 * lambda * inv_n * wv * wv;
            grad[k * stride + j] += lambda * inv_n * wv;
        }
    }
    (loss, grad)
}

fn gradient_descent(
    rows: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    lambda: f64,
    epochs: usize,
    budget: &Budget,
) -> Result<Vec<f64>, OpError> {
    let stride = rows[0].len() + 1;
    let mut w = vec![0.0; class_count * stride];
    let (mut loss, mut grad) = logistic_loss_grad(&w, rows, labels, class_count, lambda);
    let mut lr = 1.0;
    let mut prev_loss = f64::INFINITY;
    for epoch in 0..epochs {
        if epoch % 16 == 0 {
            budget.check()?;
        }
        let mut tries = 0;
        loop {
            let cand: Vec<f64> = w.iter().zip(&grad).map(|(wv, g)| wv - lr * g).collect();
            let (cand_loss, cand_grad) =
                logistic_loss_grad(&cand, rows, labels, class_count, lambda);
            if cand_loss <= loss || tries >= 20 {
                w = cand;
                loss = cand_loss;
                grad = cand_grad;
                lr *= 1.05;
                break;
            }
            lr *= 0.5;
            tries += 1;
        }
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-7 || (prev_loss - loss).abs() < 1e-10 * (1.0 + loss.abs()) {
            break;
        }
        prev_loss = loss;
    }
    Ok(w)
}

pub(super) fn fit_logistic(
    train: &Dataset,
    reg: f64,
    budget: &Budget,
) -> Result<LinearModel, OpError> {
    let (means, stds) = standardization(train);
    let rows = standardized_rows(train, &means, &stds);
    let w = gradient_descent(
        &rows,
        train.labels(),
        train.class_count(),
        reg,
        LOGISTIC_EPOCHS,
        budget,
    )?;
    let stride = train.n_features() + 1;
    let weights = (0..train.class_count()).map(|k| w[k * stride..(k + 1) * stride].to_vec()).collect();
    Ok(LinearModel { weights, means, stds })
}

/// One-vs-rest hinge loss with L2, projected subgradient descent (Pegasos-style
/// step sizes and norm projection), deterministic full-batch updates.
pub(super) fn fit_svm(train: &Dataset, reg: f64, budget: &Budget) -> Result<LinearModel, OpError> {
    let (means, stds) = standardization(train);
    let rows = standardized_rows(train, &means, &stds);
    let n = rows.len();
    let m = train.n_features();
    let lambda = reg.max(1e-9);
    let mut weights = Vec::with_capacity(train.class_count());
    for class in 0..train.class_count() {
        budget.check()?;
        let y: Vec<f64> =
            train.labels().iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let mut w = vec![0.0; m + 1];
        for t in 0..SVM_EPOCHS {
            if t % 32 == 0 {
                budget.check()?;
            }
            let lr = 1.0 / (lambda * (t as f64 + 2.0));
            let mut gw = vec![0.0; m + 1];
            for (row, &yi) in rows.iter().zip(&y) {
                let margin = yi * (dot_bias(&w, row, m));
                if margin < 1.0 {
                    for (j, &x) in row.iter().enumerate() {
                        gw[j] -= yi * x;
                    }
                    gw[m] -= yi;
                }
            }
            let inv_n = 1.0 / n as f64;
            for j in 0..m {
                gw[j] = gw[j] * inv_n + lambda * w[j];
            }
            gw[m] *= inv_n;
            for (wv, g) in w.iter_mut().zip(&gw) {
                *wv -= lr * g;
            }
            // project onto the ball ||w|| <= 1/sqrt(lambda)
            let norm: f64 = w[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
            let cap = 1.0 / lambda.sqrt();
            if norm > cap {
                let s = cap / norm;
                for wv in w[..m].iter_mut() {
                    *wv *= s;
                }
            }
        }
        weights.push(w);
    }
    Ok(LinearModel { weights, means, stds })
}

fn dot_bias(w: &[f64], row: &[f64], m: usize) -> f64 {
    let mut s = w[m];
    for (j, &x) in row.iter().enumerate() {
        s += w[j] * x;
    }
    s
}

pub(super) fn predict(model: &LinearModel, ds: &Dataset) -> Vec<usize> {
    let m = ds.n_features();
    (0..ds.n_rows())
        .map(|i| {
            let row: Vec<f64> = ds
                .columns()
                .iter()
                .enumerate()
                .map(|(j, c)| (c[i] - model.means[j]) / model.stds[j])
                .collect();
            let scores: Vec<f64> = model.weights.iter().map(|w| dot_bias(w, &row, m)).collect();
            super::argmax_tie_lowest(&scores)
        })
        .collect()
}

/// Per-feature L2 norm of logistic weights across classes (the RFE ranker).
pub(super) fn feature_weight_norms(ds: &Dataset, budget: &Budget) -> Result<Vec<f64>, OpError> {
    let (means, stds) = standardization(ds);
    let rows = standardized_rows(ds, &means, &stds);
    let w = gradient_descent(
        &rows,
        ds.labels(),
        ds.class_count(),
        RFE_RANKER_REG,
        RFE_RANKER_EPOCHS,
        budget,
    )?;
    let m = ds.n_features();
    let stride = m + 1;
    Ok((0..m)
        .map(|j| {
            (0..ds.class_count()).map(|k| w[k * stride + j].powi(2)).sum::<f64>().sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{predict, train_model, Budget, OperatorKind, ParamValue, Params};
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn reg_params(reg: f64) -> Params {
        let mut p = Params::new();
        p.insert("reg".into(), ParamValue::Real(reg));
        p
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = seeded_rng(11);
        for trial in 0..5 {
            let n = 12;
            let m = 3;
            let classes = 2 + trial % 2;
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
            let dim = classes * (m + 1);
            let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let lambda = 0.3;
            let (_, grad) = logistic_loss_grad(&w, &rows, &labels, classes, lambda);
            let eps = 1e-6;
            for d in 0..dim {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[d] += eps;
                wm[d] -= eps;
                let (lp, _) = logistic_loss_grad(&wp, &rows, &labels, classes, lambda);
                let (lm, _) = logistic_loss_grad(&wm, &rows, &labels, classes, lambda);
                let fd = (lp - lm) / (2.0 * eps);
                let denom = fd.abs().max(grad[d].abs()).max(1e-8);
                assert!(
                    (fd - grad[d]).abs() / denom < 1e-5,
                    "dim {d}: analytic {} vs fd {fd}",
                    grad[d]
                );
            }
        }
    }

    fn threshold_1d(n: usize, seed: u64) -> crate::dataset::Dataset {
        let mut rng = seeded_rng(seed);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let labels: Vec<usize> = xs.iter().map(|&x| usize::from(x >= 0.0)).collect();
        crate::dataset::Dataset::new(vec!["x".into()], vec![xs], labels, None, 2).unwrap()
    }

    #[test]
    fn logistic_separates_threshold_data() {
        let ds = threshold_1d(120, 2);
        let model =
            train_model(OperatorKind::LogisticRegression, &reg_params(0.01), &ds, 0, &Budget::unlimited())
                .unwrap();
        let preds = predict(&model, &ds).unwrap();
        // sign-consistent after convergence, allowing the boundary row
        let errs: usize =
            preds.iter().zip(ds.labels()).filter(|(p, l)| p != l).count();
        assert!(errs <= 2, "{errs} sign inconsistencies");
    }

    #[test]
    fn svm_separates_threshold_data() {
        let ds = threshold_1d(120, 7);
        let model =
            train_model(OperatorKind::LinearSvm, &reg_params(0.01), &ds, 0, &Budget::unlimited())
                .unwrap();
        let preds = predict(&model, &ds).unwrap();
        let errs: usize = preds.iter().zip(ds.labels()).filter(|(p, l)| p != l).count();
        assert!(errs <= 3, "{errs} sign inconsistencies");
    }

    #[test]
    fn multiclass_logistic_learns_three_bands() {
        let mut rng = seeded_rng(8);
        let n = 150;
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let labels: Vec<usize> = xs.iter().map(|&x| (x.floor() as usize).min(2)).collect();
        let ds =
            crate::dataset::Dataset::new(vec!["x".into()], vec![xs], labels, None, 3).unwrap();
        let model =
            train_model(OperatorKind::LogisticRegression, &reg_params(0.001), &ds, 0, &Budget::unlimited())
                .unwrap();
        let preds = predict(&model, &ds).unwrap();
        let acc = preds.iter().zip(ds.labels()).filter(|(p, l)| p == l).count() as f64 / n as f64;
        assert!(acc > 0.85, "band accuracy {acc}");
    }
}
