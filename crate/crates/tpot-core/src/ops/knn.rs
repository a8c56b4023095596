//! k-nearest neighbors: stored training rows, Euclidean metric, majority
//! vote. Distance ties prefer the earlier training row; vote ties the lowest
//! class id.

use crate::dataset::Dataset;

#[derive(Debug, Clone)]
pub(super) struct KnnModel {
    rows: Vec<f64>, // row-major n x m
    labels: Vec<usize>,
    k: usize,
    class_count: usize,
    n: usize,
    m: usize,
}

pub(super) fn fit(train: &Dataset, k: usize) -> KnnModel {
    let n = train.n_rows();
    let m = train.n_features();
    let mut rows = vec![0.0; n * m];
    for (j, col) in train.columns().iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            rows[i * m + j] = x;
        }
    }
    KnnModel {
        rows,
        labels: train.labels().to_vec(),
        k: k.min(n).max(1),
        class_count: train.class_count(),
        n,
        m,
    }
}

pub(super) fn predict(model: &KnnModel, ds: &Dataset) -> Vec<usize> {
    let m = model.m;
    let k = model.k.min(model.n);
    let mut query = vec![0.0; m];
    let mut head: Vec<(f64, usize)> = Vec::with_capacity(k);
    (0..ds.n_rows())
        .map(|i| {
            for (j, col) in ds.columns().iter().enumerate() {
                query[j] = col[i];
            }
            head.clear();
            // iterate train rows in index order: a candidate tying the
            // current worst can never displace it, which keeps the
            // earlier-row tie rule intact and allows early abandoning;
            // distances accumulate in blocks so the abandon check stays out
            // of the vectorizable inner loop
            let mut worst = f64::INFINITY;
            for t in 0..model.n {
                let row = &model.rows[t * m..(t + 1) * m];
                let mut d = 0.0;
                let full = head.len() == k;
                for (block_row, block_q) in row.chunks(64).zip(query.chunks(64)) {
                    let mut partial = 0.0;
                    for (a, b) in block_row.iter().zip(block_q) {
                        let diff = a - b;
                        partial += diff * diff;
                    }
                    d += partial;
                    if full && d >= worst {
                        d = f64::INFINITY;
                        break;
                    }
                }
                if head.len() < k {
                    if d.is_finite() {
                        head.push((d, t));
                        if head.len() == k {
                            worst =
                                head.iter().map(|&(x, _)| x).fold(f64::NEG_INFINITY, f64::max);
                        }
                    }
                } else if d < worst {
                    let (pos, _) = head
                        .iter()
                        .enumerate()
                        .max_by(|a, b| {
                            a.1 .0.partial_cmp(&b.1 .0).unwrap().then(a.1 .1.cmp(&b.1 .1))
                        })
                        .unwrap();
                    head[pos] = (d, t);
                    worst = head.iter().map(|&(x, _)| x).fold(f64::NEG_INFINITY, f64::max);
                }
            }
            let mut votes = vec![0usize; model.class_count];
            for &(_, t) in head.iter() {
                votes[model.labels[t]] += 1;
            }
            let mut best = 0;
            for c in 1..model.class_count {
                if votes[c] > votes[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use crate::dataset::Dataset;
    use crate::ops::{predict, train_model, Budget, OperatorKind, ParamValue, Params};
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn knn_params(k: i64) -> Params {
        let mut p = Params::new();
        p.insert("k".into(), ParamValue::Int(k));
        p
    }

    #[test]
    fn one_neighbor_reproduces_training_labels() {
        let mut rng = seeded_rng(14);
        let n = 60;
        let cols: Vec<Vec<f64>> =
            (0..3).map(|_| (0..n).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let names = (0..3).map(|j| format!("f{j}")).collect();
        let ds = Dataset::new(names, cols, labels, None, 3).unwrap();
        let model =
            train_model(OperatorKind::Knn, &knn_params(1), &ds, 0, &Budget::unlimited()).unwrap();
        assert_eq!(predict(&model, &ds).unwrap(), ds.labels());
    }

    #[test]
    fn vote_ties_break_to_lowest_class() {
        // two train points equidistant from the query, different classes
        let ds = Dataset::new(
            vec!["x".into()],
            vec![vec![-1.0, 1.0]],
            vec![1, 0],
            None,
            2,
        )
        .unwrap();
        let model =
            train_model(OperatorKind::Knn, &knn_params(2), &ds, 0, &Budget::unlimited()).unwrap();
        let query =
            Dataset::new(vec!["x".into()], vec![vec![0.0, 0.0]], vec![0, 1], None, 2).unwrap();
        assert_eq!(predict(&model, &query).unwrap(), vec![0, 0]);
    }

    #[test]
    fn k_clamps_to_training_size() {
        let ds = Dataset::new(
            vec!["x".into()],
            vec![vec![0.0, 1.0, 2.0]],
            vec![0, 1, 1],
            None,
            2,
        )
        .unwrap();
        let model =
            train_model(OperatorKind::Knn, &knn_params(50), &ds, 0, &Budget::unlimited()).unwrap();
        // all three neighbors vote: class 1 wins everywhere
        assert_eq!(predict(&model, &ds).unwrap(), vec![1, 1, 1]);
    }
}
