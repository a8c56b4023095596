//! Degree-2 polynomial feature expansion: bias, originals, squares and
//! pairwise products, (m+1)(m+2)/2 output columns.

use crate::dataset::{unique_name, Dataset};

pub(super) fn apply(ds: &Dataset) -> (Vec<String>, Vec<Vec<f64>>) {
    let n = ds.n_rows();
    let m = ds.n_features();
    let mut names: Vec<String> = Vec::with_capacity((m + 1) * (m + 2) / 2);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(names.capacity());

    names.push(unique_name("bias", ds.feature_names()));
    columns.push(vec![1.0; n]);
    for (name, col) in ds.feature_names().iter().zip(ds.columns()) {
        names.push(name.clone());
        columns.push(col.clone());
    }
    for i in 0..m {
        for j in i..m {
            let tag = if i == j {
                format!("{}^2", ds.feature_names()[i])
            } else {
                format!("{}*{}", ds.feature_names()[i], ds.feature_names()[j])
            };
            names.push(unique_name(&tag, &names));
            let ci = ds.column(i);
            let cj = ds.column(j);
            columns.push(ci.iter().zip(cj).map(|(a, b)| a * b).collect());
        }
    }
    (names, columns)
}

#[cfg(test)]
mod tests {
    use crate::dataset::Dataset;
    use crate::ops::{fit_transform, Budget, OpError, OperatorKind, MAX_OUTPUT_FEATURES};

    #[test]
    fn three_features_expand_to_ten() {
        // enumeration: 1 bias + 3 linear + 3 squares + 3 cross = 10 = (3+1)(3+2)/2
        let ds = Dataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0, 1],
            None,
            2,
        )
        .unwrap();
        let (fitted, out) =
            fit_transform(OperatorKind::PolynomialFeatures, &Default::default(), &ds, &Budget::unlimited())
                .unwrap();
        assert_eq!(out.n_features(), 10);
        assert_eq!(fitted.out_width(), 10);
        // spot-check one cross term: a*c on row 0 = 1*5
        let idx = out.feature_names().iter().position(|n| n == "a*c").unwrap();
        assert_eq!(out.column(idx)[0], 5.0);
        assert_eq!(out.column(0), &[1.0, 1.0]); // bias
    }

    #[test]
    fn expansion_past_cap_is_rejected() {
        let m = 200; // (201*202)/2 = 20301 > cap
        let names = (0..m).map(|j| format!("f{j}")).collect();
        let cols = (0..m).map(|j| vec![j as f64, j as f64 + 1.0]).collect();
        let ds = Dataset::new(names, cols, vec![0, 1], None, 2).unwrap();
        match fit_transform(OperatorKind::PolynomialFeatures, &Default::default(), &ds, &Budget::unlimited())
        {
            Err(OpError::TooWide(w)) => assert!(w > MAX_OUTPUT_FEATURES),
            other => panic!("expected TooWide, got {other:?}"),
        }
    }
}
