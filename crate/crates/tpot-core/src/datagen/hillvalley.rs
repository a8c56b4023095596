//! Synthetic hill/valley series: a Gaussian-shaped bump (hill, class 1) or
//! dip (valley, class 0) riding on a random affine baseline, plus optional
//! Gaussian noise. The bump is orthogonalized against the affine basis so a
//! per-row affine fit recovers the baseline exactly at zero noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{standard_normal, DatagenError};
use crate::dataset::Dataset;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HillValleySpec {
    pub series_length: usize,
    pub noise_std: f64,
    pub n_samples: usize,
}

impl HillValleySpec {
    pub fn new(n_samples: usize, series_length: usize, noise_std: f64) -> Self {
        Self { series_length, noise_std, n_samples }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.series_length < 8 {
            return Err(DatagenError::InvalidSpec(format!(
                "series_length {} below minimum 8",
                self.series_length
            )));
        }
        if self.n_samples < 2 {
            return Err(DatagenError::InvalidSpec("need at least 2 samples".into()));
        }
        if self.noise_std < 0.0 {
            return Err(DatagenError::InvalidSpec("noise_std must be non-negative".into()));
        }
        Ok(())
    }
}

/// Orthonormal affine basis over the index grid.
fn affine_basis(len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = len as f64;
    let e0: Vec<f64> = vec![1.0 / n.sqrt(); len];
    let mean = (len as f64 - 1.0) / 2.0;
    let mut e1: Vec<f64> = (0..len).map(|t| t as f64 - mean).collect();
    let norm: f64 = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
    for v in e1.iter_mut() {
        *v /= norm;
    }
    (e0, e1)
}

pub fn generate_hill_valley<R: Rng>(
    spec: &HillValleySpec,
    rng: &mut R,
) -> Result<Dataset, DatagenError> {
    spec.validate()?;
    let len = spec.series_length;
    let lenf = len as f64;
    let (e0, e1) = affine_basis(len);

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.n_samples); len];
    let mut labels: Vec<usize> = Vec::with_capacity(spec.n_samples);
    for sample in 0..spec.n_samples {
        let hill = sample % 2 == 0;
        let center = rng.random_range(0.15 * lenf..0.85 * lenf);
        let width = rng.random_range((lenf / 30.0).max(1.0)..(lenf / 12.0).max(1.5));
        let amplitude = rng.random_range(2.0..8.0);
        let offset = rng.random_range(-10.0..10.0);
        let span = rng.random_range(-20.0..20.0);
        let direction = if hill { 1.0 } else { -1.0 };

        let mut bump: Vec<f64> = (0..len)
            .map(|t| {
                let z = (t as f64 - center) / width;
                (-0.5 * z * z).exp()
            })
            .collect();
        let c0: f64 = bump.iter().zip(&e0).map(|(a, b)| a * b).sum();
        let c1: f64 = bump.iter().zip(&e1).map(|(a, b)| a * b).sum();
        for (t, v) in bump.iter_mut().enumerate() {
            *v -= c0 * e0[t] + c1 * e1[t];
        }

        for (t, col) in columns.iter_mut().enumerate() {
            let baseline = offset + span * (t as f64 / (lenf - 1.0));
            let noise =
                if spec.noise_std > 0.0 { spec.noise_std * standard_normal(rng) } else { 0.0 };
            col.push(baseline + amplitude * direction * bump[t] + noise);
        }
        labels.push(usize::from(hill));
    }
    let names = (0..len).map(|t| format!("t_{t}")).collect();
    Ok(Dataset::new(names, columns, labels, None, 2)?)
}

/// Rule-based oracle: fit the affine baseline per row, classify by whether
/// the residual extremum points up or down. Exact at zero noise.
pub fn rule_oracle(ds: &Dataset) -> Vec<usize> {
    let len = ds.n_features();
    let (e0, e1) = affine_basis(len);
    (0..ds.n_rows())
        .map(|i| {
            let row: Vec<f64> = (0..len).map(|t| ds.column(t)[i]).collect();
            let c0: f64 = row.iter().zip(&e0).map(|(a, b)| a * b).sum();
            let c1: f64 = row.iter().zip(&e1).map(|(a, b)| a * b).sum();
            let mut max_r = f64::NEG_INFINITY;
            let mut min_r = f64::INFINITY;
            for t in 0..len {
                let r = row[t] - c0 * e0[t] - c1 * e1[t];
                max_r = max_r.max(r);
                min_r = min_r.min(r);
            }
            usize::from(max_r > -min_r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::stats;

    #[test]
    fn noiseless_rows_are_exactly_recoverable() {
        let spec = HillValleySpec::new(400, 100, 0.0);
        let mut rng = seeded_rng(15);
        let ds = generate_hill_valley(&spec, &mut rng).unwrap();
        assert_eq!(rule_oracle(&ds), ds.labels());
    }

    #[test]
    fn uci_layout_shape() {
        let spec = HillValleySpec::new(606, 100, 0.0);
        let mut rng = seeded_rng(1);
        let ds = generate_hill_valley(&spec, &mut rng).unwrap();
        assert_eq!(ds.n_rows(), 606);
        assert_eq!(ds.n_features(), 100);
        let counts = ds.class_counts();
        assert_eq!(counts[0] + counts[1], 606);
        assert!((counts[0] as i64 - counts[1] as i64).abs() <= 1);
    }

    #[test]
    fn rows_carry_heterogeneous_baselines() {
        let spec = HillValleySpec::new(60, 64, 0.0);
        let mut rng = seeded_rng(8);
        let ds = generate_hill_valley(&spec, &mut rng).unwrap();
        let row_means: Vec<f64> = (0..ds.n_rows())
            .map(|i| {
                let s: f64 = (0..ds.n_features()).map(|t| ds.column(t)[i]).sum();
                s / ds.n_features() as f64
            })
            .collect();
        assert!(stats::variance(&row_means).sqrt() > 1.0, "row means must differ");
    }

    #[test]
    fn short_series_are_rejected() {
        let spec = HillValleySpec::new(10, 4, 0.0);
        let mut rng = seeded_rng(2);
        assert!(matches!(
            generate_hill_valley(&spec, &mut rng),
            Err(DatagenError::InvalidSpec(_))
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = HillValleySpec::new(50, 32, 0.5);
        let a = generate_hill_valley(&spec, &mut seeded_rng(3)).unwrap();
        let b = generate_hill_valley(&spec, &mut seeded_rng(3)).unwrap();
        assert_eq!(a, b);
    }
}
