//! Case/control SNP dataset simulation from hierarchically combined pure
//! epistatic models.
//!
//! Each two-locus model contributes its penetrance deviation with equal
//! weight; the combined disease probability is
//! `clamp(Kbar + w * sum_m (f_m - K_m))` with `w = 1 / sqrt(n_models)`, which
//! keeps the combined heritability on the scale of the per-model target while
//! every single SNP stays marginally uninformative.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::penetrance::{generate_pure_epistatic_table, genotype_probs, PenetranceTable};
use super::DatagenError;
use crate::dataset::Dataset;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpistasisSpec {
    pub heritability_target: f64,
    pub maf: f64,
    pub n_models: usize,
    pub predictive_snps: usize,
    pub noise_snps: usize,
    pub sample_size: usize,
    pub tolerance: f64,
}

impl EpistasisSpec {
    /// Paper-style defaults: 4 two-locus models over 8 predictive and 92
    /// noise SNPs at maf 0.2.
    pub fn new(heritability_target: f64, sample_size: usize) -> Self {
        Self {
            heritability_target,
            maf: 0.2,
            n_models: 4,
            predictive_snps: 8,
            noise_snps: 92,
            sample_size,
            tolerance: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.predictive_snps != 2 * self.n_models {
            return Err(DatagenError::InvalidSpec(format!(
                "predictive_snps {} must equal 2 * n_models {}",
                self.predictive_snps, self.n_models
            )));
        }
        if self.n_models == 0 || self.sample_size < 4 {
            return Err(DatagenError::InvalidSpec(
                "need at least one model and four samples".into(),
            ));
        }
        if !(self.heritability_target > 0.0 && self.heritability_target < 1.0) {
            return Err(DatagenError::InvalidSpec("heritability target outside (0, 1)".into()));
        }
        Ok(())
    }
}

/// Audit sidecar for a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpistasisMetadata {
    /// Column index of each predictive SNP, ordered by (model, locus).
    pub predictive_positions: Vec<usize>,
    pub tables: Vec<PenetranceTable>,
    /// Empirical prevalence of the combined model (before balancing).
    pub prevalence: f64,
    pub combination_weight: f64,
}

fn draw_genotype<R: Rng>(probs: &[f64; 3], rng: &mut R) -> u8 {
    let r: f64 = rng.random();
    if r < probs[0] {
        0
    } else if r < probs[0] + probs[1] {
        1
    } else {
        2
    }
}

/// Generate the per-model tables and simulate; the usual entry point.
pub fn simulate_epistatic_dataset<R: Rng>(
    spec: &EpistasisSpec,
    rng: &mut R,
) -> Result<(Dataset, EpistasisMetadata), DatagenError> {
    spec.validate()?;
    let mut tables = Vec::with_capacity(spec.n_models);
    for _ in 0..spec.n_models {
        tables.push(generate_pure_epistatic_table(
            spec.heritability_target,
            spec.maf,
            spec.tolerance,
            rng,
        )?);
    }
    simulate_with_tables(spec, tables, rng)
}

/// Simulate with caller-provided penetrance tables (one per model).
pub fn simulate_with_tables<R: Rng>(
    spec: &EpistasisSpec,
    tables: Vec<PenetranceTable>,
    rng: &mut R,
) -> Result<(Dataset, EpistasisMetadata), DatagenError> {
    spec.validate()?;
    if tables.len() != spec.n_models {
        return Err(DatagenError::InvalidSpec(format!(
            "{} tables supplied for {} models",
            tables.len(),
            spec.n_models
        )));
    }
    let n = spec.sample_size;
    let want_case = n / 2;
    let want_ctrl = n - want_case;
    let weight = 1.0 / (spec.n_models as f64).sqrt();
    let k_bar: f64 =
        tables.iter().map(|t| t.prevalence()).sum::<f64>() / spec.n_models as f64;
    let prevalences: Vec<f64> = tables.iter().map(|t| t.prevalence()).collect();
    let pred_probs = genotype_probs(spec.maf);

    // fixed per-SNP noise allele frequencies for the whole dataset
    let noise_mafs: Vec<f64> =
        (0..spec.noise_snps).map(|_| rng.random_range(0.05..=0.5)).collect();

    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(n);
    let mut labels: Vec<usize> = Vec::with_capacity(n);
    let mut cases = 0usize;
    let mut ctrls = 0usize;
    let mut draws = 0usize;
    let max_draws = n.saturating_mul(20_000).max(1_000_000);
    while cases < want_case || ctrls < want_ctrl {
        draws += 1;
        if draws > max_draws {
            return Err(DatagenError::SamplingExhausted(format!(
                "{draws} draws filled {cases}/{want_case} cases, {ctrls}/{want_ctrl} controls"
            )));
        }
        let mut geno = Vec::with_capacity(spec.predictive_snps);
        let mut deviation = 0.0;
        for (m, table) in tables.iter().enumerate() {
            let a = draw_genotype(&pred_probs, rng);
            let b = draw_genotype(&pred_probs, rng);
            geno.push(a);
            geno.push(b);
            deviation += table.cells[a as usize][b as usize] - prevalences[m];
        }
        let prob = (k_bar + weight * deviation).clamp(0.0, 1.0);
        let is_case = rng.random::<f64>() < prob;
        if is_case && cases >= want_case {
            continue;
        }
        if !is_case && ctrls >= want_ctrl {
            continue;
        }
        if is_case {
            cases += 1;
        } else {
            ctrls += 1;
        }
        for maf in &noise_mafs {
            let probs = genotype_probs(*maf);
            geno.push(draw_genotype(&probs, rng));
        }
        rows.push(geno);
        labels.push(usize::from(is_case));
    }

    // shuffle predictive SNPs among the noise columns
    let total_cols = spec.predictive_snps + spec.noise_snps;
    let mut perm: Vec<usize> = (0..total_cols).collect();
    for i in (1..total_cols).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    // perm[src] = destination column of source SNP `src`
    let mut predictive_positions = vec![0usize; spec.predictive_snps];
    for (src, &dst) in perm.iter().enumerate().take(spec.predictive_snps) {
        predictive_positions[src] = dst;
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); total_cols];
    for row in &rows {
        for (src, &g) in row.iter().enumerate() {
            columns[perm[src]].push(g as f64);
        }
    }
    let names = (0..total_cols).map(|i| format!("snp_{i}")).collect();
    let dataset = Dataset::new(names, columns, labels, None, 2)?;
    let metadata = EpistasisMetadata {
        predictive_positions,
        tables,
        prevalence: k_bar,
        combination_weight: weight,
    };
    Ok((dataset, metadata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn paper_shape_has_100_columns() {
        let spec = EpistasisSpec::new(0.2, 200);
        let mut rng = seeded_rng(5);
        let (ds, meta) = simulate_epistatic_dataset(&spec, &mut rng).unwrap();
        assert_eq!(ds.n_features(), 100);
        assert_eq!(ds.n_rows(), 200);
        assert_eq!(meta.predictive_positions.len(), 8);
        assert_eq!(meta.tables.len(), 4);
    }

    #[test]
    fn classes_balance_exactly() {
        let spec = EpistasisSpec::new(0.4, 200);
        let mut rng = seeded_rng(6);
        let (ds, _) = simulate_epistatic_dataset(&spec, &mut rng).unwrap();
        let counts = ds.class_counts();
        assert_eq!(counts, vec![100, 100]);
    }

    #[test]
    fn deterministic_single_model_is_a_lookup_function() {
        // XOR table: penetrance is 0/1, so labels are a deterministic
        // function of the two predictive SNPs and a lookup oracle is perfect
        let table = PenetranceTable {
            maf: 0.5,
            cells: [[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
        };
        let spec = EpistasisSpec {
            heritability_target: 0.9,
            maf: 0.5,
            n_models: 1,
            predictive_snps: 2,
            noise_snps: 18,
            sample_size: 120,
            tolerance: 0.01,
        };
        let mut rng = seeded_rng(12);
        let (ds, meta) = simulate_with_tables(&spec, vec![table.clone()], &mut rng).unwrap();
        let (a_col, b_col) = (meta.predictive_positions[0], meta.predictive_positions[1]);
        let mut correct = 0;
        for i in 0..ds.n_rows() {
            let a = ds.column(a_col)[i] as usize;
            let b = ds.column(b_col)[i] as usize;
            let predicted = table.cells[a][b] as usize;
            if predicted == ds.labels()[i] {
                correct += 1;
            }
        }
        assert_eq!(correct, ds.n_rows(), "lookup oracle must be perfect");
    }

    #[test]
    fn predictive_snps_have_null_marginals() {
        // chi-square of genotype vs class stays near its null expectation
        let spec = EpistasisSpec { sample_size: 50_000, ..EpistasisSpec::new(0.4, 50_000) };
        let mut rng = seeded_rng(31);
        let (ds, meta) = simulate_epistatic_dataset(&spec, &mut rng).unwrap();
        let n = ds.n_rows() as f64;
        let n_case = ds.labels().iter().filter(|&&l| l == 1).count() as f64;
        let n_ctrl = n - n_case;
        for &pos in &meta.predictive_positions {
            let col = ds.column(pos);
            let mut stat = 0.0;
            for g in 0..3 {
                let in_bin =
                    |lbl: usize| -> f64 {
                        col.iter()
                            .zip(ds.labels())
                            .filter(|(&x, &l)| x as usize == g && l == lbl)
                            .count() as f64
                    };
                let (o1, o0) = (in_bin(1), in_bin(0));
                let tot = o1 + o0;
                if tot == 0.0 {
                    continue;
                }
                let e1 = tot * n_case / n;
                let e0 = tot * n_ctrl / n;
                stat += (o1 - e1).powi(2) / e1 + (o0 - e0).powi(2) / e0;
            }
            assert!(stat < 30.0, "marginal association too strong at column {pos}: chi2 {stat}");
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = EpistasisSpec::new(0.2, 100);
        let (a, _) = simulate_epistatic_dataset(&spec, &mut seeded_rng(77)).unwrap();
        let (b, _) = simulate_epistatic_dataset(&spec, &mut seeded_rng(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_invariant_is_enforced() {
        let mut spec = EpistasisSpec::new(0.2, 100);
        spec.predictive_snps = 6;
        let mut rng = seeded_rng(1);
        assert!(matches!(
            simulate_epistatic_dataset(&spec, &mut rng),
            Err(DatagenError::InvalidSpec(_))
        ));
    }
}
