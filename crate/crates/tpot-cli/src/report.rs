//! Experiment report document ("tpot-report/1"): a deterministic body that
//! is byte-identical across reruns with the same seeds, plus a timing
//! section excluded from that guarantee.

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: &str = "tpot-report/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub body: ReportBody,
    pub timing: ReportTiming,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBody {
    pub dataset: String,
    pub arms: Vec<String>,
    pub replicates: usize,
    pub outer_holdout_fraction: f64,
    pub seed: u64,
    pub gp: tpot_core::evolve::GpConfig,
    /// code -> original label string, recorded at ingestion
    pub label_mapping: Vec<String>,
    /// replicate semantics note: one source dataset, re-seeded outer splits
    pub replicate_note: String,
    pub taint_check: String,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<FailureRecord>,
    pub summary: Vec<ArmSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub arm: String,
    pub replicate: usize,
    pub holdout_accuracy: f64,
    pub pipeline_size: usize,
    pub internal_accuracy: f64,
    pub pipeline: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub arm: String,
    pub replicate: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: String,
    pub n: usize,
    pub median_accuracy: f64,
    /// 95% median confidence interval by the notch formula
    /// median +- 1.57 * IQR / sqrt(n).
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_size: f64,
    pub median_size: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportTiming {
    pub total_millis: u64,
    pub per_record: Vec<RecordTiming>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordTiming {
    pub arm: String,
    pub replicate: usize,
    pub run_millis: u64,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Notch interval: median +- 1.57 * IQR / sqrt(n).
pub fn median_confidence_interval(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = median(&v);
    let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
    let half = 1.57 * iqr / (v.len() as f64).sqrt();
    (med, med - half, med + half)
}

pub fn summarize_arm(arm: &str, records: &[&ReplicateRecord]) -> ArmSummary {
    let accs: Vec<f64> = records.iter().map(|r| r.holdout_accuracy).collect();
    let sizes: Vec<f64> = records.iter().map(|r| r.pipeline_size as f64).collect();
    let (med, lo, hi) = median_confidence_interval(&accs);
    ArmSummary {
        arm: arm.to_string(),
        n: records.len(),
        median_accuracy: med,
        ci_low: lo,
        ci_high: hi,
        mean_size: sizes.iter().sum::<f64>() / sizes.len() as f64,
        median_size: median(&sizes),
    }
}

/// Per-replicate CSV lines: arm,replicate,accuracy,size.
pub fn records_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::from("arm,replicate,accuracy,size\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.arm, r.replicate, r.holdout_accuracy, r.pipeline_size
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notch_interval_is_symmetric_and_deterministic() {
        let v = [0.6, 0.7, 0.8, 0.65, 0.72, 0.9];
        let (m1, lo1, hi1) = median_confidence_interval(&v);
        let (m2, lo2, hi2) = median_confidence_interval(&v);
        assert_eq!((m1, lo1, hi1), (m2, lo2, hi2));
        assert!((m1 - lo1 - (hi1 - m1)).abs() < 1e-12);
    }

    #[test]
    fn identical_values_collapse_the_notch() {
        let v = [0.5; 8];
        let (m, lo, hi) = median_confidence_interval(&v);
        assert_eq!(m, 0.5);
        assert_eq!(lo, 0.5);
        assert_eq!(hi, 0.5);
    }
}
