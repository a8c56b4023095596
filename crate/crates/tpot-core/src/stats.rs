//! Small numeric helpers shared across operators and generators.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Linear-interpolated quantile of an unsorted slice, q in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty slice");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// One-way ANOVA F statistic of a feature against integer class labels.
/// Returns 0.0 for degenerate cases (constant feature, single class).
pub fn anova_f(xs: &[f64], labels: &[usize], class_count: usize) -> f64 {
    let n = xs.len();
    if n < 2 || class_count < 2 {
        return 0.0;
    }
    let grand = mean(xs);
    let mut sums = vec![0.0; class_count];
    let mut counts = vec![0usize; class_count];
    for (&x, &c) in xs.iter().zip(labels) {
        sums[c] += x;
        counts[c] += 1;
    }
    let groups = counts.iter().filter(|&&c| c > 0).count();
    if groups < 2 {
        return 0.0;
    }
    let mut ss_between = 0.0;
    for c in 0..class_count {
        if counts[c] > 0 {
            let gm = sums[c] / counts[c] as f64;
            ss_between += counts[c] as f64 * (gm - grand) * (gm - grand);
        }
    }
    let mut ss_within = 0.0;
    for (&x, &c) in xs.iter().zip(labels) {
        let gm = sums[c] / counts[c] as f64;
        ss_within += (x - gm) * (x - gm);
    }
    let df_between = (groups - 1) as f64;
    let df_within = (n - groups) as f64;
    if df_within <= 0.0 {
        return 0.0;
    }
    let msb = ss_between / df_between;
    let msw = ss_within / df_within;
    if msw <= 0.0 {
        // constant within groups: infinite separation unless also constant between
        if msb > 0.0 {
            return f64::MAX / 4.0;
        }
        return 0.0;
    }
    msb / msw
}
