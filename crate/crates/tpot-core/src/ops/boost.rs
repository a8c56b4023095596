//! Gradient boosting on multinomial logistic loss: depth-limited regression
//! trees fitted to softmax gradients, histogram split search, Friedman leaf
//! updates. Training loss per stage is recorded on the training fold.

use super::{Budget, OpError};
use crate::dataset::Dataset;

const MAX_BINS: usize = 64;
const LEAF_CLIP: f64 = 4.0;

#[derive(Debug, Clone)]
enum RNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct RegTree {
    nodes: Vec<RNode>,
}

impl RegTree {
    fn eval(&self, ds: &Dataset, row: usize) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                RNode::Leaf { value } => return *value,
                RNode::Split { feature, threshold, left, right } => {
                    at = if ds.column(*feature)[row] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct BoostModel {
    /// stages[s][k] is the stage-s tree for class k.
    stages: Vec<Vec<RegTree>>,
    pub(super) train_losses: Vec<f64>,
    learning_rate: f64,
    class_count: usize,
}

/// Per-feature histogram thresholds: exact midpoints when few distinct
/// values, quantile cuts otherwise.
fn bin_thresholds(col: &[f64]) -> Vec<f64> {
    let mut sorted = col.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    if sorted.len() <= 1 {
        return Vec::new();
    }
    if sorted.len() <= MAX_BINS {
        return sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let mut out = Vec::with_capacity(MAX_BINS - 1);
    for b in 1..MAX_BINS {
        let pos = b * (sorted.len() - 1) / MAX_BINS;
        let t = 0.5 * (sorted[pos] + sorted[pos + 1].min(sorted[pos] + f64::EPSILON + sorted[pos].abs() * 1e-12));
        out.push(if sorted[pos + 1] > sorted[pos] {
            0.5 * (sorted[pos] + sorted[pos + 1])
        } else {
            t
        });
    }
    out.dedup_by(|a, b| a == b);
    out
}

fn bin_of(thresholds: &[f64], x: f64) -> usize {
    // number of thresholds strictly below-or-equal... partition_point gives
    // count of thresholds < x is wrong at equality; splits send x <= t left,
    // so bin = count of thresholds that are < x (x == t stays in left bin)
    thresholds.partition_point(|&t| t < x)
}

struct HistSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn find_hist_split(
    bins: &[Vec<u8>],
    thresholds: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    idx: &[usize],
) -> Option<HistSplit> {
    let n = idx.len();
    if n < 2 {
        return None;
    }
    let total_g: f64 = idx.iter().map(|&i| grad[i]).sum();
    let total_h: f64 = idx.iter().map(|&i| hess[i]).sum();
    let parent_score = total_g * total_g / (total_h + 1e-12);
    let mut best: Option<HistSplit> = None;
    let mut hist_g = [0.0f64; MAX_BINS];
    let mut hist_h = [0.0f64; MAX_BINS];
    let mut hist_n = [0usize; MAX_BINS];
    for (f, th) in thresholds.iter().enumerate() {
        if th.is_empty() {
            continue;
        }
        let nb = th.len() + 1;
        hist_g[..nb].fill(0.0);
        hist_h[..nb].fill(0.0);
        hist_n[..nb].fill(0);
        let fb = &bins[f];
        for &i in idx {
            let b = fb[i] as usize;
            hist_g[b] += grad[i];
            hist_h[b] += hess[i];
            hist_n[b] += 1;
        }
        let mut lg = 0.0;
        let mut lh = 0.0;
        let mut ln = 0usize;
        for b in 0..nb - 1 {
            lg += hist_g[b];
            lh += hist_h[b];
            ln += hist_n[b];
            if ln == 0 || ln == n {
                continue;
            }
            let rg = total_g - lg;
            let rh = total_h - lh;
            let score = lg * lg / (lh + 1e-12) + rg * rg / (rh + 1e-12);
            let gain = score - parent_score;
            if gain > 1e-10 && best.as_ref().map_or(true, |s| gain > s.gain + 1e-15) {
                best = Some(HistSplit { feature: f, threshold: th[b], gain });
            }
        }
    }
    best
}

fn leaf_value(grad: &[f64], hess: &[f64], idx: &[usize], class_count: usize) -> f64 {
    let g: f64 = idx.iter().map(|&i| grad[i]).sum();
    let h: f64 = idx.iter().map(|&i| hess[i]).sum();
    let k = class_count as f64;
    let v = (k - 1.0) / k * g / (h + 1e-12);
    v.clamp(-LEAF_CLIP, LEAF_CLIP)
}

fn fit_reg_tree(
    ds: &Dataset,
    bins: &[Vec<u8>],
    thresholds: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
    class_count: usize,
    budget: &Budget,
) -> Result<RegTree, OpError> {
    let mut nodes: Vec<RNode> = vec![RNode::Leaf { value: 0.0 }];
    let all: Vec<usize> = (0..ds.n_rows()).collect();
    let mut work = vec![(0usize, all, 0usize)];
    while let Some((slot, idx, depth)) = work.pop() {
        budget.check()?;
        let mut done = true;
        if depth < max_depth && idx.len() >= 2 {
            if let Some(split) = find_hist_split(bins, thresholds, grad, hess, &idx) {
                let col = ds.column(split.feature);
                let (li, ri): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| col[i] <= split.threshold);
                if !li.is_empty() && !ri.is_empty() {
                    let l = nodes.len();
                    nodes.push(RNode::Leaf { value: 0.0 });
                    let r = nodes.len();
                    nodes.push(RNode::Leaf { value: 0.0 });
                    nodes[slot] = RNode::Split {
                        feature: split.feature,
                        threshold: split.threshold,
                        left: l,
                        right: r,
                    };
                    work.push((l, li, depth + 1));
                    work.push((r, ri, depth + 1));
                    done = false;
                }
            }
        }
        if done {
            nodes[slot] = RNode::Leaf { value: leaf_value(grad, hess, &idx, class_count) };
        }
    }
    Ok(RegTree { nodes })
}

fn softmax_rows(scores: &[Vec<f64>], probs: &mut [Vec<f64>]) {
    for (s, p) in scores.iter().zip(probs.iter_mut()) {
        let mx = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (k, &v) in s.iter().enumerate() {
            p[k] = (v - mx).exp();
            z += p[k];
        }
        for v in p.iter_mut() {
            *v /= z;
        }
    }
}

pub(super) fn fit(
    train: &Dataset,
    stages: usize,
    learning_rate: f64,
    max_depth: usize,
    budget: &Budget,
) -> Result<BoostModel, OpError> {
    let n = train.n_rows();
    let m = train.n_features();
    let kc = train.class_count();
    let labels = train.labels();

    // histogram passes touch every (feature, row) pair once per tree level;
    // refuse fits that cannot possibly finish within the budget
    let work = (stages as u64)
        .saturating_mul(kc as u64)
        .saturating_mul(max_depth as u64)
        .saturating_mul((m as u64).saturating_mul(n as u64));
    budget.admit_work(work, 500_000)?;

    let thresholds: Vec<Vec<f64>> = train.columns().iter().map(|c| bin_thresholds(c)).collect();
    let mut bins: Vec<Vec<u8>> = Vec::with_capacity(m);
    for (f, col) in train.columns().iter().enumerate() {
        budget.check()?;
        bins.push(col.iter().map(|&x| bin_of(&thresholds[f], x) as u8).collect());
    }

    let mut scores = vec![vec![0.0f64; kc]; n];
    let mut probs = vec![vec![0.0f64; kc]; n];
    let mut grad = vec![0.0f64; n];
    let mut hess = vec![0.0f64; n];
    let mut model = BoostModel {
        stages: Vec::with_capacity(stages),
        train_losses: Vec::with_capacity(stages),
        learning_rate,
        class_count: kc,
    };

    for _stage in 0..stages {
        budget.check()?;
        softmax_rows(&scores, &mut probs);
        let mut stage_trees = Vec::with_capacity(kc);
        for k in 0..kc {
            for i in 0..n {
                let y = if labels[i] == k { 1.0 } else { 0.0 };
                let r = y - probs[i][k];
                grad[i] = r;
                hess[i] = r.abs() * (1.0 - r.abs()).max(1e-6);
            }
            let tree =
                fit_reg_tree(train, &bins, &thresholds, &grad, &hess, max_depth, kc, budget)?;
            for (i, s) in scores.iter_mut().enumerate() {
                s[k] += learning_rate * tree.eval(train, i);
            }
            stage_trees.push(tree);
        }
        model.stages.push(stage_trees);
        // multinomial deviance on the training fold
        softmax_rows(&scores, &mut probs);
        let loss = -(0..n)
            .map(|i| probs[i][labels[i]].max(1e-15).ln())
            .sum::<f64>()
            / n as f64;
        model.train_losses.push(loss);
    }
    Ok(model)
}

pub(super) fn predict(model: &BoostModel, ds: &Dataset) -> Vec<usize> {
    let n = ds.n_rows();
    let kc = model.class_count;
    let mut scores = vec![vec![0.0f64; kc]; n];
    for stage in &model.stages {
        for (k, tree) in stage.iter().enumerate() {
            for (i, s) in scores.iter_mut().enumerate() {
                s[k] += model.learning_rate * tree.eval(ds, i);
            }
        }
    }
    scores.into_iter().map(|s| super::argmax_tie_lowest(&s)).collect()
}
