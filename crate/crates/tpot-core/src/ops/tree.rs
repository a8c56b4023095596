//! CART decision trees with Gini impurity: exact threshold search, optional
//! per-split feature subsampling (random forest), majority-vote prediction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Budget, OpError};
use crate::dataset::Dataset;
use crate::rng::stream_rng;

#[derive(Debug, Clone)]
pub struct CartConfig {
    /// 0 means unlimited depth.
    pub max_depth: usize,
    /// Number of features considered per split; None = all.
    pub feature_subsample: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct CartTree {
    nodes: Vec<Node>,
}

impl CartTree {
    pub fn predict_row(&self, ds: &Dataset, row: usize) -> usize {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    at = if ds.column(*feature)[row] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn majority(labels: &[usize], idx: &[usize], class_count: usize) -> usize {
    let mut counts = vec![0usize; class_count];
    for &i in idx {
        counts[labels[i]] += 1;
    }
    let mut best = 0;
    for c in 1..class_count {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

fn gini_from_counts(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t) * (c as f64 / t)).sum::<f64>()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Exact best Gini split over the candidate features, or None when no split
/// strictly reduces impurity.
fn find_split(
    ds: &Dataset,
    labels: &[usize],
    idx: &[usize],
    class_count: usize,
    features: &[usize],
) -> Option<BestSplit> {
    let n = idx.len();
    let mut total_counts = vec![0usize; class_count];
    for &i in idx {
        total_counts[labels[i]] += 1;
    }
    let parent = gini_from_counts(&total_counts, n);
    if parent <= 0.0 {
        return None;
    }

    let mut best: Option<BestSplit> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &f in features {
        let col = ds.column(f);
        pairs.clear();
        pairs.extend(idx.iter().map(|&i| (col[i], labels[i])));
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        let mut left = vec![0usize; class_count];
        let mut left_n = 0usize;
        for w in 0..n - 1 {
            left[pairs[w].1] += 1;
            left_n += 1;
            if pairs[w].0 == pairs[w + 1].0 {
                continue;
            }
            let right_n = n - left_n;
            let mut right_gini = 1.0;
            let mut acc = 0.0;
            for c in 0..class_count {
                let rc = (total_counts[c] - left[c]) as f64 / right_n as f64;
                acc += rc * rc;
            }
            right_gini -= acc;
            let left_gini = gini_from_counts(&left, left_n);
            let weighted = (left_n as f64 * left_gini + right_n as f64 * right_gini) / n as f64;
            let gain = parent - weighted;
            if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.gain + 1e-15) {
                let threshold = 0.5 * (pairs[w].0 + pairs[w + 1].0);
                best = Some(BestSplit { feature: f, threshold, gain });
            }
        }
    }
    best
}

pub(super) fn fit(
    ds: &Dataset,
    idx: Vec<usize>,
    cfg: &CartConfig,
    rng: Option<&mut ChaCha8Rng>,
    budget: &Budget,
) -> Result<CartTree, OpError> {
    let labels = ds.labels();
    let class_count = ds.class_count();
    let m = ds.n_features();
    let mut nodes: Vec<Node> = Vec::new();
    // (slot, indices, depth)
    let mut work: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    nodes.push(Node::Leaf { class: 0 });
    work.push((0, idx, 0));
    let mut local_rng = rng;

    while let Some((slot, idx, depth)) = work.pop() {
        budget.check()?;
        let depth_ok = cfg.max_depth == 0 || depth < cfg.max_depth;
        let mut assigned = false;
        if depth_ok && idx.len() >= 2 {
            let features: Vec<usize> = match (cfg.feature_subsample, local_rng.as_deref_mut()) {
                (Some(fs), Some(rng)) if fs < m => {
                    let mut all: Vec<usize> = (0..m).collect();
                    for pick in 0..fs {
                        let j = rng.random_range(pick..m);
                        all.swap(pick, j);
                    }
                    let mut chosen = all[..fs].to_vec();
                    chosen.sort_unstable();
                    chosen
                }
                _ => (0..m).collect(),
            };
            if let Some(split) = find_split(ds, labels, &idx, class_count, &features) {
                let col = ds.column(split.feature);
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| col[i] <= split.threshold);
                if !left_idx.is_empty() && !right_idx.is_empty() {
                    let left_slot = nodes.len();
                    nodes.push(Node::Leaf { class: 0 });
                    let right_slot = nodes.len();
                    nodes.push(Node::Leaf { class: 0 });
                    nodes[slot] = Node::Split {
                        feature: split.feature,
                        threshold: split.threshold,
                        left: left_slot,
                        right: right_slot,
                    };
                    work.push((left_slot, left_idx, depth + 1));
                    work.push((right_slot, right_idx, depth + 1));
                    assigned = true;
                }
            }
        }
        if !assigned {
            nodes[slot] = Node::Leaf { class: majority(labels, &idx, class_count) };
        }
    }
    Ok(CartTree { nodes })
}

/// Full-feature CART via per-feature presorted index lists: columns are
/// argsorted once; every split stably partitions each feature's index range
/// in place, so no node re-sorts or allocates. Same splits and tie rules as
/// [`fit`].
pub(super) fn fit_full(
    ds: &Dataset,
    max_depth: usize,
    budget: &Budget,
) -> Result<CartTree, OpError> {
    let labels = ds.labels();
    let class_count = ds.class_count();
    let n = ds.n_rows();

    // lists[f][start..end] holds the node's rows sorted by feature f;
    // sort on order-preserving u64 keys, ties broken by row index
    let mut lists: Vec<Vec<u32>> = ds
        .columns()
        .iter()
        .map(|col| {
            let mut keyed: Vec<(u64, u32)> =
                col.iter().enumerate().map(|(i, &v)| (f64_sort_key(v), i as u32)).collect();
            keyed.sort_unstable();
            keyed.into_iter().map(|(_, i)| i).collect()
        })
        .collect();
    let mut scratch: Vec<u32> = vec![0; n];

    let mut nodes: Vec<Node> = vec![Node::Leaf { class: 0 }];
    let mut work: Vec<(usize, usize, usize, usize)> = vec![(0, 0, n, 0)];
    let mut total_counts = vec![0usize; class_count];
    let mut left = vec![0usize; class_count];

    while let Some((slot, start, end, depth)) = work.pop() {
        budget.check()?;
        let n_node = end - start;
        total_counts.fill(0);
        for &i in &lists[0][start..end] {
            total_counts[labels[i as usize]] += 1;
        }
        let parent = gini_from_counts(&total_counts, n_node);
        let depth_ok = max_depth == 0 || depth < max_depth;

        let mut best: Option<BestSplit> = None;
        if depth_ok && n_node >= 2 && parent > 0.0 {
            for (f, order) in lists.iter().enumerate() {
                let col = ds.column(f);
                let order = &order[start..end];
                if col[order[0] as usize] == col[order[n_node - 1] as usize] {
                    continue;
                }
                left.fill(0);
                let mut left_n = 0usize;
                for w in 0..n_node - 1 {
                    let row = order[w] as usize;
                    left[labels[row]] += 1;
                    left_n += 1;
                    let v = col[row];
                    let v_next = col[order[w + 1] as usize];
                    if v == v_next {
                        continue;
                    }
                    let right_n = n_node - left_n;
                    let mut acc = 0.0;
                    for c in 0..class_count {
                        let rc = (total_counts[c] - left[c]) as f64 / right_n as f64;
                        acc += rc * rc;
                    }
                    let right_gini = 1.0 - acc;
                    let left_gini = gini_from_counts(&left, left_n);
                    let weighted =
                        (left_n as f64 * left_gini + right_n as f64 * right_gini) / n_node as f64;
                    let gain = parent - weighted;
                    if gain > 1e-12 && best.as_ref().map_or(true, |b| gain > b.gain + 1e-15) {
                        best = Some(BestSplit { feature: f, threshold: 0.5 * (v + v_next), gain });
                    }
                }
            }
        }

        match best {
            Some(split) => {
                let split_col = ds.column(split.feature);
                let mut left_n = 0usize;
                for list in lists.iter_mut() {
                    // stable partition of [start..end): left block, then right
                    let range = &mut list[start..end];
                    let mut l = 0usize;
                    let mut r = 0usize;
                    for &row in range.iter() {
                        if split_col[row as usize] <= split.threshold {
                            scratch[l] = row;
                            l += 1;
                        } else {
                            scratch[n_node - 1 - r] = row;
                            r += 1;
                        }
                    }
                    range[..l].copy_from_slice(&scratch[..l]);
                    for (w, slot) in range[l..].iter_mut().enumerate() {
                        *slot = scratch[n_node - 1 - w];
                    }
                    left_n = l;
                }
                if left_n == 0 || left_n == n_node {
                    nodes[slot] = Node::Leaf { class: majority_counts(&total_counts) };
                    continue;
                }
                let left_slot = nodes.len();
                nodes.push(Node::Leaf { class: 0 });
                let right_slot = nodes.len();
                nodes.push(Node::Leaf { class: 0 });
                nodes[slot] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: left_slot,
                    right: right_slot,
                };
                work.push((left_slot, start, start + left_n, depth + 1));
                work.push((right_slot, start + left_n, end, depth + 1));
            }
            None => {
                nodes[slot] = Node::Leaf { class: majority_counts(&total_counts) };
            }
        }
    }
    Ok(CartTree { nodes })
}

/// Monotone mapping of finite f64 to u64: preserves numeric order.
fn f64_sort_key(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 0 {
        bits ^ (1u64 << 63)
    } else {
        !bits
    }
}

fn majority_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for c in 1..counts.len() {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

/// Bagged CART trees with sqrt(m) feature subsampling per split.
pub(super) fn fit_forest(
    ds: &Dataset,
    trees: usize,
    max_depth: usize,
    seed: u64,
    budget: &Budget,
) -> Result<Vec<CartTree>, OpError> {
    let n = ds.n_rows();
    let m = ds.n_features();
    let fs = (m as f64).sqrt().ceil() as usize;
    let cfg = CartConfig { max_depth, feature_subsample: Some(fs.max(1)) };
    let mut out = Vec::with_capacity(trees);
    for t in 0..trees {
        budget.check()?;
        let mut rng = stream_rng(seed, t as u64);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        out.push(fit(ds, idx, &cfg, Some(&mut rng), budget)?);
    }
    Ok(out)
}

pub(super) fn predict_tree(tree: &CartTree, ds: &Dataset) -> Vec<usize> {
    (0..ds.n_rows()).map(|i| tree.predict_row(ds, i)).collect()
}

pub(super) fn predict_forest(trees: &[CartTree], ds: &Dataset, class_count: usize) -> Vec<usize> {
    let n = ds.n_rows();
    let mut votes = vec![vec![0usize; class_count]; n];
    for tree in trees {
        for (i, v) in votes.iter_mut().enumerate() {
            v[tree.predict_row(ds, i)] += 1;
        }
    }
    votes
        .into_iter()
        .map(|v| {
            let mut best = 0;
            for c in 1..class_count {
                if v[c] > v[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}
