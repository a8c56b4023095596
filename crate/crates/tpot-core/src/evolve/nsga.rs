//! NSGA-II building blocks: fast non-dominated sorting over
//! (maximize accuracy, minimize size) and crowding distance with
//! infinite-distance boundary points.

/// `p` dominates `q` iff p is no worse in both objectives and strictly
/// better in at least one.
pub fn dominates(p: (f64, usize), q: (f64, usize)) -> bool {
    let (pa, ps) = p;
    let (qa, qs) = q;
    (pa >= qa && ps <= qs) && (pa > qa || ps < qs)
}

/// Fast non-dominated sort; returns fronts of indices into `points`,
/// front 0 first. O(n^2) dominance counting.
pub fn fast_nondominated_sort(points: &[(f64, usize)]) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(points[p], points[q]) {
                dominated[p].push(q);
            } else if dominates(points[q], points[p]) {
                counts[p] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distances for one front, aligned with `front` order. Boundary
/// points per objective get infinity; a degenerate objective (all values
/// equal) contributes nothing, so duplicated points stay finite rather than
/// dividing by zero.
pub fn crowding_distances(points: &[(f64, usize)], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0f64; k];
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    for objective in 0..2 {
        let value = |i: usize| -> f64 {
            match objective {
                0 => points[front[i]].0,
                _ => points[front[i]].1 as f64,
            }
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            value(a).partial_cmp(&value(b)).unwrap().then(front[a].cmp(&front[b]))
        });
        let lo = value(order[0]);
        let hi = value(order[k - 1]);
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        if hi - lo <= 0.0 {
            continue;
        }
        for w in 1..k - 1 {
            if dist[order[w]].is_finite() {
                dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / (hi - lo);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    /// Brute-force oracle: front 0 = points not dominated by anyone; peel.
    pub(crate) fn brute_force_fronts(points: &[(f64, usize)]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..points.len()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&p| {
                    !remaining.iter().any(|&q| q != p && dominates(points[q], points[p]))
                })
                .collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    fn as_sets(fronts: &[Vec<usize>]) -> Vec<std::collections::BTreeSet<usize>> {
        fronts.iter().map(|f| f.iter().copied().collect()).collect()
    }

    #[test]
    fn single_point_single_front() {
        let fronts = fast_nondominated_sort(&[(0.5, 3)]);
        assert_eq!(fronts, vec![vec![0]]);
    }

    #[test]
    fn hand_example_fronts() {
        // (0.9,2) and (0.8,1) are mutually non-dominated; (0.7,5) dominated by both
        let pts = [(0.9, 2), (0.8, 1), (0.7, 5)];
        let fronts = fast_nondominated_sort(&pts);
        assert_eq!(as_sets(&fronts), as_sets(&brute_force_fronts(&pts)));
        assert_eq!(fronts[0], vec![0, 1]);
        assert_eq!(fronts[1], vec![2]);
    }

    #[test]
    fn duplicated_points_share_a_front_with_finite_interior_crowding() {
        let pts = [(0.5, 2), (0.5, 2), (0.5, 2), (0.5, 2)];
        let fronts = fast_nondominated_sort(&pts);
        assert_eq!(fronts.len(), 1);
        assert_eq!(fronts[0].len(), 4);
        let d = crowding_distances(&pts, &fronts[0]);
        assert!(d.iter().all(|x| !x.is_nan()));
        assert!(d.iter().any(|x| x.is_finite()), "interior duplicates stay finite");
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = seeded_rng(2024);
        for _ in 0..200 {
            let n = rng.random_range(1..60);
            let pts: Vec<(f64, usize)> = (0..n)
                .map(|_| {
                    ((rng.random_range(0..11) as f64) / 10.0, rng.random_range(1..8usize))
                })
                .collect();
            let fast = fast_nondominated_sort(&pts);
            let brute = brute_force_fronts(&pts);
            assert_eq!(as_sets(&fast), as_sets(&brute), "points {pts:?}");
        }
    }

    #[test]
    fn boundary_points_get_infinite_distance() {
        let pts = [(0.9, 5), (0.8, 3), (0.7, 2), (0.6, 1)];
        let fronts = fast_nondominated_sort(&pts);
        assert_eq!(fronts.len(), 1);
        let d = crowding_distances(&pts, &fronts[0]);
        assert!(d[0].is_infinite());
        assert!(d[3].is_infinite());
        assert!(d[1].is_finite() && d[2].is_finite());
    }
}
