//! Principal component analysis via a randomized range finder (Gaussian
//! sketch, power iterations, small symmetric eigendecomposition). A dense
//! covariance eigendecomposition is used for narrow inputs (m <= 64).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Budget, OpError, TransformState};
use crate::dataset::Dataset;

const DENSE_WIDTH_LIMIT: usize = 64;
const OVERSAMPLE: usize = 8;
const POWER_ITERATIONS: usize = 2;

pub(super) fn fit(train: &Dataset, k: usize, budget: &Budget) -> Result<TransformState, OpError> {
    let n = train.n_rows();
    let m = train.n_features();
    // centered covariance has rank at most n-1
    let k_eff = k.min(m).min(n.saturating_sub(1)).max(1);
    let means: Vec<f64> = train.columns().iter().map(|c| crate::stats::mean(c)).collect();

    let components = if m <= DENSE_WIDTH_LIMIT {
        dense_components(train, &means, k_eff, budget)?
    } else {
        randomized_components(train, &means, k_eff, budget)?
    };
    if components.is_empty() {
        return Err(OpError::DegenerateOutput);
    }
    Ok(TransformState::Pca { means, components })
}

pub(super) fn apply(
    ds: &Dataset,
    means: &[f64],
    components: &[Vec<f64>],
) -> (Vec<String>, Vec<Vec<f64>>) {
    let n = ds.n_rows();
    let names = (1..=components.len()).map(|i| format!("pc_{i}")).collect();
    let mut columns = vec![vec![0.0; n]; components.len()];
    for (j, col) in ds.columns().iter().enumerate() {
        let mu = means[j];
        for (c, comp) in components.iter().enumerate() {
            let w = comp[j];
            if w != 0.0 {
                let out = &mut columns[c];
                for (i, &x) in col.iter().enumerate() {
                    out[i] += (x - mu) * w;
                }
            }
        }
    }
    (names, columns)
}

fn dense_components(
    train: &Dataset,
    means: &[f64],
    k: usize,
    budget: &Budget,
) -> Result<Vec<Vec<f64>>, OpError> {
    let m = train.n_features();
    let n = train.n_rows() as f64;
    let mut cov = vec![vec![0.0; m]; m];
    for a in 0..m {
        budget.check()?;
        let ca = train.column(a);
        for b in a..m {
            let cb = train.column(b);
            let mut s = 0.0;
            for i in 0..ca.len() {
                s += (ca[i] - means[a]) * (cb[i] - means[b]);
            }
            cov[a][b] = s / n;
            cov[b][a] = cov[a][b];
        }
    }
    let (vals, vecs) = jacobi_eigh(&cov);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap().then(i.cmp(&j)));
    Ok(order.into_iter().take(k).map(|i| vecs[i].clone()).collect())
}

fn randomized_components(
    train: &Dataset,
    means: &[f64],
    k: usize,
    budget: &Budget,
) -> Result<Vec<Vec<f64>>, OpError> {
    let n = train.n_rows();
    let m = train.n_features();
    let l = (k + OVERSAMPLE).min(m).min(n);

    // fixed internal seed keeps fit_transform deterministic for given inputs
    let mut rng = ChaCha8Rng::seed_from_u64(0x70ca_5eed ^ (k as u64) << 32 ^ m as u64);
    let normal = |rng: &mut ChaCha8Rng| {
        // Box-Muller
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };

    // sketch Y = Xc * Omega, built column-by-column to exploit column storage
    let omega: Vec<Vec<f64>> = (0..l).map(|_| (0..m).map(|_| normal(&mut rng)).collect()).collect();
    let mut y = multiply_centered(train, means, &omega, budget)?; // n x l (column list)

    for _ in 0..POWER_ITERATIONS {
        orthonormalize(&mut y);
        // Z = Xc^T Y  (m x l)
        let z = multiply_centered_transpose(train, means, &y, budget)?;
        y = multiply_centered(train, means, &z, budget)?;
    }
    orthonormalize(&mut y);

    // B = Y^T Xc  (l x m)
    let b = multiply_centered_transpose(train, means, &y, budget)?; // columns of length m, l of them
    // S = B^T B in subspace coordinates: l x l Gram of rows of B... B stored as l columns of len m
    let l_eff = b.len();
    let mut s = vec![vec![0.0; l_eff]; l_eff];
    for a in 0..l_eff {
        for c in a..l_eff {
            let dot: f64 = b[a].iter().zip(&b[c]).map(|(x, y)| x * y).sum();
            s[a][c] = dot;
            s[c][a] = dot;
        }
    }
    let (vals, vecs) = jacobi_eigh(&s);
    let mut order: Vec<usize> = (0..l_eff).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap().then(i.cmp(&j)));

    let mut components = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        // component = normalize(B^T u) where u = eigenvector in subspace coords
        let u = &vecs[idx];
        let mut comp = vec![0.0; m];
        for (a, col) in b.iter().enumerate() {
            let w = u[a];
            if w != 0.0 {
                for (j, &v) in col.iter().enumerate() {
                    comp[j] += w * v;
                }
            }
        }
        let norm: f64 = comp.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for v in comp.iter_mut() {
                *v /= norm;
            }
            components.push(comp);
        }
    }
    Ok(components)
}

/// Xc * W where W is a list of length-m columns; returns list of length-n columns.
fn multiply_centered(
    train: &Dataset,
    means: &[f64],
    w: &[Vec<f64>],
    budget: &Budget,
) -> Result<Vec<Vec<f64>>, OpError> {
    let n = train.n_rows();
    let mut out = vec![vec![0.0; n]; w.len()];
    for (j, col) in train.columns().iter().enumerate() {
        budget.check()?;
        let mu = means[j];
        for (c, wc) in w.iter().enumerate() {
            let coef = wc[j];
            if coef != 0.0 {
                let dst = &mut out[c];
                for (i, &x) in col.iter().enumerate() {
                    dst[i] += (x - mu) * coef;
                }
            }
        }
    }
    Ok(out)
}

/// Xc^T * Y where Y is a list of length-n columns; returns list of length-m columns.
fn multiply_centered_transpose(
    train: &Dataset,
    means: &[f64],
    y: &[Vec<f64>],
    budget: &Budget,
) -> Result<Vec<Vec<f64>>, OpError> {
    let m = train.n_features();
    let mut out = vec![vec![0.0; m]; y.len()];
    for (j, col) in train.columns().iter().enumerate() {
        budget.check()?;
        let mu = means[j];
        for (c, yc) in y.iter().enumerate() {
            let mut s = 0.0;
            for (i, &x) in col.iter().enumerate() {
                s += (x - mu) * yc[i];
            }
            out[c][j] = s;
        }
    }
    Ok(out)
}

/// In-place modified Gram-Schmidt; drops near-null columns.
fn orthonormalize(cols: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut c in cols.drain(..) {
        for k in &kept {
            let dot: f64 = c.iter().zip(k).map(|(a, b)| a * b).sum();
            for (x, y) in c.iter_mut().zip(k) {
                *x -= dot * y;
            }
        }
        let norm: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            for x in c.iter_mut() {
                *x /= norm;
            }
            kept.push(c);
        }
    }
    *cols = kept;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as rows), unsorted.
pub(crate) fn jacobi_eigh(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (mip, miq) = (m[i][p], m[i][q]);
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for j in 0..n {
                    let (mpj, mqj) = (m[p][j], m[q][j]);
                    m[p][j] = c * mpj - s * mqj;
                    m[q][j] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let (vpi, vqi) = (v[p][i], v[q][i]);
                    v[p][i] = c * vpi - s * vqi;
                    v[q][i] = s * vpi + c * vqi;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i][i]).collect();
    (vals, v)
}
