//! Synthetic-data selection on feature matrices: PCA reduction, greedy
//! covariance matching, alpha matching (direct optimization of the
//! under-parameterized risk objective), the baseline selectors, and
//! distribution-shift metrics.

mod kmeans;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::rng_from_seed;

/// Row-identified feature vectors.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    data: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<String>, data: Array2<f64>) -> Result<Self> {
        if ids.len() != data.nrows() {
            return Err(Error::data(format!(
                "{} ids for {} rows",
                ids.len(),
                data.nrows()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::data(format!("duplicate row id '{id}'")));
            }
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::data(
                "feature matrix has non-finite entries".to_string(),
            ));
        }
        Ok(FeatureMatrix { ids, data })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }
}

/// Mean and top-k principal directions of a reference set.
#[derive(Debug, Clone)]
pub struct PCAModel {
    pub mean: Array1<f64>,
    /// `k x d`, rows orthonormal, ordered by decreasing explained variance.
    pub components: Array2<f64>,
    pub explained_variance: Array1<f64>,
    pub k: usize,
}

impl PCAModel {
    /// Project rows of `x` as `components (x - mean)`.
    pub fn project(&self, x: &Array2<f64>) -> Array2<f64> {
        (x - &self.mean).dot(&self.components.t())
    }
}

/// Fit PCA on a reference set: mean-center, take the top-k right singular
/// directions.
pub fn fit_pca(reference: &FeatureMatrix, k: usize) -> Result<PCAModel> {
    let (n, d) = reference.data.dim();
    if n == 0 {
        return Err(Error::data(
            "cannot fit PCA on an empty reference".to_string(),
        ));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::param(format!(
            "PCA dimension must satisfy 1 <= k <= min(n, d) = {}, got {k}",
            n.min(d)
        )));
    }
    let mean = reference.data.mean_axis(Axis(0)).expect("nonempty");
    let centered = &reference.data - &mean;
    if centered.iter().all(|&v| v == 0.0) {
        return Err(Error::data(
            "degenerate reference: all rows are identical, PCA undefined".to_string(),
        ));
    }
    let svd = linalg::thin_svd(&centered)?;
    let components = svd.vt.slice(ndarray::s![..k, ..]).to_owned();
    let explained_variance = Array1::from_iter(svd.s.iter().take(k).map(|&s| s * s / n as f64));
    Ok(PCAModel {
        mean,
        components,
        explained_variance,
        k,
    })
}

/// Centered sample covariance with denominator `m` (the row count), so a
/// single row yields the zero matrix.
pub fn sample_covariance(rows: ArrayView2<'_, f64>) -> Array2<f64> {
    let m = rows.nrows();
    assert!(m >= 1, "sample covariance needs at least one row");
    let mean = rows.mean_axis(Axis(0)).expect("nonempty");
    let centered = &rows - &mean;
    centered.t().dot(&centered) / m as f64
}

/// An ordered selection of pool rows with per-step objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub indices: Vec<usize>,
    /// Per-step objective; NaN for purely random methods.
    pub objective_trace: Vec<f64>,
    pub method: String,
    pub seed: u64,
}

/// Running first/second moment accumulators for incremental covariance
/// evaluation during greedy selection.
struct MomentState {
    count: usize,
    sum: Array1<f64>,
    outer: Array2<f64>,
}

impl MomentState {
    fn new(d: usize) -> Self {
        MomentState {
            count: 0,
            sum: Array1::zeros(d),
            outer: Array2::zeros((d, d)),
        }
    }

    fn add(&mut self, x: ArrayView1<'_, f64>) {
        self.count += 1;
        for (i, &xi) in x.iter().enumerate() {
            self.sum[i] += xi;
            for (j, &xj) in x.iter().enumerate() {
                self.outer[[i, j]] += xi * xj;
            }
        }
    }

    /// Frobenius distance between the covariance of the current set plus
    /// one candidate row and `target`.
    fn cov_distance_with(&self, x: ArrayView1<'_, f64>, target: &Array2<f64>) -> f64 {
        let m = (self.count + 1) as f64;
        let d = x.len();
        let mut acc = 0.0;
        for i in 0..d {
            let mean_i = (self.sum[i] + x[i]) / m;
            for j in 0..d {
                let mean_j = (self.sum[j] + x[j]) / m;
                let second = (self.outer[[i, j]] + x[i] * x[j]) / m;
                let c = second - mean_i * mean_j - target[[i, j]];
                acc += c * c;
            }
        }
        acc.sqrt()
    }

    /// Covariance of the current set plus one candidate row.
    fn cov_with(&self, x: ArrayView1<'_, f64>) -> Array2<f64> {
        let m = (self.count + 1) as f64;
        let d = x.len();
        Array2::from_shape_fn((d, d), |(i, j)| {
            let mean_i = (self.sum[i] + x[i]) / m;
            let mean_j = (self.sum[j] + x[j]) / m;
            (self.outer[[i, j]] + x[i] * x[j]) / m - mean_i * mean_j
        })
    }
}

fn project_pair(
    real: &FeatureMatrix,
    pool: &FeatureMatrix,
    pca_dim: Option<usize>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if real.dim() != pool.dim() {
        return Err(Error::data(format!(
            "feature dimensions differ: real {} vs pool {}",
            real.dim(),
            pool.dim()
        )));
    }
    match pca_dim {
        Some(k) => {
            let pca = fit_pca(real, k)?;
            Ok((pca.project(real.data()), pca.project(pool.data())))
        }
        None => Ok((real.data.clone(), pool.data.clone())),
    }
}

fn check_pool_size(pool: &FeatureMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param(
            "selection size k must be positive".to_string(),
        ));
    }
    if pool.len() < k {
        return Err(Error::data(format!(
            "pool has {} rows, cannot select {k}",
            pool.len()
        )));
    }
    Ok(())
}

/// Greedy covariance matching: grow the selection one row at a time, always
/// adding the candidate minimizing the Frobenius distance between the
/// selected set's sample covariance and the real set's. Ties break toward
/// the lowest pool index.
pub fn select_cov_match(
    real: &FeatureMatrix,
    pool: &FeatureMatrix,
    k: usize,
    pca_dim: Option<usize>,
) -> Result<SelectionResult> {
    check_pool_size(pool, k)?;
    if real.len() < 2 {
        return Err(Error::data("need at least 2 real rows".to_string()));
    }
    let (real_proj, pool_proj) = project_pair(real, pool, pca_dim)?;
    let target = sample_covariance(real_proj.view());

    let d = pool_proj.ncols();
    let mut state = MomentState::new(d);
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..pool.len()).collect();

    for _ in 0..k {
        let (best_pos, best_obj) = remaining
            .par_iter()
            .enumerate()
            .map(|(pos, &idx)| {
                let obj = state.cov_distance_with(pool_proj.row(idx), &target);
                (pos, obj)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("remaining pool is nonempty");
        let idx = remaining.remove(best_pos);
        state.add(pool_proj.row(idx));
        selected.push(idx);
        trace.push(best_obj);
    }
    Ok(SelectionResult {
        indices: selected,
        objective_trace: trace,
        method: "cov-match".to_string(),
        seed: 0,
    })
}

/// Under-parameterized risk objective for a candidate spectrum, without the
/// noise-variance prefactor: `(1/n) sum_i 1/(lambda_i a1 + a2)`.
///
/// Unlike the strict fixed-point solver, this accepts zero eigenvalues
/// (rank-deficient sample covariances early in the greedy growth);
/// degenerate instances where the fixed point is pushed to the
/// `alpha2 = 0` boundary with a singular spectrum evaluate to infinity.
pub fn alpha_match_objective(spectrum: &[f64], n: usize, n_s: usize) -> f64 {
    let p = spectrum.len();
    let nf = n as f64;
    let upper = 1.0 - p as f64 / nf;
    debug_assert!(upper > 0.0 && n_s >= 1 && n_s <= n);
    let f = |a1: f64| -> f64 {
        let a2 = upper - a1;
        let sum: f64 = spectrum
            .iter()
            .map(|&l| if l > 0.0 { l * a1 / (l * a1 + a2) } else { 0.0 })
            .sum();
        a1 + sum / nf - n_s as f64 / nf
    };
    let (mut lo, mut hi) = (0.0f64, upper);
    if f(hi) <= 0.0 {
        // Root at the boundary: objective diverges if the spectrum is
        // singular, otherwise evaluate there.
        if spectrum.iter().any(|&l| l <= 0.0) {
            return f64::INFINITY;
        }
        let sum: f64 = spectrum.iter().map(|&l| 1.0 / (l * upper)).sum();
        return sum / nf;
    }
    let mut mid = 0.5 * upper;
    for _ in 0..200 {
        let fm = f(mid);
        if fm.abs() <= 1e-12 {
            break;
        }
        if fm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        mid = 0.5 * (lo + hi);
    }
    let a2 = upper - mid;
    let sum: f64 = spectrum.iter().map(|&l| 1.0 / (l * mid + a2)).sum();
    sum / nf
}

/// Inverse symmetric square root of the target covariance, with one round
/// of diagonal jitter (`1e-8 Tr / d`) if it is numerically singular.
fn target_inv_sqrt(target: &Array2<f64>) -> Result<Array2<f64>> {
    let d = target.nrows();
    let singular = |m: &Array2<f64>| -> Result<bool> {
        let eig = linalg::sym_eigenvalues(m)?;
        let max = eig.iter().fold(0.0f64, |a, &v| a.max(v));
        Ok(max <= 0.0 || eig[0] <= 1e-12 * max)
    };
    if !singular(target)? {
        return linalg::sym_inv_sqrt(target);
    }
    let jitter = 1e-8 * target.diag().sum() / d as f64;
    let bumped = target + &(Array2::<f64>::eye(d) * jitter);
    if singular(&bumped)? {
        return Err(Error::numerical(
            "target covariance is singular even after jitter".to_string(),
        ));
    }
    linalg::sym_inv_sqrt(&bumped)
}

/// Greedy alpha matching: at each step pick the candidate minimizing the
/// under-parameterized limit-risk objective of the whitened candidate
/// covariance spectrum, with running counts `n = n_t + |S| + 1`,
/// `n_s = |S| + 1`, and `p` the projected dimension.
pub fn select_alpha_match(
    real: &FeatureMatrix,
    pool: &FeatureMatrix,
    k: usize,
    pca_dim: Option<usize>,
    n_t: usize,
) -> Result<SelectionResult> {
    check_pool_size(pool, k)?;
    if real.len() < 2 {
        return Err(Error::data("need at least 2 real rows".to_string()));
    }
    let (real_proj, pool_proj) = project_pair(real, pool, pca_dim)?;
    let d = pool_proj.ncols();
    if n_t < d {
        return Err(Error::param(format!(
            "alpha matching needs n_t + |S| + 1 > p at every step: n_t = {n_t}, p = {d}"
        )));
    }
    let target = sample_covariance(real_proj.view());
    let whiten = target_inv_sqrt(&target)?;

    let mut state = MomentState::new(d);
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..pool.len()).collect();

    for step in 0..k {
        let n = n_t + step + 1;
        let n_s = step + 1;
        let scored: Vec<(usize, f64)> = remaining
            .par_iter()
            .enumerate()
            .map(|(pos, &idx)| -> Result<(usize, f64)> {
                let cand_cov = state.cov_with(pool_proj.row(idx));
                let mut w = whiten.dot(&cand_cov).dot(&whiten);
                w = (&w + &w.t()) / 2.0;
                let eig = linalg::sym_eigenvalues(&w)?;
                // Clamp eigensolver round-off below zero.
                let spectrum: Vec<f64> = eig.iter().map(|&l| l.max(0.0)).collect();
                Ok((pos, alpha_match_objective(&spectrum, n, n_s)))
            })
            .collect::<Result<Vec<_>>>()?;
        let (best_pos, best_obj) = scored
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("remaining pool is nonempty");
        let idx = remaining.remove(best_pos);
        state.add(pool_proj.row(idx));
        selected.push(idx);
        trace.push(best_obj);
    }
    Ok(SelectionResult {
        indices: selected,
        objective_trace: trace,
        method: "alpha-match".to_string(),
        seed: 0,
    })
}

/// Baseline selection methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Random,
    CenterMatch,
    CenterSample,
    Kmeans,
    Ds3,
    RefMatch,
    RefSample,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Random => "random",
            BaselineMethod::CenterMatch => "center-match",
            BaselineMethod::CenterSample => "center-sample",
            BaselineMethod::Kmeans => "kmeans",
            BaselineMethod::Ds3 => "ds3",
            BaselineMethod::RefMatch => "ref-match",
            BaselineMethod::RefSample => "ref-sample",
        }
    }
}

fn cosine_to(reference: &Array1<f64>, row: ArrayView1<'_, f64>) -> f64 {
    let rn = reference.dot(reference).sqrt();
    let xn = row.dot(&row).sqrt();
    if rn == 0.0 || xn == 0.0 {
        0.0
    } else {
        reference.dot(&row) / (rn * xn)
    }
}

/// k distinct uniform indices, in draw order (partial Fisher-Yates).
fn sample_without_replacement(
    pool: usize,
    k: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..pool).collect();
    for i in 0..k {
        let j = rng.gen_range(i..pool);
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}

/// Weighted sampling without replacement by sequential draws.
fn weighted_without_replacement(
    weights: &[f64],
    k: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    let mut live: Vec<usize> = (0..weights.len()).collect();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = live.iter().map(|&i| weights[i]).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut chosen_pos = live.len() - 1;
        for (pos, &i) in live.iter().enumerate() {
            u -= weights[i];
            if u <= 0.0 {
                chosen_pos = pos;
                break;
            }
        }
        picked.push(live.remove(chosen_pos));
    }
    picked
}

/// Dispatch a baseline selector. Cosine-similarity methods operate on raw
/// L2-normalized features; clustering methods on raw features. `_pca_dim`
/// is accepted for interface symmetry with the matching selectors but the
/// baselines do not project.
pub fn select_baseline(
    method: BaselineMethod,
    real: &FeatureMatrix,
    pool: &FeatureMatrix,
    k: usize,
    _pca_dim: Option<usize>,
    rng_seed: u64,
    reference_vector: Option<&Array1<f64>>,
) -> Result<SelectionResult> {
    check_pool_size(pool, k)?;
    if real.dim() != pool.dim() {
        return Err(Error::data("feature dimensions differ".to_string()));
    }
    let mut rng = rng_from_seed(rng_seed);
    let nan = f64::NAN;

    let finish = |indices: Vec<usize>, trace: Vec<f64>| SelectionResult {
        indices,
        objective_trace: trace,
        method: method.name().to_string(),
        seed: rng_seed,
    };

    let reference = |required_by: &str| -> Result<Array1<f64>> {
        match method {
            BaselineMethod::RefMatch | BaselineMethod::RefSample => {
                let v = reference_vector.ok_or_else(|| {
                    Error::param(format!("{required_by} requires a reference vector"))
                })?;
                if v.len() != pool.dim() {
                    return Err(Error::data(format!(
                        "reference vector length {} does not match feature dim {}",
                        v.len(),
                        pool.dim()
                    )));
                }
                Ok(v.clone())
            }
            _ => {
                if real.is_empty() {
                    return Err(Error::data("real set is empty".to_string()));
                }
                Ok(real.data().mean_axis(Axis(0)).expect("nonempty"))
            }
        }
    };

    match method {
        BaselineMethod::Random => {
            let indices = sample_without_replacement(pool.len(), k, &mut rng);
            let trace = vec![nan; k];
            Ok(finish(indices, trace))
        }
        BaselineMethod::CenterMatch | BaselineMethod::RefMatch => {
            let c = reference(method.name())?;
            let mut sims: Vec<(usize, f64)> = (0..pool.len())
                .map(|i| (i, cosine_to(&c, pool.data().row(i))))
                .collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            sims.truncate(k);
            let (indices, trace): (Vec<usize>, Vec<f64>) = sims.into_iter().unzip();
            Ok(finish(indices, trace))
        }
        BaselineMethod::CenterSample | BaselineMethod::RefSample => {
            let c = reference(method.name())?;
            let weights: Vec<f64> = (0..pool.len())
                .map(|i| cosine_to(&c, pool.data().row(i)).max(0.0) + 1e-12)
                .collect();
            let indices = weighted_without_replacement(&weights, k, &mut rng);
            let trace = indices.iter().map(|&i| weights[i]).collect();
            Ok(finish(indices, trace))
        }
        BaselineMethod::Kmeans => {
            let res = kmeans::kmeans(pool.data().view(), k, &mut rng, 100, 1e-6);
            let mut indices = Vec::with_capacity(k);
            for c in 0..k {
                let members: Vec<usize> = (0..pool.len())
                    .filter(|&i| res.assignment[i] == c)
                    .collect();
                // Re-seeding guarantees no empty cluster survives.
                let pick = members[rng.gen_range(0..members.len())];
                indices.push(pick);
            }
            let trace = vec![nan; k];
            Ok(finish(indices, trace))
        }
        BaselineMethod::Ds3 => {
            if real.is_empty() {
                return Err(Error::data("real set is empty".to_string()));
            }
            let clusters = 200.min(pool.len());
            let res = kmeans::kmeans(pool.data().view(), clusters, &mut rng, 100, 1e-6);
            // Retain every cluster nearest to at least one real row.
            let mut retained = vec![false; clusters];
            for r in 0..real.len() {
                let row = real.data().row(r);
                let mut best = 0usize;
                let mut best_val = f64::INFINITY;
                for c in 0..clusters {
                    let center = res.centers.row(c);
                    let d2: f64 = row
                        .iter()
                        .zip(center.iter())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    if d2 < best_val {
                        best_val = d2;
                        best = c;
                    }
                }
                retained[best] = true;
            }
            let members: Vec<usize> = (0..pool.len())
                .filter(|&i| retained[res.assignment[i]])
                .collect();
            let rest: Vec<usize> = (0..pool.len())
                .filter(|&i| !retained[res.assignment[i]])
                .collect();
            let mut indices = if members.len() >= k {
                let picks = sample_without_replacement(members.len(), k, &mut rng);
                picks.into_iter().map(|p| members[p]).collect::<Vec<_>>()
            } else {
                // Shortfall: take every retained member, fill from the rest.
                let mut all = members.clone();
                let fill = k - members.len();
                let picks = sample_without_replacement(rest.len(), fill, &mut rng);
                all.extend(picks.into_iter().map(|p| rest[p]));
                all
            };
            indices.truncate(k);
            let trace = vec![nan; k];
            Ok(finish(indices, trace))
        }
    }
}

/// Frobenius distance between the sample covariances of two feature sets.
pub fn covariance_shift(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::data(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::data(
            "cannot compute covariance of an empty set".to_string(),
        ));
    }
    let ca = sample_covariance(a.data().view());
    let cb = sample_covariance(b.data().view());
    Ok(linalg::frobenius_norm(&(&ca - &cb)))
}

/// Euclidean distance between the means of two feature sets.
pub fn mean_shift(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::data(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::data(
            "cannot compute the mean of an empty set".to_string(),
        ));
    }
    let ma = a.data().mean_axis(Axis(0)).expect("nonempty");
    let mb = b.data().mean_axis(Axis(0)).expect("nonempty");
    let d = &ma - &mb;
    Ok(d.dot(&d).sqrt())
}

/// Restrict a feature matrix to the given rows, in order.
pub fn take_rows(fm: &FeatureMatrix, indices: &[usize]) -> Result<FeatureMatrix> {
    let mut ids = Vec::with_capacity(indices.len());
    let mut data = Array2::zeros((indices.len(), fm.dim()));
    for (row, &idx) in indices.iter().enumerate() {
        if idx >= fm.len() {
            return Err(Error::data(format!("row index {idx} out of range")));
        }
        ids.push(fm.ids()[idx].clone());
        data.row_mut(row).assign(&fm.data().row(idx));
    }
    FeatureMatrix::new(ids, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fm(data: Array2<f64>) -> FeatureMatrix {
        let ids = (0..data.nrows()).map(|i| format!("r{i}")).collect();
        FeatureMatrix::new(ids, data).unwrap()
    }

    fn random_fm(rows: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = rng_from_seed(seed);
        let data = Array2::from_shape_simple_fn((rows, d), || {
            rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)
        });
        fm(data)
    }

    #[test]
    fn feature_matrix_rejects_duplicates_and_nan() {
        let data = array![[1.0, 2.0], [3.0, 4.0]];
        let err = FeatureMatrix::new(vec!["a".into(), "a".into()], data.clone());
        assert!(matches!(err, Err(Error::Data(_))));
        let bad = array![[1.0, f64::INFINITY]];
        assert!(matches!(
            FeatureMatrix::new(vec!["a".into()], bad),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn pca_full_rank_is_isometry() {
        let reference = random_fm(60, 5, 1);
        let pca = fit_pca(&reference, 5).unwrap();
        let proj = pca.project(reference.data());
        let centered = reference.data() - &reference.data().mean_axis(Axis(0)).unwrap();
        for i in 0..10 {
            for j in (i + 1)..10 {
                let orig = {
                    let d = &centered.row(i) - &centered.row(j);
                    d.dot(&d).sqrt()
                };
                let new = {
                    let d = &proj.row(i) - &proj.row(j);
                    d.dot(&d).sqrt()
                };
                assert!((orig - new).abs() <= 1e-8 * orig.max(1e-12));
            }
        }
        // Orthonormal rows.
        let gram = pca.components.dot(&pca.components.t());
        assert!(linalg::frobenius_norm(&(&gram - &Array2::<f64>::eye(5))) < 1e-10);
    }

    #[test]
    fn pca_rejects_degenerate_reference() {
        let reference = fm(Array2::from_elem((10, 3), 2.5));
        assert!(matches!(fit_pca(&reference, 2), Err(Error::Data(_))));
    }

    #[test]
    fn pca_reconstruction_error_matches_svd_oracle() {
        let reference = random_fm(200, 12, 2);
        let k = 4usize;
        let pca = fit_pca(&reference, k).unwrap();
        let centered = reference.data() - &pca.mean;
        // Direct reconstruction error of the rank-k projection.
        let proj = centered.dot(&pca.components.t()).dot(&pca.components);
        let resid = &centered - &proj;
        let err: f64 = resid.iter().map(|v| v * v).sum();
        // Oracle: sum of discarded squared singular values from a full SVD.
        let svd = linalg::thin_svd(&centered).unwrap();
        let discarded: f64 = svd.s.iter().skip(k).map(|&s| s * s).sum();
        assert!((err - discarded).abs() <= 1e-8 * discarded.max(1.0));
    }

    #[test]
    fn sample_covariance_hand_cases() {
        let single = array![[3.0, -1.0]];
        assert_eq!(sample_covariance(single.view()), Array2::zeros((2, 2)));

        let two = array![[0.0, 0.0], [2.0, 0.0]];
        let cov = sample_covariance(two.view());
        assert_eq!(cov, array![[1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn sample_covariance_matches_two_pass_oracle() {
        let x = random_fm(50, 5, 3);
        let cov = sample_covariance(x.data().view());
        // Naive two-pass oracle.
        let m = 50usize;
        let mut mean = [0.0; 5];
        for i in 0..m {
            for (j, mj) in mean.iter_mut().enumerate() {
                *mj += x.data()[[i, j]] / m as f64;
            }
        }
        for a in 0..5 {
            for b in 0..5 {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += (x.data()[[i, a]] - mean[a]) * (x.data()[[i, b]] - mean[b]);
                }
                acc /= m as f64;
                assert!((cov[[a, b]] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cov_match_forced_selection_is_permutation() {
        let real = random_fm(10, 3, 4);
        let pool = random_fm(6, 3, 5);
        let res = select_cov_match(&real, &pool, 6, None).unwrap();
        let mut sorted = res.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn cov_match_ties_break_low_index() {
        let real = random_fm(8, 2, 6);
        let pool = fm(Array2::from_elem((7, 2), 1.0));
        let res = select_cov_match(&real, &pool, 3, None).unwrap();
        assert_eq!(res.indices, vec![0, 1, 2]);
    }

    #[test]
    fn alpha_match_ties_break_low_index() {
        let real = random_fm(8, 2, 7);
        let pool = fm(Array2::from_elem((7, 2), 1.0));
        let res = select_alpha_match(&real, &pool, 3, None, 8).unwrap();
        assert_eq!(res.indices, vec![0, 1, 2]);
    }

    /// Exhaustive per-step oracle: recompute every candidate objective from
    /// scratch and insist the greedy choice attains the minimum with
    /// lowest-index tie-breaking.
    fn assert_greedy_cov_match_optimal(real: &FeatureMatrix, pool: &FeatureMatrix, k: usize) {
        let res = select_cov_match(real, pool, k, None).unwrap();
        let target = sample_covariance(real.data().view());
        let mut chosen: Vec<usize> = Vec::new();
        for (step, &idx) in res.indices.iter().enumerate() {
            let mut best: Option<(f64, usize)> = None;
            for cand in 0..pool.len() {
                if chosen.contains(&cand) {
                    continue;
                }
                let mut rows = chosen.clone();
                rows.push(cand);
                let sub = take_rows(pool, &rows).unwrap();
                let obj =
                    linalg::frobenius_norm(&(&sample_covariance(sub.data().view()) - &target));
                let better = match best {
                    None => true,
                    Some((bo, bi)) => obj < bo || (obj == bo && cand < bi),
                };
                if better {
                    best = Some((obj, cand));
                }
            }
            let (best_obj, best_idx) = best.unwrap();
            assert_eq!(idx, best_idx, "step {step} picked {idx}, oracle {best_idx}");
            assert!((res.objective_trace[step] - best_obj).abs() <= 1e-12 * best_obj.max(1.0));
            chosen.push(idx);
        }
    }

    #[test]
    fn cov_match_greedy_matches_bruteforce() {
        let real = random_fm(9, 2, 8);
        let pool = random_fm(8, 2, 9);
        assert_greedy_cov_match_optimal(&real, &pool, 3);
    }

    #[test]
    fn baseline_random_forced_and_deterministic() {
        let real = random_fm(4, 2, 10);
        let pool = random_fm(5, 2, 11);
        let res = select_baseline(BaselineMethod::Random, &real, &pool, 5, None, 3, None).unwrap();
        let mut sorted = res.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
        let res2 = select_baseline(BaselineMethod::Random, &real, &pool, 5, None, 3, None).unwrap();
        assert_eq!(res.indices, res2.indices);
    }

    #[test]
    fn center_match_prefers_centroid_direction() {
        // One pool row aligned with the real centroid, others orthogonal.
        let real = fm(array![[2.0, 0.0, 0.0], [4.0, 0.0, 0.0]]);
        let pool = fm(array![[0.0, 1.0, 0.0], [5.0, 0.0, 0.0], [0.0, 0.0, 3.0]]);
        let res =
            select_baseline(BaselineMethod::CenterMatch, &real, &pool, 1, None, 0, None).unwrap();
        assert_eq!(res.indices, vec![1]);
    }

    #[test]
    fn ref_methods_require_reference_vector() {
        let real = random_fm(4, 2, 12);
        let pool = random_fm(6, 2, 13);
        assert!(matches!(
            select_baseline(BaselineMethod::RefMatch, &real, &pool, 2, None, 0, None),
            Err(Error::Param(_))
        ));
        let v = array![1.0, 0.0];
        let res =
            select_baseline(BaselineMethod::RefMatch, &real, &pool, 2, None, 0, Some(&v)).unwrap();
        assert_eq!(res.indices.len(), 2);
    }

    #[test]
    fn ds3_respects_blob_geometry() {
        // Pool: two well-separated blobs; real rows sit across blob A, so
        // every retained cluster lies in blob A and covers at least k rows.
        let mut rows = Vec::new();
        for i in 0..12 {
            rows.push([i as f64 * 0.01, 0.0]);
        }
        for i in 0..12 {
            rows.push([100.0 + i as f64 * 0.01, 0.0]);
        }
        let pool_data = Array2::from_shape_fn((24, 2), |(i, j)| rows[i][j]);
        let pool = fm(pool_data);
        let real_data =
            Array2::from_shape_fn(
                (12, 2),
                |(i, j)| {
                    if j == 0 {
                        i as f64 * 0.01 + 0.001
                    } else {
                        0.0
                    }
                },
            );
        let real = fm(real_data);
        let res = select_baseline(BaselineMethod::Ds3, &real, &pool, 6, None, 5, None).unwrap();
        for &idx in &res.indices {
            assert!(idx < 12, "selected {idx} from the far blob");
        }
    }

    #[test]
    fn kmeans_baseline_selects_one_per_cluster() {
        let pool = random_fm(30, 2, 14);
        let real = random_fm(5, 2, 15);
        let res = select_baseline(BaselineMethod::Kmeans, &real, &pool, 4, None, 2, None).unwrap();
        assert_eq!(res.indices.len(), 4);
        let unique: std::collections::HashSet<_> = res.indices.iter().collect();
        assert_eq!(unique.len(), 4);
    }

    #[test]
    fn covariance_shift_hand_case() {
        let a = fm(array![[0.0, 0.0], [2.0, 0.0]]);
        let b = fm(array![[0.0, 0.0], [0.0, 2.0]]);
        let shift = covariance_shift(&a, &b).unwrap();
        assert!((shift - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(covariance_shift(&a, &a).unwrap(), 0.0);

        let sa = fm(array![[1.0, 2.0]]);
        let sb = fm(array![[5.0, -3.0]]);
        assert_eq!(covariance_shift(&sa, &sb).unwrap(), 0.0);
    }

    #[test]
    fn mean_shift_translation() {
        let a = random_fm(20, 3, 16);
        let v = array![1.0, -2.0, 0.5];
        let b = fm(a.data() + &v);
        let shift = mean_shift(&a, &b).unwrap();
        assert!((shift - v.dot(&v).sqrt()).abs() < 1e-12);
        assert_eq!(mean_shift(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn metrics_reject_dim_mismatch() {
        let a = random_fm(5, 2, 17);
        let b = random_fm(5, 3, 18);
        assert!(matches!(covariance_shift(&a, &b), Err(Error::Data(_))));
        assert!(matches!(mean_shift(&a, &b), Err(Error::Data(_))));
    }

    #[test]
    fn cov_match_translation_invariance() {
        let real = random_fm(30, 4, 19);
        let pool = random_fm(40, 4, 20);
        let res = select_cov_match(&real, &pool, 10, Some(3)).unwrap();
        let v = array![10.0, -5.0, 2.0, 0.25];
        let real_shift = fm(real.data() + &v);
        let pool_shift = fm(pool.data() + &v);
        let res_shift = select_cov_match(&real_shift, &pool_shift, 10, Some(3)).unwrap();
        assert_eq!(res.indices, res_shift.indices);
    }
}
