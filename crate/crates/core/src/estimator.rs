//! Min-norm least squares, exact excess risk, bias/variance split, and
//! Monte Carlo risk estimation.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gen::{sample_beta_sphere, CovarianceModel, DatasetSpec, SpecSampler};
use crate::linalg;
use crate::rng::mix_seed;

/// Aggregated Monte Carlo excess-risk estimate.
#[derive(Debug, Clone)]
pub struct RiskEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by sqrt(trials).
    pub std_error: f64,
    pub trials: usize,
    pub per_trial: Option<Vec<f64>>,
}

/// How `beta` is handled across Monte Carlo trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// Use the spec's `beta` in every trial.
    Fixed,
    /// Draw a fresh sphere `beta` per trial with the given radius.
    ResampleSphere { radius: f64 },
}

fn check_finite(x: &Array2<f64>, y: &Array1<f64>) -> Result<()> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::data(
            "design matrix has non-finite entries".to_string(),
        ));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::data(
            "response vector has non-finite entries".to_string(),
        ));
    }
    Ok(())
}

/// Rank cutoff for pseudo-inversion: singular values at or below
/// `max(n, p) * eps * s_max` are treated as zero.
fn rank_cutoff(n: usize, p: usize, s_max: f64) -> f64 {
    n.max(p) as f64 * f64::EPSILON * s_max
}

/// Min-norm least-squares solution `(X^T X)^+ X^T y` via the thin SVD of
/// `X`. The result lies in the row space of `X` and has minimal norm among
/// all least-squares minimizers.
pub fn min_norm_ls(x: &Array2<f64>, y: &Array1<f64>) -> Result<Array1<f64>> {
    let (n, p) = x.dim();
    if n == 0 || p == 0 {
        return Err(Error::param("design matrix must be nonempty".to_string()));
    }
    if y.len() != n {
        return Err(Error::data(format!(
            "response length {} does not match {} rows",
            y.len(),
            n
        )));
    }
    check_finite(x, y)?;
    let svd = linalg::thin_svd(x)?;
    let cut = rank_cutoff(n, p, svd.s[0]);
    let mut coeffs = svd.u.t().dot(y);
    for (c, &s) in coeffs.iter_mut().zip(svd.s.iter()) {
        *c = if s > cut { *c / s } else { 0.0 };
    }
    Ok(svd.vt.t().dot(&coeffs))
}

/// Exact out-of-sample excess risk
/// `(bh - b)^T (Sigma_t + mu_t mu_t^T) (bh - b)`.
pub fn excess_risk(
    beta_hat: &Array1<f64>,
    beta: &Array1<f64>,
    cov_t: &CovarianceModel,
    mu_t: &Array1<f64>,
) -> f64 {
    assert_eq!(beta_hat.len(), beta.len(), "coefficient dimensions differ");
    assert_eq!(beta.len(), cov_t.dim(), "covariance dimension mismatch");
    assert_eq!(beta.len(), mu_t.len(), "mean dimension mismatch");
    let d = beta_hat - beta;
    let quad = d.dot(&cov_t.matrix().dot(&d));
    let mean_term = mu_t.dot(&d);
    quad + mean_term * mean_term
}

/// Closed-form bias and variance of the min-norm estimator given the design:
/// `bias = b^T Pi A Pi b`, `variance = (sigma^2 / n) Tr[ShatP A]` with
/// `A = Sigma_t + mu_t mu_t^T`, `Pi` the projector on the null space of `X`,
/// and `ShatP` the pseudo-inverse of `X^T X / n`.
pub fn bias_variance(
    x: &Array2<f64>,
    beta: &Array1<f64>,
    cov_t: &CovarianceModel,
    mu_t: &Array1<f64>,
    sigma: f64,
) -> Result<(f64, f64)> {
    let (n, p) = x.dim();
    if beta.len() != p || cov_t.dim() != p || mu_t.len() != p {
        return Err(Error::data(
            "dimension mismatch in bias_variance".to_string(),
        ));
    }
    if !beta.iter().all(|v| v.is_finite()) || !mu_t.iter().all(|v| v.is_finite()) {
        return Err(Error::data("non-finite inputs".to_string()));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::data(
            "design matrix has non-finite entries".to_string(),
        ));
    }
    let svd = linalg::thin_svd(x)?;
    let cut = rank_cutoff(n, p, svd.s[0]);

    // Pi beta = beta - V_r V_r^T beta, restricted to retained directions.
    let mut vt_beta = svd.vt.dot(beta);
    for (c, &s) in vt_beta.iter_mut().zip(svd.s.iter()) {
        if s <= cut {
            *c = 0.0;
        }
    }
    let pi_beta = beta - &svd.vt.t().dot(&vt_beta);
    let sig = cov_t.matrix();
    let mean_dot = mu_t.dot(&pi_beta);
    let bias = pi_beta.dot(&sig.dot(&pi_beta)) + mean_dot * mean_dot;

    // (sigma^2 / n) Tr[(X^T X / n)^+ A] = sigma^2 sum_j (v_j^T A v_j) / s_j^2.
    let mut variance = 0.0;
    for (j, &s) in svd.s.iter().enumerate() {
        if s > cut {
            let v = svd.vt.row(j);
            let quad = v.dot(&sig.dot(&v)) + mu_t.dot(&v).powi(2);
            variance += quad / (s * s);
        }
    }
    variance *= sigma * sigma;
    Ok((bias, variance))
}

/// Seeded Monte Carlo estimate of the excess risk under a dataset spec.
///
/// Trial `i` uses a seed derived purely from `(master_seed, i)`, and the
/// per-trial risks are reduced in trial order, so the estimate does not
/// depend on scheduling or thread count.
pub fn monte_carlo_risk(
    spec: &DatasetSpec,
    trials: usize,
    master_seed: u64,
    beta_mode: BetaMode,
) -> Result<RiskEstimate> {
    if trials < 2 {
        return Err(Error::param("trials must be at least 2".to_string()));
    }
    let sampler = SpecSampler::new(spec)?;
    let risks: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let trial_seed = mix_seed(master_seed, i as u64);
            let beta = match beta_mode {
                BetaMode::Fixed => spec.beta.clone(),
                BetaMode::ResampleSphere { radius } => {
                    sample_beta_sphere(spec.p, radius, mix_seed(trial_seed, 2))?
                }
            };
            let ds = sampler.sample_with_beta(mix_seed(trial_seed, 1), &beta);
            let beta_hat = min_norm_ls(&ds.x, &ds.y).map_err(|e| annotate_trial(e, i))?;
            Ok(excess_risk(&beta_hat, &beta, &spec.cov_t, &spec.means.mu_t))
        })
        .collect::<Result<Vec<_>>>()?;

    let mean = risks.iter().sum::<f64>() / trials as f64;
    let ss = risks.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>();
    let std_error = (ss / (trials as f64 - 1.0)).sqrt() / (trials as f64).sqrt();
    Ok(RiskEstimate {
        mean,
        std_error,
        trials,
        per_trial: Some(risks),
    })
}

fn annotate_trial(e: Error, trial: usize) -> Error {
    match e {
        Error::Param(m) => Error::Param(format!("trial {trial}: {m}")),
        Error::Data(m) => Error::Data(format!("trial {trial}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("trial {trial}: {m}")),
    }
}
