//! Data-model construction: covariance matrices, mean pairs with prescribed
//! geometry, regression coefficients, and sampled datasets.
//!
//! A dataset stacks `n_t` training rows over `n_s` synthetic rows. Row
//! blocks are drawn as `X = Z S^{1/2} + 1 mu^T` with i.i.d. standard normal
//! `Z` and the symmetric PSD square root `S^{1/2}`, and labels follow
//! `y = X beta + eps` with `eps ~ N(0, sigma^2)`.

use ndarray::{s, Array1, Array2};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, mix_seed};

/// How a covariance matrix was constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Kac-Murdock-Szego Toeplitz matrix with parameter `rho`.
    Kms {
        rho: f64,
    },
    Identity,
    Diagonal(Vec<f64>),
    Explicit,
}

/// A `p x p` symmetric positive-definite covariance matrix.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    dim: usize,
    matrix: Array2<f64>,
    provenance: Provenance,
}

impl CovarianceModel {
    /// Validates symmetry (1e-12 entrywise) and positive definiteness
    /// (Cholesky succeeds).
    pub fn new(matrix: Array2<f64>, provenance: Provenance) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(Error::param(format!(
                "covariance matrix must be square and nonempty, got {r}x{c}"
            )));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-12 {
                    return Err(Error::data(format!(
                        "covariance matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::data(
                "covariance matrix has non-finite entries".to_string(),
            ));
        }
        if !linalg::is_positive_definite(&matrix) {
            return Err(Error::numerical(
                "covariance matrix is not positive definite".to_string(),
            ));
        }
        Ok(CovarianceModel {
            dim: r,
            matrix,
            provenance,
        })
    }

    pub fn identity(p: usize) -> Result<Self> {
        Self::new(Array2::eye(p), Provenance::Identity)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let matrix = Array2::from_diag(&Array1::from_vec(values.to_vec()));
        Self::new(matrix, Provenance::Diagonal(values.to_vec()))
    }

    pub fn explicit(matrix: Array2<f64>) -> Result<Self> {
        Self::new(matrix, Provenance::Explicit)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Symmetric PSD square root, `U sqrt(D) U^T`.
    pub fn sym_sqrt(&self) -> Result<Array2<f64>> {
        linalg::sym_sqrt(&self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        linalg::sym_eigenvalues(&self.matrix)
    }

    /// Rescaled copy `c * Sigma`; provenance becomes `Explicit`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param(format!(
                "covariance scale must be positive, got {c}"
            )));
        }
        Self::new(&self.matrix * c, Provenance::Explicit)
    }
}

/// Training/synthetic mean vectors with prescribed norms and angle.
///
/// `||mu_t|| = r_t sqrt(p)`, `||mu_s|| = r_s sqrt(p)`, and the cosine of the
/// angle between them is `cos_phi` whenever both norms are nonzero.
#[derive(Debug, Clone)]
pub struct MeanPair {
    pub mu_t: Array1<f64>,
    pub mu_s: Array1<f64>,
    pub r_t: f64,
    pub r_s: f64,
    pub cos_phi: f64,
}

impl MeanPair {
    pub fn zero(p: usize) -> Self {
        MeanPair {
            mu_t: Array1::zeros(p),
            mu_s: Array1::zeros(p),
            r_t: 0.0,
            r_s: 0.0,
            cos_phi: 1.0,
        }
    }
}

/// Label-noise distribution (Gaussian only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDist {
    #[default]
    Gaussian,
}

/// Distribution of the entries of `Z` (Gaussian only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryDist {
    #[default]
    Gaussian,
}

/// Full generation recipe for one mixed real/synthetic dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub p: usize,
    pub n_t: usize,
    pub n_s: usize,
    pub sigma: f64,
    pub cov_t: CovarianceModel,
    pub cov_s: CovarianceModel,
    pub means: MeanPair,
    pub beta: Array1<f64>,
    pub noise_dist: NoiseDist,
    pub entry_dist: EntryDist,
}

impl DatasetSpec {
    pub fn n(&self) -> usize {
        self.n_t + self.n_s
    }

    pub fn gamma(&self) -> f64 {
        self.n() as f64 / self.p as f64
    }

    pub fn gamma_t(&self) -> f64 {
        self.n_t as f64 / self.p as f64
    }

    pub fn gamma_s(&self) -> f64 {
        self.n_s as f64 / self.p as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::param("p must be positive".to_string()));
        }
        if self.n() == 0 {
            return Err(Error::param("n_t + n_s must be positive".to_string()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if self.cov_t.dim() != self.p || self.cov_s.dim() != self.p {
            return Err(Error::param(
                "covariance dimensions do not match p".to_string(),
            ));
        }
        if self.means.mu_t.len() != self.p || self.means.mu_s.len() != self.p {
            return Err(Error::param("mean dimensions do not match p".to_string()));
        }
        if self.beta.len() != self.p {
            return Err(Error::param("beta dimension does not match p".to_string()));
        }
        if !self.beta.iter().all(|v| v.is_finite()) {
            return Err(Error::data("beta has non-finite entries".to_string()));
        }
        Ok(())
    }
}

/// A realized sample: `x` stacks the `n_t` training rows above the `n_s`
/// synthetic rows.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub spec: DatasetSpec,
}

/// Prepared sampler that factors the covariance square roots once, so
/// repeated trials only pay for the random draws and one matrix product.
pub struct SpecSampler {
    spec: DatasetSpec,
    sqrt_t: Array2<f64>,
    sqrt_s: Array2<f64>,
}

impl SpecSampler {
    pub fn new(spec: &DatasetSpec) -> Result<Self> {
        spec.validate()?;
        Ok(SpecSampler {
            spec: spec.clone(),
            sqrt_t: spec.cov_t.sym_sqrt()?,
            sqrt_s: spec.cov_s.sym_sqrt()?,
        })
    }

    pub fn spec(&self) -> &DatasetSpec {
        &self.spec
    }

    /// Draw a dataset with the spec's own `beta`.
    pub fn sample(&self, seed: u64) -> Dataset {
        self.sample_with_beta(seed, &self.spec.beta)
    }

    /// Draw a dataset with an overriding `beta` (same feature stream).
    ///
    /// The RNG stream is: training block `Z_t` row-major, then synthetic
    /// block `Z_s`, then the noise vector. Fixed order makes every sample a
    /// bit-reproducible function of `(spec, seed)`.
    pub fn sample_with_beta(&self, seed: u64, beta: &Array1<f64>) -> Dataset {
        assert_eq!(beta.len(), self.spec.p, "beta dimension mismatch");
        let (p, n_t, n_s) = (self.spec.p, self.spec.n_t, self.spec.n_s);
        let n = n_t + n_s;
        let mut rng = rng::rng_from_seed(seed);

        let mut draw_block = |rows: usize, root: &Array2<f64>, mu: &Array1<f64>| {
            let z = Array2::from_shape_simple_fn((rows, p), || StandardNormal.sample(&mut rng));
            z.dot(root) + mu
        };
        let x_t = draw_block(n_t, &self.sqrt_t, &self.spec.means.mu_t);
        let x_s = draw_block(n_s, &self.sqrt_s, &self.spec.means.mu_s);

        let mut x = Array2::zeros((n, p));
        x.slice_mut(s![..n_t, ..]).assign(&x_t);
        x.slice_mut(s![n_t.., ..]).assign(&x_s);

        let eps = rng::standard_normal_vec(&mut rng, n);
        let y = x.dot(beta) + eps * self.spec.sigma;

        let mut spec = self.spec.clone();
        spec.beta = beta.clone();
        Dataset { x, y, spec }
    }
}

/// Kac-Murdock-Szego Toeplitz covariance: entry `(i, j)` is `rho^|i-j|`.
pub fn kms_matrix(p: usize, rho: f64) -> Result<CovarianceModel> {
    if p == 0 {
        return Err(Error::param("p must be positive".to_string()));
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::param(format!(
            "KMS parameter must satisfy |rho| < 1, got {rho}"
        )));
    }
    let matrix = Array2::from_shape_fn((p, p), |(i, j)| rho.powi((i as i32 - j as i32).abs()));
    CovarianceModel::new(matrix, Provenance::Kms { rho })
}

/// Rescale `cov_s` so that `Tr[Sigma_s Sigma_t^{-1}] = p`.
pub fn scale_to_trace_constraint(
    cov_s: &CovarianceModel,
    cov_t: &CovarianceModel,
) -> Result<CovarianceModel> {
    if cov_s.dim() != cov_t.dim() {
        return Err(Error::param(format!(
            "dimension mismatch: {} vs {}",
            cov_s.dim(),
            cov_t.dim()
        )));
    }
    let p = cov_s.dim() as f64;
    let t_inv = linalg::spd_inverse(cov_t.matrix())?;
    // Both factors are symmetric, so Tr[A B] is the elementwise product sum.
    let trace = (cov_s.matrix() * &t_inv).sum();
    cov_s.scaled(p / trace)
}

/// Seeded mean pair: `mu_t` is a random direction scaled to `r_t sqrt(p)`;
/// `mu_s` is built at angle `arccos(cos_phi)` from it with norm
/// `r_s sqrt(p)`. With `cos_phi = 1` the pair is exactly collinear.
pub fn make_mean_pair(
    p: usize,
    r_t: f64,
    r_s: f64,
    cos_phi: f64,
    rng_seed: u64,
) -> Result<MeanPair> {
    if !(0.0..=1.0).contains(&cos_phi) {
        return Err(Error::param(format!(
            "cos_phi must lie in [0, 1], got {cos_phi}"
        )));
    }
    if r_t < 0.0 || r_s < 0.0 {
        return Err(Error::param(
            "mean scales r_t, r_s must be nonnegative".to_string(),
        ));
    }
    if p == 0 {
        return Err(Error::param("p must be positive".to_string()));
    }
    if p < 2 && cos_phi < 1.0 {
        return Err(Error::param(
            "p >= 2 required for cos_phi < 1 (no orthogonal direction at p = 1)".to_string(),
        ));
    }
    let mut rng = rng::rng_from_seed(rng_seed);
    let u_t = rng::unit_vector(&mut rng, p);
    let sqrt_p = (p as f64).sqrt();
    let mu_t = &u_t * (r_t * sqrt_p);
    let mu_s = if cos_phi == 1.0 {
        &u_t * (r_s * sqrt_p)
    } else {
        // One Gram-Schmidt step against u_t; redraw if nearly parallel.
        let u_perp = loop {
            let g = rng::standard_normal_vec(&mut rng, p);
            let w = &g - &(&u_t * g.dot(&u_t));
            let norm = w.dot(&w).sqrt();
            if norm > 1e-8 {
                break w / norm;
            }
        };
        let sin_phi = (1.0 - cos_phi * cos_phi).sqrt();
        (&u_t * cos_phi + &u_perp * sin_phi) * (r_s * sqrt_p)
    };
    Ok(MeanPair {
        mu_t,
        mu_s,
        r_t,
        r_s,
        cos_phi,
    })
}

/// Sample one dataset. Prefer [`SpecSampler`] when drawing many trials from
/// the same spec.
pub fn sample_dataset(spec: &DatasetSpec, rng_seed: u64) -> Result<Dataset> {
    Ok(SpecSampler::new(spec)?.sample(rng_seed))
}

/// Uniform draw from the sphere of the given radius.
pub fn sample_beta_sphere(p: usize, radius: f64, rng_seed: u64) -> Result<Array1<f64>> {
    if p == 0 {
        return Err(Error::param("p must be positive".to_string()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::param(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let mut rng = rng::rng_from_seed(mix_seed(rng_seed, 0xBE7A));
    Ok(rng::unit_vector(&mut rng, p) * radius)
}
