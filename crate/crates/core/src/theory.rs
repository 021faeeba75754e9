//! Deterministic-equivalent risk formulas.
//!
//! Under-parameterized regime (`n > p`): a scalar fixed point in
//! `(alpha_1, alpha_2)` drives the trace formula for the limiting excess
//! risk, with an equivalent closed form used as a cross-check. Training on
//! synthetic data alone has its own closed-form risk, which does depend on
//! the means.
//!
//! Over-parameterized regime (`n < p`): two four-coefficient systems over
//! the paired spectral distribution of `(Sigma_s, Sigma_t)` (assumed
//! simultaneously diagonalizable) yield the variance and bias terms. The
//! first two equations of the two systems coincide, so `b_1 = a_1` and
//! `b_2 = a_2`; the remaining unknowns are linear given the first pair.
//!
//! Optimality sweeps check that the balanced spectrum minimizes the risk at
//! fixed trace, and that scaling the spectrum up never hurts.

use ndarray::Array1;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::gen::{sample_beta_sphere, CovarianceModel};
use crate::linalg;
use crate::rng::{mix_seed, rng_from_seed};

/// Paired eigenvalues of `(Sigma_s, Sigma_t)` in a shared eigenbasis, with
/// optional squared projections of `beta` on that basis.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub lambda_s: Array1<f64>,
    pub lambda_t: Array1<f64>,
    pub g_weights: Option<Array1<f64>>,
}

impl SpectralData {
    pub fn new(
        lambda_s: Array1<f64>,
        lambda_t: Array1<f64>,
        g_weights: Option<Array1<f64>>,
    ) -> Result<Self> {
        if lambda_s.len() != lambda_t.len() || lambda_s.is_empty() {
            return Err(Error::param(
                "spectra must be nonempty and equally sized".to_string(),
            ));
        }
        if lambda_s
            .iter()
            .chain(lambda_t.iter())
            .any(|&v| !(v.is_finite() && v > 0.0))
        {
            return Err(Error::param(
                "eigenvalues must be strictly positive".to_string(),
            ));
        }
        if let Some(g) = &g_weights {
            if g.len() != lambda_s.len() {
                return Err(Error::param(
                    "g_weights length must match spectra".to_string(),
                ));
            }
            if g.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(Error::param("g_weights must be nonnegative".to_string()));
            }
        }
        Ok(SpectralData {
            lambda_s,
            lambda_t,
            g_weights,
        })
    }

    /// Squared projections of `beta` in the shared (diagonal) eigenbasis.
    pub fn with_beta_diag_basis(
        lambda_s: Array1<f64>,
        lambda_t: Array1<f64>,
        beta: &Array1<f64>,
    ) -> Result<Self> {
        let g = beta.mapv(|b| b * b);
        Self::new(lambda_s, lambda_t, Some(g))
    }

    pub fn p(&self) -> usize {
        self.lambda_s.len()
    }

    /// Eigenvalues of `M^T M` when both matrices are diagonal in the shared
    /// basis: `lambda^s_i / lambda^t_i`.
    pub fn m_spectrum(&self) -> Array1<f64> {
        &self.lambda_s / &self.lambda_t
    }
}

/// Eigenvalues of `M^T M = Sigma_t^{-1/2} Sigma_s Sigma_t^{-1/2}` for
/// general (not necessarily commuting) covariance models.
pub fn m_spectrum(cov_s: &CovarianceModel, cov_t: &CovarianceModel) -> Result<Array1<f64>> {
    if cov_s.dim() != cov_t.dim() {
        return Err(Error::param("covariance dimensions differ".to_string()));
    }
    let t_inv_sqrt = linalg::sym_inv_sqrt(cov_t.matrix())?;
    let mut w = t_inv_sqrt.dot(cov_s.matrix()).dot(&t_inv_sqrt);
    // Symmetrize round-off before the eigensolve.
    w = (&w + &w.t()) / 2.0;
    linalg::sym_eigenvalues(&w)
}

/// Solution of the under-parameterized two-equation fixed point.
#[derive(Debug, Clone)]
pub struct UnderFixedPoint {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Residual of the second defining equation at the returned solution.
    pub residual: f64,
    pub iterations: usize,
    /// Set when `n_s = n` (no training rows): the solution sits at the
    /// `alpha2 = 0` boundary of the bracket.
    pub boundary: bool,
}

/// Residual of the second fixed-point equation after substituting
/// `alpha2 = 1 - p/n - alpha1`.
fn under_residual(alpha1: f64, spectrum: &Array1<f64>, n: usize, n_s: usize) -> f64 {
    let nf = n as f64;
    let alpha2 = 1.0 - spectrum.len() as f64 / nf - alpha1;
    let sum: f64 = spectrum
        .iter()
        .map(|&l| l * alpha1 / (l * alpha1 + alpha2))
        .sum();
    alpha1 + sum / nf - n_s as f64 / nf
}

/// Solve the two-equation fixed point for `(alpha_1, alpha_2)` by bisection on
/// `alpha_1 in (0, 1 - p/n)`; the residual function is strictly increasing
/// there, so the bracket is guaranteed.
pub fn solve_under_fixed_point(
    m_spectrum: &Array1<f64>,
    n: usize,
    n_s: usize,
) -> Result<UnderFixedPoint> {
    let p = m_spectrum.len();
    if p == 0 {
        return Err(Error::param("spectrum must be nonempty".to_string()));
    }
    if n <= p {
        return Err(Error::param(format!(
            "under-parameterized regime requires n > p, got n = {n}, p = {p}"
        )));
    }
    if n_s == 0 || n_s > n {
        return Err(Error::param(format!(
            "n_s must satisfy 0 < n_s <= n, got {n_s}"
        )));
    }
    if m_spectrum.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::param(
            "spectrum entries must be strictly positive".to_string(),
        ));
    }

    let upper = 1.0 - p as f64 / n as f64;
    if n_s == n {
        // gamma_t = 0: alpha2 = 0 exactly, alpha1 = 1 - p/n.
        let residual = under_residual(upper, m_spectrum, n, n_s).abs();
        return Ok(UnderFixedPoint {
            alpha1: upper,
            alpha2: 0.0,
            residual,
            iterations: 0,
            boundary: true,
        });
    }

    let f_lo = under_residual(0.0, m_spectrum, n, n_s);
    let f_hi = under_residual(upper, m_spectrum, n, n_s);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::numerical(format!(
            "no sign change on (0, {upper}): f(0) = {f_lo}, f(upper) = {f_hi}"
        )));
    }

    let (mut lo, mut hi) = (0.0f64, upper);
    let mut mid = 0.5 * upper;
    let mut f_mid = under_residual(mid, m_spectrum, n, n_s);
    let mut iterations = 0;
    while f_mid.abs() > 1e-12 && iterations < 200 {
        if f_mid > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        mid = 0.5 * (lo + hi);
        f_mid = under_residual(mid, m_spectrum, n, n_s);
        iterations += 1;
    }
    Ok(UnderFixedPoint {
        alpha1: mid,
        alpha2: upper - mid,
        residual: f_mid.abs(),
        iterations,
        boundary: false,
    })
}

/// Trace form of the limiting under-parameterized risk:
/// `(sigma^2 / n) sum_i 1 / (lambda_i alpha_1 + alpha_2)`.
pub fn under_trace_risk(
    fp: &UnderFixedPoint,
    m_spectrum: &Array1<f64>,
    n: usize,
    sigma: f64,
) -> f64 {
    let sum: f64 = m_spectrum
        .iter()
        .map(|&l| 1.0 / (l * fp.alpha1 + fp.alpha2))
        .sum();
    sigma * sigma * sum / n as f64
}

/// Equivalent closed form `sigma^2 ((1 - n_s/n) / (1 - p/n - alpha_1) - 1)`.
///
/// Undefined at the `n_s = n` boundary (0/0); callers cross-check the two
/// routes only in the interior.
pub fn under_closed_form_risk(fp: &UnderFixedPoint, n: usize, n_s: usize, sigma: f64) -> f64 {
    let nf = n as f64;
    sigma * sigma * ((1.0 - n_s as f64 / nf) / (fp.alpha2) - 1.0)
}

/// Limiting excess risk in the under-parameterized regime.
pub fn risk_under(m_spectrum: &Array1<f64>, n: usize, n_s: usize, sigma: f64) -> Result<f64> {
    let fp = solve_under_fixed_point(m_spectrum, n, n_s)?;
    Ok(under_trace_risk(&fp, m_spectrum, n, sigma))
}

/// Limiting excess risk when training only on synthetic data
/// (`gamma_t = 0`, `n = n_s > p`):
/// `(sigma^2/n) (gamma/(gamma-1)) [Tr(Sigma_t Sigma_s^{-1})
///  + ||Sigma_s^{-1/2} mu_t||^2 - (mu_t^T Sigma_s^{-1} mu_s / ||Sigma_s^{-1/2} mu_s||)^2]`.
pub fn risk_synthetic_only(
    cov_t: &CovarianceModel,
    cov_s: &CovarianceModel,
    mu_t: &Array1<f64>,
    mu_s: &Array1<f64>,
    n: usize,
    sigma: f64,
) -> Result<f64> {
    let p = cov_t.dim();
    if cov_s.dim() != p || mu_t.len() != p || mu_s.len() != p {
        return Err(Error::param("dimension mismatch".to_string()));
    }
    if n <= p {
        return Err(Error::param(format!(
            "requires n > p, got n = {n}, p = {p}"
        )));
    }
    let s_inv = linalg::spd_inverse(cov_s.matrix())?;
    let trace = (cov_t.matrix() * &s_inv).sum();
    let mu_term = mu_t.dot(&s_inv.dot(mu_t));
    let mus_quad = mu_s.dot(&s_inv.dot(mu_s));
    let alignment = if mus_quad > 0.0 {
        let cross = mu_t.dot(&s_inv.dot(mu_s));
        cross * cross / mus_quad
    } else {
        0.0
    };
    let gamma = n as f64 / p as f64;
    Ok(sigma * sigma / n as f64 * (gamma / (gamma - 1.0)) * (trace + mu_term - alignment))
}

/// Solution of the over-parameterized coefficient systems. The first two
/// defining equations of the `a` and `b` systems coincide, so
/// `b_1 = a_1`, `b_2 = a_2`.
#[derive(Debug, Clone)]
pub struct OverFixedPoint {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    /// Residuals of the eight defining equations at the returned solution.
    pub residuals: [f64; 8],
    pub iterations: usize,
}

struct OverMoments {
    /// `(1/n) sum lambda^s / D^2`
    c_ss: f64,
    /// `(1/n) sum lambda^t / D^2`
    c_tt: f64,
    /// `(1/n) sum lambda^s lambda^t / D^2`
    c_st: f64,
    /// `(1/n) sum (lambda^t)^2 / D^2`
    c_tt2: f64,
}

fn over_moments(spec: &SpectralData, a1: f64, a2: f64, n: usize) -> OverMoments {
    let mut m = OverMoments {
        c_ss: 0.0,
        c_tt: 0.0,
        c_st: 0.0,
        c_tt2: 0.0,
    };
    for (&ls, &lt) in spec.lambda_s.iter().zip(spec.lambda_t.iter()) {
        let d = a1 * ls + a2 * lt + 1.0;
        let d2 = d * d;
        m.c_ss += ls / d2;
        m.c_tt += lt / d2;
        m.c_st += ls * lt / d2;
        m.c_tt2 += lt * lt / d2;
    }
    let nf = n as f64;
    m.c_ss /= nf;
    m.c_tt /= nf;
    m.c_st /= nf;
    m.c_tt2 /= nf;
    m
}

/// Residuals of the first two equations shared by the `a` and `b` systems.
fn head_residuals(spec: &SpectralData, a1: f64, a2: f64, n: usize, n_s: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut s_full = 0.0;
    let mut s_s = 0.0;
    for (&ls, &lt) in spec.lambda_s.iter().zip(spec.lambda_t.iter()) {
        let num = a1 * ls + a2 * lt;
        let d = num + 1.0;
        s_full += num / d;
        s_s += a1 * ls / d;
    }
    (1.0 - s_full / nf, n_s as f64 / nf - s_s / nf)
}

fn head_residual_norm(spec: &SpectralData, a1: f64, a2: f64, n: usize, n_s: usize) -> f64 {
    let (r1, r2) = head_residuals(spec, a1, a2, n, n_s);
    r1.abs().max(r2.abs())
}

/// Solve the shared head equations for `(a_1, a_2)` by damped Newton from
/// the isotropic closed form; `n_s = 0` and `n_s = n` pin one coordinate to
/// zero and reduce to a monotone scalar equation solved by bisection.
fn solve_head(spec: &SpectralData, n: usize, n_s: usize) -> Result<(f64, f64, usize)> {
    let p = spec.p();
    let nf = n as f64;
    let gamma = nf / p as f64;
    let n_t = n - n_s;

    // First head equation is equivalent to sum_i 1/D_i = p - n, strictly
    // decreasing in either coordinate, so the constrained edge cases are
    // scalar bisections.
    let scalar_edge = |fix_a1: bool| -> Result<f64> {
        let eval = |v: f64| -> f64 {
            let (a1, a2) = if fix_a1 { (0.0, v) } else { (v, 0.0) };
            head_residuals(spec, a1, a2, n, n_s).0
        };
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while eval(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::numerical(
                    "edge bisection bracket blew up".to_string(),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    if n_s == 0 {
        let a2 = scalar_edge(true)?;
        return Ok((0.0, a2, 200));
    }
    if n_s == n {
        let a1 = scalar_edge(false)?;
        return Ok((a1, 0.0, 200));
    }

    let mut a1 = (n_s as f64 / p as f64) / (1.0 - gamma);
    let mut a2 = (n_t as f64 / p as f64) / (1.0 - gamma);
    let mut resid = head_residual_norm(spec, a1, a2, n, n_s);
    let mut iterations = 0;
    while resid > 1e-13 && iterations < 500 {
        // Analytic Jacobian of (E1, E2) in (a1, a2).
        let mut j11 = 0.0;
        let mut j12 = 0.0;
        let mut j21 = 0.0;
        let mut j22 = 0.0;
        for (&ls, &lt) in spec.lambda_s.iter().zip(spec.lambda_t.iter()) {
            let d = a1 * ls + a2 * lt + 1.0;
            let d2 = d * d;
            j11 -= ls / d2;
            j12 -= lt / d2;
            j21 -= ls * (a2 * lt + 1.0) / d2;
            j22 += a1 * ls * lt / d2;
        }
        j11 /= nf;
        j12 /= nf;
        j21 /= nf;
        j22 /= nf;
        let (r1, r2) = head_residuals(spec, a1, a2, n, n_s);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(Error::numerical(
                "singular Jacobian in over-parameterized solve".to_string(),
            ));
        }
        let da1 = -(j22 * r1 - j12 * r2) / det;
        let da2 = -(-j21 * r1 + j11 * r2) / det;

        // Halve the step until the residual decreases and positivity holds.
        let mut t = 1.0f64;
        let mut stepped = false;
        for _ in 0..60 {
            let c1 = a1 + t * da1;
            let c2 = a2 + t * da2;
            if c1 > 0.0 && c2 > 0.0 {
                let cand = head_residual_norm(spec, c1, c2, n, n_s);
                if cand < resid {
                    a1 = c1;
                    a2 = c2;
                    resid = cand;
                    stepped = true;
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        if !stepped {
            break;
        }
    }
    if resid > 1e-10 {
        return Err(Error::numerical(format!(
            "over-parameterized head equations did not converge: residual {resid:.3e} after {iterations} iterations"
        )));
    }
    Ok((a1, a2, iterations))
}

fn solve_2x2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Result<(f64, f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if det.abs() <= 1e-14 * scale * scale {
        return Err(Error::numerical(
            "singular 2x2 system for tail coefficients".to_string(),
        ));
    }
    Ok((
        (rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ))
}

/// Solve both over-parameterized coefficient systems.
pub fn solve_over_fixed_point(
    spectral: &SpectralData,
    n: usize,
    n_s: usize,
) -> Result<OverFixedPoint> {
    let p = spectral.p();
    if n >= p {
        return Err(Error::param(format!(
            "over-parameterized regime requires n < p, got n = {n}, p = {p}"
        )));
    }
    if n == 0 || n_s > n {
        return Err(Error::param(format!(
            "need 0 < n and n_s <= n, got n = {n}, n_s = {n_s}"
        )));
    }

    let (a1, a2, iterations) = solve_head(spectral, n, n_s)?;
    let m = over_moments(spectral, a1, a2, n);

    // Third and fourth a-equations, linear in (a3, a4).
    let (a3, a4) = solve_2x2(
        [[-m.c_ss, -m.c_tt], [-(m.c_ss + a2 * m.c_st), a1 * m.c_st]],
        [a1 + a2, a1],
    )?;

    // b-system: head coincides with the a-system, tail is linear again.
    let (b1, b2) = (a1, a2);
    let (b3, b4) = solve_2x2(
        [[m.c_ss, m.c_tt], [m.c_ss + b2 * m.c_st, -(b1 * m.c_st)]],
        [b1 * m.c_st + b2 * m.c_tt2, b1 * m.c_st],
    )?;

    let fp = OverFixedPoint {
        a1,
        a2,
        a3,
        a4,
        b1,
        b2,
        b3,
        b4,
        residuals: over_residuals(spectral, n, n_s, a1, a2, a3, a4, b1, b2, b3, b4),
        iterations,
    };
    let worst = fp.residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    if worst > 1e-8 {
        return Err(Error::numerical(format!(
            "over-parameterized system residual {worst:.3e} exceeds 1e-8"
        )));
    }
    Ok(fp)
}

#[allow(clippy::too_many_arguments)]
fn over_residuals(
    spec: &SpectralData,
    n: usize,
    n_s: usize,
    a1: f64,
    a2: f64,
    a3: f64,
    a4: f64,
    b1: f64,
    b2: f64,
    b3: f64,
    b4: f64,
) -> [f64; 8] {
    let p = spec.p() as f64;
    let nf = n as f64;
    let inv_gamma_p = 1.0 / (nf / p) / p; // (1/gamma)(1/p) = 1/n
    let mut s3 = 0.0;
    let mut s4 = 0.0;
    let mut s7 = 0.0;
    let mut s8 = 0.0;
    for (&ls, &lt) in spec.lambda_s.iter().zip(spec.lambda_t.iter()) {
        let d = a1 * ls + a2 * lt + 1.0;
        let d2 = d * d;
        s3 += (a3 * ls + a4 * lt) / d2;
        s4 += (a3 * ls + ls * lt * (a3 * a2 - a4 * a1)) / d2;
        s7 += (ls * (b3 - b1 * lt) + lt * (b4 - b2 * lt)) / d2;
        s8 += (ls * (b3 - b1 * lt) + ls * lt * (b3 * b2 - b4 * b1)) / d2;
    }
    let (r1, r2) = head_residuals(spec, a1, a2, n, n_s);
    let (r5, r6) = head_residuals(spec, b1, b2, n, n_s);
    [
        r1,
        r2,
        a1 + a2 + inv_gamma_p * s3,
        a1 + inv_gamma_p * s4,
        r5,
        r6,
        s7 / p,
        s8 / p,
    ]
}

/// Variance/bias split of the limiting over-parameterized risk.
#[derive(Debug, Clone, Copy)]
pub struct OverRisk {
    pub variance: f64,
    pub bias: f64,
    pub total: f64,
}

/// Evaluate the variance and bias integrals at a solved fixed point.
pub fn over_risk_with(
    fp: &OverFixedPoint,
    spectral: &SpectralData,
    n: usize,
    sigma: f64,
) -> Result<OverRisk> {
    let g = spectral
        .g_weights
        .as_ref()
        .ok_or_else(|| Error::param("g_weights required for the bias term".to_string()))?;
    let mut v = 0.0;
    let mut b = 0.0;
    for ((&ls, &lt), &gi) in spectral
        .lambda_s
        .iter()
        .zip(spectral.lambda_t.iter())
        .zip(g.iter())
    {
        let d = fp.a1 * ls + fp.a2 * lt + 1.0;
        let d2 = d * d;
        v += -lt * (fp.a3 * ls + fp.a4 * lt) / d2;
        b += gi * (fp.b3 * ls + (fp.b4 + 1.0) * lt) / d2;
    }
    // (sigma^2 / gamma) * (1/p) sum = (sigma^2 / n) sum.
    v *= sigma * sigma / n as f64;
    Ok(OverRisk {
        variance: v,
        bias: b,
        total: v + b,
    })
}

/// Limiting excess risk in the over-parameterized regime.
pub fn risk_over(spectral: &SpectralData, n: usize, n_s: usize, sigma: f64) -> Result<OverRisk> {
    let fp = solve_over_fixed_point(spectral, n, n_s)?;
    over_risk_with(&fp, spectral, n, sigma)
}

/// Outcome of an optimality property sweep.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    pub samples: usize,
    /// Largest positive value of `R(balanced) - R(candidate)` observed
    /// (a violation when above tolerance).
    pub max_violation: f64,
    pub violations: usize,
    pub tolerance: f64,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draw a positive spectrum with `sum = p` (normalized i.i.d. exponentials).
fn random_trace_normalized_spectrum(p: usize, seed: u64) -> Array1<f64> {
    let mut rng = rng_from_seed(seed);
    let mut draws = Array1::from_shape_simple_fn(p, || {
        let e: f64 = Exp1.sample(&mut rng);
        e.max(1e-12)
    });
    let total: f64 = draws.sum();
    draws *= p as f64 / total;
    draws
}

/// Optimality sweep in the under-parameterized regime:
/// the all-ones spectrum minimizes the risk among random trace-normalized
/// spectra, and scaling any spectrum up never increases the risk.
pub fn check_optimality_under(
    n: usize,
    n_s: usize,
    p: usize,
    num_random_spectra: usize,
    rng_seed: u64,
) -> Result<OptimalityReport> {
    if n <= p {
        return Err(Error::param("requires n > p".to_string()));
    }
    let tolerance = 1e-10;
    let ones = Array1::from_elem(p, 1.0);
    let balanced = risk_under(&ones, n, n_s, 1.0)?;
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for k in 0..num_random_spectra {
        let spectrum = random_trace_normalized_spectrum(p, mix_seed(rng_seed, k as u64));
        let risk = risk_under(&spectrum, n, n_s, 1.0)?;
        let gap = balanced - risk;
        max_violation = max_violation.max(gap);
        if gap > tolerance {
            violations += 1;
        }
        for eta in [1.5, 2.0, 4.0] {
            let scaled_risk = risk_under(&(&spectrum * eta), n, n_s, 1.0)?;
            let gap = scaled_risk - risk;
            max_violation = max_violation.max(gap);
            if gap > tolerance {
                violations += 1;
            }
        }
    }
    Ok(OptimalityReport {
        samples: num_random_spectra,
        max_violation,
        violations,
        tolerance,
    })
}

/// Optimality sweep in the over-parameterized regime with
/// isotropic training covariance: for a fixed sphere-sampled `beta`,
/// `R(I, I, beta) <= R(Sigma_s, I, beta) + tol` across random diagonal
/// trace-normalized `Sigma_s`.
pub fn check_optimality_over(
    n: usize,
    n_s: usize,
    p: usize,
    num_random_spectra: usize,
    rng_seed: u64,
) -> Result<OptimalityReport> {
    if n >= p {
        return Err(Error::param("requires n < p".to_string()));
    }
    let tolerance = 1e-8;
    let beta = sample_beta_sphere(p, 1.0, mix_seed(rng_seed, 0xBE7A))?;
    let ones = Array1::from_elem(p, 1.0);
    let id_spec = SpectralData::with_beta_diag_basis(ones.clone(), ones.clone(), &beta)?;
    let balanced = risk_over(&id_spec, n, n_s, 1.0)?.total;
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0;
    for k in 0..num_random_spectra {
        let lambda_s = random_trace_normalized_spectrum(p, mix_seed(rng_seed, k as u64));
        let spec = SpectralData::with_beta_diag_basis(lambda_s, ones.clone(), &beta)?;
        let risk = risk_over(&spec, n, n_s, 1.0)?.total;
        let gap = balanced - risk;
        max_violation = max_violation.max(gap);
        if gap > tolerance {
            violations += 1;
        }
    }
    Ok(OptimalityReport {
        samples: num_random_spectra,
        max_violation,
        violations,
        tolerance,
    })
}
