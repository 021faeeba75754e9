//! Subcommand implementations. Every command buffers its full CSV output
//! and writes it in one shot, so a failing run never emits partial tables.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use covlab::estimator::{monte_carlo_risk, BetaMode};
use covlab::gen::{
    kms_matrix, make_mean_pair, sample_beta_sphere, scale_to_trace_constraint, CovarianceModel,
    DatasetSpec, MeanPair,
};
use covlab::rng::mix_seed;
use covlab::select::{
    covariance_shift, mean_shift, select_alpha_match, select_baseline, select_cov_match, take_rows,
    BaselineMethod, SelectionResult,
};
use covlab::theory::{
    self, over_risk_with, solve_over_fixed_point, solve_under_fixed_point, under_trace_risk,
    SpectralData,
};
use covlab::{Error, Result};
use ndarray::Array1;

use crate::io::{fmt_f64, load_feature_matrix, load_ref_vector, parse_float_list};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    Under,
    Over,
    #[value(name = "synthetic-only")]
    SyntheticOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "cos-phi")]
    CosPhi,
    #[value(name = "rho-s")]
    RhoS,
    Eta,
    Ns,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub regime: Regime,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub nt: usize,
    #[arg(long, default_value_t = 0)]
    pub ns: usize,
    /// KMS parameter of the training covariance.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho_t: f64,
    /// KMS parameter of the synthetic covariance.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho_s: f64,
    /// Use identity covariances for both distributions.
    #[arg(long)]
    pub identity_cov: bool,
    /// Zero means for both distributions.
    #[arg(long)]
    pub zero_mean: bool,
    /// Mean norm scale r: ||mu|| = r sqrt(p) for both means.
    #[arg(long, default_value_t = 0.0)]
    pub mu_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cos_phi: f64,
    /// Extra scale applied to the synthetic covariance.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Skip the trace normalization of the synthetic covariance.
    #[arg(long)]
    pub no_trace_scale: bool,
    #[arg(long, value_enum)]
    pub sweep: SweepParam,
    /// Comma-separated grid of swept values.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_radius: f64,
}

/// One grid point of a sweep, fully resolved.
struct PointConfig {
    param: f64,
    n_t: usize,
    n_s: usize,
    cos_phi: f64,
    rho_s: f64,
    eta: f64,
}

fn resolve_grid(args: &SimulateArgs) -> Result<Vec<PointConfig>> {
    let raw = parse_float_list(&args.grid)?;
    if raw.is_empty() {
        return Err(Error::param("sweep grid must be nonempty".to_string()));
    }
    raw.into_iter()
        .map(|v| {
            let mut point = PointConfig {
                param: v,
                n_t: args.nt,
                n_s: args.ns,
                cos_phi: args.cos_phi,
                rho_s: args.rho_s,
                eta: args.eta,
            };
            match args.sweep {
                SweepParam::CosPhi => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::param(format!(
                            "cos_phi grid value {v} outside [0, 1]"
                        )));
                    }
                    point.cos_phi = v;
                }
                SweepParam::RhoS => {
                    if v.abs() >= 1.0 {
                        return Err(Error::param(format!(
                            "rho_s grid value {v} outside (-1, 1)"
                        )));
                    }
                    point.rho_s = v;
                }
                SweepParam::Eta => {
                    if v <= 0.0 {
                        return Err(Error::param(format!("eta grid value {v} must be positive")));
                    }
                    point.eta = v;
                }
                SweepParam::Ns => {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::param(format!(
                            "n_s grid value {v} must be a nonnegative integer"
                        )));
                    }
                    point.n_s = v as usize;
                }
            }
            Ok(point)
        })
        .collect()
}

/// Training/synthetic covariance pair for one grid point.
fn point_covariances(
    args: &SimulateArgs,
    point: &PointConfig,
) -> Result<(CovarianceModel, CovarianceModel)> {
    let p = args.p;
    let cov_t = if args.identity_cov {
        CovarianceModel::identity(p)?
    } else {
        kms_matrix(p, args.rho_t)?
    };
    let raw_s = if args.identity_cov {
        CovarianceModel::identity(p)?
    } else {
        kms_matrix(p, point.rho_s)?
    };
    let scaled = if args.no_trace_scale {
        raw_s
    } else {
        scale_to_trace_constraint(&raw_s, &cov_t)?
    };
    let cov_s = if point.eta == 1.0 {
        scaled
    } else {
        scaled.scaled(point.eta)?
    };
    Ok((cov_t, cov_s))
}

/// Diagonal covariance pair for the over-parameterized regime, built from
/// KMS spectra in a shared (coordinate) eigenbasis.
fn point_diag_covariances(
    args: &SimulateArgs,
    point: &PointConfig,
) -> Result<(CovarianceModel, CovarianceModel, Array1<f64>, Array1<f64>)> {
    let p = args.p;
    let lambda_t = if args.identity_cov {
        Array1::from_elem(p, 1.0)
    } else {
        kms_matrix(p, args.rho_t)?.eigenvalues()?
    };
    let mut lambda_s = if args.identity_cov {
        Array1::from_elem(p, 1.0)
    } else {
        kms_matrix(p, point.rho_s)?.eigenvalues()?
    };
    if !args.no_trace_scale {
        let trace: f64 = lambda_s
            .iter()
            .zip(lambda_t.iter())
            .map(|(s, t)| s / t)
            .sum();
        lambda_s *= p as f64 / trace;
    }
    if point.eta != 1.0 {
        lambda_s *= point.eta;
    }
    let cov_t = CovarianceModel::diagonal(lambda_t.as_slice().expect("contiguous"))?;
    let cov_s = CovarianceModel::diagonal(lambda_s.as_slice().expect("contiguous"))?;
    Ok((cov_t, cov_s, lambda_s, lambda_t))
}

fn point_means(args: &SimulateArgs, point: &PointConfig) -> Result<MeanPair> {
    if args.zero_mean || args.mu_scale == 0.0 {
        Ok(MeanPair::zero(args.p))
    } else {
        make_mean_pair(
            args.p,
            args.mu_scale,
            args.mu_scale,
            point.cos_phi,
            mix_seed(args.seed, 0x3EA),
        )
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let grid = resolve_grid(args)?;
    if args.regime == Regime::SyntheticOnly && args.nt != 0 {
        return Err(Error::param(
            "synthetic-only regime requires --nt 0".to_string(),
        ));
    }
    let beta = sample_beta_sphere(args.p, args.beta_radius, mix_seed(args.seed, 0xBE))?;

    let mut out = String::from("param,empirical_mean,empirical_stderr,theory\n");
    for (idx, point) in grid.iter().enumerate() {
        let means = point_means(args, point)?;
        let (cov_t, cov_s, theory_value) = match args.regime {
            Regime::Under => {
                let (cov_t, cov_s) = point_covariances(args, point)?;
                let spectrum = theory::m_spectrum(&cov_s, &cov_t)?;
                let value =
                    theory::risk_under(&spectrum, point.n_t + point.n_s, point.n_s, args.sigma)?;
                (cov_t, cov_s, value)
            }
            Regime::SyntheticOnly => {
                let (cov_t, cov_s) = point_covariances(args, point)?;
                let value = theory::risk_synthetic_only(
                    &cov_t,
                    &cov_s,
                    &means.mu_t,
                    &means.mu_s,
                    point.n_s,
                    args.sigma,
                )?;
                (cov_t, cov_s, value)
            }
            Regime::Over => {
                let (cov_t, cov_s, lambda_s, lambda_t) = point_diag_covariances(args, point)?;
                let spectral = SpectralData::with_beta_diag_basis(lambda_s, lambda_t, &beta)?;
                let value =
                    theory::risk_over(&spectral, point.n_t + point.n_s, point.n_s, args.sigma)?
                        .total;
                (cov_t, cov_s, value)
            }
        };
        let spec = DatasetSpec {
            p: args.p,
            n_t: point.n_t,
            n_s: point.n_s,
            sigma: args.sigma,
            cov_t,
            cov_s,
            means,
            beta: beta.clone(),
            noise_dist: Default::default(),
            entry_dist: Default::default(),
        };
        let est = monte_carlo_risk(
            &spec,
            args.trials,
            mix_seed(args.seed, 1000 + idx as u64),
            BetaMode::Fixed,
        )?;
        if !(est.mean.is_finite() && est.std_error.is_finite() && theory_value.is_finite()) {
            return Err(Error::numerical(format!(
                "non-finite output row at grid value {}",
                point.param
            )));
        }
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(point.param),
            fmt_f64(est.mean),
            fmt_f64(est.std_error),
            fmt_f64(theory_value)
        ));
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub regime: Regime,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ns: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// All-ones spectrum of dimension p.
    #[arg(long)]
    pub identity_spectrum: bool,
    /// Inline spectrum of M^T M (under regime).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Inline synthetic-covariance spectrum (over regime).
    #[arg(long)]
    pub lambda_s: Option<String>,
    /// Inline training-covariance spectrum (over regime).
    #[arg(long)]
    pub lambda_t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_s: Option<f64>,
    /// Apply the trace normalization to the synthetic covariance before
    /// forming spectra.
    #[arg(long)]
    pub trace_scale: bool,
    #[arg(long, default_value_t = 1.0)]
    pub beta_radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn require_p(args: &SolveArgs, inferred: Option<usize>) -> Result<usize> {
    match (args.p, inferred) {
        (Some(p), Some(q)) if p != q => Err(Error::param(format!(
            "--p {p} conflicts with a spectrum of length {q}"
        ))),
        (Some(p), _) => Ok(p),
        (None, Some(q)) => Ok(q),
        (None, None) => Err(Error::param("--p is required".to_string())),
    }
}

fn under_spectrum(args: &SolveArgs) -> Result<Array1<f64>> {
    if args.identity_spectrum {
        let p = require_p(args, None)?;
        return Ok(Array1::from_elem(p, 1.0));
    }
    if let Some(raw) = &args.lambda {
        let values = parse_float_list(raw)?;
        let p = require_p(args, Some(values.len()))?;
        if values.len() != p {
            return Err(Error::param("spectrum length mismatch".to_string()));
        }
        return Ok(Array1::from_vec(values));
    }
    if let (Some(rho_s), Some(rho_t)) = (args.rho_s, args.rho_t) {
        let p = require_p(args, None)?;
        let cov_t = kms_matrix(p, rho_t)?;
        let cov_s = kms_matrix(p, rho_s)?;
        let cov_s = if args.trace_scale {
            scale_to_trace_constraint(&cov_s, &cov_t)?
        } else {
            cov_s
        };
        return theory::m_spectrum(&cov_s, &cov_t);
    }
    Err(Error::param(
        "provide --identity-spectrum, --lambda, or both --rho-s and --rho-t".to_string(),
    ))
}

fn over_spectra(args: &SolveArgs) -> Result<(Array1<f64>, Array1<f64>)> {
    if args.identity_spectrum {
        let p = require_p(args, None)?;
        return Ok((Array1::from_elem(p, 1.0), Array1::from_elem(p, 1.0)));
    }
    if let (Some(ls), Some(lt)) = (&args.lambda_s, &args.lambda_t) {
        let ls = parse_float_list(ls)?;
        let lt = parse_float_list(lt)?;
        if ls.len() != lt.len() {
            return Err(Error::param(
                "--lambda-s and --lambda-t lengths differ".to_string(),
            ));
        }
        let p = require_p(args, Some(ls.len()))?;
        if ls.len() != p {
            return Err(Error::param("spectrum length mismatch".to_string()));
        }
        return Ok((Array1::from_vec(ls), Array1::from_vec(lt)));
    }
    if let (Some(rho_s), Some(rho_t)) = (args.rho_s, args.rho_t) {
        let p = require_p(args, None)?;
        let lt = kms_matrix(p, rho_t)?.eigenvalues()?;
        let mut ls = kms_matrix(p, rho_s)?.eigenvalues()?;
        if args.trace_scale {
            let trace: f64 = ls.iter().zip(lt.iter()).map(|(s, t)| s / t).sum();
            ls *= p as f64 / trace;
        }
        return Ok((ls, lt));
    }
    Err(Error::param(
        "provide --identity-spectrum, --lambda-s/--lambda-t, or --rho-s/--rho-t".to_string(),
    ))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String> {
    let mut out = String::from("name,value\n");
    let push = |out: &mut String, name: &str, value: f64| {
        out.push_str(&format!("{name},{}\n", fmt_f64(value)));
    };
    match args.regime {
        Regime::Under => {
            let spectrum = under_spectrum(args)?;
            let fp = solve_under_fixed_point(&spectrum, args.n, args.ns)?;
            let risk = under_trace_risk(&fp, &spectrum, args.n, args.sigma);
            push(&mut out, "alpha1", fp.alpha1);
            push(&mut out, "alpha2", fp.alpha2);
            push(&mut out, "risk", risk);
            push(&mut out, "residual", fp.residual);
            out.push_str(&format!("iterations,{}\n", fp.iterations));
        }
        Regime::Over => {
            let (lambda_s, lambda_t) = over_spectra(args)?;
            let p = lambda_s.len();
            let beta = sample_beta_sphere(p, args.beta_radius, mix_seed(args.seed, 0xBE))?;
            let spectral = SpectralData::with_beta_diag_basis(lambda_s, lambda_t, &beta)?;
            let fp = solve_over_fixed_point(&spectral, args.n, args.ns)?;
            let risk = over_risk_with(&fp, &spectral, args.n, args.sigma)?;
            for (name, value) in [
                ("a1", fp.a1),
                ("a2", fp.a2),
                ("a3", fp.a3),
                ("a4", fp.a4),
                ("b1", fp.b1),
                ("b2", fp.b2),
                ("b3", fp.b3),
                ("b4", fp.b4),
                ("V", risk.variance),
                ("B", risk.bias),
                ("total", risk.total),
            ] {
                push(&mut out, name, value);
            }
            for (i, r) in fp.residuals.iter().enumerate() {
                push(&mut out, &format!("residual{}", i + 1), *r);
            }
        }
        Regime::SyntheticOnly => {
            return Err(Error::param(
                "solve supports --regime under or over; use simulate for synthetic-only"
                    .to_string(),
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectMethod {
    #[value(name = "cov-match")]
    CovMatch,
    #[value(name = "alpha-match")]
    AlphaMatch,
    Random,
    #[value(name = "center-match")]
    CenterMatch,
    #[value(name = "center-sample")]
    CenterSample,
    Kmeans,
    Ds3,
    #[value(name = "ref-match")]
    RefMatch,
    #[value(name = "ref-sample")]
    RefSample,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long, value_enum)]
    pub method: SelectMethod,
    #[arg(long)]
    pub k: usize,
    /// PCA dimension for the matching selectors; 0 disables projection.
    #[arg(long, default_value_t = 32)]
    pub pca_dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reference vector file for ref-match / ref-sample.
    #[arg(long)]
    pub ref_vector: Option<PathBuf>,
    /// Training-set size for the alpha-matching objective; defaults to the
    /// number of real rows.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Append covariance/mean shift of the selection versus the real set.
    #[arg(long)]
    pub metrics: bool,
}

pub fn cmd_select(args: &SelectArgs) -> Result<String> {
    let real = load_feature_matrix(&args.real)?;
    let pool = load_feature_matrix(&args.pool)?;
    let pca_dim = if args.pca_dim == 0 {
        None
    } else {
        Some(args.pca_dim)
    };
    let ref_vector = match &args.ref_vector {
        Some(path) => Some(load_ref_vector(path)?),
        None => None,
    };

    let result: SelectionResult = match args.method {
        SelectMethod::CovMatch => select_cov_match(&real, &pool, args.k, pca_dim)?,
        SelectMethod::AlphaMatch => {
            let n_t = args.nt.unwrap_or_else(|| real.len());
            select_alpha_match(&real, &pool, args.k, pca_dim, n_t)?
        }
        other => {
            let method = match other {
                SelectMethod::Random => BaselineMethod::Random,
                SelectMethod::CenterMatch => BaselineMethod::CenterMatch,
                SelectMethod::CenterSample => BaselineMethod::CenterSample,
                SelectMethod::Kmeans => BaselineMethod::Kmeans,
                SelectMethod::Ds3 => BaselineMethod::Ds3,
                SelectMethod::RefMatch => BaselineMethod::RefMatch,
                SelectMethod::RefSample => BaselineMethod::RefSample,
                SelectMethod::CovMatch | SelectMethod::AlphaMatch => unreachable!(),
            };
            select_baseline(
                method,
                &real,
                &pool,
                args.k,
                pca_dim,
                args.seed,
                ref_vector.as_ref(),
            )?
        }
    };

    let mut out = String::from("rank,index,id,objective\n");
    for (rank, (&idx, &obj)) in result
        .indices
        .iter()
        .zip(result.objective_trace.iter())
        .enumerate()
    {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rank + 1,
            idx,
            pool.ids()[idx],
            fmt_f64(obj)
        ));
    }
    if args.metrics {
        let selected = take_rows(&pool, &result.indices)?;
        out.push_str(&format!(
            "# covariance_shift={}\n",
            fmt_f64(covariance_shift(&selected, &real)?)
        ));
        out.push_str(&format!(
            "# mean_shift={}\n",
            fmt_f64(mean_shift(&selected, &real)?)
        ));
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<String> {
    let a = load_feature_matrix(&args.a)?;
    let b = load_feature_matrix(&args.b)?;
    let mut out = String::from("metric,value\n");
    out.push_str(&format!(
        "covariance_shift,{}\n",
        fmt_f64(covariance_shift(&a, &b)?)
    ));
    out.push_str(&format!("mean_shift,{}\n", fmt_f64(mean_shift(&a, &b)?)));
    Ok(out)
}
