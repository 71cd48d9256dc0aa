use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{FitError, Result};
use crate::domain::{Codec, LogBase, Metric};

pub const MIN_DEGREE: u32 = 1;
pub const MAX_DEGREE: u32 = 8;

/// A polynomial in normalized log-bitrate.
///
/// `coefficients[0]` multiplies the highest power. The abscissa is
/// `z = (log(bitrate_kbps) − x_mean) / x_std`; an unnormalized model stores
/// `x_mean = 0`, `x_std = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    pub codec: Codec,
    pub metric: Metric,
    pub degree: u32,
    pub coefficients: Vec<f64>,
    pub x_mean: f64,
    pub x_std: f64,
    #[serde(default)]
    pub rmse: Option<f64>,
    #[serde(default)]
    pub r_squared: Option<f64>,
    /// Per-coefficient `[lower, upper]`, same order as `coefficients`.
    #[serde(default)]
    pub ci_95: Vec<[f64; 2]>,
    pub n_points: usize,
    #[serde(default)]
    pub log_base: LogBase,
    /// Bitrate span (kb/s) of the fitting data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitrate_range_kbps: Option<[f64; 2]>,
}

impl PolyModel {
    pub fn is_normalized(&self) -> bool {
        !(self.x_mean == 0.0 && self.x_std == 1.0)
    }

    /// Normalized abscissa for a log-bitrate value in the model's base.
    pub fn z(&self, log_bitrate: f64) -> f64 {
        (log_bitrate - self.x_mean) / self.x_std
    }

    /// True when every coefficient lies inside its own interval.
    pub fn coefficients_within_bounds(&self) -> bool {
        self.ci_95.len() == self.coefficients.len()
            && self
                .coefficients
                .iter()
                .zip(&self.ci_95)
                .all(|(c, [lo, hi])| lo <= c && c <= hi)
    }
}

/// Horner evaluation, coefficients highest power first.
pub fn horner(coefficients: &[f64], z: f64) -> f64 {
    coefficients.iter().fold(0.0, |acc, &c| acc * z + c)
}

/// Predicted quality at `bitrate_kbps`.
pub fn evaluate_model(model: &PolyModel, bitrate_kbps: f64) -> Result<f64> {
    if !(bitrate_kbps > 0.0 && bitrate_kbps.is_finite()) {
        return Err(FitError::Domain(format!("bitrate must be positive, got {bitrate_kbps}")));
    }
    Ok(horner(&model.coefficients, model.z(model.log_base.apply(bitrate_kbps))))
}

/// Centers and scales `x` by its mean and sample standard deviation.
pub fn normalize_abscissa(x: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if x.len() < 2 {
        return Err(FitError::Degenerate(format!("need at least 2 values, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    if !(std > 0.0) || !std.is_finite() {
        return Err(FitError::Degenerate("abscissa has zero variance".into()));
    }
    Ok((x.iter().map(|v| (v - mean) / std).collect(), mean, std))
}

fn check_inputs(z: &[f64], y: &[f64], degree: u32) -> Result<()> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        return Err(FitError::Degree(degree));
    }
    if z.len() != y.len() {
        return Err(FitError::Domain(format!("{} abscissas vs {} ordinates", z.len(), y.len())));
    }
    let p = degree as usize + 1;
    if z.len() <= p {
        return Err(FitError::DegreesOfFreedom { n: z.len(), p });
    }
    if z.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::Domain("non-finite data".into()));
    }
    Ok(())
}

/// QR factors of the column-equilibrated Vandermonde matrix.
struct Decomposition {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    /// Euclidean norm of each raw design column.
    scale: Vec<f64>,
}

fn vandermonde(z: &[f64], degree: u32) -> DMatrix<f64> {
    let p = degree as usize + 1;
    DMatrix::from_fn(z.len(), p, |i, j| z[i].powi((degree as usize - j) as i32))
}

fn decompose(z: &[f64], degree: u32) -> Result<Decomposition> {
    let mut a = vandermonde(z, degree);
    let mut scale = Vec::with_capacity(a.ncols());
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        let s = if norm > 0.0 { norm } else { 1.0 };
        col /= s;
        scale.push(s);
    }
    let (n, p) = a.shape();
    let qr = a.qr();
    let r = qr.r();
    let q = qr.q();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let tol = n.max(p) as f64 * f64::EPSILON * max;
    if let Some(k) = diag.iter().position(|&d| d <= tol) {
        return Err(FitError::Conditioning(format!(
            "design of degree {degree} is rank deficient at column {k} (too few distinct abscissas)"
        )));
    }
    Ok(Decomposition { q, r, scale })
}

/// Least-squares polynomial coefficients, highest power first.
///
/// Solved through a Householder QR of the column-scaled design matrix, never
/// through the normal equations.
pub fn polyfit(z: &[f64], y: &[f64], degree: u32) -> Result<Vec<f64>> {
    check_inputs(z, y, degree)?;
    let d = decompose(z, degree)?;
    solve(&d, y)
}

fn solve(d: &Decomposition, y: &[f64]) -> Result<Vec<f64>> {
    let qty = d.q.transpose() * DVector::from_column_slice(y);
    let beta = d
        .r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| FitError::Conditioning("triangular solve failed".into()))?;
    Ok(beta.iter().zip(&d.scale).map(|(b, s)| b / s).collect())
}

pub fn residuals(coefficients: &[f64], z: &[f64], y: &[f64]) -> Vec<f64> {
    z.iter().zip(y).map(|(&zi, &yi)| yi - horner(coefficients, zi)).collect()
}

/// `1 − SSE/SST`. Constant data has no variance to explain: a fit within
/// rounding of it scores 1, anything else 0.
pub fn r_squared(y: &[f64], predicted: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sse: f64 = y.iter().zip(predicted).map(|(a, b)| (a - b) * (a - b)).sum();
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst == 0.0 {
        let tiny = 1e-12 * mean.abs().max(1.0);
        return if sse <= y.len() as f64 * tiny * tiny { 1.0 } else { 0.0 };
    }
    1.0 - sse / sst
}

/// `(RMSE, R²)` with RMSE = √(SSE / (n − p)).
pub fn goodness_of_fit(coefficients: &[f64], z: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (n, p) = (z.len(), coefficients.len());
    if n <= p {
        return Err(FitError::DegreesOfFreedom { n, p });
    }
    let res = residuals(coefficients, z, y);
    let sse: f64 = res.iter().map(|r| r * r).sum();
    let predicted: Vec<f64> = z.iter().map(|&zi| horner(coefficients, zi)).collect();
    Ok(((sse / (n - p) as f64).sqrt(), r_squared(y, &predicted)))
}

/// Two-sided 97.5% Student-t quantile.
pub fn t_quantile_975(dof: usize) -> Result<f64> {
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| FitError::Domain(format!("t distribution with {dof} dof: {e}")))?;
    Ok(t.inverse_cdf(0.975))
}

/// 95% intervals `p_k ± t·se(p_k)` from the residual-variance-scaled inverse
/// Gram matrix.
pub fn confidence_bounds(coefficients: &[f64], z: &[f64], y: &[f64]) -> Result<Vec<[f64; 2]>> {
    let p = coefficients.len();
    if p < 2 {
        return Err(FitError::Degree(0));
    }
    let degree = (p - 1) as u32;
    check_inputs(z, y, degree)?;
    let d = decompose(z, degree)?;
    let se = standard_errors(&d, coefficients, z, y)?;
    let t = t_quantile_975(z.len() - p)?;
    Ok(coefficients
        .iter()
        .zip(se)
        .map(|(&c, s)| [c - t * s, c + t * s])
        .collect())
}

fn standard_errors(d: &Decomposition, coefficients: &[f64], z: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (z.len(), coefficients.len());
    let sse: f64 = residuals(coefficients, z, y).iter().map(|r| r * r).sum();
    let sigma2 = sse / (n - p) as f64;
    let r_inv = d
        .r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| FitError::Conditioning("singular R factor".into()))?;
    // (AᵀA)⁻¹ for the scaled design is R⁻¹R⁻ᵀ; undo the column scaling
    Ok((0..p)
        .map(|k| {
            let row = r_inv.row(k);
            let var_scaled = row.dot(&row);
            (sigma2 * var_scaled).sqrt() / d.scale[k]
        })
        .collect())
}

/// Options for [`fit_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub degree: u32,
    pub normalize: bool,
    pub log_base: LogBase,
}

/// Fits a full model to `(log_bitrate, quality)` pairs, with the log already
/// taken in `options.log_base`.
pub fn fit_model(
    codec: Codec,
    metric: Metric,
    log_bitrate: &[f64],
    quality: &[f64],
    options: FitOptions,
) -> Result<PolyModel> {
    let (z, x_mean, x_std) = if options.normalize {
        normalize_abscissa(log_bitrate)?
    } else {
        (log_bitrate.to_vec(), 0.0, 1.0)
    };
    check_inputs(&z, quality, options.degree)?;
    let d = decompose(&z, options.degree)?;
    let coefficients = solve(&d, quality)?;
    let (rmse, r2) = goodness_of_fit(&coefficients, &z, quality)?;
    let se = standard_errors(&d, &coefficients, &z, quality)?;
    let t = t_quantile_975(z.len() - coefficients.len())?;
    let ci_95 = coefficients.iter().zip(se).map(|(&c, s)| [c - t * s, c + t * s]).collect();
    let lo = log_bitrate.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = log_bitrate.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(PolyModel {
        codec,
        metric,
        degree: options.degree,
        coefficients,
        x_mean,
        x_std,
        rmse: Some(rmse),
        r_squared: Some(r2),
        ci_95,
        n_points: z.len(),
        log_base: options.log_base,
        bitrate_range_kbps: Some([options.log_base.invert(lo), options.log_base.invert(hi)]),
    })
}
