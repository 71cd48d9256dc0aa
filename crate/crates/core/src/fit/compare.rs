use serde::{Deserialize, Serialize};

use super::poly::{evaluate_model, PolyModel};
use super::{FitError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub bitrates_kbps: Vec<f64>,
    pub quality_a: Vec<f64>,
    pub quality_b: Vec<f64>,
    /// `quality_b − quality_a` per grid point.
    pub delta: Vec<f64>,
    pub mean_delta: f64,
    pub mean_abs_delta: f64,
    pub max_abs_delta: f64,
    /// Pearson correlation of the two sampled curves; `None` if either is
    /// constant on the grid.
    pub correlation: Option<f64>,
}

fn range_of(m: &PolyModel) -> Result<[f64; 2]> {
    m.bitrate_range_kbps.ok_or_else(|| {
        FitError::Range(format!("{} {} model has no fitted bitrate range", m.codec, m.metric))
    })
}

/// `points` log-spaced bitrates spanning the overlap of both fitted ranges.
pub fn common_bitrate_grid(a: &PolyModel, b: &PolyModel, points: usize) -> Result<Vec<f64>> {
    let [a_lo, a_hi] = range_of(a)?;
    let [b_lo, b_hi] = range_of(b)?;
    let (lo, hi) = (a_lo.max(b_lo), a_hi.min(b_hi));
    if !(lo < hi) {
        return Err(FitError::Range(format!(
            "fitted ranges [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] kb/s do not overlap"
        )));
    }
    if points < 2 {
        return Err(FitError::Range("grid needs at least 2 points".into()));
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Samples both models on `grid` and summarizes their disagreement.
pub fn compare_codec_models(a: &PolyModel, b: &PolyModel, grid: &[f64]) -> Result<ModelComparison> {
    if a.metric != b.metric {
        return Err(FitError::Domain(format!("metric mismatch: {} vs {}", a.metric, b.metric)));
    }
    if grid.is_empty() {
        return Err(FitError::Range("empty bitrate grid".into()));
    }
    for m in [a, b] {
        if let Some([lo, hi]) = m.bitrate_range_kbps {
            // allow for rounding at the ends of a grid built from exp(ln(..))
            let slack = 1e-9 * hi;
            if let Some(g) = grid.iter().find(|&&g| g < lo - slack || g > hi + slack) {
                return Err(FitError::Range(format!(
                    "grid bitrate {g} kb/s outside the {} model's range [{lo}, {hi}]",
                    m.codec
                )));
            }
        }
    }
    let quality_a = grid.iter().map(|&g| evaluate_model(a, g)).collect::<Result<Vec<_>>>()?;
    let quality_b = grid.iter().map(|&g| evaluate_model(b, g)).collect::<Result<Vec<_>>>()?;
    let delta: Vec<f64> = quality_a.iter().zip(&quality_b).map(|(qa, qb)| qb - qa).collect();
    let n = delta.len() as f64;
    Ok(ModelComparison {
        mean_delta: delta.iter().sum::<f64>() / n,
        mean_abs_delta: delta.iter().map(|d| d.abs()).sum::<f64>() / n,
        max_abs_delta: delta.iter().map(|d| d.abs()).fold(0.0, f64::max),
        correlation: pearson(&quality_a, &quality_b),
        bitrates_kbps: grid.to_vec(),
        quality_a,
        quality_b,
        delta,
    })
}
