use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::{goodness_of_fit, polyfit, MAX_DEGREE, MIN_DEGREE};
use super::{FitError, Result};

/// Minimum number of points for a full 1–8 sweep.
pub const SWEEP_MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeSweepRow {
    pub degree: u32,
    pub rmse: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSweep {
    pub rows: Vec<DegreeSweepRow>,
    /// Degrees whose fit failed, with the reason.
    pub failed: Vec<(u32, FitError)>,
}

/// Fits every degree from 1 to 8 and reports RMSE / R² for each.
pub fn degree_sweep(z: &[f64], y: &[f64]) -> Result<DegreeSweep> {
    if z.len() < SWEEP_MIN_POINTS {
        return Err(FitError::InsufficientData {
            needed: SWEEP_MIN_POINTS,
            got: z.len(),
        });
    }
    let results: Vec<(u32, Result<DegreeSweepRow>)> = (MIN_DEGREE..=MAX_DEGREE)
        .into_par_iter()
        .map(|degree| {
            let row = polyfit(z, y, degree).and_then(|c| {
                let (rmse, r_squared) = goodness_of_fit(&c, z, y)?;
                Ok(DegreeSweepRow { degree, rmse, r_squared })
            });
            (degree, row)
        })
        .collect();
    let mut sweep = DegreeSweep {
        rows: Vec::new(),
        failed: Vec::new(),
    };
    for (degree, r) in results {
        match r {
            Ok(row) => sweep.rows.push(row),
            Err(e) => sweep.failed.push((degree, e)),
        }
    }
    Ok(sweep)
}

/// Lowest RMSE wins; ties go to the higher R², then to the lower degree.
///
/// Comparisons are exact, so the choice does not depend on row order.
pub fn select_degree(rows: &[DegreeSweepRow]) -> Result<u32> {
    rows.iter()
        .filter(|r| r.rmse.is_finite() && r.r_squared.is_finite())
        .min_by(|a, b| {
            a.rmse
                .total_cmp(&b.rmse)
                .then(b.r_squared.total_cmp(&a.r_squared))
                .then(a.degree.cmp(&b.degree))
        })
        .map(|r| r.degree)
        .ok_or(FitError::InsufficientData { needed: 1, got: 0 })
}
