//! Spatial (SI) and temporal (TI) information of a sequence, on luma only.
//!
//! Both use the population standard deviation. TI differences are summed
//! exactly in integers; SI takes the Sobel gradient magnitude over the frame
//! interior (the 1-pixel border has no full 3×3 neighbourhood and is skipped).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::yuv::{FrameYuv420, Plane};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("need at least {needed} frames, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("geometry error: {0}")]
    Geometry(String),
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentFeatures {
    pub si: f64,
    pub ti: f64,
    pub per_frame_si: Vec<f64>,
    /// One entry per adjacent frame pair.
    pub per_frame_ti: Vec<f64>,
}

fn check_same_size(frames: &[&Plane]) -> Result<()> {
    let first = frames[0];
    if let Some(bad) = frames
        .iter()
        .find(|p| p.width != first.width || p.height != first.height)
    {
        return Err(FeatureError::Geometry(format!(
            "frames differ in size: {}x{} vs {}x{}",
            first.width, first.height, bad.width, bad.height
        )));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation of `cur − prev`, computed from exact
/// integer moments.
fn difference_std(prev: &Plane, cur: &Plane) -> f64 {
    let (sum, sum_sq) = prev
        .data
        .iter()
        .zip(&cur.data)
        .fold((0i64, 0i64), |(s, sq), (&a, &b)| {
            let d = i64::from(b) - i64::from(a);
            (s + d, sq + d * d)
        });
    let n = prev.data.len() as i128;
    // n²·var = n·Σd² − (Σd)², exact in i128
    let scaled = n * i128::from(sum_sq) - i128::from(sum) * i128::from(sum);
    (scaled as f64).sqrt() / n as f64
}

/// Per-pair TI and its mean over the sequence.
pub fn temporal_information(luma: &[&Plane]) -> Result<(Vec<f64>, f64)> {
    if luma.len() < 2 {
        return Err(FeatureError::InsufficientData {
            needed: 2,
            got: luma.len(),
        });
    }
    check_same_size(luma)?;
    let per_frame: Vec<f64> = luma
        .par_windows(2)
        .map(|w| difference_std(w[0], w[1]))
        .collect();
    let ti = mean(&per_frame);
    Ok((per_frame, ti))
}

/// Sobel gradient magnitudes over the interior of `plane`, row-major.
pub fn sobel_magnitude(plane: &Plane) -> Vec<f64> {
    let (w, h) = (plane.width as usize, plane.height as usize);
    let mut out = Vec::with_capacity((w - 2) * (h - 2));
    let px = |x: usize, y: usize| i32::from(plane.data[y * w + x]);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            let gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
            out.push(f64::from(gx * gx + gy * gy).sqrt());
        }
    }
    out
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Per-frame SI and its mean over the sequence.
pub fn spatial_information(luma: &[&Plane]) -> Result<(Vec<f64>, f64)> {
    if luma.is_empty() {
        return Err(FeatureError::InsufficientData { needed: 1, got: 0 });
    }
    check_same_size(luma)?;
    if luma[0].width < 3 || luma[0].height < 3 {
        return Err(FeatureError::Geometry(format!(
            "SI needs frames of at least 3x3, got {}x{}",
            luma[0].width, luma[0].height
        )));
    }
    let per_frame: Vec<f64> = luma
        .par_iter()
        .map(|p| population_std(&sobel_magnitude(p)))
        .collect();
    let si = mean(&per_frame);
    Ok((per_frame, si))
}

/// SI and TI of a decoded sequence.
pub fn content_features(frames: &[FrameYuv420]) -> Result<ContentFeatures> {
    let luma: Vec<&Plane> = frames.iter().map(|f| &f.y).collect();
    let (per_frame_si, si) = spatial_information(&luma)?;
    let (per_frame_ti, ti) = temporal_information(&luma)?;
    Ok(ContentFeatures {
        si,
        ti,
        per_frame_si,
        per_frame_ti,
    })
}
