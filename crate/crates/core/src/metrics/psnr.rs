//! Full-reference MSE and PSNR for 8-bit 4:2:0 frames.
//!
//! Squared errors are summed in `u64`, so a plane's MSE is exact up to the
//! final division and independent of how the work is split across threads.

use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricsError, Result};
use crate::yuv::{self, FrameYuv420, Plane, StreamInfo, YuvReader};

/// PSNR reported when MSE is exactly zero.
pub const PSNR_CLAMP_DB: f64 = 100.0;

/// Frames compared per parallel batch in [`sequence_psnr`].
const BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePsnr {
    pub frame_index: u64,
    pub mse_y: f64,
    pub mse_u: f64,
    pub mse_v: f64,
    pub psnr_y: f64,
    pub psnr_u: f64,
    pub psnr_v: f64,
    /// `(4·Y + U + V) / 6` of the plane PSNRs.
    pub psnr_420: f64,
    /// PSNR of the sample-weighted MSE, `(4·mse_y + mse_u + mse_v) / 6`.
    /// This is what FFmpeg's psnr filter calls `psnr_avg`.
    pub psnr_pooled: f64,
    /// True when any plane hit the zero-MSE clamp.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceQuality {
    pub frame_count: usize,
    /// Arithmetic mean of per-frame `psnr_420`; the canonical sequence PSNR.
    pub mean_psnr_420: f64,
    pub mean_psnr_y: f64,
    /// PSNR of the MSE pooled over all samples of all frames.
    pub pooled_psnr: f64,
    pub clamped_frames: usize,
    pub vmaf: Option<f64>,
    pub per_frame: Vec<FramePsnr>,
}

/// Sum of squared sample differences.
fn sse_plane(reference: &Plane, distorted: &Plane) -> Result<u64> {
    if reference.width != distorted.width || reference.height != distorted.height {
        return Err(MetricsError::Geometry(format!(
            "planes differ: {}x{} vs {}x{}",
            reference.width, reference.height, distorted.width, distorted.height
        )));
    }
    Ok(reference
        .data
        .iter()
        .zip(&distorted.data)
        .map(|(&a, &b)| {
            let d = i32::from(a) - i32::from(b);
            (d * d) as u64
        })
        .sum())
}

/// Mean squared error between two planes of identical size.
pub fn mse_plane(reference: &Plane, distorted: &Plane) -> Result<f64> {
    let sse = sse_plane(reference, distorted)?;
    Ok(sse as f64 / reference.data.len() as f64)
}

/// `10·log10((2^b − 1)² / mse)`, clamped to [`PSNR_CLAMP_DB`] at zero MSE.
pub fn psnr_from_mse(mse: f64, bit_depth: u8) -> Result<f64> {
    if !(mse >= 0.0) || !mse.is_finite() {
        return Err(MetricsError::Domain(format!("MSE must be finite and >= 0, got {mse}")));
    }
    if !(1..=16).contains(&bit_depth) {
        return Err(MetricsError::Domain(format!("unsupported bit depth {bit_depth}")));
    }
    if mse == 0.0 {
        return Ok(PSNR_CLAMP_DB);
    }
    let peak = f64::from((1u32 << bit_depth) - 1);
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Combines plane PSNRs with 4:2:0 sample-count weights (4 luma : 1 : 1).
pub fn psnr_420_combine(psnr_y: f64, psnr_u: f64, psnr_v: f64) -> Result<f64> {
    if !(psnr_y.is_finite() && psnr_u.is_finite() && psnr_v.is_finite()) {
        return Err(MetricsError::Domain(format!(
            "non-finite PSNR input ({psnr_y}, {psnr_u}, {psnr_v})"
        )));
    }
    Ok((4.0 * psnr_y + psnr_u + psnr_v) / 6.0)
}

pub fn frame_psnr(reference: &FrameYuv420, distorted: &FrameYuv420) -> Result<FramePsnr> {
    if reference.width() != distorted.width() || reference.height() != distorted.height() {
        return Err(MetricsError::Geometry(format!(
            "frame {}: {}x{} vs {}x{}",
            reference.index,
            reference.width(),
            reference.height(),
            distorted.width(),
            distorted.height()
        )));
    }
    let sse = [
        sse_plane(&reference.y, &distorted.y)?,
        sse_plane(&reference.u, &distorted.u)?,
        sse_plane(&reference.v, &distorted.v)?,
    ];
    let counts = [
        reference.y.data.len() as f64,
        reference.u.data.len() as f64,
        reference.v.data.len() as f64,
    ];
    let mse = [sse[0] as f64 / counts[0], sse[1] as f64 / counts[1], sse[2] as f64 / counts[2]];
    let psnr_y = psnr_from_mse(mse[0], 8)?;
    let psnr_u = psnr_from_mse(mse[1], 8)?;
    let psnr_v = psnr_from_mse(mse[2], 8)?;
    let total: u64 = sse.iter().sum();
    let pooled = psnr_from_mse(total as f64 / counts.iter().sum::<f64>(), 8)?;
    Ok(FramePsnr {
        frame_index: reference.index,
        mse_y: mse[0],
        mse_u: mse[1],
        mse_v: mse[2],
        psnr_y,
        psnr_u,
        psnr_v,
        psnr_420: psnr_420_combine(psnr_y, psnr_u, psnr_v)?,
        psnr_pooled: pooled,
        clamped: sse.contains(&0),
    })
}

/// Aggregates per-frame results in frame order.
pub fn summarize(per_frame: Vec<FramePsnr>) -> Result<SequenceQuality> {
    if per_frame.is_empty() {
        return Err(MetricsError::Length {
            reference: 0,
            distorted: 0,
        });
    }
    let n = per_frame.len() as f64;
    let mean_psnr_420 = per_frame.iter().map(|f| f.psnr_420).sum::<f64>() / n;
    let mean_psnr_y = per_frame.iter().map(|f| f.psnr_y).sum::<f64>() / n;
    let pooled_mse =
        per_frame.iter().map(|f| (4.0 * f.mse_y + f.mse_u + f.mse_v) / 6.0).sum::<f64>() / n;
    Ok(SequenceQuality {
        frame_count: per_frame.len(),
        mean_psnr_420,
        mean_psnr_y,
        pooled_psnr: psnr_from_mse(pooled_mse, 8)?,
        clamped_frames: per_frame.iter().filter(|f| f.clamped).count(),
        vmaf: None,
        per_frame,
    })
}

/// PSNR over two in-memory frame sequences.
pub fn sequence_psnr_frames(reference: &[FrameYuv420], distorted: &[FrameYuv420]) -> Result<SequenceQuality> {
    if reference.len() != distorted.len() {
        return Err(MetricsError::Length {
            reference: reference.len(),
            distorted: distorted.len(),
        });
    }
    let per_frame = reference
        .par_iter()
        .zip(distorted.par_iter())
        .map(|(r, d)| frame_psnr(r, d))
        .collect::<Result<Vec<_>>>()?;
    summarize(per_frame)
}

fn check_infos(a: &StreamInfo, b: &StreamInfo) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(MetricsError::Geometry(format!(
            "reference is {}x{}, distorted is {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Streams two videos in lockstep and computes per-frame PSNR.
///
/// Frames are compared in parallel batches; reduction follows frame order.
pub fn sequence_psnr<R1: BufRead, R2: BufRead>(
    reference: &mut YuvReader<R1>,
    distorted: &mut YuvReader<R2>,
) -> Result<SequenceQuality> {
    check_infos(reference.info(), distorted.info())?;
    let mut per_frame = Vec::new();
    loop {
        let a = reference.read_batch(BATCH)?;
        let b = distorted.read_batch(BATCH)?;
        if a.len() != b.len() {
            // count the tail of the longer stream for the error message
            let mut ra = per_frame.len() + a.len();
            let mut rb = per_frame.len() + b.len();
            while reference.read_frame()?.is_some() {
                ra += 1;
            }
            while distorted.read_frame()?.is_some() {
                rb += 1;
            }
            return Err(MetricsError::Length {
                reference: ra,
                distorted: rb,
            });
        }
        if a.is_empty() {
            break;
        }
        let batch = a
            .par_iter()
            .zip(b.par_iter())
            .map(|(r, d)| frame_psnr(r, d))
            .collect::<Result<Vec<_>>>()?;
        per_frame.extend(batch);
    }
    summarize(per_frame)
}

pub fn sequence_psnr_files(
    reference: &Path,
    reference_raw: Option<&StreamInfo>,
    distorted: &Path,
    distorted_raw: Option<&StreamInfo>,
) -> Result<SequenceQuality> {
    let mut a = yuv::open_video(reference, reference_raw)?;
    let mut b = yuv::open_video(distorted, distorted_raw.or(reference_raw))?;
    sequence_psnr(&mut a, &mut b)
}
