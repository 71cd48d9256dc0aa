//! Full-reference quality metrics: native MSE/PSNR and an external VMAF adapter.

use thiserror::Error;

use crate::tool::ToolError;
use crate::yuv::YuvError;

mod psnr;
mod vmaf;

pub use psnr::{
    frame_psnr, mse_plane, psnr_420_combine, psnr_from_mse, sequence_psnr, sequence_psnr_files,
    sequence_psnr_frames, summarize, FramePsnr, SequenceQuality, PSNR_CLAMP_DB,
};
pub use vmaf::{filter_graph, parse_vmaf_log, vmaf_for_files, vmaf_score, VmafConfig};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("frame count mismatch: reference has {reference} frames, distorted has {distorted}")]
    Length { reference: usize, distorted: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Yuv(#[from] YuvError),
    #[error(transparent)]
    Tool(#[from] ToolError),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;
