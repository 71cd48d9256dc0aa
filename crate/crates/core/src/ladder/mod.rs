//! Encoding ladder: plan the clip × codec × resolution × CRF grid, drive the
//! external transcoder, and measure every encode at native resolution.

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::tool::ToolError;
use crate::yuv::YuvError;

mod config;
mod plan;
mod probe;
mod run;
mod transcoder;

pub use config::{ClipSpec, LadderConfig, ScaleFilter};
pub use plan::{job_key, plan_ladder, EncodeJob, JobPaths, ENCODER_ARGS_REVISION};
pub use probe::{
    fallback_bitrate_kbps, parse_ffprobe_json, rule_of_thumb_kbps, BitrateSource, ProbeReport,
};
pub use run::{
    run_job, run_ladder, trend_violations, JobOutcome, JobStatus, LadderRun, RunManifest,
    TrendViolation,
};
pub use transcoder::{encoder_args, FfmpegTranscoder, Transcoder};

#[derive(Debug, Error)]
pub enum LadderError {
    #[error("invalid ladder configuration: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("pipeline integrity: {0}")]
    Integrity(String),
    #[error("{} job(s) failed: {}", .0.len(), .0.join(", "))]
    JobsFailed(Vec<String>),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Yuv(#[from] YuvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LadderError> = std::result::Result<T, E>;
