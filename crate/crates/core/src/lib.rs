//! Quality-rate analysis for H.264, H.265 and VP9 encode ladders.
//!
//! The pipeline runs CRF ladders through FFmpeg at several resolutions
//! ([`ladder`]), measures bitrate, PSNR and VMAF ([`metrics`]), describes
//! content with SI/TI ([`features`]), extracts per-codec rate-quality hulls
//! in the log-bitrate plane ([`hull`]) and fits log-polynomial models to the
//! hull points ([`fit`]). [`report`] holds the CSV/JSON/SVG outputs.

pub mod cli;
pub mod domain;
pub mod features;
pub mod fit;
pub mod hull;
pub mod ladder;
pub mod metrics;
pub mod report;
pub mod tool;
pub mod yuv;

pub use domain::{Codec, EncodePoint, LogBase, Metric, Resolution};
