use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ClipSpec, LadderConfig, ScaleFilter};
use super::Result;
use crate::domain::{Codec, Resolution};

/// Bumped whenever the pinned encoder arguments change, so cached points
/// from older arguments are not reused.
pub const ENCODER_ARGS_REVISION: u32 = 1;

/// Where one job keeps its intermediates and its cached result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobPaths {
    pub dir: PathBuf,
    /// Downscaled source; `None` at native resolution.
    pub scaled: Option<PathBuf>,
    pub encoded: PathBuf,
    pub decoded: PathBuf,
    /// Decoded stream scaled back to native; `None` at native resolution.
    pub upscaled: Option<PathBuf>,
    pub vmaf_log: PathBuf,
    pub point: PathBuf,
}

impl JobPaths {
    fn new(dir: PathBuf, native: bool) -> Self {
        Self {
            scaled: (!native).then(|| dir.join("scaled.y4m")),
            encoded: dir.join("encoded.mp4"),
            decoded: dir.join("decoded.y4m"),
            upscaled: (!native).then(|| dir.join("upscaled.y4m")),
            vmaf_log: dir.join("vmaf.json"),
            point: dir.join("point.json"),
            dir,
        }
    }

    /// The stream compared against the source.
    pub fn compared(&self) -> &Path {
        self.upscaled.as_deref().unwrap_or(&self.decoded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeJob {
    pub key: String,
    pub clip: ClipSpec,
    pub codec: Codec,
    pub resolution: Resolution,
    pub native: Resolution,
    pub crf: u32,
    pub scale_filter: ScaleFilter,
    pub paths: JobPaths,
}

impl EncodeJob {
    pub fn is_native(&self) -> bool {
        self.resolution == self.native
    }
}

/// Content hash over every parameter that influences a job's result.
pub fn job_key(
    clip: &ClipSpec,
    codec: Codec,
    resolution: Resolution,
    crf: u32,
    config: &LadderConfig,
    tool_fingerprint: &str,
) -> String {
    let info = clip.info.map(|i| {
        format!("{}x{}@{}:{}/{}", i.width, i.height, i.frame_rate.num, i.frame_rate.den, i.bit_depth)
    });
    let canonical = format!(
        "clip={}\nsource={}\ninfo={}\ncodec={}\nresolution={}\ncrf={}\nfilter={}\nvmaf={}\nvmaf_model={}\nargs_rev={}\ntools={}\n",
        clip.id,
        clip.path.display(),
        info.unwrap_or_default(),
        codec.as_str(),
        resolution,
        crf,
        config.scale_filter.flag(),
        config.vmaf,
        config.vmaf_options.model.as_deref().unwrap_or("default"),
        ENCODER_ARGS_REVISION,
        tool_fingerprint,
    );
    hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
}

/// Expands the config into jobs ordered by clip, codec, resolution
/// (largest first) and CRF (ascending).
pub fn plan_ladder(config: &LadderConfig, tool_fingerprint: &str) -> Result<Vec<EncodeJob>> {
    config.validate()?;
    let mut resolutions = config.resolutions.clone();
    resolutions.sort_by(|a, b| b.cmp(a));
    resolutions.dedup();
    let mut jobs = Vec::new();
    for clip in &config.clips {
        let native = clip.native_resolution().expect("validated");
        for &codec in &config.codecs {
            for &resolution in &resolutions {
                for &crf in &config.crf_values {
                    let key = job_key(clip, codec, resolution, crf, config, tool_fingerprint);
                    let dir = config.workdir.join("jobs").join(format!(
                        "{}_{}_{}_crf{:02}_{}",
                        clip.id,
                        codec.as_str(),
                        resolution,
                        crf,
                        key
                    ));
                    jobs.push(EncodeJob {
                        paths: JobPaths::new(dir, resolution == native),
                        key,
                        clip: clip.clone(),
                        codec,
                        resolution,
                        native,
                        crf,
                        scale_filter: config.scale_filter,
                    });
                }
            }
        }
    }
    Ok(jobs)
}
