use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{LadderError, Result};
use crate::domain::{Codec, Resolution};
use crate::metrics::VmafConfig;
use crate::tool::{MediaInput, ToolPaths};
use crate::yuv::{self, StreamInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleFilter {
    #[default]
    Lanczos,
    Bicubic,
}

impl ScaleFilter {
    /// swscale flag name.
    pub fn flag(self) -> &'static str {
        match self {
            ScaleFilter::Lanczos => "lanczos",
            ScaleFilter::Bicubic => "bicubic",
        }
    }
}

impl std::str::FromStr for ScaleFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lanczos" => Ok(ScaleFilter::Lanczos),
            "bicubic" => Ok(ScaleFilter::Bicubic),
            _ => Err(format!("unknown scale filter `{s}` (expected lanczos or bicubic)")),
        }
    }
}

/// One source clip. Headerless `.yuv` needs `info`; Y4M fills it from its header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSpec {
    pub id: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<StreamInfo>,
}

impl ClipSpec {
    pub fn is_raw(&self) -> bool {
        yuv::Container::from_path(&self.path) == yuv::Container::Raw
            && !sniff_y4m(&self.path).unwrap_or(false)
    }

    /// The clip as a transcoder input.
    pub fn media_input(&self) -> Result<MediaInput> {
        let info = self.info.ok_or_else(|| {
            LadderError::Validation(format!("clip `{}` has no stream info", self.id))
        })?;
        Ok(if self.is_raw() {
            MediaInput::raw(&self.path, info)
        } else {
            MediaInput::file(&self.path)
        })
    }

    pub fn native_resolution(&self) -> Option<Resolution> {
        self.info.map(|i| Resolution::new(i.width, i.height))
    }
}

fn sniff_y4m(path: &Path) -> std::io::Result<bool> {
    use std::io::Read;
    let mut magic = [0u8; 9];
    let mut f = std::fs::File::open(path)?;
    let n = f.read(&mut magic)?;
    Ok(&magic[..n] == b"YUV4MPEG2")
}

/// The experiment manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub clips: Vec<ClipSpec>,
    #[serde(default = "default_codecs")]
    pub codecs: Vec<Codec>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<Resolution>,
    #[serde(default = "default_crfs")]
    pub crf_values: Vec<u32>,
    #[serde(default)]
    pub scale_filter: ScaleFilter,
    #[serde(default = "default_workdir")]
    pub workdir: PathBuf,
    #[serde(default)]
    pub tools: ToolPaths,
    /// Maximum number of jobs (and therefore tool processes) in flight.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_true")]
    pub vmaf: bool,
    #[serde(default)]
    pub vmaf_options: VmafConfig,
    #[serde(default)]
    pub keep_intermediates: bool,
}

fn default_codecs() -> Vec<Codec> {
    Codec::ALL.to_vec()
}

fn default_resolutions() -> Vec<Resolution> {
    vec![Resolution::QHD, Resolution::FHD, Resolution::UHD]
}

fn default_crfs() -> Vec<u32> {
    (1..=10).map(|i| i * 5).collect()
}

fn default_workdir() -> PathBuf {
    "qrhull-work".into()
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn default_true() -> bool {
    true
}

impl LadderConfig {
    pub fn new(clips: Vec<ClipSpec>) -> Self {
        Self {
            clips,
            codecs: default_codecs(),
            resolutions: default_resolutions(),
            crf_values: default_crfs(),
            scale_filter: ScaleFilter::default(),
            workdir: default_workdir(),
            tools: ToolPaths::default(),
            jobs: default_jobs(),
            vmaf: true,
            vmaf_options: VmafConfig::default(),
            keep_intermediates: false,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: LadderConfig = serde_json::from_str(&text)
            .map_err(|e| LadderError::Parse(format!("{}: {e}", path.display())))?;
        // relative clip and work paths are taken relative to the config file
        if let Some(base) = path.parent() {
            for clip in &mut cfg.clips {
                if clip.path.is_relative() {
                    clip.path = base.join(&clip.path);
                }
            }
            if cfg.workdir.is_relative() {
                cfg.workdir = base.join(&cfg.workdir);
            }
        }
        Ok(cfg)
    }

    /// Fills in stream info from Y4M headers where it is missing.
    pub fn resolve_clips(&mut self) -> Result<()> {
        for clip in &mut self.clips {
            if clip.info.is_none() {
                let reader = yuv::open_video(&clip.path, None).map_err(|e| {
                    LadderError::Validation(format!(
                        "clip `{}` ({}): {e}",
                        clip.id,
                        clip.path.display()
                    ))
                })?;
                clip.info = Some(*reader.info());
            }
        }
        Ok(())
    }

    /// Checks the CRF list, resolutions and clip geometry.
    pub fn validate(&self) -> Result<()> {
        if self.crf_values.is_empty() {
            return Err(LadderError::Validation("crf_values is empty".into()));
        }
        if let Some(w) = self.crf_values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(LadderError::Validation(format!(
                "crf_values must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let max_crf = *self.crf_values.last().expect("non-empty");
        for codec in &self.codecs {
            if max_crf > codec.max_crf() {
                return Err(LadderError::Validation(format!(
                    "CRF {max_crf} is invalid for {}: legal range is 0..={}",
                    codec.label(),
                    codec.max_crf()
                )));
            }
        }
        if self.jobs == 0 {
            return Err(LadderError::Validation("jobs must be at least 1".into()));
        }
        for r in &self.resolutions {
            if r.width < 2 || r.height < 2 || r.width % 2 != 0 || r.height % 2 != 0 {
                return Err(LadderError::Validation(format!("resolution {r} must be even-dimensioned")));
            }
        }
        let mut ids: Vec<&str> = self.clips.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(LadderError::Validation(format!("duplicate clip id `{}`", w[0])));
        }
        for clip in &self.clips {
            if clip.id.is_empty() || clip.id.contains(['/', '\\', ',', '"']) {
                return Err(LadderError::Validation(format!(
                    "clip id `{}` must be non-empty and free of path separators, commas and quotes",
                    clip.id
                )));
            }
            let native = clip.native_resolution().ok_or_else(|| {
                LadderError::Validation(format!("clip `{}` has no stream info", clip.id))
            })?;
            for r in &self.resolutions {
                if r.width > native.width || r.height > native.height {
                    return Err(LadderError::Validation(format!(
                        "resolution {r} exceeds clip `{}` source resolution {native}",
                        clip.id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yuv::FrameRate;

    fn clip(w: u32, h: u32) -> ClipSpec {
        ClipSpec {
            id: "a".into(),
            path: "a.yuv".into(),
            info: Some(StreamInfo::new(w, h, FrameRate::new(25, 1).unwrap()).unwrap()),
        }
    }

    #[test]
    fn defaults_follow_the_experiment() {
        let cfg: LadderConfig = serde_json::from_str(r#"{"clips": []}"#).unwrap();
        assert_eq!(cfg.crf_values, vec![5, 10, 15, 20, 25, 30, 35, 40, 45, 50]);
        assert_eq!(cfg.resolutions, vec![Resolution::QHD, Resolution::FHD, Resolution::UHD]);
        assert_eq!(cfg.scale_filter, ScaleFilter::Lanczos);
        assert_eq!(cfg.codecs, Codec::ALL.to_vec());
    }

    #[test]
    fn crf_ranges_per_codec() {
        let mut cfg = LadderConfig::new(vec![clip(3840, 2160)]);
        cfg.crf_values = vec![55];
        cfg.codecs = vec![Codec::Vp9];
        cfg.validate().unwrap();
        cfg.codecs = vec![Codec::H264];
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("0..=51") && err.contains("H.264"), "{err}");
    }

    #[test]
    fn crf_list_must_increase() {
        let mut cfg = LadderConfig::new(vec![clip(3840, 2160)]);
        cfg.crf_values = vec![10, 10];
        assert!(cfg.validate().is_err());
        cfg.crf_values = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resolution_must_fit_source() {
        let cfg = LadderConfig::new(vec![clip(1920, 1080)]);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("3840x2160"), "{err}");
    }
}
