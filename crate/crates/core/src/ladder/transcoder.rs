use std::ffi::OsString;
use std::path::Path;

use log::warn;

use super::config::ScaleFilter;
use super::probe::{parse_ffprobe_json, ProbeReport};
use super::Result;
use crate::domain::{Codec, Resolution};
use crate::metrics::{self, VmafConfig};
use crate::tool::{self, MediaInput, ToolPaths};

/// The external operations a ladder job needs.
pub trait Transcoder: Send + Sync {
    /// Identifies the tool build; part of every job key.
    fn fingerprint(&self) -> String;

    /// Resamples `input` to `target` and writes Y4M.
    fn scale(&self, input: &MediaInput, target: Resolution, filter: ScaleFilter, output: &Path) -> Result<()>;

    fn encode(&self, input: &MediaInput, codec: Codec, crf: u32, output: &Path) -> Result<()>;

    /// Decodes to 8-bit 4:2:0 Y4M.
    fn decode(&self, encoded: &Path, output: &Path) -> Result<()>;

    /// Bitrate as reported by a probe tool, or `None` if no probe is available.
    fn probe(&self, encoded: &Path) -> Result<Option<ProbeReport>>;

    fn vmaf(&self, reference: &MediaInput, distorted: &Path, config: &VmafConfig, log: &Path) -> Result<f64>;
}

/// Pinned encoder arguments: tool defaults apart from CRF.
pub fn encoder_args(codec: Codec, crf: u32) -> Vec<String> {
    let crf = crf.to_string();
    let args: Vec<&str> = match codec {
        Codec::H264 => vec!["-c:v", "libx264", "-crf", &crf],
        Codec::H265 => vec!["-c:v", "libx265", "-crf", &crf, "-x265-params", "log-level=error"],
        // constant-quality mode needs the bitrate cap removed
        Codec::Vp9 => vec!["-c:v", "libvpx-vp9", "-crf", &crf, "-b:v", "0"],
    };
    args.into_iter().map(String::from).collect()
}

pub struct FfmpegTranscoder {
    tools: ToolPaths,
    version: String,
    has_probe: bool,
}

impl FfmpegTranscoder {
    /// Fails with a dependency error if the transcoder cannot be run.
    pub fn new(tools: ToolPaths) -> Result<Self> {
        let version = tool::version_line(&tools.ffmpeg)?;
        let has_probe = tool::is_available(&tools.ffprobe);
        if !has_probe {
            warn!(
                "{} not available; bitrates will be computed from file size and duration",
                tools.ffprobe.display()
            );
        }
        Ok(Self {
            tools,
            version,
            has_probe,
        })
    }

    pub fn tools(&self) -> &ToolPaths {
        &self.tools
    }

    pub fn has_probe(&self) -> bool {
        self.has_probe
    }

    fn ffmpeg(&self, input: &MediaInput, rest: &[&str], output: &Path) -> Result<()> {
        let mut args: Vec<OsString> = ["-hide_banner", "-nostdin", "-y", "-loglevel", "error"]
            .map(OsString::from)
            .to_vec();
        args.extend(input.input_args());
        args.extend(rest.iter().map(OsString::from));
        args.push(output.as_os_str().to_owned());
        tool::run(&self.tools.ffmpeg, &args)?;
        Ok(())
    }
}

impl Transcoder for FfmpegTranscoder {
    fn fingerprint(&self) -> String {
        self.version.clone()
    }

    fn scale(&self, input: &MediaInput, target: Resolution, filter: ScaleFilter, output: &Path) -> Result<()> {
        let vf = format!("scale={}:{}:flags={}", target.width, target.height, filter.flag());
        self.ffmpeg(input, &["-vf", &vf, "-pix_fmt", "yuv420p", "-fps_mode", "passthrough"], output)
    }

    fn encode(&self, input: &MediaInput, codec: Codec, crf: u32, output: &Path) -> Result<()> {
        let mut rest = vec!["-an".to_string(), "-pix_fmt".into(), "yuv420p".into()];
        rest.extend(encoder_args(codec, crf));
        let rest: Vec<&str> = rest.iter().map(String::as_str).collect();
        self.ffmpeg(input, &rest, output)
    }

    fn decode(&self, encoded: &Path, output: &Path) -> Result<()> {
        self.ffmpeg(
            &MediaInput::file(encoded),
            &["-pix_fmt", "yuv420p", "-fps_mode", "passthrough"],
            output,
        )
    }

    fn probe(&self, encoded: &Path) -> Result<Option<ProbeReport>> {
        if !self.has_probe {
            return Ok(None);
        }
        let args: Vec<OsString> = [
            "-v",
            "error",
            "-print_format",
            "json",
            "-show_format",
            "-show_streams",
        ]
        .map(OsString::from)
        .into_iter()
        .chain([encoded.as_os_str().to_owned()])
        .collect();
        let out = tool::run(&self.tools.ffprobe, &args)?;
        parse_ffprobe_json(&String::from_utf8_lossy(&out.stdout)).map(Some)
    }

    fn vmaf(&self, reference: &MediaInput, distorted: &Path, config: &VmafConfig, log: &Path) -> Result<f64> {
        Ok(metrics::vmaf_score(
            &self.tools.ffmpeg,
            reference,
            &MediaInput::file(distorted),
            config,
            log,
        )?)
    }
}
