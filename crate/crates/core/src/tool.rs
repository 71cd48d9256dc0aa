//! Spawning the external transcoder/probe binaries.

use std::ffi::{OsStr, OsString};
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::yuv::StreamInfo;

pub const FFMPEG_ENV: &str = "QRHULL_FFMPEG";
pub const FFPROBE_ENV: &str = "QRHULL_FFPROBE";

/// Keep this many trailing bytes of stderr in error messages.
const STDERR_TAIL: usize = 2000;

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("`{tool}` not found; install FFmpeg (with libx264, libx265, libvpx and libvmaf) or point {env} at the binary")]
    Missing { tool: String, env: &'static str },
    #[error("failed to run `{tool}`: {source}")]
    Spawn {
        tool: String,
        #[source]
        source: io::Error,
    },
    #[error("`{cmd}` exited with {status}:\n{stderr}")]
    Failed {
        cmd: String,
        status: String,
        stderr: String,
    },
}

/// Locations of the transcoder and probe binaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolPaths {
    #[serde(default = "default_ffmpeg")]
    pub ffmpeg: PathBuf,
    #[serde(default = "default_ffprobe")]
    pub ffprobe: PathBuf,
}

fn default_ffmpeg() -> PathBuf {
    "ffmpeg".into()
}

fn default_ffprobe() -> PathBuf {
    "ffprobe".into()
}

impl Default for ToolPaths {
    fn default() -> Self {
        Self {
            ffmpeg: default_ffmpeg(),
            ffprobe: default_ffprobe(),
        }
    }
}

impl ToolPaths {
    /// Applies the `QRHULL_FFMPEG` / `QRHULL_FFPROBE` overrides.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(p) = std::env::var_os(FFMPEG_ENV) {
            self.ffmpeg = p.into();
        }
        if let Some(p) = std::env::var_os(FFPROBE_ENV) {
            self.ffprobe = p.into();
        }
        self
    }

    pub fn from_env() -> Self {
        Self::default().with_env_overrides()
    }
}

/// A video file as the transcoder should read it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediaInput {
    pub path: PathBuf,
    /// Present for headerless `.yuv`; Y4M and containers describe themselves.
    pub raw: Option<StreamInfo>,
}

impl MediaInput {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            raw: None,
        }
    }

    pub fn raw(path: impl Into<PathBuf>, info: StreamInfo) -> Self {
        Self {
            path: path.into(),
            raw: Some(info),
        }
    }

    /// `-i` arguments, including rawvideo demuxer options when needed.
    pub fn input_args(&self) -> Vec<OsString> {
        let mut args: Vec<OsString> = Vec::new();
        if let Some(info) = &self.raw {
            for a in [
                "-f".to_string(),
                "rawvideo".into(),
                "-pix_fmt".into(),
                "yuv420p".into(),
                "-s".into(),
                format!("{}x{}", info.width, info.height),
                "-r".into(),
                format!("{}/{}", info.frame_rate.num, info.frame_rate.den),
            ] {
                args.push(a.into());
            }
        }
        args.push("-i".into());
        args.push(self.path.clone().into_os_string());
        args
    }
}

pub fn display_command(program: &Path, args: &[OsString]) -> String {
    std::iter::once(program.as_os_str())
        .chain(args.iter().map(OsString::as_os_str))
        .map(OsStr::to_string_lossy)
        .collect::<Vec<_>>()
        .join(" ")
}

fn env_for(program: &Path) -> &'static str {
    if program.to_string_lossy().contains("ffprobe") {
        FFPROBE_ENV
    } else {
        FFMPEG_ENV
    }
}

/// Runs `program` to completion, capturing output; nonzero exit is an error
/// carrying the tail of stderr.
pub fn run(program: &Path, args: &[OsString]) -> Result<Output, ToolError> {
    let cmd = display_command(program, args);
    debug!("exec `{cmd}`");
    let output = Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .output()
        .map_err(|source| {
            if source.kind() == io::ErrorKind::NotFound {
                ToolError::Missing {
                    tool: program.display().to_string(),
                    env: env_for(program),
                }
            } else {
                ToolError::Spawn {
                    tool: program.display().to_string(),
                    source,
                }
            }
        })?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        let start = stderr.len().saturating_sub(STDERR_TAIL);
        let start = (start..stderr.len())
            .find(|&i| stderr.is_char_boundary(i))
            .unwrap_or(stderr.len());
        return Err(ToolError::Failed {
            cmd,
            status: output.status.to_string(),
            stderr: stderr[start..].to_string(),
        });
    }
    Ok(output)
}

/// First line of `<program> -version`.
pub fn version_line(program: &Path) -> Result<String, ToolError> {
    let out = run(program, &["-version".into()])?;
    Ok(String::from_utf8_lossy(&out.stdout)
        .lines()
        .next()
        .unwrap_or_default()
        .trim()
        .to_string())
}

pub fn is_available(program: &Path) -> bool {
    version_line(program).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::yuv::FrameRate;

    #[test]
    fn raw_input_args() {
        let info = StreamInfo::new(64, 32, FrameRate::new(30000, 1001).unwrap()).unwrap();
        let args = MediaInput::raw("a.yuv", info).input_args();
        let s: Vec<_> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(
            s,
            ["-f", "rawvideo", "-pix_fmt", "yuv420p", "-s", "64x32", "-r", "30000/1001", "-i", "a.yuv"]
        );
        assert_eq!(MediaInput::file("b.y4m").input_args().len(), 2);
    }

    #[test]
    fn missing_binary_is_dependency_error() {
        let err = run(Path::new("/nonexistent/ffmpeg-qrhull"), &[]).unwrap_err();
        assert!(matches!(err, ToolError::Missing { .. }), "{err}");
        assert!(err.to_string().contains(FFMPEG_ENV));
    }
}
