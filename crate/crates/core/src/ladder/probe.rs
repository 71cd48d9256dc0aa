use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{LadderError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitrateSource {
    /// Reported by the probe tool.
    Probe,
    /// File size over duration.
    SizeOverDuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub bitrate_kbps: f64,
    pub duration_s: Option<f64>,
    pub size_bytes: Option<u64>,
    pub source: BitrateSource,
}

fn number(v: Option<&Value>) -> Option<f64> {
    match v? {
        Value::String(s) => s.trim().parse().ok(),
        Value::Number(n) => n.as_f64(),
        _ => None,
    }
}

/// Reads `ffprobe -print_format json -show_format -show_streams` output.
///
/// The video stream's `bit_rate` is preferred; the container's is used
/// when the stream has none, and size over duration after that.
pub fn parse_ffprobe_json(json: &str) -> Result<ProbeReport> {
    let doc: Value = serde_json::from_str(json)
        .map_err(|e| LadderError::Parse(format!("probe output is not JSON: {e}")))?;
    let video = doc
        .get("streams")
        .and_then(Value::as_array)
        .and_then(|s| s.iter().find(|s| s.get("codec_type").and_then(Value::as_str) == Some("video")));
    let format = doc.get("format");
    let size_bytes = number(format.and_then(|f| f.get("size"))).map(|s| s as u64);
    let duration_s = number(video.and_then(|v| v.get("duration")))
        .or_else(|| number(format.and_then(|f| f.get("duration"))))
        .filter(|d| *d > 0.0);
    let bps = number(video.and_then(|v| v.get("bit_rate")))
        .or_else(|| number(format.and_then(|f| f.get("bit_rate"))))
        .filter(|b| *b > 0.0);
    if let Some(bps) = bps {
        return Ok(ProbeReport {
            bitrate_kbps: bps / 1000.0,
            duration_s,
            size_bytes,
            source: BitrateSource::Probe,
        });
    }
    match (size_bytes, duration_s) {
        (Some(size), Some(d)) => Ok(ProbeReport {
            bitrate_kbps: fallback_bitrate_kbps(size, d)?,
            duration_s,
            size_bytes,
            source: BitrateSource::SizeOverDuration,
        }),
        _ => Err(LadderError::Parse("probe output has neither bit_rate nor size and duration".into())),
    }
}

/// `size · 8 / duration / 1000`.
pub fn fallback_bitrate_kbps(size_bytes: u64, duration_s: f64) -> Result<f64> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(LadderError::Parse(format!("non-positive duration {duration_s} s")));
    }
    Ok(size_bytes as f64 * 8.0 / duration_s / 1000.0)
}

/// The common estimate `Mb/s ≈ GB / (minutes · 0.0075)` in kb/s, used as a
/// sanity check on probed values.
pub fn rule_of_thumb_kbps(size_bytes: u64, duration_s: f64) -> f64 {
    let gb = size_bytes as f64 / 1e9;
    let minutes = duration_s / 60.0;
    gb / (minutes * 0.0075) * 1000.0
}
