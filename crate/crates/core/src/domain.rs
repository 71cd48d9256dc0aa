//! Vocabulary shared across the pipeline: codecs, resolutions, metrics and
//! the per-encode measurement record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codec {
    H264,
    H265,
    Vp9,
}

impl Codec {
    pub const ALL: [Codec; 3] = [Codec::H264, Codec::H265, Codec::Vp9];

    /// Highest legal CRF for the encoder.
    pub fn max_crf(self) -> u32 {
        match self {
            Codec::H264 | Codec::H265 => 51,
            Codec::Vp9 => 63,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Codec::H264 => "h264",
            Codec::H265 => "h265",
            Codec::Vp9 => "vp9",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Codec::H264 => "H.264",
            Codec::H265 => "H.265",
            Codec::Vp9 => "VP9",
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Codec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('.', "").as_str() {
            "h264" | "avc" | "x264" => Ok(Codec::H264),
            "h265" | "hevc" | "x265" => Ok(Codec::H265),
            "vp9" => Ok(Codec::Vp9),
            _ => Err(format!("unknown codec `{s}` (expected h264, h265 or vp9)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub const QHD: Resolution = Resolution::new(960, 544);
    pub const FHD: Resolution = Resolution::new(1920, 1080);
    pub const UHD: Resolution = Resolution::new(3840, 2160);

    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn pixels(self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

impl Ord for Resolution {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.pixels(), self.width, self.height).cmp(&(other.pixels(), other.width, other.height))
    }
}

impl PartialOrd for Resolution {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("resolution `{s}` must look like 1920x1080"))?;
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("bad resolution `{s}`"));
        Ok(Resolution::new(parse(w)?, parse(h)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Psnr,
    Vmaf,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Psnr => "psnr",
            Metric::Vmaf => "vmaf",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            Metric::Psnr => "PSNR (dB)",
            Metric::Vmaf => "VMAF",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "psnr" => Ok(Metric::Psnr),
            "vmaf" => Ok(Metric::Vmaf),
            _ => Err(format!("unknown metric `{s}` (expected psnr or vmaf)")),
        }
    }
}

/// Logarithm applied to bitrate (kb/s) before hull extraction and fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    Natural,
    #[serde(rename = "10")]
    Ten,
}

impl LogBase {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }

    pub fn invert(self, v: f64) -> f64 {
        match self {
            LogBase::Natural => v.exp(),
            LogBase::Ten => 10f64.powf(v),
        }
    }

    /// Converts a natural log value into this base.
    pub fn from_ln(self, ln: f64) -> f64 {
        match self {
            LogBase::Natural => ln,
            LogBase::Ten => ln / std::f64::consts::LN_10,
        }
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            "10" | "log10" => Ok(LogBase::Ten),
            _ => Err(format!("unknown log base `{s}` (expected e or 10)")),
        }
    }
}

/// One ladder measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodePoint {
    pub clip: String,
    pub codec: Codec,
    pub width: u32,
    pub height: u32,
    pub crf: u32,
    pub bitrate_kbps: f64,
    pub psnr_420: f64,
    pub vmaf: Option<f64>,
    pub size_bytes: u64,
    pub duration_s: f64,
}

impl EncodePoint {
    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.width, self.height)
    }

    pub fn quality(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Psnr => Some(self.psnr_420),
            Metric::Vmaf => self.vmaf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("H.265".parse::<Codec>().unwrap(), Codec::H265);
        assert_eq!("vp9".parse::<Codec>().unwrap(), Codec::Vp9);
        assert!("av1".parse::<Codec>().is_err());
        assert_eq!("960x544".parse::<Resolution>().unwrap(), Resolution::QHD);
        assert_eq!("VMAF".parse::<Metric>().unwrap(), Metric::Vmaf);
    }

    #[test]
    fn resolution_order_by_area() {
        let mut r = vec![Resolution::UHD, Resolution::QHD, Resolution::FHD];
        r.sort();
        assert_eq!(r, vec![Resolution::QHD, Resolution::FHD, Resolution::UHD]);
    }

    #[test]
    fn log_base_round_trip() {
        for b in [LogBase::Natural, LogBase::Ten] {
            let v = b.apply(31415.0);
            assert!((b.invert(v) - 31415.0).abs() < 1e-8);
            assert!((b.from_ln(31415f64.ln()) - v).abs() < 1e-12);
        }
    }
}
