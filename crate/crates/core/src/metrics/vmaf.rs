//! VMAF through FFmpeg's `libvmaf` filter.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{MetricsError, Result};
use crate::tool::{self, MediaInput};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VmafConfig {
    /// Model spec passed as `model=...` (e.g. `version=vmaf_v0.6.1` or
    /// `path=/models/vmaf.json`). `None` uses the tool's default model.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub threads: Option<u32>,
}

fn escape_filter_value(path: &Path) -> String {
    // filtergraph option values: escape the characters the parser treats specially
    let mut out = String::new();
    for c in path.to_string_lossy().chars() {
        if matches!(c, '\\' | ':' | '\'' | ',' | ';' | '[' | ']' | '=') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// The `-lavfi` argument for a libvmaf run writing a JSON log.
pub fn filter_graph(config: &VmafConfig, log_path: &Path) -> String {
    let mut opts = vec![
        "log_fmt=json".to_string(),
        format!("log_path={}", escape_filter_value(log_path)),
    ];
    if let Some(model) = &config.model {
        opts.push(format!("model={model}"));
    }
    if let Some(t) = config.threads {
        opts.push(format!("n_threads={t}"));
    }
    // first input is distorted, second is reference
    format!("[0:v][1:v]libvmaf={}", opts.join(":"))
}

/// Extracts the pooled mean VMAF from a libvmaf JSON log.
pub fn parse_vmaf_log(json: &str) -> Result<f64> {
    let doc: Value = serde_json::from_str(json)
        .map_err(|e| MetricsError::Parse(format!("VMAF log is not JSON: {e}")))?;
    let mean = doc
        .pointer("/pooled_metrics/vmaf/mean")
        .and_then(Value::as_f64)
        .ok_or_else(|| MetricsError::Parse("VMAF log has no pooled_metrics.vmaf.mean".into()))?;
    if !(0.0..=100.0).contains(&mean) {
        return Err(MetricsError::Parse(format!("pooled VMAF {mean} outside [0, 100]")));
    }
    Ok(mean)
}

/// Runs the transcoder's VMAF filter and returns the pooled mean score.
/// The JSON log is written to `log_path`.
pub fn vmaf_score(
    ffmpeg: &Path,
    reference: &MediaInput,
    distorted: &MediaInput,
    config: &VmafConfig,
    log_path: &Path,
) -> Result<f64> {
    let mut args: Vec<OsString> = vec!["-hide_banner".into(), "-nostdin".into()];
    args.extend(distorted.input_args());
    args.extend(reference.input_args());
    args.push("-lavfi".into());
    args.push(filter_graph(config, log_path).into());
    args.extend(["-f", "null", "-"].map(OsString::from));
    tool::run(ffmpeg, &args)?;
    let log = std::fs::read_to_string(log_path).map_err(|e| {
        MetricsError::Parse(format!("VMAF log {} missing: {e}", log_path.display()))
    })?;
    parse_vmaf_log(&log)
}

/// Convenience wrapper writing the log next to the distorted file.
pub fn vmaf_for_files(
    ffmpeg: &Path,
    reference: &MediaInput,
    distorted: &MediaInput,
    config: &VmafConfig,
) -> Result<f64> {
    let log: PathBuf = distorted.path.with_extension("vmaf.json");
    vmaf_score(ffmpeg, reference, distorted, config, &log)
}
