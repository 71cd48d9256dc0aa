use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::LadderConfig;
use super::plan::{plan_ladder, EncodeJob};
use super::probe::{fallback_bitrate_kbps, BitrateSource};
use super::transcoder::{encoder_args, Transcoder};
use super::{LadderError, Result};
use crate::domain::{Codec, EncodePoint, Resolution};
use crate::metrics::{self, MetricsError};
use crate::report;

/// What `point.json` holds for a finished job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JobRecord {
    key: String,
    point: EncodePoint,
    bitrate_source: BitrateSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Completed,
    Cached,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobOutcome {
    pub key: String,
    pub clip: String,
    pub codec: Codec,
    pub resolution: Resolution,
    pub crf: u32,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bitrate_source: Option<BitrateSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<EncodePoint>,
    pub elapsed_s: f64,
}

/// A bitrate or quality that rose as CRF increased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendViolation {
    pub clip: String,
    pub codec: Codec,
    pub resolution: Resolution,
    pub quantity: String,
    pub crf_low: u32,
    pub crf_high: u32,
    pub value_low: f64,
    pub value_high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_fingerprint: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub config: LadderConfig,
    /// Encoder arguments per codec, shown for CRF 0.
    pub encoder_args: BTreeMap<String, Vec<String>>,
    pub jobs: Vec<JobOutcome>,
    pub trend_violations: Vec<TrendViolation>,
    /// Files left in the work directory and their sizes.
    pub files: BTreeMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct LadderRun {
    /// Successful points in plan order.
    pub points: Vec<EncodePoint>,
    pub outcomes: Vec<JobOutcome>,
    pub trend_violations: Vec<TrendViolation>,
    pub results_csv: PathBuf,
    pub manifest: PathBuf,
}

impl LadderRun {
    pub fn failed_keys(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .filter(|o| o.status == JobStatus::Failed)
            .map(|o| o.key.clone())
            .collect()
    }

    /// `Err` listing the failed job keys, if any failed.
    pub fn check(&self) -> Result<()> {
        let failed = self.failed_keys();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(LadderError::JobsFailed(failed))
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn load_cached(job: &EncodeJob) -> Option<JobRecord> {
    let text = std::fs::read_to_string(&job.paths.point).ok()?;
    match serde_json::from_str::<JobRecord>(&text) {
        Ok(rec) if rec.key == job.key => Some(rec),
        Ok(_) => None,
        Err(e) => {
            warn!("ignoring unreadable {}: {e}", job.paths.point.display());
            None
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn remove_if_present(path: &Path) {
    if let Err(e) = std::fs::remove_file(path) {
        if e.kind() != std::io::ErrorKind::NotFound {
            warn!("could not remove {}: {e}", path.display());
        }
    }
}

/// Runs one job end to end, or returns its cached point.
///
/// The second value is `true` on a cache hit.
pub fn run_job(
    job: &EncodeJob,
    config: &LadderConfig,
    transcoder: &dyn Transcoder,
) -> Result<(EncodePoint, BitrateSource, bool)> {
    if let Some(rec) = load_cached(job) {
        return Ok((rec.point, rec.bitrate_source, true));
    }
    std::fs::create_dir_all(&job.paths.dir)?;
    let source = job.clip.media_input()?;
    let info = job.clip.info.expect("validated");

    let scaled_input;
    let encode_input = match &job.paths.scaled {
        Some(scaled) => {
            transcoder.scale(&source, job.resolution, job.scale_filter, scaled)?;
            scaled_input = crate::tool::MediaInput::file(scaled);
            &scaled_input
        }
        None => &source,
    };
    transcoder.encode(encode_input, job.codec, job.crf, &job.paths.encoded)?;
    transcoder.decode(&job.paths.encoded, &job.paths.decoded)?;
    if let Some(up) = &job.paths.upscaled {
        let decoded = crate::tool::MediaInput::file(&job.paths.decoded);
        transcoder.scale(&decoded, job.native, job.scale_filter, up)?;
    }

    let quality = metrics::sequence_psnr_files(
        &job.clip.path,
        source.raw.as_ref(),
        job.paths.compared(),
        None,
    )
    .map_err(|e| match e {
        MetricsError::Length { reference, distorted } => LadderError::Integrity(format!(
            "decoded stream has {distorted} frames, source has {reference}"
        )),
        other => other.into(),
    })?;

    let vmaf = if config.vmaf {
        Some(transcoder.vmaf(&source, job.paths.compared(), &config.vmaf_options, &job.paths.vmaf_log)?)
    } else {
        None
    };

    let size_bytes = std::fs::metadata(&job.paths.encoded)?.len();
    let nominal_duration = quality.frame_count as f64 / info.frame_rate.as_f64();
    let (bitrate_kbps, duration_s, bitrate_source) = match transcoder.probe(&job.paths.encoded)? {
        Some(r) => (r.bitrate_kbps, r.duration_s.unwrap_or(nominal_duration), r.source),
        None => (
            fallback_bitrate_kbps(size_bytes, nominal_duration)?,
            nominal_duration,
            BitrateSource::SizeOverDuration,
        ),
    };

    let point = EncodePoint {
        clip: job.clip.id.clone(),
        codec: job.codec,
        width: job.resolution.width,
        height: job.resolution.height,
        crf: job.crf,
        bitrate_kbps,
        psnr_420: quality.mean_psnr_420,
        vmaf,
        size_bytes,
        duration_s,
    };
    let rec = JobRecord {
        key: job.key.clone(),
        point: point.clone(),
        bitrate_source,
    };
    write_atomic(
        &job.paths.point,
        serde_json::to_string_pretty(&rec).expect("serializable").as_bytes(),
    )?;

    if !config.keep_intermediates {
        for p in [
            job.paths.scaled.as_deref(),
            Some(job.paths.decoded.as_path()),
            job.paths.upscaled.as_deref(),
        ]
        .into_iter()
        .flatten()
        {
            remove_if_present(p);
        }
    }
    Ok((point, bitrate_source, false))
}

/// Flags CRF steps where bitrate or PSNR increased.
pub fn trend_violations(points: &[EncodePoint]) -> Vec<TrendViolation> {
    let mut groups: BTreeMap<(String, Codec, u64, u32, u32), Vec<&EncodePoint>> = BTreeMap::new();
    for p in points {
        groups
            .entry((p.clip.clone(), p.codec, p.resolution().pixels(), p.width, p.height))
            .or_default()
            .push(p);
    }
    let mut out = Vec::new();
    for ((clip, codec, _, w, h), mut pts) in groups {
        pts.sort_by_key(|p| p.crf);
        for pair in pts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for (quantity, va, vb) in [
                ("bitrate_kbps", a.bitrate_kbps, b.bitrate_kbps),
                ("psnr_420", a.psnr_420, b.psnr_420),
            ] {
                if vb > va {
                    out.push(TrendViolation {
                        clip: clip.clone(),
                        codec,
                        resolution: Resolution::new(w, h),
                        quantity: quantity.into(),
                        crf_low: a.crf,
                        crf_high: b.crf,
                        value_low: va,
                        value_high: vb,
                    });
                }
            }
        }
    }
    out
}

fn inventory(dir: &Path) -> BTreeMap<String, u64> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, u64>) {
        let Ok(entries) = std::fs::read_dir(dir) else { return };
        for e in entries.flatten() {
            let path = e.path();
            match e.metadata() {
                Ok(m) if m.is_dir() => walk(root, &path, out),
                Ok(m) => {
                    let rel = path.strip_prefix(root).unwrap_or(&path);
                    out.insert(rel.to_string_lossy().into_owned(), m.len());
                }
                Err(_) => {}
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Runs the whole ladder with at most `config.jobs` jobs in flight, then
/// writes `results.csv` and `manifest.json` into the work directory.
///
/// Failed jobs are recorded rather than aborting the run; see
/// [`LadderRun::check`]. Finished jobs are cached, so a rerun resumes.
pub fn run_ladder(config: &LadderConfig, transcoder: &dyn Transcoder) -> Result<LadderRun> {
    let started = unix_now();
    let fingerprint = transcoder.fingerprint();
    let jobs = plan_ladder(config, &fingerprint)?;
    std::fs::create_dir_all(&config.workdir)?;
    info!("{} jobs planned, {} at a time", jobs.len(), config.jobs);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| LadderError::Validation(format!("thread pool: {e}")))?;
    let outcomes: Vec<JobOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let t = Instant::now();
                let res = run_job(job, config, transcoder);
                let mut outcome = JobOutcome {
                    key: job.key.clone(),
                    clip: job.clip.id.clone(),
                    codec: job.codec,
                    resolution: job.resolution,
                    crf: job.crf,
                    status: JobStatus::Failed,
                    error: None,
                    bitrate_source: None,
                    point: None,
                    elapsed_s: 0.0,
                };
                match res {
                    Ok((point, src, cached)) => {
                        outcome.status = if cached { JobStatus::Cached } else { JobStatus::Completed };
                        outcome.bitrate_source = Some(src);
                        outcome.point = Some(point);
                    }
                    Err(e) => {
                        warn!("job {} failed: {e}", job.key);
                        outcome.error = Some(e.to_string());
                    }
                }
                outcome.elapsed_s = t.elapsed().as_secs_f64();
                outcome
            })
            .collect()
    });

    let points: Vec<EncodePoint> = outcomes.iter().filter_map(|o| o.point.clone()).collect();
    let trend = trend_violations(&points);
    for v in &trend {
        warn!(
            "{} {} {}: {} rose from {} (CRF {}) to {} (CRF {})",
            v.clip, v.codec, v.resolution, v.quantity, v.value_low, v.crf_low, v.value_high, v.crf_high
        );
    }

    let results_csv = config.workdir.join("results.csv");
    report::write_results_csv(&results_csv, &points)
        .map_err(|e| LadderError::Parse(format!("{}: {e}", results_csv.display())))?;
    let manifest_path = config.workdir.join("manifest.json");
    let manifest = RunManifest {
        tool_fingerprint: fingerprint,
        started_unix_s: started,
        finished_unix_s: unix_now(),
        config: config.clone(),
        encoder_args: config
            .codecs
            .iter()
            .map(|&c| (c.as_str().to_string(), encoder_args(c, 0)))
            .collect(),
        jobs: outcomes.clone(),
        trend_violations: trend.clone(),
        files: inventory(&config.workdir),
    };
    write_atomic(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("serializable").as_bytes(),
    )?;

    Ok(LadderRun {
        points,
        outcomes,
        trend_violations: trend,
        results_csv,
        manifest: manifest_path,
    })
}
