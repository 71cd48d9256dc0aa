//! The `qrhull` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::domain::{Codec, LogBase, Metric, Resolution};
use crate::fit::{self, DegreeSweepRow, FitOptions, PolyModel, SWEEP_MIN_POINTS};
use crate::hull::{self, HullCurve, HullPointSet};
use crate::ladder::{self, FfmpegTranscoder, LadderConfig};
use crate::metrics::{self, VmafConfig};
use crate::report::{self, FeatureRow};
use crate::tool::{MediaInput, ToolPaths};
use crate::yuv::{self, FrameRate, StreamInfo};

#[derive(Debug, Parser)]
#[command(name = "qrhull", version, about = "Quality-rate ladders, convex hulls and log-polynomial models for video codecs")]
pub struct Cli {
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode every clip × codec × resolution × CRF and measure the results.
    Ladder(LadderArgs),
    /// PSNR (and optionally VMAF) of a distorted video against a reference.
    Metrics(MetricsArgs),
    /// Spatial and temporal information of one or more sequences.
    Features(FeaturesArgs),
    /// Per-clip convex hulls from a results CSV.
    Hull(HullArgs),
    /// Fit a log-polynomial model to one codec's hull points.
    Fit(FitArgs),
    /// Compare two fitted models on their common bitrate range.
    Compare(CompareArgs),
    /// Hulls, fits and plots for every codec in a results CSV.
    Report(ReportArgs),
}

/// Geometry for headerless `.yuv` input.
#[derive(Debug, Args)]
pub struct RawArgs {
    /// Frame size of raw input, e.g. 3840x2160.
    #[arg(long)]
    pub size: Option<Resolution>,
    /// Frame rate of raw input as `num/den` or an integer.
    #[arg(long, default_value = "25")]
    pub fps: String,
}

impl RawArgs {
    fn info(&self) -> Result<Option<StreamInfo>> {
        let Some(size) = self.size else { return Ok(None) };
        let (num, den) = match self.fps.split_once(['/', ':']) {
            Some((n, d)) => (n.trim().parse()?, d.trim().parse()?),
            None => (self.fps.trim().parse()?, 1),
        };
        Ok(Some(StreamInfo::new(size.width, size.height, FrameRate::new(num, den)?)?))
    }
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// Ladder configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the number of concurrent jobs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override the work directory.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
    /// Skip VMAF.
    #[arg(long)]
    pub no_vmaf: bool,
    /// Print the job plan and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub distorted: PathBuf,
    #[command(flatten)]
    pub raw: RawArgs,
    /// Also compute VMAF through the external transcoder.
    #[arg(long)]
    pub vmaf: bool,
    /// VMAF model option, e.g. `version=vmaf_v0.6.1`.
    #[arg(long)]
    pub vmaf_model: Option<String>,
    /// Write per-frame PSNR here.
    #[arg(long)]
    pub per_frame: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub raw: RawArgs,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    /// Results CSV from `ladder`.
    #[arg(long)]
    pub results: PathBuf,
    /// Hull vertices CSV to write.
    #[arg(long, default_value = "hull.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "psnr")]
    pub metric: Metric,
    #[arg(long, default_value = "e")]
    pub log_base: LogBase,
    /// Write one curves + hull SVG per clip into this directory.
    #[arg(long)]
    pub svg_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Hull CSV from `hull`.
    #[arg(long)]
    pub hull: PathBuf,
    #[arg(long)]
    pub codec: Codec,
    /// Model JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "psnr")]
    pub metric: Metric,
    /// Fit this degree instead of selecting one from the sweep.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
    pub degree: Option<u32>,
    /// Standardize the log bitrate before fitting.
    #[arg(long)]
    pub normalize: bool,
    /// Write the degree sweep table here.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Write a plot of the points and fitted curve here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub model_a: PathBuf,
    pub model_b: PathBuf,
    /// Grid size over the common bitrate range.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "psnr")]
    pub metric: Metric,
    #[arg(long, default_value = "e")]
    pub log_base: LogBase,
    #[arg(long)]
    pub normalize: bool,
}

/// Parses `argv` and runs the command. Returns the process exit code:
/// 0 on success, 1 on runtime errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ladder(a) => cmd_ladder(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Features(a) => cmd_features(a),
        Command::Hull(a) => cmd_hull(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn cmd_ladder(a: LadderArgs) -> Result<()> {
    let mut config = LadderConfig::from_json_file(&a.config)?;
    config.tools = config.tools.clone().with_env_overrides();
    if let Some(j) = a.jobs {
        config.jobs = j;
    }
    if let Some(w) = a.workdir {
        config.workdir = w;
    }
    if a.no_vmaf {
        config.vmaf = false;
    }
    config.resolve_clips()?;
    config.validate()?;
    if a.dry_run {
        let jobs = ladder::plan_ladder(&config, "dry-run")?;
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        writeln!(out, "clip,codec,resolution,crf")?;
        for j in &jobs {
            writeln!(out, "{},{},{},{}", j.clip.id, j.codec.as_str(), j.resolution, j.crf)?;
        }
        return Ok(());
    }
    let transcoder = FfmpegTranscoder::new(config.tools.clone())?;
    let run = ladder::run_ladder(&config, &transcoder)?;
    info!("results: {}", run.results_csv.display());
    println!("{}", run.results_csv.display());
    run.check()?;
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let raw = a.raw.info()?;
    let q = metrics::sequence_psnr_files(&a.reference, raw.as_ref(), &a.distorted, raw.as_ref())?;
    let vmaf = if a.vmaf {
        let ffmpeg = ToolPaths::from_env().ffmpeg;
        let input = |p: &Path| match raw {
            Some(info) if yuv::Container::from_path(p) == yuv::Container::Raw => MediaInput::raw(p, info),
            _ => MediaInput::file(p),
        };
        let cfg = VmafConfig {
            model: a.vmaf_model.clone(),
            threads: None,
        };
        let log = tempfile_path("vmaf", "json");
        let score = metrics::vmaf_score(&ffmpeg, &input(&a.reference), &input(&a.distorted), &cfg, &log);
        let _ = std::fs::remove_file(&log);
        Some(score?)
    } else {
        None
    };
    if let Some(path) = &a.per_frame {
        let mut w = csv::Writer::from_path(path).with_context(|| path.display().to_string())?;
        w.write_record(["frame", "mse_y", "mse_u", "mse_v", "psnr_y", "psnr_u", "psnr_v", "psnr_420"])?;
        for f in &q.per_frame {
            w.write_record([
                f.frame_index.to_string(),
                f.mse_y.to_string(),
                f.mse_u.to_string(),
                f.mse_v.to_string(),
                f.psnr_y.to_string(),
                f.psnr_u.to_string(),
                f.psnr_v.to_string(),
                f.psnr_420.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if q.clamped_frames > 0 {
        warn!("{} identical frame(s) scored at the {} dB clamp", q.clamped_frames, metrics::PSNR_CLAMP_DB);
    }
    println!("frames,psnr_420,psnr_y,pooled_psnr,vmaf");
    println!(
        "{},{:.4},{:.4},{:.4},{}",
        q.frame_count,
        q.mean_psnr_420,
        q.mean_psnr_y,
        q.pooled_psnr,
        vmaf.map(|v| format!("{v:.4}")).unwrap_or_default()
    );
    Ok(())
}

fn tempfile_path(stem: &str, ext: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qrhull-{stem}-{}.{ext}", std::process::id()))
}

fn cmd_features(a: FeaturesArgs) -> Result<()> {
    let raw = a.raw.info()?;
    let mut rows = Vec::new();
    for path in &a.inputs {
        let (_, frames) = yuv::read_all(path, raw.as_ref()).with_context(|| path.display().to_string())?;
        let f = crate::features::content_features(&frames).with_context(|| path.display().to_string())?;
        let sequence = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        rows.push(FeatureRow {
            sequence,
            frame_count: frames.len(),
            si: f.si,
            ti: f.ti,
        });
    }
    report::write_features_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}

fn load_results(path: &Path) -> Result<Vec<crate::domain::EncodePoint>> {
    let points = report::read_results_csv(path)?;
    if points.is_empty() {
        bail!("{} has no result rows", path.display());
    }
    Ok(points)
}

fn build_hulls(points: &[crate::domain::EncodePoint], metric: Metric, base: LogBase) -> Result<(Vec<hull::QrCurve>, Vec<HullCurve>)> {
    let curves = hull::group_curves(points, metric)?;
    let hulls = hull::hulls_by_clip(&curves, base)?;
    Ok((curves, hulls))
}

fn write_clip_plots(dir: &Path, curves: &[hull::QrCurve], hulls: &[HullCurve], metric: Metric) -> Result<()> {
    let mut clips: Vec<&str> = curves.iter().map(|c| c.clip.as_str()).collect();
    clips.dedup();
    for clip in clips {
        let cs: Vec<_> = curves.iter().filter(|c| c.clip == clip).cloned().collect();
        let hs: Vec<_> = hulls.iter().filter(|h| h.clip == clip).cloned().collect();
        let svg = report::emit_qr_plot(&cs, &hs, metric, &format!("{clip}: {metric}–bitrate curves and hulls"))?;
        report::write_text(&dir.join(format!("qr_{clip}.svg")), &svg)?;
    }
    Ok(())
}

fn cmd_hull(a: HullArgs) -> Result<()> {
    let points = load_results(&a.results)?;
    let (curves, hulls) = build_hulls(&points, a.metric, a.log_base)?;
    report::write_hull_csv(&a.out, &hulls)?;
    if let Some(dir) = &a.svg_dir {
        write_clip_plots(dir, &curves, &hulls, a.metric)?;
    }
    let vertices: usize = hulls.iter().map(|h| h.vertices.len()).sum();
    info!("{} hulls, {vertices} vertices", hulls.len());
    Ok(())
}

/// A fitted model and, when the degree was selected, the sweep behind it.
pub struct CodecFit {
    pub points: HullPointSet,
    pub model: PolyModel,
    pub sweep: Option<Vec<DegreeSweepRow>>,
}

/// Fits one codec's aggregated hull points, selecting the degree by sweep
/// unless `degree` is given.
pub fn fit_codec(hulls: &[HullCurve], codec: Codec, degree: Option<u32>, normalize: bool) -> Result<CodecFit> {
    let points = hull::aggregate_codec_hull_points(hulls, codec)?;
    if points.is_empty() {
        bail!("no hull points for {}", codec.label());
    }
    let log_base = hulls.iter().find(|h| h.codec == codec).map_or(LogBase::Natural, |h| h.log_base);
    let (x, y) = points.xy();
    let (degree, sweep) = match degree {
        Some(d) => (d, None),
        None => {
            if x.len() < SWEEP_MIN_POINTS {
                bail!(
                    "{} has {} hull points; degree selection needs at least {SWEEP_MIN_POINTS} (pass --degree)",
                    codec.label(),
                    x.len()
                );
            }
            let z = if normalize { fit::normalize_abscissa(&x)?.0 } else { x.clone() };
            let sweep = fit::degree_sweep(&z, &y)?;
            for (d, e) in &sweep.failed {
                warn!("{} degree {d}: {e}", codec.label());
            }
            (fit::select_degree(&sweep.rows)?, Some(sweep.rows))
        }
    };
    let model = fit::fit_model(
        codec,
        points.metric,
        &x,
        &y,
        FitOptions {
            degree,
            normalize,
            log_base,
        },
    )?;
    Ok(CodecFit { points, model, sweep })
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let hulls = report::read_hull_csv(&a.hull, a.metric)?;
    let f = fit_codec(&hulls, a.codec, a.degree, a.normalize)?;
    report::write_model_json(&a.out, &f.model)?;
    if let (Some(path), Some(rows)) = (&a.sweep, &f.sweep) {
        report::write_sweep_csv(path, rows)?;
    } else if a.sweep.is_some() {
        warn!("--sweep ignored: degree was given explicitly");
    }
    if let Some(path) = &a.svg {
        let title = format!("{} {} hull model", a.codec.label(), a.metric);
        report::write_text(path, &report::emit_fit_plot(&f.points, &f.model, &title)?)?;
    }
    info!(
        "{} degree {} on {} points, RMSE {:?}, R² {:?}",
        a.codec.label(),
        f.model.degree,
        f.model.n_points,
        f.model.rmse,
        f.model.r_squared
    );
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let ma = report::read_model_json(&a.model_a)?;
    let mb = report::read_model_json(&a.model_b)?;
    let grid = fit::common_bitrate_grid(&ma, &mb, a.points)?;
    let c = fit::compare_codec_models(&ma, &mb, &grid)?;
    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    w.write_record(["bitrate_kbps", ma.codec.as_str(), mb.codec.as_str(), "delta"])?;
    for i in 0..grid.len() {
        w.write_record([
            grid[i].to_string(),
            c.quality_a[i].to_string(),
            c.quality_b[i].to_string(),
            c.delta[i].to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!(
        "mean delta {:.4}, mean |delta| {:.4}, max |delta| {:.4}, correlation {}",
        c.mean_delta,
        c.mean_abs_delta,
        c.max_abs_delta,
        c.correlation.map_or("n/a".into(), |r| format!("{r:.6}"))
    );
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let points = load_results(&a.results)?;
    let (curves, hulls) = build_hulls(&points, a.metric, a.log_base)?;
    std::fs::create_dir_all(&a.out).with_context(|| a.out.display().to_string())?;
    report::write_hull_csv(&a.out.join("hull.csv"), &hulls)?;
    write_clip_plots(&a.out, &curves, &hulls, a.metric)?;
    let mut codecs: Vec<Codec> = hulls.iter().map(|h| h.codec).collect();
    codecs.sort();
    codecs.dedup();
    for codec in codecs {
        match fit_codec(&hulls, codec, None, a.normalize) {
            Ok(f) => {
                let name = codec.as_str();
                report::write_model_json(&a.out.join(format!("model_{name}.json")), &f.model)?;
                if let Some(rows) = &f.sweep {
                    report::write_sweep_csv(&a.out.join(format!("sweep_{name}.csv")), rows)?;
                }
                let title = format!("{} {} hull model", codec.label(), a.metric);
                report::write_text(
                    &a.out.join(format!("fit_{name}.svg")),
                    &report::emit_fit_plot(&f.points, &f.model, &title)?,
                )?;
            }
            Err(e) => warn!("skipping {} fit: {e:#}", codec.label()),
        }
    }
    println!("{}", a.out.display());
    Ok(())
}
