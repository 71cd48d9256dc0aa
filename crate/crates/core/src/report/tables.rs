use std::io::{Read, Write};
use std::path::Path;

use super::{io_err, write_text, ReportError, Result};
use crate::domain::{Codec, EncodePoint, LogBase, Metric, Resolution};
use crate::fit::{DegreeSweepRow, PolyModel};
use crate::hull::{HullCurve, HullVertex};

pub const RESULTS_HEADER: [&str; 10] = [
    "clip",
    "codec",
    "width",
    "height",
    "crf",
    "bitrate_kbps",
    "psnr_420",
    "vmaf",
    "size_bytes",
    "duration_s",
];

fn csv_err(e: csv::Error) -> ReportError {
    ReportError::Format(format!("CSV: {e}"))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse()
        .map_err(|e| ReportError::Format(format!("line {line}: bad {name} `{raw}`: {e}")))
}

fn check_header(rec: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = rec.iter().map(str::trim).collect();
    if got != expected {
        return Err(ReportError::Format(format!(
            "unexpected header `{}` (expected `{}`)",
            got.join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

/// `f64` in the shortest form that parses back to the same value.
fn num(x: f64) -> String {
    format!("{x}")
}

pub fn results_to_writer<W: Write>(sink: W, points: &[EncodePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RESULTS_HEADER).map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.clip.clone(),
            p.codec.as_str().into(),
            p.width.to_string(),
            p.height.to_string(),
            p.crf.to_string(),
            num(p.bitrate_kbps),
            num(p.psnr_420),
            p.vmaf.map(num).unwrap_or_default(),
            p.size_bytes.to_string(),
            num(p.duration_s),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| ReportError::Format(e.to_string()))
}

pub fn results_from_reader<R: Read>(source: R) -> Result<Vec<EncodePoint>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    check_header(r.headers().map_err(csv_err)?, &RESULTS_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let vmaf_raw = rec.get(7).unwrap_or("").trim();
        out.push(EncodePoint {
            clip: rec.get(0).unwrap_or("").to_string(),
            codec: field::<Codec>(&rec, 1, "codec", line)?,
            width: field(&rec, 2, "width", line)?,
            height: field(&rec, 3, "height", line)?,
            crf: field(&rec, 4, "crf", line)?,
            bitrate_kbps: field(&rec, 5, "bitrate_kbps", line)?,
            psnr_420: field(&rec, 6, "psnr_420", line)?,
            vmaf: if vmaf_raw.is_empty() { None } else { Some(field(&rec, 7, "vmaf", line)?) },
            size_bytes: field(&rec, 8, "size_bytes", line)?,
            duration_s: field(&rec, 9, "duration_s", line)?,
        });
    }
    Ok(out)
}

pub fn write_results_csv(path: &Path, points: &[EncodePoint]) -> Result<()> {
    let mut buf = Vec::new();
    results_to_writer(&mut buf, points)?;
    write_text(path, std::str::from_utf8(&buf).expect("utf-8"))
}

pub fn read_results_csv(path: &Path) -> Result<Vec<EncodePoint>> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    results_from_reader(std::io::BufReader::new(file))
        .map_err(|e| ReportError::Format(format!("{}: {e}", path.display())))
}

fn log_column(base: LogBase) -> &'static str {
    match base {
        LogBase::Natural => "ln_bitrate",
        LogBase::Ten => "log10_bitrate",
    }
}

/// Hull vertices, one row per vertex: `codec,clip,resolution,crf,ln_bitrate,quality`.
/// The log column is named `log10_bitrate` for base-10 hulls.
pub fn write_hull_csv(path: &Path, hulls: &[HullCurve]) -> Result<()> {
    let base = hulls.first().map_or(LogBase::Natural, |h| h.log_base);
    if hulls.iter().any(|h| h.log_base != base) {
        return Err(ReportError::Validation("hulls mix log bases".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["codec", "clip", "resolution", "crf", log_column(base), "quality"])
        .map_err(csv_err)?;
    for h in hulls {
        for v in &h.vertices {
            w.write_record([
                h.codec.as_str().to_string(),
                v.clip.clone(),
                v.resolution.map(|r| r.to_string()).unwrap_or_default(),
                v.crf.map(|c| c.to_string()).unwrap_or_default(),
                num(v.log_bitrate),
                num(v.quality),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Format(e.to_string()))?;
    write_text(path, std::str::from_utf8(&bytes).expect("utf-8"))
}

/// Reads a hull CSV back into per-(codec, clip) vertex lists, in file order.
/// The quality metric is not stored in the file and must be supplied.
pub fn read_hull_csv(path: &Path, metric: Metric) -> Result<Vec<HullCurve>> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = r.headers().map_err(csv_err)?.clone();
    let base = match header.get(4).map(str::trim) {
        Some("ln_bitrate") => LogBase::Natural,
        Some("log10_bitrate") => LogBase::Ten,
        _ => {
            return Err(ReportError::Format(format!(
                "{}: unexpected header `{}`",
                path.display(),
                header.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };
    check_header(&header, &["codec", "clip", "resolution", "crf", log_column(base), "quality"])?;
    let mut hulls: Vec<HullCurve> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let codec: Codec = field(&rec, 0, "codec", line)?;
        let clip = rec.get(1).unwrap_or("").to_string();
        let res_raw = rec.get(2).unwrap_or("").trim();
        let crf_raw = rec.get(3).unwrap_or("").trim();
        let vertex = HullVertex {
            log_bitrate: field(&rec, 4, "log bitrate", line)?,
            quality: field(&rec, 5, "quality", line)?,
            clip: clip.clone(),
            resolution: if res_raw.is_empty() {
                None
            } else {
                Some(field::<Resolution>(&rec, 2, "resolution", line)?)
            },
            crf: if crf_raw.is_empty() { None } else { Some(field(&rec, 3, "crf", line)?) },
        };
        match hulls.iter_mut().find(|h| h.codec == codec && h.clip == clip) {
            Some(h) => {
                h.vertices.push(vertex);
                h.source_count += 1;
            }
            None => hulls.push(HullCurve {
                codec,
                clip,
                metric,
                log_base: base,
                vertices: vec![vertex],
                source_count: 1,
            }),
        }
    }
    Ok(hulls)
}

pub fn write_sweep_csv(path: &Path, rows: &[DegreeSweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["degree", "rmse", "r_squared"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.degree.to_string(), num(r.rmse), num(r.r_squared)])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Format(e.to_string()))?;
    write_text(path, std::str::from_utf8(&bytes).expect("utf-8"))
}

pub fn write_model_json(path: &Path, model: &PolyModel) -> Result<()> {
    let mut text = serde_json::to_string_pretty(model).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_model_json(path: &Path) -> Result<PolyModel> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ReportError::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub sequence: String,
    pub frame_count: usize,
    pub si: f64,
    pub ti: f64,
}

pub fn write_features_csv<W: Write>(sink: W, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["sequence", "frame_count", "SI", "TI"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.sequence.clone(), r.frame_count.to_string(), num(r.si), num(r.ti)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| ReportError::Format(e.to_string()))
}
