//! Quality-rate curves and their upper convex hull in the
//! (log-bitrate, quality) plane.
//!
//! The hull returned here is the rate-quality frontier: the upper concave
//! envelope of the points, cut at its highest-quality vertex so that quality
//! strictly increases along it. Points to the right of that vertex spend more
//! bits for no gain and never sit on the frontier. Collinear support points
//! are dropped.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Codec, EncodePoint, LogBase, Metric, Resolution};

#[derive(Debug, Error, PartialEq)]
pub enum HullError {
    #[error("grouping error: {0}")]
    Grouping(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no points supplied")]
    Empty,
}

pub type Result<T, E = HullError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QrPoint {
    pub bitrate_kbps: f64,
    pub quality: f64,
    pub crf: u32,
}

/// Rate-quality points of one (clip, codec, resolution) stratum, ascending
/// in bitrate with unique bitrates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrCurve {
    pub clip: String,
    pub codec: Codec,
    pub resolution: Resolution,
    pub metric: Metric,
    pub points: Vec<QrPoint>,
}

/// A hull vertex in log-rate space, remembering where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullVertex {
    pub log_bitrate: f64,
    pub quality: f64,
    pub clip: String,
    pub resolution: Option<Resolution>,
    pub crf: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCurve {
    pub codec: Codec,
    pub clip: String,
    pub metric: Metric,
    pub log_base: LogBase,
    pub vertices: Vec<HullVertex>,
    /// Number of candidate points the hull was built from.
    pub source_count: usize,
}

/// Groups one stratum's measurements into a sorted curve.
pub fn build_qr_curve(points: &[EncodePoint], metric: Metric) -> Result<QrCurve> {
    let first = points.first().ok_or(HullError::Empty)?;
    let mut out: Vec<QrPoint> = Vec::with_capacity(points.len());
    for p in points {
        if p.clip != first.clip || p.codec != first.codec || p.resolution() != first.resolution() {
            return Err(HullError::Grouping(format!(
                "mixed strata: ({}, {}, {}) and ({}, {}, {})",
                first.clip,
                first.codec,
                first.resolution(),
                p.clip,
                p.codec,
                p.resolution()
            )));
        }
        let quality = p.quality(metric).ok_or_else(|| {
            HullError::Domain(format!("{} {} CRF {} has no {metric} value", p.clip, p.codec, p.crf))
        })?;
        if !(p.bitrate_kbps.is_finite() && p.bitrate_kbps > 0.0 && quality.is_finite()) {
            return Err(HullError::Domain(format!(
                "{} {} CRF {}: bitrate {} / quality {quality} not usable",
                p.clip, p.codec, p.crf, p.bitrate_kbps
            )));
        }
        out.push(QrPoint {
            bitrate_kbps: p.bitrate_kbps,
            quality,
            crf: p.crf,
        });
    }
    out.sort_by(|a, b| {
        a.bitrate_kbps
            .total_cmp(&b.bitrate_kbps)
            .then(b.quality.total_cmp(&a.quality))
    });
    // equal bitrates collapse to the best-quality point, which sorts first
    out.dedup_by(|later, kept| later.bitrate_kbps == kept.bitrate_kbps);
    Ok(QrCurve {
        clip: first.clip.clone(),
        codec: first.codec,
        resolution: first.resolution(),
        metric,
        points: out,
    })
}

#[inline]
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the frontier vertices of `points`, ascending in x.
///
/// Monotone-chain upper hull over x-sorted points, truncated after the first
/// vertex of maximum y. Where several inputs share an x only the highest is
/// a candidate; exact duplicates resolve to the lowest index.
pub fn upper_hull_indices(points: &[(f64, f64)]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    if let Some((i, p)) = points
        .iter()
        .enumerate()
        .find(|(_, p)| !(p.0.is_finite() && p.1.is_finite()))
    {
        return Err(HullError::Domain(format!("point {i} = ({}, {}) is not finite", p.0, p.1)));
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.0.total_cmp(&pb.0)
            .then(pb.1.total_cmp(&pa.1))
            .then(a.cmp(&b))
    });
    order.dedup_by(|later, kept| points[*later].0 == points[*kept].0);

    let mut hull: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        while hull.len() >= 2 {
            let o = points[hull[hull.len() - 2]];
            let a = points[hull[hull.len() - 1]];
            // keep only strict clockwise turns
            if cross(o, a, points[i]) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    let peak = hull
        .iter()
        .enumerate()
        .max_by(|(ia, &a), (ib, &b)| {
            points[a].1.total_cmp(&points[b].1).then(ib.cmp(ia))
        })
        .map(|(pos, _)| pos)
        .unwrap_or(0);
    hull.truncate(peak + 1);
    Ok(hull)
}

impl HullCurve {
    /// Builds the frontier of `candidates` (already in log-rate space).
    pub fn from_vertices(
        codec: Codec,
        clip: impl Into<String>,
        metric: Metric,
        log_base: LogBase,
        candidates: Vec<HullVertex>,
    ) -> Result<Self> {
        let xy: Vec<(f64, f64)> = candidates.iter().map(|v| (v.log_bitrate, v.quality)).collect();
        let keep = upper_hull_indices(&xy)?;
        let source_count = candidates.len();
        let mut slots: Vec<Option<HullVertex>> = candidates.into_iter().map(Some).collect();
        let vertices = keep.into_iter().filter_map(|i| slots[i].take()).collect();
        Ok(Self {
            codec,
            clip: clip.into(),
            metric,
            log_base,
            vertices,
            source_count,
        })
    }

    /// Piecewise-linear frontier quality at `log_bitrate`, flat beyond the
    /// last vertex. `None` left of the first vertex.
    pub fn quality_at(&self, log_bitrate: f64) -> Option<f64> {
        let first = self.vertices.first()?;
        if log_bitrate < first.log_bitrate {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if log_bitrate <= b.log_bitrate {
                let t = (log_bitrate - a.log_bitrate) / (b.log_bitrate - a.log_bitrate);
                return Some(a.quality + t * (b.quality - a.quality));
            }
        }
        self.vertices.last().map(|v| v.quality)
    }

    pub fn log_bitrates(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.log_bitrate).collect()
    }
}

/// Upper hull of a bare point list, as a pooled curve with no provenance.
pub fn upper_convex_hull(
    codec: Codec,
    metric: Metric,
    points: &[(f64, f64)],
) -> Result<HullCurve> {
    let candidates = points
        .iter()
        .map(|&(x, y)| HullVertex {
            log_bitrate: x,
            quality: y,
            clip: "pooled".into(),
            resolution: None,
            crf: None,
        })
        .collect();
    HullCurve::from_vertices(codec, "pooled", metric, LogBase::Natural, candidates)
}

/// Hull over the union of one clip's curves for a codec, across resolutions.
pub fn pooled_hull(curves: &[QrCurve], log_base: LogBase) -> Result<HullCurve> {
    let first = curves.first().ok_or(HullError::Empty)?;
    let mut candidates = Vec::new();
    for c in curves {
        if c.metric != first.metric {
            return Err(HullError::Grouping(format!(
                "metric mismatch: {} vs {}",
                first.metric, c.metric
            )));
        }
        if c.codec != first.codec || c.clip != first.clip {
            return Err(HullError::Grouping(format!(
                "curves mix ({}, {}) with ({}, {})",
                first.clip, first.codec, c.clip, c.codec
            )));
        }
        candidates.extend(c.points.iter().map(|p| HullVertex {
            log_bitrate: log_base.apply(p.bitrate_kbps),
            quality: p.quality,
            clip: c.clip.clone(),
            resolution: Some(c.resolution),
            crf: Some(p.crf),
        }));
    }
    HullCurve::from_vertices(first.codec, first.clip.clone(), first.metric, log_base, candidates)
}

/// Vertices of all clips' hulls for one codec, concatenated in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPointSet {
    pub codec: Codec,
    pub metric: Metric,
    pub points: Vec<HullVertex>,
}

impl HullPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xy(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().map(|v| (v.log_bitrate, v.quality)).unzip()
    }
}

/// Collects the fitting input for `codec` from per-clip hulls. Hulls of
/// other codecs are ignored.
pub fn aggregate_codec_hull_points(hulls: &[HullCurve], codec: Codec) -> Result<HullPointSet> {
    let mut selected = hulls.iter().filter(|h| h.codec == codec);
    let Some(first) = selected.next() else {
        return Ok(HullPointSet {
            codec,
            metric: Metric::default(),
            points: Vec::new(),
        });
    };
    let mut points = first.vertices.clone();
    for h in selected {
        if h.metric != first.metric {
            return Err(HullError::Grouping(format!(
                "hulls mix metrics {} and {}",
                first.metric, h.metric
            )));
        }
        points.extend(h.vertices.iter().cloned());
    }
    Ok(HullPointSet {
        codec,
        metric: first.metric,
        points,
    })
}

/// Groups measurements into curves keyed by (clip, codec, resolution), in
/// clip/codec order with resolutions descending.
pub fn group_curves(points: &[EncodePoint], metric: Metric) -> Result<Vec<QrCurve>> {
    let mut keys: Vec<(String, Codec, Resolution)> = points
        .iter()
        .map(|p| (p.clip.clone(), p.codec, p.resolution()))
        .collect();
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(b.2.cmp(&a.2))
    });
    keys.dedup();
    keys.iter()
        .map(|(clip, codec, res)| {
            let members: Vec<EncodePoint> = points
                .iter()
                .filter(|p| &p.clip == clip && p.codec == *codec && p.resolution() == *res)
                .cloned()
                .collect();
            build_qr_curve(&members, metric)
        })
        .collect()
}

/// Per-(clip, codec) pooled hulls over all resolutions.
pub fn hulls_by_clip(curves: &[QrCurve], log_base: LogBase) -> Result<Vec<HullCurve>> {
    let mut keys: Vec<(&str, Codec)> = curves.iter().map(|c| (c.clip.as_str(), c.codec)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(clip, codec)| {
            let group: Vec<QrCurve> = curves
                .iter()
                .filter(|c| c.clip == clip && c.codec == codec)
                .cloned()
                .collect();
            pooled_hull(&group, log_base)
        })
        .collect()
}

/// Orders vertices by log-bitrate; used to sanity check hull output.
pub fn is_strictly_concave_increasing(vertices: &[(f64, f64)]) -> bool {
    let increasing = vertices.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    let slopes: Vec<f64> = vertices
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    increasing && slopes.windows(2).all(|s| s[1].partial_cmp(&s[0]) == Some(Ordering::Less))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(crf: u32, bitrate: f64, psnr: f64) -> EncodePoint {
        EncodePoint {
            clip: "c".into(),
            codec: Codec::H264,
            width: 3840,
            height: 2160,
            crf,
            bitrate_kbps: bitrate,
            psnr_420: psnr,
            vmaf: None,
            size_bytes: 1,
            duration_s: 1.0,
        }
    }

    #[test]
    fn single_point_curve_and_hull() {
        let c = build_qr_curve(&[ep(5, 100.0, 30.0)], Metric::Psnr).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(upper_hull_indices(&[(1.0, 2.0)]).unwrap(), vec![0]);
    }

    #[test]
    fn equal_bitrate_keeps_best_quality() {
        let c = build_qr_curve(&[ep(5, 100.0, 30.0), ep(10, 100.0, 31.0)], Metric::Psnr).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].quality, 31.0);
        assert_eq!(c.points[0].crf, 10);
    }

    #[test]
    fn mixed_strata_rejected() {
        let mut other = ep(10, 50.0, 20.0);
        other.codec = Codec::Vp9;
        assert!(matches!(
            build_qr_curve(&[ep(5, 100.0, 30.0), other], Metric::Psnr),
            Err(HullError::Grouping(_))
        ));
        assert!(matches!(build_qr_curve(&[ep(5, 1.0, 1.0)], Metric::Vmaf), Err(HullError::Domain(_))));
    }

    #[test]
    fn collinear_keeps_endpoints() {
        let idx = upper_hull_indices(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn drops_dominated_tail() {
        // peak at x = 2; the point at x = 3 is lower and falls off the frontier
        let idx = upper_hull_indices(&[(0.0, 0.0), (1.0, 3.0), (2.0, 4.0), (3.0, 3.5)]).unwrap();
        assert_eq!(idx, vec![0, 1, 2]);
        let idx = upper_hull_indices(&[(0.0, 0.0), (1.0, 4.0), (2.0, 4.0)]).unwrap();
        assert_eq!(idx, vec![0, 1]);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(upper_hull_indices(&[(f64::NAN, 0.0)]), Err(HullError::Domain(_))));
        assert_eq!(upper_hull_indices(&[]), Err(HullError::Empty));
    }

    #[test]
    fn pooled_hull_tracks_provenance() {
        let hi = QrCurve {
            clip: "c".into(),
            codec: Codec::H264,
            resolution: Resolution::UHD,
            metric: Metric::Psnr,
            points: vec![
                QrPoint { bitrate_kbps: 100.0, quality: 30.0, crf: 40 },
                QrPoint { bitrate_kbps: 1000.0, quality: 40.0, crf: 20 },
            ],
        };
        let mut lo = hi.clone();
        lo.resolution = Resolution::QHD;
        for p in &mut lo.points {
            p.quality -= 5.0;
        }
        let hull = pooled_hull(&[hi.clone(), lo], LogBase::Natural).unwrap();
        assert_eq!(hull.source_count, 4);
        assert!(hull.vertices.iter().all(|v| v.resolution == Some(Resolution::UHD)));

        let mut vm = hi.clone();
        vm.metric = Metric::Vmaf;
        assert!(matches!(pooled_hull(&[hi, vm], LogBase::Natural), Err(HullError::Grouping(_))));
    }

    #[test]
    fn aggregation_counts() {
        let h = upper_convex_hull(Codec::H265, Metric::Psnr, &[(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        let mut other = h.clone();
        other.codec = Codec::Vp9;
        let set = aggregate_codec_hull_points(&[h.clone(), h.clone(), other], Codec::H265).unwrap();
        assert_eq!(set.len(), 6);
        let empty = aggregate_codec_hull_points(&[], Codec::H264).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn interpolation_along_frontier() {
        let h = upper_convex_hull(Codec::H264, Metric::Psnr, &[(0.0, 0.0), (2.0, 4.0), (4.0, 5.0)]).unwrap();
        assert_eq!(h.quality_at(1.0), Some(2.0));
        assert_eq!(h.quality_at(5.0), Some(5.0));
        assert_eq!(h.quality_at(-1.0), None);
    }
}
