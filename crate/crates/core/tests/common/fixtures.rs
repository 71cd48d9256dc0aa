//! Published values used as test fixtures.

use qrhull::{Codec, EncodePoint};

/// UHD rows of the published ladder: (CRF, kb/s, PSNR, VMAF) per codec.
pub const LADDER_H264: [(u32, f64, f64, f64); 10] = [
    (5, 695488.0, 52.9669, 92.3797),
    (10, 485177.0, 48.6550, 92.2235),
    (15, 244833.0, 43.3468, 91.6983),
    (20, 100994.0, 38.6366, 90.3284),
    (25, 43389.0, 34.6996, 87.4167),
    (30, 19060.0, 31.2517, 81.7517),
    (35, 8608.0, 28.1138, 72.5276),
    (40, 4077.0, 25.2584, 60.3204),
    (45, 2008.0, 22.6260, 43.6877),
    (50, 1587.0, 21.5243, 36.3294),
];

pub const LADDER_H265: [(u32, f64, f64, f64); 10] = [
    (5, 520521.0, 49.3882, 92.5157),
    (10, 290477.0, 45.4326, 92.3293),
    (15, 159696.0, 42.4395, 91.7173),
    (20, 81215.0, 39.2211, 90.4906),
    (25, 39267.0, 35.7703, 88.0302),
    (30, 18171.0, 32.4033, 83.1556),
    (35, 8092.0, 29.2229, 74.6307),
    (40, 3198.0, 26.1305, 61.7095),
    (45, 1049.0, 23.1816, 46.0851),
    (50, 498.0, 21.5127, 38.8556),
];

pub const LADDER_VP9: [(u32, f64, f64, f64); 10] = [
    (5, 796086.0, 56.6072, 92.4052),
    (10, 474695.0, 49.8850, 92.2808),
    (15, 286001.0, 44.6691, 91.7851),
    (20, 198634.0, 42.3788, 91.3672),
    (25, 143189.0, 40.8018, 90.8633),
    (30, 98636.0, 39.0406, 90.1058),
    (35, 63284.0, 37.0052, 88.841),
    (40, 41709.0, 35.2291, 87.2773),
    (45, 26675.0, 33.4117, 84.9734),
    (50, 17940.0, 31.8526, 65.8117),
];

pub fn ladder_rows(codec: Codec) -> &'static [(u32, f64, f64, f64); 10] {
    match codec {
        Codec::H264 => &LADDER_H264,
        Codec::H265 => &LADDER_H265,
        Codec::Vp9 => &LADDER_VP9,
    }
}

/// The published ladder as results for the UHD Myanmar clip.
pub fn ladder_points() -> Vec<EncodePoint> {
    Codec::ALL
        .iter()
        .flat_map(|&codec| {
            ladder_rows(codec).iter().map(move |&(crf, kbps, psnr, vmaf)| EncodePoint {
                clip: "myanmar".into(),
                codec,
                width: 3840,
                height: 2160,
                crf,
                bitrate_kbps: kbps,
                psnr_420: psnr,
                vmaf: Some(vmaf),
                size_bytes: 0,
                duration_s: 0.0,
            })
        })
        .collect()
}

/// Degree sweep columns: (degree, RMSE, R²).
pub const SWEEP_H264: [(u32, f64, f64); 8] = [
    (1, 2.421, 0.9095),
    (2, 2.368, 0.9141),
    (3, 2.346, 0.9164),
    (4, 2.348, 0.9169),
    (5, 2.31, 0.9202),
    (6, 2.305, 0.9212),
    (7, 2.313, 0.9167),
    (8, 2.322, 0.9213),
];

pub const SWEEP_H265: [(u32, f64, f64); 8] = [
    (1, 2.455, 0.9),
    (2, 2.387, 0.9062),
    (3, 2.365, 0.9086),
    (4, 2.373, 0.9086),
    (5, 2.365, 0.9099),
    (6, 2.366, 0.9065),
    (7, 2.374, 0.9106),
    (8, 2.371, 0.9061),
];

/// Published models: coefficients (highest power first) with 95% bounds.
pub const H264_MODEL: [(f64, f64, f64); 7] = [
    (-0.0007881, -0.002044, 0.0004681),
    (0.04001, -0.02975, 0.1098),
    (-0.8077, -2.382, 0.7671),
    (8.251, -10.21, 26.71),
    (-44.67, -163.0, 73.7),
    (123.2, -269.8, 516.1),
    (-111.5, -638.7, 415.6),
];

pub const H265_MODEL: [(f64, f64, f64); 6] = [
    (-0.002066, -0.005009, 0.0008759),
    (0.09133, -0.0403, 0.2229),
    (-1.536, -3.815, 0.7438),
    (12.27, -6.772, 31.31),
    (-44.14, -120.6, 32.32),
    (83.72, -34.02, 201.4),
];

/// Normalized with mean 10.35 and std 2.132.
pub const VP9_MODEL: [(f64, f64, f64); 6] = [
    (-0.1925, -0.5627, 0.1778),
    (-0.3535, -0.7647, 0.05772),
    (1.113, -0.5089, 2.734),
    (2.601, 1.254, 3.947),
    (4.443, 2.879, 6.007),
    (40.56, 39.81, 41.3),
];
pub const VP9_MEAN: f64 = 10.35;
pub const VP9_STD: f64 = 2.132;

pub fn published_model(
    codec: Codec,
    table: &[(f64, f64, f64)],
    x_mean: f64,
    x_std: f64,
    range: Option<[f64; 2]>,
) -> qrhull::fit::PolyModel {
    qrhull::fit::PolyModel {
        codec,
        metric: qrhull::Metric::Psnr,
        degree: table.len() as u32 - 1,
        coefficients: table.iter().map(|t| t.0).collect(),
        x_mean,
        x_std,
        rmse: None,
        r_squared: None,
        ci_95: table.iter().map(|t| [t.1, t.2]).collect(),
        n_points: 0,
        log_base: qrhull::LogBase::Natural,
        bitrate_range_kbps: range,
    }
}
