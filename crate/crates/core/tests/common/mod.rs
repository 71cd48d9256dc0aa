#![allow(dead_code)]

pub mod fake;
pub mod fixtures;
pub mod oracles;

use std::path::{Path, PathBuf};

use qrhull::yuv::{FrameRate, FrameYuv420, Plane, StreamInfo};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut impl Rng, w: u32, h: u32) -> Plane {
    let data = (0..w * h).map(|_| rng.gen()).collect();
    Plane::new(w, h, data).unwrap()
}

pub fn random_frame(rng: &mut impl Rng, index: u64, w: u32, h: u32) -> FrameYuv420 {
    FrameYuv420::new(
        index,
        random_plane(rng, w, h),
        random_plane(rng, w / 2, h / 2),
        random_plane(rng, w / 2, h / 2),
    )
    .unwrap()
}

/// `frame` with every sample moved by up to ±`amp`.
pub fn perturb(rng: &mut impl Rng, frame: &FrameYuv420, amp: i16) -> FrameYuv420 {
    let p = |rng: &mut ChaCha8Rng, plane: &Plane| {
        let data = plane
            .data
            .iter()
            .map(|&v| (i16::from(v) + rng.gen_range(-amp..=amp)).clamp(0, 255) as u8)
            .collect();
        Plane::new(plane.width, plane.height, data).unwrap()
    };
    let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
    FrameYuv420::new(frame.index, p(&mut r, &frame.y), p(&mut r, &frame.u), p(&mut r, &frame.v)).unwrap()
}

pub fn info(w: u32, h: u32) -> StreamInfo {
    StreamInfo::new(w, h, FrameRate::new(25, 1).unwrap()).unwrap()
}

/// Path of a usable ffmpeg, honouring the override variable.
pub fn ffmpeg() -> Option<PathBuf> {
    let tools = qrhull::tool::ToolPaths::from_env();
    qrhull::tool::is_available(&tools.ffmpeg).then_some(tools.ffmpeg)
}

/// Generates a synthetic test clip with the transcoder's lavfi sources.
pub fn generate_clip(ffmpeg: &Path, out: &Path, w: u32, h: u32, frames: u32) {
    let src = format!("testsrc2=size={w}x{h}:rate=25,noise=alls=8:allf=t");
    let status = std::process::Command::new(ffmpeg)
        .args(["-hide_banner", "-loglevel", "error", "-y", "-f", "lavfi", "-i", &src])
        .args(["-frames:v", &frames.to_string(), "-pix_fmt", "yuv420p"])
        .arg(out)
        .status()
        .expect("spawn ffmpeg");
    assert!(status.success(), "clip generation failed");
}
