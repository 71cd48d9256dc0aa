//! A transcoder stand-in: quantizes samples instead of encoding and writes
//! an encoded file whose size falls with CRF.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use qrhull::ladder::{LadderError, ProbeReport, ScaleFilter, Transcoder};
use qrhull::metrics::VmafConfig;
use qrhull::tool::{MediaInput, ToolError};
use qrhull::yuv::{self, FrameYuv420, Plane};
use qrhull::{Codec, Resolution};

#[derive(Default)]
pub struct FakeTranscoder {
    pub delay: Duration,
    /// Encodes at this CRF fail.
    pub fail_crf: Option<u32>,
    /// Decodes drop the last frame.
    pub drop_frame: bool,
    pub encodes: AtomicUsize,
    pub in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    pub log: Mutex<Vec<String>>,
}

fn payload(encoded: &Path) -> PathBuf {
    encoded.with_extension("payload.y4m")
}

fn resize(p: &Plane, w: u32, h: u32) -> Plane {
    let mut data = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let sx = (u64::from(x) * u64::from(p.width) / u64::from(w)) as usize;
            let sy = (u64::from(y) * u64::from(p.height) / u64::from(h)) as usize;
            data.push(p.get(sx, sy));
        }
    }
    Plane::new(w, h, data).unwrap()
}

fn quantize(p: &Plane, step: u32) -> Plane {
    let data = p
        .data
        .iter()
        .map(|&v| ((u32::from(v) / step) * step + step / 2).min(255) as u8)
        .collect();
    Plane::new(p.width, p.height, data).unwrap()
}

fn tool_err(msg: &str) -> LadderError {
    LadderError::Tool(ToolError::Failed {
        cmd: "fake".into(),
        status: "exit status: 1".into(),
        stderr: msg.into(),
    })
}

impl FakeTranscoder {
    fn enter(&self) {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(self.delay);
    }

    fn leave(&self) {
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

impl Transcoder for FakeTranscoder {
    fn fingerprint(&self) -> String {
        "fake-transcoder 1".into()
    }

    fn scale(&self, input: &MediaInput, target: Resolution, _filter: ScaleFilter, output: &Path) -> Result<(), LadderError> {
        let (info, frames) = yuv::read_all(&input.path, input.raw.as_ref())?;
        let out: Vec<FrameYuv420> = frames
            .iter()
            .map(|f| {
                FrameYuv420::new(
                    f.index,
                    resize(&f.y, target.width, target.height),
                    resize(&f.u, target.width / 2, target.height / 2),
                    resize(&f.v, target.width / 2, target.height / 2),
                )
                .unwrap()
            })
            .collect();
        let mut info = info;
        info.width = target.width;
        info.height = target.height;
        yuv::write_file(output, &info, &out)?;
        Ok(())
    }

    fn encode(&self, input: &MediaInput, codec: Codec, crf: u32, output: &Path) -> Result<(), LadderError> {
        self.enter();
        self.encodes.fetch_add(1, Ordering::SeqCst);
        self.log.lock().unwrap().push(format!("{} {crf}", codec.as_str()));
        let result = (|| {
            if self.fail_crf == Some(crf) {
                return Err(tool_err("injected failure"));
            }
            let (info, frames) = yuv::read_all(&input.path, input.raw.as_ref())?;
            let step = 1 + crf / 5;
            let q: Vec<FrameYuv420> = frames
                .iter()
                .map(|f| FrameYuv420::new(f.index, quantize(&f.y, step), quantize(&f.u, step), quantize(&f.v, step)).unwrap())
                .collect();
            yuv::write_file(&payload(output), &info, &q)?;
            let bytes = (info.luma_len() as u64 * frames.len() as u64) / u64::from(step);
            std::fs::write(output, vec![0u8; bytes as usize])?;
            Ok(())
        })();
        self.leave();
        result
    }

    fn decode(&self, encoded: &Path, output: &Path) -> Result<(), LadderError> {
        let (info, mut frames) = yuv::read_all(&payload(encoded), None)?;
        if self.drop_frame {
            frames.pop();
        }
        yuv::write_file(output, &info, &frames)?;
        Ok(())
    }

    fn probe(&self, _encoded: &Path) -> Result<Option<ProbeReport>, LadderError> {
        Ok(None)
    }

    fn vmaf(&self, _reference: &MediaInput, _distorted: &Path, _config: &VmafConfig, _log: &Path) -> Result<f64, LadderError> {
        Ok(90.0)
    }
}
