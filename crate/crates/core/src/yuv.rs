//! Planar 8-bit 4:2:0 video frames and bit-exact I/O for headerless `.yuv`
//! and YUV4MPEG2 (Y4M) streams.
//!
//! Planes are stored densely: a `width × height` luma plane followed by two
//! `(width/2) × (height/2)` chroma planes, with no row padding.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const Y4M_MAGIC: &[u8] = b"YUV4MPEG2";
const FRAME_MAGIC: &[u8] = b"FRAME";
const MAX_HEADER_LEN: usize = 4096;

#[derive(Debug, Error)]
pub enum YuvError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed Y4M stream: {0}")]
    Format(String),
    #[error("unsupported Y4M chroma token `{0}` (only the C420 family is supported)")]
    UnsupportedChroma(String),
    #[error("invalid stream geometry: {0}")]
    Geometry(String),
    #[error("truncated frame {index}: expected {expected} bytes, got {got} ({} short)", expected - got)]
    Truncated {
        index: u64,
        expected: usize,
        got: usize,
    },
    #[error("frame {index} is {got_w}x{got_h}, stream is {want_w}x{want_h}")]
    Dimension {
        index: u64,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
}

pub type Result<T, E = YuvError> = std::result::Result<T, E>;

/// Frame rate as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(YuvError::Geometry(format!(
                "frame rate {num}:{den} must have positive terms"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl std::fmt::Display for FrameRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// Geometry and timing of a 4:2:0 stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamInfo {
    pub width: u32,
    pub height: u32,
    pub frame_rate: FrameRate,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<u64>,
}

fn default_bit_depth() -> u8 {
    8
}

impl StreamInfo {
    pub fn new(width: u32, height: u32, frame_rate: FrameRate) -> Result<Self> {
        let info = Self {
            width,
            height,
            frame_rate,
            bit_depth: 8,
            frame_count: None,
        };
        info.validate()?;
        Ok(info)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 || self.width % 2 != 0 || self.height % 2 != 0 {
            return Err(YuvError::Geometry(format!(
                "{}x{} is not a valid 4:2:0 size (both dimensions must be even and >= 2)",
                self.width, self.height
            )));
        }
        FrameRate::new(self.frame_rate.num, self.frame_rate.den)?;
        if self.bit_depth != 8 {
            return Err(YuvError::Geometry(format!(
                "bit depth {} is unsupported (8-bit only)",
                self.bit_depth
            )));
        }
        Ok(())
    }

    pub fn chroma_width(&self) -> u32 {
        self.width / 2
    }

    pub fn chroma_height(&self) -> u32 {
        self.height / 2
    }

    pub fn luma_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn chroma_len(&self) -> usize {
        self.chroma_width() as usize * self.chroma_height() as usize
    }

    /// Bytes occupied by one frame's samples.
    pub fn frame_len(&self) -> usize {
        self.luma_len() + 2 * self.chroma_len()
    }
}

/// One dense sample plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Plane {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(YuvError::Geometry(format!(
                "plane {width}x{height} needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width as usize + x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.width as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameYuv420 {
    pub index: u64,
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
}

impl FrameYuv420 {
    /// Builds a frame from planes, checking that they form a 4:2:0 layout.
    pub fn new(index: u64, y: Plane, u: Plane, v: Plane) -> Result<Self> {
        let (cw, ch) = (y.width / 2, y.height / 2);
        if y.width % 2 != 0 || y.height % 2 != 0 {
            return Err(YuvError::Geometry(format!(
                "luma plane {}x{} has odd dimensions",
                y.width, y.height
            )));
        }
        for (name, p) in [("u", &u), ("v", &v)] {
            if p.width != cw || p.height != ch {
                return Err(YuvError::Geometry(format!(
                    "{name} plane is {}x{}, expected {cw}x{ch}",
                    p.width, p.height
                )));
            }
        }
        Ok(Self { index, y, u, v })
    }

    /// A frame with every sample set to `value`.
    pub fn filled(index: u64, width: u32, height: u32, value: u8) -> Self {
        Self {
            index,
            y: Plane::filled(width, height, value),
            u: Plane::filled(width / 2, height / 2, value),
            v: Plane::filled(width / 2, height / 2, value),
        }
    }

    /// Splits a packed I420 buffer into planes.
    pub fn from_i420(index: u64, info: &StreamInfo, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != info.frame_len() {
            return Err(YuvError::Truncated {
                index,
                expected: info.frame_len(),
                got: bytes.len(),
            });
        }
        let mut bytes = bytes;
        let v = bytes.split_off(info.luma_len() + info.chroma_len());
        let u = bytes.split_off(info.luma_len());
        Ok(Self {
            index,
            y: Plane::new(info.width, info.height, bytes)?,
            u: Plane::new(info.chroma_width(), info.chroma_height(), u)?,
            v: Plane::new(info.chroma_width(), info.chroma_height(), v)?,
        })
    }

    pub fn width(&self) -> u32 {
        self.y.width
    }

    pub fn height(&self) -> u32 {
        self.y.height
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.u, &self.v]
    }

    fn check_geometry(&self, info: &StreamInfo) -> Result<()> {
        if self.width() != info.width || self.height() != info.height {
            return Err(YuvError::Dimension {
                index: self.index,
                got_w: self.width(),
                got_h: self.height(),
                want_w: info.width,
                want_h: info.height,
            });
        }
        Ok(())
    }
}

/// Container layout of a stream on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Container {
    /// Headerless planar I420.
    Raw,
    Y4m,
}

impl Container {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("y4m") => Container::Y4m,
            _ => Container::Raw,
        }
    }
}

fn read_line_limited<R: BufRead>(r: &mut R, what: &str) -> Result<Option<Vec<u8>>> {
    let mut line = Vec::new();
    let n = r
        .take(MAX_HEADER_LEN as u64)
        .read_until(b'\n', &mut line)?;
    if n == 0 {
        return Ok(None);
    }
    if line.last() != Some(&b'\n') {
        return Err(YuvError::Format(format!(
            "{what} line is unterminated or longer than {MAX_HEADER_LEN} bytes"
        )));
    }
    line.pop();
    Ok(Some(line))
}

fn parse_u32(token: &str, value: &str) -> Result<u32> {
    value
        .parse()
        .map_err(|_| YuvError::Format(format!("bad numeric value in token `{token}`")))
}

/// Parses a Y4M stream header, leaving `r` positioned at the first `FRAME`.
pub fn parse_y4m_header<R: BufRead>(r: &mut R) -> Result<StreamInfo> {
    let line = read_line_limited(r, "stream header")?
        .ok_or_else(|| YuvError::Format("empty stream, missing YUV4MPEG2 signature".into()))?;
    let line = String::from_utf8(line)
        .map_err(|_| YuvError::Format("stream header is not ASCII".into()))?;
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    match tokens.next() {
        Some(m) if m.as_bytes() == Y4M_MAGIC => {}
        Some(m) => {
            return Err(YuvError::Format(format!(
                "bad magic `{m}`, expected YUV4MPEG2"
            )))
        }
        None => return Err(YuvError::Format("missing YUV4MPEG2 signature".into())),
    }

    let (mut width, mut height, mut rate) = (None, None, None);
    for token in tokens {
        let (tag, value) = token.split_at(1);
        match tag {
            "W" => width = Some(parse_u32(token, value)?),
            "H" => height = Some(parse_u32(token, value)?),
            "F" => {
                let (n, d) = value
                    .split_once(':')
                    .ok_or_else(|| YuvError::Format(format!("bad frame rate token `{token}`")))?;
                rate = Some(FrameRate::new(parse_u32(token, n)?, parse_u32(token, d)?)?);
            }
            "C" => {
                if !matches!(value, "420" | "420jpeg" | "420mpeg2" | "420paldv") {
                    return Err(YuvError::UnsupportedChroma(token.to_string()));
                }
            }
            // interlacing, aspect, and extension tokens carry nothing we store
            "I" | "A" | "X" => {}
            _ => return Err(YuvError::Format(format!("unknown header token `{token}`"))),
        }
    }
    let width = width.ok_or_else(|| YuvError::Format("missing W token".into()))?;
    let height = height.ok_or_else(|| YuvError::Format("missing H token".into()))?;
    let frame_rate = rate.ok_or_else(|| YuvError::Format("missing F token".into()))?;
    StreamInfo::new(width, height, frame_rate)
}

/// Sequential frame reader over a raw or Y4M byte source.
pub struct YuvReader<R> {
    inner: R,
    info: StreamInfo,
    container: Container,
    next_index: u64,
}

impl<R: BufRead> YuvReader<R> {
    /// Reads the Y4M header and prepares to yield frames.
    pub fn y4m(mut inner: R) -> Result<Self> {
        let info = parse_y4m_header(&mut inner)?;
        Ok(Self {
            inner,
            info,
            container: Container::Y4m,
            next_index: 0,
        })
    }

    /// Headerless I420; geometry must come from the caller.
    pub fn raw(inner: R, info: StreamInfo) -> Result<Self> {
        info.validate()?;
        Ok(Self {
            inner,
            info,
            container: Container::Raw,
            next_index: 0,
        })
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    pub fn container(&self) -> Container {
        self.container
    }

    /// Returns the next frame, `Ok(None)` at a clean end of stream.
    pub fn read_frame(&mut self) -> Result<Option<FrameYuv420>> {
        let index = self.next_index;
        if self.container == Container::Y4m {
            let Some(line) = read_line_limited(&mut self.inner, "FRAME")? else {
                return Ok(None);
            };
            if !line.starts_with(FRAME_MAGIC)
                || !(line.len() == FRAME_MAGIC.len() || line[FRAME_MAGIC.len()] == b' ')
            {
                return Err(YuvError::Format(format!(
                    "expected FRAME marker before frame {index}, found `{}`",
                    String::from_utf8_lossy(&line[..line.len().min(16)])
                )));
            }
        }

        let expected = self.info.frame_len();
        let mut buf = vec![0u8; expected];
        let got = read_full(&mut self.inner, &mut buf)?;
        if got == 0 && self.container == Container::Raw {
            return Ok(None);
        }
        if got < expected {
            return Err(YuvError::Truncated {
                index,
                expected,
                got,
            });
        }
        self.next_index += 1;
        FrameYuv420::from_i420(index, &self.info, buf).map(Some)
    }

    /// Reads up to `max` frames.
    pub fn read_batch(&mut self, max: usize) -> Result<Vec<FrameYuv420>> {
        let mut out = Vec::with_capacity(max);
        while out.len() < max {
            match self.read_frame()? {
                Some(f) => out.push(f),
                None => break,
            }
        }
        Ok(out)
    }

    pub fn frames(&mut self) -> impl Iterator<Item = Result<FrameYuv420>> + '_ {
        std::iter::from_fn(move || self.read_frame().transpose())
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub type FileReader = YuvReader<BufReader<File>>;

/// Opens a video file, sniffing for the Y4M signature. Headerless files
/// need `raw_info`.
pub fn open_video(path: &Path, raw_info: Option<&StreamInfo>) -> Result<FileReader> {
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path)?);
    let is_y4m = reader.fill_buf()?.starts_with(Y4M_MAGIC);
    if is_y4m {
        YuvReader::y4m(reader)
    } else {
        let info = raw_info.ok_or_else(|| {
            YuvError::Geometry(format!(
                "{} has no Y4M header; width/height/rate must be supplied",
                path.display()
            ))
        })?;
        YuvReader::raw(reader, *info)
    }
}

/// Reads every frame of a file into memory.
pub fn read_all(path: &Path, raw_info: Option<&StreamInfo>) -> Result<(StreamInfo, Vec<FrameYuv420>)> {
    let mut reader = open_video(path, raw_info)?;
    let frames = reader.frames().collect::<Result<Vec<_>>>()?;
    let mut info = *reader.info();
    info.frame_count = Some(frames.len() as u64);
    Ok((info, frames))
}

/// Streaming writer; the Y4M header is emitted on construction.
pub struct YuvWriter<W: Write> {
    inner: W,
    info: StreamInfo,
    container: Container,
    written: u64,
}

impl<W: Write> YuvWriter<W> {
    pub fn new(mut inner: W, info: StreamInfo, container: Container) -> Result<Self> {
        info.validate()?;
        let mut written = 0;
        if container == Container::Y4m {
            let header = format!(
                "YUV4MPEG2 W{} H{} F{} Ip A1:1 C420jpeg\n",
                info.width, info.height, info.frame_rate
            );
            inner.write_all(header.as_bytes())?;
            written += header.len() as u64;
        }
        Ok(Self {
            inner,
            info,
            container,
            written,
        })
    }

    pub fn write_frame(&mut self, frame: &FrameYuv420) -> Result<()> {
        frame.check_geometry(&self.info)?;
        if self.container == Container::Y4m {
            self.inner.write_all(b"FRAME\n")?;
            self.written += 6;
        }
        for plane in frame.planes() {
            self.inner.write_all(&plane.data)?;
            self.written += plane.data.len() as u64;
        }
        Ok(())
    }

    pub fn bytes_written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> Result<u64> {
        self.inner.flush()?;
        Ok(self.written)
    }
}

/// Writes all `frames` and returns the number of bytes produced.
pub fn write_frames<'a, W, I>(sink: W, info: &StreamInfo, container: Container, frames: I) -> Result<u64>
where
    W: Write,
    I: IntoIterator<Item = &'a FrameYuv420>,
{
    let mut writer = YuvWriter::new(sink, *info, container)?;
    for frame in frames {
        writer.write_frame(frame)?;
    }
    writer.finish()
}

pub fn write_file<'a, I>(path: &Path, info: &StreamInfo, frames: I) -> Result<u64>
where
    I: IntoIterator<Item = &'a FrameYuv420>,
{
    let file = BufWriter::new(File::create(path)?);
    write_frames(file, info, Container::from_path(path), frames)
}
