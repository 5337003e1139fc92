//! Masks, probability maps and optical flow: the image types every other
//! module consumes, plus their on-disk formats.
//!
//! Masks and probability maps are stored as 8-bit PNG. Flow uses the
//! Middlebury `.flo` layout: a little-endian `f32` magic of `202021.25`,
//! `i32` width and height, then `width * height` interleaved `(u, v)` pairs.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader};

use crate::error::{check_dims, Error, Result};

/// Magic number at the head of every `.flo` file.
pub const FLO_MAGIC: f32 = 202021.25;

/// Flow components with a magnitude above this value mark unknown flow.
pub const UNKNOWN_FLOW_THRESHOLD: f32 = 1e9;

/// Default threshold used to binarize predictions before J and F.
pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;

fn validate_size(width: usize, height: usize, len: usize, per_pixel: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width: width as i64,
            height: height as i64,
        });
    }
    if len != width * height * per_pixel {
        return Err(Error::Shape(format!(
            "buffer of {len} values does not match {width}x{height}x{per_pixel}"
        )));
    }
    Ok(())
}

/// Binary foreground/background segmentation, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        validate_size(width, height, data.len(), 1)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    /// The mask as a 0/1 probability map.
    pub fn to_prob_map(&self) -> ProbMap {
        ProbMap {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        check_dims(self.width, self.height, other.width(), other.height())
    }
}

/// Per-pixel probability map with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        validate_size(width, height, data.len(), 1)?;
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfRange(format!(
                "probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// `1 - p` at every pixel.
    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| 1.0 - v).collect(),
        }
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        check_dims(self.width, self.height, other.width(), other.height())
    }

    /// 8-bit quantization with round-half-away-from-zero.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_u8(v)).collect()
    }
}

pub fn quantize_u8(v: f64) -> u8 {
    // f64::round rounds half away from zero
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Dense optical flow. `u` is horizontal and `v` vertical displacement in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f32>, v: Vec<f32>) -> Result<Self> {
        validate_size(width, height, u.len(), 1)?;
        validate_size(width, height, v.len(), 1)?;
        Ok(Self {
            width,
            height,
            u,
            v,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![0.0; width * height],
            vec![0.0; width * height],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    pub fn is_unknown(&self, idx: usize) -> bool {
        is_unknown_flow(self.u[idx], self.v[idx])
    }

    /// Per-pixel magnitude; unknown pixels get `None`.
    pub fn magnitudes(&self) -> Vec<Option<f64>> {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| {
                if is_unknown_flow(u, v) {
                    None
                } else {
                    Some((u as f64).hypot(v as f64))
                }
            })
            .collect()
    }

    /// Multiplies every known vector by `factor`; sentinels are left alone.
    pub fn scaled(&self, factor: f32) -> Self {
        let mut out = self.clone();
        for i in 0..out.u.len() {
            if !self.is_unknown(i) {
                out.u[i] *= factor;
                out.v[i] *= factor;
            }
        }
        out
    }
}

pub fn is_unknown_flow(u: f32, v: f32) -> bool {
    u.is_nan() || v.is_nan() || u.abs() > UNKNOWN_FLOW_THRESHOLD || v.abs() > UNKNOWN_FLOW_THRESHOLD
}

/// 8-bit RGB image, row-major, interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        validate_size(width, height, data.len(), 3)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Anything with a pixel grid.
pub trait Dims {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
}

macro_rules! impl_dims {
    ($($t:ty),*) => {
        $(impl Dims for $t {
            fn width(&self) -> usize { self.width }
            fn height(&self) -> usize { self.height }
        })*
    };
}
impl_dims!(BinaryMask, ProbMap, FlowField, RgbImage);

fn decode(path: &Path) -> Result<DynamicImage> {
    ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedImage {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a mask; a pixel is foreground iff its first channel is above 127.
/// Accepts 8-bit grayscale or 8-bit RGB.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (samples, stride): (&[u8], usize) = match &img {
        DynamicImage::ImageLuma8(g) => (g.as_raw(), 1),
        DynamicImage::ImageRgb8(rgb) => (rgb.as_raw(), 3),
        other => {
            return Err(unsupported(
                path,
                format!("{:?} (need 8-bit gray or RGB)", other.color()),
            ))
        }
    };
    if w == 0 || h == 0 {
        return Err(unsupported(path, "zero-sized image"));
    }
    let data = samples.chunks_exact(stride).map(|px| px[0] > 127).collect();
    BinaryMask::new(w, h, data)
}

/// Reads an 8-bit grayscale image, mapping each pixel to `value / 255`.
pub fn read_prob_map(path: impl AsRef<Path>) -> Result<ProbMap> {
    let path = path.as_ref();
    let img = decode(path)?;
    let DynamicImage::ImageLuma8(gray) = img else {
        return Err(unsupported(
            path,
            format!("{:?} (need 8-bit gray)", img.color()),
        ));
    };
    prob_map_from_u8(gray.width() as usize, gray.height() as usize, gray.as_raw())
}

pub fn prob_map_from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<ProbMap> {
    ProbMap::new(
        width,
        height,
        bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
}

fn save_gray(path: &Path, width: usize, height: usize, bytes: Vec<u8>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let img = GrayImage::from_raw(width as u32, height as u32, bytes)
        .ok_or_else(|| Error::Shape("gray buffer size".into()))?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes a mask as single-channel 0/255 PNG.
pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let bytes = mask.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
    save_gray(path.as_ref(), mask.width, mask.height, bytes)
}

/// Writes a probability map as 8-bit grayscale PNG (round half away from zero).
pub fn write_prob_map(path: impl AsRef<Path>, map: &ProbMap) -> Result<()> {
    save_gray(path.as_ref(), map.width, map.height, map.to_u8())
}

pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.data.clone())
        .ok_or_else(|| Error::Shape("rgb buffer size".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = decode(path)?;
    let DynamicImage::ImageRgb8(rgb) = img else {
        return Err(unsupported(
            path,
            format!("{:?} (need 8-bit RGB)", img.color()),
        ));
    };
    RgbImage::new(rgb.width() as usize, rgb.height() as usize, rgb.into_raw())
}

/// Parses Middlebury `.flo` bytes.
pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 12 {
        return Err(Error::FloLength {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().unwrap() };
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let width = i32::from_le_bytes(word(4));
    let height = i32::from_le_bytes(word(8));
    if width <= 0 || height <= 0 {
        return Err(Error::InvalidDimensions {
            width: width as i64,
            height: height as i64,
        });
    }
    let (w, h) = (width as usize, height as usize);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::Shape(format!("{w}x{h} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::FloLength {
            expected,
            actual: bytes.len(),
        });
    }
    let n = w * h;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for pair in bytes[12..].chunks_exact(8) {
        u.push(f32::from_le_bytes(pair[0..4].try_into().unwrap()));
        v.push(f32::from_le_bytes(pair[4..8].try_into().unwrap()));
    }
    FlowField::new(w, h, u, v)
}

/// Serializes a flow field to `.flo` bytes; inverse of [`read_flo`].
pub fn write_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * flow.u.len());
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for (u, v) in flow.u.iter().zip(&flow.v) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_flo_file(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_flo(&bytes)
}

pub fn write_flo_file(path: impl AsRef<Path>, flow: &FlowField) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, write_flo(flow)).map_err(|e| Error::io(path, e))
}

// Middlebury color wheel segment lengths.
const RY: usize = 15;
const YG: usize = 6;
const GC: usize = 4;
const CB: usize = 11;
const BM: usize = 13;
const MR: usize = 6;
pub const COLOR_WHEEL_BINS: usize = RY + YG + GC + CB + BM + MR;

/// The 55-entry Middlebury color wheel, 0..=255 per channel.
pub fn color_wheel() -> Vec<[f64; 3]> {
    let mut wheel = Vec::with_capacity(COLOR_WHEEL_BINS);
    let ramp = |i: usize, n: usize| (255 * i / n) as f64;
    for i in 0..RY {
        wheel.push([255.0, ramp(i, RY), 0.0]);
    }
    for i in 0..YG {
        wheel.push([255.0 - ramp(i, YG), 255.0, 0.0]);
    }
    for i in 0..GC {
        wheel.push([0.0, 255.0, ramp(i, GC)]);
    }
    for i in 0..CB {
        wheel.push([0.0, 255.0 - ramp(i, CB), 255.0]);
    }
    for i in 0..BM {
        wheel.push([ramp(i, BM), 0.0, 255.0]);
    }
    for i in 0..MR {
        wheel.push([255.0, 0.0, 255.0 - ramp(i, MR)]);
    }
    wheel
}

/// Position of the flow direction on the color wheel, in `[0, 1]`.
///
/// Depends only on the direction of `(u, v)`, so it is unchanged by positive
/// scaling.
pub fn flow_hue(u: f64, v: f64) -> f64 {
    ((-v).atan2(-u) / std::f64::consts::PI + 1.0) / 2.0
}

/// Renders flow with the Middlebury color-wheel convention.
///
/// Hue encodes direction, saturation encodes magnitude relative to the
/// largest finite magnitude in the field. Unknown pixels are black and zero
/// flow is white.
pub fn flow_to_color(flow: &FlowField) -> RgbImage {
    let wheel = color_wheel();
    let mags = flow.magnitudes();
    let max_rad = mags.iter().flatten().fold(0.0f64, |m, &r| m.max(r));
    let norm = max_rad + f64::EPSILON;
    let mut data = Vec::with_capacity(3 * mags.len());
    for (i, mag) in mags.iter().enumerate() {
        let Some(mag) = mag else {
            data.extend_from_slice(&[0, 0, 0]);
            continue;
        };
        let rad = mag / norm;
        let fk = flow_hue(flow.u[i] as f64, flow.v[i] as f64) * (COLOR_WHEEL_BINS - 1) as f64;
        let k0 = (fk.floor() as usize).min(COLOR_WHEEL_BINS - 1);
        let k1 = (k0 + 1) % COLOR_WHEEL_BINS;
        let f = fk - k0 as f64;
        for c in 0..3 {
            let col0 = wheel[k0][c] / 255.0;
            let col1 = wheel[k1][c] / 255.0;
            let mut col = (1.0 - f) * col0 + f * col1;
            if rad <= 1.0 {
                col = 1.0 - rad * (1.0 - col);
            } else {
                col *= 0.75;
            }
            data.push((255.0 * col).floor().clamp(0.0, 255.0) as u8);
        }
    }
    RgbImage::new(flow.width, flow.height, data).expect("dimensions carried over")
}

/// Foreground iff `value > threshold`.
pub fn binarize(map: &ProbMap, threshold: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::OutOfRange(format!(
            "binarize threshold {threshold} outside [0, 1]"
        )));
    }
    BinaryMask::new(
        map.width,
        map.height,
        map.data.iter().map(|&v| v > threshold).collect(),
    )
}
