//! Dense `C x H x W` feature maps and the handful of primitives the attention
//! modules are built from: same-padding convolution, bilinear resampling,
//! adaptive average pooling and channel concatenation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::ProbMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "feature map {channels}x{height}x{width} has an empty axis"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::Shape(format!(
                "{} values for {channels}x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        Self::new(channels, height, width, vec![value; channels * height * width])
            .expect("non-empty shape")
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, data).expect("non-empty shape")
    }

    /// Uniform values in `[-scale, scale)`.
    pub fn random(rng: &mut impl Rng, channels: usize, height: usize, width: usize, scale: f64) -> Self {
        Self::from_fn(channels, height, width, |_, _, _| rng.random_range(-scale..scale))
    }

    pub fn from_prob_map(map: &ProbMap) -> Self {
        Self::new(1, map.height(), map.width(), map.data().to_vec()).expect("valid map")
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn same_spatial(&self, other: &FeatureMap) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::Shape(format!(
                "spatial {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &FeatureMap) -> Result<()> {
        if self.channels != other.channels {
            return Err(Error::Shape(format!(
                "channels {} vs {}",
                self.channels, other.channels
            )));
        }
        self.same_spatial(other)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn zip_with(&self, other: &FeatureMap, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone()
        })
    }

    pub fn add(&self, other: &FeatureMap) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FeatureMap) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Multiplies every channel by a single-channel map of the same size.
    pub fn mul_broadcast(&self, plane: &FeatureMap) -> Result<Self> {
        if plane.channels != 1 {
            return Err(Error::Shape(format!(
                "broadcast operand has {} channels",
                plane.channels
            )));
        }
        self.same_spatial(plane)?;
        let n = self.plane_len();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| v * plane.data[i % n])
            .collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    /// Scales channel `c` by `factors[c]`.
    pub fn scale_channels(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.channels {
            return Err(Error::Shape(format!(
                "{} channel factors for {} channels",
                factors.len(),
                self.channels
            )));
        }
        let n = self.plane_len();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| v * factors[i / n])
            .collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Concatenation along the channel axis.
pub fn concat(maps: &[&FeatureMap]) -> Result<FeatureMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Shape("concat of nothing".into()))?;
    let mut data = Vec::new();
    let mut channels = 0;
    for m in maps {
        first.same_spatial(m)?;
        channels += m.channels;
        data.extend_from_slice(&m.data);
    }
    FeatureMap::new(channels, first.height, first.width, data)
}

/// Convolution weights `[out][in][kh][kw]` plus one bias per output channel.
/// Stride 1, zero padding chosen so the output keeps the input size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParams {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        weight: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if kernel_h % 2 == 0 || kernel_w % 2 == 0 {
            return Err(Error::Shape(format!(
                "kernel {kernel_h}x{kernel_w} must have odd sides"
            )));
        }
        if out_channels == 0 || in_channels == 0 {
            return Err(Error::Shape("conv with zero channels".into()));
        }
        if weight.len() != out_channels * in_channels * kernel_h * kernel_w {
            return Err(Error::Shape(format!(
                "{} weights for {out_channels}x{in_channels}x{kernel_h}x{kernel_w}",
                weight.len()
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::Shape(format!(
                "{} biases for {out_channels} outputs",
                bias.len()
            )));
        }
        Ok(Self {
            out_channels,
            in_channels,
            kernel_h,
            kernel_w,
            weight,
            bias,
        })
    }

    pub fn zeros(out_channels: usize, in_channels: usize, k: usize) -> Self {
        Self::new(
            out_channels,
            in_channels,
            k,
            k,
            vec![0.0; out_channels * in_channels * k * k],
            vec![0.0; out_channels],
        )
        .expect("odd kernel")
    }

    /// 1x1 kernel that copies input channel `c` to output channel `c`.
    pub fn identity(channels: usize) -> Self {
        let mut p = Self::zeros(channels, channels, 1);
        for c in 0..channels {
            p.weight[c * channels + c] = 1.0;
        }
        p
    }

    /// Uniform `[-s, s)` weights with `s = 1 / sqrt(fan_in)`; biases likewise.
    pub fn random(rng: &mut impl Rng, out_channels: usize, in_channels: usize, k: usize) -> Self {
        let s = 1.0 / ((in_channels * k * k) as f64).sqrt();
        let weight = (0..out_channels * in_channels * k * k)
            .map(|_| rng.random_range(-s..s))
            .collect();
        let bias = (0..out_channels).map(|_| rng.random_range(-s..s)).collect();
        Self::new(out_channels, in_channels, k, k, weight, bias).expect("odd kernel")
    }

    #[inline]
    pub fn w(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        self.weight[((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx]
    }
}

/// Same-size cross-correlation with zero padding.
pub fn conv2d(input: &FeatureMap, params: &ConvParams) -> Result<FeatureMap> {
    if input.channels != params.in_channels {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, got {}",
            params.in_channels, input.channels
        )));
    }
    let (h, w) = (input.height as isize, input.width as isize);
    let (ph, pw) = ((params.kernel_h / 2) as isize, (params.kernel_w / 2) as isize);
    let plane = input.plane_len();
    let mut out = vec![0.0; params.out_channels * plane];
    for o in 0..params.out_channels {
        let dst = &mut out[o * plane..(o + 1) * plane];
        dst.iter_mut().for_each(|v| *v = params.bias[o]);
        for i in 0..params.in_channels {
            let src = input.channel(i);
            for ky in 0..params.kernel_h {
                let dy = ky as isize - ph;
                for kx in 0..params.kernel_w {
                    let dx = kx as isize - pw;
                    let wt = params.w(o, i, ky, kx);
                    if wt == 0.0 {
                        continue;
                    }
                    let y0 = (-dy).max(0);
                    let y1 = (h - dy).min(h);
                    let x0 = (-dx).max(0);
                    let x1 = (w - dx).min(w);
                    for y in y0..y1 {
                        let row = (y * w) as usize;
                        let srow = ((y + dy) * w) as usize;
                        for x in x0..x1 {
                            dst[row + x as usize] += wt * src[srow + (x + dx) as usize];
                        }
                    }
                }
            }
        }
    }
    FeatureMap::new(params.out_channels, input.height, input.width, out)
}

fn source_coord(dst: usize, in_len: usize, out_len: usize) -> (usize, usize, f64) {
    let scale = in_len as f64 / out_len as f64;
    let src = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
    let i0 = (src.floor() as usize).min(in_len - 1);
    let i1 = (i0 + 1).min(in_len - 1);
    let frac = if i0 == in_len - 1 { 0.0 } else { src - i0 as f64 };
    (i0, i1, frac)
}

/// Bilinear resampling with half-pixel centers (`align_corners = false`).
pub fn bilinear_upsample(input: &FeatureMap, out_h: usize, out_w: usize) -> Result<FeatureMap> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Shape(format!("upsample to {out_h}x{out_w}")));
    }
    if out_h == input.height && out_w == input.width {
        return Ok(input.clone());
    }
    let ys: Vec<_> = (0..out_h).map(|y| source_coord(y, input.height, out_h)).collect();
    let xs: Vec<_> = (0..out_w).map(|x| source_coord(x, input.width, out_w)).collect();
    let mut data = Vec::with_capacity(input.channels * out_h * out_w);
    for c in 0..input.channels {
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = (1.0 - fx) * input.at(c, y0, x0) + fx * input.at(c, y0, x1);
                let bot = (1.0 - fx) * input.at(c, y1, x0) + fx * input.at(c, y1, x1);
                data.push((1.0 - fy) * top + fy * bot);
            }
        }
    }
    FeatureMap::new(input.channels, out_h, out_w, data)
}

/// Average pooling onto an `out_h x out_w` grid with bins
/// `[floor(i * in / out), ceil((i + 1) * in / out))`.
pub fn adaptive_avg_pool(input: &FeatureMap, out_h: usize, out_w: usize) -> Result<FeatureMap> {
    if out_h == 0 || out_w == 0 || out_h > input.height || out_w > input.width {
        return Err(Error::Shape(format!(
            "cannot pool {}x{} onto {out_h}x{out_w}",
            input.height, input.width
        )));
    }
    let bins = |len: usize, out: usize| -> Vec<(usize, usize)> {
        (0..out)
            .map(|i| ((i * len) / out, ((i + 1) * len).div_ceil(out)))
            .collect()
    };
    let ybins = bins(input.height, out_h);
    let xbins = bins(input.width, out_w);
    let mut data = Vec::with_capacity(input.channels * out_h * out_w);
    for c in 0..input.channels {
        for &(y0, y1) in &ybins {
            for &(x0, x1) in &xbins {
                let mut s = 0.0;
                for y in y0..y1 {
                    for x in x0..x1 {
                        s += input.at(c, y, x);
                    }
                }
                data.push(s / ((y1 - y0) * (x1 - x0)) as f64);
            }
        }
    }
    FeatureMap::new(input.channels, out_h, out_w, data)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid clamped into the open interval `(0, 1)`; plain `sigmoid` rounds
/// to exactly 1.0 for inputs above about 37.
pub fn sigmoid_open(x: f64) -> f64 {
    sigmoid(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_conv(input: &FeatureMap, p: &ConvParams) -> Vec<f64> {
        let (h, w) = (input.height() as isize, input.width() as isize);
        let mut out = Vec::new();
        for o in 0..p.out_channels {
            for y in 0..h {
                for x in 0..w {
                    let mut acc = p.bias[o];
                    for i in 0..p.in_channels {
                        for ky in 0..p.kernel_h {
                            for kx in 0..p.kernel_w {
                                let sy = y + ky as isize - (p.kernel_h / 2) as isize;
                                let sx = x + kx as isize - (p.kernel_w / 2) as isize;
                                if sy >= 0 && sx >= 0 && sy < h && sx < w {
                                    acc += p.w(o, i, ky, kx) * input.at(i, sy as usize, sx as usize);
                                }
                            }
                        }
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    #[test]
    fn identity_and_zero_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = FeatureMap::random(&mut rng, 3, 5, 4, 1.0);
        assert_eq!(conv2d(&x, &ConvParams::identity(3)).unwrap(), x);
        let z = conv2d(&x, &ConvParams::zeros(2, 3, 3)).unwrap();
        assert_eq!(z.channels(), 2);
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = FeatureMap::random(&mut rng, 1, 4, 4, 1.0);
        let p = ConvParams::random(&mut rng, 1, 1, 3);
        let got = conv2d(&x, &p).unwrap();
        for (a, b) in got.data().iter().zip(naive_conv(&x, &p)) {
            assert!((a - b).abs() < 1e-12);
        }
        let x = FeatureMap::random(&mut rng, 3, 6, 5, 1.0);
        let p = ConvParams::random(&mut rng, 2, 3, 5);
        let got = conv2d(&x, &p).unwrap();
        for (a, b) in got.data().iter().zip(naive_conv(&x, &p)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_shape_errors() {
        let x = FeatureMap::zeros(2, 3, 3);
        assert!(conv2d(&x, &ConvParams::zeros(1, 3, 3)).is_err());
        assert!(ConvParams::new(1, 1, 2, 2, vec![0.0; 4], vec![0.0]).is_err());
        assert!(ConvParams::new(1, 1, 3, 3, vec![0.0; 8], vec![0.0]).is_err());
    }

    #[test]
    fn upsample_constant_and_identity() {
        let c = FeatureMap::filled(2, 3, 3, 0.7);
        let up = bilinear_upsample(&c, 7, 5).unwrap();
        assert!(up.data().iter().all(|&v| (v - 0.7).abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = FeatureMap::random(&mut rng, 1, 4, 4, 1.0);
        assert_eq!(bilinear_upsample(&x, 4, 4).unwrap(), x);
    }

    #[test]
    fn upsample_ramp_2_to_4() {
        // half-pixel centers: output x in {0,1,2,3} maps to source
        // {-0.25 -> 0, 0.25, 0.75, 1.25 -> clamp}; weights by hand below
        let x = FeatureMap::new(1, 2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let up = bilinear_upsample(&x, 4, 4).unwrap();
        let along = [0.0, 0.25, 0.75, 1.0];
        for (yi, &fy) in along.iter().enumerate() {
            for (xi, &fx) in along.iter().enumerate() {
                let expect = fx * 1.0 + fy * 2.0;
                assert!((up.at(0, yi, xi) - expect).abs() < 1e-12, "{yi},{xi}");
            }
        }
    }

    #[test]
    fn adaptive_pool_bins() {
        let x = FeatureMap::from_fn(1, 5, 5, |_, y, x| (y * 5 + x) as f64);
        let p = adaptive_avg_pool(&x, 2, 2).unwrap();
        // bins [0,3) and [2,5)
        let mean = |ys: std::ops::Range<usize>, xs: std::ops::Range<usize>| {
            let mut s = 0.0;
            let mut n = 0.0;
            for y in ys {
                for x in xs.clone() {
                    s += (y * 5 + x) as f64;
                    n += 1.0;
                }
            }
            s / n
        };
        assert_eq!(p.at(0, 0, 0), mean(0..3, 0..3));
        assert_eq!(p.at(0, 1, 1), mean(2..5, 2..5));
        assert!(adaptive_avg_pool(&x, 6, 2).is_err());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
        assert_eq!(sigmoid(40.0), 1.0);
        assert!(sigmoid_open(40.0) < 1.0);
        assert!(sigmoid_open(-1e6) > 0.0);
    }
}
