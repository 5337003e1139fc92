//! Forward passes of the three multi-source fusion blocks of the moving
//! object predictor, for one feature level:
//!
//! * interoceptive spatial attention: every static source (RGB, depth,
//!   static saliency) gets a spatial attention map computed from all four
//!   sources, pooled at several scales, and is enhanced residually with it;
//! * motion enhancement: channel then spatial attention over the flow
//!   features, fused with the static saliency map into a gate applied to the
//!   static and flow streams;
//! * feature purification: the difference of two independently parameterized
//!   convolutions over the concatenated streams.
//!
//! Widths are configurable. [`LevelConfig::default`] is a small desk-scale
//! setup (8 channels per source, 24x24) rather than the 512-wide layers of a
//! trained network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{
    adaptive_avg_pool, bilinear_upsample, concat, conv2d, sigmoid_open, ConvParams, FeatureMap,
};
use crate::error::{Error, Result};
use crate::media::ProbMap;

/// Single-channel map with every value strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMap(FeatureMap);

impl AttentionMap {
    /// Applies the sigmoid to a single-channel map of logits.
    pub fn from_logits(logits: FeatureMap) -> Result<Self> {
        if logits.channels() != 1 {
            return Err(Error::Shape(format!(
                "attention logits have {} channels",
                logits.channels()
            )));
        }
        Ok(Self(logits.map(sigmoid_open)))
    }

    pub fn as_feature(&self) -> &FeatureMap {
        &self.0
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn values(&self) -> &[f64] {
        self.0.data()
    }
}

/// One branch of the multi-scale pooling pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolScale {
    /// Scale 1: the map itself, unpooled.
    PassThrough,
    /// Adaptive average pool onto a `k x k` grid.
    Grid(usize),
    /// Global average.
    Global,
}

impl PoolScale {
    /// `{1, 2, 4, 6, global}`.
    pub fn standard() -> Vec<PoolScale> {
        vec![
            PoolScale::PassThrough,
            PoolScale::Grid(2),
            PoolScale::Grid(4),
            PoolScale::Grid(6),
            PoolScale::Global,
        ]
    }
}

impl std::str::FromStr for PoolScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(PoolScale::Global),
            "1" => Ok(PoolScale::PassThrough),
            k => k
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 1)
                .map(PoolScale::Grid)
                .ok_or_else(|| Error::OutOfRange(format!("pool scale {s:?}"))),
        }
    }
}

/// The pooled maps of each branch before upsampling.
pub fn pyramid_pool_levels(input: &FeatureMap, scales: &[PoolScale]) -> Result<Vec<FeatureMap>> {
    if scales.is_empty() {
        return Err(Error::Shape("empty pool scale list".into()));
    }
    scales
        .iter()
        .map(|&s| match s {
            PoolScale::PassThrough => Ok(input.clone()),
            PoolScale::Grid(k) => {
                if k > input.height() || k > input.width() {
                    return Err(Error::Shape(format!(
                        "pool scale {k} exceeds {}x{} input",
                        input.height(),
                        input.width()
                    )));
                }
                adaptive_avg_pool(input, k, k)
            }
            PoolScale::Global => adaptive_avg_pool(input, 1, 1),
        })
        .collect()
}

/// Pools at every scale, upsamples each branch back to the input size and
/// concatenates the branches along channels.
pub fn pyramid_pool(input: &FeatureMap, scales: &[PoolScale]) -> Result<FeatureMap> {
    let levels = pyramid_pool_levels(input, scales)?;
    let up = levels
        .iter()
        .map(|l| bilinear_upsample(l, input.height(), input.width()))
        .collect::<Result<Vec<_>>>()?;
    concat(&up.iter().collect::<Vec<_>>())
}

/// Layer widths for one level of the moving object predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub rgb_channels: usize,
    pub depth_channels: usize,
    pub saliency_channels: usize,
    pub flow_channels: usize,
    /// Width of the 1x1 correlation layer (512 in a full-size network).
    pub hidden_channels: usize,
    /// Width of each purification branch (512 in a full-size network).
    pub purified_channels: usize,
    pub mlp_reduction: usize,
    pub scales: Vec<PoolScale>,
    /// Apply a sigmoid to the channel-attention MLP output.
    pub channel_sigmoid: bool,
    pub height: usize,
    pub width: usize,
}

impl Default for LevelConfig {
    fn default() -> Self {
        Self {
            rgb_channels: 8,
            depth_channels: 8,
            saliency_channels: 8,
            flow_channels: 8,
            hidden_channels: 16,
            purified_channels: 16,
            mlp_reduction: 2,
            scales: PoolScale::standard(),
            channel_sigmoid: false,
            height: 24,
            width: 24,
        }
    }
}

impl LevelConfig {
    pub fn static_channels(&self) -> usize {
        self.rgb_channels + self.depth_channels + self.saliency_channels
    }

    pub fn total_channels(&self) -> usize {
        self.static_channels() + self.flow_channels
    }
}

/// Per-source parameters of the interoceptive attention block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceAttentionParams {
    /// 1x1 over the concatenation of all sources.
    pub correlate: ConvParams,
    /// 3x3 down to a single channel.
    pub squeeze: ConvParams,
    /// 3x3 over the pooled pyramid, single output channel.
    pub attend: ConvParams,
    /// 3x3 applied to the attended source feature.
    pub enhance: ConvParams,
}

impl SourceAttentionParams {
    fn build(
        cfg: &LevelConfig,
        source_channels: usize,
        mut conv: impl FnMut(usize, usize, usize) -> ConvParams,
    ) -> Self {
        Self {
            correlate: conv(cfg.hidden_channels, cfg.total_channels(), 1),
            squeeze: conv(1, cfg.hidden_channels, 3),
            attend: conv(1, cfg.scales.len(), 3),
            enhance: conv(source_channels, source_channels, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsamParams {
    pub rgb: SourceAttentionParams,
    pub depth: SourceAttentionParams,
    pub saliency: SourceAttentionParams,
    pub scales: Vec<PoolScale>,
}

impl IsamParams {
    fn build(cfg: &LevelConfig, mut conv: impl FnMut(usize, usize, usize) -> ConvParams) -> Self {
        Self {
            rgb: SourceAttentionParams::build(cfg, cfg.rgb_channels, &mut conv),
            depth: SourceAttentionParams::build(cfg, cfg.depth_channels, &mut conv),
            saliency: SourceAttentionParams::build(cfg, cfg.saliency_channels, &mut conv),
            scales: cfg.scales.clone(),
        }
    }

    pub fn zeros(cfg: &LevelConfig) -> Self {
        Self::build(cfg, ConvParams::zeros)
    }

    pub fn random(cfg: &LevelConfig, rng: &mut impl Rng) -> Self {
        Self::build(cfg, |o, i, k| ConvParams::random(rng, o, i, k))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedSource {
    pub attention: AttentionMap,
    pub enhanced: FeatureMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsamOutput {
    pub rgb: EnhancedSource,
    pub depth: EnhancedSource,
    pub saliency: EnhancedSource,
}

fn attend_source(
    all: &FeatureMap,
    source: &FeatureMap,
    params: &SourceAttentionParams,
    scales: &[PoolScale],
) -> Result<EnhancedSource> {
    let interoceptive = conv2d(&conv2d(all, &params.correlate)?, &params.squeeze)?;
    let pyramid = pyramid_pool(&interoceptive, scales)?;
    let attention = AttentionMap::from_logits(conv2d(&pyramid, &params.attend)?)?;
    let gated = source.mul_broadcast(attention.as_feature())?;
    let enhanced = source.add(&conv2d(&gated, &params.enhance)?)?;
    Ok(EnhancedSource {
        attention,
        enhanced,
    })
}

/// Interoceptive spatial attention over RGB, depth, static-saliency and flow
/// features of one level.
pub fn interoceptive_attention(
    f_rgb: &FeatureMap,
    f_d: &FeatureMap,
    f_ss: &FeatureMap,
    f_op: &FeatureMap,
    params: &IsamParams,
) -> Result<IsamOutput> {
    let all = concat(&[f_rgb, f_d, f_ss, f_op])?;
    if all.channels() != params.rgb.correlate.in_channels {
        return Err(Error::Shape(format!(
            "sources carry {} channels, attention expects {}",
            all.channels(),
            params.rgb.correlate.in_channels
        )));
    }
    Ok(IsamOutput {
        rgb: attend_source(&all, f_rgb, &params.rgb, &params.scales)?,
        depth: attend_source(&all, f_d, &params.depth, &params.scales)?,
        saliency: attend_source(&all, f_ss, &params.saliency, &params.scales)?,
    })
}

/// A fully connected layer, `weight` is `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(out_dim: usize, in_dim: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.len() != out_dim * in_dim || bias.len() != out_dim {
            return Err(Error::Shape(format!(
                "dense {out_dim}x{in_dim} with {} weights, {} biases",
                weight.len(),
                bias.len()
            )));
        }
        Ok(Self {
            out_dim,
            in_dim,
            weight,
            bias,
        })
    }

    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self::new(out_dim, in_dim, vec![0.0; out_dim * in_dim], vec![0.0; out_dim]).unwrap()
    }

    pub fn random(rng: &mut impl Rng, out_dim: usize, in_dim: usize) -> Self {
        let s = 1.0 / (in_dim as f64).sqrt();
        Self::new(
            out_dim,
            in_dim,
            (0..out_dim * in_dim).map(|_| rng.random_range(-s..s)).collect(),
            (0..out_dim).map(|_| rng.random_range(-s..s)).collect(),
        )
        .unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|o| {
                let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// Two fully connected layers with a ReLU between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub fc1: Dense,
    pub fc2: Dense,
    /// Squash the output with a sigmoid. Off by default: the channel
    /// attention formula multiplies by the raw MLP output.
    pub output_sigmoid: bool,
}

impl MlpParams {
    pub fn new(fc1: Dense, fc2: Dense, output_sigmoid: bool) -> Result<Self> {
        if fc1.out_dim != fc2.in_dim || fc1.in_dim != fc2.out_dim {
            return Err(Error::Shape(format!(
                "mlp {}->{} then {}->{}",
                fc1.in_dim, fc1.out_dim, fc2.in_dim, fc2.out_dim
            )));
        }
        Ok(Self {
            fc1,
            fc2,
            output_sigmoid,
        })
    }

    pub fn zeros(channels: usize, reduction: usize) -> Self {
        let hidden = (channels / reduction.max(1)).max(1);
        Self::new(
            Dense::zeros(hidden, channels),
            Dense::zeros(channels, hidden),
            false,
        )
        .unwrap()
    }

    pub fn random(rng: &mut impl Rng, channels: usize, reduction: usize) -> Self {
        let hidden = (channels / reduction.max(1)).max(1);
        let fc1 = Dense::random(rng, hidden, channels);
        let fc2 = Dense::random(rng, channels, hidden);
        Self::new(fc1, fc2, false).unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let hidden: Vec<f64> = self.fc1.forward(x).into_iter().map(|v| v.max(0.0)).collect();
        let out = self.fc2.forward(&hidden);
        if self.output_sigmoid {
            out.into_iter().map(sigmoid_open).collect()
        } else {
            out
        }
    }
}

/// Per-channel spatial mean.
pub fn global_average(input: &FeatureMap) -> Vec<f64> {
    let n = input.plane_len() as f64;
    (0..input.channels())
        .map(|c| input.channel(c).iter().sum::<f64>() / n)
        .collect()
}

/// Scales each flow channel by the MLP response to the channel means.
pub fn channel_attention(f_op: &FeatureMap, mlp: &MlpParams) -> Result<FeatureMap> {
    if mlp.fc1.in_dim != f_op.channels() {
        return Err(Error::Shape(format!(
            "mlp takes {} channels, feature has {}",
            mlp.fc1.in_dim,
            f_op.channels()
        )));
    }
    let weights = mlp.forward(&global_average(f_op));
    f_op.scale_channels(&weights)
}

/// Sigmoid of a 7x7 convolution over the channel-wise mean and max planes.
pub fn spatial_attention(f_op_ca: &FeatureMap, conv7: &ConvParams) -> Result<AttentionMap> {
    if conv7.kernel_h != 7 || conv7.kernel_w != 7 || conv7.in_channels != 2 || conv7.out_channels != 1 {
        return Err(Error::Shape(format!(
            "spatial attention needs a 1x2x7x7 kernel, got {}x{}x{}x{}",
            conv7.out_channels, conv7.in_channels, conv7.kernel_h, conv7.kernel_w
        )));
    }
    let (h, w, c) = (f_op_ca.height(), f_op_ca.width(), f_op_ca.channels());
    let mut avg = vec![0.0; h * w];
    let mut max = vec![f64::NEG_INFINITY; h * w];
    for ch in 0..c {
        for (i, &v) in f_op_ca.channel(ch).iter().enumerate() {
            avg[i] += v;
            max[i] = max[i].max(v);
        }
    }
    avg.iter_mut().for_each(|v| *v /= c as f64);
    avg.extend(max);
    let pooled = FeatureMap::new(2, h, w, avg)?;
    AttentionMap::from_logits(conv2d(&pooled, conv7)?)
}

/// Convolutions of the motion gate and of the two gated streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    /// Fuses the saliency map with the spatial attention: two inputs, one output.
    pub motion: ConvParams,
    /// Applied to the gated static stream.
    pub static_out: ConvParams,
    /// Applied to the gated flow stream.
    pub flow_out: ConvParams,
}

impl MotionParams {
    pub fn zeros(cfg: &LevelConfig) -> Self {
        Self {
            motion: ConvParams::zeros(1, 2, 3),
            static_out: ConvParams::zeros(cfg.static_channels(), cfg.static_channels(), 3),
            flow_out: ConvParams::zeros(cfg.flow_channels, cfg.flow_channels, 3),
        }
    }

    pub fn random(cfg: &LevelConfig, rng: &mut impl Rng) -> Self {
        Self {
            motion: ConvParams::random(rng, 1, 2, 3),
            static_out: ConvParams::random(rng, cfg.static_channels(), cfg.static_channels(), 3),
            flow_out: ConvParams::random(rng, cfg.flow_channels, cfg.flow_channels, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemParams {
    pub channel_mlp: MlpParams,
    /// 7x7, two inputs, one output.
    pub spatial: ConvParams,
    pub gate: MotionParams,
}

impl MemParams {
    pub fn zeros(cfg: &LevelConfig) -> Self {
        let mut mlp = MlpParams::zeros(cfg.flow_channels, cfg.mlp_reduction);
        mlp.output_sigmoid = cfg.channel_sigmoid;
        Self {
            channel_mlp: mlp,
            spatial: ConvParams::zeros(1, 2, 7),
            gate: MotionParams::zeros(cfg),
        }
    }

    pub fn random(cfg: &LevelConfig, rng: &mut impl Rng) -> Self {
        let mut mlp = MlpParams::random(rng, cfg.flow_channels, cfg.mlp_reduction);
        mlp.output_sigmoid = cfg.channel_sigmoid;
        Self {
            channel_mlp: mlp,
            spatial: ConvParams::random(rng, 1, 2, 7),
            gate: MotionParams::random(cfg, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionEnhanced {
    /// The motion gate. Not squashed: the gate is a plain convolution.
    pub f_me: FeatureMap,
    pub e_sta: FeatureMap,
    pub e_sta_me: FeatureMap,
    pub e_op_me: FeatureMap,
}

/// Gates the concatenated static features and the flow features with the
/// motion map built from the static saliency map and the flow attention.
/// The saliency map is resampled to the feature resolution first.
pub fn motion_enhance(
    m_sos: &ProbMap,
    f_op_ca_sa: &AttentionMap,
    e_rgb: &FeatureMap,
    e_d: &FeatureMap,
    e_ss: &FeatureMap,
    f_op: &FeatureMap,
    params: &MotionParams,
) -> Result<MotionEnhanced> {
    let MotionParams {
        motion,
        static_out,
        flow_out,
    } = params;
    let (h, w) = (f_op.height(), f_op.width());
    let saliency = bilinear_upsample(&FeatureMap::from_prob_map(m_sos), h, w)?;
    let f_me = conv2d(&concat(&[&saliency, f_op_ca_sa.as_feature()])?, motion)?;
    if f_me.channels() != 1 {
        return Err(Error::Shape("motion map must have one channel".into()));
    }
    let e_sta = concat(&[e_rgb, e_d, e_ss])?;
    let e_sta_me = conv2d(&e_sta.add(&e_sta.mul_broadcast(&f_me)?)?, static_out)?;
    let e_op_me = conv2d(&f_op.add(&f_op.mul_broadcast(&f_me)?)?, flow_out)?;
    Ok(MotionEnhanced {
        f_me,
        e_sta,
        e_sta_me,
        e_op_me,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Purified {
    pub common: FeatureMap,
    pub exclusive: FeatureMap,
    pub purified: FeatureMap,
}

pub fn feature_purify_branches(
    e_sta_me: &FeatureMap,
    e_op_me: &FeatureMap,
    params_comm: &ConvParams,
    params_exclu: &ConvParams,
) -> Result<Purified> {
    let cat = concat(&[e_sta_me, e_op_me])?;
    let common = conv2d(&cat, params_comm)?;
    let exclusive = conv2d(&cat, params_exclu)?;
    let purified = common.sub(&exclusive)?;
    Ok(Purified {
        common,
        exclusive,
        purified,
    })
}

/// Common branch minus mutually-exclusive branch.
pub fn feature_purify(
    e_sta_me: &FeatureMap,
    e_op_me: &FeatureMap,
    params_comm: &ConvParams,
    params_exclu: &ConvParams,
) -> Result<FeatureMap> {
    Ok(feature_purify_branches(e_sta_me, e_op_me, params_comm, params_exclu)?.purified)
}

/// Every parameter of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub isam: IsamParams,
    pub mem: MemParams,
    pub common: ConvParams,
    pub exclusive: ConvParams,
}

impl LevelParams {
    pub fn zeros(cfg: &LevelConfig) -> Self {
        let width = cfg.total_channels();
        Self {
            isam: IsamParams::zeros(cfg),
            mem: MemParams::zeros(cfg),
            common: ConvParams::zeros(cfg.purified_channels, width, 1),
            exclusive: ConvParams::zeros(cfg.purified_channels, width, 1),
        }
    }

    pub fn random(cfg: &LevelConfig, rng: &mut impl Rng) -> Self {
        let width = cfg.total_channels();
        Self {
            isam: IsamParams::random(cfg, rng),
            mem: MemParams::random(cfg, rng),
            common: ConvParams::random(rng, cfg.purified_channels, width, 1),
            exclusive: ConvParams::random(rng, cfg.purified_channels, width, 1),
        }
    }
}

/// Intermediate results of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutput {
    pub isam: IsamOutput,
    pub f_op_ca: FeatureMap,
    pub f_op_ca_sa: AttentionMap,
    pub mem: MotionEnhanced,
    pub purified: Purified,
}

/// Runs attention, motion enhancement and purification in sequence.
pub fn forward_level(
    f_rgb: &FeatureMap,
    f_d: &FeatureMap,
    f_ss: &FeatureMap,
    f_op: &FeatureMap,
    m_sos: &ProbMap,
    params: &LevelParams,
) -> Result<LevelOutput> {
    let isam = interoceptive_attention(f_rgb, f_d, f_ss, f_op, &params.isam)?;
    let f_op_ca = channel_attention(f_op, &params.mem.channel_mlp)?;
    let f_op_ca_sa = spatial_attention(&f_op_ca, &params.mem.spatial)?;
    let mem = motion_enhance(
        m_sos,
        &f_op_ca_sa,
        &isam.rgb.enhanced,
        &isam.depth.enhanced,
        &isam.saliency.enhanced,
        f_op,
        &params.mem.gate,
    )?;
    let purified = feature_purify_branches(&mem.e_sta_me, &mem.e_op_me, &params.common, &params.exclusive)?;
    Ok(LevelOutput {
        isam,
        f_op_ca,
        f_op_ca_sa,
        mem,
        purified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sources(rng: &mut impl Rng, cfg: &LevelConfig) -> [FeatureMap; 4] {
        let (h, w) = (cfg.height, cfg.width);
        [
            FeatureMap::random(rng, cfg.rgb_channels, h, w, 1.0),
            FeatureMap::random(rng, cfg.depth_channels, h, w, 1.0),
            FeatureMap::random(rng, cfg.saliency_channels, h, w, 1.0),
            FeatureMap::random(rng, cfg.flow_channels, h, w, 1.0),
        ]
    }

    #[test]
    fn pool_scale_parsing() {
        assert_eq!("1".parse::<PoolScale>().unwrap(), PoolScale::PassThrough);
        assert_eq!("4".parse::<PoolScale>().unwrap(), PoolScale::Grid(4));
        assert_eq!("global".parse::<PoolScale>().unwrap(), PoolScale::Global);
        assert!("0".parse::<PoolScale>().is_err());
        assert!("big".parse::<PoolScale>().is_err());
    }

    #[test]
    fn pyramid_shapes_and_constants() {
        let x = FeatureMap::filled(1, 24, 24, 0.3);
        let levels = pyramid_pool_levels(&x, &[PoolScale::Grid(2), PoolScale::Grid(4), PoolScale::Grid(6)]).unwrap();
        let sizes: Vec<_> = levels.iter().map(|l| (l.height(), l.width())).collect();
        assert_eq!(sizes, vec![(2, 2), (4, 4), (6, 6)]);
        let pooled = pyramid_pool(&x, &PoolScale::standard()).unwrap();
        assert_eq!(pooled.channels(), 5);
        assert!(pooled.data().iter().all(|&v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn pyramid_global_is_mean_and_rejects_large_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = FeatureMap::random(&mut rng, 1, 5, 7, 1.0);
        let mean = x.data().iter().sum::<f64>() / 35.0;
        let g = pyramid_pool(&x, &[PoolScale::Global]).unwrap();
        assert!(g.data().iter().all(|&v| (v - mean).abs() < 1e-12));
        assert!(pyramid_pool(&x, &[PoolScale::Grid(6)]).is_err());
        assert!(pyramid_pool(&x, &[]).is_err());
    }

    #[test]
    fn zero_isam_is_identity() {
        let cfg = LevelConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let [r, d, s, o] = sources(&mut rng, &cfg);
        let out = interoceptive_attention(&r, &d, &s, &o, &IsamParams::zeros(&cfg)).unwrap();
        for (src, e) in [(&r, &out.rgb), (&d, &out.depth), (&s, &out.saliency)] {
            assert!(e.attention.values().iter().all(|&v| v == 0.5));
            assert_eq!(&e.enhanced, src);
        }
    }

    #[test]
    fn isam_rejects_misconfigured_channels() {
        let cfg = LevelConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let [r, d, s, _] = sources(&mut rng, &cfg);
        let o = FeatureMap::zeros(3, cfg.height, cfg.width);
        assert!(interoceptive_attention(&r, &d, &s, &o, &IsamParams::zeros(&cfg)).is_err());
        let small = FeatureMap::zeros(cfg.flow_channels, 4, 4);
        assert!(interoceptive_attention(&r, &d, &s, &small, &IsamParams::zeros(&cfg)).is_err());
    }

    #[test]
    fn channel_attention_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = FeatureMap::random(&mut rng, 4, 5, 5, 1.0);
        let mut ones = MlpParams::zeros(4, 2);
        ones.fc2.bias = vec![1.0; 4];
        assert_eq!(channel_attention(&x, &ones).unwrap(), x);
        let zero = channel_attention(&x, &MlpParams::zeros(4, 2)).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));
        assert!(channel_attention(&x, &MlpParams::zeros(3, 1)).is_err());

        let mlp = MlpParams::random(&mut rng, 4, 2);
        let out = channel_attention(&x, &mlp).unwrap();
        let avg = global_average(&x);
        // hand evaluation of the two layers
        let hidden: Vec<f64> = (0..2)
            .map(|o| (mlp.fc1.bias[o] + (0..4).map(|i| mlp.fc1.weight[o * 4 + i] * avg[i]).sum::<f64>()).max(0.0))
            .collect();
        for c in 0..4 {
            let scale = mlp.fc2.bias[c] + (0..2).map(|i| mlp.fc2.weight[c * 2 + i] * hidden[i]).sum::<f64>();
            for (a, b) in out.channel(c).iter().zip(x.channel(c)) {
                assert!((a - b * scale).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_sigmoid_flag() {
        let x = FeatureMap::filled(2, 3, 3, 2.0);
        let mut mlp = MlpParams::zeros(2, 1);
        mlp.output_sigmoid = true;
        let out = channel_attention(&x, &mlp).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn spatial_attention_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = FeatureMap::random(&mut rng, 4, 9, 9, 1.0);
        let z = spatial_attention(&x, &ConvParams::zeros(1, 2, 7)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.5));
        let k = ConvParams::random(&mut rng, 1, 2, 7);
        let a = spatial_attention(&x, &k).unwrap();
        assert!(a.values().iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(spatial_attention(&x, &ConvParams::zeros(1, 2, 3)).is_err());
        assert!(spatial_attention(&x, &ConvParams::zeros(1, 3, 7)).is_err());
    }

    #[test]
    fn spatial_attention_constant_input_without_border() {
        // with a kernel that only has a centre tap no padding leaks in
        let x = FeatureMap::filled(3, 8, 8, 0.4);
        let mut k = ConvParams::zeros(1, 2, 7);
        k.weight[3 * 7 + 3] = 1.5;
        k.weight[49 + 3 * 7 + 3] = -0.5;
        let a = spatial_attention(&x, &k).unwrap();
        let expect = sigmoid_open(1.5 * 0.4 - 0.5 * 0.4);
        assert!(a.values().iter().all(|&v| (v - expect).abs() < 1e-15));
    }

    #[test]
    fn motion_enhance_identities() {
        let cfg = LevelConfig { height: 8, width: 8, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let [r, d, s, o] = sources(&mut rng, &cfg);
        let m_sos = ProbMap::constant(16, 16, 0.7).unwrap();
        let sa = spatial_attention(&o, &ConvParams::random(&mut rng, 1, 2, 7)).unwrap();
        let out = motion_enhance(
            &m_sos,
            &sa,
            &r,
            &d,
            &s,
            &o,
            &MotionParams {
                motion: ConvParams::zeros(1, 2, 3),
                static_out: ConvParams::identity(cfg.static_channels()),
                flow_out: ConvParams::identity(cfg.flow_channels),
            },
        )
        .unwrap();
        assert_eq!(out.e_sta.channels(), cfg.rgb_channels + cfg.depth_channels + cfg.saliency_channels);
        assert!(out.f_me.data().iter().all(|&v| v == 0.0));
        assert_eq!(out.e_sta_me, out.e_sta);
        assert_eq!(out.e_op_me, o);
    }

    #[test]
    fn purify_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = FeatureMap::random(&mut rng, 6, 5, 5, 1.0);
        let b = FeatureMap::random(&mut rng, 2, 5, 5, 1.0);
        let p = ConvParams::random(&mut rng, 3, 8, 1);
        let z = feature_purify(&a, &b, &p, &p).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let only = feature_purify(&a, &b, &p, &ConvParams::zeros(3, 8, 1)).unwrap();
        let comm = conv2d(&concat(&[&a, &b]).unwrap(), &p).unwrap();
        assert_eq!(only, comm);
        let q = ConvParams::random(&mut rng, 3, 8, 1);
        let br = feature_purify_branches(&a, &b, &p, &q).unwrap();
        let back = br.purified.add(&br.exclusive).unwrap();
        for (x, y) in back.data().iter().zip(br.common.data()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(feature_purify(&a, &FeatureMap::zeros(2, 4, 5), &p, &p).is_err());
    }

    #[test]
    fn full_level_runs_at_default_scale() {
        let cfg = LevelConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let [r, d, s, o] = sources(&mut rng, &cfg);
        let params = LevelParams::random(&cfg, &mut rng);
        let m_sos = ProbMap::from_fn(48, 48, |x, y| ((x + y) % 5) as f64 / 4.0).unwrap();
        let out = forward_level(&r, &d, &s, &o, &m_sos, &params).unwrap();
        assert_eq!(out.purified.purified.channels(), cfg.purified_channels);
        assert_eq!((out.purified.purified.height(), out.purified.purified.width()), (24, 24));
        assert!(out.f_op_ca_sa.values().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
