//! Adaptive fusion of the static (SOS) and moving-object (MOS) predictions.
//!
//! Training supervision comes from comparing both predictions against the
//! ground truth on five metrics: each comparison yields a sub-label that is
//! 1 when MOS wins, and the frame label is 1 when MOS wins at least three.
//! A scorer produces a weight `y_hat` in `[0, 1]` and the fused map is
//! `y_hat * M_mos + (1 - y_hat) * M_sos`.
//!
//! Ties follow the comparison branches literally: for J, F, S and E a tie
//! sets the sub-label to 0, while for MAE the `>=` branch sets it to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::tensor::{concat, sigmoid, FeatureMap};
use crate::media::{binarize, flow_to_color, BinaryMask, FlowField, ProbMap, RgbImage};
use crate::metrics::{evaluate, region_similarity_j, MetricConfig, MetricId, MetricScores};

/// Clamp applied to `y_hat` inside the BCE loss.
pub const BCE_EPS: f64 = 1e-7;

/// Per-metric "MOS beats SOS" indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubLabels {
    pub j: bool,
    pub f: bool,
    pub mae: bool,
    pub s: bool,
    pub e: bool,
}

impl SubLabels {
    pub fn from_bits(bits: [bool; 5]) -> Self {
        let [j, f, mae, s, e] = bits;
        Self { j, f, mae, s, e }
    }

    pub fn bits(&self) -> [bool; 5] {
        [self.j, self.f, self.mae, self.s, self.e]
    }

    pub fn count(&self) -> usize {
        self.bits().iter().filter(|&&b| b).count()
    }

    /// Compares two score bundles.
    pub fn from_scores(sos: &MetricScores, mos: &MetricScores) -> Self {
        Self {
            j: sos.j < mos.j,
            f: sos.f < mos.f,
            mae: sos.mae >= mos.mae,
            s: sos.s < mos.s,
            e: sos.e < mos.e,
        }
    }
}

/// Which predictor a frame should trust; also the binary training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionLabel {
    Sos,
    Mos,
}

pub type Choice = FusionLabel;

impl FusionLabel {
    pub fn value(self) -> f64 {
        match self {
            FusionLabel::Sos => 0.0,
            FusionLabel::Mos => 1.0,
        }
    }

    pub fn weight(self) -> FusionWeight {
        FusionWeight(self.value())
    }
}

/// Scorer output `y_hat`: the weight given to the MOS prediction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FusionWeight(f64);

impl FusionWeight {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange(format!("fusion weight {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn sub_labels(
    m_sos: &ProbMap,
    m_mos: &ProbMap,
    gt: &BinaryMask,
    config: &MetricConfig,
) -> Result<SubLabels> {
    m_sos.same_dims(m_mos)?;
    let sos = evaluate(m_sos, gt, config)?;
    let mos = evaluate(m_mos, gt, config)?;
    Ok(SubLabels::from_scores(&sos, &mos))
}

/// MOS when it wins at least three of the five comparisons.
pub fn majority_label(subs: SubLabels) -> FusionLabel {
    if subs.count() >= 3 {
        FusionLabel::Mos
    } else {
        FusionLabel::Sos
    }
}

/// A value computed after clamping `y_hat` into `[BCE_EPS, 1 - BCE_EPS]`;
/// `clamped` reports whether the clamp changed the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub clamped: bool,
}

fn clamp_weight(y_hat: FusionWeight) -> (f64, bool) {
    let v = y_hat.0.clamp(BCE_EPS, 1.0 - BCE_EPS);
    (v, v != y_hat.0)
}

/// `-(y ln y_hat + (1 - y) ln(1 - y_hat))`.
pub fn bce_loss(y_hat: FusionWeight, y: FusionLabel) -> Clamped {
    let (p, clamped) = clamp_weight(y_hat);
    let y = y.value();
    Clamped {
        value: -(y * p.ln() + (1.0 - y) * (1.0 - p).ln()),
        clamped,
    }
}

/// `dL/dy_hat = -y / y_hat + (1 - y) / (1 - y_hat)`, at the clamped point.
pub fn bce_grad(y_hat: FusionWeight, y: FusionLabel) -> Clamped {
    let (p, clamped) = clamp_weight(y_hat);
    let y = y.value();
    Clamped {
        value: -y / p + (1.0 - y) / (1.0 - p),
        clamped,
    }
}

/// `y_hat * m_mos + (1 - y_hat) * m_sos`, pixel-wise.
///
/// At `y_hat` of exactly 0 or 1 the matching input is returned unchanged,
/// and every output pixel stays between the two input pixels.
pub fn soft_fuse(y_hat: FusionWeight, m_mos: &ProbMap, m_sos: &ProbMap) -> Result<ProbMap> {
    m_mos.same_dims(m_sos)?;
    let w = y_hat.0;
    if w == 1.0 {
        return Ok(m_mos.clone());
    }
    if w == 0.0 {
        return Ok(m_sos.clone());
    }
    let data = m_mos
        .data()
        .iter()
        .zip(m_sos.data())
        .map(|(&a, &b)| (b + w * (a - b)).clamp(a.min(b), a.max(b)))
        .collect();
    ProbMap::new(m_mos.width(), m_mos.height(), data)
}

/// `m_mos` when `y_hat > 0.5`, else `m_sos`.
pub fn hard_select(y_hat: FusionWeight, m_mos: &ProbMap, m_sos: &ProbMap) -> Result<ProbMap> {
    m_mos.same_dims(m_sos)?;
    Ok(if y_hat.0 > 0.5 {
        m_mos.clone()
    } else {
        m_sos.clone()
    })
}

/// Per-frame best predictor on one metric; ties keep SOS.
pub fn ideal_select_by_metric(
    m_sos: &ProbMap,
    m_mos: &ProbMap,
    gt: &BinaryMask,
    metric: MetricId,
    config: &MetricConfig,
) -> Result<(ProbMap, Choice)> {
    m_sos.same_dims(m_mos)?;
    let sos = evaluate(m_sos, gt, config)?;
    let mos = evaluate(m_mos, gt, config)?;
    Ok(select_by_scores(m_sos, m_mos, &sos, &mos, metric))
}

pub(crate) fn choose_by_metric(sos: &MetricScores, mos: &MetricScores, metric: MetricId) -> Choice {
    if metric.strictly_better(mos.get(metric), sos.get(metric)) {
        Choice::Mos
    } else {
        Choice::Sos
    }
}

fn select_by_scores(
    m_sos: &ProbMap,
    m_mos: &ProbMap,
    sos: &MetricScores,
    mos: &MetricScores,
    metric: MetricId,
) -> (ProbMap, Choice) {
    match choose_by_metric(sos, mos, metric) {
        Choice::Mos => (m_mos.clone(), Choice::Mos),
        Choice::Sos => (m_sos.clone(), Choice::Sos),
    }
}

/// The prediction the majority label points at, with the label.
pub fn ideal_select_majority(
    m_sos: &ProbMap,
    m_mos: &ProbMap,
    gt: &BinaryMask,
    config: &MetricConfig,
) -> Result<(ProbMap, FusionLabel)> {
    let label = majority_label(sub_labels(m_sos, m_mos, gt, config)?);
    let out = match label {
        FusionLabel::Mos => m_mos.clone(),
        FusionLabel::Sos => m_sos.clone(),
    };
    Ok((out, label))
}

/// What a scorer gets to look at: the frame, the flow and both predictions.
#[derive(Debug, Clone, Copy)]
pub struct ScorerInput<'a> {
    pub rgb: Option<&'a RgbImage>,
    pub m_sos: &'a ProbMap,
    pub flow: Option<&'a FlowField>,
    pub m_mos: &'a ProbMap,
}

impl<'a> ScorerInput<'a> {
    pub fn new(
        rgb: Option<&'a RgbImage>,
        m_sos: &'a ProbMap,
        flow: Option<&'a FlowField>,
        m_mos: &'a ProbMap,
    ) -> Result<Self> {
        m_sos.same_dims(m_mos)?;
        if let Some(rgb) = rgb {
            m_sos.same_dims(rgb)?;
        }
        if let Some(flow) = flow {
            m_sos.same_dims(flow)?;
        }
        Ok(Self {
            rgb,
            m_sos,
            flow,
            m_mos,
        })
    }

    fn rgb_planes(&self) -> Option<FeatureMap> {
        self.rgb.map(|img| {
            FeatureMap::from_fn(3, img.height(), img.width(), |c, y, x| {
                f64::from(img.pixel(x, y)[c]) / 255.0
            })
        })
    }

    /// RGB planes (when present) stacked with the SOS map.
    pub fn rs(&self) -> FeatureMap {
        let sos = FeatureMap::from_prob_map(self.m_sos);
        match self.rgb_planes() {
            Some(rgb) => concat(&[&rgb, &sos]).expect("validated dims"),
            None => sos,
        }
    }

    /// RGB planes, the flow color rendering (both when present) and the MOS map.
    pub fn rm(&self) -> FeatureMap {
        let mut planes = Vec::new();
        if let Some(rgb) = self.rgb_planes() {
            planes.push(rgb);
        }
        if let Some(flow) = self.flow {
            let img = flow_to_color(flow);
            planes.push(FeatureMap::from_fn(3, img.height(), img.width(), |c, y, x| {
                f64::from(img.pixel(x, y)[c]) / 255.0
            }));
        }
        planes.push(FeatureMap::from_prob_map(self.m_mos));
        concat(&planes.iter().collect::<Vec<_>>()).expect("validated dims")
    }
}

/// Produces the MOS weight for one frame. Implementations are deterministic.
pub trait Scorer {
    fn score(&self, input: &ScorerInput<'_>) -> FusionWeight;
}

/// Always returns the same weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantScorer(pub FusionWeight);

impl Scorer for ConstantScorer {
    fn score(&self, _input: &ScorerInput<'_>) -> FusionWeight {
        self.0
    }
}

/// What the oracle scorer reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// The metric-majority training label.
    Majority,
    /// The better predictor on a single metric.
    Metric(MetricId),
}

/// Looks at the ground truth and returns 0 or 1, shifted inwards by
/// `epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct OracleScorer<'a> {
    pub gt: &'a BinaryMask,
    pub config: MetricConfig,
    pub mode: OracleMode,
    pub epsilon: f64,
}

impl<'a> OracleScorer<'a> {
    pub fn new(gt: &'a BinaryMask, config: MetricConfig, mode: OracleMode) -> Self {
        Self {
            gt,
            config,
            mode,
            epsilon: 0.0,
        }
    }

    pub fn label(&self, input: &ScorerInput<'_>) -> Result<FusionLabel> {
        let sos = evaluate(input.m_sos, self.gt, &self.config)?;
        let mos = evaluate(input.m_mos, self.gt, &self.config)?;
        Ok(match self.mode {
            OracleMode::Majority => majority_label(SubLabels::from_scores(&sos, &mos)),
            OracleMode::Metric(m) => choose_by_metric(&sos, &mos, m),
        })
    }
}

impl Scorer for OracleScorer<'_> {
    fn score(&self, input: &ScorerInput<'_>) -> FusionWeight {
        let label = self.label(input).expect("scorer input matches ground truth");
        let eps = self.epsilon.clamp(0.0, 0.5);
        FusionWeight(match label {
            FusionLabel::Mos => 1.0 - eps,
            FusionLabel::Sos => eps,
        })
    }
}

/// Hand-built stand-in for a trained scorer: trusts MOS when its mask lines
/// up with the region of strong flow.
///
/// `score = sigmoid(a * IoU(binarized MOS, strong flow) + b * coverage + c)`,
/// where strong flow is every known pixel whose magnitude exceeds the median
/// and coverage is the strong-flow fraction of the frame. Missing or
/// constant-magnitude flow scores 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicScorer {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub binarize_threshold: f64,
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        Self {
            a: 4.0,
            b: 0.0,
            c: -2.0,
            binarize_threshold: 0.5,
        }
    }
}

/// Pixels whose flow magnitude exceeds the median of the known magnitudes.
/// `None` when no magnitude stands out from the rest.
pub fn strong_flow_region(flow: &FlowField) -> Option<BinaryMask> {
    let mags = flow.magnitudes();
    let mut known: Vec<f64> = mags.iter().flatten().copied().collect();
    if known.is_empty() {
        return None;
    }
    known.sort_by(f64::total_cmp);
    if known[0] == known[known.len() - 1] {
        return None;
    }
    let mid = known.len() / 2;
    let median = if known.len() % 2 == 0 {
        0.5 * (known[mid - 1] + known[mid])
    } else {
        known[mid]
    };
    BinaryMask::new(
        flow.width(),
        flow.height(),
        mags.iter().map(|m| m.is_some_and(|m| m > median)).collect(),
    )
    .ok()
}

impl Scorer for HeuristicScorer {
    fn score(&self, input: &ScorerInput<'_>) -> FusionWeight {
        let Some(region) = input.flow.and_then(strong_flow_region) else {
            return FusionWeight(0.5);
        };
        let mos = binarize(input.m_mos, self.binarize_threshold.clamp(0.0, 1.0))
            .expect("threshold clamped into range");
        let iou = region_similarity_j(&mos, &region).expect("validated dims");
        let coverage = region.count() as f64 / region.len() as f64;
        let v = sigmoid(self.a * iou + self.b * coverage + self.c);
        FusionWeight(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(v: f64) -> FusionWeight {
        FusionWeight::new(v).unwrap()
    }

    fn gt() -> BinaryMask {
        BinaryMask::from_fn(12, 10, |x, y| (3..8).contains(&x) && (2..7).contains(&y)).unwrap()
    }

    fn random_map(rng: &mut impl Rng) -> ProbMap {
        ProbMap::from_fn(12, 10, |_, _| rng.random()).unwrap()
    }

    #[test]
    fn dominance_gives_all_ones() {
        let g = gt();
        let subs = sub_labels(&g.complement().to_prob_map(), &g.to_prob_map(), &g, &MetricConfig::default()).unwrap();
        assert_eq!(subs.bits(), [true; 5]);
        assert_eq!(majority_label(subs), FusionLabel::Mos);
    }

    #[test]
    fn identical_predictions_follow_tie_branches() {
        let g = gt();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_map(&mut rng);
        let subs = sub_labels(&m, &m, &g, &MetricConfig::default()).unwrap();
        assert_eq!(subs.bits(), [false, false, true, false, false]);
        let (out, label) = ideal_select_majority(&m, &m, &g, &MetricConfig::default()).unwrap();
        assert_eq!(label, FusionLabel::Sos);
        assert_eq!(out, m);
    }

    #[test]
    fn sub_labels_match_standalone_metrics_and_flip_on_swap() {
        let g = gt();
        let cfg = MetricConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random_map(&mut rng);
            let b = random_map(&mut rng);
            let sa = evaluate(&a, &g, &cfg).unwrap();
            let sb = evaluate(&b, &g, &cfg).unwrap();
            let subs = sub_labels(&a, &b, &g, &cfg).unwrap();
            assert_eq!(subs.j, sa.j < sb.j);
            assert_eq!(subs.f, sa.f < sb.f);
            assert_eq!(subs.mae, sa.mae >= sb.mae);
            assert_eq!(subs.s, sa.s < sb.s);
            assert_eq!(subs.e, sa.e < sb.e);
            let swapped = sub_labels(&b, &a, &g, &cfg).unwrap();
            for (i, m) in MetricId::ALL.iter().enumerate() {
                if sa.get(*m) != sb.get(*m) {
                    assert_ne!(subs.bits()[i], swapped.bits()[i]);
                }
            }
        }
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_label(SubLabels::from_bits([true, true, true, false, false])), FusionLabel::Mos);
        assert_eq!(majority_label(SubLabels::from_bits([false; 5])), FusionLabel::Sos);
        assert_eq!(majority_label(SubLabels::from_bits([true, true, false, false, false])), FusionLabel::Sos);
    }

    #[test]
    fn bce_values() {
        let l = bce_loss(w(0.5), FusionLabel::Mos);
        assert!((l.value - std::f64::consts::LN_2).abs() < 1e-15 && !l.clamped);
        assert!((bce_loss(w(0.9), FusionLabel::Sos).value - 10f64.ln()).abs() < 1e-12);
        let edge = bce_loss(w(1.0), FusionLabel::Mos);
        assert!(edge.clamped && edge.value < 1e-6);
        let edge = bce_loss(w(0.0), FusionLabel::Mos);
        assert!(edge.clamped && edge.value.is_finite());
        assert_eq!(bce_grad(w(0.5), FusionLabel::Mos).value, -2.0);
        assert_eq!(bce_grad(w(0.5), FusionLabel::Sos).value, 2.0);
        assert!(bce_grad(w(0.0), FusionLabel::Sos).clamped);
    }

    #[test]
    fn weight_range() {
        assert!(FusionWeight::new(1.01).is_err());
        assert!(FusionWeight::new(f64::NAN).is_err());
    }

    #[test]
    fn fuse_endpoints_and_midpoint() {
        let mos = ProbMap::constant(4, 4, 0.8).unwrap();
        let sos = ProbMap::constant(4, 4, 0.4).unwrap();
        assert_eq!(soft_fuse(w(1.0), &mos, &sos).unwrap(), mos);
        assert_eq!(soft_fuse(w(0.0), &mos, &sos).unwrap(), sos);
        let mid = soft_fuse(w(0.5), &mos, &sos).unwrap();
        assert!(mid.data().iter().all(|&v| (v - 0.6).abs() < 1e-15));
        assert!(soft_fuse(w(0.5), &mos, &ProbMap::constant(4, 3, 0.0).unwrap()).is_err());
    }

    #[test]
    fn fuse_of_equal_maps_is_that_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_map(&mut rng);
        for y in [0.1, 0.3, 0.77] {
            assert_eq!(soft_fuse(w(y), &m, &m).unwrap(), m);
        }
    }

    #[test]
    fn hard_select_threshold() {
        let mos = ProbMap::constant(2, 2, 1.0).unwrap();
        let sos = ProbMap::constant(2, 2, 0.0).unwrap();
        assert_eq!(hard_select(w(0.6), &mos, &sos).unwrap(), mos);
        assert_eq!(hard_select(w(0.5), &mos, &sos).unwrap(), sos);
        assert_eq!(hard_select(w(0.49999), &mos, &sos).unwrap(), sos);
        for y in [0.0, 1.0] {
            assert_eq!(hard_select(w(y), &mos, &sos).unwrap(), soft_fuse(w(y), &mos, &sos).unwrap());
        }
    }

    #[test]
    fn ideal_by_metric() {
        let g = gt();
        let cfg = MetricConfig::default();
        let good = g.to_prob_map();
        let bad = g.complement().to_prob_map();
        let (out, c) = ideal_select_by_metric(&bad, &good, &g, MetricId::J, &cfg).unwrap();
        assert_eq!((out, c), (good.clone(), Choice::Mos));
        let (out, c) = ideal_select_by_metric(&good, &good, &g, MetricId::Mae, &cfg).unwrap();
        assert_eq!((out, c), (good.clone(), Choice::Sos));
        let (_, c) = ideal_select_by_metric(&good, &bad, &g, MetricId::Mae, &cfg).unwrap();
        assert_eq!(c, Choice::Sos);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a = random_map(&mut rng);
            let b = random_map(&mut rng);
            let (out, _) = ideal_select_by_metric(&a, &b, &g, MetricId::J, &cfg).unwrap();
            let j = |m: &ProbMap| evaluate(m, &g, &cfg).unwrap().j;
            assert_eq!(j(&out), j(&a).max(j(&b)));
        }
    }

    #[test]
    fn majority_select_is_fuse_at_label() {
        let g = gt();
        let cfg = MetricConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random_map(&mut rng);
            let b = random_map(&mut rng);
            let (out, label) = ideal_select_majority(&a, &b, &g, &cfg).unwrap();
            assert_eq!(out, soft_fuse(label.weight(), &b, &a).unwrap());
        }
        let (out, label) = ideal_select_majority(&g.complement().to_prob_map(), &g.to_prob_map(), &g, &cfg).unwrap();
        assert_eq!(label, FusionLabel::Mos);
        assert_eq!(out, g.to_prob_map());
    }

    #[test]
    fn oracle_scorer_returns_label() {
        let g = gt();
        let good = g.to_prob_map();
        let bad = g.complement().to_prob_map();
        let input = ScorerInput::new(None, &bad, None, &good).unwrap();
        let oracle = OracleScorer::new(&g, MetricConfig::default(), OracleMode::Majority);
        assert_eq!(oracle.score(&input).value(), 1.0);
        let soft = OracleScorer { epsilon: 0.01, ..oracle };
        assert_eq!(soft.score(&input).value(), 0.99);
        let flipped = ScorerInput::new(None, &good, None, &bad).unwrap();
        assert_eq!(OracleScorer::new(&g, MetricConfig::default(), OracleMode::Metric(MetricId::J)).score(&flipped).value(), 0.0);
    }

    fn moving_square_flow() -> (FlowField, BinaryMask) {
        let region = BinaryMask::from_fn(16, 16, |x, y| (4..9).contains(&x) && (5..10).contains(&y)).unwrap();
        let u = region.data().iter().map(|&b| if b { 2.0 } else { 0.0 }).collect();
        let v = region.data().iter().map(|&b| if b { -1.0 } else { 0.0 }).collect();
        (FlowField::new(16, 16, u, v).unwrap(), region)
    }

    #[test]
    fn heuristic_trusts_aligned_mos() {
        let (flow, region) = moving_square_flow();
        let mos = region.to_prob_map();
        let sos = ProbMap::constant(16, 16, 0.0).unwrap();
        let input = ScorerInput::new(None, &sos, Some(&flow), &mos).unwrap();
        let s = HeuristicScorer::default().score(&input).value();
        // by hand: IoU 1, so sigmoid(4 - 2)
        assert!((s - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!(s > 0.5);
        let misaligned = ProbMap::from_fn(16, 16, |x, _| if x > 12 { 1.0 } else { 0.0 }).unwrap();
        let input = ScorerInput::new(None, &sos, Some(&flow), &misaligned).unwrap();
        assert!(HeuristicScorer::default().score(&input).value() < 0.5);
    }

    #[test]
    fn heuristic_fallbacks() {
        let zero = FlowField::zeros(16, 16).unwrap();
        let m = ProbMap::constant(16, 16, 0.7).unwrap();
        let input = ScorerInput::new(None, &m, Some(&zero), &m).unwrap();
        assert_eq!(HeuristicScorer::default().score(&input).value(), 0.5);
        let input = ScorerInput::new(None, &m, None, &m).unwrap();
        assert_eq!(HeuristicScorer::default().score(&input).value(), 0.5);
        let extreme = HeuristicScorer { a: 1e6, b: 0.0, c: 0.0, binarize_threshold: 0.5 };
        let (flow, region) = moving_square_flow();
        let mos = region.to_prob_map();
        let input = ScorerInput::new(None, &m, Some(&flow), &mos).unwrap();
        let v = extreme.score(&input).value();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn scorer_input_planes() {
        let (flow, region) = moving_square_flow();
        let mos = region.to_prob_map();
        let sos = ProbMap::constant(16, 16, 0.2).unwrap();
        let rgb = RgbImage::new(16, 16, vec![128; 16 * 16 * 3]).unwrap();
        let input = ScorerInput::new(Some(&rgb), &sos, Some(&flow), &mos).unwrap();
        assert_eq!(input.rs().channels(), 4);
        assert_eq!(input.rm().channels(), 7);
        assert!(ScorerInput::new(None, &sos, None, &ProbMap::constant(3, 3, 0.0).unwrap()).is_err());
    }
}
