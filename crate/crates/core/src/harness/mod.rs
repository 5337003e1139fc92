//! Dataset-level evaluation, fused-map export, synthetic scenarios and
//! comparison tables.
//!
//! On disk a dataset looks like `root/<dir>/<sequence>/<frame>.png`, one
//! directory per source (ground truth, SOS, MOS, optionally RGB), with flow
//! stored as `<frame>.flo`. Frames are enumerated from the ground-truth
//! tree; a frame whose counterpart is missing is skipped and logged, which
//! suits benchmarks that annotate only a subset of frames.

mod synth;
mod table;

pub use synth::{
    synth_scenario, write_dataset, Corruption, FlowSchedule, FlowRegime, ShapeKind, SynthDataset,
    SynthFrame, SynthScenario, SynthSequence,
};
pub use table::{format_gap, gap_percent, Table5, Table5Means, Table5Row, TableFormat};

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fusion::{
    choose_by_metric, majority_label, soft_fuse, Choice, ConstantScorer,
    FusionLabel, FusionWeight, HeuristicScorer, OracleMode, OracleScorer, Scorer, ScorerInput,
    SubLabels,
};
use crate::media::{
    read_flo_file, read_mask, read_prob_map, read_rgb, write_prob_map, BinaryMask, FlowField,
    ProbMap, RgbImage,
};
use crate::metrics::{evaluate, MetricConfig, MetricId, MetricScores};

/// Harness failures, split by who has to fix them.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad arguments, missing roots, unwritable outputs.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or inconsistent data.
    #[error("data error: {0}")]
    Data(#[from] Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Data(_) => 2,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Where the scorer weight comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerChoice {
    Oracle { mode: OracleMode, epsilon: f64 },
    Constant { weight: f64 },
    Heuristic(HeuristicScorer),
    /// Uniform weight per frame, drawn from the run seed and frame index.
    Random,
}

impl Default for ScorerChoice {
    fn default() -> Self {
        ScorerChoice::Oracle {
            mode: OracleMode::Majority,
            epsilon: 0.0,
        }
    }
}

/// `oracle`, `oracle:<metric>`, `constant:<w>`, `heuristic`,
/// `heuristic:<a>,<b>,<c>` or `random`.
impl FromStr for ScorerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind.to_ascii_lowercase().as_str(), arg) {
            ("oracle", None) | ("oracle", Some("majority")) => Ok(ScorerChoice::default()),
            ("oracle", Some(m)) => {
                let metric = m.parse::<MetricId>().map_err(|e| e.to_string())?;
                Ok(ScorerChoice::Oracle {
                    mode: OracleMode::Metric(metric),
                    epsilon: 0.0,
                })
            }
            ("constant", Some(w)) => {
                let weight: f64 = w.parse().map_err(|_| format!("bad weight {w:?}"))?;
                FusionWeight::new(weight).map_err(|e| e.to_string())?;
                Ok(ScorerChoice::Constant { weight })
            }
            ("heuristic", None) => Ok(ScorerChoice::Heuristic(HeuristicScorer::default())),
            ("heuristic", Some(args)) => {
                let v: Vec<f64> = args
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| format!("bad heuristic coefficients {args:?}"))?;
                let [a, b, c] = v[..] else {
                    return Err("heuristic needs three coefficients a,b,c".into());
                };
                Ok(ScorerChoice::Heuristic(HeuristicScorer {
                    a,
                    b,
                    c,
                    ..HeuristicScorer::default()
                }))
            }
            ("random", None) => Ok(ScorerChoice::Random),
            _ => Err(format!("unknown scorer {s:?}")),
        }
    }
}

/// How sequence means are combined into dataset means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Unweighted mean of per-sequence means.
    #[default]
    SequenceMean,
    /// Mean over all frames.
    FrameWeighted,
}

/// Source directory names under a dataset root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLayout {
    pub root: PathBuf,
    pub gt: String,
    pub sos: String,
    pub mos: String,
    pub flow: Option<String>,
    pub rgb: Option<String>,
}

impl DatasetLayout {
    /// The layout written by [`write_dataset`].
    pub fn standard(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            gt: "gt".into(),
            sos: "sos".into(),
            mos: "mos".into(),
            flow: Some("flow".into()),
            rgb: None,
        }
    }

    fn frame_path(&self, dir: &str, seq: &str, stem: &str, ext: &str) -> PathBuf {
        self.root.join(dir).join(seq).join(format!("{stem}.{ext}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub metrics: MetricConfig,
    pub scorer: ScorerChoice,
    /// Metric the "ideal" selector maximises per frame.
    pub ideal_metric: MetricId,
    pub aggregation: Aggregation,
    pub seed: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            metrics: MetricConfig::default(),
            scorer: ScorerChoice::default(),
            ideal_metric: MetricId::J,
            aggregation: Aggregation::default(),
            seed: 0,
        }
    }
}

impl EvalSettings {
    pub fn validate(&self) -> HarnessResult<()> {
        let m = &self.metrics;
        if !(0.0..=1.0).contains(&m.binarize_threshold) {
            return Err(config_err(format!(
                "binarize threshold {} outside [0, 1]",
                m.binarize_threshold
            )));
        }
        if let Some(t) = m.boundary_tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(config_err(format!("boundary tolerance {t}")));
            }
        }
        if !(0.0..=1.0).contains(&m.s_alpha) {
            return Err(config_err(format!("S-measure alpha {}", m.s_alpha)));
        }
        match self.scorer {
            ScorerChoice::Constant { weight } if FusionWeight::new(weight).is_err() => {
                Err(config_err(format!("constant weight {weight} outside [0, 1]")))
            }
            ScorerChoice::Oracle { epsilon, .. } if !(0.0..=0.5).contains(&epsilon) => {
                Err(config_err(format!("oracle epsilon {epsilon} outside [0, 0.5]")))
            }
            ScorerChoice::Heuristic(h) if !(0.0..=1.0).contains(&h.binarize_threshold) => {
                Err(config_err("heuristic threshold outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub layout: DatasetLayout,
    pub settings: EvalSettings,
}

impl RunConfig {
    pub fn new(layout: DatasetLayout) -> Self {
        Self {
            layout,
            settings: EvalSettings::default(),
        }
    }

    fn validate(&self) -> HarnessResult<()> {
        self.settings.validate()?;
        let l = &self.layout;
        let mut dirs = vec![&l.gt, &l.sos, &l.mos];
        dirs.extend(l.flow.iter());
        dirs.extend(l.rgb.iter());
        for d in dirs {
            let p = l.root.join(d);
            if !p.is_dir() {
                return Err(config_err(format!("{} is not a directory", p.display())));
            }
        }
        Ok(())
    }
}

/// One frame's inputs, already decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub sequence: String,
    pub frame: String,
    pub gt: BinaryMask,
    pub sos: ProbMap,
    pub mos: ProbMap,
    pub flow: Option<FlowField>,
    pub rgb: Option<RgbImage>,
}

impl FrameInput {
    fn check(&self) -> crate::Result<()> {
        self.sos.same_dims(&self.gt)?;
        ScorerInput::new(self.rgb.as_ref(), &self.sos, self.flow.as_ref(), &self.mos)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub sequence: String,
    pub frame: String,
    pub sos: MetricScores,
    pub mos: MetricScores,
    /// Hard selection at `weight > 0.5`.
    pub aps: MetricScores,
    /// Soft fusion with `weight`.
    pub apf: MetricScores,
    /// Per-frame best predictor on the configured metric.
    pub ideal: MetricScores,
    /// The predictor named by the majority label.
    pub ideal_majority: MetricScores,
    pub sub_labels: SubLabels,
    pub label: FusionLabel,
    pub ideal_choice: Choice,
    pub weight: f64,
}

/// A frame that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFrame {
    pub sequence: String,
    pub frame: String,
    pub reason: String,
}

/// Mean scores of every predictor variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantMeans {
    pub sos: MetricScores,
    pub mos: MetricScores,
    pub aps: MetricScores,
    pub apf: MetricScores,
    pub ideal: MetricScores,
    pub ideal_majority: MetricScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub id: String,
    pub frames: usize,
    #[serde(flatten)]
    pub means: VariantMeans,
}

/// Frames on which each predictor wins.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinCounts {
    /// Strictly better on the ideal metric.
    pub sos_metric: usize,
    pub mos_metric: usize,
    pub tie_metric: usize,
    /// By majority label.
    pub sos_majority: usize,
    pub mos_majority: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub aggregation: Aggregation,
    pub sequences: usize,
    pub frames: usize,
    #[serde(flatten)]
    pub means: VariantMeans,
    pub wins: WinCounts,
}

/// Percentage gap to the ideal mean, `(ideal - x) / ideal * 100`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub percent: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSet {
    pub sos: Gap,
    pub mos: Gap,
    pub aps: Gap,
    pub apf: Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub j: GapSet,
    pub f: GapSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub config: EvalSettings,
    pub layout: Option<DatasetLayout>,
    pub per_sequence: Vec<SequenceSummary>,
    pub dataset: DatasetSummary,
    pub gaps: Gaps,
    pub frames: Vec<FrameRecord>,
    pub skipped: Vec<SkippedFrame>,
}

impl DatasetReport {
    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn frame_weight(settings: &EvalSettings, input: &FrameInput, index: usize) -> FusionWeight {
    let scorer_input = ScorerInput {
        rgb: input.rgb.as_ref(),
        m_sos: &input.sos,
        flow: input.flow.as_ref(),
        m_mos: &input.mos,
    };
    match settings.scorer {
        ScorerChoice::Oracle { mode, epsilon } => OracleScorer {
            gt: &input.gt,
            config: settings.metrics,
            mode,
            epsilon,
        }
        .score(&scorer_input),
        ScorerChoice::Constant { weight } => {
            ConstantScorer(FusionWeight::new(weight).expect("validated")).score(&scorer_input)
        }
        ScorerChoice::Heuristic(h) => h.score(&scorer_input),
        ScorerChoice::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(index as u64);
            FusionWeight::new(rng.random::<f64>()).expect("unit interval")
        }
    }
}

/// Fused map of one frame under the configured scorer.
pub fn fuse_frame(settings: &EvalSettings, input: &FrameInput, index: usize) -> crate::Result<(FusionWeight, ProbMap)> {
    input.check()?;
    let w = frame_weight(settings, input, index);
    Ok((w, soft_fuse(w, &input.mos, &input.sos)?))
}

/// Scores one frame. `index` is the frame's position in the run, used only
/// by the random scorer.
pub fn evaluate_frame(settings: &EvalSettings, input: &FrameInput, index: usize) -> crate::Result<FrameRecord> {
    let cfg = &settings.metrics;
    let (weight, fused) = fuse_frame(settings, input, index)?;
    let sos = evaluate(&input.sos, &input.gt, cfg)?;
    let mos = evaluate(&input.mos, &input.gt, cfg)?;
    let subs = SubLabels::from_scores(&sos, &mos);
    let label = majority_label(subs);
    let pick = |c: Choice| match c {
        Choice::Sos => sos,
        Choice::Mos => mos,
    };
    // hard_select picks MOS exactly when weight > 0.5
    let aps = if weight.value() > 0.5 { mos } else { sos };
    let apf = evaluate(&fused, &input.gt, cfg)?;
    let ideal_choice = choose_by_metric(&sos, &mos, settings.ideal_metric);
    Ok(FrameRecord {
        sequence: input.sequence.clone(),
        frame: input.frame.clone(),
        sos,
        mos,
        aps,
        apf,
        ideal: pick(ideal_choice),
        ideal_majority: pick(label),
        sub_labels: subs,
        label,
        ideal_choice,
        weight: weight.value(),
    })
}

/// Scores in-memory frames, in parallel, keeping input order.
pub fn evaluate_frames(settings: &EvalSettings, frames: &[FrameInput]) -> crate::Result<Vec<FrameRecord>> {
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| evaluate_frame(settings, f, i))
        .collect()
}

fn mean_scores<'a>(items: impl Iterator<Item = &'a MetricScores>) -> MetricScores {
    let mut acc = MetricScores { j: 0.0, f: 0.0, mae: 0.0, s: 0.0, e: 0.0 };
    let mut n = 0usize;
    for s in items {
        acc.j += s.j;
        acc.f += s.f;
        acc.mae += s.mae;
        acc.s += s.s;
        acc.e += s.e;
        n += 1;
    }
    let n = n.max(1) as f64;
    MetricScores {
        j: acc.j / n,
        f: acc.f / n,
        mae: acc.mae / n,
        s: acc.s / n,
        e: acc.e / n,
    }
}

fn variant_means<T>(items: &[T], get: impl Fn(&T) -> &VariantMeans) -> VariantMeans {
    VariantMeans {
        sos: mean_scores(items.iter().map(|x| &get(x).sos)),
        mos: mean_scores(items.iter().map(|x| &get(x).mos)),
        aps: mean_scores(items.iter().map(|x| &get(x).aps)),
        apf: mean_scores(items.iter().map(|x| &get(x).apf)),
        ideal: mean_scores(items.iter().map(|x| &get(x).ideal)),
        ideal_majority: mean_scores(items.iter().map(|x| &get(x).ideal_majority)),
    }
}

impl FrameRecord {
    fn variants(&self) -> VariantMeans {
        VariantMeans {
            sos: self.sos,
            mos: self.mos,
            aps: self.aps,
            apf: self.apf,
            ideal: self.ideal,
            ideal_majority: self.ideal_majority,
        }
    }
}

fn gap_set(means: &VariantMeans, metric: MetricId) -> GapSet {
    let ideal = means.ideal.get(metric);
    let gap = |s: &MetricScores| {
        let percent = gap_percent(s.get(metric), ideal);
        Gap {
            percent,
            text: format_gap(percent),
        }
    };
    GapSet {
        sos: gap(&means.sos),
        mos: gap(&means.mos),
        aps: gap(&means.aps),
        apf: gap(&means.apf),
    }
}

/// Reduces frame records (in sequence order) into a report.
pub fn build_report(
    settings: &EvalSettings,
    layout: Option<DatasetLayout>,
    frames: Vec<FrameRecord>,
    skipped: Vec<SkippedFrame>,
) -> crate::Result<DatasetReport> {
    if frames.is_empty() {
        return Err(Error::Shape("no frames to evaluate".into()));
    }
    let mut per_sequence: Vec<SequenceSummary> = Vec::new();
    let mut start = 0;
    while start < frames.len() {
        let id = &frames[start].sequence;
        let end = start + frames[start..].iter().take_while(|f| &f.sequence == id).count();
        let vs: Vec<VariantMeans> = frames[start..end].iter().map(FrameRecord::variants).collect();
        per_sequence.push(SequenceSummary {
            id: id.clone(),
            frames: end - start,
            means: variant_means(&vs, |v| v),
        });
        start = end;
    }
    let means = match settings.aggregation {
        Aggregation::SequenceMean => variant_means(&per_sequence, |s| &s.means),
        Aggregation::FrameWeighted => {
            let vs: Vec<VariantMeans> = frames.iter().map(FrameRecord::variants).collect();
            variant_means(&vs, |v| v)
        }
    };
    let mut wins = WinCounts::default();
    for f in &frames {
        let (s, m) = (f.sos.get(settings.ideal_metric), f.mos.get(settings.ideal_metric));
        if settings.ideal_metric.strictly_better(m, s) {
            wins.mos_metric += 1;
        } else if settings.ideal_metric.strictly_better(s, m) {
            wins.sos_metric += 1;
        } else {
            wins.tie_metric += 1;
        }
        match f.label {
            FusionLabel::Mos => wins.mos_majority += 1,
            FusionLabel::Sos => wins.sos_majority += 1,
        }
    }
    let gaps = Gaps {
        j: gap_set(&means, MetricId::J),
        f: gap_set(&means, MetricId::F),
    };
    Ok(DatasetReport {
        config: settings.clone(),
        layout,
        dataset: DatasetSummary {
            aggregation: settings.aggregation,
            sequences: per_sequence.len(),
            frames: frames.len(),
            means,
            wins,
        },
        per_sequence,
        gaps,
        frames,
        skipped,
    })
}

fn sorted_entries(dir: &Path) -> HarnessResult<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| config_err(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| HarnessError::Data(Error::io(dir, e)))?;
        out.push(entry.path());
    }
    out.sort();
    Ok(out)
}

/// `(sequence, frame)` ids found in the ground-truth tree, sorted.
pub fn discover_frames(layout: &DatasetLayout) -> HarnessResult<Vec<(String, String)>> {
    let gt_root = layout.root.join(&layout.gt);
    let mut out = Vec::new();
    for seq_dir in sorted_entries(&gt_root)? {
        if !seq_dir.is_dir() {
            continue;
        }
        let seq = seq_dir.file_name().unwrap().to_string_lossy().into_owned();
        for file in sorted_entries(&seq_dir)? {
            if file.extension().is_some_and(|e| e == "png") {
                let stem = file.file_stem().unwrap().to_string_lossy().into_owned();
                out.push((seq.clone(), stem));
            }
        }
    }
    Ok(out)
}

/// Loads one frame; `Ok(Err(reason))` when a counterpart file is missing.
fn load_frame(layout: &DatasetLayout, seq: &str, stem: &str) -> crate::Result<Result<FrameInput, String>> {
    let gt_path = layout.frame_path(&layout.gt, seq, stem, "png");
    let sos_path = layout.frame_path(&layout.sos, seq, stem, "png");
    let mos_path = layout.frame_path(&layout.mos, seq, stem, "png");
    let flow_path = layout.flow.as_ref().map(|d| layout.frame_path(d, seq, stem, "flo"));
    let rgb_path = layout.rgb.as_ref().map(|d| layout.frame_path(d, seq, stem, "png"));
    let required = [Some(&sos_path), Some(&mos_path), flow_path.as_ref(), rgb_path.as_ref()];
    for p in required.into_iter().flatten() {
        if !p.is_file() {
            return Ok(Err(format!("missing {}", p.display())));
        }
    }
    let input = FrameInput {
        sequence: seq.to_string(),
        frame: stem.to_string(),
        gt: read_mask(&gt_path)?,
        sos: read_prob_map(&sos_path)?,
        mos: read_prob_map(&mos_path)?,
        flow: flow_path.map(read_flo_file).transpose()?,
        rgb: rgb_path.map(read_rgb).transpose()?,
    };
    input.check()?;
    Ok(Ok(input))
}

fn load_all(config: &RunConfig) -> HarnessResult<(Vec<FrameInput>, Vec<SkippedFrame>)> {
    config.validate()?;
    let ids = discover_frames(&config.layout)?;
    let loaded: Vec<crate::Result<Result<FrameInput, String>>> = ids
        .par_iter()
        .map(|(seq, stem)| load_frame(&config.layout, seq, stem))
        .collect();
    let mut frames = Vec::new();
    let mut skipped = Vec::new();
    for ((seq, stem), r) in ids.into_iter().zip(loaded) {
        match r? {
            Ok(f) => frames.push(f),
            Err(reason) => {
                log::warn!("skipping {seq}/{stem}: {reason}");
                skipped.push(SkippedFrame {
                    sequence: seq,
                    frame: stem,
                    reason,
                });
            }
        }
    }
    Ok((frames, skipped))
}

/// Evaluates every frame under `config.layout`.
pub fn evaluate_dataset(config: &RunConfig) -> HarnessResult<DatasetReport> {
    let (frames, skipped) = load_all(config)?;
    let records = evaluate_frames(&config.settings, &frames)?;
    Ok(build_report(&config.settings, Some(config.layout.clone()), records, skipped)?)
}

/// Writes `out/<sequence>/<frame>.png` with the fused map of every frame,
/// quantized to 8 bits. Returns the written paths in frame order.
pub fn fuse_dataset(config: &RunConfig, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let (frames, _skipped) = load_all(config)?;
    fs::create_dir_all(out).map_err(|e| config_err(format!("cannot create {}: {e}", out.display())))?;
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let (_, fused) = fuse_frame(&config.settings, f, i)?;
            let path = out.join(&f.sequence).join(format!("{}.png", f.frame));
            write_prob_map(&path, &fused).map_err(|e| match e {
                Error::Io { .. } => config_err(format!("cannot write {}: {e}", path.display())),
                other => HarnessError::Data(other),
            })?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scorer_parsing() {
        assert_eq!("oracle".parse::<ScorerChoice>().unwrap(), ScorerChoice::default());
        assert_eq!(
            "oracle:j".parse::<ScorerChoice>().unwrap(),
            ScorerChoice::Oracle { mode: OracleMode::Metric(MetricId::J), epsilon: 0.0 }
        );
        assert_eq!("constant:0.25".parse::<ScorerChoice>().unwrap(), ScorerChoice::Constant { weight: 0.25 });
        assert!("constant:2".parse::<ScorerChoice>().is_err());
        assert!("constant".parse::<ScorerChoice>().is_err());
        let ScorerChoice::Heuristic(h) = "heuristic:1,2,3".parse().unwrap() else { panic!() };
        assert_eq!((h.a, h.b, h.c), (1.0, 2.0, 3.0));
        assert!("heuristic:1,2".parse::<ScorerChoice>().is_err());
        assert_eq!("random".parse::<ScorerChoice>().unwrap(), ScorerChoice::Random);
        assert!("nope".parse::<ScorerChoice>().is_err());
    }

    #[test]
    fn settings_validation() {
        let mut s = EvalSettings::default();
        s.validate().unwrap();
        s.metrics.binarize_threshold = 1.5;
        assert_eq!(s.validate().unwrap_err().exit_code(), 1);
        let s = EvalSettings { scorer: ScorerChoice::Constant { weight: -0.1 }, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn random_scorer_depends_on_seed_and_index_only() {
        let gt = BinaryMask::empty(4, 4).unwrap();
        let m = ProbMap::constant(4, 4, 0.3).unwrap();
        let f = FrameInput { sequence: "a".into(), frame: "0".into(), gt, sos: m.clone(), mos: m, flow: None, rgb: None };
        let s = EvalSettings { scorer: ScorerChoice::Random, seed: 9, ..Default::default() };
        let a = frame_weight(&s, &f, 3);
        assert_eq!(a, frame_weight(&s, &f, 3));
        assert_ne!(a, frame_weight(&s, &f, 4));
    }
}
