//! Seeded synthetic datasets: one moving shape per sequence, its exact
//! displacement field degraded by a flow-quality schedule, a MOS map whose
//! corruption follows the flow degradation and a SOS map corrupted
//! independently of the flow.
//!
//! Predictions are corrupted as `(1 - c) * gt + c * (0.5 * noise + 0.5 * distractor)`
//! and quantized to 8 bits, so the in-memory dataset equals what
//! [`write_dataset`] puts on disk. The MOS distractor is the object drawn at
//! a wrong offset; the SOS distractor is a static blob elsewhere in the frame.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FrameInput;
use crate::error::{Error, Result};
use crate::media::{
    prob_map_from_u8, write_flo_file, write_mask, write_prob_map, BinaryMask, FlowField, ProbMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
    /// Rectangles on even sequences, ellipses on odd ones.
    Alternate,
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rectangle" | "rect" => Ok(ShapeKind::Rectangle),
            "ellipse" => Ok(ShapeKind::Ellipse),
            "alternate" => Ok(ShapeKind::Alternate),
            _ => Err(format!("unknown shape {s:?}")),
        }
    }
}

/// Flow degradation per sequence. A fixed level applies to every frame;
/// without one each sequence draws a base level and every frame jitters
/// around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowSchedule {
    Clean,
    /// Additive Gaussian noise on every vector.
    Noisy(Option<f64>),
    /// Vectors zeroed with probability equal to the level.
    Dropout(Option<f64>),
    /// Each sequence picks clean, noisy or dropout at random.
    Mixed,
}

/// `clean`, `noisy`, `noisy:<level>`, `dropout`, `dropout:<level>`, `mixed`.
impl FromStr for FlowSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let level = arg
            .map(|a| {
                a.parse::<f64>()
                    .ok()
                    .filter(|l| (0.0..=1.0).contains(l))
                    .ok_or_else(|| format!("bad level {a:?} (need a number in [0, 1])"))
            })
            .transpose()?;
        match (kind.to_ascii_lowercase().as_str(), level) {
            ("clean", None) => Ok(FlowSchedule::Clean),
            ("noisy", l) => Ok(FlowSchedule::Noisy(l)),
            ("dropout", l) => Ok(FlowSchedule::Dropout(l)),
            ("mixed", None) => Ok(FlowSchedule::Mixed),
            _ => Err(format!("unknown schedule {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowRegime {
    Clean,
    Noisy,
    Dropout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    /// MOS corruption is `min(1, gain * flow_level)`.
    pub mos_gain: f64,
    /// Range of the per-sequence SOS corruption level.
    pub sos_min: f64,
    pub sos_max: f64,
    /// Half-width of the per-frame jitter on drawn levels.
    pub jitter: f64,
    /// Noise standard deviation, in pixels, at flow level 1.
    pub noise_sigma: f64,
}

impl Default for Corruption {
    fn default() -> Self {
        Self {
            mos_gain: 1.0,
            sos_min: 0.15,
            sos_max: 0.75,
            jitter: 0.3,
            noise_sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthScenario {
    pub sequences: usize,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub shape: ShapeKind,
    pub schedule: FlowSchedule,
    pub corruption: Corruption,
    pub seed: u64,
}

impl Default for SynthScenario {
    fn default() -> Self {
        Self {
            sequences: 4,
            frames: 20,
            width: 64,
            height: 48,
            shape: ShapeKind::Alternate,
            schedule: FlowSchedule::Mixed,
            corruption: Corruption::default(),
            seed: 0,
        }
    }
}

impl SynthScenario {
    pub fn validate(&self) -> Result<()> {
        if self.sequences == 0 || self.frames == 0 {
            return Err(Error::OutOfRange("need at least one sequence and one frame".into()));
        }
        if self.width < 8 || self.height < 8 {
            return Err(Error::InvalidDimensions {
                width: self.width as i64,
                height: self.height as i64,
            });
        }
        let c = &self.corruption;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(c.sos_min) && unit(c.sos_max) && c.sos_min <= c.sos_max) {
            return Err(Error::OutOfRange(format!("SOS range [{}, {}]", c.sos_min, c.sos_max)));
        }
        if !(c.mos_gain >= 0.0 && c.jitter >= 0.0 && c.noise_sigma >= 0.0) {
            return Err(Error::OutOfRange("negative corruption parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrame {
    pub id: String,
    pub gt: BinaryMask,
    pub sos: ProbMap,
    pub mos: ProbMap,
    /// Degraded displacement from this frame to the next.
    pub flow: FlowField,
    pub flow_level: f64,
    pub mos_corruption: f64,
    pub sos_corruption: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSequence {
    pub id: String,
    pub regime: FlowRegime,
    pub shape: ShapeKind,
    pub frames: Vec<SynthFrame>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub scenario: SynthScenario,
    pub sequences: Vec<SynthSequence>,
}

impl SynthDataset {
    /// Frames in sequence order, ready for the evaluator.
    pub fn frame_inputs(&self) -> Vec<FrameInput> {
        self.sequences
            .iter()
            .flat_map(|s| {
                s.frames.iter().map(|f| FrameInput {
                    sequence: s.id.clone(),
                    frame: f.id.clone(),
                    gt: f.gt.clone(),
                    sos: f.sos.clone(),
                    mos: f.mos.clone(),
                    flow: Some(f.flow.clone()),
                    rgb: None,
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
struct Shape {
    kind: ShapeKind,
    rx: f64,
    ry: f64,
}

impl Shape {
    fn render(&self, w: usize, h: usize, cx: f64, cy: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let dx = (x as f64 + 0.5 - cx) / self.rx;
            let dy = (y as f64 + 0.5 - cy) / self.ry;
            match self.kind {
                ShapeKind::Ellipse => dx * dx + dy * dy <= 1.0,
                _ => dx.abs() <= 1.0 && dy.abs() <= 1.0,
            }
        })
        .expect("scenario dims validated")
    }
}

/// Moves `p` by `v`, reflecting off `[lo, hi]`.
fn bounce(p: f64, v: f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = p + v;
    if n < lo {
        (2.0 * lo - n, -v)
    } else if n > hi {
        (2.0 * hi - n, -v)
    } else {
        (n, v)
    }
}

fn corrupt(rng: &mut ChaCha8Rng, gt: &BinaryMask, distractor: &BinaryMask, c: f64) -> ProbMap {
    let bytes: Vec<u8> = gt
        .data()
        .iter()
        .zip(distractor.data())
        .map(|(&g, &d)| {
            let u: f64 = rng.random();
            let g = g as u8 as f64;
            let d = d as u8 as f64;
            let v = (1.0 - c) * g + c * (0.5 * u + 0.5 * d);
            crate::media::quantize_u8(v.clamp(0.0, 1.0))
        })
        .collect();
    prob_map_from_u8(gt.width(), gt.height(), &bytes).expect("dims carried over")
}

fn degrade_flow(
    rng: &mut ChaCha8Rng,
    regime: FlowRegime,
    level: f64,
    sigma: f64,
    exact: (Vec<f32>, Vec<f32>),
    w: usize,
    h: usize,
) -> FlowField {
    let (mut u, mut v) = exact;
    match regime {
        FlowRegime::Clean => {}
        FlowRegime::Noisy => {
            let normal = Normal::new(0.0, sigma * level).expect("non-negative sigma");
            for (a, b) in u.iter_mut().zip(v.iter_mut()) {
                *a += normal.sample(rng) as f32;
                *b += normal.sample(rng) as f32;
            }
        }
        FlowRegime::Dropout => {
            for (a, b) in u.iter_mut().zip(v.iter_mut()) {
                if rng.random::<f64>() < level {
                    *a = 0.0;
                    *b = 0.0;
                }
            }
        }
    }
    FlowField::new(w, h, u, v).expect("dims carried over")
}

fn sequence(sc: &SynthScenario, index: usize, seed: u64) -> SynthSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (sc.width, sc.height);
    let (wf, hf) = (w as f64, h as f64);
    let kind = match sc.shape {
        ShapeKind::Alternate if index % 2 == 0 => ShapeKind::Rectangle,
        ShapeKind::Alternate => ShapeKind::Ellipse,
        k => k,
    };
    let shape = Shape {
        kind,
        rx: rng.random_range(wf / 8.0..=wf / 4.0),
        ry: rng.random_range(hf / 8.0..=hf / 4.0),
    };
    let (mut cx, mut cy) = (
        rng.random_range(shape.rx..=wf - shape.rx),
        rng.random_range(shape.ry..=hf - shape.ry),
    );
    let (mut vx, mut vy) = (rng.random_range(-2.5..=2.5), rng.random_range(-2.5..=2.5));

    let (regime, fixed) = match sc.schedule {
        FlowSchedule::Clean => (FlowRegime::Clean, Some(0.0)),
        FlowSchedule::Noisy(l) => (FlowRegime::Noisy, l),
        FlowSchedule::Dropout(l) => (FlowRegime::Dropout, l),
        FlowSchedule::Mixed => (
            [FlowRegime::Clean, FlowRegime::Noisy, FlowRegime::Dropout][rng.random_range(0..3)],
            None,
        ),
    };
    let fixed = if regime == FlowRegime::Clean { Some(0.0) } else { fixed };
    let flow_base: f64 = rng.random();
    let c = sc.corruption;
    let sos_base = rng.random_range(c.sos_min..=c.sos_max);
    let blob = Shape {
        kind: ShapeKind::Ellipse,
        rx: (wf / 10.0).max(1.5),
        ry: (hf / 10.0).max(1.5),
    };
    let blob_mask = blob.render(w, h, rng.random_range(0.0..wf), rng.random_range(0.0..hf));

    let jitter = |rng: &mut ChaCha8Rng, base: f64| {
        if c.jitter > 0.0 {
            (base + rng.random_range(-c.jitter..=c.jitter)).clamp(0.0, 1.0)
        } else {
            base
        }
    };

    let mut frames = Vec::with_capacity(sc.frames);
    for t in 0..sc.frames {
        let gt = shape.render(w, h, cx, cy);
        let (nx, nvx) = bounce(cx, vx, shape.rx, wf - shape.rx);
        let (ny, nvy) = bounce(cy, vy, shape.ry, hf - shape.ry);
        let (du, dv) = ((nx - cx) as f32, (ny - cy) as f32);
        let exact_u = gt.data().iter().map(|&g| if g { du } else { 0.0 }).collect();
        let exact_v = gt.data().iter().map(|&g| if g { dv } else { 0.0 }).collect();

        let flow_level = fixed.unwrap_or_else(|| jitter(&mut rng, flow_base));
        let flow = degrade_flow(&mut rng, regime, flow_level, c.noise_sigma, (exact_u, exact_v), w, h);
        let mos_corruption = (c.mos_gain * flow_level).min(1.0);
        let sos_corruption = jitter(&mut rng, sos_base);

        let (ox, oy) = (
            rng.random_range(-1.0..=1.0) * 2.0 * shape.rx,
            rng.random_range(-1.0..=1.0) * 2.0 * shape.ry,
        );
        let ghost = shape.render(w, h, cx + ox, cy + oy);
        let mos = corrupt(&mut rng, &gt, &ghost, mos_corruption);
        let sos = corrupt(&mut rng, &gt, &blob_mask, sos_corruption);

        frames.push(SynthFrame {
            id: format!("{t:05}"),
            gt,
            sos,
            mos,
            flow,
            flow_level,
            mos_corruption,
            sos_corruption,
        });
        (cx, vx, cy, vy) = (nx, nvx, ny, nvy);
    }
    SynthSequence {
        id: format!("seq{index:03}"),
        regime,
        shape: kind,
        frames,
    }
}

/// Generates the whole dataset in memory. Identical scenarios give
/// identical datasets.
pub fn synth_scenario(scenario: &SynthScenario) -> Result<SynthDataset> {
    scenario.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(scenario.seed);
    let seeds: Vec<u64> = (0..scenario.sequences).map(|_| master.random()).collect();
    let sequences = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| sequence(scenario, i, s))
        .collect();
    Ok(SynthDataset {
        scenario: *scenario,
        sequences,
    })
}

#[derive(Serialize)]
struct FrameMeta<'a> {
    id: &'a str,
    flow_level: f64,
    mos_corruption: f64,
    sos_corruption: f64,
}

#[derive(Serialize)]
struct SequenceMeta<'a> {
    id: &'a str,
    regime: FlowRegime,
    shape: ShapeKind,
    frames: Vec<FrameMeta<'a>>,
}

#[derive(Serialize)]
struct DatasetMeta<'a> {
    scenario: &'a SynthScenario,
    sequences: Vec<SequenceMeta<'a>>,
}

/// Writes `root/{gt,sos,mos,flow}/<sequence>/<frame>.{png,flo}` plus a
/// `scenario.json` with the generating parameters and per-frame levels.
pub fn write_dataset(dataset: &SynthDataset, root: &Path) -> Result<()> {
    let jobs: Vec<(&SynthSequence, &SynthFrame)> = dataset
        .sequences
        .iter()
        .flat_map(|s| s.frames.iter().map(move |f| (s, f)))
        .collect();
    jobs.par_iter().try_for_each(|(s, f)| -> Result<()> {
        let file = |dir: &str, ext: &str| root.join(dir).join(&s.id).join(format!("{}.{ext}", f.id));
        write_mask(file("gt", "png"), &f.gt)?;
        write_prob_map(file("sos", "png"), &f.sos)?;
        write_prob_map(file("mos", "png"), &f.mos)?;
        write_flo_file(file("flow", "flo"), &f.flow)
    })?;
    let meta = DatasetMeta {
        scenario: &dataset.scenario,
        sequences: dataset
            .sequences
            .iter()
            .map(|s| SequenceMeta {
                id: &s.id,
                regime: s.regime,
                shape: s.shape,
                frames: s
                    .frames
                    .iter()
                    .map(|f| FrameMeta {
                        id: &f.id,
                        flow_level: f.flow_level,
                        mos_corruption: f.mos_corruption,
                        sos_corruption: f.sos_corruption,
                    })
                    .collect(),
            })
            .collect(),
    };
    let path = root.join("scenario.json");
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| Error::io(&path, e))
}
