//! The five segmentation quality measures: region similarity J, boundary
//! accuracy F, mean absolute error, S-measure and maximum E-measure.
//!
//! J and F operate on binary masks. MAE, S and E take the soft prediction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{binarize, BinaryMask, ProbMap, DEFAULT_BINARIZE_THRESHOLD};

/// Default S-measure balance between object and region terms.
pub const DEFAULT_S_ALPHA: f64 = 0.5;

/// Number of thresholds swept by the max E-measure (`k / 255`).
pub const E_MEASURE_THRESHOLDS: usize = 256;

/// Scores of one prediction against one ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub j: f64,
    pub f: f64,
    pub mae: f64,
    pub s: f64,
    pub e: f64,
}

impl MetricScores {
    pub fn get(&self, metric: MetricId) -> f64 {
        match metric {
            MetricId::J => self.j,
            MetricId::F => self.f,
            MetricId::Mae => self.mae,
            MetricId::S => self.s,
            MetricId::E => self.e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    J,
    F,
    Mae,
    S,
    E,
}

impl MetricId {
    pub const ALL: [MetricId; 5] = [MetricId::J, MetricId::F, MetricId::Mae, MetricId::S, MetricId::E];

    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricId::Mae)
    }

    /// True when `candidate` scores strictly better than `reference`.
    pub fn strictly_better(self, candidate: f64, reference: f64) -> bool {
        if self.higher_is_better() {
            candidate > reference
        } else {
            candidate < reference
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricId::J => "j",
            MetricId::F => "f",
            MetricId::Mae => "mae",
            MetricId::S => "s",
            MetricId::E => "e",
        }
    }
}

impl std::str::FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j" => Ok(MetricId::J),
            "f" => Ok(MetricId::F),
            "mae" | "m" => Ok(MetricId::Mae),
            "s" => Ok(MetricId::S),
            "e" => Ok(MetricId::E),
            other => Err(Error::OutOfRange(format!("unknown metric {other:?}"))),
        }
    }
}

/// Knobs shared by every metric evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub binarize_threshold: f64,
    /// `None` picks [`default_boundary_tolerance`] per image.
    pub boundary_tolerance: Option<f64>,
    pub s_alpha: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            binarize_threshold: DEFAULT_BINARIZE_THRESHOLD,
            boundary_tolerance: None,
            s_alpha: DEFAULT_S_ALPHA,
        }
    }
}

impl MetricConfig {
    pub fn tolerance_for(&self, width: usize, height: usize) -> f64 {
        self.boundary_tolerance
            .unwrap_or_else(|| default_boundary_tolerance(width, height))
    }
}

/// `max(1, round(0.008 * diagonal))`.
pub fn default_boundary_tolerance(width: usize, height: usize) -> f64 {
    let diag = (width as f64).hypot(height as f64);
    (0.008 * diag).round().max(1.0)
}

/// Intersection over union. Two empty masks score 1.
pub fn region_similarity_j(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    pred.same_dims(gt)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += (p && g) as usize;
        union += (p || g) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Foreground pixels with at least one 4-neighbor in the background. The
/// image border counts as background.
pub fn boundary_map(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        x == 0
            || y == 0
            || x + 1 == w
            || y + 1 == h
            || !mask.get(x - 1, y)
            || !mask.get(x + 1, y)
            || !mask.get(x, y - 1)
            || !mask.get(x, y + 1)
    })
    .expect("same dimensions as input")
}

fn disk_offsets(radius: f64) -> Vec<(isize, isize)> {
    let r = radius.floor() as isize;
    let r2 = radius * radius;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64) <= r2 {
                offsets.push((dx, dy));
            }
        }
    }
    offsets
}

/// Fraction of `from` boundary pixels lying within `offsets` of a `to` pixel.
fn matched_fraction(from: &BinaryMask, to: &BinaryMask, offsets: &[(isize, isize)]) -> (usize, usize) {
    let (w, h) = (from.width() as isize, from.height() as isize);
    let mut total = 0;
    let mut hit = 0;
    for y in 0..h {
        for x in 0..w {
            if !from.get(x as usize, y as usize) {
                continue;
            }
            total += 1;
            let found = offsets.iter().any(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && to.get(nx as usize, ny as usize)
            });
            hit += found as usize;
        }
    }
    (hit, total)
}

/// Boundary F-measure with a Euclidean matching tolerance in pixels.
pub fn boundary_f(pred: &BinaryMask, gt: &BinaryMask, tolerance: f64) -> Result<f64> {
    pred.same_dims(gt)?;
    if !(tolerance >= 0.0) {
        return Err(Error::OutOfRange(format!("boundary tolerance {tolerance}")));
    }
    let pb = boundary_map(pred);
    let gb = boundary_map(gt);
    let offsets = disk_offsets(tolerance);
    let (p_hit, p_total) = matched_fraction(&pb, &gb, &offsets);
    let (r_hit, r_total) = matched_fraction(&gb, &pb, &offsets);
    if p_total == 0 && r_total == 0 {
        return Ok(1.0);
    }
    if p_total == 0 || r_total == 0 {
        return Ok(0.0);
    }
    let precision = p_hit as f64 / p_total as f64;
    let recall = r_hit as f64 / r_total as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn mae(pred: &ProbMap, gt: &BinaryMask) -> Result<f64> {
    pred.same_dims(gt)?;
    let sum: f64 = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| (p - if g { 1.0 } else { 0.0 }).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Structure measure: `alpha * S_object + (1 - alpha) * S_region`.
///
/// Single-class ground truth short-circuits to `1 - mean(pred)` (all
/// background) or `mean(pred)` (all foreground).
pub fn s_measure(pred: &ProbMap, gt: &BinaryMask, alpha: f64) -> Result<f64> {
    pred.same_dims(gt)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("S-measure alpha {alpha}")));
    }
    let q = if gt.count() == 0 {
        1.0 - pred.mean()
    } else if gt.count() == gt.len() {
        pred.mean()
    } else {
        alpha * s_object(pred, gt) + (1.0 - alpha) * s_region(pred, gt)
    };
    Ok(q.clamp(0.0, 1.0))
}

fn object_score(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    2.0 * mean / (mean * mean + 1.0 + std + f64::EPSILON)
}

fn s_object(pred: &ProbMap, gt: &BinaryMask) -> f64 {
    let mut fg = Vec::with_capacity(gt.count());
    let mut bg = Vec::with_capacity(gt.len() - gt.count());
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if g {
            fg.push(p);
        } else {
            bg.push(1.0 - p);
        }
    }
    let u = fg.len() as f64 / gt.len() as f64;
    u * object_score(&fg) + (1.0 - u) * object_score(&bg)
}

/// Centroid split point as column/row counts of the top-left block.
fn centroid_split(gt: &BinaryMask) -> (usize, usize) {
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut n = 0.0;
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            if gt.get(x, y) {
                sx += (x + 1) as f64;
                sy += (y + 1) as f64;
                n += 1.0;
            }
        }
    }
    if n == 0.0 {
        return (
            (gt.width() as f64 / 2.0).round() as usize,
            (gt.height() as f64 / 2.0).round() as usize,
        );
    }
    ((sx / n).round() as usize, (sy / n).round() as usize)
}

fn block_ssim(pred: &ProbMap, gt: &BinaryMask, xs: std::ops::Range<usize>, ys: std::ops::Range<usize>) -> f64 {
    let n = (xs.len() * ys.len()) as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for y in ys.clone() {
        for x in xs.clone() {
            mx += pred.get(x, y);
            my += gt.get(x, y) as u8 as f64;
        }
    }
    mx /= n;
    my /= n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for y in ys {
        for x in xs.clone() {
            let dx = pred.get(x, y) - mx;
            let dy = gt.get(x, y) as u8 as f64 - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    let denom = n - 1.0 + f64::EPSILON;
    let (vx, vy, cxy) = (vx / denom, vy / denom, cxy / denom);
    let a = 4.0 * mx * my * cxy;
    let b = (mx * mx + my * my) * (vx + vy);
    if a != 0.0 {
        a / (b + f64::EPSILON)
    } else if b == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn s_region(pred: &ProbMap, gt: &BinaryMask) -> f64 {
    let (w, h) = (gt.width(), gt.height());
    let (cx, cy) = centroid_split(gt);
    let area = (w * h) as f64;
    let blocks = [
        (0..cx, 0..cy),
        (cx..w, 0..cy),
        (0..cx, cy..h),
        (cx..w, cy..h),
    ];
    blocks
        .into_iter()
        .filter(|(xs, ys)| !xs.is_empty() && !ys.is_empty())
        .map(|(xs, ys)| {
            let weight = (xs.len() * ys.len()) as f64 / area;
            weight * block_ssim(pred, gt, xs, ys)
        })
        .sum()
}

/// Enhanced-alignment score at each of the 256 thresholds `k / 255`; a pixel
/// is foreground at threshold `t` when `pred >= t`.
pub fn e_measure_curve(pred: &ProbMap, gt: &BinaryMask) -> Result<Vec<f64>> {
    pred.same_dims(gt)?;
    let n = pred.len();
    let n_fg = gt.count();
    let mut fg_vals = Vec::with_capacity(n_fg);
    let mut bg_vals = Vec::with_capacity(n - n_fg);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if g {
            fg_vals.push(p);
        } else {
            bg_vals.push(p);
        }
    }
    fg_vals.sort_by(f64::total_cmp);
    bg_vals.sort_by(f64::total_cmp);
    let at_least = |vals: &[f64], t: f64| vals.len() - vals.partition_point(|&v| v < t);

    let nf = n as f64;
    let mu_gt = n_fg as f64 / nf;
    let curve = (0..E_MEASURE_THRESHOLDS)
        .map(|k| {
            let t = k as f64 / 255.0;
            let tp = at_least(&fg_vals, t);
            let fp = at_least(&bg_vals, t);
            let on = tp + fp;
            if n_fg == 0 {
                return (n - on) as f64 / nf;
            }
            if n_fg == n {
                return on as f64 / nf;
            }
            let mu_fm = on as f64 / nf;
            let enhanced = |f: f64, g: f64| {
                let af = f - mu_fm;
                let ag = g - mu_gt;
                // ag is never 0 here since the ground truth has both classes,
                // so no epsilon is needed and a perfect map scores exactly 1
                let align = 2.0 * ag * af / (ag * ag + af * af);
                (align + 1.0).powi(2) / 4.0
            };
            let fn_ = n_fg - tp;
            let tn = n - n_fg - fp;
            (tp as f64 * enhanced(1.0, 1.0)
                + fp as f64 * enhanced(1.0, 0.0)
                + fn_ as f64 * enhanced(0.0, 1.0)
                + tn as f64 * enhanced(0.0, 0.0))
                / nf
        })
        .collect();
    Ok(curve)
}

/// Maximum of [`e_measure_curve`]; ties resolve to the lowest threshold.
pub fn e_measure_max(pred: &ProbMap, gt: &BinaryMask) -> Result<f64> {
    let curve = e_measure_curve(pred, gt)?;
    let mut best = curve[0];
    for &v in &curve[1..] {
        if v > best {
            best = v;
        }
    }
    Ok(best.clamp(0.0, 1.0))
}

/// All five measures. J and F use `binarize(pred, binarize_threshold)`.
pub fn evaluate_all(
    pred: &ProbMap,
    gt: &BinaryMask,
    binarize_threshold: f64,
    boundary_tolerance: f64,
) -> Result<MetricScores> {
    pred.same_dims(gt)?;
    let bin = binarize(pred, binarize_threshold)?;
    Ok(MetricScores {
        j: region_similarity_j(&bin, gt)?,
        f: boundary_f(&bin, gt, boundary_tolerance)?,
        mae: mae(pred, gt)?,
        s: s_measure(pred, gt, DEFAULT_S_ALPHA)?,
        e: e_measure_max(pred, gt)?,
    })
}

/// [`evaluate_all`] driven by a [`MetricConfig`].
pub fn evaluate(pred: &ProbMap, gt: &BinaryMask, config: &MetricConfig) -> Result<MetricScores> {
    pred.same_dims(gt)?;
    let bin = binarize(pred, config.binarize_threshold)?;
    Ok(MetricScores {
        j: region_similarity_j(&bin, gt)?,
        f: boundary_f(&bin, gt, config.tolerance_for(gt.width(), gt.height()))?,
        mae: mae(pred, gt)?,
        s: s_measure(pred, gt, config.s_alpha)?,
        e: e_measure_max(pred, gt)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rows(w: usize, h: usize, fg: std::ops::Range<usize>) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, y| fg.contains(&y)).unwrap()
    }

    fn random_mask(rng: &mut impl Rng, w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| rng.random_bool(0.5)).unwrap()
    }

    fn random_map(rng: &mut impl Rng, w: usize, h: usize) -> ProbMap {
        ProbMap::from_fn(w, h, |_, _| rng.random::<f64>()).unwrap()
    }

    #[test]
    fn j_examples() {
        let a = rows(4, 4, 0..2);
        let b = rows(4, 4, 1..3);
        assert_eq!(region_similarity_j(&a, &a).unwrap(), 1.0);
        assert_eq!(region_similarity_j(&a, &b).unwrap(), 1.0 / 3.0);
        let e = BinaryMask::empty(4, 4).unwrap();
        assert_eq!(region_similarity_j(&e, &e).unwrap(), 1.0);
        assert_eq!(region_similarity_j(&e, &a).unwrap(), 0.0);
        assert!(region_similarity_j(&a, &rows(4, 5, 0..1)).is_err());
    }

    #[test]
    fn boundary_of_filled_square() {
        let m = BinaryMask::from_fn(5, 5, |x, y| (1..4).contains(&x) && (1..4).contains(&y)).unwrap();
        let b = boundary_map(&m);
        assert_eq!(b.count(), 8);
        assert!(!b.get(2, 2));
        // border pixels of a full image are boundary
        let full = BinaryMask::from_fn(3, 3, |_, _| true).unwrap();
        assert_eq!(boundary_map(&full).count(), 8);
    }

    #[test]
    fn f_examples() {
        let a = rows(6, 6, 1..4);
        assert_eq!(boundary_f(&a, &a, 1.0).unwrap(), 1.0);
        let p = BinaryMask::from_fn(8, 8, |x, y| x == 0 && y == 0).unwrap();
        let g = BinaryMask::from_fn(8, 8, |x, y| x == 7 && y == 7).unwrap();
        assert_eq!(boundary_f(&p, &g, 2.0).unwrap(), 0.0);
        let e = BinaryMask::empty(8, 8).unwrap();
        assert_eq!(boundary_f(&e, &e, 1.0).unwrap(), 1.0);
        assert_eq!(boundary_f(&e, &g, 1.0).unwrap(), 0.0);
        assert!(boundary_f(&p, &g, -1.0).is_err());
    }

    #[test]
    fn f_tolerance_counts_diagonal_neighbours() {
        let p = BinaryMask::from_fn(5, 5, |x, y| x == 1 && y == 1).unwrap();
        let g = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2).unwrap();
        assert_eq!(boundary_f(&p, &g, 1.0).unwrap(), 0.0);
        assert_eq!(boundary_f(&p, &g, 1.5).unwrap(), 1.0);
    }

    #[test]
    fn default_tolerance() {
        assert_eq!(default_boundary_tolerance(16, 16), 1.0);
        // DAVIS 854x480: diag 979.6 -> 7.84 -> 8
        assert_eq!(default_boundary_tolerance(854, 480), 8.0);
    }

    #[test]
    fn mae_examples() {
        let g = rows(4, 4, 0..2);
        assert_eq!(mae(&g.to_prob_map(), &g).unwrap(), 0.0);
        let bg = BinaryMask::empty(4, 4).unwrap();
        assert_eq!(mae(&ProbMap::constant(4, 4, 0.25).unwrap(), &bg).unwrap(), 0.25);
    }

    #[test]
    fn s_measure_degenerate_and_perfect() {
        let g = BinaryMask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (1..5).contains(&y)).unwrap();
        let s = s_measure(&g.to_prob_map(), &g, 0.5).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
        let bg = BinaryMask::empty(8, 8).unwrap();
        assert_eq!(s_measure(&ProbMap::constant(8, 8, 0.0).unwrap(), &bg, 0.5).unwrap(), 1.0);
        let s = s_measure(&ProbMap::constant(8, 8, 0.3).unwrap(), &bg, 0.5).unwrap();
        assert!((s - 0.7).abs() < 1e-12);
        let fg = bg.complement();
        let s = s_measure(&ProbMap::constant(8, 8, 0.3).unwrap(), &fg, 0.5).unwrap();
        assert!((s - 0.3).abs() < 1e-12);
        assert!(s_measure(&g.to_prob_map(), &g, 1.5).is_err());
    }

    #[test]
    fn centroid_split_is_one_based_rounding() {
        // columns 1-based 3..6 average 4.5 -> 5; rows 2..5 average 3.5 -> 4
        let g = BinaryMask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (1..5).contains(&y)).unwrap();
        assert_eq!(centroid_split(&g), (5, 4));
    }

    #[test]
    fn e_measure_perfect_and_complement() {
        let g = BinaryMask::from_fn(8, 8, |x, y| x < 3 || y == 7).unwrap();
        assert_eq!(e_measure_max(&g.to_prob_map(), &g).unwrap(), 1.0);
        let inv = g.complement().to_prob_map();
        let perfect = e_measure_curve(&g.to_prob_map(), &g).unwrap();
        let bad = e_measure_curve(&inv, &g).unwrap();
        for (b, p) in bad.iter().zip(&perfect) {
            assert!(b <= p);
        }
        assert!(e_measure_max(&inv, &g).unwrap() < 1.0);
    }

    #[test]
    fn evaluate_all_perfect() {
        let g = BinaryMask::from_fn(10, 10, |x, y| (x + y) % 7 < 3).unwrap();
        let s = evaluate_all(&g.to_prob_map(), &g, 0.5, 1.0).unwrap();
        assert_eq!((s.j, s.f, s.mae, s.e), (1.0, 1.0, 0.0, 1.0));
        assert!((s.s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_all_half_constant() {
        let g = rows(6, 6, 0..3);
        let s = evaluate_all(&ProbMap::constant(6, 6, 0.5).unwrap(), &g, 0.5, 1.0).unwrap();
        assert_eq!(s.j, 0.0);
        assert_eq!(s.mae, 0.5);
    }

    #[test]
    fn evaluate_all_matches_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_mask(&mut rng, 12, 9);
            let p = random_map(&mut rng, 12, 9);
            let s = evaluate_all(&p, &g, 0.5, 1.0).unwrap();
            let b = binarize(&p, 0.5).unwrap();
            assert_eq!(s.j, region_similarity_j(&b, &g).unwrap());
            assert_eq!(s.f, boundary_f(&b, &g, 1.0).unwrap());
            assert_eq!(s.mae, mae(&p, &g).unwrap());
            assert_eq!(s.s, s_measure(&p, &g, 0.5).unwrap());
            assert_eq!(s.e, e_measure_max(&p, &g).unwrap());
            let by_cfg = evaluate(&p, &g, &MetricConfig { boundary_tolerance: Some(1.0), ..Default::default() }).unwrap();
            assert_eq!(by_cfg, s);
        }
    }

    #[test]
    fn metric_ids_parse() {
        assert_eq!("MAE".parse::<MetricId>().unwrap(), MetricId::Mae);
        assert!("x".parse::<MetricId>().is_err());
        assert!(MetricId::Mae.strictly_better(0.1, 0.2));
        assert!(MetricId::J.strictly_better(0.3, 0.2));
    }

    proptest! {
        #[test]
        fn ranges_and_symmetry(seed in any::<u64>(), w in 1usize..10, h in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_mask(&mut rng, w, h);
            let b = random_mask(&mut rng, w, h);
            let p = random_map(&mut rng, w, h);
            prop_assert_eq!(region_similarity_j(&a, &b).unwrap(), region_similarity_j(&b, &a).unwrap());
            prop_assert_eq!(boundary_f(&a, &b, 1.0).unwrap(), boundary_f(&b, &a, 1.0).unwrap());
            let s = evaluate_all(&p, &b, 0.5, 1.0).unwrap();
            for v in [s.j, s.f, s.mae, s.s, s.e] {
                prop_assert!((0.0..=1.0).contains(&v), "{:?}", s);
            }
        }

        #[test]
        fn f_monotone_in_tolerance(seed in any::<u64>(), t1 in 0.0f64..4.0, t2 in 0.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_mask(&mut rng, 9, 9);
            let b = random_mask(&mut rng, 9, 9);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(boundary_f(&a, &b, lo).unwrap() <= boundary_f(&a, &b, hi).unwrap());
        }

        #[test]
        fn mae_complement_sums_to_one(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_mask(&mut rng, 7, 5);
            let p = random_map(&mut rng, 7, 5);
            let total = mae(&p, &g).unwrap() + mae(&p.complement(), &g).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn e_measure_permutation_invariant(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_mask(&mut rng, 6, 6);
            let p = random_map(&mut rng, 6, 6);
            let mut idx: Vec<usize> = (0..36).collect();
            idx.shuffle(&mut rng);
            let gp = BinaryMask::new(6, 6, idx.iter().map(|&i| g.data()[i]).collect()).unwrap();
            let pp = ProbMap::new(6, 6, idx.iter().map(|&i| p.data()[i]).collect()).unwrap();
            let a = e_measure_max(&p, &g).unwrap();
            let b = e_measure_max(&pp, &gp).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
