//! Supervision losses of the static predictor with hand-derived gradients.
//!
//! The depth stream is trained with L1 plus SSIM, the saliency stream with a
//! boundary-weighted BCE plus a boundary-weighted soft IoU.

use crate::error::{check_dims, Error, Result};
use crate::media::{BinaryMask, ProbMap};

pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
pub const DEFAULT_SSIM_WINDOW: usize = 7;

/// Side of the box used for the local target mean in the structure weights.
pub const STRUCTURE_WINDOW: usize = 31;
/// Weight `1 + STRUCTURE_GAIN * |local_mean - target|`.
pub const STRUCTURE_GAIN: f64 = 5.0;
/// Predictions are clamped into `[PROB_EPS, 1 - PROB_EPS]` for the log terms.
pub const PROB_EPS: f64 = 1e-7;

pub fn l1_loss(pred: &ProbMap, target: &ProbMap) -> Result<f64> {
    pred.same_dims(target)?;
    let sum: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

struct Window {
    mx: f64,
    my: f64,
    vx: f64,
    vy: f64,
    cxy: f64,
}

fn window_stats(x: &[f64], y: &[f64], stride: usize, x0: usize, y0: usize, win: usize) -> Window {
    let n = (win * win) as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in y0..y0 + win {
        for c in x0..x0 + win {
            let (a, b) = (x[r * stride + c], y[r * stride + c]);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
    }
    let (mx, my) = (sx / n, sy / n);
    Window {
        mx,
        my,
        vx: sxx / n - mx * mx,
        vy: syy / n - my * my,
        cxy: sxy / n - mx * my,
    }
}

fn check_window(pred: &ProbMap, window: usize) -> Result<()> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Shape(format!("SSIM window {window} must be odd")));
    }
    if window > pred.width() || window > pred.height() {
        return Err(Error::Shape(format!(
            "SSIM window {window} larger than {}x{} image",
            pred.width(),
            pred.height()
        )));
    }
    Ok(())
}

/// `1 - mean SSIM` over every fully contained `window x window` box with
/// uniform weights. Lies in `[0, 2]`.
pub fn ssim_loss(pred: &ProbMap, target: &ProbMap, window: usize, c1: f64, c2: f64) -> Result<f64> {
    Ok(ssim_loss_and_grad(pred, target, window, c1, c2)?.0)
}

/// The loss together with its gradient with respect to each `pred` pixel.
pub fn ssim_loss_and_grad(
    pred: &ProbMap,
    target: &ProbMap,
    window: usize,
    c1: f64,
    c2: f64,
) -> Result<(f64, Vec<f64>)> {
    pred.same_dims(target)?;
    check_window(pred, window)?;
    let (w, h) = (pred.width(), pred.height());
    let (x, y) = (pred.data(), target.data());
    let n = (window * window) as f64;
    let positions = ((w - window + 1) * (h - window + 1)) as f64;
    let mut grad = vec![0.0; w * h];
    let mut total = 0.0;
    for y0 in 0..=h - window {
        for x0 in 0..=w - window {
            let s = window_stats(x, y, w, x0, y0, window);
            let a = 2.0 * s.mx * s.my + c1;
            let b = 2.0 * s.cxy + c2;
            let c = s.mx * s.mx + s.my * s.my + c1;
            let d = s.vx + s.vy + c2;
            let ssim = a * b / (c * d);
            total += ssim;
            // partials of ssim w.r.t. the window statistics
            let d_mx = ssim * (2.0 * s.my / a - 2.0 * s.mx / c);
            let d_cxy = ssim * 2.0 / b;
            let d_vx = -ssim / d;
            for r in y0..y0 + window {
                for col in x0..x0 + window {
                    let i = r * w + col;
                    grad[i] -= (d_mx + d_cxy * (y[i] - s.my) + d_vx * 2.0 * (x[i] - s.mx)) / (n * positions);
                }
            }
        }
    }
    Ok((1.0 - total / positions, grad))
}

/// `1 + 5 * |box_mean(target) - target|` with a 31x31 box whose zero
/// padding counts towards the mean.
pub fn structure_weights(target: &BinaryMask) -> Vec<f64> {
    let (w, h) = (target.width(), target.height());
    let r = (STRUCTURE_WINDOW / 2) as isize;
    let area = (STRUCTURE_WINDOW * STRUCTURE_WINDOW) as f64;
    // summed-area table with a zero border row/column
    let mut sat = vec![0.0; (w + 1) * (h + 1)];
    for yy in 0..h {
        for xx in 0..w {
            let v = target.get(xx, yy) as u8 as f64;
            sat[(yy + 1) * (w + 1) + xx + 1] =
                v + sat[yy * (w + 1) + xx + 1] + sat[(yy + 1) * (w + 1) + xx] - sat[yy * (w + 1) + xx];
        }
    }
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize) as usize;
    let mut out = Vec::with_capacity(w * h);
    for yy in 0..h as isize {
        for xx in 0..w as isize {
            let (ya, yb) = (clamp(yy - r, h), clamp(yy + r + 1, h));
            let (xa, xb) = (clamp(xx - r, w), clamp(xx + r + 1, w));
            let sum = sat[yb * (w + 1) + xb] - sat[ya * (w + 1) + xb] - sat[yb * (w + 1) + xa] + sat[ya * (w + 1) + xa];
            let t = target.get(xx as usize, yy as usize) as u8 as f64;
            out.push(1.0 + STRUCTURE_GAIN * (sum / area - t).abs());
        }
    }
    out
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Weighted BCE mean plus weighted soft-IoU loss:
/// `sum(w * bce) / sum(w) + 1 - (I + 1) / (U - I + 1)` where
/// `I = sum(w * p * g)` and `U = sum(w * (p + g))`.
pub fn weighted_bce_iou_loss(pred: &ProbMap, target: &BinaryMask) -> Result<f64> {
    Ok(weighted_bce_iou_loss_and_grad(pred, target)?.0)
}

/// The loss with its gradient w.r.t. each `pred` pixel; zero where the
/// clamp is active.
pub fn weighted_bce_iou_loss_and_grad(pred: &ProbMap, target: &BinaryMask) -> Result<(f64, Vec<f64>)> {
    check_dims(pred.width(), pred.height(), target.width(), target.height())?;
    let weights = structure_weights(target);
    let wsum: f64 = weights.iter().sum();
    let (mut bce, mut inter, mut union) = (0.0, 0.0, 0.0);
    for ((&p, &g), &w) in pred.data().iter().zip(target.data()).zip(&weights) {
        let p = clamp_prob(p);
        let g = g as u8 as f64;
        bce += w * -(g * p.ln() + (1.0 - g) * (1.0 - p).ln());
        inter += w * p * g;
        union += w * (p + g);
    }
    let denom = union - inter + 1.0;
    let iou = 1.0 - (inter + 1.0) / denom;
    let loss = bce / wsum + iou;

    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .zip(&weights)
        .map(|((&raw, &g), &w)| {
            if raw <= PROB_EPS || raw >= 1.0 - PROB_EPS {
                return 0.0;
            }
            let p = raw;
            let g = g as u8 as f64;
            let d_bce = w * (-g / p + (1.0 - g) / (1.0 - p)) / wsum;
            let d_inter = w * g;
            let d_union = w;
            let d_iou = -(d_inter * denom - (inter + 1.0) * (d_union - d_inter)) / (denom * denom);
            d_bce + d_iou
        })
        .collect();
    Ok((loss, grad))
}
