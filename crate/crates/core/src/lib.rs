//! Evaluation and fusion toolkit for zero-shot video object segmentation
//! with a static (appearance) predictor and a moving-object (flow-assisted)
//! predictor.
//!
//! * [`media`]: masks, probability maps, `.flo` optical flow and its color
//!   rendering.
//! * [`metrics`]: J, boundary F, MAE, S-measure and max E-measure.
//! * [`fusion`]: metric-majority labels, BCE supervision, soft fusion of the
//!   two predictors and the selection baselines.
//! * [`kernels`]: forward reference versions of the multi-source attention
//!   modules plus the static predictor's supervision losses.
//! * [`harness`]: dataset evaluation, fused-map export, synthetic scenarios
//!   and comparison tables; driven by the `vosfuse` binary.
//!
//! The `book/` directory next to the workspace explains each piece with
//! runnable snippets; every snippet is compiled and run as a doctest.

pub mod error;
pub mod fusion;
pub mod harness;
pub mod kernels;
pub mod media;
pub mod metrics;

pub use error::{Error, Result};
pub use media::{BinaryMask, FlowField, ProbMap, RgbImage};
pub use metrics::{MetricConfig, MetricId, MetricScores};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/media.md")]
    mod media {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
