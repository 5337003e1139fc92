//! Minimal dense tensor core, the moving object predictor's fusion blocks
//! and the static predictor's supervision losses.
//!
//! No autodiff: the loss gradients are derived by hand and checked against
//! finite differences in the tests.

pub mod attention;
pub mod losses;
pub mod params;
pub mod tensor;

pub use attention::{
    channel_attention, feature_purify, feature_purify_branches, forward_level,
    interoceptive_attention, motion_enhance, pyramid_pool, pyramid_pool_levels,
    spatial_attention, AttentionMap, Dense, IsamOutput, IsamParams, LevelConfig, LevelParams,
    MemParams, MlpParams, MotionEnhanced, MotionParams, PoolScale, Purified,
};
pub use losses::{
    l1_loss, ssim_loss, ssim_loss_and_grad, structure_weights, weighted_bce_iou_loss,
    weighted_bce_iou_loss_and_grad,
};
pub use params::ParamStore;
pub use tensor::{adaptive_avg_pool, bilinear_upsample, concat, conv2d, sigmoid, ConvParams, FeatureMap};
