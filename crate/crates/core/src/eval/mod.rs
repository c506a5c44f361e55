//! Density estimates, divergences and model-vs-truth reports.

mod compare;
mod density;
mod stats;

pub use compare::{
    compare_model, ConditionReport, EvalConfig, MarginalReport, MomentSummary, Report,
    ReportDensities,
};
pub use density::{
    histogram, js_divergence, kl_divergence, marginal_density, DensityEstimate, KL_FLOOR,
};
pub use stats::{
    conditional_moments, conditional_moments_for, mean_and_covariance, mean_marginal_w1,
    polar_spread, skewness, wasserstein1_1d, ConditionGroup, ConditionalMoments, PolarSpread,
};
