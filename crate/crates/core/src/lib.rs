//! Bag-and-whisker plots for bivariate data.
//!
//! The pipeline: halfspace depth and the depth median, the central bag,
//! a reweighted MCD scatter, per-point χ²₂ tests with a multiple-testing
//! threshold, and a fence obtained by inflating the bag by
//! λ = max(λ_stat, λ_data, 1). Points strictly outside the fence are
//! outliers. [`pipeline::fit`] runs everything; [`render`] draws it.

pub mod bag;
pub mod cli;
pub mod dataset;
pub mod depth;
pub mod error;
pub mod fence;
pub mod geometry;
pub mod inference;
pub mod matrix;
pub mod pipeline;
pub mod render;
pub mod robust_scatter;
pub mod sim;

pub use dataset::{Dataset, Point2};
pub use error::Error;
pub use fence::{BagplotModel, Classification, ClassicModel};
pub use inference::ErrorControl;
pub use pipeline::{fit, fit_classic, FitConfig, Prepared};
