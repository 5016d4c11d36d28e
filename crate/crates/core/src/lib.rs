//! Supervised classification of multispectral rasters.
//!
//! Training regions become per-class [`ClassSignature`]s; a
//! [`DecisionRule`] (parallelepiped, Mahalanobis distance, maximum
//! likelihood or Euclidean distance) turns a raster into a [`ClassMap`];
//! assessment regions over that map give an [`ErrorMatrix`] and its
//! [`AccuracyReport`].

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accuracy;
pub mod classifiers;
pub mod classmap;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod raster;
pub mod region;
pub mod scene;
pub mod signature_file;
pub mod training;

pub use accuracy::{build_error_matrix, AccuracyReport, ErrorMatrix, OverallAccuracy};
pub use classifiers::{
    classify_pixel, classify_raster, classify_raster_with_threads, score_euclidean,
    score_mahalanobis, score_max_likelihood, score_parallelepiped, DecisionRule, RuleKind,
    TieBreak,
};
pub use classmap::{ClassMap, Legend, LegendEntry};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use raster::{FeatureVector, Raster, RasterHeader, SampleType};
pub use region::{ClassId, Purpose, Region};
pub use training::{
    build_signature, compute_bounds, compute_covariance, compute_mean, regularize_and_invert,
    BoundMode, ClassSignature, SignatureOptions, SignatureSet, TrainingSet,
};
