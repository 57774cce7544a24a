//! Functional connectivity between regions of interest (ROIs) described by
//! many voxel time series.
//!
//! Each subject's ROIs are turned into a symmetric connectivity matrix using
//! one of several measures: Pearson correlation of a representative series,
//! distance correlation over all voxels, or the Wasserstein distance between
//! the voxel-series point clouds. The matrices feed a penalized logistic
//! regression with a repeated grid-search protocol and group-level
//! comparisons between measures.
//!
//! ```
//! use mvconn::engine::{compute_connectivity, MeasureConfig};
//! use mvconn::io::{synth_scans, GeneratorSpec};
//! use mvconn::model::Measure;
//!
//! let spec = GeneratorSpec { subjects_per_class: 1, n_rois: 3, ..Default::default() };
//! let scans = synth_scans(&spec, 0).unwrap();
//! let c = compute_connectivity(&scans[0], &MeasureConfig::new(Measure::PearsonMean)).unwrap();
//! assert_eq!(c.get(0, 0), 1.0);
//! ```
//!
//! The [`guide`] module carries the user guide from `book/`.

pub mod analysis;
pub mod classify;
pub mod dependence;
pub mod engine;
pub mod error;
pub mod io;
pub mod model;
pub mod ot;
mod seed;

pub use error::{Error, Result};

/// Chapters of the user guide. Their examples run as doc-tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/data_model.md")]
    pub mod data_model {}
    #[doc = include_str!("../../../book/src/transport.md")]
    pub mod transport {}
    #[doc = include_str!("../../../book/src/dependence.md")]
    pub mod dependence {}
    #[doc = include_str!("../../../book/src/engine.md")]
    pub mod engine {}
    #[doc = include_str!("../../../book/src/classification.md")]
    pub mod classification {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}
    #[doc = include_str!("../../../book/src/files.md")]
    pub mod files {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
