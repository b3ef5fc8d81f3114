//! A laboratory for the fixed points of Lloyd's k-means on high-dimensional
//! Gaussian mixtures.
//!
//! The crate generates data from a two-level Gaussian model, runs Lloyd's
//! algorithm with several initialisations, evaluates closed-form bounds on the
//! probability that a sample is reassigned, and runs seeded, parallel Monte
//! Carlo experiments that compare those bounds with simulation.
//!
//! ```
//! use kmfix_core::{bounds, ClusterSizes};
//!
//! let rho = bounds::rho_general(5.0, 1.0, ClusterSizes::equal(20).unwrap());
//! assert!(rho.valid);
//! // probability that a fixed sample leaves its cluster in d = 4096
//! assert!(rho.pow_quarter_d(4096.0) < 0.84);
//! ```

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod gmm;
pub mod linalg;
pub mod lloyd;
pub mod metrics;
pub mod params;
pub mod reduce;
pub mod report;
pub mod rng;

pub use bounds::{BoundValue, ClusterSizes};
pub use error::{Error, Result};
pub use gmm::{Centers, Dataset, LabelMode, MaskSet};
pub use linalg::Matrix;
pub use lloyd::{Assignment, Centroids, Init, InitStrategy, KMeansResult};
pub use metrics::ProportionEstimate;
pub use params::ModelParams;
pub use reduce::PcaModel;
pub use report::{RunManifest, Table};
pub use rng::RngStream;
