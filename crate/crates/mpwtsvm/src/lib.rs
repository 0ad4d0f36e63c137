//! Multi-view privileged weighted twin support vector machine (MPWTSVM).
//!
//! A binary classifier for datasets whose samples are described by two
//! feature views. Training fits four nonparallel hyperplanes — one pair per
//! view — from two quadratic programs. Each program keeps one class close to
//! its hyperplane (weighted by intra-class neighborhood degrees), pushes
//! boundary samples of the other class away (selected by an inter-class
//! neighbor indicator), and couples the views through a product of their
//! slack vectors plus cross-view slack bounds, so each view acts as
//! privileged information for the other. Prediction assigns the class whose
//! hyperplane is nearer, per view or averaged across views.
//!
//! The crate is organized as a library; the `examples/` directory is the
//! front door and has one runnable program per capability:
//!
//! * `train_and_predict` — fit on a linearly separable two-view toy and
//!   compare the per-view and combined decision rules
//!   (`cargo run --example train_and_predict`)
//! * `kernel_xor` — RBF-kernel fit on a classic XOR layout that defeats
//!   linear separation (`cargo run --example kernel_xor`)
//! * `csv_pipeline` — load view/label CSV files, scale, train, save the
//!   model, reload it, and predict (`cargo run --example csv_pipeline`)
//! * `cross_validation` — seeded stratified k-fold accuracy estimates
//!   (`cargo run --example cross_validation`)
//! * `grid_search` — hyperparameter selection over a parameter grid
//!   (`cargo run --example grid_search`)
//! * `baseline_comparison` — side-by-side with the single-view weighted
//!   linear-loss twin SVM baseline (`cargo run --example baseline_comparison`)
//! * `rank_statistics` — Friedman test and Nemenyi critical difference over
//!   an accuracy table (`cargo run --example rank_statistics`)
//! * `qp_certificate` — inspect the assembled dual and its KKT residual
//!   certificate (`cargo run --example qp_certificate`)
//! * `multiclass_pairs` — one-vs-one reduction of a multiclass problem
//!   (`cargo run --example multiclass_pairs`)
//!
//! A thin `mpwtsvm` binary wraps the same functionality as subcommands
//! (`scale`, `train`, `predict`, `cv`, `grid`, `bench`, `stats`) for use
//! from shell pipelines; see the README for the flag reference.
//!
//! # Quick start
//!
//! ```
//! use mpwtsvm::{model::{Hyperparameters, MpwtsvmModel}, synthetic};
//!
//! // Two Gaussian blobs per view, 40 samples, seeded.
//! let ds = synthetic::two_view_blobs(40, 4.0, 0.3, 7);
//! let model = MpwtsvmModel::fit(&ds, &Hyperparameters::default()).unwrap();
//! let acc = mpwtsvm::eval::accuracy(
//!     &model.predict_combined_many(&ds.view_a, &ds.view_b).unwrap(),
//!     &ds.labels,
//! ).unwrap();
//! assert!(acc == 1.0);
//! ```

pub mod baseline;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod graphs;
pub mod kernels;
pub mod model;
pub mod qp;
pub mod synthetic;

pub use error::{Error, Result};

/// Schema version written into model files and run manifests.
pub const SCHEMA_VERSION: u32 = 1;
