//! # cxrpipe
//!
//! Desk-scale experiment pipeline for studying how image pre-processing
//! affects multi-label radiograph classification.
//!
//! The crate is organised the way an experiment flows:
//!
//! - [`imaging`]: the [`Image`](imaging::Image) raster type, geometric and
//!   photometric operators, PGM I/O, connected components, the lung-field
//!   bounding box rule and the two pre-processing operators (lung-field
//!   segmentation and band-attenuating bone suppression).
//! - [`dataset`]: the eight-finding taxonomy, label tables, seeded
//!   resampling split plans and the four pre-processed image variants.
//! - [`augment`]: training-time random patch / flip / rotation and the
//!   deterministic five-crop test transform.
//! - [`model`]: a small convolutional classifier with a sigmoid head,
//!   binary cross-entropy, analytic gradients, ADAM and the training loop.
//! - [`eval`]: ROC curves, AUC, per-split aggregation, Pearson correlation
//!   matrices and averaging ensembles.
//! - [`pipeline`]: configuration, the `preprocess` / `run` / `report`
//!   commands, caching and report rendering.
//! - [`synthetic`]: generators for the synthetic chest corpus and the
//!   prevalence-matched label fixture.
//!
//! Runnable walkthroughs for each capability live in `examples/`:
//!
//! ```bash
//! cargo run --release --example lung_crop
//! ```

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
