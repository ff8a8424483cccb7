//! Error-bounded lossy compression and ML dataset tooling for 3-D
//! structured-grid scientific fields.
//!
//! The crate is organised around a handful of modules:
//!
//! * [`fields`]: grid containers, raw binary I/O, finite-difference gradients,
//!   min-max scaling and summary statistics.
//! * [`codec`]: compressor with absolute and point-wise relative error bounds
//!   built from a Lorenzo predictor, per-block plane regression, residual
//!   quantization and canonical Huffman coding.
//! * [`quality`]: compression ratio, PSNR, SSIM and bundled reports.
//! * [`labeler`]: five-class combustion regime labels from species and
//!   mixture-fraction fields.
//! * [`dataset`]: tiling, splitting, augmentation and reproducible manifests.
//! * [`sweep`]: bound sweeps emitting CSV rows.
//! * [`cli`]: the `lossyfield` command-line tool.
//!
//! Runnable walkthroughs for each capability live under `examples/`.

pub mod cli;
pub mod codec;
pub mod dataset;
mod error;
pub mod fields;
pub mod labeler;
pub mod quality;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result, Section};
pub use fields::{Axis, Dims, Field3D};
