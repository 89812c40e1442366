//! Certified L0 robustness for graph classifiers via randomized
//! edge-flip smoothing.
//!
//! The crate turns any classifier over binary adjacency structure into a
//! smoothed classifier with a provable robustness radius against edge
//! addition/deletion attacks:
//!
//! - [`bitgraph`]: graph <-> bit-vector encodings and XOR perturbations;
//! - [`noise`]: the Bernoulli flip channel and its privacy parameter;
//! - [`stats`]: exact Clopper-Pearson bounds and the binomial selection test;
//! - [`npcert`]: the tight likelihood-ratio (Neyman-Pearson) certificate,
//!   with exhaustive-enumeration oracles that validate it;
//! - [`dpcert`]: the closed-form per-bit likelihood-ratio certificate;
//! - [`gcn`]: a small graph convolutional base classifier;
//! - [`datagen`]: synthetic topology datasets and a stochastic block model;
//! - [`pipeline`]: Monte Carlo prediction, certification, and sweeps.

pub mod bitgraph;
pub mod classifier;
pub mod datagen;
pub mod dpcert;
pub mod error;
pub mod gcn;
pub mod noise;
pub mod npcert;
pub mod numerics;
pub mod pipeline;
pub mod stats;

pub use error::{Error, Result};
