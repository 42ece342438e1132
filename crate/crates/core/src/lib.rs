//! Desk-scale toolkit for knowledge-driven meta-learning of MIMO CSI
//! eigenvector feedback.
//!
//! The crate covers the full pipeline:
//!
//! * [`cmatrix`] / [`rng`] / [`csi`] - complex matrix primitives,
//!   deterministic hierarchical random streams, and the SGCS metric.
//! * [`basis`] - orthogonal spatial/frequency basis groups (DFT grid with
//!   oversampling, SVD-based, Gram-Schmidt-based).
//! * [`metaenv`] - synthetic meta-task environment: randomized task/UE/slot
//!   structures over basis subsets producing CSI samples.
//! * [`channel`] - parametric multipath time-domain channels and the
//!   frequency-domain / subband eigenvector extraction pipeline.
//! * [`augment`] - per-delay power and Kronecker spatial covariance profiles
//!   estimated from seeded channels, and statistically consistent synthetic
//!   channel draws from them.
//! * [`autoencoder`] - compact dense autoencoder with a quantized bottleneck,
//!   SGCS loss, and exact hand-derived gradients.
//! * [`metatrain`] - Reptile meta-training over the task environment and
//!   target-scenario retraining with best-so-far SGCS curves.
//! * [`dataio`] - binary dataset/profile/checkpoint serialization.

pub mod augment;
pub mod autoencoder;
pub mod basis;
pub mod channel;
pub mod cmatrix;
pub mod csi;
pub mod dataio;
pub mod error;
pub mod metaenv;
pub mod metatrain;
pub mod rng;

pub use cmatrix::{C64, CMatrix};
pub use csi::{sgcs, sgcs_raw, CsiMatrix};
pub use error::{Error, Result};
pub use rng::{complex_gaussian, RngStream};
