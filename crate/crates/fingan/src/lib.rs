//! RSS fingerprint synthesis toolkit.
//!
//! The crate simulates received-signal-strength fingerprints over an indoor
//! training grid, trains a mutual-information-maximizing GAN that generates
//! fingerprints conditioned on 2-D reference points (including points never
//! measured), and evaluates the synthetic data with RSS error, Fréchet
//! Distance, and DNN/CNN/KNN localization benchmarks.
//!
//! Modules:
//! - [`signal`]: log-distance path-loss simulator, datasets, CSV I/O, RP splits
//! - [`ndnn`]: minimal deterministic neural-network engine (dense, conv1d,
//!   batch norm, Adam, finite-difference gradient checking)
//! - [`gan`]: generator/discriminator/AuxNet assembly, losses, training,
//!   conditional generation
//! - [`eval`]: per-RP statistics, Fréchet Distance, localizers, benchmarks
//!
//! All randomness is derived from a single root seed via [`rng::stream`], so
//! every pipeline is a pure function of its inputs and seeds.

pub mod eval;
pub mod gan;
pub mod linalg;
pub mod ndnn;
pub mod rng;
pub mod signal;

pub use signal::{EnvironmentSpec, FingerprintDataset, GridSpec, Point2, RssSample, Split};
