//! Reconstruction of Fourier-sparse signals from few noisy samples.
//!
//! The pipeline has three stages: an oblivious sketch that preserves the
//! energy of every signal in a family, a distillation step that thins the
//! sketch to linearly many weighted points with a randomized barrier walk
//! (RandBSS+), and a weighted least-squares fit on the candidate frequencies.
//!
//! - [`signal`], [`norm`], [`dft`], [`oracle`], [`rng`]: shared types.
//! - [`qsample`]: quadratic-form sampling trees.
//! - [`wbsp`]: orthonormalization and the barrier walk.
//! - [`sketch`]: oblivious sketches and distillation.
//! - [`lattice`]: candidate expansion and grid snapping.
//! - [`estimate`]: regression-based recovery algorithms.

pub mod dft;
pub mod error;
pub mod estimate;
pub mod lattice;
pub mod norm;
pub mod oracle;
pub mod qsample;
pub mod rng;
pub mod sample_set;
pub mod signal;
pub mod sketch;
pub mod wbsp;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use sample_set::{Provenance, WeightedSampleSet};
pub use signal::{DiscreteSignal, FourierSparseSignal, SignalFn, Tone, C64};
