//! Learning real-valued functions of probability distributions.
//!
//! A distribution `µ` is summarised by a finite feature vector (quantiles,
//! moments, superquantiles or a mixture of these) estimated from samples,
//! and a small feed-forward network maps the features to `V(µ)`.
//!
//! Modules, bottom-up:
//!
//! - [`distgen`]: random bin distributions on a rectangle and sampling from them.
//! - [`features`]: empirical feature extractors for every scheme.
//! - [`targets`]: closed-form (or Monte-Carlo) ground-truth functionals.
//! - [`nn`]: dense networks, the mean-pooled cylinder baseline, backprop and ADAM.
//! - [`trainer`]: the stochastic training and evaluation protocol.
//! - [`theory`]: quantile step-density reconstruction and exact 1-D W1 distances.
//! - [`experiment`]: spec files, presets, CSV/SVG artifacts and the verify suite.

pub mod distgen;
pub mod error;
pub mod experiment;
pub mod features;
pub mod nn;
pub mod rng;
pub mod targets;
pub mod theory;
pub mod trainer;

pub use distgen::{BinDistribution, BinGrid, Interval, SampleBatch};
pub use error::{Error, Result};
pub use features::{FeatureScheme, FeatureVector, MultiIndexSet};
pub use nn::{Activation, AdamState, CylinderNet, Mlp, Model};
pub use rng::StreamKey;
pub use targets::{BiCase, LabelPolicy, TestCase, UniCase};
pub use theory::StepDensity1D;
pub use trainer::{ExperimentResult, TrainConfig};
