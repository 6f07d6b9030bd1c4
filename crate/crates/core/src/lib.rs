//! Band selection for hyperspectral cubes driven by plug-in information
//! measures.
//!
//! The pipeline is: load a cube and its ground truth ([`cube_io`]), quantize
//! every band over the labeled pixels into a [`BandTable`], rank bands with
//! one of the greedy selectors ([`selectors`]), then score the chosen subset
//! with a stratified KNN evaluation ([`classify`]). [`synth`] builds scenes
//! with planted relevant, redundant and synergic bands for testing, and
//! [`experiment`] strings the pieces together the way the CLI does.
//!
//! Candidate scoring and KNN prediction run on rayon when the `parallel`
//! feature is enabled (the default). Every reduction is ordered by
//! `(score, index)`, so results do not depend on the thread count.

pub mod classify;
pub mod cube_io;
mod error;
pub mod exec;
pub mod experiment;
pub mod infotheory;
pub mod selectors;
pub mod synth;

pub use classify::{ConfusionMatrix, MetricsReport, SplitPlan};
pub use cube_io::{DiscreteVariable, GroundTruthMap, HyperCube, QuantizerConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use infotheory::Bits;
pub use selectors::{BandTable, Method, SelectionResult, SelectorConfig};
