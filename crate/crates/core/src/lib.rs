//! Non-adaptive group testing: measurement graphs, constructions, outcome
//! simulation, decoders and exact property certifiers.
//!
//! A design is a bipartite [`MeasurementGraph`] between items (left) and
//! pools (right). [`simulate`] turns a sparse defective set into outcomes
//! under the classical (OR) or threshold model, with optional noise.
//! [`decode`] recovers the set, and [`verify`] certifies the combinatorial
//! properties that make decoding work, returning concrete witnesses when
//! they fail.

pub mod constructions;
pub mod decode;
pub mod error;
pub mod field;
pub mod graph;
pub mod simulate;
pub mod subsets;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{MeasurementGraph, NeighborDistribution, Side};
pub use simulate::{Model, NoiseSpec, OutcomeVector, SparseVector};
pub use verify::{Limits, PropertyReport};
