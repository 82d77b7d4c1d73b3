//! Exact output reachable sets of ReLU feedforward networks over unions of
//! polyhedra, and safety verification against polyhedral unsafe regions.

pub mod error;
pub mod geometry;

pub use error::{Error, Result};
pub use geometry::{AffineRegion, LpOutcome, LpStatus, Polyhedron, UnionOfPolyhedra};
pub mod json;
pub mod netmodel;
pub mod oracle;
pub mod reach;
pub mod verify;

pub use netmodel::{load_network, random_network, Activation, ActivationPattern, Layer, Network};
pub use reach::{network_reach, ReachMode, ReachOptions, ReachSet, ReachStats};
pub use verify::{verify_network, SafetySpec, Verdict};
