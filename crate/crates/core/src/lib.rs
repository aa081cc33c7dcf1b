//! Graph-collection embeddings built from interpretable structural node
//! features.
//!
//! Each graph is turned into a cloud of per-node feature vectors
//! ([`features`]); the clouds are then vectorized with optimal-transport
//! methods ([`ot`], [`embedding`]) into one fixed-width row per graph. The
//! rows feed a seedable tree ensemble ([`classifier`]), the feature-ordering
//! algorithms ([`selection`]) and the node-sampling diagnostics
//! ([`sampling`]).

pub mod classifier;
pub mod embedding;
pub mod error;
pub mod features;
pub mod graph;
pub mod ot;
pub mod output;
pub mod sampling;
pub mod seed;
pub mod selection;

pub use error::{Error, Result};
pub use graph::{Graph, GraphCollection, Labels, NodeSample};
