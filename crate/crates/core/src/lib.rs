//! Trip tries: hierarchical clustering of GPS trips with a prefix tree.
//!
//! Trips are discretized onto a grid ([`grid`]), encoded as one region symbol
//! per time step ([`ingest`], [`corpus`]) and inserted into a prefix tree
//! ([`trie`]). Each trie level is a partition of the trips, and the levels form
//! the dendrogram that single-linkage clustering produces under the
//! position-weighted Hamming distance ([`metrics`]). [`oracle`] checks that
//! equivalence by brute force; [`analytics`] and [`macro_cluster`] answer
//! questions about the resulting hierarchy.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod ingest;
pub mod macro_cluster;
pub mod metrics;
pub mod oracle;
pub mod partition;
pub mod synthetic;
pub mod trie;

pub use error::{Error, Result};
pub use grid::{BoundingBox, Cell, Grid, Symbol};
pub use ingest::{RawTrip, TraceRecord, TripString};
pub use metrics::{levenshtein, shared_prefix_len, weighted_hamming, Distance};
pub use partition::Partition;
pub use trie::{NodeId, Trie, TrieNode};
