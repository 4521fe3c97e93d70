//! Spatial-crowdsourcing task allocation.
//!
//! Tasks and workers are clustered, clusters are linked through non-crossing
//! graphs built over their centers, each side ranks its neighbours, and the
//! two rankings are merged into a matching table that worker clusters consume
//! greedily in a chosen traversal order.

pub mod clustering;
pub mod evaluation;
pub mod geometry;
pub mod harness;
pub mod matching;
pub mod metrics;
pub mod ncgraph;
pub mod verify;
