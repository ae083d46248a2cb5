//! Topological analysis of street networks.
//!
//! [`build_arrangement`] nodes raw street segments into a planar graph with
//! half-edge faces. On top of it:
//!
//! * [`trace_natural_streets`] joins edges with good continuity (or equal
//!   names) into natural streets, and [`connectivity_graph`] links streets
//!   that meet.
//! * [`extract_blocks`] returns the bounded faces (street blocks);
//!   [`border_numbers`] labels them by adjacency distance from the outer
//!   face; [`natural_cities`] groups adjacent below-mean blocks.

mod arrangement;
mod blocks;
mod natural;

pub use arrangement::{
    build_arrangement, default_snap_tolerance, Edge, EdgeId, Face, FaceId, HalfEdgeId, Node,
    NodeId, PlanarArrangement, StreetSegment,
};
pub use blocks::{
    border_numbers, city_hotspots, extract_blocks, natural_cities, topological_center, Block,
    BlockId, NaturalCity,
};
pub use natural::{
    connectivity_graph, deflection_angle, trace_natural_streets, ConnectivityGraph, JoinStrategy,
    NaturalStreet, DEFAULT_ANGLE_THRESHOLD,
};

use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("no street segments given")]
    NoSegments,
    #[error("every street segment collapsed under the snap tolerance")]
    AllDegenerate,
    #[error("snap tolerance must be non-negative and finite, got {0}")]
    SnapTolerance(f64),
    #[error("component {component} violates Euler's formula: V - E + F = {value}")]
    EulerViolation { component: usize, value: i64 },
    #[error("angle threshold must lie strictly between 0 and 90 degrees, got {0}")]
    AngleThreshold(f64),
    #[error("unknown join strategy '{0}' (expected every-best-fit, self-best-fit or same-name)")]
    UnknownStrategy(String),
    #[error("streets do not partition the edges: edge {edge} is covered {count} times")]
    NotPartition { edge: usize, count: usize },
    #[error("no blocks given")]
    NoBlocks,
    #[error("natural cities need at least 2 blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("block {0} cannot be reached from the outer border")]
    UnreachableBlock(usize),
}
