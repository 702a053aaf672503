//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::graph::{EdgeId, Vertex};

/// Errors raised by parsing, model validation, transforms and solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WrpError {
    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// An edge joins a vertex to itself.
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vertex),
    /// An edge has capacity zero.
    #[error("edge {0} has capacity 0")]
    ZeroCapacity(EdgeId),
    /// A vertex id is outside the graph.
    #[error("vertex {0} out of range")]
    UnknownVertex(Vertex),
    /// An edge id is outside the graph.
    #[error("edge {0} out of range")]
    UnknownEdge(EdgeId),
    /// The graph is not connected.
    #[error("graph is disconnected")]
    Disconnected,
    /// An operation was called outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An edge of weight zero reached the line-graph normalization.
    #[error("edge {0} has weight 0; path expansion needs positive weights")]
    ZeroWeight(EdgeId),
    /// A route does not satisfy the instance constraints.
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    /// A decomposition is malformed.
    #[error("invalid decomposition: {0}")]
    Decomposition(String),
    /// Decomposition width exceeds the configured cap.
    #[error("decomposition width {width} exceeds cap {cap}")]
    WidthLimit { width: usize, cap: usize },
    /// A search exhausted its node or state budget.
    #[error("{what} budget of {limit} exhausted")]
    Budget { what: &'static str, limit: usize },
    /// The waypoint count exceeds the line-graph backend limit.
    #[error("{k} waypoints exceed the k-cycle backend limit {limit}")]
    TooManyWaypoints { k: usize, limit: usize },
    /// A path in the waypoint line graph cannot be mapped back to a route.
    #[error("malformed line-graph path: {0}")]
    MalformedPath(String),
}

impl WrpError {
    /// True for resource-limit failures (width, budget, waypoint count).
    pub fn is_limit(&self) -> bool {
        matches!(self, WrpError::WidthLimit { .. } | WrpError::Budget { .. } | WrpError::TooManyWaypoints { .. })
    }
}

/// Crate result alias.
pub type Result<T> = std::result::Result<T, WrpError>;
