use std::path::PathBuf;

use crate::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("nodes {0} and {1} are not neighbors (distance {2:.3} m exceeds range {3} m)")]
    NotNeighbors(NodeId, NodeId, f64, f64),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("node {0} has an exhausted battery")]
    DeadNode(NodeId),

    #[error("source and destination must differ (both are {0})")]
    SameEndpoints(NodeId),

    #[error("distance {0} m is outside [0, {1}] m")]
    DistanceOutOfRange(f64, f64),

    #[error("packet size must be positive")]
    EmptyPacket,

    #[error("cannot aggregate an empty set of reports")]
    EmptyAggregate,

    #[error("malformed mobility trace: {0}")]
    Trace(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code category used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Trace(_) => 2,
            Error::Io { .. } | Error::Csv(_) => 3,
            _ => 1,
        }
    }
}
