use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate parameters: p_up + p_down must be positive for a stationary law")]
    DegenerateParams,

    #[error("state {k} out of range 0..={n_sites}")]
    StateOutOfRange { k: usize, n_sites: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("state {k} is not recurrent: stationary one-probability is {q}")]
    NonRecurrent { k: usize, q: String },

    #[error("{truncated} of {replicas} replicas hit the {cap}-step cap; estimate is invalid")]
    Truncated {
        truncated: u64,
        replicas: u64,
        cap: u64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
