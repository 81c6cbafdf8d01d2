use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix has rank {rank}, expected full row rank {rows}")]
    RankDeficient { rank: usize, rows: usize },

    #[error("objective violates the recession condition: c·x = {value} > 0 for some x >= 0 with Ax = 0")]
    InvalidObjective { value: String },

    #[error("matrix columns do not lie in the superlattice")]
    NotSublattice,

    #[error("vector {0:?} is not a member of the lattice")]
    NotInLattice(Vec<String>),

    #[error("LP optimum is not unique for this instance; use pi-min/pi-max or lexicographic tie-breaking")]
    NonUniqueLp,

    #[error("branch-and-bound exceeded the node budget of {0}")]
    NodeBudget(u64),

    #[error("residue table is incomplete ({missing} residue classes without a certified vector)")]
    IncompleteTable { missing: usize },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: String, limit: u64 },

    #[error("LP relaxation unbounded; instance data is corrupt")]
    Unbounded,

    #[error("{0}")]
    Invalid(String),
}
