use thiserror::Error;

use crate::split::Split;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leaf count {0} outside supported range 3..=64")]
    InvalidLeafCount(usize),
    #[error("leaf {leaf} is not in 1..={n}")]
    LeafOutOfRange { leaf: usize, n: usize },
    #[error(
        "subset of size {size} does not give a split of {n} leaves (both sides need at least 2)"
    )]
    SubsetTooSmall { size: usize, n: usize },
    #[error("leaf counts differ: {0} vs {1}")]
    LeafCountMismatch(usize, usize),
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),

    #[error("splits {0} and {1} are incompatible")]
    IncompatiblePair(Split, Split),
    #[error("{count} splits exceed the maximum of {max} for a tree")]
    TooManySplits { count: usize, max: usize },
    #[error("enumeration of {count} items exceeds cap {cap}")]
    EnumerationTooLarge { count: String, cap: u64 },
    #[error("double factorial undefined for {0} (needs odd m >= -1)")]
    NegativeOrEven(i64),

    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("part size {k} out of range for n = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("vertex {0} not in graph")]
    VertexNotFound(Split),
    #[error("search budget of {0} nodes exceeded")]
    SearchBudgetExceeded(u64),

    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("epsilon {epsilon} is not below the minimum edge length {min_edge}")]
    EpsilonTooLarge { epsilon: f64, min_edge: f64 },
    #[error("internal edge count {p} out of range for n = {n}")]
    POutOfRange { n: usize, p: usize },
    #[error("edge length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("edge lengths do not match the topology's splits")]
    LengthKeysMismatch,

    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("duplicate leaf label {0:?}")]
    DuplicateLeaf(String),
    #[error("internal node with fewer than three neighbours")]
    DegreeTwoInternal,
    #[error("negative branch length at byte {0}")]
    NegativeLength(usize),
    #[error("leaf label {0:?} not covered by the label map")]
    UnknownLabel(String),
    #[error("leaf labels mix integers and names or use integers out of range; supply a label map")]
    AmbiguousLabels,
    #[error("invalid label map: {0}")]
    InvalidLabelMap(String),
}
