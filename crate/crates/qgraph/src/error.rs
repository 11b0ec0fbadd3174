use crate::graph::Mode;
use thiserror::Error;

/// Crate-wide error type. Constructors validate their preconditions and
/// every fallible operation reports the first violated one.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph has {n} vertices; at most {max} are supported")]
    TooManyVertices { n: usize, max: usize },
    #[error("label count {k} exceeds vertex count {n}")]
    LabelsExceedVertices { k: usize, n: usize },
    #[error("loop edge at vertex {v}")]
    LoopEdge { v: usize },
    #[error("edge {u}-{v} has multiplicity 0")]
    ZeroMultiplicity { u: usize, v: usize },
    #[error("vertex index {v} out of range 1..={n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("label counts differ: {left} vs {right}")]
    LabelMismatch { left: usize, right: usize },
    #[error("modes differ: {left} vs {right}")]
    ModeMismatch { left: Mode, right: Mode },
    #[error("label permutation is not a bijection on 1..={k}")]
    NotABijection { k: usize },
    #[error("expected a fully labeled graph (n = k), got n={n}, k={k}")]
    NotFullyLabeled { n: usize, k: usize },
    #[error("operation requires an unlabeled input (k = 0), got k={k}")]
    LabeledInput { k: usize },
    #[error("multiplicity {m} on edge {u}-{v} not allowed in simple mode")]
    NotSimple { u: usize, v: usize, m: String },
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("variable {var} out of range for k={k}")]
    VarOutOfRange { var: String, k: usize },
    #[error("polynomial contains non-{ns} variable {var}")]
    WrongNamespace { ns: char, var: String },
    #[error("polynomial is not homogeneous")]
    NonHomogeneous,
    #[error("polynomial has odd degree {deg}")]
    OddDegree { deg: String },
    #[error("coordinate {i} is not strictly positive")]
    NonpositiveCoordinate { i: usize },
    #[error("point has {got} coordinates but variable x{need} occurs")]
    MissingCoordinate { got: usize, need: u32 },
    #[error("no value assigned to variable {var}")]
    UnassignedVariable { var: String },
    #[error("pattern has vertices but target is empty")]
    EmptyTarget,
    #[error("target has {ng} vertices, fewer than the pattern's {nf}")]
    TargetTooSmall { ng: usize, nf: usize },
    #[error("label map must assign all {k} labels a target vertex in 1..={n}")]
    BadLabelMap { k: usize, n: usize },
    #[error("rational function was built for a target with {built} vertices, not {given}")]
    MismatchedTargetSize { built: usize, given: usize },
    #[error("epsilon must be positive")]
    NonpositiveEpsilon,
    #[error("perturbation bound d must be at least 1")]
    BoundBelowOne,
    #[error("perturbation order r={r} exceeds the cap {cap}")]
    PerturbOrderCap { r: u32, cap: u32 },
    #[error("perturbation requires a k=0 multi-mode quantum graph")]
    PerturbNeedsMulti,
    #[error("certificate search needs k at least 2, got {k}")]
    KTooSmall { k: usize },
    #[error("certificate search needs max degree at least 1")]
    DegreeTooSmall,
    #[error("certificate weight must be positive")]
    NonpositiveWeight,
    #[error("preorder scale d must be positive")]
    NonpositiveScale,
    #[error("Gram matrix is {rows}x{cols} but the basis has {basis} entries")]
    GramShape { rows: usize, cols: usize, basis: usize },
    #[error("Gram matrix is not positive semidefinite; witness {witness:?}")]
    NonPsdGram { witness: Vec<String> },
    #[error("basis graph has {n} vertices, more than k={k}")]
    BasisGraphTooLarge { n: usize, k: usize },
    #[error("matrix is not square or constraint shapes do not match")]
    ShapeMismatch,
    #[error("total semidefinite dimension {needed} exceeds the configured cap {cap} (set QGRAPH_MAX_DIM to raise it)")]
    DimensionCap { needed: usize, cap: usize },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
