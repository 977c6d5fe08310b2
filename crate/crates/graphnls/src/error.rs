use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("edge `{edge}` has non-positive or non-finite length {length}")]
    BadEdgeLength { edge: String, length: f64 },
    #[error("graph is empty (no edges)")]
    EmptyGraph,
    #[error("graph is not connected: vertex `{0}` is not reachable from `{1}`")]
    Disconnected(String, String),
    #[error("graph is acyclic: no cycle to measure")]
    Acyclic,
    #[error("exponent p = {0} outside the supported range (2, 6]")]
    BadExponent(f64),
    #[error("mass must be positive and finite, got {0}")]
    BadMass(f64),
    #[error("mesh target spacing must be positive and finite, got {0}")]
    BadMeshSpacing(f64),
    #[error("function is defined on a different mesh")]
    MeshMismatch,
    #[error("function has zero mass")]
    ZeroMass,
    #[error("function is constant: {0}")]
    ConstantFunction(&'static str),
    #[error("function has negative values; rearrangements need u >= 0")]
    NegativeValues,
    #[error("graph has a terminal edge; {0}")]
    TerminalEdgePresent(&'static str),
    #[error("graph has no terminal edge; {0}")]
    NoTerminalEdge(&'static str),
    #[error("mass {mass} exceeds the admissible bound {bound} for this estimate")]
    MassAboveBound { mass: f64, bound: f64 },
    #[error("constant C must be non-negative and finite, got {0}")]
    BadConstant(f64),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("bad solver configuration: {0}")]
    BadConfig(&'static str),
    #[error("requested k = {k} eigenpairs but the mesh has only {ndof} DOFs")]
    TooManyEigenpairs { k: usize, ndof: usize },
    #[error("eigendecomposition failed to converge")]
    EigenFailure,
    #[error("linear solve failed: {0}")]
    SingularSystem(&'static str),
    #[error("blow-up profile construction failed: {0}")]
    ProfileConstruction(String),
    #[error("support 1/sqrt(lambda) = {support} does not fit edge `{edge}` of length {length}")]
    SupportDoesNotFit {
        edge: String,
        support: f64,
        length: f64,
    },
    #[error("mass grid is empty or not strictly increasing")]
    BadMassGrid,
    #[error("{file}: {msg}")]
    Format { file: String, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
