use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("literal references variable {var} but the formula declares {n} variables")]
    VariableOutOfRange { var: u32, n: u32 },
    #[error("variable index 0 is not a valid literal")]
    ZeroVariable,
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("negative weight on clause {0}")]
    NegativeWeight(usize),
    #[error("total clause weight must be positive")]
    ZeroTotalWeight,
    #[error("template has {got} polarity bits but the factor graph has {expected} slots")]
    TemplateLength { expected: usize, got: usize },
    #[error("assignment space of 2^{bits} exceeds the oracle cap of {cap}")]
    OracleCap { bits: u64, cap: u64 },
    #[error("search budget of {0} nodes exhausted")]
    SearchBudget(u64),
    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),
    #[error("constraint on edge {0} is not given as GF(2) polynomials")]
    NotRestricted(usize),
    #[error("edge {edge} needs {got} polynomials but at most {max} are allowed")]
    TooManyPolynomials { edge: usize, got: usize, max: usize },
    #[error("edge {0} references a coordinate outside its vertex tuple or alphabet")]
    BadCoordinate(usize),
    #[error("edge {0} has rank {1}, which this pass does not accept")]
    BadRank(usize, usize),
    #[error("vertex {vertex} is out of range for a hypergraph with {count} vertices")]
    VertexOutOfRange { vertex: u32, count: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("every ordering of the tuple {0:?} is already used")]
    TupleExhausted([u32; 3]),
    #[error("expected a {expected} formula, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("clause {0} does not have the arity this pass requires")]
    BadArity(usize),
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph is not a positive expander")]
    NotPositive,
    #[error("folding basis is linearly dependent")]
    DependentBasis,
    #[error("lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("formula dimensions (n={n}, m={m}) do not match the template (n={tn}, m={tm})")]
    DimensionMismatch { n: u32, m: usize, tn: u32, tm: usize },
    #[error("output size {got} exceeds the bound {bound}")]
    SizeBound { got: u64, bound: u64 },
    #[error("variable {0} is not determined by unit propagation")]
    Undetermined(u32),
    #[error("branch limit of {0} exceeded")]
    BranchLimit(u64),
}
