use num_bigint::BigInt;
use thiserror::Error;

/// Every failure the library can report. Each variant belongs to exactly one
/// module; [`Error::module`] names it so the CLI can attribute errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero polynomial is not a valid input")]
    ZeroPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("{0} is not prime")]
    CompositeModulus(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("order basis matrix is singular")]
    SingularBasis,
    #[error("defining polynomial {0} is reducible over Q")]
    NotIrreducible(String),
    #[error("could not certify irreducibility of {0}")]
    IrreducibilityUndecided(String),
    #[error("basis is not an order: {0}")]
    NotAnOrder(String),
    #[error("element has {got} coordinates, algebra has degree {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element is not invertible")]
    NotInvertible,

    #[error("prime {p} ramifies (discriminant {disc}); refusing to guess the local data")]
    RamifiedPlace { p: u64, disc: BigInt },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("group {group} has no element of cycle type {cycle_type:?}")]
    NoSuchElement {
        group: String,
        cycle_type: Vec<usize>,
    },
    #[error("Frobenius class at {p} cannot be pinned down from the available resolvents")]
    AmbiguousFrobenius { p: u64 },

    #[error("search box needs {requested} candidates, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },
    #[error("independence undecided at the {bits}-bit precision cap")]
    IndependenceUndecided { bits: u32 },
    #[error("unit system rejected: {0}")]
    InvalidUnitSystem(String),

    #[error("invalid place set: {0}")]
    InvalidPlaceSet(String),

    #[error("not an automorphism of the order: {0}")]
    NotAutomorphism(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("generator set failed sanity checks: {0}")]
    SanityFailed(String),

    #[error("malformed JSON at {path}: {message}")]
    Json { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Name of the module the error originates from.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroPolynomial | NotMonic | CompositeModulus(_) | InvalidInput(_) => "exact_arith",
            SingularBasis
            | NotIrreducible(_)
            | IrreducibilityUndecided(_)
            | NotAnOrder(_)
            | DimensionMismatch { .. }
            | NotInvertible => "etale_algebra",
            RamifiedPlace { .. } | NoSuchElement { .. } | AmbiguousFrobenius { .. } => {
                "galois_places"
            }
            Unsupported(_) | InvalidPlaceSet(_) => "torus_ample",
            BudgetExceeded { .. } | IndependenceUndecided { .. } | InvalidUnitSystem(_) => "units",
            NotAutomorphism(_) | SingularMatrix | SanityFailed(_) => "matrix_groups",
            Json { .. } | Io(_) => "cma_cli",
        }
    }

    /// Short machine-readable kind, the variant name.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroPolynomial => "ZeroPolynomial",
            NotMonic => "NotMonic",
            CompositeModulus(_) => "CompositeModulus",
            InvalidInput(_) => "InvalidInput",
            SingularBasis => "SingularBasis",
            NotIrreducible(_) => "NotIrreducible",
            IrreducibilityUndecided(_) => "IrreducibilityUndecided",
            NotAnOrder(_) => "NotAnOrder",
            DimensionMismatch { .. } => "DimensionMismatch",
            NotInvertible => "NotInvertible",
            RamifiedPlace { .. } => "RamifiedPlace",
            Unsupported(_) => "Unsupported",
            NoSuchElement { .. } => "NoSuchElement",
            AmbiguousFrobenius { .. } => "AmbiguousFrobenius",
            BudgetExceeded { .. } => "BudgetExceeded",
            IndependenceUndecided { .. } => "IndependenceUndecided",
            InvalidUnitSystem(_) => "InvalidUnitSystem",
            InvalidPlaceSet(_) => "InvalidPlaceSet",
            NotAutomorphism(_) => "NotAutomorphism",
            SingularMatrix => "SingularMatrix",
            SanityFailed(_) => "SanityFailed",
            Json { .. } => "Json",
            Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
