use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NonPrimeP(u64),
    #[error("{q} is not a power of the prime {p}")]
    NotPrimePower { p: u64, q: u64 },
    #[error("enumeration bound exceeded: {what} needs {needed} > cap {cap}")]
    BoundExceeded { what: String, needed: u128, cap: u64 },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("cyclotomic values over different fields (n = {0} and n = {1})")]
    MixedModuli(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("weight datum is not genuine: label {0} is its own negative")]
    NotGenuine(String),
    #[error("inconsistent multiplicity along the orbit of {0}")]
    InconsistentMultiplicity(String),
    #[error("degenerate form on the orbit of {0}")]
    DegenerateForm(String),
    #[error("invalid weight datum: {0}")]
    InvalidDatum(String),
    #[error("not a polarization: {0}")]
    NotAPolarization(String),
    #[error("elements of different groups")]
    MixedGroups,
    #[error("no Lagrangian subspace found for orbit {0}")]
    NoLagrangian(usize),
    #[error("intertwiner space has dimension {0}, expected 1")]
    SchurFailure(usize),
    #[error("intertwiner has zero trace and cannot be normalized")]
    ZeroTrace,
    #[error("bad grading: {0}")]
    BadGrading(String),
    #[error("all coefficients of a Gauss sum must be nonzero")]
    AllCoefficientsNonzero,
    #[error("oracle mismatch at t = {t}: brute force {brute}, structural {structural}")]
    OracleMismatch { t: u32, brute: String, structural: String },
    #[error("element order {0} is divisible by p")]
    OrderDivisibleByP(u64),
    #[error("no linear recurrence of degree <= {0} fits the sequence")]
    NoRecurrenceWithinBound(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
