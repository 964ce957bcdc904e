use core::fmt;

/// Errors raised by the coding primitives.
///
/// Modeled outcomes such as an encoder hitting an empty coset are *not*
/// errors; they are reported through the return types of the operations that
/// can produce them.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The field modulus is not a prime in `2..=257`.
    InvalidModulus(u16),
    /// A residue is outside `[0, q)`.
    InvalidResidue { value: u16, modulus: u16 },
    /// Operand shapes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// Operands live over different fields.
    FieldMismatch { left: u16, right: u16 },
    /// An enumeration would visit more members than the configured cap.
    TooLargeToEnumerate { what: &'static str, size: Option<u64>, cap: u64 },
    /// A probability vector or stochastic matrix is malformed.
    InvalidDistribution(&'static str),
    /// A scalar parameter is out of its admissible range.
    InvalidParameter(&'static str),
    /// The syndrome is not in the image of the encoding map.
    DecodeFailure,
    /// Rejection sampling could not find a map whose kernel clears the weight threshold.
    ExpurgationInfeasible { gamma: f64, attempts: u32 },
    /// The expurgated parameter formula needs `beta < 1`.
    ExpurgationInvalid { gamma: f64, beta: f64 },
    /// `H(X) - H(X|Y)` leaves no room for `r > H(X|Y)` and `r + R < H(X)`.
    RateWindowEmpty { h_x: f64, h_x_given_y: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModulus(q) => write!(f, "modulus {q} is not a prime in 2..=257"),
            Error::InvalidResidue { value, modulus } => {
                write!(f, "residue {value} is out of range for GF({modulus})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::FieldMismatch { left, right } => {
                write!(f, "field mismatch: GF({left}) vs GF({right})")
            }
            Error::TooLargeToEnumerate { what, size, cap } => match size {
                Some(size) => write!(f, "{what} too large to enumerate: {size} members exceeds cap {cap}"),
                None => write!(f, "{what} too large to enumerate: size overflows, cap {cap}"),
            },
            Error::InvalidDistribution(what) => write!(f, "invalid distribution: {what}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::DecodeFailure => write!(f, "decode failure: syndrome is not in the image of the encoder"),
            Error::ExpurgationInfeasible { gamma, attempts } => write!(
                f,
                "expurgation infeasible: no map with kernel weight > gamma*n (gamma = {gamma}) after {attempts} attempts"
            ),
            Error::ExpurgationInvalid { gamma, beta } => write!(
                f,
                "expurgation invalid for gamma = {gamma}: beta = {beta} is not below 1"
            ),
            Error::RateWindowEmpty { h_x, h_x_given_y } => write!(
                f,
                "rate window empty: H(X) = {h_x} does not exceed H(X|Y) = {h_x_given_y}"
            ),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for errors caused by a size cap rather than invalid input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::TooLargeToEnumerate { .. })
    }
}
