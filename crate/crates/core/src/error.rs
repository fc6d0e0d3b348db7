use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} must be nonnegative, got {value}")]
    Negative { what: &'static str, value: f64 },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("reversed integration bounds [{a}, {b}]")]
    ReversedBounds { a: f64, b: f64 },

    #[error("invalid CDF table: {0}")]
    InvalidCdf(String),

    #[error("atom of mass {mass} at interior bid {at}")]
    InteriorAtom { at: f64, mass: f64 },

    #[error("item {item} out of range for {n_items} items")]
    ItemOutOfRange { item: usize, n_items: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("instance too large for exhaustive search: {size} > {limit}")]
    TooLarge { size: f64, limit: f64 },

    #[error("valuation of player {player} is not submodular")]
    NotSubmodular { player: usize },

    #[error("fractional allocation does not sum to an integer: {0}")]
    NonIntegralTotal(f64),

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid prize vector: {0}")]
    InvalidPrizes(String),

    #[error("degenerate game: {0}")]
    Degenerate(String),

    #[error("profile incompatible with mechanism: {0}")]
    IncompatibleProfile(String),
}
