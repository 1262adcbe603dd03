use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficients sum to {total}, expected 1 (pass normalize to rescale)")]
    NotNormalized { total: f64 },

    #[error("infeasible parameters: lambda1 = {lambda1}, purity = {purity}")]
    Infeasible { lambda1: f64, purity: f64 },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("hypergeometric series hits a pole at term {term}")]
    Pole { term: u64 },

    #[error("negative discriminant {value:e} while solving for {what}")]
    NegativeDiscriminant { what: &'static str, value: f64 },

    #[error("no mode at group {group}, index {index}")]
    NoSuchMode { group: usize, index: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
