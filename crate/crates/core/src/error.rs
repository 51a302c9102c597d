use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for {side} side of size {len}")]
    Range {
        side: &'static str,
        index: usize,
        len: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("infeasible scale: {needed} enumeration steps exceed the cap of {cap}")]
    Infeasible { needed: u128, cap: u128 },
    #[error("certification not achieved after {attempts} attempts (best epsilon {best_epsilon})")]
    Exhausted { attempts: usize, best_epsilon: f64 },
    #[error("decoding is ambiguous: {} minimizers at distance {distance}", candidates.len())]
    Tie {
        distance: usize,
        candidates: Vec<Vec<usize>>,
    },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
