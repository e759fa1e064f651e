//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("derivative order {0} unsupported (expected 1, 2 or 3)")]
    UnsupportedOrder(u32),
    #[error("Sobolev index must be nonnegative, got {0}")]
    NegativeSobolevIndex(f64),
    #[error("invalid mollifier: {0}")]
    InvalidMollifier(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("non-finite values produced by {0}")]
    NonFinite(&'static str),
    #[error("recording too sparse for slope dynamics: {0}")]
    TooSparse(String),
    #[error("envelope evaluated at or beyond its pole (t = {t}, pole = {pole})")]
    BeyondPole { t: f64, pole: f64 },
    #[error("breaking hypothesis not satisfied; no envelope available")]
    HypothesisNotSatisfied,
}

pub type Result<T> = std::result::Result<T, CoreError>;
