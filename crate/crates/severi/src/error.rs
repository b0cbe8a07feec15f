//! Crate-wide error type. Every fallible operation returns [`Error`]; the
//! variants mirror the failure modes of the underlying constructions
//! (malformed inputs, degenerate configurations, unsupported field modes).

use thiserror::Error;

use crate::scalar::FieldKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix entries mix field variants: {0} vs {1}")]
    MixedField(FieldKind, FieldKind),

    #[error("malformed matrix: {rows}x{cols} declared but {entries} entries supplied")]
    MalformedMatrix {
        rows: usize,
        cols: usize,
        entries: usize,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("rank-deficient input: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldKind, FieldKind),

    #[error("operation requires degree >= 1, got {0}")]
    DegreeTooSmall(u32),

    #[error("unsupported characteristic: p = {p} with degree {s}")]
    UnsupportedCharacteristic { p: u64, s: u32 },

    #[error("operation requires prime-field coefficients")]
    NotPrimeField,

    #[error("operation not supported over {0}")]
    UnsupportedField(FieldKind),

    #[error("modulus {0} is not prime or out of range")]
    BadModulus(u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("duplicate points in configuration (index {0} repeats index {1})")]
    DuplicatePoints(usize, usize),

    #[error("degenerate configuration: condition rank {rank}, expected {expected}")]
    DegenerateConfiguration { rank: usize, expected: usize },

    #[error("degenerate prefix of length {len}: condition rank {rank}, expected {expected}")]
    DegeneratePrefix {
        len: usize,
        rank: usize,
        expected: usize,
    },

    #[error("degenerate family: generic condition rank {rank}, expected {expected}")]
    DegenerateFamily { rank: usize, expected: usize },

    #[error("family path {0} is identically zero")]
    ZeroPath(usize),

    #[error("family points collide at every tested parameter value")]
    FamilyNotGenericallyDistinct,

    #[error("sampling exhausted after {attempts} attempts: {reason}")]
    SampleExhausted { attempts: u32, reason: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid stratum: {0}")]
    InvalidStratum(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
