//! Sketching-based solvers for overdetermined linear least squares.
//!
//! The crate provides:
//!
//! - dense (column-major) and sparse (CSR) matrix containers with the
//!   factorization kernels everything else is built on (one-sided Jacobi SVD,
//!   column-pivoted Householder QR, complete orthogonal decomposition,
//!   triangular solves),
//! - random sketching operators: `s`-hashing, an `s`-hashing variant with
//!   replacement, scaled Gaussian, row sampling, and hashed/subsampled
//!   randomized trigonometric transforms (Walsh-Hadamard and Hartley),
//! - embedding-quality diagnostics (coherence, non-uniformity, measured
//!   subspace distortion, preconditioner condition number, Monte-Carlo
//!   failure rates),
//! - a sketch-precondition-LSQR solver with an explicit sketched solution,
//!   early exit, and a minimal-norm branch,
//! - deterministic test-matrix generators and a benchmark harness with
//!   Dolan-More performance profiles,
//! - Matrix Market and CSV I/O behind a `sketchls` command-line tool.
//!
//! All randomness flows from explicit 64-bit seeds through counter-based
//! substreams, so every sketch, generated problem, and solve is reproducible
//! bit for bit.

pub mod analysis;
pub mod bench;
pub mod io;
pub mod kernels;
pub mod mat;
pub mod rng;
pub mod sketch;
pub mod solver;
pub mod testgen;

use std::fmt;

/// Errors shared across the crate.
#[derive(Debug)]
pub enum Error {
    /// Incompatible dimensions, with a short description of the mismatch.
    Dim(String),
    /// An input contained NaN or infinity.
    NonFinite(&'static str),
    /// A factorization detected numerical rank zero.
    RankZero,
    /// A triangular solve hit a zero diagonal entry.
    SingularDiagonal(usize),
    /// A fast transform was asked for a non-power-of-two length.
    PowerOfTwo(usize),
    /// An argument was outside its documented range.
    InvalidArg(String),
    /// A parse failure, with the 1-based line number of the offending line.
    Parse { line: usize, msg: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dim(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::RankZero => write!(f, "matrix has numerical rank zero"),
            Error::SingularDiagonal(i) => {
                write!(f, "zero diagonal entry at position {i} in triangular solve")
            }
            Error::PowerOfTwo(n) => write!(f, "length {n} is not a power of two"),
            Error::InvalidArg(msg) => write!(f, "invalid argument: {msg}"),
            Error::Parse { line, msg } => write!(f, "parse error on line {line}: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
