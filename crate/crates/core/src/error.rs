use std::io;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed image: {0}")]
    Parse(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("coordinate ({row}, {col}) outside {height}x{width} grid")]
    Index {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("pass {pass} exceeds top bitplane {top}")]
    Range { pass: u32, top: u32 },

    #[error("bit budget of {budget} bits cannot hold the {header} bit header")]
    BudgetTooSmall { budget: u64, header: u64 },

    #[error("bad stream: {0}")]
    Format(String),

    #[error("stream truncated: header announces {expected} payload bits, {available} present")]
    Truncation { expected: u64, available: u64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("all mixture components assign zero likelihood to tree {tree}")]
    NumericalUnderflow { tree: usize },

    #[error("importance mask retains no coefficient")]
    EmptyMask,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
