use std::io;

use thiserror::Error;

use crate::link::Infeasible;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped by what a caller can do about them; see
/// [`Error::exit_code`] for the mapping used by the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated {what}: need {needed} bytes, have {available}")]
    Truncated {
        what: &'static str,
        needed: u64,
        available: u64,
    },

    #[error("{0} trailing bytes after end of record")]
    TrailingBytes(u64),

    #[error("index out of codebook range: {index} >= {codebook_size} at flat position {position}")]
    IndexOutOfRange {
        index: u32,
        codebook_size: u32,
        position: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("mask digest does not match the bitstream header")]
    MaskDigestMismatch,

    #[error("unknown MCS {0:?}")]
    UnknownMcs(String),

    #[error("no feasible MCS at this SNR ({snr_db} dB) for class {class}")]
    NoFeasibleMcs { snr_db: f64, class: &'static str },

    #[error(transparent)]
    Infeasible(#[from] Infeasible),

    #[error("malformed config: {0}")]
    Config(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 input/format, 3 integrity, 4 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ChecksumMismatch { .. } | Error::MaskDigestMismatch => 3,
            Error::Infeasible(_) | Error::NoFeasibleMcs { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
