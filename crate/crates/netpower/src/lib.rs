//! File formats, parallel drivers and the `netpower` command line, built on
//! [`netpower_core`].

// `!(x > 0.0)` is used on purpose: NaN must fail parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod format;
pub mod io;
pub mod par;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// The file was read but its contents are invalid.
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: netpower_core::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] netpower_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    /// 1 for I/O and parse failures, 2 for invalid parameters or usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } | Error::Runtime(_) => 1,
            Error::Core(_) | Error::Usage(_) => 2,
        }
    }
}
