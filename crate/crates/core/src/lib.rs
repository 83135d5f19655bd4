//! Layer partitioning, QC-PEG construction and layered decoding for
//! quasi-cyclic LDPC codes.

pub mod base;
pub mod classes;
pub mod clique;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod partition;
pub mod pcm;
pub mod qcpeg;
pub mod sim;

pub use base::{BaseMatrix, Diagnostic};
pub use error::{Error, Result};
pub use pcm::{expand, expand_checked, RowIndexSet, SparsePcm};
