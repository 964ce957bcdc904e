//! Channel codes assembled from source codes with decoder side information.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//! prime-field linear algebra, ensembles of linear maps with their hash
//! parameters, finite memoryless sources and channels, a constrained random
//! number generator, Slepian-Wolf style syndrome codecs, the channel code
//! built on top of them, a capacity solver and exact decision-rule analysis.
//! File formats, configuration and the command-line driver live in the
//! `sidecode-lab` crate.
//!
//! Every randomized routine takes an explicit `u64` seed; see [`seed`] for how
//! per-trial streams are derived from a master seed.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod channel_code;
pub mod crng;
pub mod decision;
pub mod ensemble;
mod error;
pub mod gf;
pub mod seed;
pub mod source;
pub mod stats;
pub mod sw;

pub use error::{Error, Result};

/// Default upper bound on the number of vectors any exact enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

/// Default upper bound on joint `(x, y)` outcomes for exact error evaluation.
pub const DEFAULT_EXACT_CAP: u64 = 1 << 24;

/// Default upper bound on the number of members in an exhaustively enumerated ensemble.
pub const DEFAULT_ENSEMBLE_CAP: u64 = 1 << 20;

/// `base^exp` if it does not exceed `u64::MAX`.
pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}
