//! Restricted Boltzmann machine wave functions for spin-1 chains.

// `!(x > 0.0)` checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod error;
pub mod exact;
pub mod hilbert;
pub mod io;
pub mod model;
pub mod vmc;

pub use error::{Error, Result};
pub use hilbert::{Basis, SectorSpec, SpinConfig};
