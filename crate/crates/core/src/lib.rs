//! QETU state preparation toolkit.
//!
//! The pipeline runs minimax Chebyshev fitting ([`cheb`]), symmetric phase
//! solving ([`qsp`]) and statevector circuit simulation ([`sim`]) on digitized
//! Hamiltonians ([`models`]). [`gsprep`] and [`wavepacket`] chain these into
//! ground-state and Gaussian-state workflows.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cheb;
pub mod error;
pub mod gsprep;
pub mod lp;
pub mod models;
pub mod qsp;
pub mod sim;
pub mod wavepacket;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
