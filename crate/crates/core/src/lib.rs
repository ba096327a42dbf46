//! Collective decay rates of qubit chains coupled to a one-dimensional
//! waveguide, with the delay between qubits treated exactly.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod charfn;
pub mod cli;
pub mod error;
pub mod params;
pub mod poly;
pub mod rootfind;
pub mod ssr;
pub mod transfer;

pub use error::{Result, SsrError};
pub use params::{ChainParams, Mode};
