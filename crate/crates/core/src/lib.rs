//! Rendezvous of multi-agent networks under graph-Laplacian consensus, and
//! flight planning for quadcopters that realize it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consensus;
pub mod error;
pub mod mission;
pub mod network;
pub mod numerics;
pub mod planner;
pub mod quad;

pub use error::{Error, Result};
