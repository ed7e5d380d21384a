//! Numerics for stark hypersurfaces.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod austere;
pub mod cli;
pub mod canonform;
pub mod matcore;
pub mod sample;
pub mod starkflow;
pub mod surface;
pub mod helix;

/// Default tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;
