//! Simulation and analysis of a driven two-level spin (the NV-center
//! `m_s = 0 / m_s = -1` pseudo-spin) under simultaneous microwave and
//! radio-frequency excitation.
//!
//! Internally every frequency is an angular frequency in rad/µs and every
//! time is in µs. Conversion to ordinary MHz happens only at the file and
//! command-line boundary, through [`units::mhz_to_angular`] and
//! [`units::angular_to_mhz`].
//!
//! Basis convention: index 0 is `m_s = 0` and `σ_z |0⟩ = +|0⟩`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod nutation;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use model::{DriveField, HermitianOp2, RwaModel, TwoLevelModel};

/// Version string recorded in output provenance.
pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
