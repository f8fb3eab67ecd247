//! Closed-form and semi-analytic predictions for the rotating-frame model:
//! Bessel sideband amplitudes, multiphoton resonance lines, missing
//! resonances, the quasistatic lineshape and Floquet quasienergies.

pub mod bessel;
pub mod floquet;
pub mod lineshape;
pub mod sidebands;

pub use bessel::{bessel_j, bessel_j_orders, bessel_zeros};
pub use floquet::{floquet_quasienergies, FloquetSpectrum};
pub use lineshape::{quasistatic_lineshape, DetuningGrid, LineProfile};
pub use sidebands::{
    cdt_missing_resonances, flipflop_rate, multiphoton_lines, sideband_amplitudes, ResonanceLine, SidebandSet,
};
