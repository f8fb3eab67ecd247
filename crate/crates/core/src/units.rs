//! The single conversion pair between ordinary frequency (MHz) and the
//! angular frequency (rad/µs) used everywhere inside the crate.

use std::f64::consts::TAU;

/// `f` in MHz to rad/µs.
#[inline]
pub fn mhz_to_angular(f: f64) -> f64 {
    TAU * f
}

/// rad/µs to MHz.
#[inline]
pub fn angular_to_mhz(w: f64) -> f64 {
    w / TAU
}
