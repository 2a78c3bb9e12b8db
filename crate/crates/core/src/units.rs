//! Unit conventions: time in us, angular frequency in rad/us.

use std::f64::consts::TAU;

/// `f` in MHz to angular frequency in rad/us.
pub fn mhz_to_rad_per_us(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/us to MHz.
pub fn rad_per_us_to_mhz(w: f64) -> f64 {
    w / TAU
}
