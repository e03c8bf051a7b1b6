//! CODATA 2018 physical constants, SI units.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
