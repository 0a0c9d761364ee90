//! Physical constants (CODATA 2018, exact where the SI fixes them) and unit helpers.
//!
//! Internal conventions: rotational energies and trap frequencies are ordinary
//! frequencies in MHz, dipole moments in Debye, masses in u, positions in µm.
//! Dynamics runs in µs with angular frequencies in rad/µs.

use std::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// One Debye in C·m.
pub const DEBYE: f64 = 3.335_640_952e-30;

/// Coulomb constant e²/(4πε₀) in J·m.
pub fn coulomb_energy_length() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY)
}

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad_per_s(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}

/// Ordinary frequency in MHz to angular frequency in rad/µs.
pub fn mhz_to_rad_per_us(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz
}

/// Ordinary frequency in kHz to angular frequency in rad/µs.
pub fn khz_to_rad_per_us(f_khz: f64) -> f64 {
    2.0 * PI * f_khz * 1e-3
}

pub fn ms_to_us(t_ms: f64) -> f64 {
    t_ms * 1e3
}
