//! Unit conventions and the single kHz <-> rad/ms boundary.

use std::f64::consts::TAU;

/// Zeeman shift of the |2,2> <-> |2,1> transition per unit field, kHz/mG.
pub const KHZ_PER_MILLIGAUSS: f64 = 0.7;

/// Conversion constants shared by the field model and the configuration layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Transition frequency shift per field, kHz/mG.
    pub gyromagnetic_conversion: f64,
    /// Stored frequencies are angular (rad/ms); user-facing ones are kHz, nu = omega / 2pi.
    pub frequency_unit_convention: &'static str,
}

impl PhysicalConstants {
    pub const STANDARD: PhysicalConstants = PhysicalConstants {
        gyromagnetic_conversion: KHZ_PER_MILLIGAUSS,
        frequency_unit_convention: "internal rad/ms, external kHz",
    };

    pub fn milligauss_to_khz(&self, field_mg: f64) -> f64 {
        field_mg * self.gyromagnetic_conversion
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Ordinary frequency in kHz to angular frequency in rad/ms.
#[inline]
pub fn khz_to_angular(f_khz: f64) -> f64 {
    TAU * f_khz
}

/// Angular frequency in rad/ms to ordinary frequency in kHz.
#[inline]
pub fn angular_to_khz(omega: f64) -> f64 {
    omega / TAU
}
