//! Physical constants shared by the spin, magnet and mechanics models.
//!
//! Frequencies are kept in Hz and converted to energies with `h` only where a
//! Boltzmann factor or an energy is actually needed.

use serde::{Deserialize, Serialize};

/// SI constants. Defaults are CODATA 2018 plus the NV ground-state values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Planck constant, J s.
    pub h: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Electron gyromagnetic ratio, Hz/T.
    pub gamma_e: f64,
    /// Ground-state zero-field splitting, Hz.
    pub d_gs: f64,
    /// Vacuum permeability, T m/A.
    pub mu_0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            h: 6.626_070_15e-34,
            k_b: 1.380_649e-23,
            gamma_e: 28.0e9,
            d_gs: 2.87e9,
            mu_0: 1.256_637_062_12e-6,
        }
    }
}

impl PhysicalConstants {
    /// Magnitude of the spin-1 moment scale `h * gamma_e`, J/T.
    pub fn moment_scale(&self) -> f64 {
        self.h * self.gamma_e
    }

    /// `h f / (k_B T)` for a frequency in Hz.
    pub fn reduced_energy(&self, freq_hz: f64, temperature: f64) -> f64 {
        self.h * freq_hz / (self.k_b * temperature)
    }
}
