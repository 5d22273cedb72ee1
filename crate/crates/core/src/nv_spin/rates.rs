//! Seven-level population model of NV optical pumping, solved in the energy
//! eigenbasis of the ground and excited triplets.
//!
//! Levels `0..3` are the ground eigenstates (ascending energy), `3..6` the excited
//! eigenstates and `6` the metastable singlet. Every spin-conserving rate between
//! eigenstates is weighted by the `m_s` overlaps `|<i|m>|² |<j|m>|²`; spin-selective
//! rates into and out of the singlet use `|<i|m>|²`. Ground eigenstates relax toward
//! their Boltzmann distribution at `1/T1`.

use nalgebra::{SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{boltzmann_populations, to_spin_basis, triplet_hamiltonian, NVHamiltonian};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::spin::{CMatrix3, DensityMatrix3};

pub const LEVELS: usize = 7;
const SINGLET: usize = 6;

type Generator = SMatrix<f64, LEVELS, LEVELS>;

/// Photophysics rates. Defaults: room-temperature seven-level rates of
/// Tetienne et al., New J. Phys. 14, 103033 (2012); `d_es` from excited-state ODMR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SevenLevelParams {
    /// Optical pumping rate per unit intensity, Hz per (mW/mm²).
    pub k_pump_per_intensity: f64,
    /// Spin-conserving radiative decay, Hz.
    pub k_rad: f64,
    /// Excited `m_s = 0` to singlet, Hz.
    pub k_isc_ms0: f64,
    /// Excited `m_s = ±1` to singlet, Hz.
    pub k_isc_ms1: f64,
    /// Singlet to ground `m_s = 0`, Hz.
    pub k_s0: f64,
    /// Singlet to each ground `m_s = ±1`, Hz.
    pub k_s1: f64,
    /// Excited-state zero-field splitting, Hz.
    pub d_es: f64,
    /// Ground-state longitudinal relaxation time, s.
    pub t1: f64,
    /// Use the ground eigenvectors for the excited-state spin characters.
    pub excited_uses_ground_characters: bool,
}

impl Default for SevenLevelParams {
    fn default() -> Self {
        Self {
            k_pump_per_intensity: DEFAULT_PUMP_PER_INTENSITY,
            k_rad: 65.0e6,
            k_isc_ms0: 11.0e6,
            k_isc_ms1: 80.0e6,
            k_s0: 3.0e6,
            k_s1: 2.6e6,
            d_es: 1.42e9,
            t1: 5.0e-3,
            excited_uses_ground_characters: false,
        }
    }
}

/// Frozen pump calibration, Hz per (mW/mm²).
pub const DEFAULT_PUMP_PER_INTENSITY: f64 = 40.0;

impl SevenLevelParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("k_pump_per_intensity", self.k_pump_per_intensity),
            ("k_rad", self.k_rad),
            ("k_isc_ms0", self.k_isc_ms0),
            ("k_isc_ms1", self.k_isc_ms1),
            ("k_s0", self.k_s0),
            ("k_s1", self.k_s1),
            ("d_es", self.d_es),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidRates(format!("{name} = {v} must be >= 0")));
            }
        }
        if !(self.k_isc_ms1 > self.k_isc_ms0) {
            return Err(Error::InvalidRates(format!(
                "k_isc_ms1 ({}) must exceed k_isc_ms0 ({})",
                self.k_isc_ms1, self.k_isc_ms0
            )));
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return Err(Error::InvalidRates(format!("t1 = {} must be > 0", self.t1)));
        }
        Ok(())
    }

    fn isc(&self) -> [f64; 3] {
        [self.k_isc_ms1, self.k_isc_ms0, self.k_isc_ms1]
    }

    fn singlet_decay(&self) -> [f64; 3] {
        [self.k_s1, self.k_s0, self.k_s1]
    }
}

/// Laser illumination seen by an NV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserDrive {
    /// mW/mm²
    pub intensity: f64,
    /// `true` for 532 nm, `false` for a non-polarizing (e.g. 980 nm) control.
    pub wavelength_polarizing: bool,
}

impl LaserDrive {
    pub fn green(intensity: f64) -> Self {
        Self {
            intensity,
            wavelength_polarizing: true,
        }
    }

    pub fn off() -> Self {
        Self::green(0.0)
    }

    fn pumps(&self) -> bool {
        self.wavelength_polarizing && self.intensity > 0.0
    }
}

/// Steady state of the ground triplet in its energy eigenbasis.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Ground eigenstate populations, unit sum.
    pub populations: Vector3<f64>,
    /// All seven level populations (ground, excited, singlet); the excited and
    /// singlet entries are zero in the thermal case.
    pub levels: [f64; LEVELS],
    /// `rho_e`: diagonal in the eigenbasis.
    pub rho_e: DensityMatrix3,
    /// Ground eigenvectors as columns.
    pub eigenvectors: CMatrix3,
}

impl SteadyState {
    pub fn spin_density(&self) -> Result<DensityMatrix3> {
        to_spin_basis(&self.rho_e, &self.eigenvectors)
    }
}

fn characters(u: &CMatrix3) -> [[f64; 3]; 3] {
    // chars[i][m] = |<eigenstate i | m>|²
    std::array::from_fn(|i| std::array::from_fn(|m| u[(m, i)].norm_sqr()))
}

/// Builds the generator `M` with `dp/dt = M p`.
fn generator(
    ground: &[[f64; 3]; 3],
    excited: &[[f64; 3]; 3],
    thermal: &Vector3<f64>,
    pump: f64,
    params: &SevenLevelParams,
) -> Generator {
    // rate[(i, j)] is the rate from level i to level j.
    let mut rate = Generator::zeros();
    let isc = params.isc();
    let sd = params.singlet_decay();
    for i in 0..3 {
        for j in 0..3 {
            let overlap: f64 = (0..3).map(|m| ground[i][m] * excited[j][m]).sum();
            rate[(i, 3 + j)] = pump * overlap;
            rate[(3 + j, i)] = params.k_rad * overlap;
            if i != j {
                rate[(i, j)] = thermal[j] / params.t1;
            }
        }
        rate[(3 + i, SINGLET)] = (0..3).map(|m| excited[i][m] * isc[m]).sum();
        rate[(SINGLET, i)] = (0..3).map(|m| ground[i][m] * sd[m]).sum();
    }
    let mut gen = rate.transpose();
    for i in 0..LEVELS {
        let out: f64 = rate.row(i).sum();
        gen[(i, i)] -= out;
    }
    gen
}

/// Unique normalized null vector of a rate generator (columns sum to zero).
///
/// Uniqueness is checked on the column-scaled generator (each column divided by its
/// total outflow) so widely separated rate scales do not masquerade as a second
/// null direction.
pub fn steady_state_of_generator(gen: &Generator) -> Result<SVector<f64, LEVELS>> {
    let mut scaled = *gen;
    for j in 0..LEVELS {
        let out = -gen[(j, j)];
        if out > 0.0 {
            scaled.column_mut(j).unscale_mut(out);
        }
    }
    let sv = scaled.singular_values();
    let max = sv.max();
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let second = sorted[1] / max;
    if !(max > 0.0) || second < 1e-8 {
        return Err(Error::SingularRateMatrix(second));
    }
    let mut a = *gen;
    a.row_mut(LEVELS - 1).fill(1.0);
    let mut rhs = SVector::<f64, LEVELS>::zeros();
    rhs[LEVELS - 1] = 1.0;
    let p = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularRateMatrix(second))?;
    // Round-off can leave populations at -1e-17; they are zero.
    Ok(p.map(|x| if x < 0.0 && x > -1e-12 { 0.0 } else { x }))
}

/// Steady-state ground populations under continuous illumination.
///
/// With the laser off, or at a non-polarizing wavelength, this is exactly the
/// thermal state.
pub fn seven_level_steady_state(
    h: &NVHamiltonian,
    drive: &LaserDrive,
    params: &SevenLevelParams,
    temperature: f64,
    consts: &PhysicalConstants,
) -> Result<SteadyState> {
    if !(drive.intensity >= 0.0) {
        return Err(Error::InvalidRates(format!(
            "laser intensity {} must be >= 0",
            drive.intensity
        )));
    }
    params.validate()?;
    let ground = h.eigen()?;
    let thermal = boltzmann_populations(&ground.values, temperature, consts)?;

    if !drive.pumps() {
        let mut levels = [0.0; LEVELS];
        levels[..3].copy_from_slice(thermal.as_slice());
        return Ok(SteadyState {
            populations: thermal,
            levels,
            rho_e: DensityMatrix3::diagonal(&thermal)?,
            eigenvectors: ground.vectors,
        });
    }

    let ground_chars = characters(&ground.vectors);
    let excited_chars = if params.excited_uses_ground_characters {
        ground_chars
    } else {
        let hes = triplet_hamiltonian(&h.b_local, &h.orientation, params.d_es, consts.gamma_e)?;
        characters(&hes.eigen()?.vectors)
    };
    let pump = params.k_pump_per_intensity * drive.intensity;
    let gen = generator(&ground_chars, &excited_chars, &thermal, pump, params);
    let p = steady_state_of_generator(&gen)?;
    let populations = Vector3::new(p[0], p[1], p[2]);
    let total = populations.sum();
    let populations = populations / total;
    Ok(SteadyState {
        populations,
        levels: std::array::from_fn(|i| p[i]),
        rho_e: DensityMatrix3::diagonal(&populations)?,
        eigenvectors: ground.vectors,
    })
}
