//! NV ground-state spin: Hamiltonian, thermal state, optically pumped steady state
//! and the lab-frame magnetic moment.
//!
//! Hamiltonians are stored in frequency units (Hz, i.e. `H/h`). Energies in joules
//! only appear inside Boltzmann factors.

mod rates;

use nalgebra::{Matrix3, Vector3};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::orientation::{rotation_matrix, NVOrientation};
use crate::spin::{
    eigensolve_hermitian3, unitarity_defect, CMatrix3, DensityMatrix3, Eigen3, SpinOperators, C64,
};

pub use rates::{steady_state_of_generator, LaserDrive, SevenLevelParams, SteadyState, LEVELS};

/// Upper bound on `|B|` accepted by [`build_hamiltonian`], T.
pub const MAX_FIELD: f64 = 10.0;

/// Ground (or excited) triplet Hamiltonian `D S_z² + gamma_e B_nv . S` in Hz,
/// written in the NV-frame `m_s` basis.
#[derive(Debug, Clone)]
pub struct NVHamiltonian {
    /// `H / h`, Hz.
    pub matrix: CMatrix3,
    pub orientation: NVOrientation,
    /// Field at the NV in the lab frame, T.
    pub b_local: Vector3<f64>,
    /// Same field in NV-frame components, T.
    pub b_nv: Vector3<f64>,
}

impl NVHamiltonian {
    /// Hamiltonian in joules.
    pub fn energy_matrix(&self, consts: &PhysicalConstants) -> CMatrix3 {
        self.matrix * C64::new(consts.h, 0.0)
    }

    /// Eigenfrequencies (Hz, ascending) and eigenvectors (columns).
    pub fn eigen(&self) -> Result<Eigen3> {
        eigensolve_hermitian3(&self.matrix)
    }
}

/// Triplet Hamiltonian with zero-field splitting `d_hz` for a lab-frame field.
pub fn triplet_hamiltonian(
    b_local: &Vector3<f64>,
    orient: &NVOrientation,
    d_hz: f64,
    gamma_e: f64,
) -> Result<NVHamiltonian> {
    let magnitude = b_local.norm();
    if !(magnitude < MAX_FIELD) {
        return Err(Error::FieldOutOfRange(magnitude));
    }
    let s = SpinOperators::new();
    let b_nv = rotation_matrix(orient).transpose() * b_local;
    let zfs = s.sz * s.sz * C64::new(d_hz, 0.0);
    let zeeman = s.dot(&b_nv) * C64::new(gamma_e, 0.0);
    Ok(NVHamiltonian {
        matrix: zfs + zeeman,
        orientation: *orient,
        b_local: *b_local,
        b_nv,
    })
}

/// `H_NV = h D S_m² + h gamma_e B . S` for one NV orientation.
pub fn build_hamiltonian(
    b_local: &Vector3<f64>,
    orient: &NVOrientation,
    consts: &PhysicalConstants,
) -> Result<NVHamiltonian> {
    triplet_hamiltonian(b_local, orient, consts.d_gs, consts.gamma_e)
}

/// Boltzmann weights of eigenfrequencies (Hz), shifted by the minimum for stability.
pub fn boltzmann_populations(
    freqs_hz: &Vector3<f64>,
    temperature: f64,
    consts: &PhysicalConstants,
) -> Result<Vector3<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    let lowest = freqs_hz.min();
    let w = freqs_hz.map(|f| (-consts.reduced_energy(f - lowest, temperature)).exp());
    Ok(w / w.sum())
}

/// `rho = exp(-H / k_B T) / Z`, returned in the `m_s` basis.
pub fn thermal_state(
    h: &NVHamiltonian,
    temperature: f64,
    consts: &PhysicalConstants,
) -> Result<DensityMatrix3> {
    let eig = h.eigen()?;
    let p = boltzmann_populations(&eig.values, temperature, consts)?;
    to_spin_basis(&DensityMatrix3::diagonal(&p)?, &eig.vectors)
}

/// Rotates an energy-eigenbasis density matrix into the `m_s` basis: `U rho_e U^dagger`
/// with the eigenvectors as the columns of `U`.
pub fn to_spin_basis(rho_e: &DensityMatrix3, u: &CMatrix3) -> Result<DensityMatrix3> {
    let defect = unitarity_defect(u);
    if !(defect < 1e-10) {
        return Err(Error::NotUnitary(defect));
    }
    let m = u * rho_e.matrix() * u.adjoint();
    DensityMatrix3::new((m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// NV-frame spin expectation `<S>_NV`.
pub fn spin_expectation(rho: &DensityMatrix3) -> Vector3<f64> {
    SpinOperators::new().expectation(rho.matrix())
}

/// Lab-frame moment `m = -h gamma_e R <S>_NV`, J/T.
pub fn lab_moment(
    rho: &DensityMatrix3,
    orient: &NVOrientation,
    consts: &PhysicalConstants,
) -> Vector3<f64> {
    let r: Matrix3<f64> = rotation_matrix(orient);
    -consts.moment_scale() * (r * spin_expectation(rho))
}

/// Spin-basis density matrix for one NV: thermal when the laser is off or not
/// polarizing, otherwise the seven-level steady state.
pub fn spin_state(
    b_local: &Vector3<f64>,
    orient: &NVOrientation,
    drive: &LaserDrive,
    params: &SevenLevelParams,
    temperature: f64,
    consts: &PhysicalConstants,
) -> Result<DensityMatrix3> {
    let h = build_hamiltonian(b_local, orient, consts)?;
    rates::seven_level_steady_state(&h, drive, params, temperature, consts)?.spin_density()
}

pub use rates::seven_level_steady_state;
