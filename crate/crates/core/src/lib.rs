//! Simulation and analysis of the spin-dependent force that an optically pumped NV
//! ensemble exerts on a levitated oscillator.
//!
//! The pipeline runs magnet field -> NV spin state -> per-spin and ensemble force ->
//! driven Langevin motion -> PSD peak area -> recovered force.

pub mod analysis;
pub mod constants;
pub mod error;
pub mod force_model;
pub mod magnetostatics;
pub mod mechanics;
pub mod nv_spin;
pub mod orientation;
pub mod spin;

pub use nalgebra::{Matrix3, Vector3};
pub use analysis::{
    amplitude_from_peak, estimate_psd, force_from_amplitude, recover_force, AmplitudeEstimate,
    PsdEstimate, Window,
};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use force_model::{
    DiamondSpec, ForceModel, ForceResult, IlluminationSpot, Quadrature, SpinModel, SpotProfile,
};
pub use magnetostatics::{CylindricalMagnet, FieldSample, RectGrid};
pub use mechanics::{
    segment_average, simulate, steady_state_amplitude, DriveWaveform, OscillatorParams,
    SimulationOptions, TimeSeries,
};
pub use nv_spin::{LaserDrive, SevenLevelParams};
pub use orientation::{rotation_matrix, NVOrientation};
pub use spin::{eigensolve_hermitian3, DensityMatrix3, SpinOperators};
