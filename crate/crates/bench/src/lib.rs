//! Shared fixtures for the benchmarks.

use spinlev_core::force_model::{DiamondSpec, ForceModel, IlluminationSpot};
use spinlev_core::mechanics::OscillatorParams;
use spinlev_core::CylindricalMagnet;

/// Operating point: calibrated small magnet, 0.5 mm gap, 50 mW.
pub struct Fixture {
    pub magnet: CylindricalMagnet,
    pub diamond: DiamondSpec,
    pub spot: IlluminationSpot,
    pub model: ForceModel,
    pub oscillator: OscillatorParams,
}

pub fn fixture() -> Fixture {
    Fixture {
        magnet: CylindricalMagnet::calibrate(20e-3, 1e-3, 0.63, -98.0).expect("calibration converges"),
        diamond: DiamondSpec::default(),
        spot: IlluminationSpot::default(),
        model: ForceModel::default(),
        oscillator: OscillatorParams::default(),
    }
}
