//! NV symmetry axes and the NV-frame to lab-frame rotation.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Polar angle of every <111> axis when the lab z axis is a cube axis: `acos(1/sqrt(3))`.
pub fn tetrahedral_polar_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// One NV axis in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NVOrientation {
    /// Polar angle from lab z, rad.
    pub theta: f64,
    /// Azimuth from lab x, rad.
    pub phi: f64,
    /// Label 1..=4.
    pub index: u8,
}

impl NVOrientation {
    pub fn new(theta: f64, phi: f64, index: u8) -> Self {
        Self { theta, phi, index }
    }

    /// The four <111> axes of a [100]-cut crystal, azimuths 45, 135, 225 and 315 degrees.
    pub fn defaults() -> [NVOrientation; 4] {
        Self::with_azimuth_offset(std::f64::consts::FRAC_PI_4)
    }

    /// Four tetrahedral axes with azimuths `offset + k pi/2`.
    pub fn with_azimuth_offset(offset: f64) -> [NVOrientation; 4] {
        let theta = tetrahedral_polar_angle();
        std::array::from_fn(|k| {
            NVOrientation::new(
                theta,
                offset + k as f64 * std::f64::consts::FRAC_PI_2,
                k as u8 + 1,
            )
        })
    }

    /// Lab-frame unit vector along the NV axis.
    pub fn axis(&self) -> Vector3<f64> {
        rotation_matrix(self) * Vector3::z()
    }
}

/// `R = R_z(phi) R_y(theta)`, mapping NV-frame components to lab-frame components.
pub fn rotation_matrix(orient: &NVOrientation) -> Matrix3<f64> {
    let (st, ct) = orient.theta.sin_cos();
    let (sp, cp) = orient.phi.sin_cos();
    let rz = Matrix3::new(cp, -sp, 0.0, sp, cp, 0.0, 0.0, 0.0, 1.0);
    let ry = Matrix3::new(ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct);
    rz * ry
}
