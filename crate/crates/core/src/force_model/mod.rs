//! Per-spin gradient force, four-orientation averaging and the volume integral over
//! the illuminated part of the diamond.
//!
//! Lab frame: the magnet axis is `+z` with its pole face at `z = 0` (see
//! [`CylindricalMagnet::with_pole_face`]), the diamond sits above it with its
//! 3 mm × 3 mm faces vertical. The beam travels along `x` through the full width;
//! `y` is the 0.5 mm thickness.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::magnetostatics::CylindricalMagnet;
use crate::nv_spin::{lab_moment, spin_state, LaserDrive, SevenLevelParams};
use crate::orientation::NVOrientation;


/// Carbon atoms per m³ in diamond.
pub const CARBON_NUMBER_DENSITY: f64 = 1.76e29;

pub const DEFAULT_SCALING_FACTOR: f64 = 1.2;

/// `f_i = Σ_j m_j ∂_i B_j`, with `grad[(i, j)] = ∂_i B_j`.
pub fn per_spin_force(m_lab: &Vector3<f64>, grad: &Matrix3<f64>) -> Vector3<f64> {
    grad * m_lab
}

/// Gradient tensor of an axisymmetric, divergence-free field on its axis with
/// `∂_z B_z = b`.
pub fn axial_gradient(b: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(-0.5 * b, -0.5 * b, b))
}

/// Everything needed to turn a local field into a spin state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinModel {
    pub params: SevenLevelParams,
    pub temperature: f64,
    pub consts: PhysicalConstants,
}

impl Default for SpinModel {
    fn default() -> Self {
        Self {
            params: SevenLevelParams::default(),
            temperature: 300.0,
            consts: PhysicalConstants::default(),
        }
    }
}

impl SpinModel {
    pub fn moment(
        &self,
        b: &Vector3<f64>,
        orient: &NVOrientation,
        drive: &LaserDrive,
    ) -> Result<Vector3<f64>> {
        let rho = spin_state(b, orient, drive, &self.params, self.temperature, &self.consts)?;
        Ok(lab_moment(&rho, orient, &self.consts))
    }

    /// Lab moment averaged over the four default orientations.
    pub fn mean_moment(&self, b: &Vector3<f64>, drive: &LaserDrive) -> Result<Vector3<f64>> {
        let mut sum = Vector3::zeros();
        for o in NVOrientation::defaults() {
            sum += self.moment(b, &o, drive)?;
        }
        Ok(sum / 4.0)
    }

    /// Force on one NV of orientation `orient` in a given local field and gradient.
    pub fn single_force(
        &self,
        b: &Vector3<f64>,
        grad: &Matrix3<f64>,
        orient: &NVOrientation,
        drive: &LaserDrive,
    ) -> Result<Vector3<f64>> {
        Ok(per_spin_force(&self.moment(b, orient, drive)?, grad))
    }
}

/// Mean per-spin force over the four orientations at `point`.
pub fn orientation_averaged_force(
    point: &Vector3<f64>,
    drive: &LaserDrive,
    magnet: &CylindricalMagnet,
    model: &SpinModel,
) -> Result<Vector3<f64>> {
    let s = magnet.sample(point)?;
    Ok(per_spin_force(&model.mean_moment(&s.b, drive)?, &s.grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiamondSpec {
    /// Extent along the beam (x), m.
    pub width: f64,
    /// Extent along y, m.
    pub thickness: f64,
    /// Vertical extent, m.
    pub height: f64,
    /// NV concentration in ppm of carbon sites.
    pub nv_ppm: f64,
    pub carbon_number_density: f64,
    /// Pole face to bottom face, m.
    pub gap: f64,
    /// Lateral (x, y) offset of the diamond center from the magnet axis, m.
    pub lateral: [f64; 2],
}

impl Default for DiamondSpec {
    fn default() -> Self {
        Self {
            width: 3e-3,
            thickness: 0.5e-3,
            height: 3e-3,
            nv_ppm: 4.5,
            carbon_number_density: CARBON_NUMBER_DENSITY,
            gap: 0.5e-3,
            lateral: [0.0, 0.0],
        }
    }
}

impl DiamondSpec {
    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    /// NVs per m³.
    pub fn nv_number_density(&self) -> f64 {
        self.nv_ppm * 1e-6 * self.carbon_number_density
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [self.width, self.thickness, self.height];
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Geometry(format!("diamond dimensions must be positive, got {dims:?}")));
        }
        if !(self.nv_number_density() > 0.0 && self.nv_number_density().is_finite()) {
            return Err(Error::Geometry("NV number density must be positive".into()));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::Geometry(format!("gap must be positive, got {} m", self.gap)));
        }
        Ok(())
    }

    fn corners(&self, base: &Vector3<f64>) -> impl Iterator<Item = Vector3<f64>> + '_ {
        let base = *base;
        (0..8).map(move |k| {
            let sx = if k & 1 == 0 { -0.5 } else { 0.5 };
            let sy = if k & 2 == 0 { -0.5 } else { 0.5 };
            let z = if k & 4 == 0 { 0.0 } else { self.height };
            base + Vector3::new(sx * self.width, sy * self.thickness, z)
        })
    }

    /// Center of the bottom face for a magnet whose axis is `+z`.
    pub fn bottom_center(&self, magnet: &CylindricalMagnet) -> Vector3<f64> {
        let face = magnet.face_center();
        Vector3::new(face.x + self.lateral[0], face.y + self.lateral[1], face.z + self.gap)
    }

    /// Errors if the diamond overlaps the magnet.
    pub fn check_placement(&self, magnet: &CylindricalMagnet) -> Result<()> {
        self.validate()?;
        let base = self.bottom_center(magnet);
        if let Some(p) = self.corners(&base).find(|p| magnet.contains(p)) {
            return Err(Error::Geometry(format!(
                "diamond corner ({:.3e}, {:.3e}, {:.3e}) m lies inside the magnet",
                p.x, p.y, p.z
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpotProfile {
    #[default]
    Uniform,
    /// `diameter` is the 1/e² intensity diameter.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IlluminationSpot {
    /// Optical power, mW.
    pub power: f64,
    /// m.
    pub diameter: f64,
    pub profile: SpotProfile,
    /// Spot center above the diamond bottom face, m.
    pub height: f64,
    /// Spot center offset along y from mid-thickness, m.
    pub lateral: f64,
}

impl Default for IlluminationSpot {
    fn default() -> Self {
        Self {
            power: 50.0,
            diameter: 1e-3,
            profile: SpotProfile::Uniform,
            height: 0.5e-3,
            lateral: 0.0,
        }
    }
}

impl IlluminationSpot {
    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// Intensity at the spot center in mW/mm².
    pub fn center_intensity(&self) -> f64 {
        let r_mm = self.radius() * 1e3;
        let area = std::f64::consts::PI * r_mm * r_mm;
        match self.profile {
            SpotProfile::Uniform => self.power / area,
            SpotProfile::Gaussian => 2.0 * self.power / area,
        }
    }

    pub fn validate(&self, diamond: &DiamondSpec) -> Result<()> {
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::Geometry(format!("laser power must be >= 0, got {} mW", self.power)));
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(Error::Geometry(format!("spot diameter must be positive, got {} m", self.diameter)));
        }
        let r = self.radius();
        if self.height - r < 0.0 || self.height + r > diamond.height {
            return Err(Error::Geometry(format!(
                "spot (center {:.3e} m, radius {:.3e} m) does not fit the {:.3e} m face height",
                self.height, r, diamond.height
            )));
        }
        if self.lateral.abs() > 0.5 * diamond.thickness {
            return Err(Error::Geometry(format!(
                "spot center offset {:.3e} m lies outside the {:.3e} m thickness",
                self.lateral, diamond.thickness
            )));
        }
        Ok(())
    }

    /// Area of the spot disk inside `|y| <= thickness / 2`, m².
    pub fn clipped_area(&self, thickness: f64) -> f64 {
        let r = self.radius();
        // Antiderivative of the full chord length 2 sqrt(r² - y²).
        let prim = |y: f64| {
            let y = y.clamp(-r, r);
            y * (r * r - y * y).sqrt() + r * r * (y / r).asin()
        };
        let lo = (-0.5 * thickness - self.lateral).max(-r);
        let hi = (0.5 * thickness - self.lateral).min(r);
        if hi <= lo {
            0.0
        } else {
            prim(hi) - prim(lo)
        }
    }
}

/// Midpoint-rule resolution of the illuminated-volume integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Quadrature {
    /// Points along the beam.
    pub n_beam: usize,
    /// Points across the thickness, in the angle `u` with `y = y_c + r sin u`.
    pub n_cross: usize,
    /// Points along each vertical chord.
    pub n_chord: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            n_beam: 21,
            n_cross: 11,
            n_chord: 21,
        }
    }
}

impl Quadrature {
    pub fn refined(&self) -> Self {
        Self {
            n_beam: 2 * self.n_beam,
            n_cross: 2 * self.n_cross,
            n_chord: 2 * self.n_chord,
        }
    }
}

/// Quadrature nodes and weights (m³) over the illuminated volume.
pub fn illuminated_nodes(
    diamond: &DiamondSpec,
    spot: &IlluminationSpot,
    magnet: &CylindricalMagnet,
    quad: &Quadrature,
) -> Vec<(Vector3<f64>, f64)> {
    let base = diamond.bottom_center(magnet);
    let r = spot.radius();
    let yc = base.y + spot.lateral;
    let zc = base.z + spot.height;
    let (z_lo, z_hi) = (base.z, base.z + diamond.height);
    let y_lo = (base.y - 0.5 * diamond.thickness).max(yc - r);
    let y_hi = (base.y + 0.5 * diamond.thickness).min(yc + r);
    if y_hi <= y_lo {
        return Vec::new();
    }
    let u_lo = ((y_lo - yc) / r).clamp(-1.0, 1.0).asin();
    let u_hi = ((y_hi - yc) / r).clamp(-1.0, 1.0).asin();
    let du = (u_hi - u_lo) / quad.n_cross as f64;
    let dx = diamond.width / quad.n_beam as f64;
    let x0 = base.x - 0.5 * diamond.width;

    let mut nodes = Vec::with_capacity(quad.n_beam * quad.n_cross * quad.n_chord);
    for ix in 0..quad.n_beam {
        let x = x0 + (ix as f64 + 0.5) * dx;
        for iu in 0..quad.n_cross {
            let u = u_lo + (iu as f64 + 0.5) * du;
            let y = yc + r * u.sin();
            let wy = r * u.cos() * du;
            let half = r * u.cos();
            let lo = (zc - half).max(z_lo);
            let hi = (zc + half).min(z_hi);
            if hi <= lo {
                continue;
            }
            let dz = (hi - lo) / quad.n_chord as f64;
            for iz in 0..quad.n_chord {
                let z = lo + (iz as f64 + 0.5) * dz;
                nodes.push((Vector3::new(x, y, z), dx * wy * dz));
            }
        }
    }
    nodes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    /// Thermal-state force, z component, N.
    pub f_th: f64,
    /// Laser-on force, z component, N.
    pub f_gl: f64,
    /// `|f_gl - f_th| / scaling_factor`, N.
    pub delta_f: f64,
    pub scaling_factor: f64,
    pub f_th_vec: Vector3<f64>,
    pub f_gl_vec: Vector3<f64>,
    /// Illuminated volume, m³.
    pub volume: f64,
    pub n_spins: f64,
    /// Laser intensity used for the pumped moment, mW/mm².
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForceModel {
    pub spin: SpinModel,
    pub scaling_factor: f64,
    pub quadrature: Quadrature,
}

impl Default for ForceModel {
    fn default() -> Self {
        Self {
            spin: SpinModel::default(),
            scaling_factor: DEFAULT_SCALING_FACTOR,
            quadrature: Quadrature::default(),
        }
    }
}

impl ForceModel {
    /// Thermal force is integrated with the local moment at every node; the
    /// laser-on force uses the pumped moment at the spot center throughout.
    pub fn ensemble_force(
        &self,
        diamond: &DiamondSpec,
        spot: &IlluminationSpot,
        magnet: &CylindricalMagnet,
        wavelength_polarizing: bool,
    ) -> Result<ForceResult> {
        if !(self.scaling_factor > 0.0 && self.scaling_factor.is_finite()) {
            return Err(Error::Geometry(format!(
                "scaling factor must be positive, got {}",
                self.scaling_factor
            )));
        }
        magnet.validate()?;
        diamond.check_placement(magnet)?;
        spot.validate(diamond)?;

        let drive = LaserDrive {
            intensity: spot.center_intensity(),
            wavelength_polarizing,
        };
        let base = diamond.bottom_center(magnet);
        let center = Vector3::new(base.x, base.y + spot.lateral, base.z + spot.height);
        let b_center = magnet.field_at(&center)?;
        let pumped = drive.wavelength_polarizing && drive.intensity > 0.0;
        let m_gl = self.spin.mean_moment(&b_center, &drive)?;

        let nodes = illuminated_nodes(diamond, spot, magnet, &self.quadrature);
        let thermal = LaserDrive::off();
        let per_node: Vec<(Vector3<f64>, Vector3<f64>)> = nodes
            .par_iter()
            .map(|(p, w)| {
                let s = magnet.sample(p)?;
                let m_th = self.spin.mean_moment(&s.b, &thermal)?;
                Ok((
                    per_spin_force(&m_th, &s.grad) * *w,
                    per_spin_force(&m_gl, &s.grad) * *w,
                ))
            })
            .collect::<Result<_>>()?;

        // Sequential sum keeps the result independent of thread count.
        let (mut f_th, mut f_gl) = (Vector3::zeros(), Vector3::zeros());
        for (a, b) in &per_node {
            f_th += a;
            f_gl += b;
        }
        // Without pumping every NV stays in its local thermal state.
        if !pumped {
            f_gl = f_th;
        }
        let n = diamond.nv_number_density();
        f_th *= n;
        f_gl *= n;
        let volume = diamond.width * spot.clipped_area(diamond.thickness);
        Ok(ForceResult {
            f_th: f_th.z,
            f_gl: f_gl.z,
            delta_f: (f_gl.z - f_th.z).abs() / self.scaling_factor,
            scaling_factor: self.scaling_factor,
            f_th_vec: f_th,
            f_gl_vec: f_gl,
            volume,
            n_spins: n * volume,
            intensity: drive.intensity,
        })
    }
}
