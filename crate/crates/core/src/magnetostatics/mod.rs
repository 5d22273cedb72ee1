//! Exact field of a uniformly, axially magnetized cylinder.
//!
//! The field follows the closed form for a finite solenoid (equivalently a
//! cylinder with surface current `M` on its mantle) written in terms of
//! Bulirsch's `cel`. The gradient tensor is taken by 5-point central differences
//! of the closed form.

mod elliptic;

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use elliptic::{cel, ellip_e, ellip_k, CEL_TOL};

/// Finite-difference step for the gradient tensor, m.
pub const GRADIENT_STEP: f64 = 1e-6;

fn default_axis() -> Vector3<f64> {
    Vector3::z()
}

/// A cylindrical permanent magnet. The top (north) face is centered at
/// `(0, 0, pole_face_position)` and `axis` points out of that face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylindricalMagnet {
    /// m
    pub radius: f64,
    /// m
    pub length: f64,
    /// T
    pub remanence: f64,
    /// Lab z of the top face, m.
    #[serde(default)]
    pub pole_face_position: f64,
    #[serde(default = "default_axis")]
    pub axis: Vector3<f64>,
}

/// Field and gradient at a point. `grad[(i, j)] = ∂_i B_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub position: Vector3<f64>,
    pub b: Vector3<f64>,
    pub grad: Matrix3<f64>,
}

impl FieldSample {
    pub fn dbz_dz(&self) -> f64 {
        self.grad[(2, 2)]
    }

    /// `∂_z B` as a vector, the quantity that multiplies the moment in `f_z = m . ∂_z B`.
    pub fn dz_b(&self) -> Vector3<f64> {
        self.grad.row(2).transpose()
    }
}

impl CylindricalMagnet {
    pub fn new(radius: f64, length: f64, remanence: f64) -> Result<Self> {
        let m = Self {
            radius,
            length,
            remanence,
            pole_face_position: 0.0,
            axis: Vector3::z(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_pole_face(mut self, z: f64) -> Self {
        self.pole_face_position = z;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.radius) || !finite_pos(self.length) || !finite_pos(self.remanence) {
            return Err(Error::InvalidMagnet(format!(
                "radius, length and remanence must be positive (got {}, {}, {})",
                self.radius, self.length, self.remanence
            )));
        }
        if !self.pole_face_position.is_finite() {
            return Err(Error::InvalidMagnet("pole face position not finite".into()));
        }
        let n = self.axis.norm();
        if !(n.is_finite() && (n - 1.0).abs() < 1e-9) {
            return Err(Error::InvalidMagnet(format!(
                "axis must be a unit vector (norm {n})"
            )));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.length
    }

    /// Total dipole moment `Br V / mu_0`, A m².
    pub fn dipole_moment(&self, mu_0: f64) -> f64 {
        self.remanence * self.volume() / mu_0
    }

    pub fn face_center(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.pole_face_position)
    }

    pub fn center(&self) -> Vector3<f64> {
        self.face_center() - self.axis * (0.5 * self.length)
    }

    /// Returns `(rho, z, rho_hat)` in the magnet frame (origin at the center).
    fn local(&self, point: &Vector3<f64>) -> (f64, f64, Vector3<f64>) {
        let r = point - self.center();
        let z = r.dot(&self.axis);
        let radial = r - self.axis * z;
        let rho = radial.norm();
        let rho_hat = if rho > 0.0 {
            radial / rho
        } else {
            Vector3::zeros()
        };
        (rho, z, rho_hat)
    }

    pub fn contains(&self, point: &Vector3<f64>) -> bool {
        let (rho, z, _) = self.local(point);
        rho <= self.radius && z.abs() <= 0.5 * self.length
    }

    /// Axial and radial components in the magnet frame. Valid everywhere except on
    /// the two edge rings.
    fn field_cylindrical(&self, rho: f64, z: f64) -> (f64, f64) {
        let a = self.radius;
        let b = 0.5 * self.length;
        let b0 = self.remanence / std::f64::consts::PI;
        let zp = z + b;
        let zm = z - b;
        let apr = a + rho;
        let amr = a - rho;
        let dp = (zp * zp + apr * apr).sqrt();
        let dm = (zm * zm + apr * apr).sqrt();
        let alpha_p = a / dp;
        let alpha_m = a / dm;
        let beta_p = zp / dp;
        let beta_m = zm / dm;
        let gamma = amr / apr;
        let kp = ((zp * zp + amr * amr) / (zp * zp + apr * apr)).sqrt();
        let km = ((zm * zm + amr * amr) / (zm * zm + apr * apr)).sqrt();
        let g2 = gamma * gamma;
        let b_rho = b0 * (alpha_p * cel(kp, 1.0, 1.0, -1.0) - alpha_m * cel(km, 1.0, 1.0, -1.0));
        let b_z = b0 * a / apr
            * (beta_p * cel(kp, g2, 1.0, gamma) - beta_m * cel(km, g2, 1.0, gamma));
        (b_rho, b_z)
    }

    fn field_unchecked(&self, point: &Vector3<f64>) -> Vector3<f64> {
        let (rho, z, rho_hat) = self.local(point);
        let (b_rho, b_z) = self.field_cylindrical(rho, z);
        self.axis * b_z + rho_hat * b_rho
    }

    /// Field at an exterior point, T.
    pub fn field_at(&self, point: &Vector3<f64>) -> Result<Vector3<f64>> {
        if self.contains(point) {
            return Err(Error::InsideMagnet {
                point: *point,
                index: None,
            });
        }
        Ok(self.field_unchecked(point))
    }

    /// Gradient tensor `∂_i B_j` at an exterior point, T/m.
    pub fn gradient_at(&self, point: &Vector3<f64>) -> Result<Matrix3<f64>> {
        if self.contains(point) {
            return Err(Error::InsideMagnet {
                point: *point,
                index: None,
            });
        }
        Ok(self.gradient_unchecked(point))
    }

    fn gradient_unchecked(&self, point: &Vector3<f64>) -> Matrix3<f64> {
        let h = GRADIENT_STEP;
        let mut grad = Matrix3::zeros();
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = h;
            let d = (self.field_unchecked(&(point - 2.0 * e))
                - 8.0 * self.field_unchecked(&(point - e))
                + 8.0 * self.field_unchecked(&(point + e))
                - self.field_unchecked(&(point + 2.0 * e)))
                / (12.0 * h);
            grad.set_row(i, &d.transpose());
        }
        grad
    }

    pub fn sample(&self, point: &Vector3<f64>) -> Result<FieldSample> {
        let b = self.field_at(point)?;
        Ok(FieldSample {
            position: *point,
            b,
            grad: self.gradient_unchecked(point),
        })
    }

    /// Elementary on-axis `B_z` at height `h` above the top face.
    pub fn on_axis_field(&self, h: f64) -> f64 {
        let (a, l) = (self.radius, self.length);
        0.5 * self.remanence * ((h + l) / ((h + l).powi(2) + a * a).sqrt() - h / (h * h + a * a).sqrt())
    }

    /// Elementary on-axis `∂_z B_z` at height `h` above the top face.
    pub fn on_axis_gradient(&self, h: f64) -> f64 {
        let (a, l) = (self.radius, self.length);
        0.5 * self.remanence
            * a
            * a
            * (((h + l).powi(2) + a * a).powf(-1.5) - (h * h + a * a).powf(-1.5))
    }

    /// Fits the radius (1D root find on `∂_zB_z / B_z` at `height` above the face) for a
    /// fixed length, then scales the remanence so `B_z` hits `target_b` exactly.
    pub fn calibrate(length: f64, height: f64, target_b: f64, target_grad: f64) -> Result<Self> {
        let ratio_target = target_grad / target_b;
        let trial = |radius: f64| {
            let m = Self {
                radius,
                length,
                remanence: 1.0,
                pole_face_position: 0.0,
                axis: Vector3::z(),
            };
            m.on_axis_gradient(height) / m.on_axis_field(height) - ratio_target
        };
        // |grad / B| falls monotonically with radius.
        let (mut lo, mut hi) = (1e-5 * length.max(height), 1e3 * length.max(height));
        if trial(lo) * trial(hi) > 0.0 {
            return Err(Error::InvalidMagnet(format!(
                "no radius reproduces grad/B = {ratio_target:.4} 1/m at length {length} m"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if trial(lo) * trial(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        let radius = 0.5 * (lo + hi);
        let unit = Self::new(radius, length, 1.0)?;
        Self::new(radius, length, target_b / unit.on_axis_field(height))
    }

    /// Same magnetization and length, `factor` times the radius.
    pub fn scaled_diameter(&self, factor: f64) -> Self {
        Self {
            radius: self.radius * factor,
            ..self.clone()
        }
    }
}

/// Rectangular lattice of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl RectGrid {
    pub fn linspace(lo: Vector3<f64>, hi: Vector3<f64>, n: [usize; 3]) -> Self {
        let axis = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        };
        Self {
            x: axis(lo.x, hi.x, n[0]),
            y: axis(lo.y, hi.y, n[1]),
            z: axis(lo.z, hi.z, n[2]),
        }
    }

    /// Points in x-major order (z varies fastest).
    pub fn points(&self) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(self.x.len() * self.y.len() * self.z.len());
        for &x in &self.x {
            for &y in &self.y {
                for &z in &self.z {
                    out.push(Vector3::new(x, y, z));
                }
            }
        }
        out
    }
}

/// Batch evaluation; output order matches `points`.
pub fn field_map(magnet: &CylindricalMagnet, points: &[Vector3<f64>]) -> Result<Vec<FieldSample>> {
    if let Some(index) = points.iter().position(|p| magnet.contains(p)) {
        return Err(Error::InsideMagnet {
            point: points[index],
            index: Some(index),
        });
    }
    points.par_iter().map(|p| magnet.sample(p)).collect()
}

pub const FIELD_MAP_HEADER: [&str; 7] = ["x", "y", "z", "Bx", "By", "Bz", "dBzdz"];

pub fn write_field_map_csv<W: Write>(out: W, samples: &[FieldSample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIELD_MAP_HEADER)?;
    for s in samples {
        w.serialize((
            s.position.x,
            s.position.y,
            s.position.z,
            s.b.x,
            s.b.y,
            s.b.z,
            s.dbz_dz(),
        ))?;
    }
    w.flush()?;
    Ok(())
}
