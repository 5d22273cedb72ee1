//! Spin-1 operators, 3x3 density matrices and the Hermitian eigensolve.
//!
//! Basis ordering is `(|+1>, |0>, |-1>)` everywhere in the crate.

use nalgebra::{Complex, Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix3 = Matrix3<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dimensionless spin-1 matrices in the `(|+1>, |0>, |-1>)` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub sx: CMatrix3,
    pub sy: CMatrix3,
    pub sz: CMatrix3,
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}

impl SpinOperators {
    pub fn new() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let i = C64::new(0.0, r);
        let sx = CMatrix3::new(ZERO, c(r), ZERO, c(r), ZERO, c(r), ZERO, c(r), ZERO);
        let sy = CMatrix3::new(ZERO, -i, ZERO, i, ZERO, -i, ZERO, i, ZERO);
        let sz = CMatrix3::from_diagonal(&nalgebra::Vector3::new(c(1.0), ZERO, c(-1.0)));
        Self { sx, sy, sz }
    }

    /// `v . S` for a real vector.
    pub fn dot(&self, v: &Vector3<f64>) -> CMatrix3 {
        self.sx * c(v.x) + self.sy * c(v.y) + self.sz * c(v.z)
    }

    /// `(Tr[rho Sx], Tr[rho Sy], Tr[rho Sz])`.
    pub fn expectation(&self, rho: &CMatrix3) -> Vector3<f64> {
        Vector3::new(
            (rho * self.sx).trace().re,
            (rho * self.sy).trace().re,
            (rho * self.sz).trace().re,
        )
    }
}

/// Frobenius norm of `m - m^dagger` relative to the norm of `m`.
pub fn hermitian_defect(m: &CMatrix3) -> f64 {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    (m - m.adjoint()).norm() / scale
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen3 {
    pub values: Vector3<f64>,
    pub vectors: CMatrix3,
}

/// Diagonalizes a 3x3 Hermitian matrix. Eigenvalues come back sorted ascending.
///
/// Within a degenerate subspace the eigenvectors are arbitrary; callers should only
/// rely on basis-invariant combinations such as projectors.
pub fn eigensolve_hermitian3(h: &CMatrix3) -> Result<Eigen3> {
    let defect = hermitian_defect(h);
    if !(defect < 1e-9) {
        return Err(Error::NotHermitian(defect));
    }
    // Symmetrize so round-off asymmetry does not leak into the solver.
    let sym = (h + h.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector3::new(
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    let vectors = CMatrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    Ok(Eigen3 { values, vectors })
}

/// Deviation of `U^dagger U` from the identity (max elementwise modulus).
pub fn unitarity_defect(u: &CMatrix3) -> f64 {
    (u.adjoint() * u - CMatrix3::identity()).camax()
}

/// A 3x3 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix3 {
    matrix: CMatrix3,
}

impl DensityMatrix3 {
    pub const TRACE_TOL: f64 = 1e-12;
    pub const NEGATIVITY_TOL: f64 = 1e-12;

    pub fn new(matrix: CMatrix3) -> Result<Self> {
        let defect = hermitian_defect(&matrix);
        if !(defect < 1e-10) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian ({defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {tr} differs from 1"
            )));
        }
        let eig = eigensolve_hermitian3(&matrix)?;
        if eig.values[0] < -Self::NEGATIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                eig.values[0]
            )));
        }
        Ok(Self { matrix })
    }

    /// Builds `sum_j p_j |v_j><v_j|` from populations and the columns of `vectors`.
    /// Populations are renormalized to unit sum.
    pub fn from_populations(populations: &Vector3<f64>, vectors: &CMatrix3) -> Result<Self> {
        let total: f64 = populations.sum();
        if !(total > 0.0) || populations.iter().any(|&p| p < -Self::NEGATIVITY_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "populations {populations:?} are not a distribution"
            )));
        }
        let diag = CMatrix3::from_diagonal(&populations.map(|p| c(p / total)));
        let matrix = vectors * diag * vectors.adjoint();
        Ok(Self {
            matrix: (matrix + matrix.adjoint()) * c(0.5),
        })
    }

    /// Diagonal density matrix with the given populations (renormalized).
    pub fn diagonal(populations: &Vector3<f64>) -> Result<Self> {
        Self::from_populations(populations, &CMatrix3::identity())
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMatrix3::identity() * c(1.0 / 3.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Diagonal entries (real parts).
    pub fn populations(&self) -> Vector3<f64> {
        Vector3::new(
            self.matrix[(0, 0)].re,
            self.matrix[(1, 1)].re,
            self.matrix[(2, 2)].re,
        )
    }

    pub fn spectrum(&self) -> Vector3<f64> {
        eigensolve_hermitian3(&self.matrix)
            .map(|e| e.values)
            .unwrap_or_else(|_| Vector3::repeat(f64::NAN))
    }
}
