//! Dense complex matrices used as an independent oracle.
//!
//! Nothing on the production path goes through here; tests and
//! [`crate::steering::assemblage_oracle`] compare against it.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Effect, Vec3};
use crate::tolerance::STRUCTURAL;

pub type C64 = Complex64;

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity() -> Matrix2<C64> {
    Matrix2::identity()
}

pub fn sigma_x() -> Matrix2<C64> {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Matrix2<C64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// A 2x2 Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseOperator(pub Matrix2<C64>);

impl DenseOperator {
    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let eig = self.0.symmetric_eigen();
        let (a, b) = (eig.eigenvalues[0], eig.eigenvalues[1]);
        if a <= b {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// `sigma_y M^T sigma_y`.
    pub fn universal_not(&self) -> DenseOperator {
        DenseOperator(sigma_y() * self.0.transpose() * sigma_y())
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Expands `t I + b . sigma`.
pub fn to_matrix(e: &Effect) -> DenseOperator {
    let s = identity() * c(e.t, 0.0)
        + sigma_x() * c(e.b.x, 0.0)
        + sigma_y() * c(e.b.y, 0.0)
        + sigma_z() * c(e.b.z, 0.0);
    DenseOperator(s)
}

/// Reads Pauli coefficients back off a Hermitian matrix.
pub fn from_matrix(m: &DenseOperator) -> Result<Effect> {
    let a = m.0;
    let dev = (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > STRUCTURAL {
        return Err(Error::NotHermitian(dev));
    }
    let t = 0.5 * (a[(0, 0)].re + a[(1, 1)].re);
    let bx = 0.5 * (a[(0, 1)].re + a[(1, 0)].re);
    let by = 0.5 * (a[(1, 0)].im - a[(0, 1)].im);
    let bz = 0.5 * (a[(0, 0)].re - a[(1, 1)].re);
    Ok(Effect::new(t, Vec3::new(bx, by, bz)))
}

/// Kronecker product `a (x) b` with `a` on the first tensor factor.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|row, col| a[(row / 2, col / 2)] * b[(row % 2, col % 2)])
}

/// Traces out the first qubit of a two-qubit operator.
pub fn partial_trace_first(m: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|j, l| m[(j, l)] + m[(2 + j, 2 + l)])
}
