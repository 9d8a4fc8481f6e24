//! Finite-dimensional complex matrix *-algebra: Hermitian observables,
//! commutators, spectral and joint diagonalization, operator norm.

mod context;
mod eigen;
mod matrix;

pub use context::{joint_diagonalize, Context, ContextMember};
pub use eigen::{operator_norm, spectral_decompose, SpectralDecomposition};
pub use matrix::{ComplexMatrix, ComplexVector};

pub(crate) use eigen::hermitian_eigensystem;

use num_complex::Complex64;
use rand::Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// A Hermitian element of the algebra: the carrier of measurable quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    /// Validates Hermiticity against `tol.hermiticity`.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = matrix.hermiticity_residual();
        if residual > tol.hermiticity {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tol.hermiticity,
            });
        }
        Ok(Self { matrix })
    }

    /// Symmetrize `(M + M†)/2` and wrap. For matrices Hermitian by
    /// construction up to rounding.
    pub fn hermitized(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn scaled_identity(dim: usize, lambda: f64) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(lambda),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Draw from the Gaussian unitary ensemble: `(G + G†)/2` with standard
    /// complex normal entries.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut g = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] = Complex64::new(standard_normal(rng), standard_normal(rng));
            }
        }
        Self::hermitized(g)
    }
}

/// `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(&(a * b) - &(b * a))
}

/// True iff every pairwise commutator has max-norm at most `tol`.
pub fn is_commuting_family(observables: &[Observable], tol: f64) -> Result<bool> {
    Ok(max_pairwise_commutator(observables)? <= tol)
}

/// Largest max-norm over all pairwise commutators (zero for families of
/// size < 2).
pub fn max_pairwise_commutator(observables: &[Observable]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, a) in observables.iter().enumerate() {
        for b in &observables[i + 1..] {
            worst = worst.max(commutator(a.matrix(), b.matrix())?.max_abs());
        }
    }
    Ok(worst)
}

pub fn pauli_x() -> Observable {
    Observable {
        matrix: ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
    }
}

pub fn pauli_y() -> Observable {
    Observable {
        matrix: ComplexMatrix::new(
            2,
            vec![
                Complex64::ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::ZERO,
            ],
        )
        .unwrap(),
    }
}

pub fn pauli_z() -> Observable {
    Observable {
        matrix: ComplexMatrix::from_real_diag(&[1.0, -1.0]),
    }
}

/// Kronecker product of two observables (Hermitian by construction).
pub fn tensor(a: &Observable, b: &Observable) -> Observable {
    Observable {
        matrix: a.matrix().kron(b.matrix()),
    }
}
