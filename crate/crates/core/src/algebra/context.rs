//! Maximal commuting families and their joint eigenbases.
//!
//! A context is the set of quantities measurable in a single experiment: a
//! family of mutually commuting observables together with one orthonormal
//! basis that diagonalizes every member. Residual degeneracies are resolved
//! deterministically so identical inputs always produce the identical basis.

use num_complex::Complex64;

use crate::algebra::eigen::{hermitian_eigensystem, merge_degenerate};
use crate::algebra::matrix::{ComplexMatrix, ComplexVector};
use crate::algebra::{is_commuting_family, max_pairwise_commutator, Observable};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// One member of a context: the observable and its eigenvalue on each basis
/// vector.
#[derive(Debug, Clone)]
pub struct ContextMember {
    pub observable: Observable,
    pub eigenvalues: Vec<f64>,
}

/// Joint orthonormal eigenbasis of a commuting family.
#[derive(Debug, Clone)]
pub struct Context {
    dim: usize,
    basis: Vec<ComplexVector>,
    members: Vec<ContextMember>,
}

impl Context {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[ComplexVector] {
        &self.basis
    }

    pub fn basis_vector(&self, k: usize) -> &ComplexVector {
        &self.basis[k]
    }

    pub fn members(&self) -> &[ContextMember] {
        &self.members
    }

    /// Largest `|⟨e_i|M|e_j⟩|` over `i ≠ j`: zero exactly when the basis
    /// diagonalizes `M`.
    pub fn diagonalization_residual(&self, m: &ComplexMatrix) -> f64 {
        let mut worst = 0.0f64;
        let images: Vec<ComplexVector> = self.basis.iter().map(|e| m.matvec(e)).collect();
        for i in 0..self.dim {
            for (j, image) in images.iter().enumerate() {
                if i != j {
                    worst = worst.max(self.basis[i].inner(image).norm());
                }
            }
        }
        worst
    }

    /// Whether `m` is measurable in this context.
    pub fn contains(&self, m: &ComplexMatrix, tol: &Tolerances) -> bool {
        m.dim() == self.dim && self.diagonalization_residual(m) <= tol.context_membership
    }

    /// Eigenvalue of `m` on basis vector `k`, i.e. `Re ⟨e_k|m|e_k⟩`.
    pub fn eigenvalue_on(&self, m: &ComplexMatrix, k: usize) -> f64 {
        m.expectation(&self.basis[k]).re
    }

    /// Component-wise basis comparison (same ordering required).
    pub fn same_basis(&self, other: &Context, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .basis
                .iter()
                .zip(&other.basis)
                .all(|(a, b)| a.max_abs_diff(b) <= tol)
    }

    /// Largest deviation of `⟨e_i|e_j⟩` from `δ_ij`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let expected = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((self.basis[i].inner(&self.basis[j]) - expected).norm());
            }
        }
        worst
    }
}

/// Construct the joint eigenbasis of a commuting family.
///
/// The basis is refined observable by observable: blocks that share all
/// eigenvalue labels so far are re-diagonalized against the next member.
/// Final order is lexicographic in the eigenvalue tuples (ascending), ties
/// keeping refinement order, and each vector's largest component is rotated
/// to the positive real axis. Identical inputs therefore yield bit-identical
/// contexts.
pub fn joint_diagonalize(observables: &[Observable], tol: &Tolerances) -> Result<Context> {
    let Some(first) = observables.first() else {
        return Err(Error::BadShape { dim: 0, entries: 0 });
    };
    let dim = first.dim();
    if !is_commuting_family(observables, tol.commutation)? {
        let residual = max_pairwise_commutator(observables)?;
        return Err(Error::NotCommuting {
            residual,
            tolerance: tol.commutation,
        });
    }

    struct Block {
        vectors: Vec<ComplexVector>,
        labels: Vec<f64>,
    }

    let mut blocks = vec![Block {
        vectors: (0..dim)
            .map(|k| ComplexVector::basis_state(dim, k))
            .collect(),
        labels: Vec::new(),
    }];

    for obs in observables {
        let mut refined = Vec::new();
        for block in blocks {
            if block.vectors.len() == 1 {
                let value = obs.matrix().expectation(&block.vectors[0]).re;
                let mut labels = block.labels.clone();
                labels.push(value);
                refined.push(Block {
                    vectors: block.vectors,
                    labels,
                });
                continue;
            }
            // Diagonalize the member restricted to this block's span.
            let k = block.vectors.len();
            let mut sub = ComplexMatrix::zeros(k);
            let images: Vec<ComplexVector> = block
                .vectors
                .iter()
                .map(|v| obs.matrix().matvec(v))
                .collect();
            for r in 0..k {
                for c in 0..k {
                    sub[(r, c)] = block.vectors[r].inner(&images[c]);
                }
            }
            let eig = hermitian_eigensystem(&sub, tol)?;
            let rotated: Vec<ComplexVector> = (0..k)
                .map(|i| {
                    let mut v = ComplexVector::from_vec(vec![Complex64::ZERO; dim]);
                    for r in 0..k {
                        v = v.add_scaled(&block.vectors[r], eig.vectors[i][r]);
                    }
                    v
                })
                .collect();
            for group in merge_degenerate(&eig.values, tol.degeneracy) {
                let mean = group.iter().map(|&i| eig.values[i]).sum::<f64>() / group.len() as f64;
                let mut labels = block.labels.clone();
                labels.push(mean);
                refined.push(Block {
                    vectors: group.iter().map(|&i| rotated[i].clone()).collect(),
                    labels,
                });
            }
        }
        blocks = refined;
    }

    blocks.sort_by(|a, b| {
        a.labels
            .iter()
            .zip(&b.labels)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let basis: Vec<ComplexVector> = blocks
        .into_iter()
        .flat_map(|b| b.vectors)
        .map(|v| canonical_phase(&v))
        .collect();

    let members = observables
        .iter()
        .map(|obs| ContextMember {
            observable: obs.clone(),
            eigenvalues: basis
                .iter()
                .map(|e| obs.matrix().expectation(e).re)
                .collect(),
        })
        .collect();

    let ctx = Context {
        dim,
        basis,
        members,
    };

    if ctx.orthonormality_residual() > tol.projector {
        return Err(Error::ConvergenceFailure {
            sweeps: tol.jacobi_max_sweeps,
            off_diagonal: ctx.orthonormality_residual(),
        });
    }
    for obs in observables {
        let residual = ctx.diagonalization_residual(obs.matrix());
        if residual > tol.context_membership {
            return Err(Error::ConvergenceFailure {
                sweeps: tol.jacobi_max_sweeps,
                off_diagonal: residual,
            });
        }
    }
    Ok(ctx)
}

/// Rotate the largest-magnitude component (first on ties) onto the positive
/// real axis.
fn canonical_phase(v: &ComplexVector) -> ComplexVector {
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for (i, c) in v.data().iter().enumerate() {
        let n = c.norm();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    if best_norm == 0.0 {
        return v.clone();
    }
    let phase = v[best] / best_norm;
    v.scale(phase.conj())
}
