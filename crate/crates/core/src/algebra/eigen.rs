//! Hermitian eigendecomposition via cyclic Jacobi rotations with complex
//! phase, plus the degeneracy-merged spectral form used by analyzers.

use num_complex::Complex64;

use crate::algebra::matrix::{ComplexMatrix, ComplexVector};
use crate::algebra::Observable;
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Raw eigenpairs, eigenvalues ascending, eigenvectors orthonormal.
#[derive(Debug, Clone)]
pub(crate) struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<ComplexVector>,
}

fn max_off_diagonal(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut worst = 0.0f64;
    for p in 0..d {
        for q in (p + 1)..d {
            worst = worst.max(a[(p, q)].norm());
        }
    }
    worst
}

/// Diagonalize a Hermitian matrix. The input is symmetrized first so callers
/// may pass matrices that are Hermitian only within tolerance.
///
/// Each rotation annihilates one off-diagonal pair; sweeps repeat until the
/// largest off-diagonal magnitude falls below `jacobi_off_diagonal` scaled by
/// the largest input entry, or the sweep cap is hit.
pub(crate) fn hermitian_eigensystem(m: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let d = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(d);

    let scale = a.max_abs().max(1.0);
    let thresh = tol.jacobi_off_diagonal * scale;

    let mut converged = d == 1;
    for _ in 0..tol.jacobi_max_sweeps {
        if max_off_diagonal(&a) <= thresh {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && max_off_diagonal(&a) > thresh {
        return Err(Error::ConvergenceFailure {
            sweeps: tol.jacobi_max_sweeps,
            off_diagonal: max_off_diagonal(&a),
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));

    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors: Vec<ComplexVector> = order
        .iter()
        .map(|&k| ComplexVector::from_vec((0..d).map(|i| v[(i, k)]).collect()))
        .collect();
    Ok(EigenSystem { values, vectors })
}

/// One Jacobi rotation zeroing the (p, q) entry.
///
/// With `a_pq = β·exp(iφ)`, the plane rotation has block
/// `[[c, s·exp(iφ)], [-s·exp(-iφ), c]]` where `t = s/c` solves
/// `t² - 2τt - 1 = 0`, `τ = (a_pp - a_qq)/(2β)`; the smaller-magnitude root
/// keeps the rotation angle below π/4.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let phase = apq / beta;
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;
    let tau = (alpha - gamma) / (2.0 * beta);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let sp = phase * s; // s·exp(iφ)
    let spc = phase.conj() * s; // s·exp(-iφ)

    let d = a.dim();
    // A ← A·R (columns p, q)
    for i in 0..d {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c - aiq * spc;
        a[(i, q)] = aip * sp + aiq * c;
    }
    // A ← R†·A (rows p, q)
    for j in 0..d {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c - aqj * sp;
        a[(q, j)] = apj * spc + aqj * c;
    }
    // The closed forms for the pivot entries are exact; use them instead of
    // the rounded generic updates.
    a[(p, p)] = Complex64::new(alpha - t * beta, 0.0);
    a[(q, q)] = Complex64::new(gamma + t * beta, 0.0);
    a[(p, q)] = Complex64::ZERO;
    a[(q, p)] = Complex64::ZERO;

    // V ← V·R
    for i in 0..d {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c - viq * spc;
        v[(i, q)] = vip * sp + viq * c;
    }
}

/// Eigenvalues merged over near-degeneracies, with one orthogonal projector
/// per distinct eigenvalue. Branch labels of an analyzer come from here.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Rebuild `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.projectors[0].dim();
        let mut out = ComplexMatrix::zeros(d);
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out = &out + &p.scale_re(*lambda);
        }
        out
    }
}

/// Spectral decomposition of an observable. Consecutive eigenvalues closer
/// than the degeneracy tolerance share one projector; the merged eigenvalue
/// is their mean.
pub fn spectral_decompose(a: &Observable, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let eig = hermitian_eigensystem(a.matrix(), tol)?;
    let groups = merge_degenerate(&eig.values, tol.degeneracy);

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for group in groups {
        let mean = group.iter().map(|&k| eig.values[k]).sum::<f64>() / group.len() as f64;
        let mut proj = ComplexMatrix::zeros(a.dim());
        for &k in &group {
            proj = &proj + &eig.vectors[k].outer(&eig.vectors[k]);
        }
        eigenvalues.push(mean);
        projectors.push(proj);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Group indices of ascending values whose consecutive gaps stay within
/// `tol`.
pub(crate) fn merge_degenerate(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &value) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(group) if value - values[*group.last().unwrap()] <= tol => group.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// `max |λ|` over the spectrum; equals the square root of the largest
/// eigenvalue of `A*A`.
pub fn operator_norm(a: &Observable, tol: &Tolerances) -> Result<f64> {
    let eig = hermitian_eigensystem(a.matrix(), tol)?;
    Ok(eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_x, pauli_z};

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn sigma_z_decomposition() {
        let d = spectral_decompose(&pauli_z(), &TOL).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 1.0]);
        let p_minus = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let p_plus = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(d.projectors()[0].max_abs_diff(&p_minus) < 1e-12);
        assert!(d.projectors()[1].max_abs_diff(&p_plus) < 1e-12);
    }

    #[test]
    fn identity_fully_degenerate() {
        let id = Observable::identity(3);
        let d = spectral_decompose(&id, &TOL).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!(d.projectors()[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn sigma_x_projectors() {
        let d = spectral_decompose(&pauli_x(), &TOL).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-12);
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-12);
        // P∓ = (I ∓ σx)/2, idempotent, and the observable reconstructs.
        let id = ComplexMatrix::identity(2);
        let expect_minus = (&id - pauli_x().matrix()).scale_re(0.5);
        let expect_plus = (&id + pauli_x().matrix()).scale_re(0.5);
        assert!(d.projectors()[0].max_abs_diff(&expect_minus) < 1e-10);
        assert!(d.projectors()[1].max_abs_diff(&expect_plus) < 1e-10);
        for p in d.projectors() {
            assert!((p * p).max_abs_diff(p) < 1e-10);
            assert!(p.hermiticity_residual() < 1e-10);
        }
        assert!(d.reconstruct().max_abs_diff(pauli_x().matrix()) < 1e-10);
    }

    #[test]
    fn operator_norm_examples() {
        let zero = Observable::new(ComplexMatrix::zeros(2), &TOL).unwrap();
        assert_eq!(operator_norm(&zero, &TOL).unwrap(), 0.0);
        assert!((operator_norm(&pauli_z(), &TOL).unwrap() - 1.0).abs() < 1e-12);

        // 3σx + 4σz has eigenvalues ±5.
        let m = &pauli_x().matrix().scale_re(3.0) + &pauli_z().matrix().scale_re(4.0);
        let obs = Observable::new(m, &TOL).unwrap();
        assert!((operator_norm(&obs, &TOL).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn merge_groups_chain_within_tolerance() {
        let groups = merge_degenerate(&[0.0, 1e-9, 2e-9, 1.0], 1e-8);
        assert_eq!(groups, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn dim_16_reconstruction() {
        let a = Observable::random(16, &mut crate::rng::seeded(163));
        let d = spectral_decompose(&a, &TOL).unwrap();
        assert!(d.reconstruct().max_abs_diff(a.matrix()) < 1e-8);
        let mut sum = ComplexMatrix::zeros(16);
        for p in d.projectors() {
            sum = &sum + p;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-9);
    }
}
