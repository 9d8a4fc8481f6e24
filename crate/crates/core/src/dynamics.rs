//! Heisenberg-picture evolution: observables rotate, contexts stay fixed.
//!
//! The propagator is computed in closed form from the Hamiltonian's
//! eigensystem. An evolved observable may leave a physical state's context;
//! evaluating it then errors instead of silently projecting, because the
//! value no longer exists in that context.

use num_complex::Complex64;

use crate::algebra::{commutator, hermitian_eigensystem, ComplexMatrix, Observable};
use crate::config::{Tolerances, HBAR};
use crate::error::{Error, Result};
use crate::states::{evaluate, PhysicalState};

/// Generator of time evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    observable: Observable,
}

impl Hamiltonian {
    pub fn new(observable: Observable) -> Self {
        Self { observable }
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }
}

/// `U(t) = exp(-iHt/ħ)` with ħ from the config, via the eigensystem of `H`.
pub fn unitary_at(h: &Hamiltonian, t: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    unitary_at_with(h, t, HBAR, tol)
}

/// `U(t) = exp(-iHt/ħ)` with an explicit ħ.
pub fn unitary_at_with(
    h: &Hamiltonian,
    t: f64,
    hbar: f64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFiniteScalar { name: "t" });
    }
    if !hbar.is_finite() || hbar == 0.0 {
        return Err(Error::NonFiniteScalar { name: "hbar" });
    }
    let eig = hermitian_eigensystem(h.observable().matrix(), tol)?;
    let mut u = ComplexMatrix::zeros(h.dim());
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let phase = Complex64::from_polar(1.0, -lambda * t / hbar);
        u = &u + &v.outer(v).scale(phase);
    }
    Ok(u)
}

/// `A(t) = U†(t) A U(t) = exp(iHt/ħ) A exp(-iHt/ħ)`, the solution of
/// `dA/dt = (i/ħ)[H, A]` with `A(0) = A`.
pub fn heisenberg_evolve(
    a: &Observable,
    h: &Hamiltonian,
    t: f64,
    tol: &Tolerances,
) -> Result<Observable> {
    if a.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: h.dim(),
        });
    }
    // An exactly conserved observable does not move; skip the conjugation so
    // conservation holds bit for bit.
    if commutator(h.observable().matrix(), a.matrix())?.max_abs() == 0.0 {
        return Ok(a.clone());
    }
    let u = unitary_at(h, t, tol)?;
    let evolved = &(&u.adjoint() * a.matrix()) * &u;
    // Conjugation preserves Hermiticity exactly; symmetrize away rounding.
    Ok(Observable::hermitized(evolved))
}

/// `φ_t(A) = φ_0(A(t))`. Errors with `NonCommuting` when `A(t)` has left the
/// event's context, where only probabilistic statements remain.
pub fn evolved_evaluate(
    phi: &PhysicalState,
    a: &Observable,
    h: &Hamiltonian,
    t: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let at = heisenberg_evolve(a, h, t, tol)?;
    evaluate(phi, &at, tol)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{commutator, joint_diagonalize, pauli_x, pauli_y, pauli_z};
    use crate::config::Tolerances;
    use crate::rng::seeded;
    use crate::states::{sample_physical_state, QuantumState};

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn unitary_at_zero_is_identity() {
        let h = Hamiltonian::new(pauli_z());
        let u = unitary_at(&h, 0.0, &TOL).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn sigma_z_quarter_period() {
        let h = Hamiltonian::new(pauli_z());
        let u = unitary_at(&h, std::f64::consts::FRAC_PI_2, &TOL).unwrap();
        let expect = ComplexMatrix::from_diag(&[
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
        ]);
        assert!(u.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn group_law_and_unitarity() {
        let h = Hamiltonian::new(Observable::random(4, &mut seeded(41)));
        let (t1, t2) = (0.7, -2.3);
        let u1 = unitary_at(&h, t1, &TOL).unwrap();
        let u2 = unitary_at(&h, t2, &TOL).unwrap();
        let u12 = unitary_at(&h, t1 + t2, &TOL).unwrap();
        assert!((&u1 * &u2).max_abs_diff(&u12) < 1e-9);
        let gram = &u1.adjoint() * &u1;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);
    }

    #[test]
    fn conserved_observable_is_constant() {
        let h = Hamiltonian::new(pauli_z());
        let a = pauli_z();
        for t in [0.0, 0.5, 3.0, -7.1] {
            let at = heisenberg_evolve(&a, &h, t, &TOL).unwrap();
            assert!(at.matrix().max_abs_diff(a.matrix()) < 1e-12);
        }
    }

    #[test]
    fn sigma_x_precesses_under_sigma_z() {
        // A(t) = cos(2t)σx - sin(2t)σy for H = σz, ħ = 1.
        let h = Hamiltonian::new(pauli_z());
        for t in [0.3, 1.0, 2.7] {
            let at = heisenberg_evolve(&pauli_x(), &h, t, &TOL).unwrap();
            let expect = &pauli_x().matrix().scale_re((2.0 * t).cos())
                - &pauli_y().matrix().scale_re((2.0 * t).sin());
            assert!(at.matrix().max_abs_diff(&expect) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn evolve_at_zero_is_identity_map() {
        let h = Hamiltonian::new(Observable::random(4, &mut seeded(43)));
        let a = Observable::random(4, &mut seeded(44));
        let a0 = heisenberg_evolve(&a, &h, 0.0, &TOL).unwrap();
        assert!(a0.matrix().max_abs_diff(a.matrix()) < 1e-12);
    }

    #[test]
    fn spectrum_preserved_under_evolution() {
        use crate::algebra::operator_norm;
        let h = Hamiltonian::new(Observable::random(4, &mut seeded(45)));
        let a = Observable::random(4, &mut seeded(46));
        let at = heisenberg_evolve(&a, &h, 1.9, &TOL).unwrap();
        let n0 = operator_norm(&a, &TOL).unwrap();
        let n1 = operator_norm(&at, &TOL).unwrap();
        assert!((n0 - n1).abs() < 1e-8);
    }

    #[test]
    fn evolved_evaluate_conserved_and_exiting() {
        let ctx = Arc::new(joint_diagonalize(&[pauli_z()], &TOL).unwrap());
        let rho = QuantumState::maximally_mixed(2);
        let phi = sample_physical_state(&rho, &ctx, &mut seeded(47), &TOL).unwrap();
        let h = Hamiltonian::new(pauli_z());

        let v0 = evaluate(&phi, &pauli_z(), &TOL).unwrap();
        for t in [0.0, 0.4, 12.0] {
            // [H, σz] = 0: the value never changes.
            assert_eq!(evolved_evaluate(&phi, &pauli_z(), &h, t, &TOL).unwrap(), v0);
        }
        assert_eq!(
            commutator(h.observable().matrix(), pauli_z().matrix())
                .unwrap()
                .max_abs(),
            0.0
        );

        // σx(t) leaves the σz context for generic t.
        assert!(matches!(
            evolved_evaluate(&phi, &pauli_x(), &h, 0.3, &TOL),
            Err(Error::NonCommuting { .. })
        ));
        // t = 0 keeps σx out of the σz context too.
        assert!(evolved_evaluate(&phi, &pauli_x(), &h, 0.0, &TOL).is_err());

        // t = 0 under a non-commuting Hamiltonian reduces to plain
        // evaluation.
        let hx = Hamiltonian::new(pauli_x());
        let at_zero = evolved_evaluate(&phi, &pauli_z(), &hx, 0.0, &TOL).unwrap();
        assert!((at_zero - v0).abs() < 1e-12);
    }
}
