//! Quantum states and per-event physical states.
//!
//! A `QuantumState` is a density matrix; its expectation functional is the
//! usual trace average. A `PhysicalState` is one concrete event: a context
//! together with a selected joint eigenvector, carrying a process-unique
//! event id. Evaluating an observable on a physical state is only defined
//! for observables measurable in that context; outside it the valuation does
//! not exist and the operation errors.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{hermitian_eigensystem, ComplexMatrix, ComplexVector, Context, Observable};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::rng::standard_normal;

static EVENT_COUNTER: AtomicU64 = AtomicU64::new(0);

fn next_event_id() -> u64 {
    EVENT_COUNTER.fetch_add(1, Ordering::Relaxed)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite (all
/// within the configured slack).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    rho: ComplexMatrix,
}

impl QuantumState {
    pub fn new(rho: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = rho.hermiticity_residual();
        if residual > tol.hermiticity {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tol.hermiticity,
            });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > tol.state || trace.im.abs() > tol.state {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let eig = hermitian_eigensystem(&rho, tol)?;
        if eig.values[0] < -tol.state {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: eig.values[0],
            });
        }
        Ok(Self { rho })
    }

    /// For states positive by construction (pure projectors, mixtures,
    /// partial traces); skips the eigenvalue check.
    fn new_unchecked(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    /// Pure state `|ψ⟩⟨ψ|` from a normalized vector.
    pub fn pure(psi: &ComplexVector, tol: &Tolerances) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > tol.unit_vector {
            return Err(Error::NotUnit { norm });
        }
        let normalized = psi.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(Self::new_unchecked(normalized.outer(&normalized)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64))
    }

    /// Random full-rank state `GG†/Tr(GG†)` with complex normal `G`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut g = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] = Complex64::new(standard_normal(rng), standard_normal(rng));
            }
        }
        let gram = &g * &g.adjoint();
        let trace = gram.trace().re;
        Self::new_unchecked(gram.scale_re(1.0 / trace))
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    /// Reduced state of one factor of a `dim_a × dim_b` bipartite system.
    pub fn partial_trace(&self, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<Self> {
        if dim_a * dim_b != self.dim() {
            return Err(Error::DimensionMismatch {
                left: dim_a * dim_b,
                right: self.dim(),
            });
        }
        let rho = &self.rho;
        let reduced = match keep {
            Subsystem::A => {
                let mut out = ComplexMatrix::zeros(dim_a);
                for i in 0..dim_a {
                    for j in 0..dim_a {
                        let mut acc = Complex64::ZERO;
                        for k in 0..dim_b {
                            acc += rho[(i * dim_b + k, j * dim_b + k)];
                        }
                        out[(i, j)] = acc;
                    }
                }
                out
            }
            Subsystem::B => {
                let mut out = ComplexMatrix::zeros(dim_b);
                for k in 0..dim_b {
                    for l in 0..dim_b {
                        let mut acc = Complex64::ZERO;
                        for i in 0..dim_a {
                            acc += rho[(i * dim_b + k, i * dim_b + l)];
                        }
                        out[(k, l)] = acc;
                    }
                }
                out
            }
        };
        Ok(Self::new_unchecked(reduced))
    }
}

/// Which factor of a bipartite system to keep when tracing out the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Quantum expectation `Re Tr(ρA)`.
pub fn quantum_average(state: &QuantumState, a: &Observable) -> Result<f64> {
    if state.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: a.dim(),
        });
    }
    Ok((state.rho() * a.matrix()).trace().re)
}

/// One concrete measurement event: a context, the selected joint
/// eigenvector, and a process-unique event id. Two events are never
/// identical even when they agree on every observable value.
#[derive(Debug, Clone)]
pub struct PhysicalState {
    context: Arc<Context>,
    outcome_index: usize,
    event_id: u64,
}

impl PhysicalState {
    pub fn context(&self) -> &Arc<Context> {
        &self.context
    }

    pub fn outcome_index(&self) -> usize {
        self.outcome_index
    }

    pub fn event_id(&self) -> u64 {
        self.event_id
    }
}

/// Precomputed Born weights of a (state, context) pair, for repeated
/// sampling. Weights are `⟨e_k|ρ|e_k⟩` over the context basis.
#[derive(Debug, Clone)]
pub struct BornSampler {
    context: Arc<Context>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BornSampler {
    pub fn new(state: &QuantumState, context: Arc<Context>, tol: &Tolerances) -> Result<Self> {
        if state.dim() != context.dim() {
            return Err(Error::DimensionMismatch {
                left: state.dim(),
                right: context.dim(),
            });
        }
        let weights: Vec<f64> = context
            .basis()
            .iter()
            .map(|e| state.rho().expectation(e).re.max(0.0))
            .collect();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.weight_sum {
            return Err(Error::DegenerateWeights { total });
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self {
            context,
            weights,
            cumulative,
        })
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.context
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Draw one fresh physical state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhysicalState {
        let total = *self.cumulative.last().unwrap();
        let target: f64 = rng.random::<f64>() * total;
        let mut index = self.cumulative.len() - 1;
        for (k, &c) in self.cumulative.iter().enumerate() {
            if target < c {
                index = k;
                break;
            }
        }
        PhysicalState {
            context: Arc::clone(&self.context),
            outcome_index: index,
            event_id: next_event_id(),
        }
    }
}

/// Sample one physical state of `state` in `context` with Born weights.
pub fn sample_physical_state<R: Rng + ?Sized>(
    state: &QuantumState,
    context: &Arc<Context>,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<PhysicalState> {
    Ok(BornSampler::new(state, Arc::clone(context), tol)?.sample(rng))
}

/// Value of `a` on this event. Defined only when `a` is measurable (diagonal)
/// in the event's context; otherwise `NonCommuting`.
pub fn evaluate(phi: &PhysicalState, a: &Observable, tol: &Tolerances) -> Result<f64> {
    if a.dim() != phi.context.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: phi.context.dim(),
        });
    }
    let residual = phi.context.diagonalization_residual(a.matrix());
    if residual > tol.context_membership {
        return Err(Error::NonCommuting {
            residual,
            tolerance: tol.context_membership,
        });
    }
    Ok(phi.context.eigenvalue_on(a.matrix(), phi.outcome_index))
}

/// Complex extension of the valuation: split `M = H + iK` into Hermitian
/// parts and return `φ(H) + i·φ(K)`, so `φ(iA) = i·φ(A)`.
pub fn evaluate_complex(
    phi: &PhysicalState,
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Complex64> {
    let h = m.hermitian_part();
    let k = &(m - &m.adjoint()).scale(Complex64::new(0.0, -0.5));
    let h_val = evaluate(phi, &Observable::hermitized(h), tol)?;
    let k_val = evaluate(phi, &Observable::hermitized(k.clone()), tol)?;
    Ok(Complex64::new(h_val, k_val))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

/// Estimate the quantum average of `a` by sampling `n` fresh physical states
/// in `context` and averaging their values.
pub fn monte_carlo_average<R: Rng + ?Sized>(
    state: &QuantumState,
    context: &Arc<Context>,
    a: &Observable,
    n: u64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<AverageEstimate> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if a.dim() != context.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: context.dim(),
        });
    }
    let sampler = BornSampler::new(state, Arc::clone(context), tol)?;
    let residual = context.diagonalization_residual(a.matrix());
    if residual > tol.context_membership {
        return Err(Error::NonCommuting {
            residual,
            tolerance: tol.context_membership,
        });
    }
    let values: Vec<f64> = (0..context.dim())
        .map(|k| context.eigenvalue_on(a.matrix(), k))
        .collect();

    let mut samples = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let phi = sampler.sample(rng);
        samples.push(values[phi.outcome_index]);
    }
    Ok(estimate_from_samples(&samples))
}

/// Mean and standard error of a sample; a constant sample has both exact.
pub fn estimate_from_samples(samples: &[f64]) -> AverageEstimate {
    let n = samples.len() as u64;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return AverageEstimate {
            mean: min,
            std_error: 0.0,
            n_samples: n,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    AverageEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_samples: n,
    }
}

/// Equivalence of events: same context (by pointer or by basis) and same
/// outcome index. Event ids are deliberately ignored: equivalence is coarser
/// than identity.
pub fn are_equivalent(phi1: &PhysicalState, phi2: &PhysicalState, tol: &Tolerances) -> bool {
    let same_context = Arc::ptr_eq(&phi1.context, &phi2.context)
        || phi1.context.same_basis(&phi2.context, tol.projector);
    same_context && phi1.outcome_index == phi2.outcome_index
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{joint_diagonalize, pauli_x, pauli_z};
    use crate::rng::seeded;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn sigma_z_context() -> Arc<Context> {
        Arc::new(joint_diagonalize(&[pauli_z()], &TOL).unwrap())
    }

    #[test]
    fn quantum_average_examples() {
        let rho = QuantumState::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), &TOL).unwrap();
        assert_eq!(quantum_average(&rho, &pauli_z()).unwrap(), 1.0);

        let mixed = QuantumState::maximally_mixed(2);
        assert_eq!(quantum_average(&mixed, &pauli_z()).unwrap(), 0.0);

        // A = λI averages to λ on any state.
        let any = QuantumState::random(3, &mut seeded(5));
        let lam = Observable::scaled_identity(3, 2.5);
        assert!((quantum_average(&any, &lam).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn state_validation() {
        // Trace 2 rejected.
        let err = QuantumState::new(ComplexMatrix::identity(2), &TOL).unwrap_err();
        assert!(matches!(err, Error::TraceNotOne { .. }));
        // Negative eigenvalue rejected.
        let err = QuantumState::new(ComplexMatrix::from_real_diag(&[1.5, -0.5]), &TOL).unwrap_err();
        assert!(matches!(err, Error::NegativeEigenvalue { .. }));
    }

    #[test]
    fn deterministic_weight_always_selects_it() {
        let ctx = sigma_z_context();
        // Basis vector 0 of the σz context is |1⟩ (eigenvalue -1).
        let rho = QuantumState::new(ComplexMatrix::from_real_diag(&[0.0, 1.0]), &TOL).unwrap();
        let mut rng = seeded(11);
        for _ in 0..50 {
            let phi = sample_physical_state(&rho, &ctx, &mut rng, &TOL).unwrap();
            assert_eq!(phi.outcome_index(), 0);
        }
    }

    #[test]
    fn mixed_state_samples_half_half() {
        let ctx = sigma_z_context();
        let rho = QuantumState::maximally_mixed(2);
        let sampler = BornSampler::new(&rho, Arc::clone(&ctx), &TOL).unwrap();
        let mut rng = seeded(97);
        let n = 100_000;
        let mut zeros = 0u64;
        for _ in 0..n {
            if sampler.sample(&mut rng).outcome_index() == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn evaluate_constants_and_products() {
        let ctx = sigma_z_context();
        let rho = QuantumState::maximally_mixed(2);
        let phi = sample_physical_state(&rho, &ctx, &mut seeded(3), &TOL).unwrap();

        // φ(λI) = λ.
        let lam = Observable::scaled_identity(2, -4.25);
        assert_eq!(evaluate(&phi, &lam, &TOL).unwrap(), -4.25);

        // φ(Q²) = φ(Q)².
        let q = pauli_z();
        let q2 = Observable::new(q.matrix() * q.matrix(), &TOL).unwrap();
        let v = evaluate(&phi, &q, &TOL).unwrap();
        assert!((evaluate(&phi, &q2, &TOL).unwrap() - v * v).abs() < 1e-12);

        // σx is not measurable in the σz context.
        assert!(matches!(
            evaluate(&phi, &pauli_x(), &TOL),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn evaluate_complex_is_i_linear() {
        let ctx = sigma_z_context();
        let rho = QuantumState::maximally_mixed(2);
        let phi = sample_physical_state(&rho, &ctx, &mut seeded(8), &TOL).unwrap();
        let a = pauli_z();
        let ia = a.matrix().scale(Complex64::new(0.0, 1.0));
        let va = evaluate(&phi, &a, &TOL).unwrap();
        let via = evaluate_complex(&phi, &ia, &TOL).unwrap();
        assert!((via - Complex64::new(0.0, va)).norm() < 1e-12);
    }

    #[test]
    fn monte_carlo_eigenstate_is_exact() {
        let ctx = sigma_z_context();
        let rho = QuantumState::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), &TOL).unwrap();
        let est = monte_carlo_average(&rho, &ctx, &pauli_z(), 137, &mut seeded(2), &TOL).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.n_samples, 137);
    }

    #[test]
    fn monte_carlo_mixed_converges_to_zero() {
        let ctx = sigma_z_context();
        let rho = QuantumState::maximally_mixed(2);
        let est =
            monte_carlo_average(&rho, &ctx, &pauli_z(), 100_000, &mut seeded(17), &TOL).unwrap();
        assert!(est.mean.abs() < 0.02, "mean = {}", est.mean);

        // |+x⟩⟨+x| has exact σz average 0 as well.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus_x = QuantumState::pure(&ComplexVector::from_real(&[s, s]), &TOL).unwrap();
        assert!(quantum_average(&plus_x, &pauli_z()).unwrap().abs() < 1e-12);
        let est =
            monte_carlo_average(&plus_x, &ctx, &pauli_z(), 100_000, &mut seeded(19), &TOL).unwrap();
        assert!(est.mean.abs() < 0.02, "mean = {}", est.mean);
    }

    #[test]
    fn equivalence_ignores_event_ids() {
        let ctx = sigma_z_context();
        let rho = QuantumState::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), &TOL).unwrap();
        let mut rng = seeded(23);
        let phi1 = sample_physical_state(&rho, &ctx, &mut rng, &TOL).unwrap();
        let phi2 = sample_physical_state(&rho, &ctx, &mut rng, &TOL).unwrap();
        assert_ne!(phi1.event_id(), phi2.event_id());
        assert!(are_equivalent(&phi1, &phi2, &TOL));
        assert!(are_equivalent(&phi1, &phi1, &TOL));

        let other = PhysicalState {
            context: Arc::clone(&ctx),
            outcome_index: 1 - phi1.outcome_index(),
            event_id: phi1.event_id(),
        };
        assert!(!are_equivalent(&phi1, &other, &TOL));
    }

    #[test]
    fn event_ids_strictly_increase() {
        let ctx = sigma_z_context();
        let rho = QuantumState::maximally_mixed(2);
        let mut rng = seeded(31);
        let mut last = sample_physical_state(&rho, &ctx, &mut rng, &TOL)
            .unwrap()
            .event_id();
        for _ in 0..100 {
            let id = sample_physical_state(&rho, &ctx, &mut rng, &TOL)
                .unwrap()
                .event_id();
            assert!(id > last);
            last = id;
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        // ρ = |0⟩⟨0| ⊗ ½I: reduced A is pure, reduced B is mixed.
        let a = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let b = ComplexMatrix::identity(2).scale_re(0.5);
        let rho = QuantumState::new(a.kron(&b), &TOL).unwrap();
        let ra = rho.partial_trace(2, 2, Subsystem::A).unwrap();
        let rb = rho.partial_trace(2, 2, Subsystem::B).unwrap();
        assert!(ra.rho().max_abs_diff(&a) < 1e-12);
        assert!(rb.rho().max_abs_diff(&b) < 1e-12);
    }
}
