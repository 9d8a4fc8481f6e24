//! The analyzer/detector pipeline.
//!
//! An analyzer splits an incoming state into one branch per distinct
//! eigenvalue of its observable. Routing is deterministic given the event's
//! physical state; probability enters only through which physical state was
//! realized. A firing detector collapses the state onto the occupied branch
//! (projection update); a silent detector in a negative experiment removes
//! only its own branch's component.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{
    joint_diagonalize, spectral_decompose, ComplexMatrix, Context, Observable,
    SpectralDecomposition,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::states::{evaluate, BornSampler, PhysicalState, QuantumState};

/// A branching device: one inlet, one exit per distinct eigenvalue of the
/// measured observable, exits labeled by the eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Analyzer {
    observable: Observable,
    decomposition: SpectralDecomposition,
    context: Arc<Context>,
}

impl Analyzer {
    /// Analyzer for one observable, in the context generated by it alone.
    pub fn new(observable: Observable, tol: &Tolerances) -> Result<Self> {
        let context = Arc::new(joint_diagonalize(std::slice::from_ref(&observable), tol)?);
        Self::in_context(observable, context, tol)
    }

    /// Analyzer measuring `observable` inside a shared context, so several
    /// commuting observables can be measured in one experiment.
    pub fn in_context(
        observable: Observable,
        context: Arc<Context>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if observable.dim() != context.dim() {
            return Err(Error::DimensionMismatch {
                left: observable.dim(),
                right: context.dim(),
            });
        }
        let residual = context.diagonalization_residual(observable.matrix());
        if residual > tol.context_membership {
            return Err(Error::NonCommuting {
                residual,
                tolerance: tol.context_membership,
            });
        }
        let decomposition = spectral_decompose(&observable, tol)?;
        Ok(Self {
            observable,
            decomposition,
            context,
        })
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.context
    }

    pub fn branch_count(&self) -> usize {
        self.decomposition.len()
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }
}

/// Result of one individual measurement event.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub branch_index: usize,
    pub outcome_value: f64,
    pub pre_state: QuantumState,
    pub post_state: QuantumState,
    pub phi_event_id: u64,
    pub detected: bool,
}

/// The branch whose eigenvalue matches the event's value of the analyzer
/// observable. Deterministic given the physical state.
pub fn route_nucleus(phi: &PhysicalState, analyzer: &Analyzer, tol: &Tolerances) -> Result<usize> {
    let value = evaluate(phi, analyzer.observable(), tol)?;
    let eigenvalues = analyzer.decomposition().eigenvalues();
    let (best, distance) = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &lambda)| (i, (value - lambda).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("analyzer has at least one branch");
    if distance > tol.branch_match {
        return Err(Error::NoMatchingBranch { value });
    }
    Ok(best)
}

/// `W_i = Tr(ρ P_i)`, clamped to [0, 1].
pub fn branch_probability(state: &QuantumState, analyzer: &Analyzer, i: usize) -> Result<f64> {
    if state.dim() != analyzer.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: analyzer.dim(),
        });
    }
    let projectors = analyzer.decomposition().projectors();
    if i >= projectors.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: projectors.len(),
        });
    }
    let w = (state.rho() * &projectors[i]).trace().re;
    Ok(w.clamp(0.0, 1.0))
}

fn luders_update(
    state: &QuantumState,
    projector: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<QuantumState> {
    let projected = &(projector * state.rho()) * projector;
    let weight = projected.trace().re;
    if weight < tol.zero_probability {
        return Err(Error::ZeroProbabilityBranch {
            branch: usize::MAX,
            weight,
        });
    }
    QuantumState::new(projected.scale_re(1.0 / weight), tol)
}

/// Positive-detection measurement: sample a fresh physical state, route it,
/// and collapse onto the occupied branch.
pub fn detect<R: Rng + ?Sized>(
    state: &QuantumState,
    analyzer: &Analyzer,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<MeasurementRecord> {
    let sampler = BornSampler::new(state, Arc::clone(analyzer.context()), tol)?;
    detect_with_sampler(state, analyzer, &sampler, rng, tol)
}

/// `detect` with a caller-held sampler, for tight measurement loops over the
/// same (state, analyzer) pair.
pub fn detect_with_sampler<R: Rng + ?Sized>(
    state: &QuantumState,
    analyzer: &Analyzer,
    sampler: &BornSampler,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<MeasurementRecord> {
    let phi = sampler.sample(rng);
    let branch = route_nucleus(&phi, analyzer, tol)?;
    let w = branch_probability(state, analyzer, branch)?;
    if w < tol.zero_probability {
        return Err(Error::ZeroProbabilityBranch { branch, weight: w });
    }
    let post_state = luders_update(state, &analyzer.decomposition().projectors()[branch], tol)
        .map_err(|e| match e {
            Error::ZeroProbabilityBranch { weight, .. } => {
                Error::ZeroProbabilityBranch { branch, weight }
            }
            other => other,
        })?;
    Ok(MeasurementRecord {
        branch_index: branch,
        outcome_value: analyzer.decomposition().eigenvalues()[branch],
        pre_state: state.clone(),
        post_state,
        phi_event_id: phi.event_id(),
        detected: true,
    })
}

/// Negative-experiment measurement: a detector sits on one branch only.
///
/// If the nucleus enters the detector branch the detector fires and the
/// state collapses onto that branch. Otherwise nothing fires, yet the state
/// still updates: the detector branch's component is removed,
/// `ρ → P̄ρP̄ / Tr(P̄ρP̄)` with `P̄ = I - P_detector`.
pub fn negative_measurement<R: Rng + ?Sized>(
    state: &QuantumState,
    analyzer: &Analyzer,
    detector_branch: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<MeasurementRecord> {
    if analyzer.branch_count() < 2 {
        return Err(Error::IndexOutOfRange {
            index: detector_branch,
            dim: analyzer.branch_count(),
        });
    }
    if detector_branch >= analyzer.branch_count() {
        return Err(Error::IndexOutOfRange {
            index: detector_branch,
            dim: analyzer.branch_count(),
        });
    }
    let sampler = BornSampler::new(state, Arc::clone(analyzer.context()), tol)?;
    let phi = sampler.sample(rng);
    let branch = route_nucleus(&phi, analyzer, tol)?;
    let eigenvalue = analyzer.decomposition().eigenvalues()[branch];

    if branch == detector_branch {
        let w = branch_probability(state, analyzer, branch)?;
        if w < tol.zero_probability {
            return Err(Error::ZeroProbabilityBranch { branch, weight: w });
        }
        let post_state = luders_update(state, &analyzer.decomposition().projectors()[branch], tol)?;
        return Ok(MeasurementRecord {
            branch_index: branch,
            outcome_value: eigenvalue,
            pre_state: state.clone(),
            post_state,
            phi_event_id: phi.event_id(),
            detected: true,
        });
    }

    let complement = &ComplexMatrix::identity(analyzer.dim())
        - &analyzer.decomposition().projectors()[detector_branch];
    let post_state = luders_update(state, &complement, tol).map_err(|e| match e {
        Error::ZeroProbabilityBranch { weight, .. } => Error::ZeroProbabilityBranch {
            branch: detector_branch,
            weight,
        },
        other => other,
    })?;
    Ok(MeasurementRecord {
        branch_index: branch,
        outcome_value: eigenvalue,
        pre_state: state.clone(),
        post_state,
        phi_event_id: phi.event_id(),
        detected: false,
    })
}

/// `⟨A⟩ = Σ_i W_i A_i`; agrees with the quantum average `Tr(ρA)`.
pub fn measurement_average(state: &QuantumState, analyzer: &Analyzer) -> Result<f64> {
    if state.dim() != analyzer.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: analyzer.dim(),
        });
    }
    let mut acc = 0.0;
    for (i, &lambda) in analyzer.decomposition().eigenvalues().iter().enumerate() {
        acc += branch_probability(state, analyzer, i)? * lambda;
    }
    Ok(acc)
}

/// Sample `n` events (route only, no collapse) and count branch hits.
pub fn branch_frequencies<R: Rng + ?Sized>(
    state: &QuantumState,
    analyzer: &Analyzer,
    n: u64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Vec<u64>> {
    let sampler = BornSampler::new(state, Arc::clone(analyzer.context()), tol)?;
    // Routing is deterministic per basis index; precompute it.
    let mut index_to_branch = Vec::with_capacity(analyzer.dim());
    for k in 0..analyzer.dim() {
        let value = analyzer
            .context()
            .eigenvalue_on(analyzer.observable().matrix(), k);
        let eigenvalues = analyzer.decomposition().eigenvalues();
        let (best, distance) = eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &lambda)| (i, (value - lambda).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("analyzer has at least one branch");
        if distance > tol.branch_match {
            return Err(Error::NoMatchingBranch { value });
        }
        index_to_branch.push(best);
    }
    let mut counts = vec![0u64; analyzer.branch_count()];
    for _ in 0..n {
        let phi = sampler.sample(rng);
        counts[index_to_branch[phi.outcome_index()]] += 1;
    }
    Ok(counts)
}
