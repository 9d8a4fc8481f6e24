//! Finite-dimensional quantum simulation built around per-event contextual
//! valuations.
//!
//! On top of the usual density-matrix formalism, every individual
//! measurement event carries a *physical state*: a maximal commuting family
//! of observables (a context) together with one selected joint eigenvector
//! and a process-unique event id. The valuation an event induces is
//! multiplicative on its context and undefined outside it, which is exactly
//! what the analyzer/detector pipeline and the Bell/CHSH harness exercise:
//!
//! - [`algebra`]: complex matrix *-algebra, spectral and joint
//!   diagonalization, operator norm.
//! - [`states`]: density matrices, Born-weighted sampling of physical
//!   states, quantum vs Monte Carlo averages.
//! - [`dynamics`]: Heisenberg-picture evolution of observables.
//! - [`measurement`]: analyzers, deterministic nucleus routing, branch
//!   probabilities, positive and negative detection with projection
//!   collapse.
//! - [`bell`]: singlet correlations, per-event contextual CHSH estimation,
//!   deterministic local-strategy enumeration, indirect two-wing
//!   measurements.
//!
//! Everything stochastic takes an explicit seeded generator ([`rng`]), and
//! all tolerances live in one overridable record ([`config::Tolerances`]).

pub mod algebra;
pub mod bell;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod rng;
pub mod states;

pub use num_complex::Complex64;

pub use algebra::{
    commutator, is_commuting_family, joint_diagonalize, operator_norm, spectral_decompose,
    ComplexMatrix, ComplexVector, Context, ContextMember, Observable, SpectralDecomposition,
};
pub use bell::{
    chsh_contextual, chsh_exact, chsh_lhv, correlation_contextual, correlation_exact, epr_indirect,
    singlet_state, spin_observable, ChshMode, ChshResult, EprExperiment, EprRecord, LhvStrategy,
    PairEvent, PairExperiment, Particle, SpinDirection,
};
pub use config::{Tolerances, HBAR};
pub use dynamics::{evolved_evaluate, heisenberg_evolve, unitary_at, Hamiltonian};
pub use error::{Error, Result};
pub use measurement::{
    branch_frequencies, branch_probability, detect, measurement_average, negative_measurement,
    route_nucleus, Analyzer, MeasurementRecord,
};
pub use rng::{seeded, substream, SimRng};
pub use states::{
    are_equivalent, evaluate, evaluate_complex, monte_carlo_average, quantum_average,
    sample_physical_state, AverageEstimate, BornSampler, PhysicalState, QuantumState, Subsystem,
};
