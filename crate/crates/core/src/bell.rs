//! Two-particle spin correlation experiments.
//!
//! Two sampling disciplines live side by side and their contrast is the
//! point of this module. `PairExperiment` draws a fresh physical state for
//! every event of every setting pair, so no event is ever reused across the
//! four CHSH terms: the event-id sets of the four terms are pairwise
//! disjoint, and the estimated S reaches 2√2 on the singlet. `chsh_lhv`
//! instead answers all four setting pairs from one shared strategy per
//! hidden-variable value; every deterministic strategy then obeys S ≤ 2.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{joint_diagonalize, ComplexMatrix, ComplexVector, Observable};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::measurement::{detect, Analyzer};
use crate::states::{estimate_from_samples, AverageEstimate, BornSampler, QuantumState, Subsystem};

/// A unit 3-vector measurement direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDirection {
    x: f64,
    y: f64,
    z: f64,
}

impl SpinDirection {
    pub fn new(x: f64, y: f64, z: f64, tol: &Tolerances) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFiniteScalar { name: "direction" });
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > tol.unit_vector {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { x, y, z })
    }

    pub fn x_axis() -> Self {
        Self {
            x: 1.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn y_axis() -> Self {
        Self {
            x: 0.0,
            y: 1.0,
            z: 0.0,
        }
    }

    pub fn z_axis() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            z: 1.0,
        }
    }

    /// Direction at angle `theta` (radians) from the z axis in the x-z
    /// plane. Angle differences in this plane equal the angle between the
    /// directions.
    pub fn in_xz_plane(theta: f64) -> Self {
        Self {
            x: theta.sin(),
            y: 0.0,
            z: theta.cos(),
        }
    }

    pub fn from_xz_degrees(degrees: f64) -> Self {
        Self::in_xz_plane(degrees.to_radians())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn angle_to(&self, other: &Self) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }
}

/// Which wing of the two-particle system an observable acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particle {
    A,
    B,
}

/// The spin-zero two-particle state `(|+-⟩ - |-+⟩)/√2` in the standard
/// product basis.
pub fn singlet_state() -> QuantumState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = ComplexVector::from_real(&[0.0, s, -s, 0.0]);
    QuantumState::pure(&psi, &Tolerances::DEFAULT).expect("singlet vector is normalized")
}

/// `n·σ` for a unit direction.
fn spin_half(dir: &SpinDirection) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(dir.z, 0.0), Complex64::new(dir.x, -dir.y)],
        vec![Complex64::new(dir.x, dir.y), Complex64::new(-dir.z, 0.0)],
    ])
    .expect("2x2 spin matrix")
}

/// Doubled spin projection along `dir` on one wing: `(n·σ)⊗I` for particle
/// A, `I⊗(n·σ)` for B. Eigenvalues ±1, each doubly degenerate.
pub fn spin_observable(dir: &SpinDirection, particle: Particle) -> Observable {
    let local = spin_half(dir);
    let identity = ComplexMatrix::identity(2);
    let matrix = match particle {
        Particle::A => local.kron(&identity),
        Particle::B => identity.kron(&local),
    };
    Observable::hermitized(matrix)
}

/// One correlation event: the two wing values and the unique event id of the
/// sampled physical state.
#[derive(Debug, Clone, Copy)]
pub struct PairEvent {
    pub value_a: f64,
    pub value_b: f64,
    pub event_id: u64,
}

impl PairEvent {
    pub fn product(&self) -> f64 {
        self.value_a * self.value_b
    }
}

/// A fixed (state, setting pair) experiment: the joint context of the two
/// commuting wing observables, with Born weights precomputed for sampling.
#[derive(Debug, Clone)]
pub struct PairExperiment {
    sampler: BornSampler,
    values_a: Vec<f64>,
    values_b: Vec<f64>,
}

impl PairExperiment {
    pub fn new(
        state: &QuantumState,
        a: &SpinDirection,
        b: &SpinDirection,
        tol: &Tolerances,
    ) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                left: state.dim(),
                right: 4,
            });
        }
        let obs_a = spin_observable(a, Particle::A);
        let obs_b = spin_observable(b, Particle::B);
        let context = Arc::new(joint_diagonalize(&[obs_a.clone(), obs_b.clone()], tol)?);
        let values_a = (0..4)
            .map(|k| context.eigenvalue_on(obs_a.matrix(), k))
            .collect();
        let values_b = (0..4)
            .map(|k| context.eigenvalue_on(obs_b.matrix(), k))
            .collect();
        let sampler = BornSampler::new(state, context, tol)?;
        Ok(Self {
            sampler,
            values_a,
            values_b,
        })
    }

    pub fn context(&self) -> &Arc<crate::algebra::Context> {
        self.sampler.context()
    }

    /// Draw one fresh event.
    pub fn sample_event<R: Rng + ?Sized>(&self, rng: &mut R) -> PairEvent {
        let phi = self.sampler.sample(rng);
        let k = phi.outcome_index();
        PairEvent {
            value_a: self.values_a[k],
            value_b: self.values_b[k],
            event_id: phi.event_id(),
        }
    }

    pub fn run_events<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<PairEvent> {
        (0..n).map(|_| self.sample_event(rng)).collect()
    }

    /// Estimate `E(a, b)` from `n` fresh events.
    pub fn correlation<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<AverageEstimate> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let products: Vec<f64> = (0..n).map(|_| self.sample_event(rng).product()).collect();
        Ok(estimate_from_samples(&products))
    }
}

/// Monte Carlo estimate of the correlation `E(a, b)`; every event uses a
/// fresh physical state.
pub fn correlation_contextual<R: Rng + ?Sized>(
    state: &QuantumState,
    a: &SpinDirection,
    b: &SpinDirection,
    n: u64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<AverageEstimate> {
    PairExperiment::new(state, a, b, tol)?.correlation(n, rng)
}

/// Exact correlation `Tr(ρ·A_a B_b)`; equals `-a·b` on the singlet.
pub fn correlation_exact(
    state: &QuantumState,
    a: &SpinDirection,
    b: &SpinDirection,
) -> Result<f64> {
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: 4,
        });
    }
    let product =
        spin_observable(a, Particle::A).matrix() * spin_observable(b, Particle::B).matrix();
    Ok((state.rho() * &product).trace().re)
}

/// How a CHSH quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChshMode {
    Contextual,
    Lhv,
    Exact,
}

impl ChshMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChshMode::Contextual => "contextual",
            ChshMode::Lhv => "lhv",
            ChshMode::Exact => "exact",
        }
    }
}

/// The CHSH quantity and its four correlation terms, ordered
/// `E(a,b), E(a,b'), E(a',b), E(a',b')`.
#[derive(Debug, Clone)]
pub struct ChshResult {
    pub terms: [AverageEstimate; 4],
    pub s: f64,
    pub n_per_setting: u64,
    pub mode: ChshMode,
}

impl ChshResult {
    /// `S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|`.
    pub fn s_from_terms(terms: &[AverageEstimate; 4]) -> f64 {
        (terms[0].mean - terms[1].mean).abs() + (terms[2].mean + terms[3].mean).abs()
    }

    fn from_terms(terms: [AverageEstimate; 4], n_per_setting: u64, mode: ChshMode) -> Self {
        let s = Self::s_from_terms(&terms);
        Self {
            terms,
            s,
            n_per_setting,
            mode,
        }
    }

    /// Combined standard error of S (terms are independent estimates).
    pub fn s_std_error(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.std_error * t.std_error)
            .sum::<f64>()
            .sqrt()
    }
}

/// CHSH from four independent contextual experiments, `n` fresh events each.
/// No physical state is shared between setting pairs.
#[allow(clippy::too_many_arguments)]
pub fn chsh_contextual<R: Rng + ?Sized>(
    state: &QuantumState,
    a: &SpinDirection,
    a_prime: &SpinDirection,
    b: &SpinDirection,
    b_prime: &SpinDirection,
    n: u64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<ChshResult> {
    let mut terms = Vec::with_capacity(4);
    for (x, y) in [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)] {
        terms.push(correlation_contextual(state, x, y, n, rng, tol)?);
    }
    let terms: [AverageEstimate; 4] = terms.try_into().expect("four terms");
    Ok(ChshResult::from_terms(terms, n, ChshMode::Contextual))
}

/// CHSH from exact trace correlations.
pub fn chsh_exact(
    state: &QuantumState,
    a: &SpinDirection,
    a_prime: &SpinDirection,
    b: &SpinDirection,
    b_prime: &SpinDirection,
) -> Result<ChshResult> {
    let mut terms = Vec::with_capacity(4);
    for (x, y) in [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)] {
        terms.push(AverageEstimate {
            mean: correlation_exact(state, x, y)?,
            std_error: 0.0,
            n_samples: 1,
        });
    }
    let terms: [AverageEstimate; 4] = terms.try_into().expect("four terms");
    Ok(ChshResult::from_terms(terms, 1, ChshMode::Exact))
}

/// A deterministic local strategy: fixed ±1 answers of wing A to settings
/// (a, a') and of wing B to (b, b'). One strategy answers all four setting
/// pairs of a CHSH run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LhvStrategy {
    responses_a: [i8; 2],
    responses_b: [i8; 2],
}

impl LhvStrategy {
    pub fn new(responses_a: [i8; 2], responses_b: [i8; 2]) -> Result<Self> {
        for v in responses_a.iter().chain(responses_b.iter()) {
            if *v != 1 && *v != -1 {
                return Err(Error::BadDistribution {
                    reason: format!("strategy responses must be ±1, got {v}"),
                });
            }
        }
        Ok(Self {
            responses_a,
            responses_b,
        })
    }

    /// Answer of wing A: index 0 for setting a, 1 for a'.
    pub fn response_a(&self, setting: usize) -> f64 {
        f64::from(self.responses_a[setting])
    }

    /// Answer of wing B: index 0 for setting b, 1 for b'.
    pub fn response_b(&self, setting: usize) -> f64 {
        f64::from(self.responses_b[setting])
    }

    /// All 16 distinct deterministic strategies, in a fixed order.
    pub fn all_deterministic() -> Vec<LhvStrategy> {
        let mut out = Vec::with_capacity(16);
        for bits in 0u8..16 {
            let sign = |bit: u8| if bits >> bit & 1 == 1 { 1i8 } else { -1i8 };
            out.push(LhvStrategy {
                responses_a: [sign(0), sign(1)],
                responses_b: [sign(2), sign(3)],
            });
        }
        out
    }
}

/// CHSH for a mixture of deterministic strategies. Every term integrates
/// over the same strategy variable: the shared-λ discipline the contextual
/// sampler deliberately breaks.
pub fn chsh_lhv(distribution: &[(LhvStrategy, f64)]) -> Result<ChshResult> {
    if distribution.is_empty() {
        return Err(Error::BadDistribution {
            reason: "empty distribution".to_string(),
        });
    }
    let mut total = 0.0;
    for (_, w) in distribution {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::BadDistribution {
                reason: format!("weight {w} is negative or non-finite"),
            });
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution {
            reason: format!("weights sum to {total}"),
        });
    }

    // Term order: (a,b), (a,b'), (a',b), (a',b').
    let settings = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let terms: [AverageEstimate; 4] = settings.map(|(x, y)| {
        let mean = distribution
            .iter()
            .map(|(s, w)| w * s.response_a(x) * s.response_b(y))
            .sum();
        AverageEstimate {
            mean,
            std_error: 0.0,
            n_samples: distribution.len() as u64,
        }
    });
    Ok(ChshResult::from_terms(
        terms,
        distribution.len() as u64,
        ChshMode::Lhv,
    ))
}

/// Membership statement about particle B's physical state: the value its
/// spin along `axis` would show.
#[derive(Debug, Clone, Copy)]
pub struct SpinConstraint {
    pub axis: SpinDirection,
    pub value: f64,
}

/// Outcome of one indirect (two-wing) measurement event.
#[derive(Debug, Clone)]
pub struct EprRecord {
    pub outcome_a: f64,
    pub outcome_b: f64,
    /// Value of B's spin along the A axis inferred from conservation,
    /// `-S(A)`, without touching B.
    pub inferred_b_along_a: f64,
    /// B's membership constraint obtained for free from the A measurement.
    pub constraint_from_conservation: SpinConstraint,
    /// B's membership constraint from its own measurement.
    pub constraint_from_measurement: SpinConstraint,
    /// True when the two constraints refer to different axes: their
    /// intersection describes only the interval between decay and the B
    /// measurement, after which it is useless for further monitoring.
    pub expired: bool,
    pub event_id_a: u64,
    pub event_id_b: u64,
    pub post_state: QuantumState,
}

/// A two-wing measurement setup with both analyzers prebuilt.
#[derive(Debug, Clone)]
pub struct EprExperiment {
    axis_a: SpinDirection,
    axis_b: SpinDirection,
    analyzer_a: Analyzer,
    analyzer_b: Analyzer,
    axes_equal: bool,
}

impl EprExperiment {
    pub fn new(axis_a: SpinDirection, axis_b: SpinDirection, tol: &Tolerances) -> Result<Self> {
        let analyzer_a = Analyzer::new(spin_observable(&axis_a, Particle::A), tol)?;
        let analyzer_b = Analyzer::new(spin_observable(&axis_b, Particle::B), tol)?;
        let axes_equal = axis_a.approx_eq(&axis_b, tol.unit_vector);
        Ok(Self {
            axis_a,
            axis_b,
            analyzer_a,
            analyzer_b,
            axes_equal,
        })
    }

    /// Measure wing A (collapsing), then wing B on the collapsed state.
    ///
    /// On equal axes over the singlet the measured B value must equal the
    /// inferred `-S(A)`; a mismatch signals numerical corruption and errors.
    pub fn run<R: Rng + ?Sized>(
        &self,
        state: &QuantumState,
        rng: &mut R,
        tol: &Tolerances,
    ) -> Result<EprRecord> {
        let record_a = detect(state, &self.analyzer_a, rng, tol)?;
        let record_b = detect(&record_a.post_state, &self.analyzer_b, rng, tol)?;
        let inferred = -record_a.outcome_value;
        if self.axes_equal && (record_b.outcome_value - inferred).abs() > tol.branch_match {
            return Err(Error::AntiCorrelationViolated {
                expected: inferred,
                measured: record_b.outcome_value,
            });
        }
        Ok(EprRecord {
            outcome_a: record_a.outcome_value,
            outcome_b: record_b.outcome_value,
            inferred_b_along_a: inferred,
            constraint_from_conservation: SpinConstraint {
                axis: self.axis_a,
                value: inferred,
            },
            constraint_from_measurement: SpinConstraint {
                axis: self.axis_b,
                value: record_b.outcome_value,
            },
            expired: !self.axes_equal,
            event_id_a: record_a.phi_event_id,
            event_id_b: record_b.phi_event_id,
            post_state: record_b.post_state,
        })
    }
}

/// One indirect-measurement event: measure A along `axis_a`, then B along
/// `axis_b` on the collapsed state.
pub fn epr_indirect<R: Rng + ?Sized>(
    state: &QuantumState,
    axis_a: SpinDirection,
    axis_b: SpinDirection,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<EprRecord> {
    EprExperiment::new(axis_a, axis_b, tol)?.run(state, rng, tol)
}

/// Reduced state of one wing before any readout.
pub fn reduced_state(state: &QuantumState, particle: Particle) -> Result<QuantumState> {
    state.partial_trace(
        2,
        2,
        match particle {
            Particle::A => Subsystem::A,
            Particle::B => Subsystem::B,
        },
    )
}
