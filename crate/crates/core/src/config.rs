//! Centralized numerical tolerances.
//!
//! Every threshold used for validation or convergence lives in one record so
//! that a run can override any of them without touching call sites.

/// Reduced Planck constant in simulation units.
pub const HBAR: f64 = 1.0;

/// All numerical tolerances, with defaults suitable for dimensions up to 16.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max `|M[i][j] - conj(M[j][i])|` for a matrix to count as Hermitian.
    pub hermiticity: f64,
    /// Residual bound for projector algebra, orthonormality and spectral
    /// reconstruction checks.
    pub projector: f64,
    /// Eigenvalues closer than this are merged into one spectral projector.
    pub degeneracy: f64,
    /// Off-diagonal convergence threshold for the Jacobi eigensolver,
    /// relative to the largest entry magnitude of the input.
    pub jacobi_off_diagonal: f64,
    /// Sweep cap for the Jacobi eigensolver.
    pub jacobi_max_sweeps: usize,
    /// Pairwise commutator bound for commuting-family checks.
    pub commutation: f64,
    /// Off-diagonal residual under which an observable counts as diagonal in
    /// a context basis (i.e. measurable in that context).
    pub context_membership: f64,
    /// Born weights must sum to within this of one.
    pub weight_sum: f64,
    /// Matching an evaluated value to an analyzer branch eigenvalue.
    pub branch_match: f64,
    /// Branch weights below this are treated as impossible to realize.
    pub zero_probability: f64,
    /// Density-matrix slack: trace deviation from one and the amount an
    /// eigenvalue may dip below zero.
    pub state: f64,
    /// Norm deviation allowed for unit 3-vectors.
    pub unit_vector: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-10,
        projector: 1e-9,
        degeneracy: 1e-8,
        jacobi_off_diagonal: 1e-12,
        jacobi_max_sweeps: 100,
        commutation: 1e-9,
        context_membership: 1e-9,
        weight_sum: 1e-8,
        branch_match: 1e-8,
        zero_probability: 1e-12,
        state: 1e-10,
        unit_vector: 1e-10,
    };

    /// Override one tolerance by field name. Used by the CLI's
    /// `--tolerance KEY=VAL` flag.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        match key {
            "hermiticity" => self.hermiticity = value,
            "projector" => self.projector = value,
            "degeneracy" => self.degeneracy = value,
            "jacobi_off_diagonal" => self.jacobi_off_diagonal = value,
            "jacobi_max_sweeps" => self.jacobi_max_sweeps = value as usize,
            "commutation" => self.commutation = value,
            "context_membership" => self.context_membership = value,
            "weight_sum" => self.weight_sum = value,
            "branch_match" => self.branch_match = value,
            "zero_probability" => self.zero_probability = value,
            "state" => self.state = value,
            "unit_vector" => self.unit_vector = value,
            other => return Err(format!("unknown tolerance key `{other}`")),
        }
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
