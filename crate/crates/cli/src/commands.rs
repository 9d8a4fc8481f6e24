//! Command implementations. Every command derives its randomness from the
//! master seed through documented substreams, so identical invocations
//! produce byte-identical output:
//!
//! - `average`, `measure`: substream 0.
//! - `bell`: substream `i` for the i-th grid point.
//! - `chsh` (contextual): substream `i` for the i-th setting pair, in the
//!   order (a,b), (a,b'), (a',b), (a',b').
//! - `postulates`: substream `100·dim_index + trial`.

use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::json;

use binary_qm_core::{
    bell, chsh_exact, chsh_lhv, correlation_contextual, correlation_exact, detect,
    joint_diagonalize, measurement_average, monte_carlo_average, negative_measurement,
    quantum_average, substream, Analyzer, AverageEstimate, BornSampler, ChshMode, ChshResult,
    Error, LhvStrategy, Observable, QuantumState, SpinDirection,
};

use crate::spec::{
    parse_angles, parse_dims, parse_grid, parse_observable, parse_state, parse_tolerances,
};
use crate::{CliError, Format, Mode, RunArgs, Scenario};

pub const SCHEMA: &str = "binary-qm/1";

pub struct Outcome {
    pub output: String,
    pub statistical_failure: bool,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            statistical_failure: false,
        }
    }
}

pub struct RunConfig {
    pub seed: u64,
    pub samples: u64,
    pub format: Option<Format>,
    pub tol: binary_qm_core::Tolerances,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        if args.samples == 0 {
            return Err(CliError::Input("--samples must be at least 1".into()));
        }
        Ok(Self {
            seed: args.seed,
            samples: args.samples,
            format: args.format,
            tol: parse_tolerances(&args.tolerance)?,
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn binomial_bound(p: f64, n: u64) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn run_average(
    cfg: &RunConfig,
    state_spec: &str,
    observable_spec: &str,
    context_specs: &[String],
) -> Result<Outcome, CliError> {
    let state = parse_state(state_spec, &cfg.tol)?;
    let observable = parse_observable(observable_spec, &cfg.tol)?;
    let members: Vec<Observable> = if context_specs.is_empty() {
        vec![observable.clone()]
    } else {
        context_specs
            .iter()
            .map(|s| parse_observable(s, &cfg.tol))
            .collect::<Result<_, _>>()?
    };
    let context = Arc::new(joint_diagonalize(&members, &cfg.tol)?);
    let exact = quantum_average(&state, &observable)?;
    let mut rng = substream(cfg.seed, 0);
    let estimate = monte_carlo_average(
        &state,
        &context,
        &observable,
        cfg.samples,
        &mut rng,
        &cfg.tol,
    )?;

    let output = match cfg.format_or(Format::Json) {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "average",
                "seed": cfg.seed,
                "samples": cfg.samples,
                "exact": exact,
                "monte_carlo": {
                    "mean": estimate.mean,
                    "std_error": estimate.std_error,
                    "n_samples": estimate.n_samples,
                },
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        Format::Csv => {
            let mut out = String::from("exact,mc_mean,std_error,n\n");
            writeln!(
                out,
                "{},{},{},{}",
                exact, estimate.mean, estimate.std_error, estimate.n_samples
            )
            .expect("write");
            out
        }
    };
    Ok(Outcome::ok(output))
}

pub fn run_measure(
    cfg: &RunConfig,
    state_spec: &str,
    observable_spec: &str,
    scenario: Scenario,
    detector_branch: Option<usize>,
    repeat_check: bool,
) -> Result<Outcome, CliError> {
    let state = parse_state(state_spec, &cfg.tol)?;
    let observable = parse_observable(observable_spec, &cfg.tol)?;
    let analyzer = Analyzer::new(observable, &cfg.tol)?;
    let detector_branch = match scenario {
        Scenario::Positive => None,
        Scenario::Negative => Some(detector_branch.ok_or_else(|| {
            CliError::Input("--detector-branch is required for the negative scenario".into())
        })?),
    };
    if let Some(branch) = detector_branch {
        if branch >= analyzer.branch_count() {
            return Err(CliError::Input(format!(
                "detector branch {branch} out of range (analyzer has {} branches)",
                analyzer.branch_count()
            )));
        }
    }

    let sampler = BornSampler::new(&state, Arc::clone(analyzer.context()), &cfg.tol)?;
    let mut rng = substream(cfg.seed, 0);
    let mut counts = vec![0u64; analyzer.branch_count()];
    let mut detected_count = 0u64;
    let mut reproduced = 0u64;
    let format = cfg.format_or(Format::Json);
    let mut records = String::new();
    if format == Format::Csv {
        records.push_str("branch_index,outcome_value,detected,phi_event_id,seed\n");
    }

    for _ in 0..cfg.samples {
        let record = match detector_branch {
            None => binary_qm_core::measurement::detect_with_sampler(
                &state, &analyzer, &sampler, &mut rng, &cfg.tol,
            )?,
            Some(branch) => negative_measurement(&state, &analyzer, branch, &mut rng, &cfg.tol)?,
        };
        counts[record.branch_index] += 1;
        if record.detected {
            detected_count += 1;
        }
        if repeat_check {
            let again = detect(&record.post_state, &analyzer, &mut rng, &cfg.tol)?;
            if again.branch_index == record.branch_index {
                reproduced += 1;
            }
        }
        match format {
            Format::Json => {
                let line = json!({
                    "branch_index": record.branch_index,
                    "outcome_value": record.outcome_value,
                    "detected": record.detected,
                    "phi_event_id": record.phi_event_id,
                    "seed": cfg.seed,
                });
                writeln!(records, "{line}").expect("write");
            }
            Format::Csv => {
                writeln!(
                    records,
                    "{},{},{},{},{}",
                    record.branch_index,
                    record.outcome_value,
                    record.detected,
                    record.phi_event_id,
                    cfg.seed
                )
                .expect("write");
            }
        }
    }

    // Frequency summary against the exact branch probabilities.
    let mut branch_rows = Vec::new();
    let mut all_within = true;
    for (i, &count) in counts.iter().enumerate() {
        let probability = binary_qm_core::branch_probability(&state, &analyzer, i)?;
        let frequency = count as f64 / cfg.samples as f64;
        let bound = binomial_bound(probability, cfg.samples);
        let within = (frequency - probability).abs() <= bound;
        all_within &= within;
        branch_rows.push((
            i,
            analyzer.decomposition().eigenvalues()[i],
            probability,
            frequency,
            bound,
            within,
        ));
    }
    let mut pass = all_within;

    let detected_rate = detected_count as f64 / cfg.samples as f64;
    let detector_summary = detector_branch.map(|branch| {
        let w =
            binary_qm_core::branch_probability(&state, &analyzer, branch).expect("valid branch");
        let within = (detected_rate - w).abs() <= binomial_bound(w, cfg.samples);
        pass &= within;
        (branch, w, within)
    });

    let repeat_rate = repeat_check.then(|| {
        let rate = reproduced as f64 / cfg.samples as f64;
        pass &= reproduced == cfg.samples;
        rate
    });

    let average = measurement_average(&state, &analyzer)?;

    let output = match format {
        Format::Json => {
            let summary = json!({
                "schema": SCHEMA,
                "command": "measure",
                "seed": cfg.seed,
                "samples": cfg.samples,
                "scenario": match scenario {
                    Scenario::Positive => "positive",
                    Scenario::Negative => "negative",
                },
                "measurement_average": average,
                "branches": branch_rows.iter().map(|(i, eigenvalue, w, freq, bound, within)| {
                    json!({
                        "branch": i,
                        "eigenvalue": eigenvalue,
                        "probability": w,
                        "frequency": freq,
                        "bound_4_sigma": bound,
                        "within_4_sigma": within,
                    })
                }).collect::<Vec<_>>(),
                "detector": detector_summary.map(|(branch, w, within)| json!({
                    "branch": branch,
                    "probability": w,
                    "detected_rate": detected_rate,
                    "within_4_sigma": within,
                })),
                "repeat_reproducibility": repeat_rate,
                "pass": pass,
            });
            format!(
                "{records}{}\n",
                serde_json::to_string_pretty(&summary).expect("json")
            )
        }
        Format::Csv => {
            let mut out = records;
            out.push('\n');
            out.push_str("branch,eigenvalue,probability,frequency,bound_4_sigma,within\n");
            for (i, eigenvalue, w, freq, bound, within) in &branch_rows {
                writeln!(out, "{i},{eigenvalue},{w},{freq},{bound},{within}").expect("write");
            }
            if let Some((branch, w, within)) = detector_summary {
                writeln!(out, "detector,{branch},{w},{detected_rate},,{within}").expect("write");
            }
            if let Some(rate) = repeat_rate {
                writeln!(out, "repeat_reproducibility,{rate},,,,").expect("write");
            }
            writeln!(out, "pass,{pass},,,,").expect("write");
            out
        }
    };
    Ok(Outcome {
        output,
        statistical_failure: !pass,
    })
}

pub fn run_bell(cfg: &RunConfig, grid: &str) -> Result<Outcome, CliError> {
    let thetas = parse_grid(grid)?;
    let state = bell::singlet_state();
    let a = SpinDirection::z_axis();
    let mut rows = Vec::new();
    for (i, &theta) in thetas.iter().enumerate() {
        let b = SpinDirection::from_xz_degrees(theta);
        let exact = correlation_exact(&state, &a, &b)?;
        let mut rng = substream(cfg.seed, i as u64);
        let est = correlation_contextual(&state, &a, &b, cfg.samples, &mut rng, &cfg.tol)?;
        rows.push((theta, exact, est));
    }

    let output = match cfg.format_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("theta_degrees,E_exact,E_mc,std_error,n\n");
            for (theta, exact, est) in &rows {
                writeln!(
                    out,
                    "{theta},{exact},{},{},{}",
                    est.mean, est.std_error, est.n_samples
                )
                .expect("write");
            }
            out
        }
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "bell",
                "seed": cfg.seed,
                "samples": cfg.samples,
                "rows": rows.iter().map(|(theta, exact, est)| json!({
                    "theta_degrees": theta,
                    "e_exact": exact,
                    "e_mc": est.mean,
                    "std_error": est.std_error,
                    "n": est.n_samples,
                })).collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome::ok(output))
}

pub fn run_chsh(cfg: &RunConfig, angles: &str, mode: Mode) -> Result<Outcome, CliError> {
    let degrees = parse_angles(angles)?;
    let [a, a_prime, b, b_prime] = degrees.map(SpinDirection::from_xz_degrees);
    let state = bell::singlet_state();

    let mut strategies_evaluated: Option<u64> = None;
    let result: ChshResult = match mode {
        Mode::Contextual => {
            let pairs = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)];
            let mut terms = Vec::with_capacity(4);
            for (i, (x, y)) in pairs.iter().enumerate() {
                let mut rng = substream(cfg.seed, i as u64);
                terms.push(correlation_contextual(
                    &state,
                    x,
                    y,
                    cfg.samples,
                    &mut rng,
                    &cfg.tol,
                )?);
            }
            let terms: [AverageEstimate; 4] = terms.try_into().expect("four terms");
            let s = ChshResult::s_from_terms(&terms);
            ChshResult {
                terms,
                s,
                n_per_setting: cfg.samples,
                mode: ChshMode::Contextual,
            }
        }
        Mode::Exact => chsh_exact(&state, &a, &a_prime, &b, &b_prime)?,
        Mode::Lhv => {
            // Exhaustive sweep of the deterministic strategies; report the
            // maximizer.
            let strategies = LhvStrategy::all_deterministic();
            strategies_evaluated = Some(strategies.len() as u64);
            let mut best: Option<ChshResult> = None;
            for strategy in strategies {
                let candidate = chsh_lhv(&[(strategy, 1.0)])?;
                if best.as_ref().is_none_or(|b| candidate.s > b.s) {
                    best = Some(candidate);
                }
            }
            best.expect("at least one strategy")
        }
    };

    let labels = ["E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"];
    let output = match cfg.format_or(Format::Json) {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "chsh",
                "seed": cfg.seed,
                "mode": result.mode.as_str(),
                "angles_degrees": degrees,
                "n_per_setting": result.n_per_setting,
                "terms": result.terms.iter().zip(labels).map(|(t, label)| json!({
                    "label": label,
                    "mean": t.mean,
                    "std_error": t.std_error,
                    "n_samples": t.n_samples,
                })).collect::<Vec<_>>(),
                "s": result.s,
                "s_std_error": result.s_std_error(),
                "strategies_evaluated": strategies_evaluated,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        Format::Csv => {
            let mut out = String::from("term,mean,std_error,n\n");
            for (t, label) in result.terms.iter().zip(labels) {
                writeln!(out, "{label},{},{},{}", t.mean, t.std_error, t.n_samples).expect("write");
            }
            writeln!(out, "S,{},{},", result.s, result.s_std_error()).expect("write");
            out
        }
    };
    Ok(Outcome::ok(output))
}

pub fn run_postulates(cfg: &RunConfig, dims: &str) -> Result<Outcome, CliError> {
    let dims = parse_dims(dims)?;
    let mut checks: Vec<(usize, &'static str, bool, f64)> = Vec::new();
    let mut event_ids = std::collections::HashSet::new();
    let mut events = 0u64;

    for (dim_index, &dim) in dims.iter().enumerate() {
        let mut worst_identity = 0.0f64;
        let mut worst_additivity = 0.0f64;
        let mut worst_multiplicativity = 0.0f64;
        let mut worst_negativity = 0.0f64;
        let mut worst_linearity = 0.0f64;
        let mut worst_convergence = 0.0f64;

        for trial in 0..25u64 {
            let mut rng = substream(cfg.seed, 100 * dim_index as u64 + trial);
            let h = Observable::random(dim, &mut rng);
            let scale = 1.0 / h.matrix().max_abs().max(1.0);
            let g = Observable::hermitized(h.matrix().scale_re(scale));
            let g2 = Observable::hermitized(g.matrix() * g.matrix());
            let context = Arc::new(joint_diagonalize(&[g.clone(), g2.clone()], &cfg.tol)?);
            let rho = QuantumState::random(dim, &mut rng);
            let sampler = BornSampler::new(&rho, Arc::clone(&context), &cfg.tol)?;

            let sum = Observable::hermitized(g.matrix() + g2.matrix());
            let product = Observable::hermitized(g.matrix() * g2.matrix());
            let lambda = 1.5 + trial as f64;
            let scaled_id = Observable::scaled_identity(dim, lambda);

            for _ in 0..8 {
                let phi = sampler.sample(&mut rng);
                events += 1;
                if !event_ids.insert(phi.event_id()) {
                    checks.push((dim, "event_uniqueness", false, 0.0));
                }
                let va = binary_qm_core::evaluate(&phi, &g, &cfg.tol)?;
                let vb = binary_qm_core::evaluate(&phi, &g2, &cfg.tol)?;
                let vid = binary_qm_core::evaluate(&phi, &scaled_id, &cfg.tol)?;
                let vsum = binary_qm_core::evaluate(&phi, &sum, &cfg.tol)?;
                let vprod = binary_qm_core::evaluate(&phi, &product, &cfg.tol)?;
                worst_identity = worst_identity.max((vid - lambda).abs());
                worst_additivity = worst_additivity.max((vsum - (va + vb)).abs());
                worst_multiplicativity = worst_multiplicativity.max((vprod - va * vb).abs());
                worst_negativity = worst_negativity.max((-vb).max(0.0));
            }

            // Ψ is linear even on non-commuting sums.
            let x = Observable::random(dim, &mut rng);
            let y = Observable::random(dim, &mut rng);
            let xy = Observable::hermitized(x.matrix() + y.matrix());
            let linearity = (quantum_average(&rho, &xy)?
                - quantum_average(&rho, &x)?
                - quantum_average(&rho, &y)?)
            .abs();
            worst_linearity = worst_linearity.max(linearity);

            // Sampled averages converge to the quantum average.
            if trial < 5 {
                let n = cfg.samples.min(20_000);
                let est = monte_carlo_average(&rho, &context, &g, n, &mut rng, &cfg.tol)?;
                let exact = quantum_average(&rho, &g)?;
                let excess = (est.mean - exact).abs() - 5.0 * est.std_error;
                worst_convergence = worst_convergence.max(excess);
            }
        }

        checks.push((
            dim,
            "value_of_scaled_identity",
            worst_identity <= 1e-9,
            worst_identity,
        ));
        checks.push((
            dim,
            "additivity_on_context",
            worst_additivity <= 1e-9,
            worst_additivity,
        ));
        checks.push((
            dim,
            "multiplicativity_on_context",
            worst_multiplicativity <= 1e-9,
            worst_multiplicativity,
        ));
        checks.push((
            dim,
            "square_positivity",
            worst_negativity <= 1e-9,
            worst_negativity,
        ));
        checks.push((
            dim,
            "average_linearity_noncommuting",
            worst_linearity <= 1e-10,
            worst_linearity,
        ));
        checks.push((
            dim,
            "monte_carlo_within_5_sigma",
            worst_convergence <= 1e-12,
            worst_convergence,
        ));
    }
    let unique = event_ids.len() as u64 == events;
    checks.push((0, "event_uniqueness", unique, 0.0));

    let pass = checks.iter().all(|(_, _, ok, _)| *ok);
    let output = match cfg.format_or(Format::Json) {
        Format::Json => {
            let doc = json!({
                "schema": SCHEMA,
                "command": "postulates",
                "seed": cfg.seed,
                "dims": dims,
                "checks": checks.iter().map(|(dim, name, ok, worst)| json!({
                    "dim": dim,
                    "check": name,
                    "pass": ok,
                    "worst_residual": worst,
                })).collect::<Vec<_>>(),
                "pass": pass,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        Format::Csv => {
            let mut out = String::from("dim,check,pass,worst_residual\n");
            for (dim, name, ok, worst) in &checks {
                writeln!(out, "{dim},{name},{ok},{worst}").expect("write");
            }
            writeln!(out, ",overall,{pass},").expect("write");
            out
        }
    };
    Ok(Outcome {
        output,
        statistical_failure: !pass,
    })
}

pub fn classify(err: Error) -> CliError {
    match err {
        Error::ConvergenceFailure { .. }
        | Error::DegenerateWeights { .. }
        | Error::NoMatchingBranch { .. }
        | Error::ZeroProbabilityBranch { .. }
        | Error::AntiCorrelationViolated { .. } => CliError::Numerical(err.to_string()),
        _ => CliError::Input(err.to_string()),
    }
}
