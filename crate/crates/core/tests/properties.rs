//! Cross-module invariants on randomized inputs.

mod common;

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use binary_qm_core::*;

const TOL: Tolerances = Tolerances::DEFAULT;

use common::polynomial_family;

/// Generic (non-Hermitian) random matrix `H1 + i·H2`.
fn random_complex_matrix<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let re = Observable::random(dim, rng);
    let im = Observable::random(dim, rng);
    re.matrix() + &im.matrix().scale(Complex64::new(0.0, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_reconstruction_and_projector_algebra(dim in 1usize..=8, seed in any::<u64>()) {
        let a = Observable::random(dim, &mut seeded(seed));
        let d = spectral_decompose(&a, &TOL).unwrap();

        let mut sum = ComplexMatrix::zeros(dim);
        for p in d.projectors() {
            prop_assert!((p * p).max_abs_diff(p) <= 1e-9);
            prop_assert!(p.hermiticity_residual() <= 1e-9);
            sum = &sum + p;
        }
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-9);
        for (i, p) in d.projectors().iter().enumerate() {
            for q in &d.projectors()[i + 1..] {
                prop_assert!((p * q).max_abs() <= 1e-9);
            }
        }
        prop_assert!(d.reconstruct().max_abs_diff(a.matrix()) <= 1e-8);
        for w in d.eigenvalues().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn joint_diagonalization_of_polynomial_families(dim in 2usize..=8, seed in any::<u64>()) {
        let family = polynomial_family(dim, seed);
        let ctx = joint_diagonalize(&family, &TOL).unwrap();
        prop_assert!(ctx.orthonormality_residual() <= 1e-9);
        for obs in &family {
            prop_assert!(ctx.diagonalization_residual(obs.matrix()) <= 1e-9);
        }
    }

    #[test]
    fn c_star_identity(dim in 1usize..=8, seed in any::<u64>()) {
        let a = Observable::random(dim, &mut seeded(seed));
        let aa = Observable::hermitized(&a.matrix().adjoint() * a.matrix());
        let norm_a = operator_norm(&a, &TOL).unwrap();
        let norm_aa = operator_norm(&aa, &TOL).unwrap();
        prop_assert!((norm_aa - norm_a * norm_a).abs() <= 1e-9);
        // Postulate: nonzero elements have positive norm.
        prop_assert!(norm_a > 0.0);
    }

    #[test]
    fn cauchy_schwarz_for_the_trace_functional(dim in 1usize..=6, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(dim, &mut rng);
        let a = random_complex_matrix(dim, &mut rng);
        let b = random_complex_matrix(dim, &mut rng);
        let psi = |m: &ComplexMatrix| (rho.rho() * m).trace();
        let ab = psi(&(&a.adjoint() * &b));
        let ba = psi(&(&b.adjoint() * &a));
        let aa = psi(&(&a.adjoint() * &a)).re;
        let bb = psi(&(&b.adjoint() * &b)).re;
        prop_assert!((ab * ba).re <= aa * bb + 1e-9 * (1.0 + aa * bb));
    }

    #[test]
    fn born_weights_sum_to_one(dim in 2usize..=8, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(dim, &mut rng);
        let h = Observable::random(dim, &mut rng);
        let ctx = Arc::new(joint_diagonalize(&[h], &TOL).unwrap());
        let sampler = BornSampler::new(&rho, ctx, &TOL).unwrap();
        let total: f64 = sampler.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-8);
        prop_assert!(sampler.weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn valuations_are_additive_and_multiplicative_on_contexts(
        dim in 2usize..=8,
        seed in any::<u64>(),
    ) {
        let family = polynomial_family(dim, seed);
        let ctx = Arc::new(joint_diagonalize(&family, &TOL).unwrap());
        let mut rng = seeded(seed ^ 0xABCD);
        let rho = QuantumState::random(dim, &mut rng);
        let phi = sample_physical_state(&rho, &ctx, &mut rng, &TOL).unwrap();

        let a = &family[0];
        let b = &family[1];
        let va = evaluate(&phi, a, &TOL).unwrap();
        let vb = evaluate(&phi, b, &TOL).unwrap();

        let sum = Observable::hermitized(a.matrix() + b.matrix());
        prop_assert!((evaluate(&phi, &sum, &TOL).unwrap() - (va + vb)).abs() <= 1e-9);

        let product = Observable::hermitized(a.matrix() * b.matrix());
        prop_assert!((evaluate(&phi, &product, &TOL).unwrap() - va * vb).abs() <= 1e-9);

        // φ(A*A) is never meaningfully negative.
        let square = Observable::hermitized(&a.matrix().adjoint() * a.matrix());
        prop_assert!(evaluate(&phi, &square, &TOL).unwrap() >= -1e-9);

        // φ(λI) = λ.
        let lambda = 3.75;
        let v = evaluate(&phi, &Observable::scaled_identity(dim, lambda), &TOL).unwrap();
        prop_assert!((v - lambda).abs() <= 1e-9);
    }

    #[test]
    fn quantum_average_is_linear_on_noncommuting_sums(dim in 2usize..=8, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(dim, &mut rng);
        let a = Observable::random(dim, &mut rng);
        let b = Observable::random(dim, &mut rng);
        let sum = Observable::hermitized(a.matrix() + b.matrix());
        let lhs = quantum_average(&rho, &sum).unwrap();
        let rhs = quantum_average(&rho, &a).unwrap() + quantum_average(&rho, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn propagator_is_unitary_for_large_times(
        dim in 1usize..=8,
        seed in any::<u64>(),
        t in -100.0f64..100.0,
    ) {
        let h = Hamiltonian::new(Observable::random(dim, &mut seeded(seed)));
        let u = unitary_at(&h, t, &TOL).unwrap();
        let gram = &u.adjoint() * &u;
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-9);
    }

    #[test]
    fn heisenberg_matches_schrodinger(
        dim in 2usize..=6,
        seed in any::<u64>(),
        t in -5.0f64..5.0,
    ) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(dim, &mut rng);
        let a = Observable::random(dim, &mut rng);
        let h = Hamiltonian::new(Observable::random(dim, &mut rng));
        let at = heisenberg_evolve(&a, &h, t, &TOL).unwrap();
        let lhs = quantum_average(&rho, &at).unwrap();
        let u = unitary_at(&h, t, &TOL).unwrap();
        let rho_t = &(&u * rho.rho()) * &u.adjoint();
        let rhs = (&rho_t * a.matrix()).trace().re;
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn evolved_evaluation_is_deterministic(dim in 2usize..=6, seed in any::<u64>(), t in -3.0f64..3.0) {
        let family = polynomial_family(dim, seed);
        let ctx = Arc::new(joint_diagonalize(&family, &TOL).unwrap());
        let mut rng = seeded(seed ^ 0x5EED);
        let rho = QuantumState::random(dim, &mut rng);
        let phi = sample_physical_state(&rho, &ctx, &mut rng, &TOL).unwrap();
        let h = Hamiltonian::new(family[1].clone());
        let first = evolved_evaluate(&phi, &family[0], &h, t, &TOL);
        let second = evolved_evaluate(&phi, &family[0], &h, t, &TOL);
        prop_assert_eq!(first, second);
    }

    #[test]
    fn detect_is_idempotent_and_weights_normalize(dim in 2usize..=6, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(dim, &mut rng);
        let obs = Observable::random(dim, &mut rng);
        let analyzer = Analyzer::new(obs.clone(), &TOL).unwrap();

        let total: f64 = (0..analyzer.branch_count())
            .map(|i| branch_probability(&rho, &analyzer, i).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(
            (measurement_average(&rho, &analyzer).unwrap()
                - quantum_average(&rho, &obs).unwrap())
            .abs()
                <= 1e-10
        );

        let first = detect(&rho, &analyzer, &mut rng, &TOL).unwrap();
        let second = detect(&first.post_state, &analyzer, &mut rng, &TOL).unwrap();
        prop_assert_eq!(first.branch_index, second.branch_index);
        prop_assert_eq!(first.outcome_value, second.outcome_value);
    }

    #[test]
    fn averaged_detection_does_not_signal(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rho = QuantumState::random(4, &mut rng);
        let dir = {
            let x = rng.random::<f64>() * 2.0 - 1.0;
            let z = rng.random::<f64>() * 2.0 - 1.0;
            let n = (x * x + z * z).sqrt().max(0.1);
            SpinDirection::new(x / n, 0.0, z / n, &TOL).unwrap_or(SpinDirection::z_axis())
        };
        let analyzer = Analyzer::new(spin_observable(&dir, Particle::A), &TOL).unwrap();
        let mut averaged = ComplexMatrix::zeros(4);
        for p in analyzer.decomposition().projectors() {
            averaged = &averaged + &(&(p * rho.rho()) * p);
        }
        let averaged = QuantumState::new(averaged, &TOL).unwrap();
        let before = rho.partial_trace(2, 2, Subsystem::B).unwrap();
        let after = averaged.partial_trace(2, 2, Subsystem::B).unwrap();
        prop_assert!(before.rho().max_abs_diff(after.rho()) <= 1e-9);
    }
}

#[test]
fn monte_carlo_stays_within_five_sigma() {
    let trials = 200u64;
    let mut violations = 0u32;
    for trial in 0..trials {
        let mut rng = substream(0xA4C0FFEE, trial);
        let dim = 2 + (trial % 7) as usize;
        let family = polynomial_family(dim, trial.wrapping_mul(0x9E37_79B9));
        let ctx = Arc::new(joint_diagonalize(&family, &TOL).unwrap());
        let rho = QuantumState::random(dim, &mut rng);
        let member = &family[0];
        let exact = quantum_average(&rho, member).unwrap();
        let est = monte_carlo_average(&rho, &ctx, member, 2000, &mut rng, &TOL).unwrap();
        if (est.mean - exact).abs() > 5.0 * est.std_error + 1e-12 {
            violations += 1;
        }
    }
    assert!(
        f64::from(violations) <= 0.01 * trials as f64,
        "{violations} of {trials} trials broke the 5-sigma bound"
    );
}

#[test]
fn chsh_setting_pairs_use_disjoint_events() {
    let rho = singlet_state();
    let a = SpinDirection::from_xz_degrees(0.0);
    let a_prime = SpinDirection::from_xz_degrees(90.0);
    let b = SpinDirection::from_xz_degrees(45.0);
    let b_prime = SpinDirection::from_xz_degrees(135.0);

    let mut rng = seeded(0xD15C0);
    let mut id_sets: Vec<HashSet<u64>> = Vec::new();
    for (x, y) in [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)] {
        let experiment = PairExperiment::new(&rho, &x, &y, &TOL).unwrap();
        let ids = experiment
            .run_events(500, &mut rng)
            .into_iter()
            .map(|e| e.event_id)
            .collect::<HashSet<u64>>();
        assert_eq!(ids.len(), 500);
        id_sets.push(ids);
    }
    for i in 0..id_sets.len() {
        for j in i + 1..id_sets.len() {
            assert!(id_sets[i].is_disjoint(&id_sets[j]));
        }
    }
}

#[test]
fn event_ids_unique_across_threads() {
    let rho = Arc::new(QuantumState::maximally_mixed(2));
    let ctx = Arc::new(joint_diagonalize(&[binary_qm_core::algebra::pauli_z()], &TOL).unwrap());
    let handles: Vec<_> = (0..4u64)
        .map(|worker| {
            let rho = Arc::clone(&rho);
            let ctx = Arc::clone(&ctx);
            std::thread::spawn(move || {
                let mut rng = substream(0xBEEF, worker);
                (0..2000)
                    .map(|_| {
                        sample_physical_state(&rho, &ctx, &mut rng, &TOL)
                            .unwrap()
                            .event_id()
                    })
                    .collect::<Vec<u64>>()
            })
        })
        .collect();
    let mut all = HashSet::new();
    for handle in handles {
        for id in handle.join().unwrap() {
            assert!(all.insert(id), "event id {id} reused");
        }
    }
    assert_eq!(all.len(), 8000);
}

#[test]
fn rk4_oracle_agrees_with_spectral_evolution() {
    let mut rng = seeded(0x0DE5);
    for dim in [2usize, 4] {
        let h = Hamiltonian::new(Observable::random(dim, &mut rng));
        let a = Observable::random(dim, &mut rng);
        let t = 1.3;
        let spectral = heisenberg_evolve(&a, &h, t, &TOL).unwrap();
        let integrated = common::rk4_heisenberg(a.matrix(), h.observable().matrix(), t, 1e-3);
        assert!(
            spectral.matrix().max_abs_diff(&integrated) <= 1e-6,
            "dim {dim}"
        );
    }
}
