//! Shared test oracles, independent of the library's evolution and
//! measurement paths.

// Each test binary uses a subset of these helpers.
#![allow(dead_code)]

use num_complex::Complex64;

use binary_qm_core::{seeded, ComplexMatrix, Observable};

/// Integrate `dA/dt = i[H, A]` (ħ = 1) from `A(0) = a0` to time `t` with a
/// fixed-step fourth-order Runge-Kutta scheme. Oracle for the closed-form
/// spectral propagator.
pub fn rk4_heisenberg(a0: &ComplexMatrix, h: &ComplexMatrix, t: f64, dt: f64) -> ComplexMatrix {
    assert!(t >= 0.0 && dt > 0.0);
    let deriv = |m: &ComplexMatrix| -> ComplexMatrix {
        (&(h * m) - &(m * h)).scale(Complex64::new(0.0, 1.0))
    };
    let mut a = a0.clone();
    let mut remaining = t;
    while remaining > 0.0 {
        let step = remaining.min(dt);
        let k1 = deriv(&a);
        let k2 = deriv(&(&a + &k1.scale_re(step / 2.0)));
        let k3 = deriv(&(&a + &k2.scale_re(step / 2.0)));
        let k4 = deriv(&(&a + &k3.scale_re(step)));
        let sum = &(&k1 + &k2.scale_re(2.0)) + &(&k3.scale_re(2.0) + &k4);
        a = &a + &sum.scale_re(step / 6.0);
        remaining -= step;
    }
    a
}

/// Standard deviation bound for a binomial frequency estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// A commuting family generated by one random Hermitian seed: scaled powers
/// of it.
pub fn polynomial_family(dim: usize, seed: u64) -> Vec<Observable> {
    let h = Observable::random(dim, &mut seeded(seed));
    let scale = 1.0 / h.matrix().max_abs().max(1.0);
    let g = h.matrix().scale_re(scale);
    let g2 = &g * &g;
    let g3 = &g2 * &g;
    vec![
        Observable::hermitized(g),
        Observable::hermitized(g2),
        Observable::hermitized(g3),
    ]
}
