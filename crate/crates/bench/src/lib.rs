//! Shared fixtures for the benchmark targets.

use qtrunc::field::ControlField;
use qtrunc::linalg::SymTridiag;
use qtrunc::system::{builtin_rotor, QuantumSystem};
use qtrunc::verify::seeded_field;

pub fn rotor() -> QuantumSystem {
    builtin_rotor()
}

/// Rotor step generator H0 + u·H1 at the given size.
pub fn step_matrix(dim: usize, u: f64) -> SymTridiag {
    let diag: Vec<f64> = (1..=dim).map(|j| (j * j) as f64).collect();
    let offdiag = vec![0.5 * u; dim - 1];
    SymTridiag::new(diag, offdiag)
}

pub fn bench_field(samples: usize, k_target: f64) -> ControlField {
    let dt = std::f64::consts::PI / samples as f64;
    seeded_field(7, samples, dt, k_target).expect("fixed bench field is valid")
}
