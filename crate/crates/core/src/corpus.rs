//! Built-in corpus of optimal control problems, embedded from `problems/`.
//!
//! The corpus spans the feature surface: a scalar calculus-of-variations
//! problem, a forced problem with opaque symbols and parameters, and the
//! three sub-Riemannian nilpotent minimum-energy problems (2,3), (2,3,5),
//! (2,3,5,8).

use crate::problem::{parse_problem, OCProblem};

pub const SCALAR_QUADRATIC: &str = include_str!("../../../problems/scalar_quadratic.ocp");
pub const FORCED_OSCILLATOR: &str = include_str!("../../../problems/forced_oscillator.ocp");
pub const SR23: &str = include_str!("../../../problems/sr23.ocp");
pub const SR235: &str = include_str!("../../../problems/sr235.ocp");
pub const SR2358: &str = include_str!("../../../problems/sr2358.ocp");

fn load(name: &str, src: &str) -> OCProblem {
    match parse_problem(src) {
        Ok(p) => p,
        Err(e) => panic!("built-in problem `{}` failed to parse: {}", name, e),
    }
}

/// Minimize the integral of `u^2` subject to `x' = u`.
pub fn scalar_quadratic() -> OCProblem {
    load("scalar_quadratic", SCALAR_QUADRATIC)
}

/// Oscillator under a nonconservative force with opaque `z` and parameters
/// `a`, `b`, `mu`.
pub fn forced_oscillator() -> OCProblem {
    load("forced_oscillator", FORCED_OSCILLATOR)
}

/// Sub-Riemannian nilpotent (2,3) problem.
pub fn sr23() -> OCProblem {
    load("sr23", SR23)
}

/// Sub-Riemannian nilpotent (2,3,5) problem.
pub fn sr235() -> OCProblem {
    load("sr235", SR235)
}

/// Sub-Riemannian nilpotent (2,3,5,8) problem.
pub fn sr2358() -> OCProblem {
    load("sr2358", SR2358)
}

/// The whole corpus, with stable names.
pub fn all() -> Vec<(&'static str, OCProblem)> {
    vec![
        ("scalar_quadratic", scalar_quadratic()),
        ("forced_oscillator", forced_oscillator()),
        ("sr23", sr23()),
        ("sr235", sr235()),
        ("sr2358", sr2358()),
    ]
}
