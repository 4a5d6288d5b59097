//! Symbolic machinery for variational symmetries and Noether first integrals
//! of optimal control problems.
//!
//! The pipeline: an optimal control problem (Lagrangian `L`, velocity vector
//! `phi`, optional nonconservative force `F`) is turned into its Hamiltonian
//! `H = psi0*L + psi . phi`; the invariance-up-to-gauge identity is expanded
//! into a determining system of PDE residuals; a bounded-degree polynomial
//! ansatz reduces that system to an exact homogeneous rational linear system
//! whose nullspace parametrizes a family of symmetries; each symmetry yields
//! a first integral `psi . X + G - H*T` (plus an integral term under a
//! nonconservative force), which is verified symbolically.
//!
//! Everything is exact: coefficients are arbitrary-precision rationals and
//! all equalities are decided on canonical forms.

pub mod corpus;
pub mod linalg;
pub mod noether;
pub mod pmp;
pub mod problem;
pub mod symexpr;
pub mod symmetry;
