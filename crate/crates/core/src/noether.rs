//! Noether conservation laws from symmetry families.
//!
//! A symmetry (T, X, U, Psi) with gauge term G yields the first integral
//! `psi . X + G - H T`, plus the unevaluated integral of
//! `(xdot^T T - X^T) . F` when a nonconservative force is present.
//! Verification differentiates along the Hamiltonian system and must produce
//! an identically zero residual.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::pmp::{self, PmpError};
use crate::problem::{control_bindings, OCProblem};
use crate::symexpr::{Expr, ExprError, Var};
use crate::symmetry::{GeneratorSet, SymmetryFamily};

/// Name of the opaque atom standing for the unexpanded Hamiltonian in
/// symbolically rendered laws.
pub const H_SYMBOL: &str = "H";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoetherError {
    Pmp(PmpError),
    Expr(ExprError),
    /// `specialize` was given a constant the law does not carry.
    UnknownConstant(Var),
    /// Poisson brackets require control-free first integrals.
    ControlDependent(Var),
}

impl fmt::Display for NoetherError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoetherError::Pmp(e) => write!(f, "{}", e),
            NoetherError::Expr(e) => write!(f, "{}", e),
            NoetherError::UnknownConstant(c) => {
                write!(f, "constant {} is not a constant of the law", c)
            }
            NoetherError::ControlDependent(v) => {
                write!(f, "expression depends on control {}", v)
            }
        }
    }
}

impl std::error::Error for NoetherError {}

impl From<PmpError> for NoetherError {
    fn from(e: PmpError) -> Self {
        NoetherError::Pmp(e)
    }
}

impl From<ExprError> for NoetherError {
    fn from(e: ExprError) -> Self {
        NoetherError::Expr(e)
    }
}

/// A first integral, possibly carrying an unevaluated time-integral term.
#[derive(Clone, Debug)]
pub struct ConservationLaw {
    /// `psi . X + G - H T`; `H` is the expanded Hamiltonian or the opaque
    /// atom [`H_SYMBOL`], per the assembly flag.
    pub algebraic: Expr,
    /// `(xdot^T T - X^T) . F` with `xdot` replaced by `phi`; present exactly
    /// when the problem carries a force.
    pub integrand: Option<Expr>,
    /// Free constants inherited from the family.
    pub constants: Vec<Var>,
}

/// Assembles the conservation law of a symmetry family. With `expand_h` the
/// Hamiltonian is written out; otherwise it stays the symbolic atom `H`.
pub fn conservation_law(p: &OCProblem, fam: &SymmetryFamily, expand_h: bool) -> ConservationLaw {
    conservation_law_for(p, fam.generators(), &fam.constants, expand_h)
}

/// Assembles the conservation law of explicit generators.
pub fn conservation_law_for(
    p: &OCProblem,
    gens: &GeneratorSet,
    constants: &[Var],
    expand_h: bool,
) -> ConservationLaw {
    let h = if expand_h {
        pmp::hamiltonian(p)
    } else {
        Expr::var(Var::opaque(H_SYMBOL))
    };
    let mut algebraic = gens.gauge.clone();
    for (i, x) in gens.x.iter().enumerate() {
        algebraic = algebraic.add(&Expr::var(Var::Costate(i as u32 + 1)).mul(x));
    }
    algebraic = algebraic.sub(&h.mul(&gens.t));
    let integrand = p.force.as_ref().map(|force| {
        let mut acc = Expr::zero();
        for ((phi, x), f) in p.phi.iter().zip(&gens.x).zip(force) {
            acc = acc.add(&phi.mul(&gens.t).sub(x).mul(f));
        }
        acc
    });
    ConservationLaw {
        algebraic,
        integrand,
        constants: constants.to_vec(),
    }
}

/// Substitutes rational values for constants (unassigned constants become
/// zero) and normalizes the result: divided by the coefficient content, with
/// a positive leading coefficient under the monomial order.
pub fn specialize(
    law: &ConservationLaw,
    assignment: &BTreeMap<Var, BigRational>,
) -> Result<ConservationLaw, NoetherError> {
    for key in assignment.keys() {
        if !law.constants.contains(key) {
            return Err(NoetherError::UnknownConstant(key.clone()));
        }
    }
    let bindings: BTreeMap<Var, Expr> = law
        .constants
        .iter()
        .map(|c| {
            let value = assignment.get(c).cloned().unwrap_or_else(BigRational::zero);
            (c.clone(), Expr::constant(value))
        })
        .collect();
    let algebraic = law.algebraic.substitute(&bindings)?;
    let integrand = match &law.integrand {
        Some(ig) => Some(ig.substitute(&bindings)?),
        None => None,
    };

    // One scale for the whole law, taken from its first nonzero part.
    let scale = if !algebraic.is_zero() {
        algebraic.unit_normalized().1
    } else if let Some(ig) = &integrand {
        ig.unit_normalized().1
    } else {
        BigRational::from_integer(1.into())
    };
    Ok(ConservationLaw {
        algebraic: algebraic.scale(&scale),
        integrand: integrand.map(|ig| ig.scale(&scale)),
        constants: Vec::new(),
    })
}

/// Verifies a law by differentiating its algebraic part along the Hamiltonian
/// system (controls eliminated first) and adding the integrand; returns the
/// residual, identically zero (in any remaining constants) for a valid law.
/// `subst` optionally rewrites opaque symbols in the final residual.
pub fn verify_conservation(
    p: &OCProblem,
    law: &ConservationLaw,
    subst: Option<&BTreeMap<Var, Expr>>,
) -> Result<Expr, NoetherError> {
    let controls = pmp::solve_controls(p)?;
    let u_bindings = control_bindings(&controls);

    let mut algebraic = law.algebraic.clone();
    let h_atom = Var::opaque(H_SYMBOL);
    if algebraic.contains_var(&h_atom) {
        let mut b = BTreeMap::new();
        b.insert(h_atom, pmp::hamiltonian(p));
        algebraic = algebraic.substitute(&b)?;
    }
    let algebraic = algebraic.substitute(&u_bindings)?;

    let sys = pmp::hamiltonian_system(p);
    let mut residual = algebraic.diff(&Var::Time)?;
    for i in 0..p.n {
        let xi = Var::State(i as u32 + 1);
        let psii = Var::Costate(i as u32 + 1);
        let xdot = sys.state_rhs[i].substitute(&u_bindings)?;
        let psidot = sys.adjoint_rhs[i].substitute(&u_bindings)?;
        residual = residual.add(&algebraic.diff(&xi)?.mul(&xdot));
        residual = residual.add(&algebraic.diff(&psii)?.mul(&psidot));
    }
    if let Some(ig) = &law.integrand {
        residual = residual.add(&ig.substitute(&u_bindings)?);
    }
    if let Some(subst) = subst {
        residual = residual.substitute(subst)?;
    }
    Ok(residual)
}

/// Canonical Poisson bracket `{f, g} = sum_i df/dx_i dg/dpsi_i - df/dpsi_i
/// dg/dx_i` of two control-free first integrals.
pub fn poisson_bracket(p: &OCProblem, f: &Expr, g: &Expr) -> Result<Expr, NoetherError> {
    for e in [f, g] {
        for v in e.vars() {
            if matches!(v, Var::Control(_)) {
                return Err(NoetherError::ControlDependent(v));
            }
        }
    }
    let mut acc = Expr::zero();
    for i in 1..=p.n as u32 {
        let xi = Var::State(i);
        let psii = Var::Costate(i);
        acc = acc.add(&f.diff(&xi)?.mul(&g.diff(&psii)?));
        acc = acc.sub(&f.diff(&psii)?.mul(&g.diff(&xi)?));
    }
    Ok(acc)
}
