//! Pontryagin machinery: the Hamiltonian, the nonconservative
//! Hamiltonian/adjoint system, stationary conditions, extremal controls, and
//! the total-derivative identity for H.

use std::collections::BTreeSet;
use std::fmt;

use crate::problem::{control_bindings, OCProblem};
use crate::symexpr::{Expr, ExprError, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmpError {
    /// A stationary equation is not affine in the controls.
    NonlinearControls {
        equation: usize,
    },
    /// The stationary system has no unique control solution.
    SingularControls,
    Expr(ExprError),
}

impl fmt::Display for PmpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmpError::NonlinearControls { equation } => write!(
                f,
                "stationary equation {} is not affine in the controls",
                equation
            ),
            PmpError::SingularControls => {
                write!(
                    f,
                    "stationary system is not uniquely solvable for the controls"
                )
            }
            PmpError::Expr(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for PmpError {}

impl From<ExprError> for PmpError {
    fn from(e: ExprError) -> Self {
        PmpError::Expr(e)
    }
}

/// Builds the Hamiltonian `H = psi0 L + psi . phi`, with `psi0` resolved to
/// -1 (normal mode) or 0 (abnormal mode).
pub fn hamiltonian(p: &OCProblem) -> Expr {
    let mut h = p.lagrangian.scale(&num_rational::BigRational::from_integer(
        p.mode.psi0().into(),
    ));
    for (i, phi) in p.phi.iter().enumerate() {
        h = h.add(&Expr::var(Var::Costate(i as u32 + 1)).mul(phi));
    }
    h
}

/// The three equation groups of the maximum principle. Equations are stored
/// as right-hand sides (`x_i' = state_rhs[i]`, `psi_i' = adjoint_rhs[i]`) and
/// as residuals for the stationary group (`stationary[j] = 0`).
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    pub h: Expr,
    pub state_rhs: Vec<Expr>,
    pub adjoint_rhs: Vec<Expr>,
    pub stationary: Vec<Expr>,
}

pub fn hamiltonian_system(p: &OCProblem) -> HamiltonianSystem {
    let h = hamiltonian(p);
    let force = p.force_or_zero();
    let diff = |v: Var| {
        h.diff(&v)
            .expect("differentiation by a non-opaque variable")
    };
    let state_rhs = (1..=p.n as u32).map(|i| diff(Var::Costate(i))).collect();
    let adjoint_rhs = (1..=p.n as u32)
        .map(|i| diff(Var::State(i)).neg().add(&force[i as usize - 1]))
        .collect();
    let stationary = (1..=p.m as u32).map(|j| diff(Var::Control(j))).collect();
    HamiltonianSystem {
        h,
        state_rhs,
        adjoint_rhs,
        stationary,
    }
}

/// Solves the stationary system for the controls. Requires every stationary
/// equation to be affine in the controls with control-free coefficients and
/// the resulting linear system to be uniquely solvable; the solution maps
/// `u_j` to an expression in (t, x, psi).
pub fn solve_controls(p: &OCProblem) -> Result<Vec<Expr>, PmpError> {
    let sys = hamiltonian_system(p);
    let uvars: BTreeSet<Var> = p.control_vars().into_iter().collect();
    let m = p.m;

    // stationary[j] = sum_k a[j][k] u_k + c[j]
    let mut a = vec![vec![Expr::zero(); m]; m];
    let mut rhs = vec![Expr::zero(); m];
    for (j, stat) in sys.stationary.iter().enumerate() {
        let groups = stat.collect(&uvars)?;
        for (mon, coeff) in groups {
            if mon.is_one() {
                rhs[j] = coeff.neg();
            } else if mon.degree() == 1 {
                let v = mon.vars().next().expect("degree-one monomial").clone();
                if let Var::Control(k) = v {
                    a[j][k as usize - 1] = coeff;
                } else {
                    unreachable!("collect over control variables");
                }
            } else {
                return Err(PmpError::NonlinearControls { equation: j + 1 });
            }
        }
    }

    // Exact Gaussian elimination over the rational-function field.
    let mut rows: Vec<usize> = (0..m).collect();
    let mut solution = vec![Expr::zero(); m];
    for col in 0..m {
        let pivot_pos = (col..m)
            .find(|&r| !a[rows[r]][col].is_zero())
            .ok_or(PmpError::SingularControls)?;
        rows.swap(col, pivot_pos);
        let pr = rows[col];
        let pivot = a[pr][col].clone();
        for entry in a[pr][col..].iter_mut() {
            *entry = entry.div(&pivot).expect("nonzero pivot");
        }
        rhs[pr] = rhs[pr].div(&pivot).expect("nonzero pivot");
        let pivot_row = a[pr].clone();
        for &r in &rows {
            if r == pr {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (entry, pivot_entry) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry = entry.sub(&factor.mul(pivot_entry));
            }
            rhs[r] = rhs[r].sub(&factor.mul(&rhs[pr]));
        }
    }
    for (col, slot) in solution.iter_mut().enumerate() {
        *slot = rhs[rows[col]].clone();
    }
    Ok(solution)
}

/// Residual of the identity `dH/dt = dH/dt|partial + xdot . F` along the
/// Hamiltonian system: the chain-rule expansion of `dH/dt` is evaluated with
/// `xdot = phi`, `psidot` from the adjoint equations and `u` from
/// [`solve_controls`]; the formal `udot` terms vanish because their
/// coefficients are the stationary conditions. Must normalize to zero.
pub fn dhdt_residual(p: &OCProblem) -> Result<Expr, PmpError> {
    let controls = solve_controls(p)?;
    let sys = hamiltonian_system(p);
    let force = p.force_or_zero();
    let mut r = Expr::zero();
    for (i, (state_rhs, adjoint_rhs)) in sys.state_rhs.iter().zip(&sys.adjoint_rhs).enumerate() {
        let xi = Var::State(i as u32 + 1);
        let psii = Var::Costate(i as u32 + 1);
        r = r.add(&sys.h.diff(&xi)?.mul(state_rhs));
        r = r.add(&sys.h.diff(&psii)?.mul(adjoint_rhs));
        r = r.sub(&state_rhs.mul(&force[i]));
    }
    for j in 0..p.m {
        let uj = Var::Control(j as u32 + 1);
        r = r.add(
            &sys.h
                .diff(&uj)?
                .mul(&Expr::var(Var::DotControl(j as u32 + 1))),
        );
    }
    Ok(r.substitute(&control_bindings(&controls))?)
}
