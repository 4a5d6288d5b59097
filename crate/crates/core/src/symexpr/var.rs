use std::fmt;
use std::sync::Arc;

/// A symbolic indeterminate.
///
/// Variant declaration order fixes the global variable order used by the
/// monomial order (and hence every canonical form and rendering); do not
/// reorder. Indices are 1-based. Dotted variants are formal indeterminates
/// standing for time derivatives; they are never produced by differentiation,
/// only introduced explicitly when total derivatives are expanded.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Independent time variable `t`.
    Time,
    /// State variable, `x_i`.
    State(u32),
    /// Control variable, `u_j`.
    Control(u32),
    /// The cost multiplier `psi0`.
    CostateZero,
    /// Costate (adjoint multiplier), `psi_i`.
    Costate(u32),
    /// Formal `dx_i/dt`.
    DotState(u32),
    /// Formal `du_j/dt`.
    DotControl(u32),
    /// Formal `dpsi_i/dt`.
    DotCostate(u32),
    /// Free constant `C_k` of a symmetry family.
    FreeConstant(u32),
    /// Undetermined coefficient of a polynomial ansatz.
    AnsatzCoeff(u32),
    /// Named scalar parameter or auxiliary time function. Opaque variables
    /// are carried as atoms and may never be differentiated.
    Opaque(Arc<str>),
}

impl Var {
    pub fn opaque(name: &str) -> Self {
        Var::Opaque(Arc::from(name))
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self, Var::Opaque(_))
    }

    pub fn is_dotted(&self) -> bool {
        matches!(
            self,
            Var::DotState(_) | Var::DotControl(_) | Var::DotCostate(_)
        )
    }

    pub fn is_ansatz(&self) -> bool {
        matches!(self, Var::AnsatzCoeff(_))
    }
}

impl fmt::Display for Var {
    /// Default naming: `t`, `x1`, `u1`, `psi0`, `psi1`, `x1'`, `u1'`,
    /// `psi1'`, `C1`, `alpha1`, or the opaque name. Problems with declared
    /// state/control names substitute their own names for `x{i}`/`u{j}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Time => write!(f, "t"),
            Var::State(i) => write!(f, "x{}", i),
            Var::Control(j) => write!(f, "u{}", j),
            Var::CostateZero => write!(f, "psi0"),
            Var::Costate(i) => write!(f, "psi{}", i),
            Var::DotState(i) => write!(f, "x{}'", i),
            Var::DotControl(j) => write!(f, "u{}'", j),
            Var::DotCostate(i) => write!(f, "psi{}'", i),
            Var::FreeConstant(k) => write!(f, "C{}", k),
            Var::AnsatzCoeff(k) => write!(f, "alpha{}", k),
            Var::Opaque(name) => write!(f, "{}", name),
        }
    }
}
