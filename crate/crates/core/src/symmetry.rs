//! Variational symmetries up to a gauge term.
//!
//! The invariance identity (partial derivatives of H, total derivatives of
//! the generators)
//!
//! ```text
//! dH/dt T + dH/dx . X + dH/du . U + dH/dpsi . Psi
//!     - Psi . xdot - psi . dX/dt + H dT/dt = dG/dt
//! ```
//!
//! is expanded with the total derivatives written out over the formal dotted
//! indeterminates. Demanding that it hold identically in `xdot`, `udot`,
//! `psidot` yields the determining system of PDE residuals. A bounded-degree
//! polynomial ansatz for the unknown generator functions turns the residuals
//! into an exact homogeneous linear system over the ansatz coefficients; its
//! nullspace is the family of symmetries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::linalg::{self, RatMatrix};
use crate::pmp;
use crate::problem::OCProblem;
use crate::symexpr::{Expr, ExprError, Monomial, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    Expr(ExprError),
    /// The reduced system failed an internal structural invariant (it must be
    /// linear and homogeneous in the ansatz coefficients).
    Internal(String),
}

impl fmt::Display for SymmetryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryError::Expr(e) => write!(f, "{}", e),
            SymmetryError::Internal(msg) => write!(f, "internal invariant violated: {}", msg),
        }
    }
}

impl std::error::Error for SymmetryError {}

impl From<ExprError> for SymmetryError {
    fn from(e: ExprError) -> Self {
        SymmetryError::Expr(e)
    }
}

/// The variable groups a generator component may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepSet {
    pub time: bool,
    pub state: bool,
    pub control: bool,
    pub costate: bool,
}

impl DepSet {
    pub const fn new(time: bool, state: bool, control: bool, costate: bool) -> Self {
        DepSet {
            time,
            state,
            control,
            costate,
        }
    }

    pub const fn all() -> Self {
        DepSet::new(true, true, true, true)
    }

    pub fn is_subset_of(&self, other: &DepSet) -> bool {
        (!self.time || other.time)
            && (!self.state || other.state)
            && (!self.control || other.control)
            && (!self.costate || other.costate)
    }
}

/// Dependence restriction for the generators T, X, U, Psi and the gauge term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DependenceConfig {
    pub t: DepSet,
    pub x: DepSet,
    pub u: DepSet,
    pub psi: DepSet,
    pub gauge: DepSet,
}

const GAUGE_DEPS: DepSet = DepSet::new(true, true, false, false);

impl DependenceConfig {
    /// All four generators depend on (t, x, u, psi).
    pub const fn d1() -> Self {
        DependenceConfig {
            t: DepSet::all(),
            x: DepSet::all(),
            u: DepSet::all(),
            psi: DepSet::all(),
            gauge: GAUGE_DEPS,
        }
    }

    /// T(t), X(t, x), U(u, psi), Psi(psi).
    pub const fn d2() -> Self {
        DependenceConfig {
            t: DepSet::new(true, false, false, false),
            x: DepSet::new(true, true, false, false),
            u: DepSet::new(false, false, true, true),
            psi: DepSet::new(false, false, false, true),
            gauge: GAUGE_DEPS,
        }
    }

    /// T(t), X(t, x), U(t, u), Psi(t, psi); the recommended default.
    pub const fn d3() -> Self {
        DependenceConfig {
            t: DepSet::new(true, false, false, false),
            x: DepSet::new(true, true, false, false),
            u: DepSet::new(true, false, true, false),
            psi: DepSet::new(true, false, false, true),
            gauge: GAUGE_DEPS,
        }
    }

    /// T(t), X(x), U(u), Psi(psi); the minimal set.
    pub const fn d4() -> Self {
        DependenceConfig {
            t: DepSet::new(true, false, false, false),
            x: DepSet::new(false, true, false, false),
            u: DepSet::new(false, false, true, false),
            psi: DepSet::new(false, false, false, true),
            gauge: GAUGE_DEPS,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "D1" | "d1" => Some(Self::d1()),
            "D2" | "d2" => Some(Self::d2()),
            "D3" | "d3" => Some(Self::d3()),
            "D4" | "d4" => Some(Self::d4()),
            _ => None,
        }
    }

    pub fn preset_name(&self) -> Option<&'static str> {
        for (name, cfg) in [
            ("D1", Self::d1()),
            ("D2", Self::d2()),
            ("D3", Self::d3()),
            ("D4", Self::d4()),
        ] {
            if *self == cfg {
                return Some(name);
            }
        }
        None
    }

    /// Componentwise containment of dependence sets.
    pub fn is_subset_of(&self, other: &DependenceConfig) -> bool {
        self.t.is_subset_of(&other.t)
            && self.x.is_subset_of(&other.x)
            && self.u.is_subset_of(&other.u)
            && self.psi.is_subset_of(&other.psi)
            && self.gauge.is_subset_of(&other.gauge)
    }
}

/// How the unknown functions are written as polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Separation {
    /// Each unknown is a sum of single-variable polynomials (one per allowed
    /// variable) plus a constant.
    Additive,
    /// Each unknown is a full multivariate polynomial of bounded total degree
    /// over its allowed variables.
    Dense,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Separation::Additive => write!(f, "additive"),
            Separation::Dense => write!(f, "dense"),
        }
    }
}

/// Ansatz parameters: dependence restriction, per-variable polynomial degree,
/// and separation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub config: DependenceConfig,
    pub degree: u32,
    pub separation: Separation,
}

impl AnsatzSpec {
    pub fn new(config: DependenceConfig) -> Self {
        AnsatzSpec {
            config,
            degree: 2,
            separation: Separation::Additive,
        }
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        self.degree = degree;
        self
    }

    pub fn dense(mut self) -> Self {
        self.separation = Separation::Dense;
        self
    }
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        AnsatzSpec::new(DependenceConfig::d3())
    }
}

/// Concrete generator functions (T, X, U, Psi) and gauge term G.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub t: Expr,
    pub x: Vec<Expr>,
    pub u: Vec<Expr>,
    pub psi: Vec<Expr>,
    pub gauge: Expr,
}

impl GeneratorSet {
    pub fn zero(n: usize, m: usize) -> Self {
        GeneratorSet {
            t: Expr::zero(),
            x: vec![Expr::zero(); n],
            u: vec![Expr::zero(); m],
            psi: vec![Expr::zero(); n],
            gauge: Expr::zero(),
        }
    }

    pub fn substitute(&self, bindings: &BTreeMap<Var, Expr>) -> Result<GeneratorSet, ExprError> {
        Ok(GeneratorSet {
            t: self.t.substitute(bindings)?,
            x: self
                .x
                .iter()
                .map(|e| e.substitute(bindings))
                .collect::<Result<_, _>>()?,
            u: self
                .u
                .iter()
                .map(|e| e.substitute(bindings))
                .collect::<Result<_, _>>()?,
            psi: self
                .psi
                .iter()
                .map(|e| e.substitute(bindings))
                .collect::<Result<_, _>>()?,
            gauge: self.gauge.substitute(bindings)?,
        })
    }

    pub fn components(&self) -> Vec<&Expr> {
        let mut out = vec![&self.t];
        out.extend(self.x.iter());
        out.extend(self.u.iter());
        out.extend(self.psi.iter());
        out.push(&self.gauge);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|e| e.is_zero())
    }
}

/// One sparse linear equation row over the ansatz-coefficient columns.
type SparseRow = Vec<(usize, BigRational)>;

/// A polynomial ansatz: generators whose coefficients are fresh
/// `AnsatzCoeff` unknowns, plus the list of those unknowns in order.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub gens: GeneratorSet,
    pub coeffs: Vec<Var>,
}

struct CoeffSource {
    next: u32,
    all: Vec<Var>,
}

impl CoeffSource {
    fn fresh(&mut self) -> Expr {
        let v = Var::AnsatzCoeff(self.next);
        self.next += 1;
        self.all.push(v.clone());
        Expr::var(v)
    }
}

fn allowed_vars(deps: &DepSet, n: usize, m: usize) -> Vec<Var> {
    let mut vars = Vec::new();
    if deps.time {
        vars.push(Var::Time);
    }
    if deps.state {
        vars.extend((1..=n as u32).map(Var::State));
    }
    if deps.control {
        vars.extend((1..=m as u32).map(Var::Control));
    }
    if deps.costate {
        vars.extend((1..=n as u32).map(Var::Costate));
    }
    vars
}

fn unknown_function(
    deps: &DepSet,
    spec: &AnsatzSpec,
    n: usize,
    m: usize,
    source: &mut CoeffSource,
) -> Expr {
    let vars = allowed_vars(deps, n, m);
    match spec.separation {
        Separation::Additive => {
            let mut acc = source.fresh();
            for v in &vars {
                for d in 1..=spec.degree {
                    acc = acc.add(&source.fresh().mul(&Expr::var(v.clone()).pow_u(d)));
                }
            }
            acc
        }
        Separation::Dense => {
            let mut acc = Expr::zero();
            for mon in monomials_up_to(&vars, spec.degree) {
                let mut term = source.fresh();
                for (v, e) in mon.factors() {
                    term = term.mul(&Expr::var(v.clone()).pow_u(*e));
                }
                acc = acc.add(&term);
            }
            acc
        }
    }
}

/// All monomials over `vars` of total degree at most `degree`, in a fixed
/// deterministic order.
fn monomials_up_to(vars: &[Var], degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; vars.len()];
    fn rec(vars: &[Var], exps: &mut Vec<u32>, idx: usize, remaining: u32, out: &mut Vec<Monomial>) {
        if idx == vars.len() {
            out.push(Monomial::from_pairs(
                vars.iter().cloned().zip(exps.iter().copied()).collect(),
            ));
            return;
        }
        for e in 0..=remaining {
            exps[idx] = e;
            rec(vars, exps, idx + 1, remaining - e, out);
        }
        exps[idx] = 0;
    }
    rec(vars, &mut exps, 0, degree, &mut out);
    out
}

/// Writes the generators and (when enabled) the gauge term as polynomials in
/// their allowed variables with fresh undetermined coefficients; the result
/// is linear and homogeneous in those coefficients.
pub fn build_ansatz(p: &OCProblem, spec: &AnsatzSpec, gauge: bool) -> Ansatz {
    assert!(spec.degree >= 1, "ansatz degree must be at least 1");
    let mut source = CoeffSource {
        next: 1,
        all: Vec::new(),
    };
    let cfg = &spec.config;
    let t = unknown_function(&cfg.t, spec, p.n, p.m, &mut source);
    let x = (0..p.n)
        .map(|_| unknown_function(&cfg.x, spec, p.n, p.m, &mut source))
        .collect();
    let u = (0..p.m)
        .map(|_| unknown_function(&cfg.u, spec, p.n, p.m, &mut source))
        .collect();
    let psi = (0..p.n)
        .map(|_| unknown_function(&cfg.psi, spec, p.n, p.m, &mut source))
        .collect();
    let gauge_term = if gauge {
        unknown_function(&cfg.gauge, spec, p.n, p.m, &mut source)
    } else {
        Expr::zero()
    };
    Ansatz {
        gens: GeneratorSet {
            t,
            x,
            u,
            psi,
            gauge: gauge_term,
        },
        coeffs: source.all,
    }
}

/// The determining PDE system of a problem under a dependence restriction:
/// maps concrete generator functions to the residuals that must vanish.
pub struct DeterminingSystem {
    h: Expr,
    n: usize,
    m: usize,
    cfg: DependenceConfig,
    gauge: bool,
}

impl DeterminingSystem {
    pub fn new(p: &OCProblem, cfg: DependenceConfig, gauge: bool) -> Self {
        DeterminingSystem {
            h: pmp::hamiltonian(p),
            n: p.n,
            m: p.m,
            cfg,
            gauge,
        }
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    /// Total derivative of `f` along t, expanded over the dotted formal
    /// indeterminates.
    fn total_derivative(&self, f: &Expr) -> Result<Expr, ExprError> {
        let mut out = f.diff(&Var::Time)?;
        for i in 1..=self.n as u32 {
            out = out.add(&f.diff(&Var::State(i))?.mul(&Expr::var(Var::DotState(i))));
            out = out.add(
                &f.diff(&Var::Costate(i))?
                    .mul(&Expr::var(Var::DotCostate(i))),
            );
        }
        for j in 1..=self.m as u32 {
            out = out.add(
                &f.diff(&Var::Control(j))?
                    .mul(&Expr::var(Var::DotControl(j))),
            );
        }
        Ok(out)
    }

    /// The invariance identity residual as a single expression, polynomial in
    /// the dotted indeterminates.
    pub fn invariance_residual(&self, gens: &GeneratorSet) -> Result<Expr, ExprError> {
        let h = &self.h;
        let mut r = h.diff(&Var::Time)?.mul(&gens.t);
        for i in 1..=self.n as u32 {
            let idx = i as usize - 1;
            r = r.add(&h.diff(&Var::State(i))?.mul(&gens.x[idx]));
            r = r.add(&h.diff(&Var::Costate(i))?.mul(&gens.psi[idx]));
            r = r.sub(&gens.psi[idx].mul(&Expr::var(Var::DotState(i))));
            r = r.sub(&Expr::var(Var::Costate(i)).mul(&self.total_derivative(&gens.x[idx])?));
        }
        for j in 1..=self.m as u32 {
            r = r.add(&h.diff(&Var::Control(j))?.mul(&gens.u[j as usize - 1]));
        }
        r = r.add(&h.mul(&self.total_derivative(&gens.t)?));
        r = r.sub(&self.total_derivative(&gens.gauge)?);
        Ok(r)
    }

    /// Dotted monomials whose coefficients form the determining system under
    /// this configuration. The unit monomial and the `xdot` coefficients are
    /// always present; `udot` (resp. `psidot`) groups appear only when T, X,
    /// or G may depend on the controls (resp. costates).
    fn group_keys(&self) -> Vec<Monomial> {
        let mut keys = vec![Monomial::one()];
        keys.extend((1..=self.n as u32).map(|i| Monomial::var(Var::DotState(i))));
        let tx_control =
            self.cfg.t.control || self.cfg.x.control || (self.gauge && self.cfg.gauge.control);
        if tx_control {
            keys.extend((1..=self.m as u32).map(|j| Monomial::var(Var::DotControl(j))));
        }
        let tx_costate =
            self.cfg.t.costate || self.cfg.x.costate || (self.gauge && self.cfg.gauge.costate);
        if tx_costate {
            keys.extend((1..=self.n as u32).map(|i| Monomial::var(Var::DotCostate(i))));
        }
        keys
    }

    /// The residual equations: coefficients of the invariance identity with
    /// respect to the dotted indeterminates, in a fixed order (free term,
    /// then xdot, udot, psidot groups as admitted by the configuration).
    /// Generators that violate the configuration produce extra residuals,
    /// appended at the end; all residuals must vanish for a symmetry.
    pub fn residuals(&self, gens: &GeneratorSet) -> Result<Vec<Expr>, ExprError> {
        let full = self.invariance_residual(gens)?;
        let dotted: BTreeSet<Var> = (1..=self.n as u32)
            .flat_map(|i| [Var::DotState(i), Var::DotCostate(i)])
            .chain((1..=self.m as u32).map(Var::DotControl))
            .collect();
        let mut groups = full.collect(&dotted)?;
        let mut out = Vec::new();
        for key in self.group_keys() {
            out.push(groups.remove(&key).unwrap_or_else(Expr::zero));
        }
        for (_, extra) in groups {
            out.push(extra);
        }
        Ok(out)
    }
}

/// Builds the determining system residuals for given generators.
pub fn determining_system(
    p: &OCProblem,
    gens: &GeneratorSet,
    cfg: DependenceConfig,
    gauge: bool,
) -> Result<Vec<Expr>, ExprError> {
    DeterminingSystem::new(p, cfg, gauge).residuals(gens)
}

/// A family of symmetries, linear and homogeneous in its free constants.
#[derive(Clone, Debug)]
pub struct SymmetryFamily {
    pub constants: Vec<Var>,
    gens: GeneratorSet,
}

impl SymmetryFamily {
    pub fn new(constants: Vec<Var>, gens: GeneratorSet) -> Self {
        SymmetryFamily { constants, gens }
    }

    pub fn dimension(&self) -> usize {
        self.constants.len()
    }

    /// The combined generators, linear in the free constants.
    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    /// The basis direction obtained by setting the k-th constant (0-based) to
    /// one and the others to zero.
    pub fn branch(&self, k: usize) -> GeneratorSet {
        let bindings: BTreeMap<Var, Expr> = self
            .constants
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), if i == k { Expr::one() } else { Expr::zero() }))
            .collect();
        self.gens
            .substitute(&bindings)
            .expect("constants occur polynomially")
    }

    pub fn branches(&self) -> Vec<GeneratorSet> {
        (0..self.dimension()).map(|k| self.branch(k)).collect()
    }

    /// Exact span membership of a concrete generator set in this family.
    pub fn contains(&self, target: &GeneratorSet) -> bool {
        in_span(&self.branches(), target)
    }
}

/// Computes the family of symmetries admitted by the ansatz: substitutes the
/// ansatz into the determining system, collects every monomial coefficient in
/// the remaining variables, reduces the homogeneous rational linear system
/// over the ansatz coefficients, and reassembles the nullspace basis into
/// generators labelled by free constants `C1..Ck`.
pub fn find_symmetries(
    p: &OCProblem,
    spec: &AnsatzSpec,
    gauge: bool,
) -> Result<SymmetryFamily, SymmetryError> {
    let ansatz = build_ansatz(p, spec, gauge);
    let system = DeterminingSystem::new(p, spec.config, gauge);
    let residuals = system.residuals(&ansatz.gens)?;

    let col_of: BTreeMap<Var, usize> = ansatz
        .coeffs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();

    // Each residual must vanish identically in every non-ansatz variable:
    // collect and turn each coefficient into one linear equation.
    let rows_per_residual: Vec<Result<Vec<SparseRow>, SymmetryError>> = residuals
        .par_iter()
        .map(|res| {
            let collect_vars: BTreeSet<Var> =
                res.vars().into_iter().filter(|v| !v.is_ansatz()).collect();
            let groups = res.collect(&collect_vars)?;
            let mut rows = Vec::new();
            for (_, coeff) in groups {
                rows.push(linear_form(&coeff, &col_of)?);
            }
            Ok(rows)
        })
        .collect();

    let mut row_set: BTreeSet<SparseRow> = BTreeSet::new();
    for rows in rows_per_residual {
        for row in rows? {
            if !row.is_empty() {
                row_set.insert(row);
            }
        }
    }
    let rows: Vec<SparseRow> = row_set.into_iter().collect();
    let matrix = RatMatrix::from_sparse_rows(&rows, ansatz.coeffs.len());
    let basis = linalg::nullspace(&matrix);

    let constants: Vec<Var> = (1..=basis.len() as u32).map(Var::FreeConstant).collect();
    let mut combined = GeneratorSet::zero(p.n, p.m);
    for (k, vector) in basis.iter().enumerate() {
        let bindings: BTreeMap<Var, Expr> = ansatz
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), Expr::constant(vector[i].clone())))
            .collect();
        let branch = ansatz.gens.substitute(&bindings)?;
        let ck = Expr::var(constants[k].clone());
        combined = GeneratorSet {
            t: combined.t.add(&ck.mul(&branch.t)),
            x: combined
                .x
                .iter()
                .zip(&branch.x)
                .map(|(a, b)| a.add(&ck.mul(b)))
                .collect(),
            u: combined
                .u
                .iter()
                .zip(&branch.u)
                .map(|(a, b)| a.add(&ck.mul(b)))
                .collect(),
            psi: combined
                .psi
                .iter()
                .zip(&branch.psi)
                .map(|(a, b)| a.add(&ck.mul(b)))
                .collect(),
            gauge: combined.gauge.add(&ck.mul(&branch.gauge)),
        };
    }
    Ok(SymmetryFamily::new(constants, combined))
}

/// Extracts the linear form of an expression over the ansatz coefficients;
/// fails unless the expression is a polynomial whose every term is exactly
/// one ansatz coefficient with a rational factor (linear homogeneous).
fn linear_form(e: &Expr, col_of: &BTreeMap<Var, usize>) -> Result<SparseRow, SymmetryError> {
    if !e.is_polynomial() {
        return Err(SymmetryError::Internal(
            "non-polynomial coefficient in the reduced system".to_string(),
        ));
    }
    let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (mon, coeff) in e.num().terms() {
        let factors = mon.factors();
        let valid = factors.len() == 1 && factors[0].1 == 1 && factors[0].0.is_ansatz();
        if !valid {
            return Err(SymmetryError::Internal(format!(
                "reduced system is not linear homogeneous (term {})",
                mon.factors()
                    .iter()
                    .map(|(v, e)| format!("{}^{}", v, e))
                    .collect::<Vec<_>>()
                    .join("*")
            )));
        }
        let col = *col_of
            .get(&factors[0].0)
            .ok_or_else(|| SymmetryError::Internal("unknown ansatz coefficient".to_string()))?;
        let entry = row.entry(col).or_insert_with(BigRational::zero);
        *entry += coeff;
    }
    Ok(row.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

/// Substitutes concrete generators into the determining system and returns
/// the largest residual by term count; the zero expression certifies a valid
/// family (identically in any free constants the generators carry).
pub fn residual_check(
    p: &OCProblem,
    gens: &GeneratorSet,
    cfg: DependenceConfig,
    gauge: bool,
) -> Result<Expr, ExprError> {
    let residuals = DeterminingSystem::new(p, cfg, gauge).residuals(gens)?;
    Ok(residuals
        .into_iter()
        .max_by_key(|e| e.num().term_count())
        .unwrap_or_else(Expr::zero))
}

/// Flattens a generator set into (component, monomial) -> coefficient, for
/// exact span computations. Components must be polynomial.
fn flatten(gs: &GeneratorSet) -> BTreeMap<(usize, Monomial), BigRational> {
    let mut out = BTreeMap::new();
    for (ci, comp) in gs.components().into_iter().enumerate() {
        assert!(comp.is_polynomial(), "generator components are polynomial");
        for (mon, coeff) in comp.num().terms() {
            out.insert((ci, mon.clone()), coeff.clone());
        }
    }
    out
}

/// Exact membership of `target` in the rational span of `basis`.
pub fn in_span(basis: &[GeneratorSet], target: &GeneratorSet) -> bool {
    span_coordinates(basis, target).is_some()
}

/// Solves for the coordinates of `target` in the basis, if it lies in the
/// span.
pub fn span_coordinates(basis: &[GeneratorSet], target: &GeneratorSet) -> Option<Vec<BigRational>> {
    let flat_basis: Vec<_> = basis.iter().map(flatten).collect();
    let flat_target = flatten(target);
    let mut keys: BTreeSet<(usize, Monomial)> = BTreeSet::new();
    for fb in &flat_basis {
        keys.extend(fb.keys().cloned());
    }
    keys.extend(flat_target.keys().cloned());
    let keys: Vec<_> = keys.into_iter().collect();
    let mut matrix = RatMatrix::new(keys.len(), basis.len());
    let mut rhs = Vec::with_capacity(keys.len());
    for (row, key) in keys.iter().enumerate() {
        for (col, fb) in flat_basis.iter().enumerate() {
            if let Some(c) = fb.get(key) {
                matrix.set(row, col, c.clone());
            }
        }
        rhs.push(
            flat_target
                .get(key)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        );
    }
    linalg::solve(&matrix, &rhs)
}
