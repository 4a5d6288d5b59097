//! Problem data model, expression grammar, and the problem-file parser.
//!
//! Problem files are UTF-8 and line oriented; `#` starts a comment:
//!
//! ```text
//! states: x1 x2            # state names, n >= 1
//! controls: u1             # control names, m >= 1
//! params: a b mu           # optional scalar parameters
//! opaque: z                # optional auxiliary time functions (force only)
//! lagrangian: <expr>
//! phi: <expr>              # exactly n lines, in state order
//! force: <expr>            # 0 or n lines
//! mode: normal             # optional, normal|abnormal
//! ```
//!
//! Expressions use rational literals (`3`, `5/2`), declared identifiers,
//! `+ - * / ^` with integer exponents, and parentheses; `^` binds tightest,
//! unary minus is allowed, implicit multiplication is not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::symexpr::{render_expr, Expr, Var};

/// Multiplier mode: fixes the value of `psi0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Abnormal,
}

impl Mode {
    /// The value of `psi0`: -1 in normal mode, 0 in abnormal mode.
    pub fn psi0(&self) -> i64 {
        match self {
            Mode::Normal => -1,
            Mode::Abnormal => 0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Normal => write!(f, "normal"),
            Mode::Abnormal => write!(f, "abnormal"),
        }
    }
}

/// Declared identifiers of a problem; resolves identifiers to variables and
/// variables back to display names.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub states: Vec<String>,
    pub controls: Vec<String>,
    pub params: BTreeSet<String>,
    pub opaques: BTreeSet<String>,
}

impl SymbolTable {
    pub fn new(states: &[&str], controls: &[&str]) -> Self {
        SymbolTable {
            states: states.iter().map(|s| s.to_string()).collect(),
            controls: controls.iter().map(|s| s.to_string()).collect(),
            params: BTreeSet::new(),
            opaques: BTreeSet::new(),
        }
    }

    pub fn with_params(mut self, params: &[&str]) -> Self {
        self.params = params.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_opaques(mut self, opaques: &[&str]) -> Self {
        self.opaques = opaques.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Resolves an identifier to a variable. Declared names shadow nothing:
    /// `t`, `psi0`, `psi<i>`, `C<k>`, `alpha<k>` are reserved and rejected at
    /// declaration time.
    pub fn resolve(&self, ident: &str) -> Option<Var> {
        if let Some(base) = ident.strip_suffix('\'') {
            return match self.resolve(base)? {
                Var::State(i) => Some(Var::DotState(i)),
                Var::Control(j) => Some(Var::DotControl(j)),
                Var::Costate(i) => Some(Var::DotCostate(i)),
                _ => None,
            };
        }
        if let Some(i) = self.states.iter().position(|s| s == ident) {
            return Some(Var::State(i as u32 + 1));
        }
        if let Some(j) = self.controls.iter().position(|s| s == ident) {
            return Some(Var::Control(j as u32 + 1));
        }
        if self.params.contains(ident) || self.opaques.contains(ident) {
            return Some(Var::opaque(ident));
        }
        if ident == "t" {
            return Some(Var::Time);
        }
        if ident == "psi0" {
            return Some(Var::CostateZero);
        }
        if let Some(i) = parse_indexed(ident, "psi") {
            if i >= 1 && (i as usize) <= self.states.len() {
                return Some(Var::Costate(i));
            }
            return None;
        }
        if let Some(k) = parse_indexed(ident, "C") {
            if k >= 1 {
                return Some(Var::FreeConstant(k));
            }
            return None;
        }
        if let Some(k) = parse_indexed(ident, "alpha") {
            if k >= 1 {
                return Some(Var::AnsatzCoeff(k));
            }
            return None;
        }
        None
    }

    /// Display name for a variable; declared names are used for states and
    /// controls, with positional fallbacks for out-of-range indices.
    pub fn name_of(&self, v: &Var) -> String {
        match v {
            Var::State(i) => self
                .states
                .get(*i as usize - 1)
                .cloned()
                .unwrap_or_else(|| format!("x{}", i)),
            Var::Control(j) => self
                .controls
                .get(*j as usize - 1)
                .cloned()
                .unwrap_or_else(|| format!("u{}", j)),
            Var::DotState(i) => format!("{}'", self.name_of(&Var::State(*i))),
            Var::DotControl(j) => format!("{}'", self.name_of(&Var::Control(*j))),
            other => other.to_string(),
        }
    }

    /// Renders an expression in the grammar, using this table's names.
    pub fn render(&self, e: &Expr) -> String {
        render_expr(e, &|v| self.name_of(v))
    }
}

fn parse_indexed(ident: &str, prefix: &str) -> Option<u32> {
    let rest = ident.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn is_reserved(name: &str) -> bool {
    name == "t"
        || name == "H"
        || name == "const"
        || name == "psi0"
        || parse_indexed(name, "psi").is_some()
        || parse_indexed(name, "C").is_some()
        || parse_indexed(name, "alpha").is_some()
}

fn is_valid_ident(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// An optimal control problem instance.
#[derive(Clone, Debug)]
pub struct OCProblem {
    /// State dimension n.
    pub n: usize,
    /// Control dimension m.
    pub m: usize,
    /// Lagrangian L(t, x, u).
    pub lagrangian: Expr,
    /// Velocity vector phi, one entry per state equation.
    pub phi: Vec<Expr>,
    /// Nonconservative force vector, when present (length n).
    pub force: Option<Vec<Expr>>,
    pub mode: Mode,
    pub symbols: SymbolTable,
}

impl OCProblem {
    pub fn state_vars(&self) -> Vec<Var> {
        (1..=self.n as u32).map(Var::State).collect()
    }

    pub fn control_vars(&self) -> Vec<Var> {
        (1..=self.m as u32).map(Var::Control).collect()
    }

    pub fn costate_vars(&self) -> Vec<Var> {
        (1..=self.n as u32).map(Var::Costate).collect()
    }

    pub fn force_or_zero(&self) -> Vec<Expr> {
        match &self.force {
            Some(f) => f.clone(),
            None => vec![Expr::zero(); self.n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Malformed input; `col` is 1-based.
    Syntax { col: usize, msg: String },
    /// An identifier that resolves to no declared or built-in variable.
    UnknownIdentifier { col: usize, name: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { col, msg } => write!(f, "syntax error at column {}: {}", col, msg),
            ParseError::UnknownIdentifier { col, name } => {
                write!(f, "unknown identifier `{}` at column {}", name, col)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemError {
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    UnknownIdentifier {
        line: usize,
        col: usize,
        name: String,
    },
    ReservedName {
        line: usize,
        name: String,
    },
    DuplicateName {
        line: usize,
        name: String,
    },
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    MissingSection(&'static str),
    DuplicateSection {
        line: usize,
        section: String,
    },
    /// Validation diagnostics for a structurally well-formed file.
    Invalid(Vec<String>),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::Syntax { line, col, msg } => {
                write!(f, "line {}: syntax error at column {}: {}", line, col, msg)
            }
            ProblemError::UnknownIdentifier { line, col, name } => {
                write!(
                    f,
                    "line {}: unknown identifier `{}` at column {}",
                    line, name, col
                )
            }
            ProblemError::ReservedName { line, name } => {
                write!(f, "line {}: `{}` is a reserved name", line, name)
            }
            ProblemError::DuplicateName { line, name } => {
                write!(f, "line {}: `{}` is declared twice", line, name)
            }
            ProblemError::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(
                f,
                "dimension mismatch: expected {} {} line(s), got {}",
                expected, what, got
            ),
            ProblemError::MissingSection(s) => write!(f, "missing `{}:` section", s),
            ProblemError::DuplicateSection { line, section } => {
                write!(f, "line {}: duplicate `{}:` section", line, section)
            }
            ProblemError::Invalid(diags) => {
                write!(f, "invalid problem: {}", diags.join("; "))
            }
        }
    }
}

impl std::error::Error for ProblemError {}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>, // token and 1-based column
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let value = digits.parse::<BigInt>().expect("digit run");
                toks.push((Tok::Num(value), col));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                toks.push((Tok::Ident(ident), col));
            }
            other => {
                return Err(ParseError::Syntax {
                    col,
                    msg: format!("unexpected character `{}`", other),
                });
            }
        }
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
}

struct ExprParser<'a> {
    lexer: Lexer,
    table: &'a SymbolTable,
}

impl<'a> ExprParser<'a> {
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.lexer.peek().0 {
                Tok::Plus => {
                    self.lexer.next();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.lexer.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.lexer.peek().0 {
                Tok::Star => {
                    self.lexer.next();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    let (_, col) = self.lexer.next();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).map_err(|_| ParseError::Syntax {
                        col,
                        msg: "division by zero".to_string(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.lexer.peek().0, Tok::Minus) {
            self.lexer.next();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.lexer.peek().0, Tok::Caret) {
            let (_, caret_col) = self.lexer.next();
            let negative = if matches!(self.lexer.peek().0, Tok::Minus) {
                self.lexer.next();
                true
            } else {
                false
            };
            let (tok, col) = self.lexer.next();
            let Tok::Num(digits) = tok else {
                return Err(ParseError::Syntax {
                    col,
                    msg: "expected an integer exponent".to_string(),
                });
            };
            let mut e: i32 = i32::try_from(&digits).map_err(|_| ParseError::Syntax {
                col,
                msg: "exponent too large".to_string(),
            })?;
            if negative {
                e = -e;
            }
            return base.pow(e).map_err(|_| ParseError::Syntax {
                col: caret_col,
                msg: "zero raised to a negative power".to_string(),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, col) = self.lexer.next();
        match tok {
            Tok::Num(n) => Ok(Expr::constant(BigRational::from_integer(n))),
            Tok::Ident(name) => match self.table.resolve(&name) {
                Some(v) => Ok(Expr::var(v)),
                None => Err(ParseError::UnknownIdentifier { col, name }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                let (tok, col) = self.lexer.next();
                if tok == Tok::RParen {
                    Ok(inner)
                } else {
                    Err(ParseError::Syntax {
                        col,
                        msg: "expected `)`".to_string(),
                    })
                }
            }
            _ => Err(ParseError::Syntax {
                col,
                msg: "expected an operand".to_string(),
            }),
        }
    }
}

/// Parses one expression against the declared identifiers of a problem.
pub fn parse_expression(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let lexer = lex(text)?;
    let mut parser = ExprParser { lexer, table };
    let e = parser.expr()?;
    let (tok, col) = parser.lexer.next();
    if tok != Tok::End {
        return Err(ParseError::Syntax {
            col,
            msg: "unexpected trailing input".to_string(),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Problem-file parsing
// ---------------------------------------------------------------------------

/// Parses a problem file and validates the result.
pub fn parse_problem(text: &str) -> Result<OCProblem, ProblemError> {
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut controls: Option<(usize, Vec<String>)> = None;
    let mut params: Vec<(usize, String)> = Vec::new();
    let mut opaques: Vec<(usize, String)> = Vec::new();
    let mut lagrangian: Option<(usize, String)> = None;
    let mut phi: Vec<(usize, String)> = Vec::new();
    let mut force: Vec<(usize, String)> = Vec::new();
    let mut mode: Option<(usize, Mode)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(ProblemError::Syntax {
                line: line_no,
                col: line.chars().count() + 1,
                msg: "expected `section: value`".to_string(),
            });
        };
        let key = key.trim();
        let rest = rest.trim().to_string();
        match key {
            "states" | "controls" => {
                let slot = if key == "states" {
                    &mut states
                } else {
                    &mut controls
                };
                if slot.is_some() {
                    return Err(ProblemError::DuplicateSection {
                        line: line_no,
                        section: key.to_string(),
                    });
                }
                let names: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
                *slot = Some((line_no, names));
            }
            "params" => params.extend(rest.split_whitespace().map(|s| (line_no, s.to_string()))),
            "opaque" => opaques.extend(rest.split_whitespace().map(|s| (line_no, s.to_string()))),
            "lagrangian" => {
                if lagrangian.is_some() {
                    return Err(ProblemError::DuplicateSection {
                        line: line_no,
                        section: key.to_string(),
                    });
                }
                lagrangian = Some((line_no, rest));
            }
            "phi" => phi.push((line_no, rest)),
            "force" => force.push((line_no, rest)),
            "mode" => {
                if mode.is_some() {
                    return Err(ProblemError::DuplicateSection {
                        line: line_no,
                        section: key.to_string(),
                    });
                }
                let value = match rest.as_str() {
                    "normal" => Mode::Normal,
                    "abnormal" => Mode::Abnormal,
                    other => {
                        return Err(ProblemError::Syntax {
                            line: line_no,
                            col: 1,
                            msg: format!("unknown mode `{}` (use normal|abnormal)", other),
                        })
                    }
                };
                mode = Some((line_no, value));
            }
            other => {
                return Err(ProblemError::Syntax {
                    line: line_no,
                    col: 1,
                    msg: format!("unknown section `{}`", other),
                });
            }
        }
    }

    let (states_line, state_names) = states.ok_or(ProblemError::MissingSection("states"))?;
    let (controls_line, control_names) =
        controls.ok_or(ProblemError::MissingSection("controls"))?;
    let (lag_line, lag_text) = lagrangian.ok_or(ProblemError::MissingSection("lagrangian"))?;
    if state_names.is_empty() {
        return Err(ProblemError::Syntax {
            line: states_line,
            col: 1,
            msg: "at least one state is required".to_string(),
        });
    }
    if control_names.is_empty() {
        return Err(ProblemError::Syntax {
            line: controls_line,
            col: 1,
            msg: "at least one control is required".to_string(),
        });
    }

    // Declared names: valid identifiers, not reserved, pairwise distinct.
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let declared: Vec<(usize, &String)> = state_names
        .iter()
        .map(|s| (states_line, s))
        .chain(control_names.iter().map(|s| (controls_line, s)))
        .chain(params.iter().map(|(l, s)| (*l, s)))
        .chain(opaques.iter().map(|(l, s)| (*l, s)))
        .collect();
    for (line, name) in declared {
        if !is_valid_ident(name) || name.ends_with('\'') {
            return Err(ProblemError::Syntax {
                line,
                col: 1,
                msg: format!("invalid identifier `{}`", name),
            });
        }
        if is_reserved(name) {
            return Err(ProblemError::ReservedName {
                line,
                name: name.clone(),
            });
        }
        if !seen.insert(name) {
            return Err(ProblemError::DuplicateName {
                line,
                name: name.clone(),
            });
        }
    }

    let n = state_names.len();
    if phi.len() != n {
        return Err(ProblemError::DimensionMismatch {
            what: "phi".to_string(),
            expected: n,
            got: phi.len(),
        });
    }
    if !force.is_empty() && force.len() != n {
        return Err(ProblemError::DimensionMismatch {
            what: "force".to_string(),
            expected: n,
            got: force.len(),
        });
    }

    let table = SymbolTable {
        states: state_names,
        controls: control_names,
        params: params.into_iter().map(|(_, s)| s).collect(),
        opaques: opaques.into_iter().map(|(_, s)| s).collect(),
    };

    let parse_line = |line: usize, text: &str| -> Result<Expr, ProblemError> {
        parse_expression(text, &table).map_err(|e| match e {
            ParseError::Syntax { col, msg } => ProblemError::Syntax { line, col, msg },
            ParseError::UnknownIdentifier { col, name } => {
                ProblemError::UnknownIdentifier { line, col, name }
            }
        })
    };

    let lagrangian = parse_line(lag_line, &lag_text)?;
    let phi = phi
        .iter()
        .map(|(l, s)| parse_line(*l, s))
        .collect::<Result<Vec<_>, _>>()?;
    let force = if force.is_empty() {
        None
    } else {
        Some(
            force
                .iter()
                .map(|(l, s)| parse_line(*l, s))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };

    let problem = OCProblem {
        n,
        m: table.controls.len(),
        lagrangian,
        phi,
        force,
        mode: mode.map(|(_, m)| m).unwrap_or(Mode::Normal),
        symbols: table,
    };

    let diagnostics = validate(&problem);
    if !diagnostics.is_empty() {
        return Err(ProblemError::Invalid(diagnostics));
    }
    Ok(problem)
}

/// Checks the invariants of a problem; returns human-readable diagnostics,
/// empty when the problem is well formed.
pub fn validate(p: &OCProblem) -> Vec<String> {
    let mut diags = Vec::new();
    if p.n == 0 {
        diags.push("state dimension must be positive".to_string());
    }
    if p.m == 0 {
        diags.push("control dimension must be positive".to_string());
    }
    if p.phi.len() != p.n {
        diags.push(format!("phi has {} entries, expected {}", p.phi.len(), p.n));
    }
    if let Some(f) = &p.force {
        if f.len() != p.n {
            diags.push(format!("force has {} entries, expected {}", f.len(), p.n));
        }
    }

    let mut check = |what: &str, e: &Expr, allow_time_opaques: bool| {
        for v in e.vars() {
            let ok = match &v {
                Var::Time => true,
                Var::State(i) => *i >= 1 && (*i as usize) <= p.n,
                Var::Control(j) => *j >= 1 && (*j as usize) <= p.m,
                Var::Opaque(name) => {
                    p.symbols.params.contains(name.as_ref())
                        || (allow_time_opaques && p.symbols.opaques.contains(name.as_ref()))
                }
                _ => false,
            };
            if !ok {
                diags.push(format!(
                    "unknown identifier {} in {}",
                    p.symbols.name_of(&v),
                    what
                ));
            }
        }
    };

    check("lagrangian", &p.lagrangian, false);
    for (i, e) in p.phi.iter().enumerate() {
        check(&format!("phi[{}]", i + 1), e, false);
    }
    if let Some(force) = &p.force {
        for (i, e) in force.iter().enumerate() {
            check(&format!("force[{}]", i + 1), e, true);
        }
    }
    diags
}

/// Substitution bindings from control variables to expressions.
pub fn control_bindings(solutions: &[Expr]) -> BTreeMap<Var, Expr> {
    solutions
        .iter()
        .enumerate()
        .map(|(j, e)| (Var::Control(j as u32 + 1), e.clone()))
        .collect()
}
