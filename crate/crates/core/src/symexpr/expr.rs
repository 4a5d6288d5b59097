use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};
use super::var::Var;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    /// A denominator became identically zero.
    DivisionByZero,
    /// Attempted to differentiate with respect to an opaque symbol.
    OpaqueDifferentiation(Var),
    /// The expression is not polynomial in the named variable (it occurs in a
    /// denominator) where a polynomial was required.
    NotPolynomialIn(Var),
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::DivisionByZero => write!(f, "division by zero"),
            ExprError::OpaqueDifferentiation(v) => {
                write!(
                    f,
                    "cannot differentiate with respect to opaque symbol {}",
                    v
                )
            }
            ExprError::NotPolynomialIn(v) => {
                write!(f, "expression is not polynomial in {}", v)
            }
        }
    }
}

impl std::error::Error for ExprError {}

/// A rational expression: a ratio of two polynomials in canonical form.
///
/// Canonical form: the denominator is nonzero and monic under the monomial
/// order, the common monomial factor of numerator and denominator is removed,
/// and the zero expression is `0/1`. Construction normalizes; mathematical
/// equality is decided by [`Expr::equal`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    fn make(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr {
                num: Poly::zero(),
                den: Poly::one(),
            });
        }
        let common = num.monomial_content().gcd(&den.monomial_content());
        let (mut num, mut den) = if common.is_one() {
            (num, den)
        } else {
            (num.div_monomial(&common), den.div_monomial(&common))
        };
        let lc = den.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(Expr { num, den })
    }

    /// Internal constructor for denominators known to be nonzero.
    fn make_nonzero_den(num: Poly, den: Poly) -> Expr {
        Expr::make(num, den).expect("denominator is nonzero")
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::make_nonzero_den(p, Poly::one())
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn from_int(n: i64) -> Expr {
        Expr::from_poly(Poly::from_int(n))
    }

    /// The exact rational n/d.
    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::constant(BigRational::new(n.into(), d.into()))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_poly(Poly::var(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Some(c) when the expression is the constant c.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Mathematical equality, decided by cross-multiplied cancellation.
    pub fn equal(&self, other: &Expr) -> bool {
        self.sub(other).is_zero()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.den == other.den {
            return Expr::make_nonzero_den(self.num.add(&other.num), self.den.clone());
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Expr::make_nonzero_den(num, self.den.mul(&other.den))
    }

    pub fn neg(&self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::make_nonzero_den(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, c: &BigRational) -> Expr {
        Expr::make_nonzero_den(self.num.scale(c), self.den.clone())
    }

    pub fn div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Expr::make(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// Nonnegative integer power.
    pub fn pow_u(&self, e: u32) -> Expr {
        Expr::make_nonzero_den(self.num.pow(e), self.den.pow(e))
    }

    /// Integer power; negative exponents invert (zero base fails).
    pub fn pow(&self, e: i32) -> Result<Expr, ExprError> {
        if e >= 0 {
            Ok(self.pow_u(e as u32))
        } else {
            Expr::make(self.den.pow((-e) as u32), self.num.pow((-e) as u32))
        }
    }

    /// Partial derivative with respect to `v`, by the quotient rule. Every
    /// non-opaque variable (including the dotted formal indeterminates) is an
    /// independent atom; differentiating by an opaque symbol is an error.
    pub fn diff(&self, v: &Var) -> Result<Expr, ExprError> {
        if v.is_opaque() {
            return Err(ExprError::OpaqueDifferentiation(v.clone()));
        }
        if self.den.is_one() {
            return Ok(Expr::from_poly(self.num.diff(v)));
        }
        let num = self
            .num
            .diff(v)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.diff(v)));
        Ok(Expr::make_nonzero_den(num, self.den.mul(&self.den)))
    }

    /// Simultaneous substitution: every occurrence of a bound variable is
    /// replaced by its image. Fails if the substituted denominator vanishes
    /// identically.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Expr>) -> Result<Expr, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let num = poly_substitute(&self.num, bindings);
        let den = poly_substitute(&self.den, bindings);
        num.div(&den)
    }

    /// Groups the numerator by monomials in `vars`. The denominator must be
    /// free of `vars`. Summing `monomial * coefficient` over the result
    /// reconstructs the expression; the unit monomial carries the vars-free
    /// part.
    pub fn collect(&self, vars: &BTreeSet<Var>) -> Result<BTreeMap<Monomial, Expr>, ExprError> {
        for v in vars {
            if self.den.contains_var(v) {
                return Err(ExprError::NotPolynomialIn(v.clone()));
            }
        }
        let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (mon, coeff) in self.num.terms() {
            let (key, rest) = mon.split(vars);
            groups.entry(key).or_default().add_term(rest, coeff.clone());
        }
        Ok(groups
            .into_iter()
            .map(|(k, p)| (k, Expr::make_nonzero_den(p, self.den.clone())))
            .collect())
    }

    /// Evaluates at a full rational assignment; None when some variable is
    /// unbound or the denominator evaluates to zero.
    pub fn eval(&self, bindings: &BTreeMap<Var, BigRational>) -> Option<BigRational> {
        let den = self.den.eval(bindings)?;
        if den.is_zero() {
            return None;
        }
        Some(self.num.eval(bindings)? / den)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.num.vars();
        vs.extend(self.den.vars());
        vs
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    /// Scales so the numerator has coefficient content 1 and a positive
    /// leading coefficient; the zero expression is returned unchanged. The
    /// applied scale factor is returned alongside.
    pub fn unit_normalized(&self) -> (Expr, BigRational) {
        if self.is_zero() {
            return (self.clone(), BigRational::one());
        }
        let content = self.num.content();
        let lead_negative = self.num.leading().expect("nonzero").1.is_negative();
        let mut scale = content.recip();
        if lead_negative {
            scale = -scale;
        }
        (
            Expr {
                num: self.num.scale(&scale),
                den: self.den.clone(),
            },
            scale,
        )
    }
}

fn poly_substitute(p: &Poly, bindings: &BTreeMap<Var, Expr>) -> Expr {
    let mut acc = Expr::zero();
    for (mon, coeff) in p.terms() {
        let mut term = Expr::constant(coeff.clone());
        for (v, e) in mon.factors() {
            let base = match bindings.get(v) {
                Some(img) => img.clone(),
                None => Expr::var(v.clone()),
            };
            term = term.mul(&base.pow_u(*e));
        }
        acc = acc.add(&term);
    }
    acc
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::render_expr(self, &|v| v.to_string()))
    }
}
