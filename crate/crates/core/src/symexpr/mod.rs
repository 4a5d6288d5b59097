//! Exact symbolic kernel.
//!
//! Expressions are ratios of multivariate polynomials over arbitrary-precision
//! rational coefficients, kept in a canonical form (reduced by the common
//! monomial factor, denominator monic under the global monomial order). All
//! operations are pure; values are immutable and freely shareable across
//! threads.

mod expr;
mod poly;
mod var;

pub use expr::{Expr, ExprError};
pub use poly::{Monomial, Poly};
pub use var::Var;

use num_rational::BigRational;

/// Renders a polynomial with a caller-supplied variable naming scheme.
///
/// Terms are emitted in descending monomial order, factors of each monomial in
/// ascending variable order, so output is deterministic.
pub fn render_poly(p: &Poly, name: &dyn Fn(&Var) -> String) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (mon, coeff)) in p.terms().rev().enumerate() {
        let neg = coeff < &BigRational::from_integer(0.into());
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mag = if neg { -coeff.clone() } else { coeff.clone() };
        let coeff_is_one = mag == BigRational::from_integer(1.into());
        if mon.is_one() {
            out.push_str(&mag.to_string());
            continue;
        }
        if !coeff_is_one {
            out.push_str(&mag.to_string());
            out.push('*');
        }
        let factors: Vec<String> = mon
            .factors()
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    name(v)
                } else {
                    format!("{}^{}", name(v), e)
                }
            })
            .collect();
        out.push_str(&factors.join("*"));
    }
    out
}

/// Renders an expression with a caller-supplied variable naming scheme.
///
/// The result parses back under the expression grammar used by problem files.
pub fn render_expr(e: &Expr, name: &dyn Fn(&Var) -> String) -> String {
    if e.is_polynomial() {
        render_poly(e.num(), name)
    } else {
        format!(
            "({})/({})",
            render_poly(e.num(), name),
            render_poly(e.den(), name)
        )
    }
}
