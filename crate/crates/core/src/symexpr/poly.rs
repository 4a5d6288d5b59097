use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::var::Var;

/// A power product of variables. Factors are sorted by the global variable
/// order and exponents are strictly positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn power(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs, merging
    /// repeats and dropping zero exponents.
    pub fn from_pairs(pairs: Vec<(Var, u32)>) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.degree_in(v) > 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => {
                        out.push((va.clone(), *ea));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((vb.clone(), *eb));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((va.clone(), ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => {
                    out.extend(a.cloned());
                    break;
                }
                (None, Some(_)) => {
                    out.extend(b.cloned());
                    break;
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// Greatest common divisor: per-variable minimum exponent.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.0 {
            let eo = other.degree_in(v);
            let m = (*e).min(eo);
            if m > 0 {
                out.push((v.clone(), m));
            }
        }
        Monomial(out)
    }

    /// Exact division; `other` must divide `self`.
    pub fn div_exact(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (v, e) in &self.0 {
            let eo = other.degree_in(v);
            debug_assert!(eo <= *e, "non-exact monomial division");
            if *e > eo {
                out.push((v.clone(), e - eo));
            }
        }
        Monomial(out)
    }

    /// Splits into (the part over `vars`, the rest).
    pub fn split(&self, vars: &BTreeSet<Var>) -> (Monomial, Monomial) {
        let (inside, outside) = self.0.iter().cloned().partition(|(v, _)| vars.contains(v));
        (Monomial(inside), Monomial(outside))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(v, _)| v)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order: total degree first, then lexicographic
    /// with earlier variables in the global order more significant.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut a, mut b) = (self.0.iter(), other.0.iter());
        let (mut x, mut y) = (a.next(), b.next());
        loop {
            match (x, y) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    // A positive exponent on a more significant variable,
                    // absent on the other side, wins.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            x = a.next();
                            y = b.next();
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial with exact rational coefficients, stored sparsely
/// keyed by monomial. Stored coefficients are nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Monomial::var(v), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Some(c) when the polynomial is the constant c (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn terms(
        &self,
    ) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Leading (maximal) term under the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative; every variable (dotted ones included) is an
    /// independent atom.
    pub fn diff(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            if e == 0 {
                continue;
            }
            let reduced = m.div_exact(&Monomial::var(v.clone()));
            out.add_term(reduced, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.contains(v))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    /// GCD of all monomials (the largest monomial dividing every term).
    pub fn monomial_content(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let mut acc = match iter.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        for m in iter {
            if acc.is_one() {
                break;
            }
            acc = acc.gcd(m);
        }
        acc
    }

    /// Divides every monomial by `m`; `m` must divide each of them.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.div_exact(m), c.clone()))
                .collect(),
        }
    }

    /// Positive gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigRational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            BigRational::zero()
        } else {
            BigRational::new(num_gcd.abs(), den_lcm)
        }
    }

    /// Evaluates at a full assignment of the variables; None if some variable
    /// is unbound.
    pub fn eval(&self, bindings: &BTreeMap<Var, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, e) in m.factors() {
                let val = bindings.get(v)?;
                for _ in 0..*e {
                    term *= val;
                }
            }
            acc += term;
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let t = Monomial::var(Var::Time);
        let x = Monomial::var(Var::State(1));
        let x2 = Monomial::power(Var::State(1), 2);
        let tx = t.mul(&x);
        // degree wins
        assert!(x2 > x);
        assert!(tx > x);
        // equal degree: more significant variable wins
        assert!(tx > x2);
        let u = Monomial::var(Var::Control(1));
        let psi = Monomial::var(Var::Costate(1));
        assert!(u.mul(&u) > u.mul(&psi)); // u^2 > u*psi1
        assert!(u > psi);
    }

    #[test]
    fn mul_merges_exponents() {
        let m = Monomial::var(Var::State(1)).mul(&Monomial::power(Var::State(1), 2));
        assert_eq!(m, Monomial::power(Var::State(1), 3));
    }

    #[test]
    fn arithmetic_cancels() {
        let x = Poly::var(Var::State(1));
        let sum = x.add(&x.neg());
        assert!(sum.is_zero());
        let p = x.mul(&x).add(&Poly::from_int(1)); // x^2 + 1
        let q2 = p.sub(&p);
        assert!(q2.is_zero());
    }

    #[test]
    fn diff_is_formal_power_rule() {
        let x = Var::State(1);
        let p = Poly::var(x.clone()).pow(3).scale(&q(2)); // 2x^3
        let d = p.diff(&x);
        assert_eq!(d, Poly::var(x.clone()).pow(2).scale(&q(6)));
        assert!(p.diff(&Var::State(2)).is_zero());
    }

    #[test]
    fn content_is_positive_gcd() {
        let x = Poly::var(Var::State(1));
        let p = x
            .scale(&BigRational::new(4.into(), 6.into()))
            .add(&Poly::constant(q(-2)));
        // terms 2/3 x - 2 -> content 2/3
        assert_eq!(p.content(), BigRational::new(2.into(), 3.into()));
        assert!(Poly::zero().content().is_zero());
    }
}
