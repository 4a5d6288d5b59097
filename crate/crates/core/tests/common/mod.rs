//! Shared helpers for the integration suites: seeded random generators, an
//! elimination-independent rank certificate built on Laplace minors, and
//! exact span solving over expressions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ocsym_core::linalg::{self, det_laplace, rref, RatMatrix};
use ocsym_core::symexpr::{Expr, Monomial, Var};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

/// A random expression over the given variables; `allow_div` admits rational
/// subexpressions (with divisors forced nonzero).
pub fn random_expr(rng: &mut ChaCha8Rng, vars: &[Var], depth: u32, allow_div: bool) -> Expr {
    if depth == 0 || rng.gen_range(0..5) == 0 {
        return if rng.gen_bool(0.5) {
            Expr::constant(random_rational(rng))
        } else {
            Expr::var(vars[rng.gen_range(0..vars.len())].clone())
        };
    }
    let a = random_expr(rng, vars, depth - 1, allow_div);
    let b = random_expr(rng, vars, depth - 1, allow_div);
    match rng.gen_range(0..if allow_div { 5 } else { 4 }) {
        0 => a.add(&b),
        1 => a.sub(&b),
        2 => a.mul(&b),
        3 => a.pow_u(rng.gen_range(0..3)),
        _ => {
            let d = if b.is_zero() { Expr::one() } else { b };
            a.div(&d).expect("nonzero divisor")
        }
    }
}

/// Evaluation agreement of two expressions at `points` random rational
/// assignments, resampling assignments that hit a denominator zero.
pub fn eval_agreement(rng: &mut ChaCha8Rng, a: &Expr, b: &Expr, points: usize) -> bool {
    let mut vars: BTreeSet<Var> = a.vars();
    vars.extend(b.vars());
    let vars: Vec<Var> = vars.into_iter().collect();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < points {
        attempts += 1;
        assert!(attempts < points * 100, "could not avoid denominator zeros");
        let assignment: BTreeMap<Var, BigRational> = vars
            .iter()
            .map(|v| (v.clone(), random_rational(rng)))
            .collect();
        let (va, vb) = (a.eval(&assignment), b.eval(&assignment));
        match (va, vb) {
            (Some(va), Some(vb)) => {
                if va != vb {
                    return false;
                }
                checked += 1;
            }
            _ => continue, // a denominator vanished at this point
        }
    }
    true
}

/// A random sparse matrix; with probability 1/2 a product of two thin random
/// factors (guaranteeing a nontrivial nullspace for wide shapes).
pub fn random_matrix(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> RatMatrix {
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    if rng.gen_bool(0.5) {
        let mut m = RatMatrix::new(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if rng.gen_bool(0.6) {
                    m.set(i, j, random_rational(rng));
                }
            }
        }
        m
    } else {
        // rank-limited product
        let k = rng.gen_range(1..=rows.min(cols));
        let mut m = RatMatrix::new(rows, cols);
        let left: Vec<Vec<BigRational>> = (0..rows)
            .map(|_| (0..k).map(|_| random_rational(rng)).collect())
            .collect();
        let right: Vec<Vec<BigRational>> = (0..k)
            .map(|_| (0..cols).map(|_| random_rational(rng)).collect())
            .collect();
        for (i, lrow) in left.iter().enumerate() {
            for j in 0..cols {
                let acc = lrow
                    .iter()
                    .zip(&right)
                    .fold(BigRational::zero(), |acc, (a, rrow)| acc + a * &rrow[j]);
                m.set(i, j, acc);
            }
        }
        m
    }
}

fn submatrix(a: &RatMatrix, rows: &[usize], cols: &[usize]) -> RatMatrix {
    let mut sub = RatMatrix::new(rows.len(), cols.len());
    for (ii, i) in rows.iter().enumerate() {
        for (jj, j) in cols.iter().enumerate() {
            sub.set(ii, jj, a.get(*i, *j));
        }
    }
    sub
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return false;
    }
    loop {
        if visit(&idx) {
            return true;
        }
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Certifies `rank(a) == r` without reusing the elimination code for the
/// lower bound: exhibits an r-by-r submatrix with nonzero Laplace-expansion
/// determinant (rank >= r), and checks the r-pivot nullspace certificate
/// separately (callers verify A v = 0 and the unit structure, so
/// nullity >= cols - r, hence rank <= r). Returns false if no nonzero minor
/// was found.
pub fn nonzero_minor_exists(
    rng: &mut ChaCha8Rng,
    a: &RatMatrix,
    r: usize,
    pivot_cols: &[usize],
) -> bool {
    if r == 0 {
        return true;
    }
    assert_eq!(pivot_cols.len(), r);
    // Greedy deterministic candidate: first unused row with a nonzero entry
    // per pivot column.
    let mut greedy: Vec<usize> = Vec::new();
    for col in pivot_cols {
        if let Some(row) = (0..a.rows()).find(|i| !greedy.contains(i) && !a.get(*i, *col).is_zero())
        {
            greedy.push(row);
        }
    }
    if greedy.len() == r {
        let mut rows = greedy.clone();
        rows.sort_unstable();
        if !det_laplace(&submatrix(a, &rows, pivot_cols)).is_zero() {
            return true;
        }
    }
    // Random row subsets.
    let all_rows: Vec<usize> = (0..a.rows()).collect();
    for _ in 0..300 {
        let mut rows = all_rows.clone();
        rows.shuffle(rng);
        let mut rows: Vec<usize> = rows.into_iter().take(r).collect();
        rows.sort_unstable();
        if !det_laplace(&submatrix(a, &rows, pivot_cols)).is_zero() {
            return true;
        }
    }
    // Exhaustive fallback over row subsets when feasible.
    combinations(a.rows(), r, |rows| {
        !det_laplace(&submatrix(a, rows, pivot_cols)).is_zero()
    })
}

/// Full nullspace-plus-minor check of one matrix: returns the certified rank.
pub fn check_nullspace_with_rank_oracle(rng: &mut ChaCha8Rng, a: &RatMatrix) -> usize {
    let red = rref(a);
    let r = red.rank();
    let basis = linalg::nullspace(a);
    assert_eq!(basis.len() + r, a.cols(), "rank-nullity violated");

    // Upper bound: the basis annihilates A and is independent by its unit
    // structure on the free coordinates, so nullity >= cols - r.
    let free: Vec<usize> = (0..a.cols()).filter(|c| !red.pivots.contains(c)).collect();
    for (k, v) in basis.iter().enumerate() {
        assert!(
            a.mul_vec(v).iter().all(|x| x.is_zero()),
            "basis vector not in the nullspace"
        );
        for (j, f) in free.iter().enumerate() {
            let expect = if j == k {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            assert_eq!(v[*f], expect, "free-coordinate unit structure violated");
        }
    }

    // Lower bound: a nonzero r x r minor, by Laplace expansion.
    assert!(
        nonzero_minor_exists(rng, a, r, &red.pivots),
        "no nonzero {}x{} minor found",
        r,
        r
    );
    r
}

/// Rank by brute force over all maximal minors (Laplace determinants), for
/// small matrices: the largest k admitting a nonzero k x k minor.
pub fn rank_by_minor_enumeration(a: &RatMatrix) -> usize {
    let max = a.rows().min(a.cols());
    for k in (1..=max).rev() {
        let found = combinations(a.rows(), k, |rows| {
            combinations(a.cols(), k, |cols| {
                !det_laplace(&submatrix(a, rows, cols)).is_zero()
            })
        });
        if found {
            return k;
        }
    }
    0
}

fn flatten_expr(e: &Expr) -> BTreeMap<Monomial, BigRational> {
    assert!(e.is_polynomial(), "span solving expects polynomial parts");
    e.num()
        .terms()
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect()
}

/// Exact coordinates of `target` in the rational span of `basis`, treating
/// expressions as coefficient vectors over their monomials.
pub fn expr_span_coordinates(basis: &[Expr], target: &Expr) -> Option<Vec<BigRational>> {
    let flat_basis: Vec<_> = basis.iter().map(flatten_expr).collect();
    let flat_target = flatten_expr(target);
    let mut keys: BTreeSet<Monomial> = BTreeSet::new();
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
