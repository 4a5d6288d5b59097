//! Conservation laws are stable across dependence configurations: on the
//! built-in corpus, the specialized-law span of the fully dependent D1
//! family coincides with the span of the restricted D3 family. Generators
//! may differ between configurations; the laws may not.

mod common;

use ocsym_core::corpus;
use ocsym_core::noether::conservation_law_for;
use ocsym_core::symexpr::Expr;
use ocsym_core::symmetry::{find_symmetries, AnsatzSpec, DependenceConfig};

fn branch_laws(p: &ocsym_core::problem::OCProblem, cfg: DependenceConfig) -> Vec<Expr> {
    let fam = find_symmetries(p, &AnsatzSpec::new(cfg), false).unwrap();
    (0..fam.dimension())
        .map(|k| conservation_law_for(p, &fam.branch(k), &[], false).algebraic)
        .collect()
}

#[test]
fn d1_and_d3_families_yield_the_same_laws() {
    for (name, p) in corpus::all() {
        let laws_d1 = branch_laws(&p, DependenceConfig::d1());
        let laws_d3 = branch_laws(&p, DependenceConfig::d3());
        for (k, law) in laws_d3.iter().enumerate() {
            assert!(
                common::expr_span_coordinates(&laws_d1, law).is_some(),
                "{}: D3 law {} outside the D1 law span",
                name,
                k
            );
        }
        for (k, law) in laws_d1.iter().enumerate() {
            assert!(
                common::expr_span_coordinates(&laws_d3, law).is_some(),
                "{}: D1 law {} outside the D3 law span",
                name,
                k
            );
        }
    }
}
