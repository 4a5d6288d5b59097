//! Run reports: one structure serialized either as JSON (`--json`) or as the
//! textual report. Both carry the same mathematical content; expressions are
//! rendered in the problem-file grammar. The JSON schema is versioned by the
//! top-level `schema` field.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub problem: ProblemSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laws: Option<LawsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmp: Option<PmpReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Vec<LawVerdict>>,
    /// Wall-clock duration; the only field that varies between identical runs.
    pub duration_ms: u64,
}

#[derive(Serialize)]
pub struct ProblemSummary {
    pub file: String,
    pub states: usize,
    pub controls: usize,
    pub mode: String,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub dep: String,
    pub degree: u32,
    pub separation: String,
    pub gauge: bool,
}

#[derive(Serialize)]
pub struct FamilyReport {
    pub constants: usize,
    pub basis: Vec<BranchReport>,
}

#[derive(Serialize)]
pub struct BranchReport {
    pub constant: String,
    pub t: String,
    pub x: Vec<String>,
    pub u: Vec<String>,
    pub psi: Vec<String>,
    pub gauge: String,
}

#[derive(Serialize)]
pub struct LawsReport {
    pub general: LawReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub specialized: Vec<SpecializedLaw>,
}

#[derive(Serialize)]
pub struct LawReport {
    pub algebraic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrand: Option<String>,
}

#[derive(Serialize)]
pub struct SpecializedLaw {
    pub assignment: String,
    pub law: LawReport,
}

#[derive(Serialize)]
pub struct PmpReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_equations: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjoint_equations: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary_conditions: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controls: Option<Vec<String>>,
}

#[derive(Serialize)]
pub struct LawVerdict {
    pub law: String,
    pub residual: String,
    pub ok: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The textual report. Deterministic for identical inputs and flags;
    /// the wall-clock duration is written to stderr by the caller, not here.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: &str| {
            out.push_str(line);
            out.push('\n');
        };
        push(
            &mut out,
            &format!(
                "problem: {} (states={}, controls={}, mode={})",
                self.problem.file, self.problem.states, self.problem.controls, self.problem.mode
            ),
        );
        if let Some(cfg) = &self.config {
            push(
                &mut out,
                &format!(
                    "config: {}, degree {}, {}, gauge {}",
                    cfg.dep,
                    cfg.degree,
                    cfg.separation,
                    if cfg.gauge { "on" } else { "off" }
                ),
            );
        }
        if let Some(pmp) = &self.pmp {
            if let Some(h) = &pmp.hamiltonian {
                push(&mut out, &format!("H = {}", h));
            }
            if let Some(eqs) = &pmp.state_equations {
                push(&mut out, "state equations:");
                for eq in eqs {
                    push(&mut out, &format!("  {}", eq));
                }
            }
            if let Some(eqs) = &pmp.adjoint_equations {
                push(&mut out, "adjoint equations:");
                for eq in eqs {
                    push(&mut out, &format!("  {}", eq));
                }
            }
            if let Some(eqs) = &pmp.stationary_conditions {
                push(&mut out, "stationary conditions:");
                for eq in eqs {
                    push(&mut out, &format!("  {}", eq));
                }
            }
            if let Some(controls) = &pmp.controls {
                push(&mut out, "extremal controls:");
                for c in controls {
                    push(&mut out, &format!("  {}", c));
                }
            }
        }
        if let Some(family) = &self.family {
            push(
                &mut out,
                &format!("family: {} free constant(s)", family.constants),
            );
            if family.constants == 0 {
                push(
                    &mut out,
                    "  (no symmetries in this ansatz; consider raising --degree or widening --dep)",
                );
            }
            for branch in &family.basis {
                push(&mut out, &format!("  {}:", branch.constant));
                let mut line = |label: String, value: &str| {
                    if value != "0" {
                        push(&mut out, &format!("    {} = {}", label, value));
                    }
                };
                line("T".to_string(), &branch.t);
                for (i, x) in branch.x.iter().enumerate() {
                    line(format!("X{}", i + 1), x);
                }
                for (j, u) in branch.u.iter().enumerate() {
                    line(format!("U{}", j + 1), u);
                }
                for (i, psi) in branch.psi.iter().enumerate() {
                    line(format!("Psi{}", i + 1), psi);
                }
                line("G".to_string(), &branch.gauge);
            }
        }
        if let Some(laws) = &self.laws {
            push(&mut out, "conservation law (general):");
            push(
                &mut out,
                &format!("  algebraic: {}", laws.general.algebraic),
            );
            if let Some(ig) = &laws.general.integrand {
                push(&mut out, &format!("  integrand: {}", ig));
            }
            for s in &laws.specialized {
                push(&mut out, &format!("law [{}]:", s.assignment));
                if let Some(ig) = &s.law.integrand {
                    push(
                        &mut out,
                        &format!("  {} + int[{}]dt = const", s.law.algebraic, ig),
                    );
                } else {
                    push(&mut out, &format!("  {} = const", s.law.algebraic));
                }
            }
        }
        if let Some(verdicts) = &self.verification {
            push(&mut out, "verification:");
            for v in verdicts {
                push(&mut out, &format!("  {}: residual = {}", v.law, v.residual));
            }
        }
        out
    }
}
