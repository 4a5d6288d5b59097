//! `ocsym`: compute variational symmetries and Noether first integrals of
//! optimal control problems given as problem files.
//!
//! Exit codes: 0 success, 2 input error, 3 mathematical degeneracy
//! (nonlinear or singular stationary systems, non-polynomial reductions),
//! 4 internal invariant violation.

mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use ocsym_core::noether::{
    self, conservation_law, specialize, verify_conservation, ConservationLaw, NoetherError,
};
use ocsym_core::pmp::{self, PmpError};
use ocsym_core::problem::{parse_expression, parse_problem, Mode, OCProblem, SymbolTable};
use ocsym_core::symexpr::{Expr, ExprError, Var};
use ocsym_core::symmetry::{
    find_symmetries, AnsatzSpec, DependenceConfig, Separation, SymmetryError, SymmetryFamily,
};

use report::*;

#[derive(Parser)]
#[command(
    name = "ocsym",
    version,
    about = "Variational symmetries and Noether first integrals for optimal control problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a family of variational symmetries
    Symmetry(SymmetryArgs),
    /// Compute symmetries and assemble Noether conservation laws
    Noether(NoetherArgs),
    /// Print the Hamiltonian, the Hamiltonian system, or the extremal controls
    Pmp(PmpArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem file
    file: PathBuf,
    /// Dependence preset for the generators (D1|D2|D3|D4)
    #[arg(long, default_value = "D3")]
    dep: String,
    /// Maximum polynomial degree of the ansatz (at least 1)
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Use a dense multivariate ansatz instead of additive separation
    #[arg(long)]
    dense: bool,
    /// Override the problem's multiplier mode (normal|abnormal)
    #[arg(long)]
    mode: Option<String>,
    /// Emit the machine-readable JSON report instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SymmetryArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Allow a gauge term G(t, x)
    #[arg(long)]
    gauge: bool,
}

#[derive(Args)]
struct NoetherArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Allow a gauge term G(t, x)
    #[arg(long)]
    gauge: bool,
    /// Expand the Hamiltonian in the law instead of keeping the symbol H
    #[arg(long = "expand-h")]
    expand_h: bool,
    /// Specialize constants, e.g. --spec C2=1 --spec C7=-1 (one combined law)
    #[arg(long = "spec", value_name = "CONST=VALUE")]
    spec: Vec<String>,
    /// Emit one specialized law per basis constant
    #[arg(long = "all-independent")]
    all_independent: bool,
    /// Verify every reported law and print its residual
    #[arg(long)]
    verify: bool,
    /// Display-level substitution applied to reported laws, e.g. --subst psi2=u
    #[arg(long = "subst", value_name = "VAR=EXPR")]
    subst: Vec<String>,
}

#[derive(Args)]
struct PmpArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Print the Hamiltonian
    #[arg(long = "evalH")]
    eval_h: bool,
    /// Print the Hamiltonian system (state, adjoint, and stationary groups)
    #[arg(long)]
    system: bool,
    /// Print the extremal controls solved from the stationary condition
    #[arg(long)]
    controls: bool,
}

enum CliError {
    Input(String),
    Degenerate(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Degenerate(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<PmpError> for CliError {
    fn from(e: PmpError) -> Self {
        match e {
            PmpError::NonlinearControls { .. } | PmpError::SingularControls => {
                CliError::Degenerate(e.to_string())
            }
            PmpError::Expr(inner) => CliError::from(inner),
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::NotPolynomialIn(_) => CliError::Degenerate(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<SymmetryError> for CliError {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::Expr(inner) => CliError::from(inner),
            SymmetryError::Internal(m) => CliError::Internal(m),
        }
    }
}

impl From<NoetherError> for CliError {
    fn from(e: NoetherError) -> Self {
        match e {
            NoetherError::Pmp(inner) => CliError::from(inner),
            NoetherError::Expr(inner) => CliError::from(inner),
            NoetherError::UnknownConstant(c) => CliError::Input(format!("unknown constant {}", c)),
            NoetherError::ControlDependent(v) => {
                CliError::Degenerate(format!("expression depends on control {}", v))
            }
        }
    }
}

fn main() -> ExitCode {
    if let Err(e) = init_threads() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::Symmetry(args) => cmd_symmetry(args, started),
        Command::Noether(args) => cmd_noether(args, started),
        Command::Pmp(args) => cmd_pmp(args, started),
    };
    match result {
        Ok((report, json)) => {
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            eprintln!("completed in {} ms", report.duration_ms);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// OCSYM_THREADS caps the worker pool used for coefficient extraction.
fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("OCSYM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| CliError::Input(format!("OCSYM_THREADS must be a number, got `{}`", value)))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn load_problem(common: &CommonArgs) -> Result<(OCProblem, String), CliError> {
    let text = std::fs::read_to_string(&common.file)
        .map_err(|e| CliError::Input(format!("cannot read {}: {}", common.file.display(), e)))?;
    let mut problem = parse_problem(&text)
        .map_err(|e| CliError::Input(format!("{}: {}", common.file.display(), e)))?;
    if let Some(mode) = &common.mode {
        problem.mode = match mode.as_str() {
            "normal" => Mode::Normal,
            "abnormal" => Mode::Abnormal,
            other => {
                return Err(CliError::Input(format!(
                    "unknown mode `{}` (use normal|abnormal)",
                    other
                )))
            }
        };
    }
    let name = common
        .file
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| common.file.display().to_string());
    Ok((problem, name))
}

fn ansatz_spec(common: &CommonArgs) -> Result<AnsatzSpec, CliError> {
    let config = DependenceConfig::preset(&common.dep)
        .ok_or_else(|| CliError::Input(format!("unknown dependence preset `{}`", common.dep)))?;
    if common.degree == 0 {
        return Err(CliError::Input("--degree must be at least 1".to_string()));
    }
    let mut spec = AnsatzSpec::new(config).with_degree(common.degree);
    if common.dense {
        spec = spec.dense();
    }
    Ok(spec)
}

fn problem_summary(p: &OCProblem, file: String) -> ProblemSummary {
    ProblemSummary {
        file,
        states: p.n,
        controls: p.m,
        mode: p.mode.to_string(),
    }
}

fn config_echo(common: &CommonArgs, gauge: bool) -> ConfigEcho {
    ConfigEcho {
        dep: common.dep.clone(),
        degree: common.degree,
        separation: if common.dense {
            Separation::Dense
        } else {
            Separation::Additive
        }
        .to_string(),
        gauge,
    }
}

fn family_report(p: &OCProblem, fam: &SymmetryFamily) -> FamilyReport {
    let render = |e: &Expr| p.symbols.render(e);
    let basis = (0..fam.dimension())
        .map(|k| {
            let branch = fam.branch(k);
            BranchReport {
                constant: fam.constants[k].to_string(),
                t: render(&branch.t),
                x: branch.x.iter().map(render).collect(),
                u: branch.u.iter().map(render).collect(),
                psi: branch.psi.iter().map(render).collect(),
                gauge: render(&branch.gauge),
            }
        })
        .collect();
    FamilyReport {
        constants: fam.dimension(),
        basis,
    }
}

fn cmd_symmetry(args: &SymmetryArgs, started: Instant) -> Result<(RunReport, bool), CliError> {
    let (problem, file) = load_problem(&args.common)?;
    let spec = ansatz_spec(&args.common)?;
    let fam = find_symmetries(&problem, &spec, args.gauge)?;
    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: "symmetry".to_string(),
        problem: problem_summary(&problem, file),
        config: Some(config_echo(&args.common, args.gauge)),
        family: Some(family_report(&problem, &fam)),
        laws: None,
        pmp: None,
        verification: None,
        duration_ms: started.elapsed().as_millis() as u64,
    };
    Ok((report, args.common.json))
}

/// Parses `C<k>=<rational>` assignments; repeated flags accumulate into one
/// assignment map.
fn parse_assignments(
    specs: &[String],
    constants: &[Var],
) -> Result<BTreeMap<Var, BigRational>, CliError> {
    let mut out = BTreeMap::new();
    for item in specs {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError::Input(format!(
                "--spec expects CONST=VALUE, got `{}`",
                item
            )));
        };
        let var = constants
            .iter()
            .find(|c| c.to_string() == key.trim())
            .cloned()
            .ok_or_else(|| {
                CliError::Input(format!(
                    "`{}` is not a constant of the family (family has {})",
                    key.trim(),
                    constants.len()
                ))
            })?;
        let value: BigRational = value
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("`{}` is not a rational number", value)))?;
        out.insert(var, value);
    }
    Ok(out)
}

/// Parses `VAR=EXPR` display substitutions against the problem's symbols
/// (with `H` available as a symbol).
fn parse_substitutions(
    items: &[String],
    table: &SymbolTable,
) -> Result<BTreeMap<Var, Expr>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError::Input(format!(
                "--subst expects VAR=EXPR, got `{}`",
                item
            )));
        };
        let var = table.resolve(key.trim()).ok_or_else(|| {
            CliError::Input(format!("unknown variable `{}` in --subst", key.trim()))
        })?;
        let expr = parse_expression(value.trim(), table)
            .map_err(|e| CliError::Input(format!("--subst value: {}", e)))?;
        out.insert(var, expr);
    }
    Ok(out)
}

fn law_report(
    p: &OCProblem,
    law: &ConservationLaw,
    display_subst: &BTreeMap<Var, Expr>,
) -> Result<LawReport, CliError> {
    let show = |e: &Expr| -> Result<String, CliError> {
        let shown = e
            .substitute(display_subst)
            .map_err(|err| CliError::Input(format!("--subst: {}", err)))?;
        Ok(p.symbols.render(&shown))
    };
    Ok(LawReport {
        algebraic: show(&law.algebraic)?,
        integrand: match &law.integrand {
            Some(ig) => Some(show(ig)?),
            None => None,
        },
    })
}

fn cmd_noether(args: &NoetherArgs, started: Instant) -> Result<(RunReport, bool), CliError> {
    let (problem, file) = load_problem(&args.common)?;
    let spec = ansatz_spec(&args.common)?;
    let fam = find_symmetries(&problem, &spec, args.gauge)?;
    let law = conservation_law(&problem, &fam, args.expand_h);

    let mut table = problem.symbols.clone();
    table.params.insert(noether::H_SYMBOL.to_string());
    let display_subst = parse_substitutions(&args.subst, &table)?;

    let mut specialized = Vec::new();
    let mut verification_targets: Vec<(String, ConservationLaw)> =
        vec![("general".to_string(), law.clone())];

    if args.all_independent {
        for k in 0..fam.dimension() {
            let mut assignment = BTreeMap::new();
            assignment.insert(
                fam.constants[k].clone(),
                BigRational::from_integer(1.into()),
            );
            let spec_law = specialize(&law, &assignment)?;
            let label = format!("{}=1", fam.constants[k]);
            specialized.push(SpecializedLaw {
                assignment: label.clone(),
                law: law_report(&problem, &spec_law, &display_subst)?,
            });
            verification_targets.push((label, spec_law));
        }
    }
    if !args.spec.is_empty() {
        let assignment = parse_assignments(&args.spec, &fam.constants)?;
        let spec_law = specialize(&law, &assignment)?;
        let label = assignment
            .iter()
            .map(|(k, v)| format!("{}={}", k, v))
            .collect::<Vec<_>>()
            .join(",");
        specialized.push(SpecializedLaw {
            assignment: label.clone(),
            law: law_report(&problem, &spec_law, &display_subst)?,
        });
        verification_targets.push((label, spec_law));
    }

    let verification = if args.verify {
        // forward only opaque-symbol substitutions to the verifier
        let opaque_subst: BTreeMap<Var, Expr> = display_subst
            .iter()
            .filter(|(k, _)| k.is_opaque())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let subst = if opaque_subst.is_empty() {
            None
        } else {
            Some(&opaque_subst)
        };
        let mut verdicts = Vec::new();
        for (label, target) in &verification_targets {
            let residual = verify_conservation(&problem, target, subst)?;
            verdicts.push(LawVerdict {
                law: label.clone(),
                residual: problem.symbols.render(&residual),
                ok: residual.is_zero(),
            });
        }
        Some(verdicts)
    } else {
        None
    };

    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: "noether".to_string(),
        problem: problem_summary(&problem, file),
        config: Some(config_echo(&args.common, args.gauge)),
        family: Some(family_report(&problem, &fam)),
        laws: Some(LawsReport {
            general: law_report(&problem, &law, &display_subst)?,
            specialized,
        }),
        pmp: None,
        verification,
        duration_ms: started.elapsed().as_millis() as u64,
    };
    Ok((report, args.common.json))
}

fn cmd_pmp(args: &PmpArgs, started: Instant) -> Result<(RunReport, bool), CliError> {
    let (problem, file) = load_problem(&args.common)?;
    let sys = pmp::hamiltonian_system(&problem);
    let render = |e: &Expr| problem.symbols.render(e);
    // default output: Hamiltonian and system
    let all = !args.eval_h && !args.system && !args.controls;

    let mut pmp_report = PmpReport {
        hamiltonian: None,
        state_equations: None,
        adjoint_equations: None,
        stationary_conditions: None,
        controls: None,
    };
    if args.eval_h || all {
        pmp_report.hamiltonian = Some(render(&sys.h));
    }
    if args.system || all {
        pmp_report.state_equations = Some(
            sys.state_rhs
                .iter()
                .enumerate()
                .map(|(i, rhs)| {
                    format!(
                        "{}' = {}",
                        problem.symbols.name_of(&Var::State(i as u32 + 1)),
                        render(rhs)
                    )
                })
                .collect(),
        );
        pmp_report.adjoint_equations = Some(
            sys.adjoint_rhs
                .iter()
                .enumerate()
                .map(|(i, rhs)| format!("psi{}' = {}", i + 1, render(rhs)))
                .collect(),
        );
        pmp_report.stationary_conditions = Some(
            sys.stationary
                .iter()
                .map(|eq| format!("{} = 0", render(eq)))
                .collect(),
        );
    }
    if args.controls {
        let controls = pmp::solve_controls(&problem)?;
        pmp_report.controls = Some(
            controls
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    format!(
                        "{} = {}",
                        problem.symbols.name_of(&Var::Control(j as u32 + 1)),
                        render(e)
                    )
                })
                .collect(),
        );
    }

    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: "pmp".to_string(),
        problem: problem_summary(&problem, file),
        config: None,
        family: None,
        laws: None,
        pmp: Some(pmp_report),
        verification: None,
        duration_ms: started.elapsed().as_millis() as u64,
    };
    Ok((report, args.common.json))
}
