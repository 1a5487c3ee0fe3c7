//! Command-line front end.
//!
//! Exit codes: 0 when the analysis ran, 1 when the input is well formed but
//! not a complementary pair (X not copositive, U not complementary or not
//! representable over the zero set), 2 on unreadable or malformed input.
//! Assumption verdicts never change the exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complement::{
    check_assumptions, decompose_dual, AssumptionReport, DualDecomposition, Verdict,
};
use crate::cones::{is_copositive, simplex_min_oracle, CopVerdict};
use crate::defeq::{rank_certificate, DefiningSystem, RankCertificate};
use crate::error::Error;
use crate::paperlab;
use crate::symcore::{SymMat, Tolerances};
use crate::zerostruct::ZeroStructure;

pub const SCHEMA: &str = "copcomp/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_STRUCTURAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "copcomp",
    version,
    about = "Analyze pairs in the complementarity set of the copositive cone"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full pipeline on X (and optionally U) given as SymMat JSON.
    Analyze(AnalyzeArgs),
    /// List, run or export the built-in reference scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Args, Debug, Clone)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-9)]
    zero_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    rank_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    psd_tol: f64,
}

impl TolArgs {
    fn tolerances(&self) -> crate::Result<Tolerances> {
        Tolerances::new(self.zero_tol, self.rank_tol, self.psd_tol)
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// SymMat JSON file holding X.
    x: PathBuf,
    /// SymMat JSON file holding U.
    u: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    tol: TolArgs,
    /// Cross-check the copositivity minimum against the simplex-grid oracle.
    #[arg(long)]
    verify_oracle: bool,
    #[arg(long, default_value_t = 20)]
    grid_depth: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the Jacobian at the anchor as row-major JSON to this file.
    #[arg(long)]
    dump_jacobian: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    List {
        #[arg(long)]
        json: bool,
    },
    Run {
        name: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Write `<name>_X.json` and `<name>_U.json` for the scenario anchor.
    Export { name: String, dir: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub x_sha256: String,
    pub u_sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub grid_depth: usize,
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Oracle value minus exact minimum; nonnegative up to rounding.
    pub gap: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDims {
    pub p: usize,
    pub p_star: usize,
    pub m: usize,
    pub unknowns: usize,
}

/// One verdict together with the tolerance that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub verdict: Verdict,
    pub tolerance: String,
    pub tolerance_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub status: String,
    pub zero_vertices: Option<usize>,
    pub blocks: Option<usize>,
    pub checks: Vec<CheckSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub input: InputDigest,
    pub p: usize,
    pub tolerances: Tolerances,
    pub copositivity: CopVerdict,
    pub oracle: Option<OracleCheck>,
    pub zero_structure: Option<ZeroStructure>,
    pub decomposition: Option<DualDecomposition>,
    pub assumptions: Option<AssumptionReport>,
    pub system: Option<SystemDims>,
    pub rank: Option<RankCertificate>,
    pub notes: Vec<String>,
    pub summary: VerdictSummary,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code and the text to print on stdout.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => return (e.exit_code(), e.render().to_string()),
    };
    match cli.command {
        Command::Analyze(a) => with_threads(a.threads, || cmd_analyze(&a)),
        Command::Scenario { action } => match action {
            ScenarioAction::List { json } => cmd_list(json),
            ScenarioAction::Run {
                name,
                json,
                tol,
                threads,
            } => with_threads(threads, || cmd_scenario(&name, json, &tol)),
            ScenarioAction::Export { name, dir } => cmd_export(&name, &dir),
        },
    }
}

fn with_threads(n: usize, f: impl FnOnce() -> (i32, String) + Send) -> (i32, String) {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(e) => (
            EXIT_INPUT,
            format!("error: cannot start thread pool: {e}\n"),
        ),
    }
}

fn input_error(msg: impl std::fmt::Display) -> (i32, String) {
    (EXIT_INPUT, format!("error: {msg}\n"))
}

fn read_matrix(path: &Path) -> Result<(SymMat, String), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let m =
        serde_json::from_slice::<SymMat>(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((m, digest))
}

/// Errors that describe a well-formed input outside the complementarity set.
fn is_structural(e: &Error) -> bool {
    matches!(
        e,
        Error::NotCopositive { .. }
            | Error::NotComplementary { .. }
            | Error::NotRepresentable { .. }
            | Error::PartitionVerification(_)
            | Error::DefiningEquationsViolated { .. }
    )
}

fn cmd_analyze(a: &AnalyzeArgs) -> (i32, String) {
    let tol = match a.tol.tolerances() {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let (x, x_digest) = match read_matrix(&a.x) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    let u = match &a.u {
        Some(path) => match read_matrix(path) {
            Ok((u, d)) if u.p() == x.p() => Some((u, d)),
            Ok((u, _)) => {
                return input_error(Error::OrderMismatch {
                    expected: x.p(),
                    found: u.p(),
                })
            }
            Err(e) => return input_error(e),
        },
        None => None,
    };
    let input = InputDigest {
        x_sha256: x_digest,
        u_sha256: u.as_ref().map(|(_, d)| d.clone()),
    };
    let (report, code) = match analyze(&x, u.as_ref().map(|(u, _)| u), input, &tol, a) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    if let (Some(path), Some(zs), Some(dd)) = (
        &a.dump_jacobian,
        &report.zero_structure,
        &report.decomposition,
    ) {
        if let Err(e) = dump_jacobian(path, zs, dd) {
            return input_error(e);
        }
    }
    let out = if a.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        render_text(&report)
    };
    (code, out)
}

fn dump_jacobian(path: &Path, zs: &ZeroStructure, dd: &DualDecomposition) -> Result<(), String> {
    let sys = DefiningSystem::build(zs, dd).map_err(|e| e.to_string())?;
    let jac = sys.jacobian(&sys.anchor).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = jac
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let body = serde_json::to_string(&rows).expect("rows serialize");
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Runs the pipeline. `Err` only for input errors; structural failures are
/// recorded in the report with exit code 1.
fn analyze(
    x: &SymMat,
    u: Option<&SymMat>,
    input: InputDigest,
    tol: &Tolerances,
    a: &AnalyzeArgs,
) -> crate::Result<(AnalysisReport, i32)> {
    let copositivity = is_copositive(x, tol)?;
    let oracle = a.verify_oracle.then(|| {
        let o = simplex_min_oracle(x, a.grid_depth);
        let gap = o.value - copositivity.minimum;
        OracleCheck {
            grid_depth: a.grid_depth,
            value: o.value,
            argmin: o.argmin.iter().copied().collect(),
            gap,
            agrees: gap >= -1e3 * tol.zero_tol,
        }
    });
    let mut report = AnalysisReport {
        schema: SCHEMA.into(),
        input,
        p: x.p(),
        tolerances: *tol,
        copositivity,
        oracle,
        zero_structure: None,
        decomposition: None,
        assumptions: None,
        system: None,
        rank: None,
        notes: Vec::new(),
        summary: VerdictSummary {
            status: String::new(),
            zero_vertices: None,
            blocks: None,
            checks: Vec::new(),
        },
    };
    report.summary.checks.push(CheckSummary {
        check: "copositive".into(),
        verdict: if report.copositivity.member {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        tolerance: "zero_tol".into(),
        tolerance_value: tol.zero_tol,
    });
    if !report.copositivity.member {
        let w = report
            .copositivity
            .witness()
            .map(|t| format!("{t:?}"))
            .unwrap_or_default();
        report.summary.status = format!(
            "X is not copositive: t^T X t = {:e} at t = {w}",
            report.copositivity.minimum
        );
        return Ok((report, EXIT_STRUCTURAL));
    }

    let zs = match ZeroStructure::compute(x, tol) {
        Ok(zs) => zs,
        Err(e) if is_structural(&e) => return Ok(structural(report, e)),
        Err(e) => return Err(e),
    };
    report.summary.zero_vertices = Some(zs.vertices.len());
    report.summary.blocks = Some(zs.blocks.len());
    if zs.overlapping {
        report
            .notes
            .push("blocks overlap: some vertex lies in more than one block".into());
    }
    let empty = zs.vertices.is_empty();
    report.zero_structure = Some(zs.clone());

    let Some(u) = u else {
        report.summary.status = if empty {
            "interior of COP; empty zero set; U must be 0".into()
        } else {
            format!(
                "zero structure only: {} vertices, {} blocks",
                zs.vertices.len(),
                zs.blocks.len()
            )
        };
        return Ok((report, EXIT_OK));
    };

    let dd = match decompose_dual(u, &zs, tol) {
        Ok(dd) => dd,
        Err(e) if is_structural(&e) => return Ok(structural(report, e)),
        Err(e) => return Err(e),
    };
    report.decomposition = Some(dd.clone());
    report.summary.checks.push(CheckSummary {
        check: "complementary".into(),
        verdict: Verdict::Pass,
        tolerance: "zero_tol".into(),
        tolerance_value: tol.zero_tol,
    });

    let ar = check_assumptions(x, u, &zs, &dd, tol)?;
    for (name, verdict, tname, tval) in [
        ("assumption j", ar.j.verdict, "zero_tol", tol.zero_tol),
        ("assumption jj", ar.jj.verdict, "rank_tol", tol.rank_tol),
        ("assumption jjj", ar.jjj.verdict, "zero_tol", tol.zero_tol),
        ("condition i", ar.cond_i.verdict, "rank_tol", tol.rank_tol),
        ("condition ii", ar.cond_ii.verdict, "zero_tol", tol.zero_tol),
        ("condition iii", ar.cond_iii.verdict, "psd_tol", tol.psd_tol),
    ] {
        report.summary.checks.push(CheckSummary {
            check: name.into(),
            verdict,
            tolerance: tname.into(),
            tolerance_value: tval,
        });
    }
    report.assumptions = Some(ar);
    report
        .notes
        .push("strict complementarity of X is a derived property and is not re-verified".into());

    let sys = DefiningSystem::build(&zs, &dd)?;
    report.system = Some(SystemDims {
        p: sys.p,
        p_star: sys.p_star,
        m: sys.m,
        unknowns: sys.len(),
    });
    let cert = match rank_certificate(&sys, &sys.anchor, tol) {
        Ok(c) => c,
        Err(e) if is_structural(&e) => return Ok(structural(report, e)),
        Err(e) => return Err(e),
    };
    report.summary.checks.push(CheckSummary {
        check: "full row rank".into(),
        verdict: cert.verdict,
        tolerance: "rank_tol".into(),
        tolerance_value: tol.rank_tol,
    });
    report.summary.status = if empty {
        "interior of COP; empty zero set; U must be 0".into()
    } else {
        format!(
            "m = {}, jacobian rank {} ({})",
            cert.m_expected, cert.rank_computed, cert.verdict
        )
    };
    report.rank = Some(cert);
    Ok((report, EXIT_OK))
}

fn structural(mut report: AnalysisReport, e: Error) -> (AnalysisReport, i32) {
    report.summary.status = e.to_string();
    (report, EXIT_STRUCTURAL)
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn render_text(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "schema      {}", r.schema);
    let _ = writeln!(s, "X sha256    {}", r.input.x_sha256);
    if let Some(d) = &r.input.u_sha256 {
        let _ = writeln!(s, "U sha256    {d}");
    }
    let _ = writeln!(
        s,
        "tolerances  zero_tol={:e} rank_tol={:e} psd_tol={:e}",
        r.tolerances.zero_tol, r.tolerances.rank_tol, r.tolerances.psd_tol
    );
    let _ = writeln!(s, "p           {}", r.p);
    let _ = writeln!(
        s,
        "copositive  {} (min over simplex {:e})",
        r.copositivity.member, r.copositivity.minimum
    );
    if let Some(o) = &r.oracle {
        let _ = writeln!(
            s,
            "oracle      depth {} value {:e} gap {:e} {}",
            o.grid_depth,
            o.value,
            o.gap,
            if o.agrees { "agrees" } else { "DISAGREES" }
        );
    }
    if let Some(zs) = &r.zero_structure {
        let _ = writeln!(s, "zero vertices ({}):", zs.vertices.len());
        for (j, v) in zs.vertices.iter().enumerate() {
            let _ = writeln!(
                s,
                "  tau({}) = {}  M = {}",
                j + 1,
                fmt_vec(v),
                zs.contact_sets[j]
            );
        }
        let _ = writeln!(s, "blocks ({}):", zs.blocks.len());
        for (k, b) in zs.blocks.iter().enumerate() {
            let _ = writeln!(
                s,
                "  J({}) = {}  P*({}) = {}",
                k + 1,
                b.members,
                k + 1,
                b.support
            );
        }
    }
    if let Some(dd) = &r.decomposition {
        let _ = writeln!(
            s,
            "decomposition residual {:e}, {:?}",
            dd.residual, dd.uniqueness
        );
    }
    if let Some(sys) = &r.system {
        let _ = writeln!(
            s,
            "system      p*={} m={} unknowns={}",
            sys.p_star, sys.m, sys.unknowns
        );
    }
    if let Some(c) = &r.rank {
        let _ = writeln!(
            s,
            "rank        {} of {} (sigma_m/sigma_1 = {:e})",
            c.rank_computed, c.m_expected, c.ratio
        );
    }
    let _ = writeln!(s, "checks:");
    for c in &r.summary.checks {
        let _ = writeln!(
            s,
            "  {:<16} {:<7} [{}={:e}]",
            c.check, c.verdict, c.tolerance, c.tolerance_value
        );
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "status: {}", r.summary.status);
    s
}

fn cmd_list(json: bool) -> (i32, String) {
    if json {
        let list: Vec<serde_json::Value> = paperlab::SCENARIO_NAMES
            .iter()
            .map(|n| {
                let sc = paperlab::build(n).expect("registered");
                serde_json::json!({ "name": sc.name, "description": sc.description })
            })
            .collect();
        return (
            EXIT_OK,
            serde_json::to_string_pretty(&list).expect("serializes") + "\n",
        );
    }
    let mut s = String::new();
    for n in paperlab::SCENARIO_NAMES {
        let sc = paperlab::build(n).expect("registered");
        let _ = writeln!(s, "{:<11} {}", n, sc.description);
    }
    (EXIT_OK, s)
}

fn cmd_scenario(name: &str, json: bool, tol: &TolArgs) -> (i32, String) {
    let tol = match tol.tolerances() {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let sc = match paperlab::build(name) {
        Ok(sc) => sc,
        Err(e) => return input_error(e),
    };
    let run = paperlab::run_scenario(&sc, &tol);
    let code = if run.all_passed() {
        EXIT_OK
    } else {
        EXIT_STRUCTURAL
    };
    if json {
        return (
            code,
            serde_json::to_string_pretty(&run).expect("serializes") + "\n",
        );
    }
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}: {}", sc.name, sc.description);
    for o in &run.outcomes {
        let _ = writeln!(
            s,
            "  [{}] {} ({})",
            if o.passed { "pass" } else { "FAIL" },
            o.label,
            o.detail
        );
    }
    let passed = run.outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(s, "{passed}/{} expectations passed", run.outcomes.len());
    (code, s)
}

fn cmd_export(name: &str, dir: &Path) -> (i32, String) {
    let sc = match paperlab::build(name) {
        Ok(sc) => sc,
        Err(e) => return input_error(e),
    };
    let mut s = String::new();
    for (suffix, m) in [("X", &sc.x0), ("U", &sc.u0)] {
        let path = dir.join(format!("{name}_{suffix}.json"));
        let body = serde_json::to_string_pretty(m).expect("serializes") + "\n";
        if let Err(e) = std::fs::write(&path, body) {
            return input_error(format!("cannot write {}: {e}", path.display()));
        }
        let _ = writeln!(s, "{}", path.display());
    }
    (EXIT_OK, s)
}
