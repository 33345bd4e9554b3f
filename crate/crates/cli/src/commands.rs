//! Subcommand bodies. Each returns the JSON report and the exit code; the
//! human format is rendered from the same report.

use std::path::{Path, PathBuf};

use copodual::cones::{is_copositive, CopositivityStatus, CopositivityVerdict, DEFAULT_GRID};
use copodual::dualgen::{build_dual as run_build, detect_immobile, BuildOutput, ExtendedDualSolution, GenConfig};
use copodual::model::{feasibility_check, load_matrix, load_program, CopositiveProgram, FeasibilityReport};
use copodual::sdpbridge::{ed_to_edr, edr_feasible, psd_bound_check, EdSolution, EdrSolution, SdpFeasibility, EQ_TOL};
use copodual::symcore::simplex_grid;
use copodual::verify::{slater_probe, strong_duality_report_with_tol, DualityReport, Verdict};
use copodual::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::Common;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_INFEASIBLE: u8 = 65;
pub const EXIT_GAP: u8 = 66;
pub const EXIT_UNBOUNDED: u8 = 67;
pub const EXIT_INTERNAL: u8 = 70;

/// Default of `--tol` per subcommand.
pub const DEFAULTS: &[(&str, f64)] =
    &[("check-cop", 1e-7), ("find-immobile", 1e-7), ("build-dual", 1e-6), ("verify", 1e-6), ("sdp-convert", 1e-8)];

/// Random samples of the eigenvalue bound check in `sdp-convert`.
const BOUND_SAMPLES: usize = 64;

fn default_tol(cmd: &str) -> f64 {
    DEFAULTS.iter().find(|(c, _)| *c == cmd).map(|(_, t)| *t).expect("every subcommand has a default")
}

pub struct Outcome {
    pub code: u8,
    pub report: Value,
    pub file: Option<(PathBuf, String)>,
}

impl Outcome {
    pub fn json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    fn new(command: &str, status: &str, code: u8, body: Value) -> Self {
        let mut report = json!({ "command": command, "status": status, "exit_code": code });
        if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
            dst.extend(src);
        }
        Outcome { code, report, file: None }
    }

    /// `--out` receives the report itself.
    fn with_report_file(mut self, out: &Option<PathBuf>) -> Self {
        if let Some(p) = out {
            self.file = Some((p.clone(), self.json() + "\n"));
        }
        self
    }

    fn error(command: &str, err: &Error) -> Self {
        let (status, code) = match err {
            Error::Infeasible { .. } => ("infeasible", EXIT_INFEASIBLE),
            Error::Unbounded => ("unbounded", EXIT_UNBOUNDED),
            Error::DualInfeasible(_) => ("infeasible_input", EXIT_INFEASIBLE),
            Error::Parse(_)
            | Error::Io(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::NotSymmetric { .. }
            | Error::InvalidSimplexPoint(_)
            | Error::NegativeFactorEntry { .. }
            | Error::GridTooFine { .. } => ("bad_input", EXIT_USAGE),
            _ => ("failed", EXIT_INTERNAL),
        };
        Outcome::new(command, status, code, json!({ "error": err.to_string() }))
    }
}

fn tol(cmd: &str, c: &Common) -> Result<f64, Error> {
    let t = c.tol.unwrap_or_else(|| default_tol(cmd));
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::InvalidArgument(format!("--tol must be positive, got {t}")))
    }
}

fn grid(c: &Common) -> Result<usize, Error> {
    match c.grid {
        Some(0) => Err(Error::InvalidArgument("--grid must be at least 1".into())),
        Some(k) => Ok(k),
        None => Ok(DEFAULT_GRID),
    }
}

fn gen_config(c: &Common) -> Result<GenConfig, Error> {
    let mut cfg = GenConfig { grid: grid(c)?, eps_init: c.eps_init, ..GenConfig::default() };
    if let Some(m) = c.max_iters {
        cfg.max_iterations = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_copositive(path: &Path) -> Result<CopositiveProgram, Error> {
    load_program(path)?.into_copositive()
}

fn run(command: &str, c: &Common, body: impl FnOnce() -> Result<Outcome, Error>) -> Outcome {
    body().unwrap_or_else(|e| Outcome::error(command, &e).with_report_file(&c.out))
}

pub fn check_cop(path: &Path, c: &Common) -> Outcome {
    run("check-cop", c, || {
        let d = load_matrix(path)?;
        let v: CopositivityVerdict = is_copositive(&d, tol("check-cop", c)?, grid(c)?)?;
        let (status, code) = match v.status {
            CopositivityStatus::Copositive => ("copositive", EXIT_OK),
            CopositivityStatus::NotCopositive => ("not_copositive", EXIT_NO),
            CopositivityStatus::Inconclusive => ("inconclusive", EXIT_UNDECIDED),
        };
        let body = json!({ "min_value": v.min_value, "witness": v.witness, "history": v.history });
        Ok(Outcome::new("check-cop", status, code, body).with_report_file(&c.out))
    })
}

pub fn find_immobile(path: &Path, c: &Common) -> Outcome {
    run("find-immobile", c, || {
        let prog = load_copositive(path)?;
        let mut cfg = gen_config(c)?;
        cfg.tau_mu = tol("find-immobile", c)?;
        let rep = detect_immobile(&prog, &cfg)?;
        let probe = slater_probe(&prog, &simplex_grid(prog.p(), cfg.grid)?, cfg.tau_mu)?;
        let body = json!({
            "levels": rep.levels,
            "immobile": rep.by_level,
            "verified": rep.verified,
            "slater_probe": probe,
            "slater_mu": rep.slater_mu,
            "trace": rep.trace,
        });
        Ok(Outcome::new("find-immobile", "ok", EXIT_OK, body).with_report_file(&c.out))
    })
}

/// Contents of the `build-dual --out` file, read back by `verify`.
#[derive(Serialize, Deserialize)]
pub struct DualFile {
    pub x0: Vec<f64>,
    pub solution: ExtendedDualSolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<DualityReport>,
}

pub fn build_dual(path: &Path, c: &Common) -> Outcome {
    run("build-dual", c, || {
        let prog = load_copositive(path)?;
        let mut cfg = gen_config(c)?;
        let t = tol("build-dual", c)?;
        cfg.gap_tol = t;
        let out: BuildOutput = run_build(&prog, &cfg)?;
        let report = strong_duality_report_with_tol(&prog, &out.x0, &out.solution, t)?;
        let strong = out.converged && report.verdict == Verdict::StrongDuality;
        let (status, code) = if strong { ("strong_duality", EXIT_OK) } else { ("gap", EXIT_GAP) };
        let body = json!({
            "m0": out.m0,
            "converged": out.converged,
            "x0": out.x0,
            "primal_value": out.primal_value,
            "dual_value": out.dual_value,
            "gap": out.gap,
            "report": report,
            "immobile": out.immobile,
            "dam_noop_levels": out.dam_noop_levels,
            "trace": out.trace,
            "final_trace": out.final_trace,
            "solution": out.solution,
        });
        let mut o = Outcome::new("build-dual", status, code, body);
        if let Some(p) = &c.out {
            let file = DualFile { x0: out.x0.clone(), solution: out.solution.clone(), report: Some(report) };
            o.file = Some((p.clone(), serde_json::to_string_pretty(&file)? + "\n"));
        }
        Ok(o)
    })
}

pub fn verify(path: &Path, dual: &Path, x: Option<&str>, c: &Common) -> Outcome {
    run("verify", c, || {
        let prog = load_copositive(path)?;
        let file: DualFile = serde_json::from_str(&std::fs::read_to_string(dual)?)?;
        let x0 = match x {
            Some(s) => serde_json::from_str::<Vec<f64>>(s)?,
            None => file.x0,
        };
        if x0.len() != prog.n() {
            return Err(Error::DimensionMismatch { expected: prog.n(), found: x0.len() });
        }
        if file.solution.p != prog.p() {
            return Err(Error::DimensionMismatch { expected: prog.p(), found: file.solution.p });
        }
        file.solution.check_shapes()?;
        let t = tol("verify", c)?;
        let grid = simplex_grid(prog.p(), grid(c)?)?;
        let scale = prog.matrices().iter().fold(1.0_f64, |a, m| a.max(m.max_abs()));
        let xs = 1.0 + x0.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let primal: FeasibilityReport = feasibility_check(&prog, &x0, &grid, 1e-7 * scale * xs)?;
        let report = strong_duality_report_with_tol(&prog, &x0, &file.solution, t)?;
        let (status, code) = match (primal.feasible, report.verdict) {
            (false, _) => ("infeasible_primal", EXIT_UNDECIDED),
            (true, Verdict::InfeasibleDual) => ("infeasible_dual", EXIT_UNDECIDED),
            (true, Verdict::WeakOnly) => ("weak_only", EXIT_NO),
            (true, Verdict::StrongDuality) => ("strong_duality", EXIT_OK),
        };
        let body = json!({ "x": x0, "primal_feasibility": primal, "report": report });
        Ok(Outcome::new("verify", status, code, body).with_report_file(&c.out))
    })
}

fn seed() -> Result<u64, Error> {
    match std::env::var("COPODUAL_SEED") {
        Ok(s) => {
            s.trim().parse().map_err(|_| Error::InvalidArgument(format!("COPODUAL_SEED must be an integer, got {s:?}")))
        }
        Err(_) => Ok(0),
    }
}

pub fn sdp_convert(path: &Path, ed_path: &Path, c: &Common) -> Outcome {
    run("sdp-convert", c, || {
        let sdp = load_program(path)?.into_sdp()?;
        let ed: EdSolution = serde_json::from_str(&std::fs::read_to_string(ed_path)?)?;
        if ed.p != sdp.p() {
            return Err(Error::DimensionMismatch { expected: sdp.p(), found: ed.p });
        }
        let psd_tol = tol("sdp-convert", c)?;
        let edr: EdrSolution = ed_to_edr(&sdp, &ed)?;
        let check: SdpFeasibility = edr_feasible(&sdp, &edr, EQ_TOL, psd_tol)?;
        let seed = seed()?;
        let mut bound_holds = true;
        for lv in &ed.levels {
            bound_holds &= psd_bound_check(&lv.d, BOUND_SAMPLES, seed)?;
        }
        let ed_value = ed.dual_value(&sdp)?;
        let edr_value = edr.dual_value(&sdp)?;
        let (status, code) = if check.feasible { ("feasible", EXIT_OK) } else { ("psd_violation", EXIT_NO) };
        let body = json!({
            "ed_value": ed_value,
            "edr_value": edr_value,
            "value_difference": edr_value - ed_value,
            "ed_residuals": ed.equality_residuals(&sdp)?,
            "edr_residuals": edr.equality_residuals(&sdp)?,
            "feasibility": check,
            "rho": edr.rho,
            "bound_check": { "seed": seed, "samples": BOUND_SAMPLES, "holds": bound_holds },
        });
        let mut o = Outcome::new("sdp-convert", status, code, body);
        if let Some(p) = &c.out {
            o.file = Some((p.clone(), serde_json::to_string_pretty(&edr)? + "\n"));
        }
        Ok(o)
    })
}
