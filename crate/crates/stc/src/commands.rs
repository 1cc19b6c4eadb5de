//! Subcommand execution. Every run yields a [`Report`]; the exit code is
//! part of it.
//!
//! Exit codes: 0 consistent and reliable, 1 inconsistent, 2 input error,
//! 3 reliability failure. When several apply the order of precedence is
//! 2, 3, 1.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use stc_core::families::realize_w;
use stc_core::functionals::{identity_residual, w_series};
use stc_core::jack::jack_report;
use stc_core::theorem::{
    starlike_margin, DiskGrid, HypothesisEvaluator, TheoremId, TheoremParams, Verdict, VerdictBuilder,
    RELIABILITY_THRESHOLD,
};
use stc_core::{AnalyticSeries, Complex64, CoreError, Direction, FunctionPair};

use crate::cli::{CheckArgs, Command, CommonArgs, IdentityArgs, JackArgs, PairArgs, SweepArgs};
use crate::report::{
    CheckOutcome, CommandEcho, ErrorOutcome, GridEcho, IdentityOutcome, JackOutcome, JackProbe, Outcome,
    ProbeResult, Real, ReliabilitySummary, Report, SweepEcho, SweepOutcome, SweepRow, VerdictRecord,
    SCHEMA_VERSION,
};
use crate::spec::{build_function, build_w, parse_spec, BuildContext, ParseError, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNRELIABLE: i32 = 3;

/// Largest number of rows a sweep may produce.
pub const MAX_SWEEP_ROWS: usize = 100_000;

/// Input or evaluation failure, already classified by exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub exit_code: i32,
    pub message: String,
    pub tail_bound: Option<f64>,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { exit_code: EXIT_INPUT, message: message.into(), tail_bound: None }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EvaluationUnreliable { tail_bound } => {
                Self { exit_code: EXIT_UNRELIABLE, message: e.to_string(), tail_bound: Some(tail_bound) }
            }
            other => Self::input(other.to_string()),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Core(core) => core.into(),
            other => Self::input(other.to_string()),
        }
    }
}

/// Same result as [`stc_core::theorem::check`], with circles evaluated in
/// parallel and merged in grid order.
pub fn check_par(tp: &TheoremParams, p: &FunctionPair, grid: &DiskGrid) -> Result<Verdict, CoreError> {
    let eval = HypothesisEvaluator::new(tp, p)?;
    let step = 2.0 * std::f64::consts::PI / grid.angles() as f64;
    let parts = grid
        .radii()
        .par_iter()
        .map(|&r| {
            let mut b = VerdictBuilder::default();
            for j in 0..grid.angles() {
                let z = Complex64::from_polar(r, step * j as f64);
                b.push(z, &eval.sample(z)?);
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let mut acc = VerdictBuilder::default();
    for part in parts {
        acc.merge(part);
    }
    Ok(acc.finish(&eval))
}

fn reliability(max_tail_bound: f64, unreliable_cells: usize) -> ReliabilitySummary {
    ReliabilitySummary {
        threshold: Real(RELIABILITY_THRESHOLD),
        max_tail_bound: Real(max_tail_bound),
        reliable: unreliable_cells == 0,
        unreliable_cells,
    }
}

fn finish(command: CommandEcho, outcome: Outcome, rel: ReliabilitySummary, exit_code: i32, started: Instant) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        command,
        outcome,
        reliability: rel,
        exit_code,
        timing_ms: Real(started.elapsed().as_secs_f64() * 1e3),
    }
}

fn failure_report(command: CommandEcho, f: Failure, started: Instant) -> Report {
    let kind = if f.exit_code == EXIT_UNRELIABLE { "unreliable" } else { "input" };
    let rel = match f.tail_bound {
        Some(t) => reliability(t, 1),
        None => reliability(0.0, 0),
    };
    finish(command, Outcome::Error(ErrorOutcome { kind: kind.into(), message: f.message }), rel, f.exit_code, started)
}

/// Report for arguments the command line parser rejected.
pub fn usage_error_report(message: &str, started: Instant) -> Report {
    let command = CommandEcho { subcommand: "usage".into(), ..Default::default() };
    failure_report(command, Failure::input(message.trim_end()), started)
}

/// Canonical text of a spec, or the raw text if it does not parse.
fn canonical(text: &str) -> String {
    parse_spec(text).map(|s| s.to_string()).unwrap_or_else(|_| text.to_string())
}

fn echo_common(subcommand: &str, common: &CommonArgs) -> CommandEcho {
    CommandEcho { subcommand: subcommand.into(), order: common.order, seed: common.seed, ..Default::default() }
}

fn echo_pair(echo: &mut CommandEcho, pair: &PairArgs) {
    echo.f = Some(canonical(&pair.f));
    echo.g = Some(canonical(&pair.g));
    echo.mu = Some(Real(pair.mu));
}

fn echo_check(subcommand: &str, a: &CheckArgs) -> CommandEcho {
    let mut e = echo_common(subcommand, &a.common);
    echo_pair(&mut e, &a.pair);
    let t = &a.theorem;
    e.theorem = Some(t.theorem);
    e.beta = Some(Real(t.beta));
    e.gamma = Some(Real(t.gamma));
    e.delta = Some(t.delta.into());
    if matches!(t.theorem, 3 | 5) {
        e.rho = t.rho.map(Real);
    }
    if t.theorem == 2 {
        e.alpha = Some(Real(t.alpha));
    }
    e.n = t.n;
    e.grid = Some(GridEcho { radii: a.grid.grid.radii, angles: a.grid.grid.angles, r_max: Real(a.grid.rmax) });
    e
}

fn context(common: &CommonArgs) -> Result<BuildContext, Failure> {
    if common.order < 2 {
        return Err(Failure::input(format!("--order {} must be at least 2", common.order)));
    }
    Ok(BuildContext { order: common.order, seed: common.seed })
}

fn build_pair(pair: &PairArgs, ctx: &BuildContext) -> Result<FunctionPair, Failure> {
    let f = build_function(&parse_spec(&pair.f)?, ctx).map_err(|e| Failure::from(e).prefixed("--f"))?;
    let g = build_function(&parse_spec(&pair.g)?, ctx).map_err(|e| Failure::from(e).prefixed("--g"))?;
    Ok(FunctionPair::new(f, g))
}

impl Failure {
    fn prefixed(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

/// Resolved inputs of a check.
pub struct CheckSetup {
    pub pair: FunctionPair,
    pub params: TheoremParams,
    pub grid: DiskGrid,
}

pub fn setup_check(a: &CheckArgs) -> Result<CheckSetup, Failure> {
    let setup = setup_base(a)?;
    setup.params.validate()?;
    if setup.params.n > setup.pair.n() {
        return Err(Failure::input(format!("--n {} exceeds min(n1, n2) = {}", setup.params.n, setup.pair.n())));
    }
    Ok(setup)
}

fn verdict_exit(v: &Verdict) -> i32 {
    if !v.reliable {
        EXIT_UNRELIABLE
    } else if !v.consistent {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    }
}

pub fn run_check(a: &CheckArgs, started: Instant) -> Report {
    let echo = echo_check("check", a);
    let setup = match setup_check(a) {
        Ok(s) => s,
        Err(f) => return failure_report(echo, f, started),
    };
    let verdict = match check_par(&setup.params, &setup.pair, &setup.grid) {
        Ok(v) => v,
        Err(e) => return failure_report(echo, e.into(), started),
    };
    let g_starlike_margin = starlike_margin(setup.pair.g(), setup.params.alpha, &setup.grid).ok().map(Real);
    let rel = reliability(verdict.reliability, usize::from(!verdict.reliable));
    let exit = verdict_exit(&verdict);
    let outcome = Outcome::Check(CheckOutcome { verdict: VerdictRecord::from(&verdict), g_starlike_margin });
    finish(echo, outcome, rel, exit, started)
}

fn jack_w(a: &JackArgs, ctx: &BuildContext) -> Result<AnalyticSeries, Failure> {
    match (&a.w, &a.f, &a.g) {
        (Some(w), _, _) => Ok(realize_w(&build_w(&parse_spec(w)?)?, 1, ctx.order)?),
        (None, Some(f), Some(g)) => {
            let pair = build_pair(&PairArgs { f: f.clone(), g: g.clone(), mu: a.mu }, ctx)?;
            let d = if a.reciprocal { Direction::Reciprocal } else { Direction::Forward };
            Ok(w_series(&pair, a.mu, d)?)
        }
        _ => Err(Failure::input("give --w, or both --f and --g")),
    }
}

pub fn run_jack(a: &JackArgs, started: Instant) -> Report {
    let mut echo = echo_common("jack", &a.common);
    echo.w = a.w.as_deref().map(canonical);
    echo.f = a.f.as_deref().map(canonical);
    echo.g = a.g.as_deref().map(canonical);
    if a.w.is_none() {
        echo.mu = Some(Real(a.mu));
    }
    echo.radii = Some(a.radii.iter().copied().map(Real).collect());
    echo.samples = Some(a.samples);
    echo.tol = Some(Real(a.tol));
    let w = match context(&a.common).and_then(|ctx| jack_w(a, &ctx)) {
        Ok(w) => w,
        Err(f) => return failure_report(echo, f, started),
    };
    if a.radii.is_empty() {
        return failure_report(echo, Failure::input("--radii is empty"), started);
    }
    let mut probes = Vec::with_capacity(a.radii.len());
    let (mut errors, mut unreliable, mut failed) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    for &r in &a.radii {
        match jack_report(&w, r, a.samples, a.tol) {
            Ok(rep) => {
                let tail = w.eval(rep.z0).map(|e| e.tail_bound).unwrap_or(f64::INFINITY);
                worst = worst.max(tail);
                if tail > RELIABILITY_THRESHOLD {
                    unreliable += 1;
                }
                if !(rep.order_ok && rep.real_ok) {
                    failed += 1;
                }
                probes.push(ProbeResult::Ok(JackProbe::new(&rep, tail)));
            }
            Err(e) => {
                errors += 1;
                probes.push(ProbeResult::Error { r: Real(r), message: e.to_string() });
            }
        }
    }
    let exit = if errors > 0 {
        EXIT_INPUT
    } else if unreliable > 0 {
        EXIT_UNRELIABLE
    } else if failed > 0 {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    };
    finish(echo, Outcome::Jack(JackOutcome { probes }), reliability(worst, unreliable), exit, started)
}

pub fn run_identity(a: &IdentityArgs, started: Instant) -> Report {
    let mut echo = echo_common("identity", &a.common);
    echo_pair(&mut echo, &a.pair);
    echo.tol = Some(Real(a.tol));
    let residuals = context(&a.common).and_then(|ctx| {
        let pair = build_pair(&a.pair, &ctx)?;
        let forward = identity_residual(&pair, a.pair.mu, Direction::Forward)?.max_abs_coeff();
        let reciprocal = identity_residual(&pair, a.pair.mu, Direction::Reciprocal)?.max_abs_coeff();
        Ok((forward, reciprocal))
    });
    let (forward, reciprocal) = match residuals {
        Ok(r) => r,
        Err(f) => return failure_report(echo, f, started),
    };
    let passes = forward < a.tol && reciprocal < a.tol;
    let outcome = Outcome::Identity(IdentityOutcome {
        forward_residual: Real(forward),
        reciprocal_residual: Real(reciprocal),
        tolerance: Real(a.tol),
        passes,
    });
    finish(echo, outcome, reliability(0.0, 0), if passes { EXIT_OK } else { EXIT_INCONSISTENT }, started)
}

/// Parameter values `from, from + step, ...` up to `to`, with the last value
/// clamped to `to` against rounding.
pub fn sweep_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || !(step > 0.0) || from > to {
        return Err(Failure::input(format!("empty sweep range: from {from} to {to} step {step}")));
    }
    let span = (to - from) / step;
    let count = (span + 1e-9).floor() as usize + 1;
    if count > MAX_SWEEP_ROWS {
        return Err(Failure::input(format!("sweep would produce {count} rows (limit {MAX_SWEEP_ROWS})")));
    }
    Ok((0..count).map(|i| (from + step * i as f64).min(to)).collect())
}

fn with_param(base: &TheoremParams, param: &str, v: f64) -> Result<TheoremParams, Failure> {
    let mut tp = *base;
    match param {
        "mu" => tp.mu = v,
        "beta" => tp.beta = v,
        "gamma" => tp.gamma = v,
        "delta" => tp.delta.re = v,
        "delta_im" => tp.delta.im = v,
        "rho" => tp.rho = v,
        "alpha" => tp.alpha = v,
        "n" => {
            if !(v >= 1.0 && v.fract() == 0.0) {
                return Err(Failure::input(format!("n = {v} must be a positive integer")));
            }
            tp.n = v as usize;
        }
        other => {
            return Err(Failure::input(format!(
                "unknown sweep parameter '{other}' (expected mu, beta, gamma, delta, delta_im, rho, alpha or n)"
            )))
        }
    }
    Ok(tp)
}

fn sweep_row(param: &str, value: f64, tp: &TheoremParams, result: &Result<Verdict, Failure>) -> SweepRow {
    let v = result.as_ref().ok();
    SweepRow {
        param: param.into(),
        value,
        theorem: tp.id.number(),
        mu: tp.mu,
        beta: tp.beta,
        gamma: tp.gamma,
        delta_re: tp.delta.re,
        delta_im: tp.delta.im,
        rho: tp.rho,
        alpha: tp.alpha,
        n: tp.n,
        hyp_sup: v.map(|v| v.hyp_sup),
        hyp_bound: v.map(|v| v.hyp_bound),
        hyp_holds: v.map(|v| v.hyp_holds),
        concl_sup: v.map(|v| v.concl_sup),
        concl_bound: v.map(|v| v.concl_bound),
        concl_holds: v.map(|v| v.concl_holds),
        consistent: v.map(|v| v.consistent),
        reliability: v.map(|v| v.reliability),
        reliable: v.map(|v| v.reliable),
        error: result.as_ref().err().map(|f| f.message.clone()).unwrap_or_default(),
    }
}

/// Runs a sweep. The rows come back alongside the report so that the caller
/// can write them.
pub fn run_sweep(a: &SweepArgs, started: Instant) -> (Report, Vec<SweepRow>) {
    let mut echo = echo_check("sweep", &a.check);
    echo.sweep =
        Some(SweepEcho { param: a.param.clone(), from: Real(a.from), to: Real(a.to), step: Real(a.step) });
    let values = match sweep_values(a.from, a.to, a.step) {
        Ok(v) => v,
        Err(f) => return (failure_report(echo, f, started), Vec::new()),
    };
    // the swept parameter may make the base parameters invalid; validate per row
    let mut base_args = a.check.clone();
    if a.param == "rho" && base_args.theorem.rho.is_none() {
        base_args.theorem.rho = Some(values[0]);
    }
    let base = match setup_base(&base_args) {
        Ok(s) => s,
        Err(f) => return (failure_report(echo, f, started), Vec::new()),
    };
    let mut rows = Vec::with_capacity(values.len());
    let mut summary = SweepOutcome { csv: a.csv.as_ref().map(|p| p.display().to_string()), ..Default::default() };
    let mut worst: f64 = 0.0;
    for &v in &values {
        let tp = match with_param(&base.params, &a.param, v) {
            Ok(tp) => tp,
            Err(f) => return (failure_report(echo, f, started), Vec::new()),
        };
        let result = tp
            .validate()
            .map_err(Failure::from)
            .and_then(|_| check_par(&tp, &base.pair, &base.grid).map_err(Failure::from));
        summary.rows += 1;
        match &result {
            Ok(verdict) => {
                worst = worst.max(verdict.reliability);
                summary.hyp_holds += usize::from(verdict.hyp_holds);
                if !verdict.reliable {
                    summary.unreliable += 1;
                } else if verdict.consistent {
                    summary.consistent += 1;
                } else {
                    summary.inconsistent += 1;
                }
            }
            Err(f) if f.exit_code == EXIT_UNRELIABLE => {
                worst = worst.max(f.tail_bound.unwrap_or(f64::INFINITY));
                summary.unreliable += 1;
            }
            Err(_) => summary.errors += 1,
        }
        rows.push(sweep_row(&a.param, v, &tp, &result));
    }
    let exit = if summary.errors > 0 {
        EXIT_INPUT
    } else if summary.unreliable > 0 {
        EXIT_UNRELIABLE
    } else if summary.inconsistent > 0 {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    };
    let rel = reliability(worst, summary.unreliable);
    (finish(echo, Outcome::Sweep(summary), rel, exit, started), rows)
}

/// Like [`setup_check`] but without validating the theorem parameters, which
/// individual sweep rows may repair or break.
fn setup_base(a: &CheckArgs) -> Result<CheckSetup, Failure> {
    let ctx = context(&a.common)?;
    let pair = build_pair(&a.pair, &ctx)?;
    let t = &a.theorem;
    let id = TheoremId::from_number(t.theorem)?;
    let rho = match (id.is_modulus_form(), t.rho) {
        (true, None) => return Err(Failure::input(format!("--rho is required for theorem {}", t.theorem))),
        (true, Some(r)) => r,
        (false, _) => 0.0,
    };
    let params = TheoremParams {
        id,
        mu: a.pair.mu,
        beta: t.beta,
        gamma: t.gamma,
        delta: t.delta,
        rho,
        alpha: if id == TheoremId::Two { t.alpha } else { 0.0 },
        n: t.n.unwrap_or(pair.n()),
    };
    let grid = DiskGrid::geometric(a.grid.grid.radii, a.grid.grid.angles, a.grid.rmax)?;
    Ok(CheckSetup { pair, params, grid })
}

/// Output of one invocation.
pub struct RunOutput {
    pub report: Report,
    pub csv_rows: Option<Vec<SweepRow>>,
}

pub fn run(cmd: &Command, started: Instant) -> RunOutput {
    match cmd {
        Command::Check(a) => RunOutput { report: run_check(a, started), csv_rows: None },
        Command::Jack(a) => RunOutput { report: run_jack(a, started), csv_rows: None },
        Command::Identity(a) => RunOutput { report: run_identity(a, started), csv_rows: None },
        Command::Sweep(a) => {
            let (report, rows) = run_sweep(a, started);
            RunOutput { report, csv_rows: Some(rows) }
        }
    }
}

/// Writes the report (to `json` or stdout) and any CSV rows. Returns the
/// exit code, which becomes 2 if an output cannot be written.
pub fn emit(out: &RunOutput, json: Option<&Path>, csv: Option<&Path>) -> i32 {
    let mut code = out.report.exit_code;
    if let (Some(path), Some(rows)) = (csv, &out.csv_rows) {
        if out.report.exit_code != EXIT_INPUT || !rows.is_empty() {
            let written = crate::report::to_csv(rows)
                .map_err(|e| e.to_string())
                .and_then(|bytes| crate::report::write_atomic(path, &bytes).map_err(|e| e.to_string()));
            if let Err(e) = written {
                eprintln!("stc: cannot write {}: {e}", path.display());
                code = EXIT_INPUT;
            }
        }
    }
    let text = crate::report::to_json(&out.report);
    match json {
        Some(path) => {
            if let Err(e) = crate::report::write_atomic(path, text.as_bytes()) {
                eprintln!("stc: cannot write {}: {e}", path.display());
                code = EXIT_INPUT;
            }
        }
        None => print!("{text}"),
    }
    code
}

/// One line for stderr.
pub fn summary_line(r: &Report) -> String {
    let what = match &r.outcome {
        Outcome::Check(c) => {
            let v = &c.verdict;
            format!(
                "theorem {}: hyp_sup {:.6e} vs bound {:.6e} (holds: {}), concl_sup {:.6e} vs {:.6e} (holds: {})",
                v.theorem, v.hyp_sup.0, v.hyp_bound.0, v.hyp_holds, v.concl_sup.0, v.concl_bound.0, v.concl_holds
            )
        }
        Outcome::Jack(j) => format!("{} probes", j.probes.len()),
        Outcome::Identity(i) => {
            format!("residuals {:.3e} forward, {:.3e} reciprocal", i.forward_residual.0, i.reciprocal_residual.0)
        }
        Outcome::Sweep(s) => format!(
            "{} rows: {} consistent, {} inconsistent, {} unreliable, {} errors",
            s.rows, s.consistent, s.inconsistent, s.unreliable, s.errors
        ),
        Outcome::Error(e) => format!("{} error: {}", e.kind, e.message),
    };
    format!("stc {}: {what} (exit {})", r.command.subcommand, r.exit_code)
}
