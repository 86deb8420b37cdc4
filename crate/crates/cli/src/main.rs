//! `rayleigh-disc`: analysis, sweeps, portraits and the verification suite
//! for the generalized Rayleigh system `x'' + x = a(1 - x'^{2n}) x'`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use rayleigh_core::flow::check_tolerances;
use rayleigh_core::lienardcheck::{build_lienard_data, check_hypotheses};
use rayleigh_core::limitcycle::{sweep, sweep_csv, Tolerances};
use rayleigh_core::portrait::{build_portrait, render_svg, PortraitModel, PortraitOptions};
use rayleigh_core::verify::{run_criterion, CriterionOutcome, CRITERIA};
use rayleigh_core::vectorfield::{Form, RayleighParams};
use rayleigh_core::Error;

#[derive(Parser)]
#[command(name = "rayleigh-disc", version, about = "Global dynamics of x'' + x = a(1 - x'^{2n}) x'")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria, limit cycle, Liénard hypotheses and class for one (a, n).
    Analyze(Common),
    /// Limit-cycle records over a range of a and a list of n.
    Sweep(Common),
    /// Poincaré-disc phase portrait as SVG or JSON.
    Portrait(Common),
    /// Run the acceptance suite.
    Verify(Common),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormArg {
    Eq1,
    Eq2,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Form {
        match f {
            FormArg::Eq1 => Form::Eq1,
            FormArg::Eq2 => Form::Eq2,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
struct Common {
    /// Parameter a (a single value).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Lower end of an a-range.
    #[arg(long, allow_hyphen_values = true)]
    a_min: Option<f64>,
    /// Upper end of an a-range.
    #[arg(long, allow_hyphen_values = true)]
    a_max: Option<f64>,
    /// Number of equally spaced a-values in the range (at least 2).
    #[arg(long)]
    a_steps: Option<usize>,
    /// Exponent n (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    n: Vec<i64>,
    #[arg(long, value_enum, default_value = "eq2")]
    form: FormArg,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweep and verify.
    #[arg(long, env = "RAYLEIGH_DISC_JOBS")]
    jobs: Option<usize>,
    /// Verification on n = 1 only.
    #[arg(long)]
    quick: bool,
    /// Machine-readable verification results.
    #[arg(long)]
    json: bool,
    /// Portrait size in pixels.
    #[arg(long, default_value_t = 600)]
    size: u32,
}

enum Failure {
    Usage(String),
    Numerical(String),
    /// Report text and a summary of the failures.
    Verification(String, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// Text destined for stdout.
type Outcome = std::result::Result<String, Failure>;

impl Common {
    fn tolerances(&self) -> std::result::Result<Tolerances, Failure> {
        check_tolerances(self.rtol, self.atol)?;
        Ok(Tolerances { rtol: self.rtol, atol: self.atol })
    }

    fn ns(&self, default: Option<u32>) -> std::result::Result<Vec<u32>, Failure> {
        if self.n.is_empty() {
            return default.map(|n| vec![n]).ok_or_else(|| Failure::Usage("at least one --n is required".into()));
        }
        self.n
            .iter()
            .map(|&n| {
                if n < 1 {
                    Err(Failure::Usage("n must be ≥ 1".into()))
                } else {
                    u32::try_from(n).map_err(|_| Failure::Usage(format!("n = {n} is too large")))
                }
            })
            .collect()
    }

    fn single_a(&self) -> std::result::Result<f64, Failure> {
        match self.a {
            Some(a) if a.is_finite() => Ok(a),
            Some(_) => Err(Failure::Usage("a must be finite".into())),
            None => Err(Failure::Usage("--a is required".into())),
        }
    }

    fn single(&self) -> std::result::Result<RayleighParams, Failure> {
        let ns = self.ns(Some(1))?;
        if ns.len() != 1 {
            return Err(Failure::Usage("this command takes a single --n".into()));
        }
        Ok(RayleighParams::new(self.single_a()?, ns[0])?)
    }

    fn a_values(&self) -> std::result::Result<Vec<f64>, Failure> {
        match (self.a, self.a_min, self.a_max, self.a_steps) {
            (Some(_), None, None, None) => Ok(vec![self.single_a()?]),
            (None, Some(lo), Some(hi), Some(steps)) => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Failure::Usage("range endpoints must be finite".into()));
                }
                if steps < 2 {
                    return Err(Failure::Usage("--a-steps must be at least 2".into()));
                }
                if lo > hi {
                    return Err(Failure::Usage("--a-min must not exceed --a-max".into()));
                }
                Ok((0..steps)
                    .map(|k| {
                        let v = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
                        // keep the decimal grid clean so that 0 is hit exactly
                        let v = (v * 1e12).round() / 1e12;
                        if v == 0.0 { 0.0 } else { v }
                    })
                    .collect())
            }
            _ => Err(Failure::Usage("give either --a or all of --a-min, --a-max, --a-steps".into())),
        }
    }

    fn portrait_options(&self) -> std::result::Result<PortraitOptions, Failure> {
        Ok(PortraitOptions { tol: self.tolerances()?, ..PortraitOptions::default() })
    }

    /// Runs `f` on a worker pool sized by `--jobs` (rayon's default otherwise).
    fn with_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> std::result::Result<R, Failure> {
        match self.jobs {
            Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
            Some(j) => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map(|pool| pool.install(f))
                .map_err(|e| Failure::Usage(format!("cannot size the worker pool: {e}"))),
            None => Ok(f()),
        }
    }

    fn format(&self, default: Format, allowed: &[Format]) -> std::result::Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::Usage(format!("format {f:?} is not available for this command").to_lowercase()))
        }
    }

    fn config(&self, command: &str) -> Value {
        json!({ "command": command, "args": self, "version": env!("CARGO_PKG_VERSION") })
    }

    /// Writes to `--out` and returns nothing, or returns the text for stdout.
    fn emit(&self, text: String) -> Outcome {
        match &self.out {
            Some(p) => std::fs::write(p, text)
                .map(|_| String::new())
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
            None => Ok(text),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn analyze(c: &Common) -> Outcome {
    let format = c.format(Format::Json, &[Format::Json, Format::Text])?;
    let params = c.single()?;
    let form: Form = c.form.into();
    let model = build_portrait(params, form, &c.portrait_options()?)?;
    let lienard = check_hypotheses(&build_lienard_data(params), params);
    match format {
        Format::Json => {
            let report = json!({
                "config": c.config("analyze"),
                "params": params,
                "form": form,
                "degree": model.degree,
                "finite_equilibria": model.finite_equilibria,
                "infinite_equilibria": model.infinite_equilibria,
                "cycle": model.cycle,
                "lienard": lienard,
                "class_tag": model.class_tag.to_string(),
                "signature": model.signature,
                "notes": model.notes,
            });
            c.emit(pretty(&report))
        }
        _ => c.emit(analyze_text(&model, &lienard.to_table(), c)),
    }
}

fn analyze_text(m: &PortraitModel, lienard: &str, c: &Common) -> String {
    let mut s = format!("# config: {}\n", c.config("analyze"));
    s.push_str(&format!("a = {}, n = {}, form {}, degree {}\n", m.params.a, m.params.n, m.form, m.degree));
    for e in &m.finite_equilibria {
        s.push_str(&format!("finite origin: {}\n", e.kind));
    }
    for ie in &m.infinite_equilibria {
        s.push_str(&format!(
            "infinite {} at u = {}: {} (opposite {}: {})\n",
            ie.chart,
            ie.u,
            ie.report.kind,
            ie.chart.opposite(),
            ie.opposite.kind
        ));
    }
    match &m.cycle {
        Some(cy) => s.push_str(&format!(
            "limit cycle: r* = {:.10}, period = {:.10}, multiplier = {:.6e} ({:?})\n",
            cy.r_star, cy.period, cy.multiplier, cy.stability
        )),
        None => s.push_str("limit cycle: none (linear center)\n"),
    }
    s.push_str(lienard);
    s.push_str(&format!("class: {}\n", m.class_tag));
    s
}

fn sweep_cmd(c: &Common) -> Outcome {
    let format = c.format(Format::Csv, &[Format::Csv, Format::Json])?;
    let a_values = c.a_values()?;
    let ns = c.ns(None)?;
    let tol = c.tolerances()?;
    let rows = c.with_pool(|| sweep(&a_values, &ns, c.form.into(), tol))?;
    match format {
        Format::Json => c.emit(pretty(&json!({ "config": c.config("sweep"), "rows": rows }))),
        _ => c.emit(format!("# config: {}\n{}", c.config("sweep"), sweep_csv(&rows))),
    }
}

fn portrait_cmd(c: &Common) -> Outcome {
    let format = c.format(Format::Svg, &[Format::Svg, Format::Json])?;
    let params = c.single()?;
    if c.size < 200 {
        return Err(Failure::Usage("--size must be at least 200".into()));
    }
    let model = build_portrait(params, c.form.into(), &c.portrait_options()?)?;
    match format {
        Format::Json => {
            let mut v = model.to_json();
            v["config"] = c.config("portrait");
            c.emit(pretty(&v))
        }
        _ => c.emit(render_svg(&model, c.size)?),
    }
}

fn verify_cmd(c: &Common) -> Outcome {
    let format = if c.json { Format::Json } else { c.format(Format::Text, &[Format::Text, Format::Json])? };
    let quick = c.quick;
    let outcomes: Vec<CriterionOutcome> =
        c.with_pool(|| CRITERIA.par_iter().map(|(id, _)| run_criterion(*id, quick)).collect())?;
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let text = match format {
        Format::Json => pretty(&json!({
            "config": c.config("verify"),
            "quick": quick,
            "passed": failed.is_empty(),
            "failed": failed,
            "criteria": outcomes,
        })),
        _ => {
            let mut s = format!("# config: {}\n", c.config("verify"));
            for o in &outcomes {
                s.push_str(&o.line());
                s.push('\n');
            }
            if failed.is_empty() {
                s.push_str("PASS\n");
            } else {
                s.push_str(&format!("FAIL: criteria {failed:?}\n"));
            }
            s
        }
    };
    let shown = c.emit(text)?;
    if failed.is_empty() {
        Ok(shown)
    } else {
        Err(Failure::Verification(shown, format!("failed criteria: {failed:?}")))
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the exit code with the stdout and stderr texts.
fn run<I: IntoIterator<Item = String>>(args: I) -> (u8, String, String) {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return (if e.use_stderr() { 2 } else { 0 }, String::new(), e.render().to_string()),
    };
    let result = match &cli.command {
        Command::Analyze(c) => analyze(c),
        Command::Sweep(c) => sweep_cmd(c),
        Command::Portrait(c) => portrait_cmd(c),
        Command::Verify(c) => verify_cmd(c),
    };
    match result {
        Ok(out) => (0, out, String::new()),
        Err(Failure::Verification(out, msg)) => (1, out, format!("verification failed: {msg}\n")),
        Err(Failure::Usage(msg)) => (2, String::new(), format!("error: {msg}\n")),
        Err(Failure::Numerical(msg)) => (3, String::new(), format!("numerical failure: {msg}\n")),
    }
}

fn main() -> ExitCode {
    use std::io::Write;
    let (code, out, err) = run(std::env::args());
    // a closed pipe on stdout is not an error for a command-line filter
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(code)
}
