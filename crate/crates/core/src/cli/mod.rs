//! Command-line front end. `run` parses arguments, executes one command and
//! returns the exit code with everything destined for stdout and stderr.

pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde_json::json;

use crate::classify::{
    ClassifyConfig,
    analyze, check_monotone, compare_orbits, majorant_rule, probe_limit, region_grid, resolve_mode,
    search_exponent, AnalyzeConfig, Conclusion, ExponentSearch, LimitProbe, LimitVerdict,
    MajorantSpec, ModeChoice, Monotonicity,
};
use crate::grid::GridSpec;
use crate::expr::{constant_value, FunctionDef, ParseError, TaylorDef};
use crate::orbit::{iterate_compiled, partial_sum, OrbitConfig};
use crate::precision::{to_decimal, Precision};
pub use report::Report;

pub const EXIT_DECISIVE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "recseries", version, about = "Convergence of series generated by iterating a function")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full rule pipeline and report the verdict.
    Analyze(AnalyzeArgs),
    /// Iterate the orbit and write it as CSV.
    Iterate(IterateArgs),
    /// Probe the quotient L_a(x) at a fixed exponent, or search for one.
    Limit(LimitArgs),
    /// Compare f against a majorant.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Positive,
    Signed,
}

impl From<ModeArg> for ModeChoice {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => ModeChoice::Auto,
            ModeArg::Positive => ModeChoice::Positive,
            ModeArg::Signed => ModeChoice::Signed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Defining function of x, e.g. "x/(1+x)".
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Seed x0; any constant expression.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Working precision in significant digits.
    #[arg(long, default_value_t = Precision::DEFAULT_DIGITS)]
    pub precision: u32,
    #[arg(long, default_value_t = OrbitConfig::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Orbit stops once a term drops below this magnitude.
    #[arg(long, default_value = "1e-40")]
    pub floor: String,
    /// Largest point of the probe grid.
    #[arg(long)]
    pub grid_start: Option<f64>,
    /// Probe grid points per decade.
    #[arg(long)]
    pub grid_per_decade: Option<u32>,
    /// Smallest point of the probe grid.
    #[arg(long)]
    pub grid_floor: Option<f64>,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Taylor coefficients a1,a2,... of f at 0; enables the analytic rule.
    #[arg(long, allow_hyphen_values = true)]
    pub taylor: Option<String>,
    /// Also write the orbit as CSV.
    #[arg(long)]
    pub orbit_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV destination; stdout when absent (the summary then goes to stderr).
    #[arg(long)]
    pub orbit_csv: Option<PathBuf>,
    /// Keep every n-th row (the last row is always kept).
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Exponent a, or "search".
    #[arg(long, default_value = "search")]
    pub a: String,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// linear:<c>, powerlaw:a=<a>,c=<c> or fn:<expr>.
    #[arg(long)]
    pub majorant: String,
    /// Orbit length of the term-by-term comparison.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
}

/// Exit code plus captured output of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_ERROR,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_DECISIVE };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code, stdout: String::new(), stderr: text }
            } else {
                Output::ok(code, text)
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Iterate(a) => cmd_iterate(&a),
        Command::Limit(a) => cmd_limit(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    result.unwrap_or_else(Output::error)
}

/// Validated settings shared by every command.
struct Settings {
    precision: Precision,
    x0: Float,
    floor: Float,
    classify: ClassifyConfig,
}

fn settings(c: &Common) -> Result<Settings, String> {
    let precision = Precision::new(c.precision).map_err(|e| e.to_string())?;
    if c.max_n == 0 {
        return Err("--max-n must be at least 1".into());
    }
    let x0 = constant_value(&c.x0, precision).map_err(|e| format!("--x0: {e}"))?;
    if x0.is_zero() {
        return Err("--x0 must be nonzero".into());
    }
    let floor = precision
        .parse_decimal(&c.floor)
        .filter(|v| *v > 0)
        .ok_or_else(|| format!("--floor must be a positive decimal, got `{}`", c.floor))?;
    let mut classify = ClassifyConfig::default();
    let grid = &mut classify.probe_grid;
    if let Some(start) = c.grid_start {
        grid.start = start;
    }
    if let Some(per_decade) = c.grid_per_decade {
        if per_decade == 0 {
            return Err("--grid-per-decade must be at least 1".into());
        }
        grid.ratio = GridSpec::decades(1.0, per_decade, 1.0).ratio;
    }
    if let Some(floor) = c.grid_floor {
        grid.floor = floor;
    }
    grid.validate().map_err(|e| format!("probe grid: {e}"))?;
    Ok(Settings { precision, x0, floor, classify })
}

/// Parse error with the offending position marked under the input.
fn parse_diagnostic(flag: &str, text: &str, err: &ParseError) -> String {
    let caret = " ".repeat(err.offset().min(text.len()));
    format!("{flag}: {err}\n  {text}\n  {caret}^")
}

fn function(c: &Common) -> Result<FunctionDef, String> {
    let text = c.f.as_deref().ok_or("--f is required")?;
    FunctionDef::parse(text).map_err(|e| parse_diagnostic("--f", text, &e))
}

fn analyze_config(c: &Common, s: &Settings) -> AnalyzeConfig {
    let mut cfg = AnalyzeConfig::new(s.precision);
    cfg.mode = c.mode.into();
    cfg.max_n = c.max_n;
    cfg.floor = s.floor.clone();
    cfg.classify = s.classify;
    cfg
}

fn write_csv_file(path: &PathBuf, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out)
        .and_then(|()| out.flush())
        .map_err(|e| format!("{}: {e}", path.display()))
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Output, String> {
    let c = &args.common;
    let s = settings(c)?;
    let mut cfg = analyze_config(c, &s);
    if let Some(list) = &args.taylor {
        cfg.taylor = Some(TaylorDef::parse(list, s.precision).map_err(|e| format!("--taylor: {e}"))?);
    }
    let f = match (&c.f, &cfg.taylor) {
        (None, Some(t)) => t.to_function(),
        _ => function(c)?,
    };
    let an = analyze(&f, &s.x0, &cfg).map_err(|e| e.to_string())?;
    if let Some(path) = &args.orbit_csv {
        write_csv_file(path, |out| an.orbit.write_csv(out, 1))?;
    }
    let report = Report::from_analysis(&an);
    let code = if an.verdict.is_decisive() { EXIT_DECISIVE } else { EXIT_INCONCLUSIVE };
    let text = if c.json { report.to_json() } else { report.to_text() };
    Ok(Output::ok(code, text))
}

pub fn cmd_iterate(args: &IterateArgs) -> Result<Output, String> {
    let c = &args.common;
    let s = settings(c)?;
    let f = function(c)?;
    let cfg = analyze_config(c, &s);
    let g = f.compile(s.precision).map_err(|e| e.to_string())?;
    let mode = resolve_mode(&g, &s.x0, &cfg);
    let orbit_cfg = OrbitConfig {
        mode,
        max_n: c.max_n,
        floor: s.floor.clone(),
        precision: s.precision,
    };
    let orbit = iterate_compiled(&g, &s.x0, &orbit_cfg).map_err(|e| e.to_string())?;
    let digits = s.precision.digits();
    let summary = if c.json {
        let v = json!({
            "function": f.render(),
            "x0": to_decimal(&s.x0, digits),
            "mode": mode.as_str(),
            "n": orbit.last_index(),
            "x_n": to_decimal(orbit.last(), digits),
            "partial_sum": to_decimal(partial_sum(&orbit), digits),
            "status": orbit.status().to_string(),
        });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
    } else {
        format!(
            "N = {}\nx_N = {}\nS_N = {}\nstatus = {}\n",
            orbit.last_index(),
            to_decimal(orbit.last(), digits),
            to_decimal(partial_sum(&orbit), digits),
            orbit.status()
        )
    };
    match &args.orbit_csv {
        Some(path) => {
            write_csv_file(path, |out| orbit.write_csv(out, args.thin))?;
            Ok(Output::ok(EXIT_DECISIVE, summary))
        }
        None => {
            let mut csv = Vec::new();
            orbit.write_csv(&mut csv, args.thin).map_err(|e| e.to_string())?;
            Ok(Output {
                code: EXIT_DECISIVE,
                stdout: String::from_utf8(csv).expect("utf-8 csv"),
                stderr: summary,
            })
        }
    }
}

fn probe_json(probe: &LimitProbe, digits: u32) -> serde_json::Value {
    let limit = match &probe.verdict {
        LimitVerdict::FiniteNonzero(l) => Some(to_decimal(l, report::WITNESS_DIGITS)),
        _ => None,
    };
    let samples: Vec<[String; 2]> = probe
        .samples
        .iter()
        .map(|(x, l)| [to_decimal(x, digits), to_decimal(l, digits)])
        .collect();
    json!({
        "a": to_decimal(&probe.a, report::FIT_DIGITS),
        "verdict": probe.verdict.name(),
        "L": limit,
        "k": probe.implied_k().map(|k| to_decimal(&k, report::FIT_DIGITS)),
        "samples": samples,
    })
}

fn probe_text(probe: &LimitProbe, digits: u32, out: &mut String) {
    let _ = writeln!(out, "a = {}", to_decimal(&probe.a, report::FIT_DIGITS));
    let _ = writeln!(out, "verdict = {}", probe.verdict.name());
    if let LimitVerdict::FiniteNonzero(l) = &probe.verdict {
        let _ = writeln!(out, "L = {}", to_decimal(l, report::WITNESS_DIGITS));
    }
    if let Some(k) = probe.implied_k() {
        let _ = writeln!(out, "k = {}", to_decimal(&k, report::FIT_DIGITS));
    }
    let _ = writeln!(out, "x,L_a");
    for (x, l) in &probe.samples {
        let _ = writeln!(out, "{},{}", to_decimal(x, digits), to_decimal(l, digits));
    }
}

pub fn cmd_limit(args: &LimitArgs) -> Result<Output, String> {
    let c = &args.common;
    let s = settings(c)?;
    let f = function(c)?;
    let g = f.compile(s.precision).map_err(|e| e.to_string())?;
    let cc = s.classify;
    let digits = s.precision.digits();
    let function = f.render();

    if args.a.trim() == "search" {
        let search = search_exponent(&g, &cc.probe_grid, &cc.stabilization, &cc.search)
            .map_err(|e| e.to_string())?;
        return Ok(match search {
            ExponentSearch::Found { fit, probe } => {
                let text = if c.json {
                    let v = json!({
                        "function": function,
                        "search": "found",
                        "a": to_decimal(&fit.a, report::FIT_DIGITS),
                        "k": to_decimal(&fit.k, report::FIT_DIGITS),
                        "probe": probe_json(&probe, digits),
                    });
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
                } else {
                    let mut out = format!(
                        "search: found a = {}, k = {}\n",
                        to_decimal(&fit.a, report::FIT_DIGITS),
                        to_decimal(&fit.k, report::FIT_DIGITS)
                    );
                    probe_text(&probe, digits, &mut out);
                    out
                };
                Output::ok(EXIT_DECISIVE, text)
            }
            ExponentSearch::NotFound { reason } => {
                let text = if c.json {
                    let v = json!({"function": function, "search": "not_found", "reason": reason});
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
                } else {
                    format!("search: NotFound ({reason})\n")
                };
                Output::ok(EXIT_INCONCLUSIVE, text)
            }
        });
    }

    let a = constant_value(&args.a, s.precision).map_err(|e| format!("--a: {e}"))?;
    let probe = probe_limit(&g, &a, &cc.probe_grid, &cc.stabilization).map_err(|e| e.to_string())?;
    let text = if c.json {
        let mut v = probe_json(&probe, digits);
        v["function"] = json!(function);
        format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
    } else {
        let mut out = String::new();
        probe_text(&probe, digits, &mut out);
        out
    };
    Ok(Output::ok(EXIT_DECISIVE, text))
}

/// Comparison-table rows: 0..=10, then 1-2-5 steps, plus the last row.
fn table_rows(len: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..len.min(11)).collect();
    let mut decade = 10;
    while decade < len {
        for m in [2, 5, 10] {
            if decade * m < len {
                rows.push(decade * m);
            }
        }
        decade *= 10;
    }
    if len > 0 && rows.last() != Some(&(len - 1)) {
        rows.push(len - 1);
    }
    rows
}

pub fn cmd_compare(args: &CompareArgs) -> Result<Output, String> {
    let c = &args.common;
    let s = settings(c)?;
    let f = function(c)?;
    let m = MajorantSpec::parse(&args.majorant, s.precision).map_err(|e| format!("--majorant: {e}"))?;
    let g = f.compile(s.precision).map_err(|e| e.to_string())?;
    let mf = m.function().compile(s.precision).map_err(|e| e.to_string())?;
    if s.x0 < 0 {
        return Err("compare needs x0 > 0".into());
    }
    let cc = s.classify;
    let x_max = s.x0.to_f64();
    let verdict = majorant_rule(&g, &m, x_max, &cc).map_err(|e| e.to_string())?;
    let delta = match m.monotone {
        Monotonicity::Everywhere => "inf (monotone by construction)".to_string(),
        _ => {
            let check = check_monotone(&mf, &region_grid(x_max, &cc)).map_err(|e| e.to_string())?;
            let d = to_decimal(&check.delta, report::WITNESS_DIGITS);
            if check.monotone {
                format!("{d} (monotone on the whole grid)")
            } else {
                d
            }
        }
    };
    let cmp = compare_orbits(&g, &mf, &s.x0, args.steps).map_err(|e| e.to_string())?;
    let witnesses = report::Witnesses::from_witness(verdict.witness());
    let digits = report::WITNESS_DIGITS;
    let rows: Vec<usize> = table_rows(cmp.rows.len());
    let code = if verdict.conclusion() == Conclusion::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_DECISIVE
    };
    let text = if c.json {
        let table: Vec<_> = rows
            .iter()
            .map(|&i| {
                let (n, gx, mx) = &cmp.rows[i];
                json!([n, to_decimal(gx, digits), to_decimal(mx, digits)])
            })
            .collect();
        let v = json!({
            "function": f.render(),
            "majorant": m.id(),
            "x0": to_decimal(&s.x0, s.precision.digits()),
            "verdict": verdict.conclusion().as_str(),
            "rule": verdict.rule().map_or("None", |r| r.as_str()),
            "witnesses": witnesses,
            "delta": delta,
            "orbit_comparison": {
                "steps": cmp.rows.len() - 1,
                "first_violation": cmp.first_violation,
                "rows": table,
            },
            "notes": verdict.notes(),
        });
        format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "function    {}", f.render());
        let _ = writeln!(out, "majorant    {}", m.id());
        let _ = writeln!(out, "verdict     {}", verdict.conclusion().as_str());
        let _ = writeln!(out, "rule        {}", verdict.rule().map_or("None", |r| r.as_str()));
        if let Some(margin) = &witnesses.margin {
            let _ = writeln!(out, "margin      {margin}");
        }
        let _ = writeln!(out, "delta       {delta}");
        for note in verdict.notes() {
            let _ = writeln!(out, "note        {note}");
        }
        let violation = cmp.first_violation.map_or("none".to_string(), |n| n.to_string());
        let _ = writeln!(out, "orbit comparison over {} steps, first violation: {violation}", cmp.rows.len() - 1);
        let _ = writeln!(out, "n,g^n(x0),m^n(x0)");
        for i in rows {
            let (n, gx, mx) = &cmp.rows[i];
            let _ = writeln!(out, "{n},{},{}", to_decimal(gx, digits), to_decimal(mx, digits));
        }
        out
    };
    Ok(Output::ok(code, text))
}
