//! Acceptance criteria, one test per criterion. Each writes a PASS/FAIL line
//! to stderr before asserting; the write bypasses the test harness capture.

mod common;

use std::io::Write as _;
use std::time::{Duration, Instant};

use rug::{Float, Rational};

use common::{cli, num, p, run_analysis, CORPUS, OSCILLATORY};
use recseries::classify::{
    analytic_rule, compare_orbits, probe_limit, Conclusion, DerivativeKind, ExponentSearch,
    LimitVerdict, MajorantSpec, ModeChoice, Rule, Stabilization, Witness,
};
use recseries::estimate::verify_asymptotic;
use recseries::grid::GridSpec;
use recseries::orbit::{iterate, partial_sum};
use recseries::{FunctionDef, Mode, OrbitConfig, TaylorDef};

fn report(id: u32, title: &str, ok: bool, detail: String) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} {status}: {title}: {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn abs_diff(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec().max(b.prec()), a - b).abs().to_f64()
}

fn exact(x: &Float) -> Rational {
    x.to_rational().expect("finite term")
}

#[test]
fn c01_power_law_quotient_is_constant() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for a in ["0.25", "0.5", "0.75"] {
        for c in ["0.5", "1", "2"] {
            let f = FunctionDef::parse(&format!("x/(1+{c}*x^{a})^(1/{a})")).unwrap();
            let g = f.compile(p()).unwrap();
            let probe = probe_limit(&g, &num(a), &GridSpec::PROBE, &Stabilization::default()).unwrap();
            let l = match &probe.verdict {
                LimitVerdict::FiniteNonzero(l) => l.clone(),
                other => panic!("a = {a}, c = {c}: {other:?}"),
            };
            let c = num(c);
            let rel = Float::with_val(l.prec(), &l / &c) - 1u32;
            worst = worst.max(rel.abs().to_f64());
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "L_a = c for the power-law family",
        worst < 1e-20 && elapsed < Duration::from_secs(5),
        format!("max |L/c - 1| = {worst:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn c02_harmonic_orbit_asymptotics() {
    let start = Instant::now();
    let f = FunctionDef::parse("x/(1+x)").unwrap();
    let cfg = OrbitConfig::new(Mode::Positive, p()).with_max_n(100_000);
    let orbit = iterate(&f, &num("1"), &cfg).unwrap();
    // x_n = 1/(n+1) exactly
    let oracle_dev = (0..=orbit.last_index())
        .step_by(997)
        .map(|n| {
            let want = Float::with_val(p().bits(), 1) / (n as u32 + 1);
            abs_diff(&orbit.terms()[n], &want) / want.to_f64()
        })
        .fold(0.0, f64::max);
    let trace = verify_asymptotic(&orbit, &num("1"), &num("1"), 1e-3);
    let elapsed = start.elapsed();
    report(
        2,
        "n x_n -> 1 for x/(1+x)",
        trace.passed && orbit.last_index() == 100_000 && oracle_dev < 1e-50 && elapsed < Duration::from_secs(30),
        format!("worst deviation {:.3e}, oracle error {oracle_dev:.1e}, {elapsed:.2?}", trace.worst),
    );
}

#[test]
fn c03_sin_orbit_asymptotics() {
    let start = Instant::now();
    let an = run_analysis("sin(x)", "1", ModeChoice::Auto, 100_000);
    let elapsed = start.elapsed();
    let (a, k, l) = match &an.exponent {
        Some(ExponentSearch::Found { fit, probe }) => {
            let l = match &probe.verdict {
                LimitVerdict::FiniteNonzero(l) => l.to_f64(),
                _ => f64::NAN,
            };
            (fit.a.to_f64(), fit.k.to_f64(), l)
        }
        other => panic!("{other:?}"),
    };
    let sqrt3 = 3f64.sqrt();
    let ok = (1.99..=2.01).contains(&a)
        && ((k - sqrt3) / sqrt3).abs() < 0.02
        && (l - 1.0 / 3.0).abs() < 1e-12
        && an.verdict.conclusion() == Conclusion::Divergent
        && an.verdict.rule() == Some(Rule::LimitExponentRule)
        && elapsed < Duration::from_secs(60);
    report(
        3,
        "sin orbit exponent",
        ok,
        format!("a = {a}, k = {k}, L = {l}, verdict {:?}, {elapsed:.2?}", an.verdict.conclusion()),
    );
}

#[test]
fn c04_derivative_rule_for_half() {
    let start = Instant::now();
    let an = run_analysis("x/2", "1", ModeChoice::Auto, 1_000_000);
    let elapsed = start.elapsed();
    let c = match an.verdict.witness() {
        Some(Witness::Derivative { c }) => abs_diff(c, &num("0.5")),
        _ => f64::INFINITY,
    };
    let sum = an.sum.as_ref().map_or(f64::INFINITY, |s| abs_diff(&s.total(), &num("2")));
    let ok = an.verdict.conclusion() == Conclusion::Convergent
        && an.verdict.rule() == Some(Rule::DerivativeRule)
        && c < 1e-20
        && sum < 1e-12
        && elapsed < Duration::from_secs(1);
    report(4, "x/2 by the derivative rule", ok, format!("|c - 1/2| = {c:.1e}, |sum - 2| = {sum:.1e}, {elapsed:.2?}"));
}

#[test]
fn c05_oscillatory_function() {
    let start = Instant::now();
    let an = run_analysis(OSCILLATORY, "0.3", ModeChoice::Auto, 1_000_000);
    let elapsed = start.elapsed();
    let band = match &an.derivative.kind {
        DerivativeKind::Dne { low, high } => Some((low.to_f64(), high.to_f64())),
        _ => None,
    };
    let band_ok = band.map_or(false, |(lo, hi)| (lo - 1.0 / 6.0).abs() < 0.02 && (hi - 5.0 / 6.0).abs() < 0.02);
    let majorant = match an.verdict.witness() {
        Some(Witness::Majorant { id, .. }) => id.clone(),
        _ => String::new(),
    };
    let five_sixths = Rational::from((5, 6));
    let terms = an.orbit.terms();
    let bad_step = (1..terms.len()).find(|&n| exact(&terms[n]) > Rational::from(&five_sixths * exact(&terms[n - 1])));
    let ok = band_ok
        && an.verdict.conclusion() == Conclusion::Convergent
        && an.verdict.rule() == Some(Rule::MajorantRule)
        && majorant == "linear:5/6"
        && bad_step.is_none()
        && elapsed < Duration::from_secs(10);
    report(
        5,
        "oscillatory f dominated by 5/6 x",
        ok,
        format!(
            "band {band:?}, majorant {majorant}, {} steps checked, first bad step {bad_step:?}, {elapsed:.2?}",
            terms.len() - 1
        ),
    );
}

#[test]
fn c06_comparison_induction() {
    let g = FunctionDef::parse(OSCILLATORY).unwrap().compile(p()).unwrap();
    let m = MajorantSpec::linear("5/6", p()).unwrap().function().compile(p()).unwrap();
    let cmp = compare_orbits(&g, &m, &num("0.3"), 10_000).unwrap();
    let violations = cmp.rows.iter().filter(|(_, gx, mx)| mx < gx).count();
    let ok = cmp.rows.len() == 10_001 && violations == 0 && cmp.first_violation.is_none();
    report(
        6,
        "m^n(x0) >= g^n(x0) for n <= 10^4",
        ok,
        format!("{} rows, {violations} violations", cmp.rows.len()),
    );
}

#[test]
fn c07_alternating_rule() {
    let an = run_analysis("-x/2", "1", ModeChoice::Auto, 1_000_000);
    let s = abs_diff(partial_sum(&an.orbit), &(Float::with_val(p().bits(), 2) / 3u32));
    let ok = an.mode == Mode::Signed
        && an.verdict.conclusion() == Conclusion::Convergent
        && an.verdict.rule() == Some(Rule::AlternatingRule)
        && s < 1e-12;
    report(7, "-x/2 by the alternating rule", ok, format!("|S_n - 2/3| = {s:.1e} at n = {}", an.orbit.last_index()));
}

#[test]
fn c08_analytic_rule() {
    let t = TaylorDef::parse("1, -1", p()).unwrap();
    let verdict = analytic_rule(&t).unwrap();
    let f = FunctionDef::parse("x - x^2").unwrap();
    let orbit = iterate(&f, &num("0.5"), &OrbitConfig::new(Mode::Positive, p()).with_max_n(100_000)).unwrap();
    let n = orbit.last_index();
    let nx = Float::with_val(p().bits(), orbit.last() * n as u32).to_f64();
    let (code, out, _) = cli(&["analyze", "--taylor", "1,-1", "--x0", "0.5", "--max-n", "1000", "--json"]);
    let ok = verdict.conclusion() == Conclusion::Divergent
        && verdict.rule() == Some(Rule::AnalyticRule)
        && n == 100_000
        && (nx - 1.0).abs() < 0.05
        && code == 0
        && out.contains("\"rule\": \"AnalyticRule\"");
    report(8, "taylor (1, -1) diverges", ok, format!("n x_n = {nx} at n = {n}, cli exit {code}"));
}

#[test]
fn c09_derivative_rule_precedes_limit_probe() {
    let f = "0.9*(x/(1+x))";
    let an = run_analysis(f, "1", ModeChoice::Auto, 1_000_000);
    let c = match an.verdict.witness() {
        Some(Witness::Derivative { c }) => abs_diff(c, &num("0.9")),
        _ => f64::INFINITY,
    };
    let (code, out, _) = cli(&["limit", "--f", f, "--a", "search"]);
    let ok = an.verdict.conclusion() == Conclusion::Convergent
        && an.verdict.rule() == Some(Rule::DerivativeRule)
        && c < 1e-20
        && code == 2
        && out.contains("NotFound");
    report(9, "0.9 x/(1+x): derivative rule, limit search NotFound", ok, format!("|c - 0.9| = {c:.1e}, limit exit {code}: {}", out.trim()));
}

#[test]
fn c10_deterministic_json() {
    let run = |case: &common::Case| {
        cli(&["analyze", "--f", case.f, "--x0", case.x0, "--mode", case.mode, "--max-n", "100000", "--json"])
    };
    let mut differing = Vec::new();
    for case in &CORPUS {
        let first = run(case);
        let second = run(case);
        if first != second || first.1.is_empty() {
            differing.push(case.f);
        }
    }
    report(
        10,
        "byte-identical JSON on the corpus",
        differing.is_empty(),
        format!("{} functions, differing: {differing:?}", CORPUS.len()),
    );
}
