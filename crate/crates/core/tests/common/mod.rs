#![allow(dead_code)]

use rug::Float;

use recseries::classify::{analyze, Analysis, AnalyzeConfig, ModeChoice};
use recseries::expr::constant_value;
use recseries::{FunctionDef, Precision};

/// Corpus entry: defining function, seed, mode flag.
pub struct Case {
    pub f: &'static str,
    pub x0: &'static str,
    pub mode: &'static str,
}

pub const CORPUS: [Case; 10] = [
    Case { f: "x/2", x0: "1", mode: "auto" },
    Case { f: "sin(x)", x0: "1", mode: "auto" },
    Case { f: "x*(1/2 + 1/3*sin(1/x))", x0: "0.3", mode: "auto" },
    Case { f: "x/(1+x)", x0: "1", mode: "auto" },
    Case { f: "-x/2", x0: "1", mode: "auto" },
    Case { f: "0.9*(x/(1+x))", x0: "1", mode: "auto" },
    Case { f: "x - x^2", x0: "0.5", mode: "auto" },
    Case { f: "x/(1+x^(1/2))^2", x0: "1", mode: "auto" },
    Case { f: "x*sin(1/x)*(1/2)", x0: "0.3", mode: "signed" },
    Case { f: "x/(1+x)^2", x0: "1", mode: "auto" },
];

pub const OSCILLATORY: &str = "x*(1/2 + 1/3*sin(1/x))";

pub fn p() -> Precision {
    Precision::default()
}

pub fn num(text: &str) -> Float {
    constant_value(text, p()).unwrap()
}

pub fn run_analysis(f: &str, x0: &str, mode: ModeChoice, max_n: usize) -> Analysis {
    let mut cfg = AnalyzeConfig::new(p());
    cfg.mode = mode;
    cfg.max_n = max_n;
    analyze(&FunctionDef::parse(f).unwrap(), &num(x0), &cfg).unwrap()
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let out = recseries::cli::run(std::iter::once("recseries").chain(args.iter().copied()));
    (out.code, out.stdout, out.stderr)
}
