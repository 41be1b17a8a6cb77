//! The analysis report: one structure rendered both as JSON and as text.

use std::fmt::Write as _;

use rug::Float;
use serde::Serialize;

use crate::classify::{Analysis, DerivativeKind, Witness};
use crate::estimate::TailModel;
use crate::precision::to_decimal;

/// Significant digits for rule witnesses and derivative values.
pub const WITNESS_DIGITS: u32 = 20;
/// Significant digits for exponents and constants from searches and fits.
pub const FIT_DIGITS: u32 = 12;

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub majorant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_index: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_pattern: Option<String>,
}

impl Witnesses {
    pub fn from_witness(w: Option<&Witness>) -> Self {
        let mut out = Self::default();
        match w {
            None => {}
            Some(Witness::Derivative { c }) | Some(Witness::AbsoluteBound { c }) => {
                out.c = Some(to_decimal(c, WITNESS_DIGITS));
            }
            Some(Witness::LimitExponent { a, k }) => {
                out.a = Some(to_decimal(a, FIT_DIGITS));
                out.k = Some(to_decimal(k, FIT_DIGITS));
            }
            Some(Witness::Analytic { index, coefficient }) => {
                out.coefficient_index = Some(index.to_string());
                out.coefficient = Some(to_decimal(coefficient, WITNESS_DIGITS));
            }
            Some(Witness::Majorant { id, delta, margin }) => {
                out.majorant = Some(id.clone());
                out.delta = Some(delta.as_ref().map_or("inf".to_string(), |d| to_decimal(d, WITNESS_DIGITS)));
                out.margin = Some(to_decimal(margin, WITNESS_DIGITS));
            }
            Some(Witness::Alternating { sign_pattern }) => {
                out.sign_pattern = Some(sign_pattern.clone());
            }
        }
        out
    }

    /// `name = value` pairs in field order.
    pub fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("c", &self.c),
            ("a", &self.a),
            ("k", &self.k),
            ("majorant", &self.majorant),
            ("delta", &self.delta),
            ("margin", &self.margin),
            ("coefficient_index", &self.coefficient_index),
            ("coefficient", &self.coefficient),
            ("sign_pattern", &self.sign_pattern),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DerivativeReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FitReport {
    pub a: String,
    pub k: String,
    pub residual: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OrbitReport {
    pub n: usize,
    pub x_n: String,
    pub partial_sum: String,
    pub status: String,
}

/// Report fields in output order. `hypotheses`, `fit_note` and `sum` are
/// text-only.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub function: String,
    pub x0: String,
    pub mode: &'static str,
    pub verdict: &'static str,
    pub rule: &'static str,
    pub witnesses: Witnesses,
    pub derivative: DerivativeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
    pub orbit: OrbitReport,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub hypotheses: String,
    #[serde(skip)]
    pub fit_note: Option<String>,
    #[serde(skip)]
    pub sum: Option<String>,
}

fn dec(v: &Float, digits: u32) -> String {
    to_decimal(v, digits)
}

impl Report {
    pub fn from_analysis(an: &Analysis) -> Self {
        let digits = an.orbit.precision().digits();
        let derivative = match &an.derivative.kind {
            DerivativeKind::Value(c) | DerivativeKind::OutOfRange(c) => DerivativeReport {
                kind: an.derivative.kind.name(),
                c: Some(dec(c, WITNESS_DIGITS)),
                band: None,
            },
            DerivativeKind::Dne { low, high } => DerivativeReport {
                kind: "dne",
                c: None,
                band: Some([dec(low, WITNESS_DIGITS), dec(high, WITNESS_DIGITS)]),
            },
        };
        let (fit, fit_note) = match &an.fit {
            Ok(f) if f.is_power_law() => (
                Some(FitReport {
                    a: dec(&f.fit.a, FIT_DIGITS),
                    k: dec(&f.fit.k, FIT_DIGITS),
                    residual: format!("{:.6e}", f.fit.residual),
                }),
                None,
            ),
            Ok(f) => (None, f.rejection.clone()),
            Err(e) => (None, Some(e.clone())),
        };
        let sum = an.sum.as_ref().map(|s| {
            let model = match s.model {
                TailModel::PowerLaw => "power-law tail",
                TailModel::Geometric => "geometric tail",
                TailModel::None => "no tail model",
            };
            match &s.tail {
                Some(t) => format!(
                    "{} (partial sum + {model} {}; model estimate, not a bound)",
                    dec(&s.total(), digits),
                    dec(t, 6)
                ),
                None => format!("{} ({model})", dec(&s.partial, digits)),
            }
        });
        Report {
            function: an.function.render(),
            x0: dec(&an.x0, digits),
            mode: an.mode.as_str(),
            verdict: an.verdict.conclusion().as_str(),
            rule: an.verdict.rule().map_or("None", |r| r.as_str()),
            witnesses: Witnesses::from_witness(an.verdict.witness()),
            derivative,
            fit,
            orbit: OrbitReport {
                n: an.orbit.last_index(),
                x_n: dec(an.orbit.last(), digits),
                partial_sum: dec(crate::orbit::partial_sum(&an.orbit), digits),
                status: an.orbit.status().to_string(),
            },
            notes: an.verdict.notes().to_vec(),
            warnings: an.warnings.clone(),
            hypotheses: an.hypotheses.describe(12),
            fit_note,
            sum,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            let _ = writeln!(out, "{k:<12}{v}");
        };
        line("function", &self.function);
        line("x0", &self.x0);
        line("mode", self.mode);
        line("hypotheses", &self.hypotheses);
        line("verdict", self.verdict);
        line("rule", self.rule);
        let witnesses = self
            .witnesses
            .pairs()
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join(", ");
        line("witnesses", if witnesses.is_empty() { "none" } else { &witnesses });
        let derivative = match (&self.derivative.c, &self.derivative.band) {
            (Some(c), _) => format!("{} c = {c}", self.derivative.kind),
            (_, Some([lo, hi])) => format!("{} band = [{lo}, {hi}]", self.derivative.kind),
            _ => self.derivative.kind.to_string(),
        };
        line("derivative", &derivative);
        let fit = match (&self.fit, &self.fit_note) {
            (Some(f), _) => format!("a = {}, k = {}, residual = {}", f.a, f.k, f.residual),
            (None, Some(note)) => format!("none ({note})"),
            (None, None) => "none".to_string(),
        };
        line("fit", &fit);
        line(
            "orbit",
            &format!(
                "n = {}, x_n = {}, S_n = {}, status {}",
                self.orbit.n, self.orbit.x_n, self.orbit.partial_sum, self.orbit.status
            ),
        );
        if let Some(sum) = &self.sum {
            line("sum", sum);
        }
        for (title, items) in [("notes", &self.notes), ("warnings", &self.warnings)] {
            if !items.is_empty() {
                let _ = writeln!(out, "{title}:");
                for item in items {
                    let _ = writeln!(out, "  - {item}");
                }
            }
        }
        out
    }
}
