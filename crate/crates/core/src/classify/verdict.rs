use rug::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conclusion {
    Convergent,
    Divergent,
    Inconclusive,
}

impl Conclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Conclusion::Convergent => "convergent",
            Conclusion::Divergent => "divergent",
            Conclusion::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DerivativeRule,
    LimitExponentRule,
    AnalyticRule,
    MajorantRule,
    AlternatingRule,
    AbsoluteBoundRule,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::DerivativeRule => "DerivativeRule",
            Rule::LimitExponentRule => "LimitExponentRule",
            Rule::AnalyticRule => "AnalyticRule",
            Rule::MajorantRule => "MajorantRule",
            Rule::AlternatingRule => "AlternatingRule",
            Rule::AbsoluteBoundRule => "AbsoluteBoundRule",
        }
    }
}

/// Rule-specific evidence; the rule is implied by the variant.
#[derive(Debug, Clone)]
pub enum Witness {
    Derivative { c: Float },
    LimitExponent { a: Float, k: Float },
    Analytic { index: usize, coefficient: Float },
    /// `delta = None` means monotone on all of `(0, inf)`.
    Majorant { id: String, delta: Option<Float>, margin: Float },
    Alternating { sign_pattern: String },
    AbsoluteBound { c: Float },
}

impl Witness {
    pub fn rule(&self) -> Rule {
        match self {
            Witness::Derivative { .. } => Rule::DerivativeRule,
            Witness::LimitExponent { .. } => Rule::LimitExponentRule,
            Witness::Analytic { .. } => Rule::AnalyticRule,
            Witness::Majorant { .. } => Rule::MajorantRule,
            Witness::Alternating { .. } => Rule::AlternatingRule,
            Witness::AbsoluteBound { .. } => Rule::AbsoluteBoundRule,
        }
    }
}

#[derive(Debug, Clone)]
enum Outcome {
    Convergent(Witness),
    Divergent(Witness),
    Inconclusive,
}

/// A conclusion together with the rule and witness that produced it.
///
/// Inconclusive verdicts carry no witness, so `rule()` is `None` exactly
/// when the conclusion is [`Conclusion::Inconclusive`].
#[derive(Debug, Clone)]
pub struct Verdict {
    outcome: Outcome,
    notes: Vec<String>,
}

impl Verdict {
    pub fn convergent(witness: Witness, note: impl Into<String>) -> Self {
        Self {
            outcome: Outcome::Convergent(witness),
            notes: vec![note.into()],
        }
    }

    /// Only the limit-exponent and analytic rules may prove divergence.
    pub fn divergent(witness: Witness, note: impl Into<String>) -> Self {
        assert!(
            matches!(witness, Witness::LimitExponent { .. } | Witness::Analytic { .. }),
            "{:?} cannot establish divergence",
            witness.rule()
        );
        Self {
            outcome: Outcome::Divergent(witness),
            notes: vec![note.into()],
        }
    }

    pub fn inconclusive(note: impl Into<String>) -> Self {
        Self {
            outcome: Outcome::Inconclusive,
            notes: vec![note.into()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Prepends earlier audit-trail entries.
    pub fn after(mut self, earlier: &[String]) -> Self {
        let mut notes = earlier.to_vec();
        notes.append(&mut self.notes);
        self.notes = notes;
        self
    }

    pub fn conclusion(&self) -> Conclusion {
        match self.outcome {
            Outcome::Convergent(_) => Conclusion::Convergent,
            Outcome::Divergent(_) => Conclusion::Divergent,
            Outcome::Inconclusive => Conclusion::Inconclusive,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Convergent(w) | Outcome::Divergent(w) => Some(w),
            Outcome::Inconclusive => None,
        }
    }

    pub fn rule(&self) -> Option<Rule> {
        self.witness().map(Witness::rule)
    }

    pub fn is_decisive(&self) -> bool {
        self.witness().is_some()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inconclusive_has_no_rule() {
        let v = Verdict::inconclusive("nothing fired");
        assert_eq!(v.conclusion(), Conclusion::Inconclusive);
        assert_eq!(v.rule(), None);
        let v = Verdict::convergent(Witness::Derivative { c: Float::with_val(53, 0.5) }, "c < 1");
        assert_eq!(v.rule(), Some(Rule::DerivativeRule));
        assert!(v.is_decisive());
    }

    #[test]
    #[should_panic(expected = "cannot establish divergence")]
    fn majorants_never_diverge() {
        Verdict::divergent(
            Witness::Majorant {
                id: "linear:0.5".into(),
                delta: None,
                margin: Float::new(53),
            },
            "",
        );
    }

    #[test]
    fn notes_accumulate_in_order() {
        let v = Verdict::inconclusive("second").with_note("third").after(&["first".into()]);
        assert_eq!(v.notes(), ["first", "second", "third"]);
    }
}
