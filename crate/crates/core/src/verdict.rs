//! Four-valued analysis results with a trail of the rules that produced them.

use std::fmt;

/// What a verdict is about; decides how certified answers are named.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    UniqueErgodicity,
    FiniteExtension,
    ExactRank,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    CertifiedYes,
    CertifiedNo,
    /// A measured value at a finite depth, with no proof attached.
    Numerical {
        value: f64,
        depth: usize,
    },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailEntry {
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub claim: Claim,
    pub evidence: Evidence,
    pub trail: Vec<TrailEntry>,
}

impl Verdict {
    pub fn new(claim: Claim, evidence: Evidence) -> Self {
        Verdict {
            claim,
            evidence,
            trail: Vec::new(),
        }
    }

    pub fn note(mut self, rule: impl Into<String>, detail: impl Into<String>) -> Self {
        self.push(rule, detail);
        self
    }

    pub fn push(&mut self, rule: impl Into<String>, detail: impl Into<String>) {
        self.trail.push(TrailEntry {
            rule: rule.into(),
            detail: detail.into(),
        });
    }

    pub fn is_certified(&self) -> bool {
        matches!(
            self.evidence,
            Evidence::CertifiedYes | Evidence::CertifiedNo
        )
    }

    /// Report label, e.g. `CertifiedUnique`, `CertifiedFinite`,
    /// `NumericalEvidence`.
    pub fn label(&self) -> &'static str {
        match (&self.evidence, self.claim) {
            (Evidence::CertifiedYes, Claim::UniqueErgodicity) => "CertifiedUnique",
            (Evidence::CertifiedNo, Claim::UniqueErgodicity) => "CertifiedNotUnique",
            (Evidence::CertifiedYes, Claim::FiniteExtension) => "CertifiedFinite",
            (Evidence::CertifiedNo, Claim::FiniteExtension) => "CertifiedInfinite",
            (Evidence::CertifiedYes, Claim::ExactRank) => "CertifiedExact",
            (Evidence::CertifiedNo, Claim::ExactRank) => "CertifiedNotExact",
            (Evidence::Numerical { .. }, _) => "NumericalEvidence",
            (Evidence::Inconclusive, _) => "Inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.evidence {
            Evidence::Numerical { value, depth } => {
                write!(f, "{} (value {value:.6e} at depth {depth})", self.label())
            }
            _ => write!(f, "{}", self.label()),
        }
    }
}
