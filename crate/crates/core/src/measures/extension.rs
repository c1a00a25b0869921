//! Finiteness of a measure extended from a subdiagram.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use super::symbolic::TermBound;
use super::symbolic::{single_vertex_bounds, Outcome};
use super::{compactness_certificate, induced_subdiagram, MeasureEstimate, SubdiagramSpec};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, VertexSchedule};
use crate::matrix::{big_to_rat, rat_to_f64, IntMatrix};
use crate::verdict::{Claim, Evidence, Verdict};

/// Largest power tried when comparing spectral radii of stationary blocks.
const MAX_POWER: usize = 256;

/// Which series decides finiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Boundary flow weighted by the subdiagram tower masses (necessary).
    KacNecessary,
    /// Unweighted boundary flow `sum eps_n` (sufficient).
    KacSufficient,
    /// `sum (1 - q_{v_{n+1}, v_n})` along a single path.
    OdometerIff,
    /// `sum alpha_i ||D_{i-1}...D_1|| / ||C_i...C_1||`, with the beta series
    /// as the necessary side.
    AlphaBetaSeries,
    /// `sum ||D_{i-1}...D_1|| / ||C_i...C_1||` for bounded connecting blocks.
    NormRatioSeries,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::KacNecessary => "KacNecessary",
            Criterion::KacSufficient => "KacSufficient",
            Criterion::OdometerIff => "OdometerIff",
            Criterion::AlphaBetaSeries => "AlphaBetaSeries",
            Criterion::NormRatioSeries => "NormRatioSeries",
        }
    }

    pub fn parse(name: &str) -> Option<Criterion> {
        [
            Criterion::KacNecessary,
            Criterion::KacSufficient,
            Criterion::OdometerIff,
            Criterion::AlphaBetaSeries,
            Criterion::NormRatioSeries,
        ]
        .into_iter()
        .find(|c| c.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub criterion: Criterion,
    /// Partial sums of the criterion series over levels `1..N-1`.
    pub partial_sums: Vec<f64>,
    /// Partial sums of the beta series, for `AlphaBetaSeries`.
    pub lower_sums: Option<Vec<f64>>,
    /// `I_n` for `n = 1..=N`; nondecreasing, tending to the extended mass.
    pub i_n: Vec<BigRational>,
    pub term_bound: Option<TermBound>,
    pub verdict: Verdict,
}

impl ExtensionReport {
    pub fn depth(&self) -> usize {
        self.i_n.len()
    }

    pub fn mass_estimate(&self) -> f64 {
        rat_to_f64(self.i_n.last().expect("depth >= 2"))
    }
}

fn cumulative(terms: impl IntoIterator<Item = f64>) -> Vec<f64> {
    terms
        .into_iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    rat_to_f64(&(big_to_rat(a) / big_to_rat(b)))
}

struct Blocks {
    w: Vec<usize>,
    wc: Vec<usize>,
}

impl Blocks {
    fn c(&self, f: &IntMatrix) -> IntMatrix {
        f.submatrix(&self.w, &self.w)
    }
    fn d(&self, f: &IntMatrix) -> IntMatrix {
        f.submatrix(&self.wc, &self.wc)
    }
    fn a(&self, f: &IntMatrix) -> IntMatrix {
        f.submatrix(&self.w, &self.wc)
    }
    /// No edges from `W` into the complement.
    fn triangular(&self, f: &IntMatrix) -> bool {
        self.wc
            .iter()
            .all(|&v| self.w.iter().all(|&u| f.get(v, u).is_zero()))
    }
}

fn max_row(m: &IntMatrix) -> BigUint {
    m.row_sums().into_iter().max().unwrap_or_default()
}

fn min_row(m: &IntMatrix) -> BigUint {
    m.row_sums().into_iter().min().unwrap_or_default()
}

/// Compare `rho(D)` and `rho(C)` through row sums of powers:
/// `min_row(M^a)^(1/a) <= rho(M) <= max_row(M^a)^(1/a)`.
fn spectral_comparison(
    c: &IntMatrix,
    d: &IntMatrix,
    a_nonzero: bool,
    cap: u64,
) -> Option<(Evidence, String)> {
    if !c.is_primitive() {
        return None;
    }
    let (mut cp, mut dp) = (c.clone(), d.clone());
    for a in 1..=MAX_POWER {
        if cp.check_bits(cap).is_err() || dp.check_bits(cap).is_err() {
            return None;
        }
        if max_row(&dp) < min_row(&cp) {
            return Some((
                Evidence::CertifiedYes,
                format!("rho(D) < rho(C) via row sums of power {a}"),
            ));
        }
        if a_nonzero && d.is_primitive() && min_row(&dp) >= max_row(&cp) {
            return Some((
                Evidence::CertifiedNo,
                format!("rho(D) >= rho(C) via row sums of power {a}"),
            ));
        }
        cp = cp.mul(c);
        dp = dp.mul(d);
    }
    None
}

fn outcome_verdict(outcome: Outcome) -> (Verdict, Option<TermBound>) {
    match outcome {
        Outcome::Finite {
            rule,
            detail,
            bound,
        } => (
            Verdict::new(Claim::FiniteExtension, Evidence::CertifiedYes).note(rule, detail),
            bound,
        ),
        Outcome::Infinite {
            rule,
            detail,
            bound,
        } => (
            Verdict::new(Claim::FiniteExtension, Evidence::CertifiedNo).note(rule, detail),
            Some(bound),
        ),
    }
}

fn numerical_verdict(criterion: Criterion, partial: &[f64], i_n: &[BigRational]) -> Verdict {
    let depth = i_n.len();
    let last = partial.last().copied().unwrap_or(0.0);
    Verdict::new(
        Claim::FiniteExtension,
        Evidence::Numerical { value: last, depth },
    )
    .note(
        "partial-sum",
        format!(
            "{} series reaches {last:.6e} after {} terms",
            criterion.name(),
            partial.len()
        ),
    )
    .note(
        "mass",
        format!("I_{depth} = {:.12}", rat_to_f64(&i_n[depth - 1])),
    )
}

/// Extend `sub_measure` (a probability measure on the induced subdiagram)
/// to the whole diagram and decide whether the extension is finite.
pub fn extension_report(
    diagram: &Diagram,
    spec: &SubdiagramSpec,
    sub_measure: &MeasureEstimate,
    depth: usize,
) -> Result<ExtensionReport> {
    extension_report_with(diagram, spec, sub_measure, depth, None)
}

/// As [`extension_report`], optionally forcing the criterion.
pub fn extension_report_with(
    diagram: &Diagram,
    spec: &SubdiagramSpec,
    sub_measure: &MeasureEstimate,
    depth: usize,
    requested: Option<Criterion>,
) -> Result<ExtensionReport> {
    let d = diagram.rank();
    spec.validate(d)?;
    if depth < 2 {
        return Err(Error::invalid("depth must be at least 2"));
    }
    if sub_measure.depth() < depth {
        return Err(Error::invalid(format!(
            "subdiagram measure has depth {}, need {depth}",
            sub_measure.depth()
        )));
    }
    if sub_measure.rank() != spec.width() {
        return Err(Error::invalid(
            "subdiagram measure does not match the vertex sets",
        ));
    }
    let heights = diagram.heights_upto(depth)?;
    let fs = diagram.incidences(1, depth - 1)?;

    let i_n: Vec<BigRational> = (1..=depth)
        .map(|n| {
            let p = sub_measure.p(n)?;
            Ok(spec
                .at(n)
                .iter()
                .zip(&p)
                .map(|(&w, pw)| big_to_rat(&heights[n - 1][w]) * pw)
                .sum())
        })
        .collect::<Result<_>>()?;

    let constant = spec.schedule.is_constant().map(<[usize]>::to_vec);
    let blocks = constant.as_ref().map(|w| Blocks {
        w: w.clone(),
        wc: spec.complement(1, d),
    });
    let two_block = blocks
        .as_ref()
        .filter(|b| fs.iter().all(|f| b.triangular(f)));
    let stationary = matches!(diagram.generator().kind, GeneratorKind::Stationary(_));

    let criterion = match requested {
        Some(c @ (Criterion::AlphaBetaSeries | Criterion::NormRatioSeries)) => {
            if two_block.is_none() {
                return Err(Error::NotTwoBlock(
                    "the complement receives edges from W, or W is not constant".into(),
                ));
            }
            c
        }
        Some(Criterion::OdometerIff) if spec.width() != 1 => {
            return Err(Error::invalid(
                "OdometerIff needs a single vertex per level",
            ));
        }
        Some(c) => c,
        None => match two_block {
            Some(b) => {
                let bounded = stationary && !b.a(&fs[0]).min_entry().is_zero();
                if bounded {
                    Criterion::NormRatioSeries
                } else {
                    Criterion::AlphaBetaSeries
                }
            }
            None if spec.width() == 1 => Criterion::OdometerIff,
            None => {
                let sub = induced_subdiagram(diagram, spec)?;
                if compactness_certificate(&sub)?.is_some() {
                    Criterion::KacSufficient
                } else {
                    Criterion::KacNecessary
                }
            }
        },
    };

    let mut lower_sums = None;
    let partial_sums = match criterion {
        Criterion::KacSufficient | Criterion::OdometerIff | Criterion::KacNecessary => {
            let weighted = criterion == Criterion::KacNecessary;
            let terms = (1..depth)
                .map(|n| {
                    let f = &fs[n - 1];
                    let h = &heights[n - 1];
                    let next = &heights[n];
                    let wn = spec.at(n);
                    let masses = if weighted {
                        Some(sub_measure.tower_masses(n + 1)?)
                    } else {
                        None
                    };
                    let mut total = BigRational::zero();
                    for (k, &v) in spec.at(n + 1).iter().enumerate() {
                        let flow: BigUint = (0..d)
                            .filter(|w| !wn.contains(w))
                            .map(|w| f.get(v, w) * &h[w])
                            .sum();
                        let mut q = big_to_rat(&flow) / big_to_rat(&next[v]);
                        if let Some(m) = &masses {
                            q *= &m[k];
                        }
                        total += q;
                    }
                    Ok(rat_to_f64(&total))
                })
                .collect::<Result<Vec<f64>>>()?;
            cumulative(terms)
        }
        Criterion::AlphaBetaSeries | Criterion::NormRatioSeries => {
            let b = two_block.expect("checked above");
            let cap = diagram.bit_cap();
            let mut dprod = IntMatrix::identity(b.wc.len());
            let mut cprod = IntMatrix::identity(b.w.len());
            let mut upper = Vec::with_capacity(depth - 1);
            let mut lower = Vec::with_capacity(depth - 1);
            for f in &fs {
                cprod = b.c(f).mul(&cprod);
                cprod.check_bits(cap)?;
                let r = ratio(&dprod.norm1(), &cprod.norm1());
                let a = b.a(f);
                if criterion == Criterion::NormRatioSeries {
                    upper.push(r);
                } else {
                    upper.push(r * rat_to_f64(&big_to_rat(&a.max_entry())));
                    lower.push(r * rat_to_f64(&big_to_rat(&a.min_entry())));
                }
                dprod = b.d(f).mul(&dprod);
                dprod.check_bits(cap)?;
            }
            if criterion == Criterion::AlphaBetaSeries {
                lower_sums = Some(cumulative(lower));
            }
            cumulative(upper)
        }
    };

    // Symbolic certification.
    let mut certified: Option<(Verdict, Option<TermBound>)> = None;
    if let (Some(b), GeneratorKind::Stationary(f)) = (two_block, &diagram.generator().kind) {
        let a = b.a(f);
        if let Some((evidence, detail)) = spectral_comparison(
            &b.c(f),
            &b.d(f),
            !a.max_entry().is_zero(),
            diagram.bit_cap(),
        ) {
            certified = Some((
                Verdict::new(Claim::FiniteExtension, evidence)
                    .note("spectral-radius-comparison", detail),
                None,
            ));
        }
    }
    if certified.is_none() {
        if let Some([v]) = constant.as_deref() {
            if criterion != Criterion::KacNecessary {
                certified = single_vertex_bounds(diagram, *v).map(outcome_verdict);
            }
        }
    }
    let (verdict, term_bound) = match certified {
        Some((mut verdict, bound)) => {
            verdict.push("criterion", criterion.name());
            (verdict, bound)
        }
        None => (numerical_verdict(criterion, &partial_sums, &i_n), None),
    };
    Ok(ExtensionReport {
        criterion,
        partial_sums,
        lower_sums,
        i_n,
        term_bound,
        verdict,
    })
}

/// Extension of the rank-one measure carried by a single path `v_n`. The
/// path subdiagram is an odometer, so `sum (1 - q_{v_{n+1}, v_n})` decides.
pub fn odometer_extension_report(
    diagram: &Diagram,
    path: &VertexSchedule,
    depth: usize,
) -> Result<ExtensionReport> {
    let d = diagram.rank();
    let spec = SubdiagramSpec {
        schedule: path.clone(),
    };
    spec.validate(d)?;
    if spec.width() != 1 {
        return Err(Error::SpecNotProper(
            "a path has one vertex per level".into(),
        ));
    }
    if depth < 2 {
        return Err(Error::invalid("depth must be at least 2"));
    }
    let heights = diagram.heights_upto(depth)?;
    let mut terms = Vec::with_capacity(depth - 1);
    let mut i_n = vec![BigRational::one()];
    for n in 1..depth {
        let f = diagram.incidence(n)?;
        let (from, to) = (path.at(n)[0], path.at(n + 1)[0]);
        let mult = f.get(to, from);
        if mult.is_zero() {
            return Err(Error::BrokenPath { level: n, from, to });
        }
        let q = big_to_rat(&(mult * &heights[n - 1][from])) / big_to_rat(&heights[n][to]);
        terms.push(rat_to_f64(&(BigRational::one() - &q)));
        let next = &i_n[n - 1] / &q;
        i_n.push(next);
    }
    let partial_sums = cumulative(terms);
    let certified = path
        .is_constant()
        .and_then(|w| single_vertex_bounds(diagram, w[0]))
        .map(outcome_verdict);
    let (verdict, term_bound) = match certified {
        Some((verdict, bound)) => (
            verdict.note("criterion", Criterion::OdometerIff.name()),
            bound,
        ),
        None => (
            numerical_verdict(Criterion::OdometerIff, &partial_sums, &i_n),
            None,
        ),
    };
    Ok(ExtensionReport {
        criterion: Criterion::OdometerIff,
        partial_sums,
        lower_sums: None,
        i_n,
        term_bound,
        verdict,
    })
}
