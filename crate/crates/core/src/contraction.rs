//! Hilbert projective metric, Birkhoff contraction coefficients and the
//! unique ergodicity analysis built on them.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::decomposition::{canonical_form, DEFAULT_PROBE_DEPTH};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::GeneratorKind;
use crate::matrix::{
    big_to_rat, ln_rat, rat_string, rat_to_f64, real_string, IntMatrix, LogMatrix,
};
use crate::poly::Poly;
use crate::verdict::{Claim, Evidence, Verdict};

pub const DEFAULT_TAU_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_MAX_DEPTH: usize = 200;
/// Slack applied to log-domain cross ratios so that the reported `φ` is a
/// lower bound despite rounding.
pub const LOG_SLACK: f64 = 1e-12;

/// `D(x, y) = ln max_{i,j} (x_i y_j) / (x_j y_i)` for positive vectors.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
            context: "hilbert_distance".into(),
        });
    }
    if x.iter().chain(y).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::NonPositiveEntry);
    }
    // max_i ln(x_i/y_i) - min_i ln(x_i/y_i)
    let logs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a.ln() - b.ln()).collect();
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// Hilbert distance between nonnegative rational vectors. Vectors with
/// different zero patterns are at infinite distance; an all-zero vector is
/// rejected.
pub fn hilbert_distance_exact(x: &[BigRational], y: &[BigRational]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
            context: "hilbert_distance_exact".into(),
        });
    }
    if x.iter().all(|v| v.is_zero()) || y.iter().all(|v| v.is_zero()) {
        return Err(Error::NonPositiveEntry);
    }
    let mut ratios = Vec::with_capacity(x.len());
    for (a, b) in x.iter().zip(y) {
        match (a.is_zero(), b.is_zero()) {
            (true, true) => {}
            (false, false) => ratios.push(a / b),
            _ => return Ok(f64::INFINITY),
        }
    }
    let hi = ratios.iter().max().expect("nonempty");
    let lo = ratios.iter().min().expect("nonempty");
    Ok(ln_rat(&(hi / lo)))
}

/// `φ(A)`: exact for integer matrices, a certified lower bound for the log
/// mirror.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi {
    Exact(BigRational),
    Approx(f64),
}

impl Phi {
    pub fn to_f64(&self) -> f64 {
        match self {
            Phi::Exact(r) => rat_to_f64(r),
            Phi::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Phi::Exact(r) => r.is_zero(),
            Phi::Approx(x) => *x == 0.0,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Phi::Exact(r) => rat_string(r),
            Phi::Approx(x) => real_string(*x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionStats {
    pub phi: Phi,
    /// `τ = (1 - √φ) / (1 + √φ)`.
    pub tau: f64,
    /// Projective diameter `Θ = -ln φ`; infinite when an entry is zero.
    pub theta: f64,
}

impl ContractionStats {
    fn from_exact(phi: BigRational) -> Self {
        if phi.is_zero() {
            return ContractionStats {
                phi: Phi::Exact(phi),
                tau: 1.0,
                theta: f64::INFINITY,
            };
        }
        // (1 - φ) / (1 + √φ)^2 keeps precision when φ is close to 1.
        let gap = rat_to_f64(&(BigRational::one() - &phi));
        let root = rat_to_f64(&phi).sqrt();
        let theta = -ln_rat(&phi);
        ContractionStats {
            tau: gap / ((1.0 + root) * (1.0 + root)),
            theta: theta.max(0.0),
            phi: Phi::Exact(phi),
        }
    }

    fn from_log_phi(ln_phi: f64) -> Self {
        if ln_phi == f64::NEG_INFINITY {
            return ContractionStats {
                phi: Phi::Approx(0.0),
                tau: 1.0,
                theta: f64::INFINITY,
            };
        }
        let ln_low = (ln_phi - LOG_SLACK * (1.0 + ln_phi.abs())).min(0.0);
        let phi = ln_low.exp();
        let root = (ln_low / 2.0).exp();
        ContractionStats {
            phi: Phi::Approx(phi),
            tau: -ln_low.exp_m1() / ((1.0 + root) * (1.0 + root)),
            theta: -ln_low,
        }
    }
}

fn check_rows(m: &IntMatrix) -> Result<()> {
    match m.zero_row() {
        Some(row) => Err(Error::ZeroRow { level: 0, row }),
        None => Ok(()),
    }
}

/// Exact `φ(A) = min (a_ik a_jl) / (a_jk a_il)`, zero when an entry is zero.
pub fn phi_exact(m: &IntMatrix) -> BigRational {
    if !m.is_positive() {
        return BigRational::zero();
    }
    let mut best: Option<BigRational> = None;
    for i in 0..m.rows() {
        for j in i + 1..m.rows() {
            // Row ratio a_ik / a_jk; the min over (k, l) is min/max.
            let ratios: Vec<BigRational> = (0..m.cols())
                .map(|k| big_to_rat(m.get(i, k)) / big_to_rat(m.get(j, k)))
                .collect();
            let lo = ratios.iter().min().expect("nonempty");
            let hi = ratios.iter().max().expect("nonempty");
            let r = lo / hi;
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_else(BigRational::one)
}

pub fn contraction_stats(m: &IntMatrix) -> Result<ContractionStats> {
    check_rows(m)?;
    Ok(ContractionStats::from_exact(phi_exact(m)))
}

/// Stats of a log-domain matrix, with `φ` rounded down.
pub fn contraction_stats_log(m: &LogMatrix) -> ContractionStats {
    if !m.is_positive() {
        return ContractionStats::from_log_phi(f64::NEG_INFINITY);
    }
    let mut ln_phi: f64 = 0.0;
    for i in 0..m.rows() {
        for j in i + 1..m.rows() {
            let diffs: Vec<f64> = (0..m.cols()).map(|k| m.get(i, k) - m.get(j, k)).collect();
            let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
            ln_phi = ln_phi.min(lo - hi);
        }
    }
    ContractionStats::from_log_phi(ln_phi)
}

/// Stats of the product `F_n ... F_m`. `τ`, `φ` and `Θ` are invariant under
/// transposition, so this also describes `F_m^T ... F_n^T`. Falls back to the
/// log mirror when the exact product exceeds the bit cap, unless `strict`.
pub fn product_contraction_with(
    diagram: &Diagram,
    m: usize,
    n: usize,
    strict: bool,
) -> Result<ContractionStats> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("invalid level range {m}..={n}")));
    }
    match diagram.range_product(m, n, false) {
        Ok(p) => contraction_stats(&p),
        Err(Error::MemoryBudgetExceeded { .. }) if !strict => {
            let mut acc = LogMatrix::identity(diagram.rank());
            for k in m..=n {
                acc = diagram.incidence(k)?.to_log().mul(&acc);
            }
            Ok(contraction_stats_log(&acc))
        }
        Err(e) => Err(e),
    }
}

pub fn product_contraction(diagram: &Diagram, m: usize, n: usize) -> Result<ContractionStats> {
    product_contraction_with(diagram, m, n, false)
}

/// Accumulated product `F_n ... F_m`, exact while it fits the bit cap.
#[derive(Debug, Clone)]
enum Accum {
    Exact(IntMatrix),
    Log(LogMatrix),
}

impl Accum {
    fn push(self, f: &IntMatrix, cap: u64) -> Accum {
        match self {
            Accum::Exact(p) => {
                let q = f.mul(&p);
                if q.max_bits() > cap {
                    Accum::Log(f.to_log().mul(&p.to_log()))
                } else {
                    Accum::Exact(q)
                }
            }
            Accum::Log(l) => Accum::Log(f.to_log().mul(&l)),
        }
    }

    fn stats(&self) -> ContractionStats {
        match self {
            Accum::Exact(p) => ContractionStats::from_exact(phi_exact(p)),
            Accum::Log(l) => contraction_stats_log(l),
        }
    }
}

/// Number of starting levels `m` examined by depth scans. The first levels
/// can be degenerate (`F_1` all ones makes every `P_1^n` rank one), so the
/// unique ergodicity criterion has to be probed for several `m`.
pub const BASE_LEVELS: usize = 8;

/// Starting levels examined at depth `n`.
pub fn base_levels(n: usize) -> std::ops::RangeInclusive<usize> {
    1..=BASE_LEVELS.min((n / 2).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauCheckpoint {
    pub depth: usize,
    /// Starting level with the largest `τ(P_m^depth)`.
    pub base: usize,
    pub stats: ContractionStats,
}

/// `max_m τ(P_m^n)` over [`base_levels`] at the depths `1, 2, 4, ...` up to
/// `max_depth` (always included). Products are formed sequentially, the
/// statistics of each checkpoint in parallel.
pub fn tau_profile(diagram: &Diagram, max_depth: usize) -> Result<Vec<TauCheckpoint>> {
    let max_depth = match diagram.max_level() {
        Some(m) => max_depth.min(m),
        None => max_depth,
    };
    if max_depth == 0 {
        return Err(Error::invalid("depth must be positive"));
    }
    let mut checkpoints: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|&k| k < max_depth)
        .collect();
    checkpoints.push(max_depth);
    let cap = diagram.bit_cap();
    let mut acc: Vec<Accum> = Vec::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (k, f) in (1..=max_depth).zip(diagram.incidences(1, max_depth)?) {
        if k <= BASE_LEVELS {
            acc.push(Accum::Exact(IntMatrix::identity(diagram.rank())));
        }
        acc = acc.into_par_iter().map(|a| a.push(&f, cap)).collect();
        if checkpoints[next] == k {
            let stats: Vec<ContractionStats> = base_levels(k)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&m| acc[m - 1].stats())
                .collect();
            let (i, worst) = stats
                .into_iter()
                .enumerate()
                .fold(
                    None::<(usize, ContractionStats)>,
                    |best, (i, s)| match best {
                        Some((_, ref b)) if b.tau >= s.tau => best,
                        _ => Some((i, s)),
                    },
                )
                .expect("at least one base level");
            out.push(TauCheckpoint {
                depth: k,
                base: i + 1,
                stats: worst,
            });
            next += 1;
        }
    }
    Ok(out)
}

fn degree(p: &Poly) -> i64 {
    p.degree().map_or(i64::MIN, |d| d as i64)
}

/// Smallest degree among the cross ratios of a positive polynomial grid.
fn min_cross_degree(grid: &[Vec<Poly>]) -> i64 {
    let d = grid.len();
    let mut best = i64::MAX;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let deg = degree(&grid[i][k]) + degree(&grid[j][l])
                        - degree(&grid[j][k])
                        - degree(&grid[i][l]);
                    best = best.min(deg);
                }
            }
        }
    }
    best
}

pub fn ergodicity_verdict(
    diagram: &Diagram,
    max_depth: usize,
    tau_threshold: f64,
) -> Result<Verdict> {
    let form = canonical_form(diagram, DEFAULT_PROBE_DEPTH)?;
    if !form.is_simple() {
        return Err(Error::NotSimple(format!(
            "{} blocks, {} minimal",
            form.blocks.len(),
            form.minimal_components().len()
        )));
    }
    let yes = |rule: &str, detail: String| {
        Verdict::new(Claim::UniqueErgodicity, Evidence::CertifiedYes).note(rule, detail)
    };
    let g = diagram.generator();
    if let Some(alphabet) = g.finite_alphabet() {
        return Ok(yes(
            "finite-alphabet",
            format!(
                "{} distinct incidence matrices ({})",
                alphabet.len(),
                g.kind_name()
            ),
        ));
    }
    if let GeneratorKind::Parametric(grid) = &g.kind {
        let positive = grid.iter().flatten().all(|p| !p.is_zero());
        if positive {
            let max_deg = grid.iter().flatten().map(degree).max().unwrap_or(0);
            if max_deg <= 1 {
                let norm = grid.iter().flatten().fold(Poly::zero(), |a, p| a.add(p));
                return Ok(yes("linear-norm-growth", format!("||F_n||_1 = {norm}")));
            }
            let cross = min_cross_degree(grid);
            if cross >= -2 {
                return Ok(yes(
                    "sqrt-phi-divergence",
                    format!("phi(F_n) has asymptotic degree {cross} >= -2"),
                ));
            }
            let degs: Vec<i64> = grid.iter().flatten().map(degree).collect();
            if degs.iter().all(|&x| x == degs[0]) {
                return Ok(yes(
                    "bounded-entry-ratio",
                    format!("all entries have degree {}", degs[0]),
                ));
            }
        }
    }
    let profile = tau_profile(diagram, max_depth)?;
    let TauCheckpoint {
        depth,
        base,
        stats: last,
    } = profile.last().cloned().expect("nonempty profile");
    let mut verdict = if last.phi.is_zero() {
        Verdict::new(Claim::UniqueErgodicity, Evidence::Inconclusive).note(
            "tau-scan",
            format!("product over levels {base}..={depth} still has zero entries"),
        )
    } else {
        let status = if last.tau <= tau_threshold {
            "below threshold"
        } else {
            "above threshold"
        };
        Verdict::new(
            Claim::UniqueErgodicity,
            Evidence::Numerical {
                value: last.tau,
                depth,
            },
        )
        .note(
            "tau-scan",
            format!(
                "max tau(P_m^{depth}) = {} (m = {base}), {status} {}",
                real_string(last.tau),
                real_string(tau_threshold)
            ),
        )
    };
    for c in &profile {
        verdict.push(
            "tau-checkpoint",
            format!(
                "depth {}: tau = {} (m = {})",
                c.depth,
                real_string(c.stats.tau),
                c.base
            ),
        );
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::IncidenceGenerator;
    use num_bigint::BigInt;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hilbert_distance(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        let d = hilbert_distance(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-15);
        assert!(matches!(
            hilbert_distance(&[0.0, 1.0], &[1.0, 1.0]),
            Err(Error::NonPositiveEntry)
        ));
        let e = hilbert_distance_exact(&[rat(1, 1), rat(2, 1)], &[rat(2, 1), rat(1, 1)]).unwrap();
        assert!((e - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn stats_examples() {
        let s = contraction_stats(&IntMatrix::from_u64(&[&[2, 1], &[1, 3]])).unwrap();
        assert_eq!(s.phi, Phi::Exact(rat(1, 6)));
        let r = (1.0f64 / 6.0).sqrt();
        assert!((s.tau - (1.0 - r) / (1.0 + r)).abs() < 1e-15);
        assert!((s.theta - 6f64.ln()).abs() < 1e-15);
        let ones = contraction_stats(&IntMatrix::ones(3, 3)).unwrap();
        assert_eq!((ones.tau, ones.theta), (0.0, 0.0));
        let z = contraction_stats(&IntMatrix::from_u64(&[&[1, 0], &[1, 1]])).unwrap();
        assert_eq!((z.tau, z.theta), (1.0, f64::INFINITY));
        assert!(contraction_stats(&IntMatrix::from_u64(&[&[0, 0], &[1, 1]])).is_err());
    }

    #[test]
    fn log_mirror_bounds_exact() {
        let a = IntMatrix::from_u64(&[&[5, 1, 2], &[1, 4, 1], &[3, 1, 7]]);
        let exact = contraction_stats(&a.pow(6)).unwrap();
        let mut l = LogMatrix::identity(3);
        for _ in 0..6 {
            l = a.to_log().mul(&l);
        }
        let approx = contraction_stats_log(&l);
        assert!(approx.phi.to_f64() <= exact.phi.to_f64());
        assert!((approx.tau - exact.tau).abs() < 1e-9);
        assert!(approx.theta >= exact.theta);
    }

    #[test]
    fn product_falls_back_to_logs() {
        let d = Diagram::stationary(IntMatrix::from_u64(&[&[2, 1], &[1, 3]]))
            .unwrap()
            .with_bit_cap(64);
        assert!(product_contraction_with(&d, 1, 60, true).is_err());
        let s = product_contraction(&d, 1, 60).unwrap();
        assert!(matches!(s.phi, Phi::Approx(_)));
        assert!(s.tau < 1e-9);
    }

    #[test]
    fn verdict_rules() {
        let stat = Diagram::stationary(IntMatrix::from_u64(&[&[2, 1], &[1, 2]])).unwrap();
        let v = ergodicity_verdict(&stat, 50, DEFAULT_TAU_THRESHOLD).unwrap();
        assert_eq!(v.label(), "CertifiedUnique");
        assert_eq!(v.trail[0].rule, "finite-alphabet");

        let lin = Diagram::new(
            2,
            IncidenceGenerator::parametric_str(&[&["1", "1"], &["n", "1"]]).unwrap(),
        )
        .unwrap();
        let v = ergodicity_verdict(&lin, 50, DEFAULT_TAU_THRESHOLD).unwrap();
        assert_eq!(v.trail[0].rule, "linear-norm-growth");
        assert!(v.trail[0].detail.contains("n+3"));

        let sq = Diagram::new(
            2,
            IncidenceGenerator::parametric_str(&[&["n^2", "1"], &["1", "n^2"]]).unwrap(),
        )
        .unwrap();
        let v = ergodicity_verdict(&sq, 100, DEFAULT_TAU_THRESHOLD).unwrap();
        match v.evidence {
            Evidence::Numerical { value, depth } => {
                assert_eq!(depth, 100);
                assert!(value > 0.5, "{value} {:?}", v.trail);
            }
            other => panic!("unexpected {other:?}"),
        }

        let split = Diagram::stationary(IntMatrix::from_u64(&[&[2, 0], &[1, 3]])).unwrap();
        assert!(matches!(
            ergodicity_verdict(&split, 10, 1e-9),
            Err(Error::NotSimple(_))
        ));
    }
}
