//! Linearly recurrent diagrams: Perron data of the letters, densities along
//! the symbol sequence, upper and lower spectral radii along it, product
//! norm bounds, and the resulting extension decision.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, SymbolStream, Tail};
use crate::matrix::{big_to_rat, ln_big, rat_to_f64, IntMatrix};
use crate::verdict::{Claim, Evidence, Verdict};

pub const DEFAULT_PERRON_TOL: f64 = 1e-14;
/// Relative margin a certified comparison must clear.
pub const DECISION_MARGIN: f64 = 1e-9;
/// Largest density drift between the last two doubling windows for a
/// stream to count as regular.
pub const REGULARITY_DRIFT: f64 = 1e-3;
pub const DEFAULT_HORIZON: usize = 1 << 16;
/// Levels over which `||w_1 ... w_n||^(1/n)` is reported.
const NORM_ROOT_LEVELS: usize = 64;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub rho: f64,
    /// Collatz-Wielandt bracket `min (Ax)_i / x_i <= rho <= max (Ax)_i / x_i`.
    pub rho_bounds: (f64, f64),
    /// Positive eigenvector summing to 1.
    pub vector: Vec<f64>,
    /// Exact eigenpair when the spectral radius is an integer.
    pub exact: Option<(BigInt, Vec<BigRational>)>,
}

fn exact_kernel_vector(m: &IntMatrix, rho: &BigInt) -> Option<Vec<BigRational>> {
    let d = m.rows();
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let x = big_to_rat(m.get(i, j));
                    if i == j {
                        x - BigRational::from_integer(rho.clone())
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    // Reduced row echelon form.
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        let Some(p) = (row..d).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..d {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..d {
                    let delta = &f * &a[row][c];
                    a[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() != d - 1 {
        return None;
    }
    let free = (0..d).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); d];
    x[free] = BigRational::one();
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = -a[r][free].clone();
    }
    if x.iter().any(|v| !v.is_positive()) {
        return None;
    }
    let total: BigRational = x.iter().sum();
    Some(x.into_iter().map(|v| v / &total).collect())
}

/// Spectral radius and Perron eigenvector of a primitive matrix.
pub fn perron_data(m: &IntMatrix, tol: f64) -> Result<PerronData> {
    let d = m.rows();
    if !m.is_primitive() {
        return Err(Error::NotPrimitive { max_power: d * d });
    }
    let a: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    };
    let mut x = vec![1.0 / d as f64; d];
    let mut rho = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let ax = apply(&x);
        rho = ax.iter().sum::<f64>();
        // Shifting by the identity keeps the iteration away from
        // oscillation between eigenvalues of equal modulus.
        let shifted: Vec<f64> = ax.iter().zip(&x).map(|(p, q)| p + q).collect();
        let s: f64 = shifted.iter().sum();
        let next: Vec<f64> = shifted.iter().map(|v| v / s).collect();
        let residual = apply(&next)
            .iter()
            .zip(&next)
            .map(|(p, q)| (p - rho * q).abs())
            .fold(0.0, f64::max);
        x = next;
        if residual <= tol * rho.max(1.0) {
            break;
        }
    }
    // Rigorous bracket from the exact quotients (A x)_i / x_i.
    let xr: Vec<BigRational> = x
        .iter()
        .map(|&v| BigRational::from_float(v).expect("finite"))
        .collect();
    let quotients: Vec<BigRational> = (0..d)
        .map(|i| {
            let s: BigRational = m
                .row(i)
                .iter()
                .zip(&xr)
                .map(|(p, q)| big_to_rat(p) * q)
                .sum();
            s / &xr[i]
        })
        .collect();
    let lo = quotients.iter().min().expect("d >= 1").clone();
    let hi = quotients.iter().max().expect("d >= 1").clone();
    let candidate = BigInt::from(rho.round() as i64);
    // A positive kernel vector of A - r I forces r to be the Perron root.
    let exact = if (rho - rho.round()).abs() <= 1e-6 * rho.max(1.0) {
        exact_kernel_vector(m, &candidate).map(|v| (candidate, v))
    } else {
        None
    };
    let (rho, vector) = match &exact {
        Some((r, v)) => (
            r.to_f64().expect("small"),
            v.iter().map(rat_to_f64).collect(),
        ),
        None => (rho, x),
    };
    Ok(PerronData {
        rho,
        rho_bounds: (rat_to_f64(&lo), rat_to_f64(&hi)),
        vector,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Densities {
    /// `d(A)` per alphabet letter.
    pub letters: Vec<f64>,
    /// `d(AB)` for each pair that occurs.
    pub pairs: BTreeMap<(usize, usize), f64>,
    /// Exact values for eventually periodic sequences.
    pub exact_letters: Option<Vec<BigRational>>,
    pub exact_pairs: Option<BTreeMap<(usize, usize), BigRational>>,
    /// Prefix length used for empirical densities.
    pub horizon: Option<usize>,
    pub regular: bool,
}

fn exact_densities(
    cycle: &[usize],
    k: usize,
) -> (Vec<BigRational>, BTreeMap<(usize, usize), BigRational>) {
    let p = cycle.len();
    let den = BigInt::from(p);
    let mut letters = vec![BigRational::zero(); k];
    let mut pairs: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    for i in 0..p {
        letters[cycle[i]] += BigRational::new(BigInt::one(), den.clone());
        *pairs
            .entry((cycle[i], cycle[(i + 1) % p]))
            .or_insert_with(BigRational::zero) += BigRational::new(BigInt::one(), den.clone());
    }
    (letters, pairs)
}

fn empirical(word: &[usize], n: usize, k: usize) -> (Vec<f64>, BTreeMap<(usize, usize), f64>) {
    let mut letters = vec![0.0; k];
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..n {
        letters[word[i]] += 1.0;
        *pairs.entry((word[i], word[i + 1])).or_insert(0.0) += 1.0;
    }
    letters.iter_mut().for_each(|x| *x /= n as f64);
    pairs.values_mut().for_each(|x| *x /= n as f64);
    (letters, pairs)
}

/// Letter and pair densities: exact for eventually periodic sequences,
/// otherwise empirical over `horizon` letters with a drift test against the
/// half-length window.
pub fn densities(omega: &SymbolStream, k: usize, horizon: usize) -> Result<Densities> {
    omega.validate(k)?;
    if let SymbolStream::Periodic { cycle, .. } = omega {
        if cycle.is_empty() {
            return Err(Error::invalid("densities need an infinite sequence"));
        }
        let (el, ep) = exact_densities(cycle, k);
        return Ok(Densities {
            letters: el.iter().map(rat_to_f64).collect(),
            pairs: ep.iter().map(|(key, v)| (*key, rat_to_f64(v))).collect(),
            exact_letters: Some(el),
            exact_pairs: Some(ep),
            horizon: None,
            regular: true,
        });
    }
    let horizon = horizon.max(2);
    let word = omega.prefix(horizon + 1);
    let (letters, pairs) = empirical(&word, horizon, k);
    let (half_letters, half_pairs) = empirical(&word, horizon / 2, k);
    let mut drift = letters
        .iter()
        .zip(&half_letters)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    for key in pairs.keys().chain(half_pairs.keys()) {
        let a = pairs.get(key).copied().unwrap_or(0.0);
        let b = half_pairs.get(key).copied().unwrap_or(0.0);
        drift = drift.max((a - b).abs());
    }
    Ok(Densities {
        letters,
        pairs,
        exact_letters: None,
        exact_pairs: None,
        horizon: Some(horizon),
        regular: drift <= REGULARITY_DRIFT,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinRecProfile {
    pub alphabet: Vec<IntMatrix>,
    pub omega: SymbolStream,
    pub perron: Vec<PerronData>,
    pub densities: Densities,
    /// `ln` of the upper and lower spectral radii along the sequence.
    pub log_rho_upper: f64,
    pub log_rho_lower: f64,
    /// `||w_1 ... w_n||_1^(1/n)` for `n = 1, 2, ...`.
    pub norm_roots: Vec<f64>,
}

impl LinRecProfile {
    pub fn rho_upper(&self) -> f64 {
        self.log_rho_upper.exp()
    }

    pub fn rho_lower(&self) -> f64 {
        self.log_rho_lower.exp()
    }
}

fn ratio_extremes(xb: &[f64], xa: &[f64]) -> (f64, f64) {
    xb.iter()
        .zip(xa)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (b, a)| {
            let r = b / a;
            (lo.min(r), hi.max(r))
        })
}

fn log_radii(perron: &[PerronData], dens: &Densities) -> (f64, f64) {
    let base: f64 = dens
        .letters
        .iter()
        .zip(perron)
        .filter(|(d, _)| **d > 0.0)
        .map(|(d, p)| d * p.rho.ln())
        .sum();
    let (mut up, mut lo) = (base, base);
    for (&(a, b), &d) in &dens.pairs {
        let (rmin, rmax) = ratio_extremes(&perron[b].vector, &perron[a].vector);
        up += d * rmax.ln();
        lo += d * rmin.ln();
    }
    (up, lo)
}

/// `rho_upper = prod rho(A)^d(A) prod rbar(A,B)^d(AB)` and its lower analogue.
pub fn spectral_radii_along(
    alphabet: &[IntMatrix],
    omega: &SymbolStream,
    horizon: usize,
) -> Result<LinRecProfile> {
    if alphabet.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let perron: Vec<PerronData> = alphabet
        .par_iter()
        .map(|m| perron_data(m, DEFAULT_PERRON_TOL))
        .collect::<Result<_>>()?;
    let dens = densities(omega, alphabet.len(), horizon)?;
    let (log_rho_upper, log_rho_lower) = log_radii(&perron, &dens);
    let mut norm_roots = Vec::with_capacity(NORM_ROOT_LEVELS);
    let word = omega.prefix(NORM_ROOT_LEVELS);
    let mut acc = IntMatrix::identity(alphabet[0].rows());
    for (n, &s) in word.iter().enumerate() {
        acc = acc.mul(&alphabet[s]);
        norm_roots.push((ln_big(&acc.norm1()) / (n + 1) as f64).exp());
    }
    Ok(LinRecProfile {
        alphabet: alphabet.to_vec(),
        omega: omega.clone(),
        perron,
        densities: dens,
        log_rho_upper,
        log_rho_lower,
        norm_roots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    /// `||A_1 ... A_n||_1 / prod rho(A_i)`.
    pub actual: f64,
    /// Computed in exact rationals (all eigenpairs rational).
    pub exact: bool,
}

impl NormBounds {
    pub fn holds(&self) -> bool {
        self.lower <= self.actual && self.actual <= self.upper
    }
}

fn rat_extremes(xb: &[BigRational], xa: &[BigRational]) -> (BigRational, BigRational) {
    let ratios: Vec<BigRational> = xb.iter().zip(xa).map(|(b, a)| b / a).collect();
    (
        ratios.iter().min().expect("nonempty").clone(),
        ratios.iter().max().expect("nonempty").clone(),
    )
}

/// Bounds on `||A_1 ... A_n||_1 / prod rho(A_i)` from the chain of Perron
/// vectors. The entrywise 1-norm of a `d x d` product picks up a factor `d`
/// from summing the `d` row bounds.
pub fn norm_growth_bounds(matrices: &[IntMatrix]) -> Result<NormBounds> {
    if matrices.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let perron: Vec<PerronData> = matrices
        .par_iter()
        .map(|m| perron_data(m, DEFAULT_PERRON_TOL))
        .collect::<Result<_>>()?;
    let n = matrices.len();
    let d = matrices[0].rows();
    let product = matrices[1..]
        .iter()
        .fold(matrices[0].clone(), |acc, m| acc.mul(m));
    let norm = product.norm1();
    if perron.iter().all(|p| p.exact.is_some()) {
        let xs: Vec<&Vec<BigRational>> = perron
            .iter()
            .map(|p| &p.exact.as_ref().expect("checked").1)
            .collect();
        let rho_prod: BigInt = perron
            .iter()
            .map(|p| p.exact.as_ref().expect("checked").0.clone())
            .product();
        let xn = xs[n - 1];
        let max = xn.iter().max().expect("d >= 1");
        let min = xn.iter().min().expect("d >= 1");
        let (big_m, small_m) = (max / min, min / max);
        let mut up = BigRational::from_integer(BigInt::from(d)) / &small_m;
        let mut lo = BigRational::from_integer(BigInt::from(d)) / &big_m;
        for k in 1..n {
            let (rmin, rmax) = rat_extremes(xs[k], xs[k - 1]);
            up *= rmax;
            lo *= rmin;
        }
        let (rmin, rmax) = rat_extremes(xs[0], xn);
        up *= rmax;
        lo *= rmin;
        let actual = big_to_rat(&norm) / BigRational::from_integer(rho_prod);
        return Ok(NormBounds {
            lower: rat_to_f64(&lo),
            upper: rat_to_f64(&up),
            actual: rat_to_f64(&actual),
            exact: true,
        });
    }
    let xs: Vec<&Vec<f64>> = perron.iter().map(|p| &p.vector).collect();
    let xn = xs[n - 1];
    let max = xn.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = xn.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut log_up = (d as f64).ln() + (max / min).ln();
    let mut log_lo = (d as f64).ln() - (max / min).ln();
    for k in 1..n {
        let (rmin, rmax) = ratio_extremes(xs[k], xs[k - 1]);
        log_up += rmax.ln();
        log_lo += rmin.ln();
    }
    let (rmin, rmax) = ratio_extremes(xs[0], xn);
    log_up += rmax.ln();
    log_lo += rmin.ln();
    // Outward rounding for the floating eigenvectors.
    let slack = DECISION_MARGIN * (n as f64 + 1.0);
    let log_rho: f64 = perron.iter().map(|p| p.rho.ln()).sum();
    Ok(NormBounds {
        lower: (log_lo - slack).exp(),
        upper: (log_up + slack).exp(),
        actual: (ln_big(&norm) - log_rho).exp(),
        exact: false,
    })
}

/// Compare growth along the complement (`D`) and subdiagram (`C`) letter
/// sequences. Certified only with a clear margin and regular densities.
pub fn linrec_extension_decision(d_profile: &LinRecProfile, c_profile: &LinRecProfile) -> Verdict {
    let regular = d_profile.densities.regular && c_profile.densities.regular;
    let margin = |a: f64, b: f64| DECISION_MARGIN * (1.0 + a.abs().max(b.abs()));
    let detail = format!(
        "D in [{:.9}, {:.9}], C in [{:.9}, {:.9}]",
        d_profile.rho_lower(),
        d_profile.rho_upper(),
        c_profile.rho_lower(),
        c_profile.rho_upper()
    );
    if !regular {
        return Verdict::new(Claim::FiniteExtension, Evidence::Inconclusive)
            .note(
                "irregular-densities",
                "empirical densities drift between the last two windows",
            )
            .note("spectral-radii", detail);
    }
    let (dl, du, cl, cu) = (
        d_profile.log_rho_lower,
        d_profile.log_rho_upper,
        c_profile.log_rho_lower,
        c_profile.log_rho_upper,
    );
    if dl - cu > margin(dl, cu) {
        Verdict::new(Claim::FiniteExtension, Evidence::CertifiedNo)
            .note("lower-radius-dominates", detail)
    } else if cl - du > margin(cl, du) {
        Verdict::new(Claim::FiniteExtension, Evidence::CertifiedYes)
            .note("upper-radius-dominated", detail)
    } else {
        Verdict::new(Claim::FiniteExtension, Evidence::Inconclusive)
            .note("overlapping-radii", detail)
    }
}

/// Alphabet and sequence of a linearly recurrent diagram.
pub fn letters_of(diagram: &Diagram) -> Result<(Vec<IntMatrix>, SymbolStream)> {
    let g = diagram.generator();
    let offset = g.start_level - 1;
    let shift = |s: SymbolStream| -> SymbolStream {
        if offset == 0 {
            return s;
        }
        match s {
            SymbolStream::Periodic { prefix, cycle } => {
                if offset < prefix.len() {
                    SymbolStream::periodic(prefix[offset..].to_vec(), cycle)
                } else {
                    let p = cycle.len();
                    let r = (offset - prefix.len()) % p.max(1);
                    let mut rotated = cycle[r..].to_vec();
                    rotated.extend_from_slice(&cycle[..r]);
                    SymbolStream::periodic(Vec::new(), rotated)
                }
            }
            other => other,
        }
    };
    match &g.kind {
        GeneratorKind::Stationary(m) => Ok((vec![m.clone()], SymbolStream::constant(0))),
        GeneratorKind::Periodic(list) => Ok((
            list.clone(),
            shift(SymbolStream::periodic(
                Vec::new(),
                (0..list.len()).collect(),
            )),
        )),
        GeneratorKind::SymbolSequence { alphabet, omega } => match omega {
            SymbolStream::Substitution { .. } if offset > 0 => Err(Error::invalid(
                "substitution sequences with a start level are not supported here",
            )),
            _ => Ok((alphabet.clone(), shift(omega.clone()))),
        },
        GeneratorKind::Explicit { matrices, tail } => {
            let mut alphabet: Vec<IntMatrix> = Vec::new();
            let mut index = |m: &IntMatrix| match alphabet.iter().position(|a| a == m) {
                Some(i) => i,
                None => {
                    alphabet.push(m.clone());
                    alphabet.len() - 1
                }
            };
            let symbols: Vec<usize> = matrices.iter().map(&mut index).collect();
            let stream = match tail {
                Tail::RepeatLast => {
                    let last = *symbols.last().ok_or(Error::EmptyAlphabet)?;
                    SymbolStream::periodic(symbols, vec![last])
                }
                Tail::Cycle => SymbolStream::periodic(Vec::new(), symbols),
                _ => return Err(Error::ConnectorsUnbounded),
            };
            Ok((alphabet, shift(stream)))
        }
        GeneratorKind::Parametric(_) => match g.finite_alphabet() {
            Some(a) => Ok((a, SymbolStream::constant(0))),
            None => Err(Error::ConnectorsUnbounded),
        },
    }
}

#[derive(Debug, Clone)]
pub struct TwoBlockDecision {
    pub d_profile: LinRecProfile,
    pub c_profile: LinRecProfile,
    pub verdict: Verdict,
}

/// Split every letter into the blocks on `W` (C) and on its complement (D),
/// check the triangular shape, and compare spectral radii. Products along the
/// diagram run `F_n ... F_1`, so the profiles use transposed letters.
pub fn linrec_two_block(
    diagram: &Diagram,
    w: &[usize],
    horizon: usize,
) -> Result<TwoBlockDecision> {
    let d = diagram.rank();
    let mut w = w.to_vec();
    w.sort_unstable();
    w.dedup();
    if w.is_empty() || w.len() >= d || w.iter().any(|&v| v >= d) {
        return Err(Error::SpecNotProper(
            "W must be a nonempty proper vertex subset".into(),
        ));
    }
    let wc: Vec<usize> = (0..d).filter(|v| !w.contains(v)).collect();
    let (alphabet, omega) = letters_of(diagram)?;
    for m in &alphabet {
        if wc
            .iter()
            .any(|&v| w.iter().any(|&u| !m.get(v, u).is_zero()))
        {
            return Err(Error::NotTwoBlock(
                "the complement receives edges from W".into(),
            ));
        }
    }
    let project = |rows: &[usize]| -> Result<(Vec<IntMatrix>, SymbolStream)> {
        let mut letters: Vec<IntMatrix> = Vec::new();
        let map: Vec<usize> = alphabet
            .iter()
            .map(|m| {
                let b = m.submatrix(rows, rows).transpose();
                match letters.iter().position(|x| *x == b) {
                    Some(i) => i,
                    None => {
                        letters.push(b);
                        letters.len() - 1
                    }
                }
            })
            .collect();
        let stream = match &omega {
            SymbolStream::Periodic { prefix, cycle } => SymbolStream::periodic(
                prefix.iter().map(|&s| map[s]).collect(),
                cycle.iter().map(|&s| map[s]).collect(),
            ),
            SymbolStream::Substitution { .. } => {
                // Substitutions need not commute with the letter merge; use a
                // long explicit prefix instead.
                let word = omega.prefix(horizon.max(2) + 1);
                let mapped: Vec<usize> = word.iter().map(|&s| map[s]).collect();
                return Ok((letters, SymbolStream::periodic(mapped, Vec::new())));
            }
        };
        Ok((letters, stream))
    };
    let (dl, ds) = project(&wc)?;
    let (cl, cs) = project(&w)?;
    let profile = |letters: &[IntMatrix], s: &SymbolStream| -> Result<LinRecProfile> {
        match s {
            SymbolStream::Periodic { cycle, prefix } if cycle.is_empty() => {
                // Finite prefix of a stream: rebuild the empirical profile.
                let k = letters.len();
                let n = prefix.len() - 1;
                let (l, p) = empirical(prefix, n, k);
                let (hl, hp) = empirical(prefix, n / 2, k);
                let mut drift = l
                    .iter()
                    .zip(&hl)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                for key in p.keys().chain(hp.keys()) {
                    drift =
                        drift.max((p.get(key).unwrap_or(&0.0) - hp.get(key).unwrap_or(&0.0)).abs());
                }
                let perron: Vec<PerronData> = letters
                    .iter()
                    .map(|m| perron_data(m, DEFAULT_PERRON_TOL))
                    .collect::<Result<_>>()?;
                let dens = Densities {
                    letters: l,
                    pairs: p,
                    exact_letters: None,
                    exact_pairs: None,
                    horizon: Some(n),
                    regular: drift <= REGULARITY_DRIFT,
                };
                let (log_rho_upper, log_rho_lower) = log_radii(&perron, &dens);
                Ok(LinRecProfile {
                    alphabet: letters.to_vec(),
                    omega: s.clone(),
                    perron,
                    densities: dens,
                    log_rho_upper,
                    log_rho_lower,
                    norm_roots: Vec::new(),
                })
            }
            _ => spectral_radii_along(letters, s, horizon),
        }
    };
    let d_profile = profile(&dl, &ds)?;
    let c_profile = profile(&cl, &cs)?;
    let verdict = linrec_extension_decision(&d_profile, &c_profile);
    Ok(TwoBlockDecision {
        d_profile,
        c_profile,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u64]]) -> IntMatrix {
        IntMatrix::from_u64(rows)
    }

    #[test]
    fn perron_examples() {
        let p = perron_data(&m(&[&[2, 1], &[1, 2]]), DEFAULT_PERRON_TOL).unwrap();
        assert_eq!(p.rho, 3.0);
        assert_eq!(p.vector, vec![0.5, 0.5]);
        let g = perron_data(&m(&[&[1, 1], &[1, 0]]), DEFAULT_PERRON_TOL).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.rho - phi).abs() < 1e-12);
        assert!(g.rho_bounds.0 <= phi && phi <= g.rho_bounds.1);
        assert!((g.vector[0] / g.vector[1] - phi).abs() < 1e-12);
        assert!(g.exact.is_none());
        assert!(matches!(
            perron_data(&m(&[&[0, 1], &[1, 0]]), DEFAULT_PERRON_TOL),
            Err(Error::NotPrimitive { max_power: 4 })
        ));
    }

    #[test]
    fn radii_examples() {
        let a = m(&[&[2, 1], &[1, 2]]);
        let b = m(&[&[1, 2], &[2, 1]]);
        let p = spectral_radii_along(std::slice::from_ref(&a), &SymbolStream::constant(0), 100).unwrap();
        assert!((p.rho_upper() - 3.0).abs() < 1e-12 && (p.rho_lower() - 3.0).abs() < 1e-12);
        let p = spectral_radii_along(&[a, b], &SymbolStream::periodic(vec![], vec![0, 1]), 100)
            .unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(
            p.densities.exact_letters.as_ref().unwrap(),
            &vec![half.clone(), half.clone()]
        );
        assert_eq!(p.densities.exact_pairs.as_ref().unwrap()[&(0, 1)], half);
        assert!((p.rho_upper() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_matrix_bounds() {
        let b = norm_growth_bounds(&[m(&[&[2, 1], &[1, 2]])]).unwrap();
        assert!(b.exact);
        assert_eq!(b.actual, 2.0);
        assert!(b.holds());
        let f = norm_growth_bounds(&[m(&[&[1, 1], &[1, 0]]), m(&[&[2, 1], &[1, 1]])]).unwrap();
        assert!(!f.exact && f.holds());
    }

    #[test]
    fn scaling_and_streams() {
        let a = m(&[&[1, 1], &[1, 0]]);
        let b = m(&[&[2, 1], &[1, 1]]);
        let fib = SymbolStream::Substitution {
            images: vec![vec![0, 1], vec![0]],
            start: 0,
        };
        let p = spectral_radii_along(&[a.clone(), b.clone()], &fib, DEFAULT_HORIZON).unwrap();
        assert!(p.densities.regular);
        assert!(p.rho_lower() <= p.rho_upper());
        let twice = |x: &IntMatrix| x.mul(&m(&[&[2, 0], &[0, 2]]));
        let q = spectral_radii_along(&[twice(&a), twice(&b)], &fib, DEFAULT_HORIZON).unwrap();
        assert!((q.log_rho_upper - p.log_rho_upper - 2f64.ln()).abs() < 1e-9);
        assert!((q.log_rho_lower - p.log_rho_lower - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn overlap_is_inconclusive() {
        let d = spectral_radii_along(&[m(&[&[2]])], &SymbolStream::constant(0), 10).unwrap();
        let c = spectral_radii_along(&[m(&[&[2]])], &SymbolStream::constant(0), 10).unwrap();
        assert_eq!(linrec_extension_decision(&d, &c).label(), "Inconclusive");
        let c3 = spectral_radii_along(&[m(&[&[3]])], &SymbolStream::constant(0), 10).unwrap();
        assert_eq!(
            linrec_extension_decision(&d, &c3).label(),
            "CertifiedFinite"
        );
        assert_eq!(
            linrec_extension_decision(&c3, &d).label(),
            "CertifiedInfinite"
        );
    }

    #[test]
    fn stationary_decisions() {
        let finite = Diagram::stationary(m(&[&[2, 0], &[1, 3]])).unwrap();
        assert_eq!(
            linrec_two_block(&finite, &[1], 64).unwrap().verdict.label(),
            "CertifiedFinite"
        );
        let infinite = Diagram::stationary(m(&[&[3, 0], &[1, 2]])).unwrap();
        assert_eq!(
            linrec_two_block(&infinite, &[1], 64)
                .unwrap()
                .verdict
                .label(),
            "CertifiedInfinite"
        );
        let full = Diagram::stationary(m(&[&[3, 1], &[1, 2]])).unwrap();
        assert!(matches!(
            linrec_two_block(&full, &[1], 64),
            Err(Error::NotTwoBlock(_))
        ));
    }
}
