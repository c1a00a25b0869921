//! S-adic words read off an ordered diagram, letter and factor frequencies,
//! and empirical correlations of tower indicators.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::Ordering;
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::matrix::{big_to_rat, rat_to_f64};

/// Default symbol cap for factor counting.
pub const DEFAULT_FACTOR_CAP: usize = 10_000_000;
/// How far above the cylinder level a correlation word may be rooted.
const MAX_EXTRA_LEVELS: usize = 64;

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

pub fn symbol_char(v: usize) -> Option<char> {
    ALPHABET.get(v).map(|&b| b as char)
}

pub fn render_word(word: &[usize]) -> Result<String> {
    word.iter()
        .map(|&v| {
            symbol_char(v)
                .ok_or_else(|| Error::invalid(format!("no single-character name for vertex {v}")))
        })
        .collect()
}

pub fn parse_word(text: &str) -> Result<Vec<usize>> {
    text.bytes()
        .map(|b| {
            ALPHABET
                .iter()
                .position(|&a| a == b)
                .ok_or_else(|| Error::invalid(format!("unknown symbol {:?}", b as char)))
        })
        .collect()
}

/// Streams `sigma_{m+1} o ... o sigma_n (top)` as letters of `V_m`, given the
/// sequences of matrix levels `m..n-1` (in that order).
#[derive(Debug, Clone)]
pub struct WordIter {
    levels: Vec<Vec<Vec<usize>>>,
    /// (levels above the base, vertex, next position)
    stack: Vec<(usize, usize, usize)>,
    single: Option<usize>,
}

impl WordIter {
    pub fn new(levels: Vec<Vec<Vec<usize>>>, top: usize) -> Self {
        let (stack, single) = if levels.is_empty() {
            (Vec::new(), Some(top))
        } else {
            (vec![(levels.len(), top, 0)], None)
        };
        WordIter {
            levels,
            stack,
            single,
        }
    }
}

impl Iterator for WordIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if let Some(v) = self.single.take() {
            return Some(v);
        }
        loop {
            let frame = self.stack.last_mut()?;
            let (k, v, i) = *frame;
            let seq = &self.levels[k - 1][v];
            if i == seq.len() {
                self.stack.pop();
                continue;
            }
            frame.2 += 1;
            let u = seq[i];
            if k == 1 {
                return Some(u);
            }
            self.stack.push((k - 1, u, 0));
        }
    }
}

/// A prefix of `sigma^(1,n)(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub symbols: Vec<usize>,
    pub truncated: bool,
    /// `h^(n)_v`, the length of the full word.
    pub full_length: BigUint,
}

fn check_vertex(diagram: &Diagram, v: usize) -> Result<()> {
    if v >= diagram.rank() {
        return Err(Error::invalid(format!("vertex {v} out of range")));
    }
    Ok(())
}

fn stream(diagram: &Diagram, order: &Ordering, v: usize, n: usize) -> Result<WordIter> {
    check_vertex(diagram, v)?;
    if n == 0 {
        return Err(Error::LevelOutOfRange { level: 0 });
    }
    Ok(WordIter::new(order.levels(diagram, n - 1)?, v))
}

/// `sigma^(1,n)(v)`, cut after `cap` symbols.
pub fn expand_word(
    diagram: &Diagram,
    order: &Ordering,
    v: usize,
    n: usize,
    cap: usize,
) -> Result<Word> {
    if cap == 0 {
        return Err(Error::invalid("cap must be at least 1"));
    }
    let full_length = diagram.heights(n)?[v].clone();
    let symbols: Vec<usize> = stream(diagram, order, v, n)?.take(cap).collect();
    let truncated = BigUint::from(symbols.len()) < full_length;
    Ok(Word {
        symbols,
        truncated,
        full_length,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorCount {
    pub factor: Vec<usize>,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyReport {
    pub full_length: BigUint,
    pub generated: usize,
    pub truncated: bool,
    /// Letter counts of the full word, `(F_{n-1} ... F_1)_{v,.}`, over its length.
    pub exact: Vec<BigRational>,
    /// Letter frequencies in the generated prefix.
    pub empirical: Vec<f64>,
    pub max_difference: f64,
    pub factors: Vec<FactorCount>,
}

/// Letter frequencies two ways, plus overlapping factor counts on the
/// generated prefix.
pub fn frequency_report(
    diagram: &Diagram,
    order: &Ordering,
    v: usize,
    n: usize,
    factors: &[Vec<usize>],
    cap: usize,
) -> Result<FrequencyReport> {
    if cap == 0 {
        return Err(Error::invalid("cap must be at least 1"));
    }
    if factors.iter().any(Vec::is_empty) {
        return Err(Error::invalid("factors must be nonempty"));
    }
    let d = diagram.rank();
    let iter = stream(diagram, order, v, n)?;
    let product = diagram.range_product(1, n - 1, false)?;
    let full_length = diagram.heights(n)?[v].clone();
    let h = big_to_rat(&full_length);
    let exact: Vec<BigRational> = product.row(v).iter().map(|c| big_to_rat(c) / &h).collect();

    let longest = factors.iter().map(Vec::len).max().unwrap_or(0);
    let mut window: VecDeque<usize> = VecDeque::with_capacity(longest + 1);
    let mut letter_counts = vec![0u64; d];
    let mut factor_counts = vec![0u64; factors.len()];
    let mut generated = 0usize;
    for s in iter.take(cap) {
        generated += 1;
        letter_counts[s] += 1;
        if longest > 0 {
            window.push_back(s);
            if window.len() > longest {
                window.pop_front();
            }
            for (f, count) in factors.iter().zip(factor_counts.iter_mut()) {
                if window.len() >= f.len()
                    && window.iter().skip(window.len() - f.len()).eq(f.iter())
                {
                    *count += 1;
                }
            }
        }
    }
    let empirical: Vec<f64> = letter_counts
        .iter()
        .map(|&c| c as f64 / generated as f64)
        .collect();
    let max_difference = exact
        .iter()
        .zip(&empirical)
        .map(|(e, x)| (rat_to_f64(e) - x).abs())
        .fold(0.0, f64::max);
    let factors = factors
        .iter()
        .zip(factor_counts)
        .map(|(f, count)| {
            let slots = (generated + 1).saturating_sub(f.len());
            FactorCount {
                factor: f.clone(),
                count,
                frequency: if slots == 0 {
                    0.0
                } else {
                    count as f64 / slots as f64
                },
            }
        })
        .collect();
    Ok(FrequencyReport {
        truncated: BigUint::from(generated) < full_length,
        full_length,
        generated,
        exact,
        empirical,
        max_difference,
        factors,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub q: u64,
    /// Fraction of positions `i` with `i` and `i + q` both in the tower.
    pub estimate: f64,
    /// `estimate / mu(B)^2`; near 1 for a mixing system at large `q`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub vertex: usize,
    pub level: usize,
    /// Level of the vertex whose word was generated.
    pub word_level: usize,
    pub generated: usize,
    /// Empirical `mu(X_v^(m))`.
    pub mass: f64,
    pub rows: Vec<CorrelationRow>,
}

fn to_u64(x: &BigUint) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

/// Tower heights `h^(k)_v` and sums `h^(k)_a + h^(k)_b` for `k >= m`, up to
/// `cap / 2`.
pub fn default_q_grid(diagram: &Diagram, v: usize, m: usize, cap: usize) -> Result<Vec<u64>> {
    let limit = (cap / 2) as u64;
    let d = diagram.rank();
    let mut out = Vec::new();
    let mut k = m;
    loop {
        if diagram.max_level().is_some_and(|top| k > top + 1) {
            break;
        }
        let h: Vec<u64> = diagram.heights(k)?.iter().map(to_u64).collect();
        if h.iter().all(|&x| x > limit) {
            break;
        }
        out.push(h[v]);
        for a in 0..d {
            for b in a..d {
                out.push(h[a].saturating_add(h[b]));
            }
        }
        k += 1;
    }
    out.retain(|&q| q <= limit);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Empirical `mu(X ∩ T^{-q} X)` for the tower `X = X_v^(m)`, read off a long
/// word rooted at vertex 0 above level `m`.
pub fn correlation_report(
    diagram: &Diagram,
    order: &Ordering,
    v: usize,
    m: usize,
    q_list: Option<&[u64]>,
    cap: usize,
) -> Result<CorrelationReport> {
    check_vertex(diagram, v)?;
    if m == 0 {
        return Err(Error::LevelOutOfRange { level: 0 });
    }
    let qs = match q_list {
        Some(q) => q.to_vec(),
        None => default_q_grid(diagram, v, m, cap)?,
    };
    if let Some(&q) = qs.iter().find(|&&q| q > (cap / 2) as u64) {
        return Err(Error::CapTooSmall { q, cap: cap as u64 });
    }
    // Root the word high enough to cover `cap` positions when possible.
    let top_allowed = diagram
        .max_level()
        .map_or(m + MAX_EXTRA_LEVELS, |t| (t + 1).min(m + MAX_EXTRA_LEVELS));
    let mut word_level = m;
    while word_level < top_allowed && to_u64(&diagram.heights(word_level)?[0]) < cap as u64 {
        word_level += 1;
    }
    let hm: Vec<u64> = diagram.heights(m)?.iter().map(to_u64).collect();
    let levels: Vec<Vec<Vec<usize>>> = (m..word_level)
        .map(|k| order.level(diagram, k))
        .collect::<Result<_>>()?;
    let mut inside: Vec<bool> = Vec::with_capacity(cap);
    for w in WordIter::new(levels, 0) {
        let room = cap - inside.len();
        let len = (hm[w] as usize).min(room);
        inside.extend(std::iter::repeat_n(w == v, len));
        if inside.len() == cap {
            break;
        }
    }
    let generated = inside.len();
    let hits = inside.par_iter().filter(|&&b| b).count();
    let mass = hits as f64 / generated as f64;
    let rows = qs
        .iter()
        .map(|&q| {
            let q = q as usize;
            let span = generated.saturating_sub(q);
            let both = (0..span)
                .into_par_iter()
                .filter(|&i| inside[i] && inside[i + q])
                .count();
            let estimate = if span == 0 {
                0.0
            } else {
                both as f64 / span as f64
            };
            CorrelationRow {
                q: q as u64,
                estimate,
                ratio: if mass > 0.0 {
                    estimate / (mass * mass)
                } else {
                    f64::NAN
                },
            }
        })
        .collect();
    Ok(CorrelationReport {
        vertex: v,
        level: m,
        word_level,
        generated,
        mass,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::vershik::morse_diagram;

    #[test]
    fn thue_morse_word() {
        let m = morse_diagram(2, &[vec![0, 1]]).unwrap();
        let w = expand_word(&m.diagram, &m.ordering, 0, 4, 100).unwrap();
        assert_eq!(render_word(&w.symbols).unwrap(), "abbabaab");
        assert_eq!(w.full_length, BigUint::from(8u32));
        assert!(!w.truncated);
        let w = expand_word(&m.diagram, &m.ordering, 0, 4, 5).unwrap();
        assert!(w.truncated);
        assert_eq!(parse_word("abbab").unwrap(), w.symbols);
    }

    #[test]
    fn odometer_frequency() {
        let d = Diagram::stationary(IntMatrix::from_u64(&[&[3]])).unwrap();
        let r = frequency_report(&d, &Ordering::Consecutive, 0, 5, &[vec![0, 0]], 1000).unwrap();
        assert_eq!(r.empirical, vec![1.0]);
        assert_eq!(r.generated, 81);
        assert_eq!(r.factors[0].count, 80);
    }

    #[test]
    fn zero_shift_correlation() {
        let m = morse_diagram(2, &[vec![0, 1]]).unwrap();
        let r = correlation_report(&m.diagram, &m.ordering, 0, 2, Some(&[0, 3]), 4096).unwrap();
        assert_eq!(r.rows[0].estimate, r.mass);
        assert!(matches!(
            correlation_report(&m.diagram, &m.ordering, 0, 2, Some(&[5000]), 4096),
            Err(Error::CapTooSmall { q: 5000, .. })
        ));
        let grid = default_q_grid(&m.diagram, 0, 1, 64).unwrap();
        assert_eq!(grid, vec![1, 2, 4, 8, 16, 32]);
    }
}
